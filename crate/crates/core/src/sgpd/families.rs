//! Built-in instance families. Seed 0 keeps the canonical element order; any
//! other seed shuffles it with a ChaCha20 stream.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

use super::{ActionTables, LeftAction, SemigroupoidTables, StarSemigroupoid};

/// Multiplication table of a finite group on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    labels: Vec<String>,
    mul: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl GroupTable {
    /// `mul[a * n + b] = ab`. Checks closure, associativity, identity and
    /// inverses.
    pub fn new(labels: Vec<String>, mul: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || mul.len() != n * n || mul.iter().any(|&v| v >= n) {
            return Err(Error::BadFamilyParams(
                "group table must be n×n with entries in 0..n".into(),
            ));
        }
        let m = |a: usize, b: usize| mul[a * n + b];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if m(m(a, b), c) != m(a, m(b, c)) {
                        return Err(Error::BadFamilyParams(format!(
                            "group table not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| m(e, a) == a && m(a, e) == a))
            .ok_or_else(|| Error::BadFamilyParams("group table has no identity".into()))?;
        let inverse = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| m(a, b) == identity && m(b, a) == identity)
                    .ok_or_else(|| Error::BadFamilyParams(format!("element {a} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            labels,
            mul,
            identity,
            inverse,
        })
    }

    pub fn cyclic(n: usize) -> Self {
        let n = n.max(1);
        let labels = (0..n).map(|k| format!("r{k}")).collect();
        let mul = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        Self::new(labels, mul).expect("cyclic table is a group")
    }

    /// Symmetries of the regular `n`-gon; element `k + n·e` is `r^k s^e`.
    pub fn dihedral(n: usize) -> Self {
        let n = n.max(1);
        let idx = |k: usize, e: usize| k + n * e;
        let mut labels = Vec::with_capacity(2 * n);
        for e in 0..2 {
            for k in 0..n {
                labels.push(if e == 0 {
                    format!("r{k}")
                } else {
                    format!("r{k}s")
                });
            }
        }
        let mut mul = vec![0; 4 * n * n];
        for (e, f) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for a in 0..n {
                for b in 0..n {
                    let k = if e == 0 { (a + b) % n } else { (a + n - b) % n };
                    mul[idx(a, e) * 2 * n + idx(b, f)] = idx(k, (e + f) % 2);
                }
            }
        }
        Self::new(labels, mul).expect("dihedral table is a group")
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order() + b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }
}

/// Instance family with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    PairGroupoid(Vec<String>),
    GroupAction {
        group: GroupTable,
        points: Vec<String>,
        /// `perms[g][i]` is the index of `g·x_i`.
        perms: Vec<Vec<usize>>,
    },
    PartialBijections(Vec<usize>),
    GroupAsGroupoid(GroupTable),
}

impl Family {
    /// Short names used on the command line: `pair-groupoid:k`,
    /// `cyclic-rotation:n`, `dihedral-action:n`, `cyclic-group:n`,
    /// `dihedral-group:n`, `partial-bijections:a,b,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::BadFamilyParams(format!("expected name:params, got `{spec}`")))?;
        let nums = arg
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::BadFamilyParams(format!("`{t}` is not a count")))
            })
            .collect::<Result<Vec<_>>>()?;
        let one = || match nums.as_slice() {
            [n] if *n >= 1 => Ok(*n),
            _ => Err(Error::BadFamilyParams(format!(
                "`{name}` takes one positive count"
            ))),
        };
        match name {
            "pair-groupoid" => Ok(Self::PairGroupoid(
                (0..one()?).map(|i| format!("s{i}")).collect(),
            )),
            "cyclic-rotation" => {
                let n = one()?;
                Ok(Self::GroupAction {
                    group: GroupTable::cyclic(n),
                    points: (0..n).map(|i| format!("x{i}")).collect(),
                    perms: (0..n)
                        .map(|k| (0..n).map(|i| (i + k) % n).collect())
                        .collect(),
                })
            }
            "dihedral-action" => {
                let n = one()?;
                let perms = (0..2 * n)
                    .map(|g| {
                        let (k, e) = (g % n, g / n);
                        (0..n)
                            .map(|i| if e == 0 { (k + i) % n } else { (k + n - i) % n })
                            .collect()
                    })
                    .collect();
                Ok(Self::GroupAction {
                    group: GroupTable::dihedral(n),
                    points: (0..n).map(|i| format!("x{i}")).collect(),
                    perms,
                })
            }
            "cyclic-group" => Ok(Self::GroupAsGroupoid(GroupTable::cyclic(one()?))),
            "dihedral-group" => Ok(Self::GroupAsGroupoid(GroupTable::dihedral(one()?))),
            "partial-bijections" => {
                if nums.is_empty() || nums.contains(&0) {
                    return Err(Error::BadFamilyParams(
                        "fiber sizes must be positive".into(),
                    ));
                }
                Ok(Self::PartialBijections(nums))
            }
            other => Err(Error::BadFamilyParams(format!("unknown family `{other}`"))),
        }
    }
}

pub fn generate(family: &Family, seed: u64) -> Result<(Arc<StarSemigroupoid>, LeftAction)> {
    match family {
        Family::PairGroupoid(symbols) => pair_groupoid(symbols, seed),
        Family::GroupAction {
            group,
            points,
            perms,
        } => {
            let pts: Vec<&str> = points.iter().map(String::as_str).collect();
            group_action(group, &pts, perms, seed)
        }
        Family::PartialBijections(sizes) => partial_bijections(sizes, seed),
        Family::GroupAsGroupoid(group) => group_as_groupoid(group, seed),
    }
}

fn shuffle_elements(t: &mut SemigroupoidTables, seed: u64) {
    if seed != 0 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        t.elements.shuffle(&mut rng);
    }
}

/// Pair groupoid on the given symbols: `(u,v)` has `c = u`, `d = v`,
/// `(u,v)(v,w) = (u,w)` and `(u,v)* = (v,u)`.
pub fn pair_groupoid_tables(symbols: &[String]) -> SemigroupoidTables {
    let name = |u: &str, v: &str| format!("({u},{v})");
    let mut t = SemigroupoidTables {
        symbols: symbols.to_vec(),
        units: Some(symbols.iter().map(|s| (s.clone(), name(s, s))).collect()),
        ..Default::default()
    };
    for u in symbols {
        for v in symbols {
            t.elements.push((name(u, v), v.clone(), u.clone()));
            t.star.push((name(u, v), name(v, u)));
            for w in symbols {
                t.compose.push((name(u, v), name(v, w), name(u, w)));
            }
        }
    }
    t
}

pub fn pair_groupoid(symbols: &[String], seed: u64) -> Result<(Arc<StarSemigroupoid>, LeftAction)> {
    if symbols.is_empty() {
        return Err(Error::BadFamilyParams(
            "pair groupoid needs at least one symbol".into(),
        ));
    }
    let mut t = pair_groupoid_tables(symbols);
    shuffle_elements(&mut t, seed);
    let sg = Arc::new(StarSemigroupoid::from_tables(&t)?);
    let act = left_regular_action(&sg)?;
    Ok((sg, act))
}

fn group_tables(group: &GroupTable) -> SemigroupoidTables {
    let n = group.order();
    let sym = "*".to_string();
    let mut t = SemigroupoidTables {
        symbols: vec![sym.clone()],
        units: Some(vec![(sym.clone(), group.label(group.identity()).into())]),
        ..Default::default()
    };
    for a in 0..n {
        t.elements
            .push((group.label(a).into(), sym.clone(), sym.clone()));
        t.star
            .push((group.label(a).into(), group.label(group.inverse(a)).into()));
        for b in 0..n {
            t.compose.push((
                group.label(a).into(),
                group.label(b).into(),
                group.label(group.mul(a, b)).into(),
            ));
        }
    }
    t
}

/// A finite group as a one-symbol groupoid acting on itself.
pub fn group_as_groupoid(
    group: &GroupTable,
    seed: u64,
) -> Result<(Arc<StarSemigroupoid>, LeftAction)> {
    let mut t = group_tables(group);
    shuffle_elements(&mut t, seed);
    let sg = Arc::new(StarSemigroupoid::from_tables(&t)?);
    let act = left_regular_action(&sg)?;
    Ok((sg, act))
}

/// A group acting on named points through permutations.
pub fn group_action(
    group: &GroupTable,
    points: &[&str],
    perms: &[Vec<usize>],
    seed: u64,
) -> Result<(Arc<StarSemigroupoid>, LeftAction)> {
    let n = group.order();
    let m = points.len();
    if m == 0 {
        return Err(Error::BadFamilyParams(
            "group action needs at least one point".into(),
        ));
    }
    if perms.len() != n {
        return Err(Error::BadFamilyParams(format!(
            "expected {n} permutations, got {}",
            perms.len()
        )));
    }
    for (g, p) in perms.iter().enumerate() {
        let mut seen = vec![false; m];
        if p.len() != m
            || p.iter()
                .any(|&i| i >= m || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::BadFamilyParams(format!(
                "image list of {} is not a permutation",
                group.label(g)
            )));
        }
    }
    for a in 0..n {
        for b in 0..n {
            let ab = group.mul(a, b);
            if (0..m).any(|i| perms[ab][i] != perms[a][perms[b][i]]) {
                return Err(Error::BadFamilyParams(format!(
                    "permutations do not respect the product {}·{}",
                    group.label(a),
                    group.label(b)
                )));
            }
        }
    }
    let mut t = group_tables(group);
    shuffle_elements(&mut t, seed);
    let sg = Arc::new(StarSemigroupoid::from_tables(&t)?);
    let at = ActionTables {
        anchor: points
            .iter()
            .map(|x| (x.to_string(), "*".to_string()))
            .collect(),
        act: (0..n)
            .flat_map(|g| (0..m).map(move |i| (g, i)))
            .map(|(g, i)| {
                (
                    group.label(g).to_string(),
                    points[i].to_string(),
                    points[perms[g][i]].to_string(),
                )
            })
            .collect(),
    };
    let act = LeftAction::from_tables(Arc::clone(&sg), &at)?;
    Ok((sg, act))
}

/// Partial injections between fibers `F_i = {0, …, n_i − 1}`, composed as
/// maps. The empty map between every pair of fibers is an element.
pub fn partial_bijections(
    sizes: &[usize],
    seed: u64,
) -> Result<(Arc<StarSemigroupoid>, LeftAction)> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::BadFamilyParams(
            "fiber sizes must be positive".into(),
        ));
    }
    let mut t = partial_bijection_tables(sizes);
    shuffle_elements(&mut t, seed);
    let sg = Arc::new(StarSemigroupoid::from_tables(&t)?);
    let act = left_regular_action(&sg)?;
    Ok((sg, act))
}

type PartialMap = Vec<Option<usize>>;

fn partial_injections(n: usize, m: usize) -> Vec<PartialMap> {
    fn rec(
        k: usize,
        n: usize,
        m: usize,
        used: &mut Vec<bool>,
        cur: &mut PartialMap,
        out: &mut Vec<PartialMap>,
    ) {
        if k == n {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        rec(k + 1, n, m, used, cur, out);
        cur.pop();
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                cur.push(Some(j));
                rec(k + 1, n, m, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, &mut vec![false; m], &mut Vec::new(), &mut out);
    out
}

fn pb_label(i: usize, j: usize, f: &PartialMap) -> String {
    let imgs: Vec<String> = f
        .iter()
        .map(|v| v.map_or_else(|| "_".to_string(), |k| k.to_string()))
        .collect();
    format!("F{i}>F{j}[{}]", imgs.join(","))
}

pub fn partial_bijection_tables(sizes: &[usize]) -> SemigroupoidTables {
    let k = sizes.len();
    let maps: Vec<Vec<Vec<PartialMap>>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| partial_injections(sizes[i], sizes[j]))
                .collect()
        })
        .collect();
    let symbols: Vec<String> = (0..k).map(|i| format!("F{i}")).collect();
    let mut t = SemigroupoidTables {
        symbols: symbols.clone(),
        units: Some(
            (0..k)
                .map(|i| {
                    (
                        symbols[i].clone(),
                        pb_label(i, i, &(0..sizes[i]).map(Some).collect()),
                    )
                })
                .collect(),
        ),
        ..Default::default()
    };
    for i in 0..k {
        for j in 0..k {
            for f in &maps[i][j] {
                t.elements
                    .push((pb_label(i, j, f), symbols[i].clone(), symbols[j].clone()));
                let mut inv = vec![None; sizes[j]];
                for (a, b) in f.iter().enumerate() {
                    if let Some(b) = b {
                        inv[*b] = Some(a);
                    }
                }
                t.star.push((pb_label(i, j, f), pb_label(j, i, &inv)));
                // α: F_j → F_l after f: F_i → F_j.
                for l in 0..k {
                    for a in &maps[j][l] {
                        let prod: PartialMap = f.iter().map(|v| v.and_then(|b| a[b])).collect();
                        t.compose.push((
                            pb_label(j, l, a),
                            pb_label(i, j, f),
                            pb_label(i, l, &prod),
                        ));
                    }
                }
            }
        }
    }
    t
}

/// `Γ` acting on itself: `a = c` and `β·α = βα`.
pub fn left_regular_action(sg: &Arc<StarSemigroupoid>) -> Result<LeftAction> {
    let mut t = ActionTables {
        anchor: sg
            .elems()
            .map(|e| {
                (
                    sg.label(e).to_string(),
                    sg.symbol_label(sg.c(e)).to_string(),
                )
            })
            .collect(),
        act: Vec::new(),
    };
    for b in sg.elems() {
        for a in sg.elems() {
            if sg.d(b) == sg.c(a) {
                let ba = sg.mul(b, a)?;
                t.act
                    .push((sg.label(b).into(), sg.label(a).into(), sg.label(ba).into()));
            }
        }
    }
    LeftAction::from_tables(Arc::clone(sg), &t)
}

/// `Γ` acting on its symbols: `a = id` and `α·s = c(α)`.
pub fn symbol_action(sg: &Arc<StarSemigroupoid>) -> Result<LeftAction> {
    let t = ActionTables {
        anchor: sg
            .symbols()
            .map(|s| {
                (
                    sg.symbol_label(s).to_string(),
                    sg.symbol_label(s).to_string(),
                )
            })
            .collect(),
        act: sg
            .elems()
            .map(|a| {
                (
                    sg.label(a).to_string(),
                    sg.symbol_label(sg.d(a)).to_string(),
                    sg.symbol_label(sg.c(a)).to_string(),
                )
            })
            .collect(),
    };
    LeftAction::from_tables(Arc::clone(sg), &t)
}
