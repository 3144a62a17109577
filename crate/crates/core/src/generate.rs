//! Seeded instance and kernel generators.
//!
//! All randomness comes from `ChaCha20Rng::seed_from_u64(seed)`. Element
//! shuffling inside the family builders uses stream 0; bundles and kernels
//! drawn by [`generate_instance`] use stream 1 of the same seed, in the order
//! bundle dimensions, then kernel. Entries are standard complex normals.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bundle::HilbertBundle;
use crate::error::{Error, Result};
use crate::io::Instance;
use crate::kernel::{ActionFrame, OpKernel, Partition};
use crate::numlin::{
    herm_eig, herm_fn, identity, pinv, real_diag, zeros, CMatrix, CVector, MatrixFn, Tolerances,
    C64,
};
use crate::sgpd::families::{self, Family};
use crate::sgpd::{Elem, LeftAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    PsdInvariant,
    HermitianInvariant,
    Arbitrary,
}

impl KernelMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "psd_invariant" | "psd-invariant" => Ok(Self::PsdInvariant),
            "hermitian_invariant" | "hermitian-invariant" => Ok(Self::HermitianInvariant),
            "arbitrary" => Ok(Self::Arbitrary),
            other => Err(Error::BadFamilyParams(format!(
                "unknown kernel mode `{other}`"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PsdInvariant => "psd_invariant",
            Self::HermitianInvariant => "hermitian_invariant",
            Self::Arbitrary => "arbitrary",
        }
    }
}

pub fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn normal(rng: &mut ChaCha20Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn random_matrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

/// `M D M*` with `M` of size `n × rank` and `D` diagonal with entries of
/// magnitude in `[0.5, 2)`; all positive when `definite`.
pub fn random_gram(rng: &mut ChaCha20Rng, n: usize, rank: usize, definite: bool) -> CMatrix {
    let m = random_matrix(rng, n, rank);
    let d: Vec<f64> = (0..rank)
        .map(|_| {
            let v = rng.random_range(0.5..2.0);
            if definite || rng.random_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect();
    let g = &m * real_diag(&d) * m.adjoint();
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Dimensions drawn per orbit component, so the bundle is orbit-trivial.
pub fn random_bundle(
    rng: &mut ChaCha20Rng,
    act: &LeftAction,
    max_dim: usize,
) -> Result<Arc<HilbertBundle>> {
    let comps = act.orbit_components();
    let mut dims: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::with_capacity(act.len());
    for x in act.points() {
        let n = *dims
            .entry(comps[x.0])
            .or_insert_with(|| rng.random_range(1..=max_dim.max(1)));
        out.push((act.label(x).to_string(), n));
    }
    Ok(Arc::new(HilbertBundle::new(out)?))
}

/// A random kernel supported on the part blocks of `p`, with random rank
/// per part.
pub fn random_part_kernel(
    rng: &mut ChaCha20Rng,
    bundle: &Arc<HilbertBundle>,
    p: &Partition,
    definite: bool,
) -> Result<OpKernel> {
    part_kernel_with_min_rank(rng, bundle, p, definite, 0)
}

fn part_kernel_with_min_rank(
    rng: &mut ChaCha20Rng,
    bundle: &Arc<HilbertBundle>,
    p: &Partition,
    definite: bool,
    min_rank: usize,
) -> Result<OpKernel> {
    let mats: Vec<CMatrix> = p
        .parts()
        .iter()
        .map(|(_, idx)| {
            let n = idx.total_dim();
            let rank = rng.random_range(min_rank.min(n)..=n);
            random_gram(rng, n, rank, definite)
        })
        .collect();
    OpKernel::from_part_matrices(bundle, p, &mats)
}

/// A random bundle of at most `max_points` points with fibers of dimension
/// at most `max_dim`, split into at most `max_parts` parts, and a random
/// kernel on it.
pub fn random_kernel_instance(
    rng: &mut ChaCha20Rng,
    max_points: usize,
    max_dim: usize,
    max_parts: usize,
    definite: bool,
) -> Result<(Arc<HilbertBundle>, Partition, OpKernel)> {
    let n = rng.random_range(1..=max_points.max(1));
    let bundle =
        Arc::new(HilbertBundle::new((0..n).map(|i| {
            (format!("x{i}"), rng.random_range(1..=max_dim.max(1)))
        }))?);
    let parts = rng.random_range(1..=max_parts.max(1).min(n));
    let mut groups: Vec<Vec<_>> = vec![Vec::new(); parts];
    for (i, x) in bundle.points().enumerate() {
        let g = if i < parts {
            i
        } else {
            rng.random_range(0..parts)
        };
        groups[g].push(x);
    }
    let p = Partition::from_parts(
        &bundle,
        groups
            .into_iter()
            .enumerate()
            .map(|(i, g)| (format!("p{i}"), g))
            .collect(),
    )?;
    let k = random_part_kernel(rng, &bundle, &p, definite)?;
    Ok((bundle, p, k))
}

/// An invariant kernel together with an invariant kernel dominating it.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantPair {
    pub kernel: OpKernel,
    pub dominant: OpKernel,
    /// `group-average` or `regular-representation`.
    pub construction: &'static str,
}

/// Group actions average `Ψ(g)* A Ψ(g)` over the group. Left-regular
/// actions of inverse semigroupoids whose involution is the inverse use
/// `K(x, y) = V_x* J V_y` with `V_β = Φ_β W_{d(β)}`, where `Φ` is the left
/// regular representation on `ℓ²(Γ) ⊗ ℂ^k` and `J = I ⊗ J_0`.
pub fn invariant_pair(
    rng: &mut ChaCha20Rng,
    frame: &ActionFrame,
    definite: bool,
) -> Result<InvariantPair> {
    let sg = frame.action().semigroupoid();
    let class = sg.classify()?;
    if sg.symbol_count() == 1 && class.is_groupoid {
        return group_average(rng, frame, definite);
    }
    if let (Some(inv), Some(true)) = (&class.inverse_map, class.star_is_inverse) {
        if let Some(elems) = regular_points(frame.action()) {
            return regular_oracle(rng, frame, inv, &elems, definite);
        }
    }
    Err(Error::UnsupportedFamily(
        "invariant kernels are generated for group actions and for left-regular actions of inverse semigroupoids".into(),
    ))
}

fn group_average(
    rng: &mut ChaCha20Rng,
    frame: &ActionFrame,
    definite: bool,
) -> Result<InvariantPair> {
    let n = frame.partition().index(0).total_dim();
    let rank = rng.random_range(1..=n);
    let a = random_gram(rng, n, rank, definite);
    let abs = herm_fn(&a, MatrixFn::Abs, &Tolerances::default())?;
    let shifts = frame.shifts();
    let avg = |m: &CMatrix| {
        let mut acc = zeros(n, n);
        for s in &shifts {
            acc += s.adjoint() * m * s;
        }
        acc / C64::new(shifts.len() as f64, 0.0)
    };
    let b = frame.bundle();
    let p = frame.partition();
    Ok(InvariantPair {
        kernel: OpKernel::from_part_matrices(b, p, &[avg(&a)])?,
        dominant: OpKernel::from_part_matrices(b, p, &[avg(&abs)])?,
        construction: "group-average",
    })
}

/// For a left-regular action, the element each point stands for.
fn regular_points(act: &LeftAction) -> Option<Vec<Elem>> {
    let sg = act.semigroupoid();
    if act.len() != sg.len() {
        return None;
    }
    let elems: Vec<Elem> = act
        .points()
        .map(|x| sg.elem(act.label(x)))
        .collect::<Option<_>>()?;
    for a in sg.elems() {
        for x in act.points() {
            let expect = sg.compose(a, elems[x.0]).map(|ab| sg.label(ab));
            if act.act(a, x).map(|y| act.label(y)) != expect {
                return None;
            }
        }
    }
    Some(elems)
}

fn regular_oracle(
    rng: &mut ChaCha20Rng,
    frame: &ActionFrame,
    inv: &[Elem],
    elems: &[Elem],
    definite: bool,
) -> Result<InvariantPair> {
    let act = frame.action();
    let sg = act.semigroupoid();
    let bundle = frame.bundle();
    let k_mult = if definite {
        rng.random_range(1..=2)
    } else {
        rng.random_range(2..=3)
    };
    let mut signs: Vec<f64> = (0..k_mult)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    if definite {
        signs.iter_mut().for_each(|s| *s = 1.0);
    } else {
        signs[0] = 1.0;
        signs[1] = -1.0;
    }
    let big = sg.len() * k_mult;
    let j = CMatrix::from_diagonal(&CVector::from_fn(big, |r, _| {
        C64::new(signs[r % k_mult], 0.0)
    }));

    let phi = |a: Elem| {
        let mut m = zeros(big, big);
        for b in sg.elems() {
            if let Some(ab) = sg.compose(a, b) {
                if sg.compose(inv[a.0], ab) == Some(b) {
                    for i in 0..k_mult {
                        m[(ab.0 * k_mult + i, b.0 * k_mult + i)] = C64::new(1.0, 0.0);
                    }
                }
            }
        }
        m
    };
    let mut w: HashMap<(usize, usize), CMatrix> = HashMap::new();
    let features: Vec<CMatrix> = act
        .points()
        .map(|x| {
            let e = elems[x.0];
            let n = bundle.dim(x);
            let wm = w
                .entry((sg.d(e).0, n))
                .or_insert_with(|| random_matrix(rng, big, n));
            phi(e) * &*wm
        })
        .collect();
    let p = frame.partition();
    let mut k = OpKernel::zero(bundle);
    let mut l = OpKernel::zero(bundle);
    let ident = identity(big);
    for (_, idx) in p.parts() {
        for &x in idx.points() {
            for &y in idx.points() {
                let vx = features[x.0].adjoint();
                k.insert(x, y, &vx * &j * &features[y.0])?;
                l.insert(x, y, &vx * &ident * &features[y.0])?;
            }
        }
    }
    Ok(InvariantPair {
        kernel: k,
        dominant: l,
        construction: "regular-representation",
    })
}

/// Kernel in the requested mode for the instance skeleton `frame`.
pub fn generate_kernel(
    rng: &mut ChaCha20Rng,
    frame: &ActionFrame,
    mode: KernelMode,
) -> Result<OpKernel> {
    match mode {
        KernelMode::PsdInvariant => Ok(invariant_pair(rng, frame, true)?.kernel),
        KernelMode::HermitianInvariant => Ok(invariant_pair(rng, frame, false)?.kernel),
        KernelMode::Arbitrary => {
            part_kernel_with_min_rank(rng, frame.bundle(), frame.partition(), false, 1)
        }
    }
}

/// A family instance with a random orbit-trivial bundle and, when a mode
/// is given, a kernel. Invariant modes also return the generated dominant.
pub fn generate_instance(
    family: &Family,
    seed: u64,
    max_dim: usize,
    mode: Option<KernelMode>,
) -> Result<(Instance, Option<OpKernel>)> {
    let (sg, act) = families::generate(family, seed)?;
    let act = Arc::new(act);
    let mut r = rng(seed, 1);
    let bundle = random_bundle(&mut r, &act, max_dim)?;
    let frame = ActionFrame::new(Arc::clone(&act), Arc::clone(&bundle))?;
    let (kernel, dominant) = match mode {
        None => (None, None),
        Some(KernelMode::Arbitrary) => (
            Some(generate_kernel(&mut r, &frame, KernelMode::Arbitrary)?),
            None,
        ),
        Some(m) => {
            let pair = invariant_pair(&mut r, &frame, m == KernelMode::PsdInvariant)?;
            (Some(pair.kernel), Some(pair.dominant))
        }
    };
    Ok((
        Instance {
            semigroupoid: sg,
            action: act,
            bundle,
            kernel,
        },
        dominant,
    ))
}

/// Hermitian `A` (`n × n`), `B` (`m × m`) and `T: ℂⁿ → ℂᵐ`, `S: ℂᵐ → ℂⁿ`
/// with `BT = S*A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftQuadruple {
    pub a: CMatrix,
    pub b: CMatrix,
    pub t: CMatrix,
    pub s: CMatrix,
}

/// `T` is forced to map `ker A` into `ker B`, then `S* = B T A⁺` plus a
/// random term vanishing on `ran A`.
pub fn random_lift_quadruple(rng: &mut ChaCha20Rng, max_dim: usize) -> Result<LiftQuadruple> {
    let tol = Tolerances::default();
    let n = rng.random_range(1..=max_dim.max(1));
    let m = rng.random_range(1..=max_dim.max(1));
    let (ra, rb) = (rng.random_range(0..=n), rng.random_range(0..=m));
    let a = random_gram(rng, n, ra, false);
    let b = random_gram(rng, m, rb, false);
    let proj = |g: &CMatrix| -> Result<(CMatrix, CMatrix)> {
        let eig = herm_eig(g, &tol)?;
        let z = eig.columns(&eig.classify(&tol).zero);
        let pk = &z * z.adjoint();
        Ok((identity(g.nrows()) - &pk, pk))
    };
    let (ran_a, ker_a) = proj(&a)?;
    let (_, ker_b) = proj(&b)?;
    let t = random_matrix(rng, m, n) * &ran_a + &ker_b * random_matrix(rng, m, n) * &ker_a;
    let a_pinv = pinv(&a, &tol)?;
    let s_adj = &b * &t * a_pinv + random_matrix(rng, m, n) * &ker_a;
    Ok(LiftQuadruple {
        a,
        b,
        t,
        s: s_adj.adjoint(),
    })
}
