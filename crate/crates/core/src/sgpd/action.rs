use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::bundle::{HilbertBundle, Point};
use crate::error::{Error, Result};

use super::{Elem, StarSemigroupoid, Symbol, ValidationReport};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionTables {
    /// `(x, a(x))`, in point order.
    pub anchor: Vec<(String, String)>,
    /// `(α, x, α·x)`.
    pub act: Vec<(String, String, String)>,
}

/// A left action `(a; ·)` of a finite semigroupoid on a finite set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeftAction {
    sg: Arc<StarSemigroupoid>,
    points: Vec<String>,
    lookup: HashMap<String, Point>,
    anchor: Vec<Symbol>,
    act: Vec<Option<Point>>,
}

impl LeftAction {
    pub fn from_tables(sg: Arc<StarSemigroupoid>, t: &ActionTables) -> Result<Self> {
        let mut points = Vec::with_capacity(t.anchor.len());
        let mut lookup = HashMap::new();
        let mut anchor = Vec::with_capacity(t.anchor.len());
        for (x, s) in &t.anchor {
            if lookup.insert(x.clone(), Point(points.len())).is_some() {
                return Err(Error::DuplicateLabel(x.clone()));
            }
            points.push(x.clone());
            anchor.push(sg.symbol(s).ok_or_else(|| {
                Error::MalformedTable(format!("anchor of `{x}` names unknown symbol `{s}`"))
            })?);
        }
        let np = points.len();
        let mut act = vec![None; sg.len() * np];
        for (a, x, y) in &t.act {
            let a = sg.elem(a).ok_or_else(|| {
                Error::MalformedTable(format!("action names unknown element `{a}`"))
            })?;
            let pt = |l: &str| {
                lookup.get(l).copied().ok_or_else(|| {
                    Error::MalformedTable(format!("action names unknown point `{l}`"))
                })
            };
            let (x, y) = (pt(x)?, pt(y)?);
            let slot = &mut act[a.0 * np + x.0];
            if slot.replace(y).is_some_and(|prev| prev != y) {
                return Err(Error::MalformedTable(format!(
                    "conflicting action entries for ({}, {})",
                    sg.label(a),
                    points[x.0]
                )));
            }
        }
        Ok(Self {
            sg,
            points,
            lookup,
            anchor,
            act,
        })
    }

    pub fn to_tables(&self) -> ActionTables {
        let mut act = Vec::new();
        for a in self.sg.elems() {
            for x in self.points() {
                if let Some(y) = self.act(a, x) {
                    act.push((
                        self.sg.label(a).into(),
                        self.label(x).into(),
                        self.label(y).into(),
                    ));
                }
            }
        }
        ActionTables {
            anchor: self
                .points()
                .map(|x| {
                    (
                        self.label(x).into(),
                        self.sg.symbol_label(self.anchor(x)).into(),
                    )
                })
                .collect(),
            act,
        }
    }

    pub fn semigroupoid(&self) -> &Arc<StarSemigroupoid> {
        &self.sg
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        (0..self.points.len()).map(Point)
    }

    pub fn labels(&self) -> &[String] {
        &self.points
    }

    pub fn label(&self, x: Point) -> &str {
        &self.points[x.0]
    }

    pub fn point(&self, label: &str) -> Option<Point> {
        self.lookup.get(label).copied()
    }

    pub fn anchor(&self, x: Point) -> Symbol {
        self.anchor[x.0]
    }

    /// `α·x`, if recorded.
    pub fn act(&self, a: Elem, x: Point) -> Option<Point> {
        self.act[a.0 * self.len() + x.0]
    }

    /// Points anchored at `s`, in point order.
    pub fn part(&self, s: Symbol) -> Vec<Point> {
        self.points().filter(|&x| self.anchor(x) == s).collect()
    }

    /// The bundle must list exactly the action's points in the same order.
    pub fn check_bundle(&self, bundle: &HilbertBundle) -> Result<()> {
        if bundle.labels() != self.points.as_slice() {
            return Err(Error::CrossRef {
                file: "bundle".into(),
                msg: "bundle points differ from the action's base set".into(),
            });
        }
        Ok(())
    }

    pub fn validate_action(&self, unital: bool) -> ValidationReport {
        let sg = &self.sg;
        let mut rep = ValidationReport::default();
        for s in sg.symbols() {
            if !self.points().any(|x| self.anchor(x) == s) {
                rep.push(
                    "anchor-surjective",
                    vec![sg.symbol_label(s).into()],
                    "anchor misses this symbol",
                );
            }
        }
        for a in sg.elems() {
            for x in self.points() {
                let w = || vec![sg.label(a).to_string(), self.label(x).to_string()];
                match (sg.d(a) == self.anchor(x), self.act(a, x)) {
                    (true, None) => {
                        rep.push("action-domain", w(), "α·x undefined although d(α) = a(x)")
                    }
                    (false, Some(_)) => {
                        rep.push("action-domain", w(), "α·x defined although d(α) ≠ a(x)")
                    }
                    (true, Some(y)) if self.anchor(y) != sg.c(a) => {
                        let mut wit = w();
                        wit.push(self.label(y).into());
                        rep.push("action-domain", wit, "a(α·x) ≠ c(α)")
                    }
                    _ => {}
                }
            }
        }
        if !rep.has("action-domain") {
            for (a, b) in sg.composable_pairs() {
                let Some(ab) = sg.compose(a, b) else { continue };
                for x in self.points().filter(|&x| sg.d(b) == self.anchor(x)) {
                    let lhs = self.act(ab, x);
                    let rhs = self.act(b, x).and_then(|bx| self.act(a, bx));
                    if lhs != rhs {
                        rep.push(
                            "action-composition",
                            vec![sg.label(a).into(), sg.label(b).into(), self.label(x).into()],
                            "(αβ)·x ≠ α·(β·x)",
                        );
                    }
                }
            }
        }
        if unital {
            match sg.find_units() {
                None => rep.push("unital", vec![], "the semigroupoid has no unit"),
                Some(units) => {
                    for x in self.points() {
                        let e = units[self.anchor(x).0];
                        if self.act(e, x) != Some(x) {
                            rep.push(
                                "unital",
                                vec![sg.label(e).into(), self.label(x).into()],
                                "ε_{a(x)}·x ≠ x",
                            );
                        }
                    }
                }
            }
        }
        rep
    }

    /// `{α·x : α ∈ Γ_{a(x)}} ∪ {x}`.
    pub fn orbit(&self, x: Point) -> Result<BTreeSet<Point>> {
        if x.0 >= self.len() {
            return Err(Error::UnknownPoint(format!("#{}", x.0)));
        }
        let mut out = BTreeSet::from([x]);
        out.extend(self.sg.elems().filter_map(|a| self.act(a, x)));
        Ok(out)
    }

    /// First point whose orbit meets a different fiber dimension.
    pub fn orbit_mismatch(&self, bundle: &HilbertBundle) -> Result<Option<Point>> {
        self.check_bundle(bundle)?;
        for x in self.points() {
            if self
                .orbit(x)?
                .iter()
                .any(|&y| bundle.dim(y) != bundle.dim(x))
            {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }

    pub fn orbit_trivial_bundle(&self, bundle: &HilbertBundle) -> Result<bool> {
        Ok(self.orbit_mismatch(bundle)?.is_none())
    }

    /// Connected components of the graph with edges `x — α·x`; fiber
    /// dimensions chosen constant on each component give an orbit-trivial
    /// bundle.
    pub fn orbit_components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for a in self.sg.elems() {
            for x in self.points() {
                if let Some(y) = self.act(a, x) {
                    let (rx, ry) = (find(&mut parent, x.0), find(&mut parent, y.0));
                    if rx != ry {
                        parent[rx.max(ry)] = rx.min(ry);
                    }
                }
            }
        }
        let roots: Vec<usize> = (0..self.len()).map(|i| find(&mut parent, i)).collect();
        let mut ids = HashMap::new();
        roots
            .iter()
            .map(|r| {
                let next = ids.len();
                *ids.entry(*r).or_insert(next)
            })
            .collect()
    }
}
