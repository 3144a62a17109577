//! Finite base sets carrying a coordinate Hilbert space at each point, and the
//! finitely supported sections over them.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numlin::{CVector, C64};

/// Index of a point in its bundle's fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertBundle {
    labels: Vec<String>,
    dims: Vec<usize>,
    lookup: HashMap<String, Point>,
}

impl HilbertBundle {
    /// Points keep the order in which they are given.
    pub fn new<I, S>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        let mut lookup = HashMap::new();
        for (label, dim) in points {
            let label = label.into();
            if dim == 0 {
                return Err(Error::ZeroDim(label));
            }
            if lookup.insert(label.clone(), Point(labels.len())).is_some() {
                return Err(Error::DuplicateLabel(label));
            }
            labels.push(label);
            dims.push(dim);
        }
        Ok(Self {
            labels,
            dims,
            lookup,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.labels.len()).map(Point)
    }

    pub fn dim(&self, x: Point) -> usize {
        self.dims[x.0]
    }

    pub fn label(&self, x: Point) -> &str {
        &self.labels[x.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn point(&self, label: &str) -> Option<Point> {
        self.lookup.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<Point> {
        self.point(label)
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    fn check_point(&self, x: Point) -> Result<()> {
        if x.0 < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(format!("#{}", x.0)))
        }
    }
}

/// A finitely supported section `x ↦ f(x) ∈ H_x`. Points outside the
/// support carry the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    bundle: Arc<HilbertBundle>,
    support: BTreeMap<Point, CVector>,
}

impl Section {
    pub fn zero(bundle: &Arc<HilbertBundle>) -> Self {
        Self {
            bundle: Arc::clone(bundle),
            support: BTreeMap::new(),
        }
    }

    pub fn bundle(&self) -> &Arc<HilbertBundle> {
        &self.bundle
    }

    pub fn support(&self) -> impl Iterator<Item = (Point, &CVector)> {
        self.support.iter().map(|(x, v)| (*x, v))
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Value at `x`, zero off the support.
    pub fn value(&self, x: Point) -> CVector {
        self.support
            .get(&x)
            .cloned()
            .unwrap_or_else(|| CVector::zeros(self.bundle.dim(x)))
    }

    fn same_bundle(&self, other: &Section) -> Result<()> {
        if Arc::ptr_eq(&self.bundle, &other.bundle) || self.bundle == other.bundle {
            Ok(())
        } else {
            Err(Error::BundleMismatch)
        }
    }

    fn insert(&mut self, x: Point, v: CVector) {
        if v.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            self.support.remove(&x);
        } else {
            self.support.insert(x, v);
        }
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        self.same_bundle(other)?;
        let mut out = self.clone();
        for (x, v) in other.support() {
            let sum = out.value(x) + v;
            out.insert(x, sum);
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Section {
        let mut out = Section::zero(&self.bundle);
        for (x, v) in self.support() {
            out.insert(x, v * s);
        }
        out
    }
}

/// `δ_x h`.
pub fn delta_section(bundle: &Arc<HilbertBundle>, x: Point, h: CVector) -> Result<Section> {
    bundle.check_point(x)?;
    if h.len() != bundle.dim(x) {
        return Err(Error::DimMismatch {
            what: bundle.label(x).to_string(),
            expected: bundle.dim(x),
            got: h.len(),
        });
    }
    let mut s = Section::zero(bundle);
    s.insert(x, h);
    Ok(s)
}

/// `⟨f, g⟩₀ = Σ_x ⟨f(x), g(x)⟩`, conjugate-linear in `g`.
pub fn inner0(f: &Section, g: &Section) -> Result<C64> {
    f.same_bundle(g)?;
    let mut acc = C64::new(0.0, 0.0);
    for (x, fx) in f.support() {
        if let Some(gx) = g.support.get(&x) {
            acc += gx.dotc(fx);
        }
    }
    Ok(acc)
}

/// Block layout of one part of a partition inside a stacked coordinate
/// vector. Points appear in the bundle's global order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartIndex {
    points: Vec<Point>,
    offsets: Vec<usize>,
    dims: Vec<usize>,
    total_dim: usize,
    position: HashMap<Point, usize>,
}

impl PartIndex {
    pub fn new(bundle: &HilbertBundle, mut points: Vec<Point>) -> Result<Self> {
        for &x in &points {
            bundle.check_point(x)?;
        }
        points.sort();
        points.dedup();
        let mut offsets = Vec::with_capacity(points.len());
        let mut dims = Vec::with_capacity(points.len());
        let mut position = HashMap::new();
        let mut total_dim = 0;
        for (i, &x) in points.iter().enumerate() {
            offsets.push(total_dim);
            dims.push(bundle.dim(x));
            position.insert(x, i);
            total_dim += bundle.dim(x);
        }
        Ok(Self {
            points,
            offsets,
            dims,
            total_dim,
            position,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn contains(&self, x: Point) -> bool {
        self.position.contains_key(&x)
    }

    pub fn offset(&self, x: Point) -> Option<usize> {
        self.position.get(&x).map(|&i| self.offsets[i])
    }

    /// Coordinate range occupied by `x`.
    pub fn range(&self, x: Point) -> Option<Range<usize>> {
        self.position
            .get(&x)
            .map(|&i| self.offsets[i]..self.offsets[i] + self.dims[i])
    }

    /// Iterates `(point, coordinate range)` in layout order.
    pub fn blocks(&self) -> impl Iterator<Item = (Point, Range<usize>)> + '_ {
        self.points
            .iter()
            .zip(self.offsets.iter().zip(&self.dims))
            .map(|(&x, (&o, &d))| (x, o..o + d))
    }
}

pub fn stack(f: &Section, idx: &PartIndex) -> Result<CVector> {
    let mut v = CVector::zeros(idx.total_dim());
    for (x, fx) in f.support() {
        let r = idx
            .range(x)
            .ok_or_else(|| Error::SupportOutsidePart(f.bundle().label(x).to_string()))?;
        v.rows_mut(r.start, r.len()).copy_from(fx);
    }
    Ok(v)
}

pub fn unstack(v: &CVector, idx: &PartIndex, bundle: &Arc<HilbertBundle>) -> Result<Section> {
    if v.len() != idx.total_dim() {
        return Err(Error::DimMismatch {
            what: "stacked vector".to_string(),
            expected: idx.total_dim(),
            got: v.len(),
        });
    }
    let mut s = Section::zero(bundle);
    for (x, r) in idx.blocks() {
        s.insert(x, v.rows(r.start, r.len()).into_owned());
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bundle() -> Arc<HilbertBundle> {
        Arc::new(HilbertBundle::new([("x1", 1), ("x2", 2), ("x3", 2)]).unwrap())
    }

    #[test]
    fn rejects_bad_bundles() {
        assert!(matches!(
            HilbertBundle::new([("a", 0)]),
            Err(Error::ZeroDim(_))
        ));
        assert!(matches!(
            HilbertBundle::new([("a", 1), ("a", 2)]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn delta_sections() {
        let b = Arc::new(HilbertBundle::new([("x1", 2), ("x2", 1)]).unwrap());
        let s = delta_section(
            &b,
            Point(0),
            CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        assert_eq!(s.support().count(), 1);
        let z = delta_section(&b, Point(0), CVector::zeros(2)).unwrap();
        assert!(z.is_zero());
        let i = delta_section(&b, Point(1), CVector::from_vec(vec![c(0.0, 1.0)])).unwrap();
        assert_eq!(i.value(Point(1))[0], c(0.0, 1.0));
        assert!(matches!(
            delta_section(&b, Point(1), CVector::zeros(2)),
            Err(Error::DimMismatch { .. })
        ));
        assert!(matches!(
            delta_section(&b, Point(7), CVector::zeros(1)),
            Err(Error::UnknownPoint(_))
        ));
    }

    #[test]
    fn inner0_examples() {
        let b = Arc::new(HilbertBundle::new([("x1", 2), ("x2", 1), ("x3", 1)]).unwrap());
        let e1 = delta_section(
            &b,
            Point(0),
            CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let e2 = delta_section(
            &b,
            Point(0),
            CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        assert_eq!(inner0(&e1, &e2).unwrap(), c(0.0, 0.0));
        let three = delta_section(&b, Point(1), CVector::from_vec(vec![c(3.0, 0.0)])).unwrap();
        assert_eq!(inner0(&three, &three).unwrap(), c(9.0, 0.0));
        let other = delta_section(&b, Point(2), CVector::from_vec(vec![c(2.0, 0.0)])).unwrap();
        assert_eq!(inner0(&three, &other).unwrap(), c(0.0, 0.0));
        // conjugate-linear in the second slot
        let i = delta_section(&b, Point(1), CVector::from_vec(vec![c(0.0, 1.0)])).unwrap();
        assert_eq!(inner0(&three, &i).unwrap(), c(0.0, -3.0));

        let b2 = Arc::new(HilbertBundle::new([("y", 1)]).unwrap());
        let y = delta_section(&b2, Point(0), CVector::from_vec(vec![c(1.0, 0.0)])).unwrap();
        assert!(matches!(inner0(&three, &y), Err(Error::BundleMismatch)));
    }

    #[test]
    fn stack_layout() {
        let b = bundle();
        let idx = PartIndex::new(&b, vec![Point(1), Point(0)]).unwrap();
        assert_eq!(idx.total_dim(), 3);
        let f = delta_section(
            &b,
            Point(1),
            CVector::from_vec(vec![c(5.0, 0.0), c(6.0, 0.0)]),
        )
        .unwrap();
        let v = stack(&f, &idx).unwrap();
        assert_eq!(v.as_slice(), &[c(0.0, 0.0), c(5.0, 0.0), c(6.0, 0.0)]);
        assert!(unstack(&CVector::zeros(3), &idx, &b).unwrap().is_zero());

        let outside = delta_section(
            &b,
            Point(2),
            CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        assert!(matches!(
            stack(&outside, &idx),
            Err(Error::SupportOutsidePart(_))
        ));
        assert!(matches!(
            unstack(&CVector::zeros(2), &idx, &b),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn delta_sum_reconstructs_section() {
        let b = bundle();
        let idx = PartIndex::new(&b, b.points().collect()).unwrap();
        let v = CVector::from_fn(5, |i, _| c(i as f64 - 1.0, 0.5 * i as f64));
        let f = unstack(&v, &idx, &b).unwrap();
        let mut sum = Section::zero(&b);
        for (x, fx) in f.support() {
            sum = sum.add(&delta_section(&b, x, fx.clone()).unwrap()).unwrap();
        }
        assert_eq!(sum, f);
    }

    fn cvec(n: usize) -> impl Strategy<Value = CVector> {
        prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), n).prop_map(|v| {
            CVector::from_iterator(v.len(), v.into_iter().map(|(r, i)| C64::new(r, i)))
        })
    }

    proptest! {
        #[test]
        fn stacking_is_an_isometric_bijection(v in cvec(5), w in cvec(5)) {
            let b = bundle();
            let idx = PartIndex::new(&b, b.points().collect()).unwrap();
            let f = unstack(&v, &idx, &b).unwrap();
            let g = unstack(&w, &idx, &b).unwrap();
            prop_assert_eq!(stack(&f, &idx).unwrap(), v.clone());
            let lhs = inner0(&f, &g).unwrap();
            let rhs = w.dotc(&v);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn delta_is_linear(h in cvec(2), k in cvec(2), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let b = bundle();
            let s = C64::new(re, im);
            let lhs = delta_section(&b, Point(1), &h * s + &k).unwrap();
            let rhs = delta_section(&b, Point(1), h.clone()).unwrap().scale(s)
                .add(&delta_section(&b, Point(1), k.clone()).unwrap()).unwrap();
            let diff = stack(&lhs, &PartIndex::new(&b, vec![Point(1)]).unwrap()).unwrap()
                - stack(&rhs, &PartIndex::new(&b, vec![Point(1)]).unwrap()).unwrap();
            prop_assert!(diff.norm() <= 1e-12);
        }
    }
}
