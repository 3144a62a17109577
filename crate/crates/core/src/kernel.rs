//! Operator-valued kernels over a bundle, Gram block matrices per part,
//! invariance under an action and the associated shift matrices.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bundle::{stack, HilbertBundle, PartIndex, Point, Section};
use crate::error::{Error, Result};
use crate::numlin::{
    frobenius, herm_eig, hermitian_residual, lambda_max, psd_factor, psd_from, zeros, CMatrix,
    Tolerances, C64,
};
use crate::sgpd::{Elem, LeftAction, Symbol};

/// `K(x, y)` stored as a `dim(x) × dim(y)` block; absent blocks are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OpKernel {
    bundle: Arc<HilbertBundle>,
    blocks: BTreeMap<(Point, Point), CMatrix>,
}

impl OpKernel {
    pub fn zero(bundle: &Arc<HilbertBundle>) -> Self {
        Self {
            bundle: Arc::clone(bundle),
            blocks: BTreeMap::new(),
        }
    }

    pub fn bundle(&self) -> &Arc<HilbertBundle> {
        &self.bundle
    }

    pub fn insert(&mut self, x: Point, y: Point, block: CMatrix) -> Result<()> {
        let expected = (self.bundle.dim(x), self.bundle.dim(y));
        if block.shape() != expected {
            return Err(Error::ShapeMismatch {
                row: self.bundle.label(x).to_string(),
                col: self.bundle.label(y).to_string(),
                expected,
                got: block.shape(),
            });
        }
        self.blocks.insert((x, y), block);
        Ok(())
    }

    pub fn block(&self, x: Point, y: Point) -> CMatrix {
        self.blocks
            .get(&(x, y))
            .cloned()
            .unwrap_or_else(|| zeros(self.bundle.dim(x), self.bundle.dim(y)))
    }

    pub fn stored(&self) -> impl Iterator<Item = (Point, Point, &CMatrix)> {
        self.blocks.iter().map(|(&(x, y), b)| (x, y, b))
    }

    fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            bundle: Arc::clone(&self.bundle),
            blocks: self.blocks.iter().map(|(k, b)| (*k, f(b))).collect(),
        }
    }

    fn combine(&self, other: &OpKernel, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        if !Arc::ptr_eq(&self.bundle, &other.bundle) && self.bundle != other.bundle {
            return Err(Error::BundleMismatch);
        }
        let mut out = OpKernel::zero(&self.bundle);
        for &k in self.blocks.keys().chain(other.blocks.keys()) {
            out.blocks
                .entry(k)
                .or_insert_with(|| f(&self.block(k.0, k.1), &other.block(k.0, k.1)));
        }
        Ok(out)
    }

    pub fn add(&self, other: &OpKernel) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &OpKernel) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|b| b * C64::new(s, 0.0))
    }

    /// `K*(x, y) = K(y, x)*`.
    pub fn adjoint_kernel(&self) -> Self {
        Self {
            bundle: Arc::clone(&self.bundle),
            blocks: self
                .blocks
                .iter()
                .map(|(&(x, y), b)| ((y, x), b.adjoint()))
                .collect(),
        }
    }

    /// `(K + K*)/2` and `(K − K*)/2i`, so that `K = Re K + i Im K`.
    pub fn re_im(&self) -> (Self, Self) {
        let adj = self.adjoint_kernel();
        let re = self.add(&adj).expect("same bundle").scale(0.5);
        let im = self
            .sub(&adj)
            .expect("same bundle")
            .map(|b| b * C64::new(0.0, -0.5));
        (re, im)
    }

    /// Kernel whose within-part blocks are read off per-part matrices laid
    /// out as in `conv_blocks`.
    pub fn from_part_matrices(
        bundle: &Arc<HilbertBundle>,
        p: &Partition,
        mats: &[CMatrix],
    ) -> Result<Self> {
        let mut k = OpKernel::zero(bundle);
        for ((_, idx), g) in p.parts().iter().zip(mats) {
            if g.shape() != (idx.total_dim(), idx.total_dim()) {
                return Err(Error::DimMismatch {
                    what: "part matrix".into(),
                    expected: idx.total_dim(),
                    got: g.nrows(),
                });
            }
            for (x, rx) in idx.blocks() {
                for (y, ry) in idx.blocks() {
                    let b = g
                        .view((rx.start, ry.start), (rx.len(), ry.len()))
                        .into_owned();
                    if b.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                        k.blocks.insert((x, y), b);
                    }
                }
            }
        }
        Ok(k)
    }
}

/// Disjoint cover of the base set by labelled parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    parts: Vec<(String, PartIndex)>,
    part_of: Vec<usize>,
}

impl Partition {
    pub fn from_parts(bundle: &HilbertBundle, parts: Vec<(String, Vec<Point>)>) -> Result<Self> {
        let mut part_of = vec![usize::MAX; bundle.len()];
        let mut out = Vec::with_capacity(parts.len());
        for (i, (label, pts)) in parts.into_iter().enumerate() {
            for &x in &pts {
                if x.0 >= bundle.len() {
                    return Err(Error::UnknownPoint(format!("#{}", x.0)));
                }
                if part_of[x.0] != usize::MAX {
                    return Err(Error::CrossRef {
                        file: "partition".into(),
                        msg: format!("point `{}` lies in two parts", bundle.label(x)),
                    });
                }
                part_of[x.0] = i;
            }
            out.push((label, PartIndex::new(bundle, pts)?));
        }
        if let Some(x) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::CrossRef {
                file: "partition".into(),
                msg: format!("point `{}` lies in no part", bundle.label(Point(x))),
            });
        }
        Ok(Self {
            parts: out,
            part_of,
        })
    }

    /// One part for the whole base set.
    pub fn single(bundle: &HilbertBundle) -> Self {
        Self::from_parts(bundle, vec![("all".into(), bundle.points().collect())]).expect("cover")
    }

    /// `X_s = {x : a(x) = s}`, one part per symbol in symbol order.
    pub fn from_anchor(act: &LeftAction, bundle: &HilbertBundle) -> Result<Self> {
        act.check_bundle(bundle)?;
        let sg = act.semigroupoid();
        let parts = sg
            .symbols()
            .map(|s| (sg.symbol_label(s).to_string(), act.part(s)))
            .collect();
        Self::from_parts(bundle, parts)
    }

    pub fn parts(&self) -> &[(String, PartIndex)] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn index(&self, s: usize) -> &PartIndex {
        &self.parts[s].1
    }

    pub fn label(&self, s: usize) -> &str {
        &self.parts[s].0
    }

    pub fn part_of(&self, x: Point) -> usize {
        self.part_of[x.0]
    }
}

/// `G_s` for every part: the `(x, y)` block is `K(x, y)`.
pub fn conv_blocks(k: &OpKernel, p: &Partition) -> Vec<CMatrix> {
    p.parts()
        .iter()
        .map(|(_, idx)| {
            let n = idx.total_dim();
            let mut g = zeros(n, n);
            for (x, rx) in idx.blocks() {
                for (y, ry) in idx.blocks() {
                    if let Some(b) = k.blocks.get(&(x, y)) {
                        g.view_mut((rx.start, ry.start), (rx.len(), ry.len()))
                            .copy_from(b);
                    }
                }
            }
            g
        })
        .collect()
}

/// Acceptance scale for residuals on a Gram matrix: `max(1, ‖G‖_F)`.
pub fn scale_of(g: &CMatrix) -> f64 {
    frobenius(g).max(1.0)
}

fn part_hermitian(g: &CMatrix, tol: &Tolerances) -> bool {
    hermitian_residual(g) <= tol.atol * scale_of(g)
}

/// Index of the first part whose Gram matrix is not Hermitian.
pub fn non_hermitian_part(k: &OpKernel, p: &Partition, tol: &Tolerances) -> Option<usize> {
    conv_blocks(k, p)
        .iter()
        .position(|g| !part_hermitian(g, tol))
}

pub fn is_partially_hermitian(k: &OpKernel, p: &Partition, tol: &Tolerances) -> bool {
    non_hermitian_part(k, p, tol).is_none()
}

/// Index of the first part whose Gram matrix is not Hermitian positive
/// semidefinite.
pub fn non_psd_part(k: &OpKernel, p: &Partition, tol: &Tolerances) -> Result<Option<usize>> {
    for (s, g) in conv_blocks(k, p).iter().enumerate() {
        if !part_hermitian(g, tol) {
            return Ok(Some(s));
        }
        if !psd_from(&herm_eig(g, tol)?, tol) {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

pub fn is_partially_psd(k: &OpKernel, p: &Partition, tol: &Tolerances) -> bool {
    matches!(non_psd_part(k, p, tol), Ok(None))
}

/// `⟨f, g⟩_K = (stack g)* G_s (stack f)` for sections supported in one part.
pub fn kernel_inner(k: &OpKernel, p: &Partition, f: &Section, g: &Section) -> Result<C64> {
    let mut part = None;
    for (x, _) in f.support().chain(g.support()) {
        let s = p.part_of(x);
        if part.is_some_and(|q| q != s) {
            return Err(Error::CrossPartSupport);
        }
        part = Some(s);
    }
    let Some(s) = part else {
        return Ok(C64::new(0.0, 0.0));
    };
    let idx = p.index(s);
    let gs = &conv_blocks(k, p)[s];
    let (vf, vg) = (stack(f, idx)?, stack(g, idx)?);
    Ok(vg.dotc(&(gs * vf)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dominance {
    /// `K ≤ L` on every part.
    pub dominates: bool,
    /// `−L ≤ K ≤ L` on every part.
    pub two_sided: bool,
}

pub fn dominates(l: &OpKernel, k: &OpKernel, p: &Partition, tol: &Tolerances) -> Result<Dominance> {
    for (name, ker) in [("L", l), ("K", k)] {
        if let Some(s) = non_hermitian_part(ker, p, tol) {
            return Err(Error::NotPartiallyHermitian(format!(
                "{name}: {}",
                p.label(s)
            )));
        }
    }
    let above = l.sub(k)?;
    let below = l.add(k)?;
    let dominates = non_psd_part(&above, p, tol)?.is_none();
    let two_sided = dominates && non_psd_part(&below, p, tol)?.is_none();
    Ok(Dominance {
        dominates,
        two_sided,
    })
}

/// Action, bundle and anchor partition together, with the fiber dimension
/// known to be constant along orbits.
#[derive(Debug, Clone)]
pub struct ActionFrame {
    act: Arc<LeftAction>,
    bundle: Arc<HilbertBundle>,
    partition: Partition,
}

impl ActionFrame {
    pub fn new(act: Arc<LeftAction>, bundle: Arc<HilbertBundle>) -> Result<Self> {
        if let Some(x) = act.orbit_mismatch(&bundle)? {
            return Err(Error::OrbitBundleNotTrivial(bundle.label(x).to_string()));
        }
        let partition = Partition::from_anchor(&act, &bundle)?;
        Ok(Self {
            act,
            bundle,
            partition,
        })
    }

    pub fn action(&self) -> &Arc<LeftAction> {
        &self.act
    }

    pub fn bundle(&self) -> &Arc<HilbertBundle> {
        &self.bundle
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn part(&self, s: Symbol) -> &PartIndex {
        self.partition.index(s.0)
    }

    /// `Ψ(α)`: `total_dim(c(α)) × total_dim(d(α))`, sending stacked `δ_x h`
    /// to stacked `δ_{α·x} h`.
    pub fn shift(&self, a: Elem) -> CMatrix {
        let sg = self.act.semigroupoid();
        let (dom, cod) = (self.part(sg.d(a)), self.part(sg.c(a)));
        let mut psi = zeros(cod.total_dim(), dom.total_dim());
        for (x, rx) in dom.blocks() {
            let y = self.act.act(a, x).expect("validated action");
            let ry = cod.range(y).expect("anchor of α·x is c(α)");
            for i in 0..rx.len() {
                psi[(ry.start + i, rx.start + i)] += C64::new(1.0, 0.0);
            }
        }
        psi
    }

    pub fn shifts(&self) -> Vec<CMatrix> {
        self.act
            .semigroupoid()
            .elems()
            .map(|a| self.shift(a))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceCheck {
    pub invariant: bool,
    /// Largest block residual `‖K(α·x, y) − K(x, α*·y)‖_F` seen.
    pub residual: f64,
    pub bound: f64,
    /// First violating `(α, x, y)`.
    pub witness: Option<(Elem, Point, Point)>,
}

/// Exhaustive check of `K(α·x, y) = K(x, α*·y)` for `x ∈ X_{d(α)}` and
/// `y ∈ X_{c(α)}`.
pub fn is_invariant(k: &OpKernel, frame: &ActionFrame, tol: &Tolerances) -> InvarianceCheck {
    let act = frame.action();
    let sg = act.semigroupoid();
    let scale = conv_blocks(k, frame.partition())
        .iter()
        .map(scale_of)
        .fold(1.0, f64::max);
    let bound = tol.atol * scale;
    let mut residual: f64 = 0.0;
    let mut witness = None;
    for a in sg.elems() {
        let astar = sg.star(a);
        for &x in frame.part(sg.d(a)).points() {
            let ax = act.act(a, x).expect("validated action");
            for &y in frame.part(sg.c(a)).points() {
                let sy = act.act(astar, y).expect("validated action");
                let r = frobenius(&(k.block(ax, y) - k.block(x, sy)));
                residual = residual.max(r);
                if r > bound && witness.is_none() {
                    witness = Some((a, x, y));
                }
            }
        }
    }
    InvarianceCheck {
        invariant: witness.is_none(),
        residual,
        bound,
        witness,
    }
}

/// `‖Ψ(α)* G_{c(α)} − G_{d(α)} Ψ(α*)‖_F`, the matrix form of invariance at `α`.
pub fn invariance_matrix_residual(
    gram: &[CMatrix],
    shifts: &[CMatrix],
    frame: &ActionFrame,
    a: Elem,
) -> f64 {
    let sg = frame.action().semigroupoid();
    let (d, c) = (sg.d(a).0, sg.c(a).0);
    let lhs = shifts[a.0].adjoint() * &gram[c];
    let rhs = &gram[d] * &shifts[sg.star(a).0];
    frobenius(&(lhs - rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftBound {
    Bounded(f64),
    /// `Ψ(α)` does not map `ker G_{d(α)}` into `ker G_{c(α)}`.
    Undefined {
        residual: f64,
    },
}

impl ShiftBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Bounded(m) => Some(*m),
            Self::Undefined { .. } => None,
        }
    }
}

/// Residual of the inclusion `Ψ ker(G_d) ⊆ ker(G_c)`, as `‖G_c Ψ N_d‖_F`
/// relative to `max(1, ‖G_c‖_F)`.
pub fn kernel_inclusion_residual(g_c: &CMatrix, psi: &CMatrix, null_d: &CMatrix) -> f64 {
    if null_d.ncols() == 0 || g_c.nrows() == 0 {
        return 0.0;
    }
    frobenius(&(g_c * psi * null_d)) / scale_of(g_c)
}

/// Least `M_α` with `⟨Ψ(α)f, Ψ(α)f⟩_L ≤ M_α ⟨f, f⟩_L`, computed on the
/// quotient by the kernel of `G^L_{d(α)}`.
pub fn bounded_shift_constant(
    l: &OpKernel,
    frame: &ActionFrame,
    a: Elem,
    tol: &Tolerances,
) -> Result<ShiftBound> {
    let gram = conv_blocks(l, frame.partition());
    let sg = frame.action().semigroupoid();
    let (d, c) = (sg.d(a).0, sg.c(a).0);
    for s in [d, c] {
        if !part_hermitian(&gram[s], tol) || !psd_from(&herm_eig(&gram[s], tol)?, tol) {
            return Err(Error::NotPsd(frame.partition().label(s).to_string()));
        }
    }
    let fd = psd_factor(&gram[d], tol)?;
    let psi = frame.shift(a);
    let residual = kernel_inclusion_residual(&gram[c], &psi, &fd.null);
    if residual > tol.atol {
        return Ok(ShiftBound::Undefined { residual });
    }
    if fd.rank() == 0 {
        return Ok(ShiftBound::Bounded(0.0));
    }
    let m = fd.right_inverse.adjoint() * psi.adjoint() * &gram[c] * &psi * &fd.right_inverse;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    Ok(ShiftBound::Bounded(lambda_max(&m, tol)?.max(0.0)))
}
