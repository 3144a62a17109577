//! Minimal Hilbert space linearisations of partially positive semidefinite
//! kernels, their reproducing kernel spaces, and the *-representations
//! induced by invariant kernels.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bundle::{HilbertBundle, Point, Section};
use crate::error::{Error, Result};
use crate::kernel::{
    bounded_shift_constant, conv_blocks, is_invariant, kernel_inclusion_residual, non_psd_part,
    scale_of, ActionFrame, OpKernel, Partition, ShiftBound,
};
use crate::numlin::{
    frobenius, identity, pinv, psd_check, psd_factor_with, rank_tol, spectral_norm, CMatrix,
    CVector, SpectralFactor, TieBreak, Tolerances, C64,
};
use crate::sgpd::Classification;

/// Per-part factor `G_s = B_s* B_s` with `B_s` of full row rank.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertPart {
    pub gram: CMatrix,
    pub factor: SpectralFactor,
}

impl HilbertPart {
    pub fn rank(&self) -> usize {
        self.factor.rank()
    }

    /// `B_s`.
    pub fn b(&self) -> &CMatrix {
        &self.factor.map
    }

    /// `B_s⁺`.
    pub fn b_pinv(&self) -> &CMatrix {
        &self.factor.right_inverse
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertLinearisation {
    partition: Partition,
    parts: Vec<HilbertPart>,
}

impl HilbertLinearisation {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn parts(&self) -> &[HilbertPart] {
        &self.parts
    }

    pub fn part(&self, s: usize) -> &HilbertPart {
        &self.parts[s]
    }

    pub fn rank(&self, s: usize) -> usize {
        self.parts[s].rank()
    }

    /// `V_x = B_s ι_x`, an `r_s × dim(x)` column slice.
    pub fn feature(&self, x: Point) -> CMatrix {
        let s = self.partition.part_of(x);
        let r = self.partition.index(s).range(x).expect("point in its part");
        self.parts[s].b().columns(r.start, r.len()).into_owned()
    }

    /// Same linearisation with `B_s` replaced by `W_s B_s`.
    pub fn rotated(&self, w: &[CMatrix]) -> Self {
        let parts = self
            .parts
            .iter()
            .zip(w)
            .map(|(p, w)| HilbertPart {
                gram: p.gram.clone(),
                factor: SpectralFactor {
                    map: w * p.b(),
                    right_inverse: p.b_pinv() * w.adjoint(),
                    signs: p.factor.signs.clone(),
                    null: p.factor.null.clone(),
                },
            })
            .collect();
        Self {
            partition: self.partition.clone(),
            parts,
        }
    }
}

pub fn minimal_linearisation(
    k: &OpKernel,
    p: &Partition,
    tol: &Tolerances,
) -> Result<HilbertLinearisation> {
    minimal_linearisation_with(k, p, tol, TieBreak::Lexicographic)
}

/// Eigendecompose each `G_s`, keep the eigenpairs above the cutoff, and set
/// `B_s = Λ₊^{1/2} U₊*`.
pub fn minimal_linearisation_with(
    k: &OpKernel,
    p: &Partition,
    tol: &Tolerances,
    tie: TieBreak,
) -> Result<HilbertLinearisation> {
    if let Some(s) = non_psd_part(k, p, tol)? {
        return Err(Error::NotPartiallyPsd(p.label(s).to_string()));
    }
    let parts = conv_blocks(k, p)
        .into_iter()
        .map(|gram| {
            let factor = psd_factor_with(&gram, tol, tie)?;
            Ok(HilbertPart { gram, factor })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HilbertLinearisation {
        partition: p.clone(),
        parts,
    })
}

/// Largest `‖V_x* V_y − K(x, y)‖_F / max(1, ‖G_s‖_F)` over within-part pairs.
pub fn reconstruction_residual(lin: &HilbertLinearisation, k: &OpKernel) -> f64 {
    let mut worst: f64 = 0.0;
    for (s, part) in lin.parts().iter().enumerate() {
        let scale = scale_of(&part.gram);
        let pts = lin.partition().index(s).points();
        for &x in pts {
            let vx = lin.feature(x);
            for &y in pts {
                let r = frobenius(&(vx.adjoint() * lin.feature(y) - k.block(x, y)));
                worst = worst.max(r / scale);
            }
        }
    }
    worst
}

/// Parts whose feature maps fail to span the rank space.
pub fn minimality_defects(lin: &HilbertLinearisation, tol: &Tolerances) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for (s, part) in lin.parts().iter().enumerate() {
        let b = part.b();
        let r = rank_tol(&(b * b.adjoint()), tol)?;
        if r != part.rank() || r != rank_tol(&part.gram, tol)? {
            bad.push(s);
        }
    }
    Ok(bad)
}

/// The reproducing kernel space of one linearisation: members are the
/// sections `x ↦ V_x* f`.
#[derive(Debug, Clone, Copy)]
pub struct RkhsView<'a> {
    lin: &'a HilbertLinearisation,
    kernel: &'a OpKernel,
}

pub fn rkhs<'a>(kernel: &'a OpKernel, lin: &'a HilbertLinearisation) -> RkhsView<'a> {
    RkhsView { lin, kernel }
}

impl<'a> RkhsView<'a> {
    fn bundle(&self) -> &std::sync::Arc<HilbertBundle> {
        self.kernel.bundle()
    }

    /// Section `x ↦ V_x* f` over part `s`.
    pub fn member(&self, s: usize, f: &CVector) -> Result<Section> {
        let part = self.lin.part(s);
        if f.len() != part.rank() {
            return Err(Error::DimMismatch {
                what: format!(
                    "member coefficients on part `{}`",
                    self.lin.partition().label(s)
                ),
                expected: part.rank(),
                got: f.len(),
            });
        }
        let v = part.b().adjoint() * f;
        crate::bundle::unstack(&v, self.lin.partition().index(s), self.bundle())
    }

    /// The kernel column `K_x h`: `y ↦ K(y, x) h` on the part of `x`.
    pub fn kernel_column(&self, x: Point, h: &CVector) -> Result<Section> {
        let s = self.lin.partition().part_of(x);
        let mut out = Section::zero(self.bundle());
        for &y in self.lin.partition().index(s).points() {
            let v = self.kernel.block(y, x) * h;
            out = out.add(&crate::bundle::delta_section(self.bundle(), y, v)?)?;
        }
        Ok(out)
    }

    /// Coefficients of `K_x h` in the rank space: `V_x h`.
    pub fn coefficients(&self, x: Point, h: &CVector) -> CVector {
        self.lin.feature(x) * h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RkhsResiduals {
    /// Kernel columns lie in the member space: `‖B* C − G‖ / scale` with
    /// `C = (B*)⁺ G`.
    pub columns_in_space: f64,
    /// Reproducing property on probes, `|⟨f(x), h⟩ − ⟨f, K_x h⟩|`.
    pub reproducing: f64,
    /// `‖C* C − G‖ / scale`: Gram of the kernel columns.
    pub column_gram: f64,
    /// Every `G_s` positive semidefinite.
    pub psd: bool,
    /// `rank(C) = r_s` on every part.
    pub spanning: bool,
}

impl RkhsResiduals {
    pub fn passes(&self, tol: f64) -> bool {
        self.columns_in_space <= tol
            && self.reproducing <= tol
            && self.column_gram <= tol
            && self.psd
            && self.spanning
    }
}

/// Checks the reproducing kernel space axioms against the kernel data. The
/// coefficients of kernel columns are recomputed from `G` by a least-squares
/// solve rather than read off the factor.
pub fn verify_reproducing(
    view: &RkhsView<'_>,
    tol: &Tolerances,
    probes: usize,
    seed: u64,
) -> Result<RkhsResiduals> {
    let mut out = RkhsResiduals {
        psd: true,
        spanning: true,
        ..Default::default()
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for (s, part) in view.lin.parts().iter().enumerate() {
        let g = &part.gram;
        let scale = scale_of(g);
        let bstar = part.b().adjoint();
        let c = pinv(&bstar, tol)? * g;
        out.columns_in_space = out
            .columns_in_space
            .max(frobenius(&(&bstar * &c - g)) / scale);
        out.column_gram = out
            .column_gram
            .max(frobenius(&(c.adjoint() * &c - g)) / scale);
        out.psd &= psd_check(g, tol)?;
        if part.rank() > 0 {
            let cc = &c * c.adjoint();
            out.spanning &= rank_tol(&cc, tol)? == part.rank();
        }
        let idx = view.lin.partition().index(s);
        for _ in 0..probes {
            if part.rank() == 0 {
                break;
            }
            let f = random_vector(&mut rng, part.rank());
            let member = view.member(s, &f)?;
            for (x, rx) in idx.blocks() {
                let fx = member.value(x);
                for j in 0..rx.len() {
                    // ⟨f(x), e_j⟩ against [f, K_x e_j] with K_x e_j = C ι_x e_j.
                    let lhs = fx[j];
                    let col = c.column(rx.start + j);
                    let rhs = col.dotc(&f);
                    let err = (lhs - rhs).norm() / scale.sqrt().max(1.0);
                    out.reproducing = out.reproducing.max(err);
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn random_vector(rng: &mut ChaCha20Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    /// `U_s = B′_s B_s⁺`.
    pub unitaries: Vec<CMatrix>,
    /// `max_s ‖U_s* U_s − I‖_F`.
    pub unitarity: f64,
    /// `max_x ‖U V_x − V′_x‖_F / √max(1, ‖G_s‖_F)`.
    pub intertwining: f64,
}

impl Equivalence {
    pub fn certified(&self, tol: f64) -> bool {
        self.unitarity <= tol && self.intertwining <= tol
    }
}

pub fn unitary_equivalence(
    a: &HilbertLinearisation,
    b: &HilbertLinearisation,
) -> Result<Equivalence> {
    let mut out = Equivalence {
        unitaries: Vec::new(),
        unitarity: 0.0,
        intertwining: 0.0,
    };
    for (s, (pa, pb)) in a.parts().iter().zip(b.parts()).enumerate() {
        if pa.rank() != pb.rank() {
            return Err(Error::RankMismatch {
                part: a.partition().label(s).to_string(),
                left: pa.rank(),
                right: pb.rank(),
            });
        }
        let u = pb.b() * pa.b_pinv();
        out.unitarity = out
            .unitarity
            .max(frobenius(&(u.adjoint() * &u - identity(pa.rank()))));
        let scale = scale_of(&pa.gram).sqrt();
        for &x in a.partition().index(s).points() {
            let r = frobenius(&(&u * a.feature(x) - b.feature(x)));
            out.intertwining = out.intertwining.max(r / scale);
        }
        out.unitaries.push(u);
    }
    Ok(out)
}

/// `Φ_α = B_{c(α)} Ψ(α) B_{d(α)}⁺` together with the bounded-shift constants.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertRepresentation {
    pub lin: HilbertLinearisation,
    pub phi: Vec<CMatrix>,
    pub shift_bounds: Vec<ShiftBound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RepresentationResiduals {
    /// `max ‖Φ_{αβ} − Φ_α Φ_β‖_F` over composable pairs.
    pub multiplicativity: f64,
    /// `max ‖Φ_{α*} − Φ_α*‖_F`.
    pub star: f64,
    /// `max ‖Φ_α V_x − V_{α·x}‖_F / √max(1, ‖G‖_F)`.
    pub intertwining: f64,
    /// `max |M_α − ‖Φ_α‖²| / max(1, M_α)`.
    pub bounded_shift: f64,
}

pub fn invariant_representation(
    k: &OpKernel,
    frame: &ActionFrame,
    tol: &Tolerances,
) -> Result<HilbertRepresentation> {
    let p = frame.partition();
    if let Some(s) = non_psd_part(k, p, tol)? {
        return Err(Error::NotPartiallyPsd(p.label(s).to_string()));
    }
    let act = frame.action();
    let sg = act.semigroupoid();
    let inv = is_invariant(k, frame, tol);
    if let Some((a, x, y)) = inv.witness {
        return Err(Error::NotInvariant {
            alpha: sg.label(a).into(),
            x: act.label(x).into(),
            y: act.label(y).into(),
            residual: inv.residual,
        });
    }
    let lin = minimal_linearisation(k, p, tol)?;
    let mut phi = Vec::with_capacity(sg.len());
    let mut shift_bounds = Vec::with_capacity(sg.len());
    for a in sg.elems() {
        let (d, c) = (sg.d(a).0, sg.c(a).0);
        let psi = frame.shift(a);
        let guard = kernel_inclusion_residual(&lin.part(c).gram, &psi, &lin.part(d).factor.null);
        if guard > tol.atol {
            return Err(Error::QuotientIncompatible(sg.label(a).into(), guard));
        }
        phi.push(lin.part(c).b() * psi * lin.part(d).b_pinv());
        shift_bounds.push(bounded_shift_constant(k, frame, a, tol)?);
    }
    Ok(HilbertRepresentation {
        lin,
        phi,
        shift_bounds,
    })
}

impl HilbertRepresentation {
    pub fn residuals(
        &self,
        frame: &ActionFrame,
        tol: &Tolerances,
    ) -> Result<RepresentationResiduals> {
        let act = frame.action();
        let sg = act.semigroupoid();
        let mut out = RepresentationResiduals::default();
        for (a, b) in sg.composable_pairs() {
            let ab = sg.mul(a, b)?;
            let r = frobenius(&(&self.phi[ab.0] - &self.phi[a.0] * &self.phi[b.0]));
            out.multiplicativity = out.multiplicativity.max(r);
        }
        for a in sg.elems() {
            let r = frobenius(&(&self.phi[sg.star(a).0] - self.phi[a.0].adjoint()));
            out.star = out.star.max(r);
            let d = sg.d(a).0;
            let scale = scale_of(&self.lin.part(d).gram).sqrt();
            for &x in frame.partition().index(d).points() {
                let ax = act.act(a, x).expect("validated action");
                let r = frobenius(&(&self.phi[a.0] * self.lin.feature(x) - self.lin.feature(ax)));
                out.intertwining = out.intertwining.max(r / scale);
            }
            if let ShiftBound::Bounded(m) = self.shift_bounds[a.0] {
                let n = spectral_norm(&self.phi[a.0], tol)?;
                out.bounded_shift = out.bounded_shift.max((m - n * n).abs() / m.max(1.0));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialIsometryReport {
    /// Per element `(‖Φ Φ* Φ − Φ‖_F, ‖(Φ*Φ)² − Φ*Φ‖_F)`.
    pub residuals: Vec<(f64, f64)>,
    /// Whether the semigroupoid is inverse, so that the bound is required.
    pub required: bool,
    pub worst: f64,
}

impl PartialIsometryReport {
    pub fn passes(&self, tol: f64) -> bool {
        !self.required || self.worst <= tol
    }
}

pub fn partial_isometry_report(
    rep: &HilbertRepresentation,
    class: &Classification,
) -> PartialIsometryReport {
    let residuals: Vec<(f64, f64)> = rep
        .phi
        .iter()
        .map(|phi| {
            let pp = phi.adjoint() * phi;
            (frobenius(&(phi * &pp - phi)), frobenius(&(&pp * &pp - &pp)))
        })
        .collect();
    let worst = residuals
        .iter()
        .fold(0.0_f64, |m, (a, b)| m.max(*a).max(*b));
    PartialIsometryReport {
        residuals,
        required: class.is_inverse,
        worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{from_real_rows, real_diag};
    use crate::sgpd::families::{self, GroupTable};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn scalar(g: &[&[f64]]) -> (Arc<HilbertBundle>, Partition, OpKernel) {
        let n = g.len();
        let b = Arc::new(HilbertBundle::new((0..n).map(|i| (format!("x{}", i + 1), 1))).unwrap());
        let p = Partition::single(&b);
        let k = OpKernel::from_part_matrices(&b, &p, &[from_real_rows(g)]).unwrap();
        (b, p, k)
    }

    #[test]
    fn constant_kernel_has_rank_one() {
        let (_, p, k) = scalar(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let lin = minimal_linearisation(&k, &p, &tol()).unwrap();
        assert_eq!(lin.rank(0), 1);
        let v1 = lin.feature(Point(0));
        let v2 = lin.feature(Point(1));
        assert!((v1[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((v1[(0, 0)] - v2[(0, 0)]).norm() < 1e-12);
        assert!(reconstruction_residual(&lin, &k) < 1e-12);

        let view = rkhs(&k, &lin);
        let one = CVector::from_element(1, v1[(0, 0)]);
        let m = view.member(0, &one).unwrap();
        for x in [Point(0), Point(1)] {
            assert!((m.value(x)[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_and_zero_kernels() {
        let (_, p, k) = scalar(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let lin = minimal_linearisation(&k, &p, &tol()).unwrap();
        assert_eq!(lin.rank(0), 2);
        let vs = CMatrix::from_fn(2, 2, |i, j| lin.feature(Point(j))[(i, 0)]);
        assert!(frobenius(&(vs.adjoint() * &vs - identity(2))) < 1e-12);
        assert_eq!(vs, identity(2));

        let (_, p, k) = scalar(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let lin = minimal_linearisation(&k, &p, &tol()).unwrap();
        assert_eq!(lin.rank(0), 0);
        assert_eq!(lin.feature(Point(0)).shape(), (0, 1));
        let res = verify_reproducing(&rkhs(&k, &lin), &tol(), 3, 1).unwrap();
        assert!(res.passes(1e-10));
    }

    #[test]
    fn not_psd_is_rejected() {
        let (_, p, k) = scalar(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(
            minimal_linearisation(&k, &p, &tol()),
            Err(Error::NotPartiallyPsd(_))
        ));
    }

    #[test]
    fn kernel_columns_and_gram() {
        let (_, p, k) = scalar(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
        let lin = minimal_linearisation(&k, &p, &tol()).unwrap();
        let view = rkhs(&k, &lin);
        let h = CVector::from_element(1, C64::new(1.0, 0.5));
        let kx = view.kernel_column(Point(1), &h).unwrap();
        let m = view.member(0, &view.coefficients(Point(1), &h)).unwrap();
        for y in [Point(0), Point(1), Point(2)] {
            assert!((kx.value(y) - m.value(y)).norm() < 1e-12);
        }
        // ⟨K_y k, K_x h⟩ = ⟨K(x, y) k, h⟩
        let kk = CVector::from_element(1, C64::new(-0.3, 2.0));
        let lhs = view
            .coefficients(Point(0), &h)
            .dotc(&view.coefficients(Point(2), &kk));
        let rhs = h.dotc(&(k.block(Point(0), Point(2)) * &kk));
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(verify_reproducing(&view, &tol(), 4, 7)
            .unwrap()
            .passes(1e-10));
    }

    #[test]
    fn equivalence_recovers_rotation() {
        let (_, p, k) = scalar(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
        let lin = minimal_linearisation(&k, &p, &tol()).unwrap();
        let same = unitary_equivalence(&lin, &lin).unwrap();
        assert!(frobenius(&(&same.unitaries[0] - identity(3))) < 1e-12);
        let w = haar_unitary(3, 5);
        let rot = lin.rotated(std::slice::from_ref(&w));
        let eq = unitary_equivalence(&lin, &rot).unwrap();
        assert!(eq.certified(1e-10));
        assert!(frobenius(&(&eq.unitaries[0] - &w)) < 1e-10);
    }

    #[test]
    fn tie_breaking_gives_equivalent_factors() {
        // Degenerate spectrum: ties decide the basis.
        let (_, p, k) = scalar(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let a = minimal_linearisation_with(&k, &p, &tol(), TieBreak::Lexicographic).unwrap();
        let b = minimal_linearisation_with(&k, &p, &tol(), TieBreak::Reversed).unwrap();
        assert_ne!(a.part(0).b(), b.part(0).b());
        assert!(unitary_equivalence(&a, &b).unwrap().certified(1e-10));
    }

    #[test]
    fn rank_mismatch() {
        let (_, p, k) = scalar(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let (_, _, k2) = scalar(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let a = minimal_linearisation(&k, &p, &tol()).unwrap();
        let b = minimal_linearisation(&k2, &p, &tol()).unwrap();
        assert!(matches!(
            unitary_equivalence(&a, &b),
            Err(Error::RankMismatch { .. })
        ));
    }

    pub(crate) fn haar_unitary(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let z = CMatrix::from_fn(n, n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        });
        z.qr().q()
    }

    fn swap_frame() -> ActionFrame {
        let (_, act) = families::group_action(
            &GroupTable::cyclic(2),
            &["x1", "x2"],
            &[vec![0, 1], vec![1, 0]],
            0,
        )
        .unwrap();
        let b = Arc::new(HilbertBundle::new([("x1", 1), ("x2", 1)]).unwrap());
        ActionFrame::new(Arc::new(act), b).unwrap()
    }

    #[test]
    fn swap_representation_is_a_symmetry() {
        let frame = swap_frame();
        let b = frame.bundle().clone();
        let k = OpKernel::from_part_matrices(
            &b,
            frame.partition(),
            &[from_real_rows(&[&[3.0, 1.0], &[1.0, 3.0]])],
        )
        .unwrap();
        let rep = invariant_representation(&k, &frame, &tol()).unwrap();
        let sg = frame.action().semigroupoid().clone();
        let g = sg.elem("r1").unwrap();
        let e = sg.elem("r0").unwrap();
        let phi = &rep.phi[g.0];
        assert!(frobenius(&(phi * phi - identity(2))) < 1e-12);
        assert!(frobenius(&(phi - phi.adjoint())) < 1e-12);
        assert!(frobenius(&(&rep.phi[e.0] - identity(2))) < 1e-12);
        let r = rep.residuals(&frame, &tol()).unwrap();
        assert!(
            r.multiplicativity < 1e-12
                && r.star < 1e-12
                && r.intertwining < 1e-12
                && r.bounded_shift < 1e-10
        );
        let class = sg.classify().unwrap();
        assert!(partial_isometry_report(&rep, &class).passes(1e-10));
    }

    #[test]
    fn trivial_group_gives_identity() {
        let (_, act) =
            families::group_action(&GroupTable::cyclic(1), &["x"], &[vec![0]], 0).unwrap();
        let b = Arc::new(HilbertBundle::new([("x", 2)]).unwrap());
        let frame = ActionFrame::new(Arc::new(act), Arc::clone(&b)).unwrap();
        let k =
            OpKernel::from_part_matrices(&b, frame.partition(), &[real_diag(&[2.0, 5.0])]).unwrap();
        let rep = invariant_representation(&k, &frame, &tol()).unwrap();
        assert!(frobenius(&(&rep.phi[0] - identity(2))) < 1e-12);
    }

    #[test]
    fn non_invariant_is_rejected() {
        let frame = swap_frame();
        let b = frame.bundle().clone();
        let k =
            OpKernel::from_part_matrices(&b, frame.partition(), &[real_diag(&[1.0, 2.0])]).unwrap();
        assert!(matches!(
            invariant_representation(&k, &frame, &tol()),
            Err(Error::NotInvariant { .. })
        ));
    }

    fn random_psd(n: usize, r: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let b = CMatrix::from_fn(r, n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        });
        b.adjoint() * b
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn reconstruction_and_minimality(n in 1usize..7, r in 0usize..7, seed in any::<u64>()) {
            let b = Arc::new(HilbertBundle::new((0..n).map(|i| (format!("x{i}"), 1 + i % 2))).unwrap());
            let p = Partition::single(&b);
            let total: usize = (0..n).map(|i| 1 + i % 2).sum();
            let g = random_psd(total, r.min(total), seed);
            let k = OpKernel::from_part_matrices(&b, &p, &[g.clone()]).unwrap();
            let lin = minimal_linearisation(&k, &p, &tol()).unwrap();
            prop_assert_eq!(lin.rank(0), r.min(total));
            prop_assert!(reconstruction_residual(&lin, &k) <= 1e-9);
            prop_assert!(minimality_defects(&lin, &tol()).unwrap().is_empty());
            prop_assert!(verify_reproducing(&rkhs(&k, &lin), &tol(), 2, seed).unwrap().passes(1e-9));
        }

        #[test]
        fn equivalent_linearisations_give_the_same_space(seed in any::<u64>()) {
            let b = Arc::new(HilbertBundle::new((0..4).map(|i| (format!("x{i}"), 1))).unwrap());
            let p = Partition::single(&b);
            let g = random_psd(4, 2, seed);
            let k = OpKernel::from_part_matrices(&b, &p, &[g]).unwrap();
            let lin = minimal_linearisation(&k, &p, &tol()).unwrap();
            let w = haar_unitary(2, seed ^ 0x5eed);
            let rot = lin.rotated(std::slice::from_ref(&w));
            let (va, vb) = (rkhs(&k, &lin), rkhs(&k, &rot));
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let f = random_vector(&mut rng, 2);
            let g2 = random_vector(&mut rng, 2);
            // The same section arises from coefficients f and W f, with equal
            // inner products.
            let ma = va.member(0, &f).unwrap();
            let mb = vb.member(0, &(&w * &f)).unwrap();
            for x in b.points() {
                prop_assert!((ma.value(x) - mb.value(x)).norm() < 1e-9);
            }
            let ip_a = g2.dotc(&f);
            let ip_b = (&w * &g2).dotc(&(&w * &f));
            prop_assert!((ip_a - ip_b).norm() < 1e-9);
        }
    }
}
