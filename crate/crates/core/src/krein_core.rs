//! Finite-dimensional Krein spaces, Krein adjoints, the Krein space induced
//! by a Hermitian matrix, lifting of operators, and the spectral gap test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numlin::{
    frobenius, gaps_from, herm_eig, hermitian_residual, identity, rank_tol, real_diag,
    spectral_factor_from, CMatrix, Gaps, Tolerances,
};

/// Statement attached to every uniqueness report.
pub const FINITE_COLLAPSE_NOTE: &str = "A Hermitian matrix has finitely many eigenvalues, so after the rank \
cutoff zero is isolated from the rest of the spectrum on both sides. A spectral gap at zero therefore always \
exists and the non-uniqueness branch of the spectral-gap criterion is unreachable in finite dimensions; \
uniqueness of the induced Krein space holds for every instance.";

/// `(dim, J)` with `J` Hermitian and `J² = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinSpace {
    j: CMatrix,
    p: usize,
    q: usize,
}

impl KreinSpace {
    /// `J = diag(+1 × p, −1 × q)`.
    pub fn diagonal(p: usize, q: usize) -> Self {
        let signs: Vec<f64> = std::iter::repeat_n(1.0, p)
            .chain(std::iter::repeat_n(-1.0, q))
            .collect();
        Self {
            j: real_diag(&signs),
            p,
            q,
        }
    }

    /// Positive-definite space of dimension `n`.
    pub fn hilbert(n: usize) -> Self {
        Self::diagonal(n, 0)
    }

    /// General fundamental symmetry, checked to tolerance.
    pub fn from_matrix(j: CMatrix, tol: &Tolerances) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n {
            return Err(Error::DimMismatch {
                what: "fundamental symmetry".into(),
                expected: n,
                got: j.ncols(),
            });
        }
        let bound = tol.atol * (n as f64).max(1.0);
        let herm = hermitian_residual(&j);
        let sq = frobenius(&(&j * &j - identity(n)));
        if herm > bound || sq > bound {
            return Err(Error::Axiom {
                axiom: "fundamental-symmetry".into(),
                detail: format!("‖J − J*‖ = {herm:e}, ‖J² − I‖ = {sq:e}"),
            });
        }
        let eig = herm_eig(&j, tol)?;
        let p = eig.eigenvalues.iter().filter(|l| **l > 0.0).count();
        Ok(Self { j, p, q: n - p })
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn j(&self) -> &CMatrix {
        &self.j
    }
}

/// `T^♯ = J_dom T* J_cod` for `T` mapping `dom` into `cod`.
pub fn krein_adjoint(t: &CMatrix, dom: &KreinSpace, cod: &KreinSpace) -> Result<CMatrix> {
    if t.shape() != (cod.dim(), dom.dim()) {
        return Err(Error::ShapeMismatch {
            row: "codomain".into(),
            col: "domain".into(),
            expected: (cod.dim(), dom.dim()),
            got: t.shape(),
        });
    }
    Ok(dom.j() * t.adjoint() * cod.j())
}

/// The Krein space induced by a Hermitian `A`: `Π = |Λ_r|^{1/2} U_r*` with
/// `Π* J Π = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedKrein {
    pub source_dim: usize,
    pub space: KreinSpace,
    pub pi: CMatrix,
    /// Right inverse `U_r |Λ_r|^{-1/2}`.
    pub pi_pinv: CMatrix,
    /// Orthonormal basis of `ker A`.
    pub null: CMatrix,
}

impl InducedKrein {
    /// `‖Π* J Π − A‖_F / max(1, ‖A‖_F)`.
    pub fn reconstruction_residual(&self, a: &CMatrix) -> f64 {
        frobenius(&(self.pi.adjoint() * self.space.j() * &self.pi - a)) / frobenius(a).max(1.0)
    }

    /// `Π` has full row rank.
    pub fn is_onto(&self, tol: &Tolerances) -> Result<bool> {
        if self.space.dim() == 0 {
            return Ok(true);
        }
        Ok(rank_tol(&(&self.pi * self.pi.adjoint()), tol)? == self.space.dim())
    }
}

pub fn induced_krein(a: &CMatrix, tol: &Tolerances) -> Result<InducedKrein> {
    let eig = herm_eig(a, tol)?;
    let f = spectral_factor_from(&eig, tol);
    Ok(InducedKrein {
        source_dim: a.nrows(),
        space: KreinSpace::diagonal(f.positive(), f.negative()),
        pi: f.map,
        pi_pinv: f.right_inverse,
        null: f.null,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    pub a: InducedKrein,
    pub b: InducedKrein,
    pub t_lift: CMatrix,
    pub s_lift: CMatrix,
    /// `‖BT − S*A‖_F / scale`.
    pub precondition: f64,
    /// `‖B T N_A‖_F / max(1, ‖B‖_F)` for a kernel basis `N_A`.
    pub kernel_inclusion: f64,
    /// `‖T̃ Π_A − Π_B T‖_F / max(1, ‖Π_B T‖_F)`.
    pub factorisation: f64,
    /// Same for `S̃ Π_B − Π_A S`.
    pub factorisation_s: f64,
    /// `‖T̃^♯ − S̃‖_F / max(1, ‖S̃‖_F)`.
    pub pairing: f64,
}

/// Lifts `T: H → G` and `S: G → H` with `BT = S*A` to the induced Krein
/// spaces of `A` and `B`.
pub fn lift_operator(
    a: &CMatrix,
    b: &CMatrix,
    t: &CMatrix,
    s: &CMatrix,
    tol: &Tolerances,
) -> Result<Lift> {
    let (n, m) = (a.nrows(), b.nrows());
    if t.shape() != (m, n) || s.shape() != (n, m) {
        return Err(Error::ShapeMismatch {
            row: "T".into(),
            col: "S".into(),
            expected: (m, n),
            got: t.shape(),
        });
    }
    let bt = b * t;
    let sa = s.adjoint() * a;
    let scale = frobenius(&bt).max(frobenius(&sa)).max(1.0);
    let precondition = frobenius(&(&bt - &sa)) / scale;
    if precondition > tol.atol {
        return Err(Error::PairingViolated {
            residual: precondition,
            bound: tol.atol,
        });
    }
    let ia = induced_krein(a, tol)?;
    let ib = induced_krein(b, tol)?;
    let kernel_inclusion = if ia.null.ncols() == 0 {
        0.0
    } else {
        frobenius(&(&bt * &ia.null)) / frobenius(b).max(1.0)
    };
    let t_lift = &ib.pi * t * &ia.pi_pinv;
    let s_lift = &ia.pi * s * &ib.pi_pinv;
    let pbt = &ib.pi * t;
    let pas = &ia.pi * s;
    let factorisation = frobenius(&(&t_lift * &ia.pi - &pbt)) / frobenius(&pbt).max(1.0);
    let factorisation_s = frobenius(&(&s_lift * &ib.pi - &pas)) / frobenius(&pas).max(1.0);
    let sharp = krein_adjoint(&t_lift, &ia.space, &ib.space)?;
    let pairing = frobenius(&(sharp - &s_lift)) / frobenius(&s_lift).max(1.0);
    Ok(Lift {
        a: ia,
        b: ib,
        t_lift,
        s_lift,
        precondition,
        kernel_inclusion,
        factorisation,
        factorisation_s,
        pairing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Negative,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub unique: bool,
    /// Distance from zero to the nearest negative eigenvalue; `None` when
    /// the negative spectrum is empty.
    pub gap_neg: Option<f64>,
    pub gap_pos: Option<f64>,
    /// An `ε > 0` with `(−ε, 0)` or `(0, ε)` free of spectrum.
    pub witness: f64,
    pub witness_side: Side,
    pub note: &'static str,
}

pub fn gap_report(gaps: Gaps, spectral_radius: f64) -> GapReport {
    let side_eps = |g: Option<f64>| g.unwrap_or(1.0 + spectral_radius);
    let (neg, pos) = (side_eps(gaps.neg), side_eps(gaps.pos));
    let (witness, witness_side) = if neg > pos {
        (neg, Side::Negative)
    } else {
        (pos, Side::Positive)
    };
    GapReport {
        unique: neg > 0.0 || pos > 0.0,
        gap_neg: gaps.neg,
        gap_pos: gaps.pos,
        witness,
        witness_side,
        note: FINITE_COLLAPSE_NOTE,
    }
}

pub fn gap_uniqueness(a: &CMatrix, tol: &Tolerances) -> Result<GapReport> {
    let eig = herm_eig(a, tol)?;
    Ok(gap_report(gaps_from(&eig, tol), eig.max_abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{from_real_rows, pinv, zeros, C64};
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && frobenius(&(a - b)) <= eps
    }

    #[test]
    fn adjoint_examples() {
        let t = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]) * C64::new(1.0, 1.0);
        let h = KreinSpace::hilbert(2);
        assert_eq!(krein_adjoint(&t, &h, &h).unwrap(), t.adjoint());
        let k = KreinSpace::diagonal(1, 1);
        assert_eq!(krein_adjoint(k.j(), &k, &k).unwrap(), *k.j());
        let swap = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            krein_adjoint(&swap, &k, &k).unwrap(),
            from_real_rows(&[&[0.0, -1.0], &[-1.0, 0.0]])
        );
        assert!(matches!(
            krein_adjoint(&zeros(3, 2), &k, &k),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn fundamental_symmetry_checks() {
        let j = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let k = KreinSpace::from_matrix(j, &tol()).unwrap();
        assert_eq!(k.signature(), (1, 1));
        assert!(
            KreinSpace::from_matrix(from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]), &tol()).is_err()
        );
    }

    #[test]
    fn induced_examples() {
        let a = from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let ik = induced_krein(&a, &tol()).unwrap();
        assert_eq!(ik.space.dim(), 2);
        assert_eq!(*ik.space.j(), a);
        assert!(close(&ik.pi, &identity(2), 1e-14));

        let s = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let ik = induced_krein(&s, &tol()).unwrap();
        assert_eq!(ik.space.signature(), (1, 1));
        assert!(ik.reconstruction_residual(&s) < 1e-12);
        assert!(ik.is_onto(&tol()).unwrap());

        let ik = induced_krein(&zeros(2, 2), &tol()).unwrap();
        assert_eq!(ik.space.dim(), 0);
        assert_eq!(ik.pi.shape(), (0, 2));
    }

    #[test]
    fn lift_examples() {
        let a = from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let t = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = from_real_rows(&[&[0.0, -1.0], &[-1.0, 0.0]]);
        let l = lift_operator(&a, &a, &t, &s, &tol()).unwrap();
        assert!(close(&l.t_lift, &t, 1e-14));
        assert!(l.pairing < 1e-14);

        let z = zeros(2, 2);
        let l = lift_operator(&a, &a, &z, &z, &tol()).unwrap();
        assert_eq!(l.t_lift, z);
        assert_eq!(l.s_lift, z);

        let bad = identity(2);
        assert!(matches!(
            lift_operator(&a, &a, &t, &bad, &tol()),
            Err(Error::PairingViolated { .. })
        ));
    }

    #[test]
    fn lift_with_invertible_grams() {
        let a = from_real_rows(&[&[2.0, 1.0], &[1.0, -1.0]]);
        let b = from_real_rows(&[&[3.0, 0.5], &[0.5, 1.0]]);
        let t = from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        // S* = B T A⁻¹.
        let s = (&b * &t * pinv(&a, &tol()).unwrap()).adjoint();
        let l = lift_operator(&a, &b, &t, &s, &tol()).unwrap();
        let inv = pinv(&l.a.pi, &tol()).unwrap();
        assert!(close(&l.t_lift, &(&l.b.pi * &t * inv), 1e-10));
        assert!(l.factorisation < 1e-10 && l.pairing < 1e-10);
    }

    #[test]
    fn gap_examples() {
        let g = gap_uniqueness(&from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]), &tol()).unwrap();
        assert!(g.unique);
        assert_eq!((g.gap_neg, g.gap_pos), (Some(1.0), Some(1.0)));
        assert_eq!(g.witness, 1.0);
        let z = gap_uniqueness(&zeros(2, 2), &tol()).unwrap();
        assert!(z.unique);
        assert_eq!((z.gap_neg, z.gap_pos), (None, None));
        assert_eq!(z.witness, 1.0);
        assert!(z.note.contains("unreachable in finite dimensions"));
        let h = gap_uniqueness(&from_real_rows(&[&[3.0, 0.0], &[0.0, -0.5]]), &tol()).unwrap();
        assert_eq!((h.gap_neg, h.gap_pos), (Some(0.5), Some(3.0)));
    }

    fn cmat(r: usize, c: usize) -> impl Strategy<Value = CMatrix> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), r * c).prop_map(move |v| {
            CMatrix::from_iterator(r, c, v.into_iter().map(|(a, b)| C64::new(a, b)))
        })
    }

    fn herm(n: usize) -> impl Strategy<Value = CMatrix> {
        cmat(n, n).prop_map(|m| (&m + m.adjoint()) * C64::new(0.5, 0.0))
    }

    fn signs() -> impl Strategy<Value = (usize, usize)> {
        (0usize..3, 0usize..3)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn induced_reconstructs(a in herm(4)) {
            let ik = induced_krein(&a, &tol()).unwrap();
            prop_assert!(ik.reconstruction_residual(&a) < 1e-10);
            prop_assert!(ik.is_onto(&tol()).unwrap());
        }

        #[test]
        fn sharp_is_involutive_and_antimultiplicative(
            (p1, q1) in signs(), (p2, q2) in signs(), (p3, q3) in signs(), seed in any::<u64>()
        ) {
            let (k1, k2, k3) = (KreinSpace::diagonal(p1, q1), KreinSpace::diagonal(p2, q2), KreinSpace::diagonal(p3, q3));
            let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(seed);
            let mut rnd = |r: usize, c: usize| {
                use rand_distr::Distribution;
                CMatrix::from_fn(r, c, |_, _| {
                    let re: f64 = rand_distr::StandardNormal.sample(&mut rng);
                    let im: f64 = rand_distr::StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
            };
            let t = rnd(k2.dim(), k1.dim());
            let u = rnd(k3.dim(), k2.dim());
            let ts = krein_adjoint(&t, &k1, &k2).unwrap();
            prop_assert_eq!(krein_adjoint(&ts, &k2, &k1).unwrap(), t.clone());
            let lhs = krein_adjoint(&(&u * &t), &k1, &k3).unwrap();
            let rhs = &ts * krein_adjoint(&u, &k2, &k3).unwrap();
            prop_assert!(frobenius(&(lhs - rhs)) < 1e-10);
            let z = C64::new(0.3, -1.2);
            let lhs = krein_adjoint(&(&t * z), &k1, &k2).unwrap();
            prop_assert!(frobenius(&(lhs - ts * z.conj())) < 1e-12);
        }

        #[test]
        fn lifts_factor_and_pair(a in herm(3), b in herm(2), t in cmat(2, 3)) {
            // Choose S with S* = B T A⁺, restricted so that B T vanishes on ker A.
            let ia = induced_krein(&a, &tol()).unwrap();
            let proj = &ia.pi_pinv * &ia.pi;
            let t = &t * &proj;
            let s = (&b * &t * pinv(&a, &tol()).unwrap()).adjoint();
            let l = lift_operator(&a, &b, &t, &s, &tol()).unwrap();
            prop_assert!(l.factorisation < 1e-8, "{}", l.factorisation);
            prop_assert!(l.pairing < 1e-8, "{}", l.pairing);
        }

        #[test]
        fn uniqueness_always_holds(a in herm(4)) {
            let g = gap_uniqueness(&a, &tol()).unwrap();
            prop_assert!(g.unique && g.witness > 0.0);
        }
    }
}
