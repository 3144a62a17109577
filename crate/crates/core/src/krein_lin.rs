//! Hermitian kernels: dominants, Gram operators, Jordan splits, Krein
//! linearisations, reproducing kernel Krein spaces and the representations
//! induced by invariant Hermitian kernels.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::bundle::Point;
use crate::error::{Error, Result};
use crate::hilbert_lin::random_vector;
use crate::kernel::{
    bounded_shift_constant, conv_blocks, is_invariant, kernel_inclusion_residual,
    non_hermitian_part, non_psd_part, scale_of, ActionFrame, InvarianceCheck, OpKernel, Partition,
    ShiftBound,
};
use crate::krein_core::{gap_report, induced_krein, krein_adjoint, GapReport, KreinSpace};
use crate::numlin::{
    frobenius, gaps_from, herm_eig, herm_fn_from, identity, pinv, psd_check, psd_factor, rank_tol,
    CMatrix, Gaps, MatrixFn, SpectralFactor, Tolerances, C64,
};
use crate::sgpd::Elem;

fn require_hermitian(k: &OpKernel, p: &Partition, tol: &Tolerances) -> Result<Vec<CMatrix>> {
    if let Some(s) = non_hermitian_part(k, p, tol) {
        return Err(Error::NotPartiallyHermitian(p.label(s).to_string()));
    }
    Ok(conv_blocks(k, p))
}

/// `L` with `G^L_s = |G^K_s|`, so that `−L ≤ K ≤ L` on every part.
pub fn canonical_dominant(k: &OpKernel, p: &Partition, tol: &Tolerances) -> Result<OpKernel> {
    let grams = require_hermitian(k, p, tol)?;
    let abs = grams
        .iter()
        .map(|g| herm_fn_from(&herm_eig(g, tol)?, MatrixFn::Abs, tol).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    OpKernel::from_part_matrices(k.bundle(), p, &abs)
}

/// Canonical dominant together with its invariance check under the action.
pub fn canonical_dominant_in(
    k: &OpKernel,
    frame: &ActionFrame,
    tol: &Tolerances,
) -> Result<(OpKernel, InvarianceCheck)> {
    let l = canonical_dominant(k, frame.partition(), tol)?;
    let inv = is_invariant(&l, frame, tol);
    Ok((l, inv))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramPart {
    /// `G^L_s = B_L* B_L`.
    pub l_factor: SpectralFactor,
    /// `Ĝ_s = (B_L⁺)* G^K_s B_L⁺`.
    pub ghat: CMatrix,
    pub gaps: Gaps,
    /// Spectral radius of `Ĝ_s`.
    pub norm: f64,
    /// `‖G^K N_L‖_F / max(1, ‖G^K‖_F)`.
    pub inclusion: f64,
    /// `‖B_L* Ĝ B_L − G^K‖_F / max(1, ‖G^K‖_F)`.
    pub identity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramData {
    pub parts: Vec<GramPart>,
}

/// Gram operator of `K` relative to a partially positive semidefinite `L`.
pub fn gram_operator(
    k: &OpKernel,
    l: &OpKernel,
    p: &Partition,
    tol: &Tolerances,
) -> Result<GramData> {
    let gk = require_hermitian(k, p, tol)?;
    if let Some(s) = non_psd_part(l, p, tol)? {
        return Err(Error::NotPartiallyPsd(p.label(s).to_string()));
    }
    let gl = conv_blocks(l, p);
    let mut parts = Vec::with_capacity(p.len());
    for (s, (gk, gl)) in gk.iter().zip(&gl).enumerate() {
        let l_factor = psd_factor(gl, tol)?;
        let scale = scale_of(gk);
        let inclusion = if l_factor.null.ncols() == 0 {
            0.0
        } else {
            frobenius(&(gk * &l_factor.null)) / scale
        };
        if inclusion > tol.atol {
            return Err(Error::KernelNotDominated {
                part: p.label(s).to_string(),
                detail: format!("ker G^L is not contained in ker G^K (residual {inclusion:e})"),
            });
        }
        let bp = &l_factor.right_inverse;
        let raw = bp.adjoint() * gk * bp;
        let ghat = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm_eig(&ghat, tol)?;
        let norm = eig.max_abs();
        if norm > 1.0 + tol.atol {
            return Err(Error::KernelNotDominated {
                part: p.label(s).to_string(),
                detail: format!("Gram operator has norm {norm} > 1"),
            });
        }
        let identity = frobenius(&(l_factor.map.adjoint() * &ghat * &l_factor.map - gk)) / scale;
        parts.push(GramPart {
            gaps: gaps_from(&eig, tol),
            norm,
            inclusion,
            identity,
            ghat,
            l_factor,
        });
    }
    Ok(GramData { parts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanSplit {
    pub plus: OpKernel,
    pub minus: OpKernel,
    /// Per part `(rank G⁺, rank G⁻, rank(G⁺ + G⁻))`.
    pub ranks: Vec<(usize, usize, usize)>,
    /// `max_s ‖G⁺ − G⁻ − G‖_F / max(1, ‖G‖_F)`.
    pub reconstruction: f64,
    /// Both parts partially positive semidefinite.
    pub psd: bool,
}

impl JordanSplit {
    /// Ranges of `G⁺` and `G⁻` meet only in zero on every part.
    pub fn disjoint(&self) -> bool {
        self.ranks.iter().all(|&(a, b, c)| a + b == c)
    }
}

pub fn jordan_split(k: &OpKernel, p: &Partition, tol: &Tolerances) -> Result<JordanSplit> {
    let grams = require_hermitian(k, p, tol)?;
    let mut plus = Vec::with_capacity(grams.len());
    let mut minus = Vec::with_capacity(grams.len());
    let mut ranks = Vec::with_capacity(grams.len());
    let mut reconstruction: f64 = 0.0;
    let mut psd = true;
    for g in &grams {
        let eig = herm_eig(g, tol)?;
        let cut = eig.cutoff(tol);
        let gp = eig.apply(|l| if l > cut { l } else { 0.0 });
        let gm = eig.apply(|l| if l < -cut { -l } else { 0.0 });
        let rank = |m: &CMatrix| rank_tol(m, tol);
        ranks.push((rank(&gp)?, rank(&gm)?, rank(&(&gp + &gm))?));
        reconstruction = reconstruction.max(frobenius(&(&gp - &gm - g)) / scale_of(g));
        psd &= psd_check(&gp, tol)? && psd_check(&gm, tol)?;
        plus.push(gp);
        minus.push(gm);
    }
    Ok(JordanSplit {
        plus: OpKernel::from_part_matrices(k.bundle(), p, &plus)?,
        minus: OpKernel::from_part_matrices(k.bundle(), p, &minus)?,
        ranks,
        reconstruction,
        psd,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Route {
    /// Induced Krein space of `G^K_s` itself.
    Direct,
    /// Induced Krein space of the Gram operator relative to `L`, composed
    /// with the quotient map of `L`.
    Dominant(OpKernel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteKind {
    Direct,
    Dominant,
}

impl RouteKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Direct => "direct-spectral",
            Self::Dominant => "via-dominant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KreinPart {
    pub gram: CMatrix,
    pub space: KreinSpace,
    /// `W_s`, `m_s × total_dim(s)`, with `W* J W = G^K_s`.
    pub w: CMatrix,
    /// Right inverse of `W_s`.
    pub w_pinv: CMatrix,
    /// Orthonormal basis of `ker G^K_s`.
    pub null: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KreinLinearisation {
    partition: Partition,
    parts: Vec<KreinPart>,
    route: RouteKind,
    gram: Option<GramData>,
}

impl KreinLinearisation {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn parts(&self) -> &[KreinPart] {
        &self.parts
    }

    pub fn part(&self, s: usize) -> &KreinPart {
        &self.parts[s]
    }

    pub fn route(&self) -> RouteKind {
        self.route
    }

    pub fn gram_data(&self) -> Option<&GramData> {
        self.gram.as_ref()
    }

    pub fn feature(&self, x: Point) -> CMatrix {
        let s = self.partition.part_of(x);
        let r = self.partition.index(s).range(x).expect("point in its part");
        self.parts[s].w.columns(r.start, r.len()).into_owned()
    }
}

pub fn krein_linearisation(
    k: &OpKernel,
    p: &Partition,
    tol: &Tolerances,
    via: &Route,
) -> Result<KreinLinearisation> {
    let grams = require_hermitian(k, p, tol)?;
    let gram = match via {
        Route::Direct => None,
        Route::Dominant(l) => Some(gram_operator(k, l, p, tol)?),
    };
    let mut parts = Vec::with_capacity(grams.len());
    for (s, g) in grams.into_iter().enumerate() {
        let eig = herm_eig(&g, tol)?;
        let classes = eig.classify(tol);
        let null = eig.columns(&classes.zero);
        let part = match &gram {
            None => {
                let ik = induced_krein(&g, tol)?;
                KreinPart {
                    gram: g,
                    space: ik.space,
                    w: ik.pi,
                    w_pinv: ik.pi_pinv,
                    null,
                }
            }
            Some(data) => {
                let gp = &data.parts[s];
                let ik = induced_krein(&gp.ghat, tol)?;
                KreinPart {
                    w: &ik.pi * &gp.l_factor.map,
                    w_pinv: &gp.l_factor.right_inverse * &ik.pi_pinv,
                    gram: g,
                    space: ik.space,
                    null,
                }
            }
        };
        parts.push(part);
    }
    Ok(KreinLinearisation {
        partition: p.clone(),
        parts,
        route: match via {
            Route::Direct => RouteKind::Direct,
            Route::Dominant(_) => RouteKind::Dominant,
        },
        gram,
    })
}

/// Largest `‖V_x* J_s V_y − K(x, y)‖_F / max(1, ‖G_s‖_F)`.
pub fn krein_reconstruction_residual(lin: &KreinLinearisation, k: &OpKernel) -> f64 {
    let mut worst: f64 = 0.0;
    for (s, part) in lin.parts().iter().enumerate() {
        let scale = scale_of(&part.gram);
        let pts = lin.partition().index(s).points();
        for &x in pts {
            let left = lin.feature(x).adjoint() * part.space.j();
            for &y in pts {
                let r = frobenius(&(&left * lin.feature(y) - k.block(x, y)));
                worst = worst.max(r / scale);
            }
        }
    }
    worst
}

/// Parts whose feature maps do not span the Krein space, or whose dimension
/// differs from `rank G^K_s`.
pub fn krein_minimality_defects(lin: &KreinLinearisation, tol: &Tolerances) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for (s, part) in lin.parts().iter().enumerate() {
        let m = part.space.dim();
        let spans = m == 0 || rank_tol(&(&part.w * part.w.adjoint()), tol)? == m;
        if !spans || m != rank_tol(&part.gram, tol)? {
            bad.push(s);
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RkKreinResiduals {
    /// Kernel columns lie in the member space: `‖W* J C − G‖ / scale`
    /// with `C` solved from `G`.
    pub columns_in_space: f64,
    /// `|⟨f(x), h⟩ − [f, K_x h]|` on probes.
    pub reproducing: f64,
    /// `‖C* J C − G‖ / scale`.
    pub column_gram: f64,
    pub minimal: bool,
}

impl RkKreinResiduals {
    pub fn passes(&self, tol: f64) -> bool {
        self.columns_in_space <= tol
            && self.reproducing <= tol
            && self.column_gram <= tol
            && self.minimal
    }
}

/// Members are the sections `x ↦ V_x* J f`. Kernel column coefficients are
/// recomputed from `G` by a least-squares solve.
pub fn rk_krein_space(
    lin: &KreinLinearisation,
    tol: &Tolerances,
    probes: usize,
    seed: u64,
) -> Result<RkKreinResiduals> {
    let mut out = RkKreinResiduals {
        minimal: krein_minimality_defects(lin, tol)?.is_empty(),
        ..Default::default()
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for part in lin.parts() {
        let m = part.space.dim();
        if m == 0 {
            continue;
        }
        let g = &part.gram;
        let scale = scale_of(g);
        let j = part.space.j();
        let eval = part.w.adjoint() * j;
        let c = pinv(&eval, tol)? * g;
        out.columns_in_space = out
            .columns_in_space
            .max(frobenius(&(&eval * &c - g)) / scale);
        out.column_gram = out
            .column_gram
            .max(frobenius(&(c.adjoint() * j * &c - g)) / scale);
        for _ in 0..probes {
            let f = random_vector(&mut rng, m);
            let values = &eval * &f;
            let jf = j * &f;
            for i in 0..values.len() {
                let rhs = c.column(i).dotc(&jf);
                let err = (values[i] - rhs).norm() / scale.sqrt();
                out.reproducing = out.reproducing.max(err);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KreinEquivalence {
    /// `U_s = W′_s W_s⁺`.
    pub unitaries: Vec<CMatrix>,
    /// `max ‖U^♯ U − I‖_F`.
    pub j_unitarity: f64,
    /// `max ‖U V_x − V′_x‖_F / √max(1, ‖G_s‖_F)`.
    pub intertwining: f64,
}

pub fn krein_equivalence(
    a: &KreinLinearisation,
    b: &KreinLinearisation,
) -> Result<KreinEquivalence> {
    let mut out = KreinEquivalence {
        unitaries: Vec::new(),
        j_unitarity: 0.0,
        intertwining: 0.0,
    };
    for (s, (pa, pb)) in a.parts().iter().zip(b.parts()).enumerate() {
        if pa.space.signature() != pb.space.signature() {
            return Err(Error::RankMismatch {
                part: a.partition().label(s).to_string(),
                left: pa.space.dim(),
                right: pb.space.dim(),
            });
        }
        let u = &pb.w * &pa.w_pinv;
        let sharp = krein_adjoint(&u, &pa.space, &pb.space)?;
        out.j_unitarity = out
            .j_unitarity
            .max(frobenius(&(sharp * &u - identity(pa.space.dim()))));
        let scale = scale_of(&pa.gram).sqrt();
        for &x in a.partition().index(s).points() {
            let r = frobenius(&(&u * a.feature(x) - b.feature(x)));
            out.intertwining = out.intertwining.max(r / scale);
        }
        out.unitaries.push(u);
    }
    Ok(out)
}

/// Per-part spectral gap of the Gram operator at zero, with the witnessing
/// `ε`.
pub fn uniqueness_report(
    k: &OpKernel,
    l: &OpKernel,
    p: &Partition,
    tol: &Tolerances,
) -> Result<Vec<GapReport>> {
    let data = gram_operator(k, l, p, tol)?;
    Ok(data
        .parts
        .iter()
        .map(|gp| gap_report(gp.gaps, gp.norm))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KreinRepresentation {
    pub lin: KreinLinearisation,
    /// `Ψ̃_α = W_{c(α)} Ψ(α) W_{d(α)}⁺`.
    pub psi: Vec<CMatrix>,
    /// `‖G_c Ψ(α) − Ψ(α*)* G_d‖_F / scale` per element.
    pub pairing: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KreinRepresentationResiduals {
    pub multiplicativity: f64,
    /// `max ‖Ψ̃_{α*} − Ψ̃_α^♯‖_F`.
    pub sharp: f64,
    pub intertwining: f64,
    /// `max ‖J_c Ψ̃_α − Ψ̃_α J_d‖_F`.
    pub commutator: f64,
}

pub fn invariant_krein_representation(
    k: &OpKernel,
    frame: &ActionFrame,
    tol: &Tolerances,
    l: Option<&OpKernel>,
) -> Result<KreinRepresentation> {
    let p = frame.partition();
    let grams = require_hermitian(k, p, tol)?;
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
    let route = match l {
        Some(l) => Route::Dominant(l.clone()),
        None => Route::Direct,
    };
    let lin = krein_linearisation(k, p, tol, &route)?;
    let shifts = frame.shifts();
    let mut psi = Vec::with_capacity(sg.len());
    let mut pairing = Vec::with_capacity(sg.len());
    for a in sg.elems() {
        let (d, c) = (sg.d(a).0, sg.c(a).0);
        let t = &shifts[a.0];
        let s = &shifts[sg.star(a).0];
        let bt = &grams[c] * t;
        let sa = s.adjoint() * &grams[d];
        let scale = frobenius(&bt).max(frobenius(&sa)).max(1.0);
        let residual = frobenius(&(bt - sa)) / scale;
        if residual > tol.atol {
            return Err(Error::PairingViolated {
                residual,
                bound: tol.atol,
            });
        }
        let guard = kernel_inclusion_residual(&grams[c], t, &lin.part(d).null);
        if guard > tol.atol {
            return Err(Error::QuotientIncompatible(sg.label(a).into(), guard));
        }
        psi.push(&lin.part(c).w * t * &lin.part(d).w_pinv);
        pairing.push(residual);
    }
    Ok(KreinRepresentation { lin, psi, pairing })
}

impl KreinRepresentation {
    pub fn residuals(&self, frame: &ActionFrame) -> Result<KreinRepresentationResiduals> {
        let act = frame.action();
        let sg = act.semigroupoid();
        let mut out = KreinRepresentationResiduals::default();
        for (a, b) in sg.composable_pairs() {
            let ab = sg.mul(a, b)?;
            let r = frobenius(&(&self.psi[ab.0] - &self.psi[a.0] * &self.psi[b.0]));
            out.multiplicativity = out.multiplicativity.max(r);
        }
        for a in sg.elems() {
            let (d, c) = (sg.d(a).0, sg.c(a).0);
            let (kd, kc) = (&self.lin.part(d).space, &self.lin.part(c).space);
            let sharp = krein_adjoint(&self.psi[a.0], kd, kc)?;
            out.sharp = out.sharp.max(frobenius(&(&self.psi[sg.star(a).0] - sharp)));
            out.commutator = out.commutator.max(self.commutator(frame, a));
            let scale = scale_of(&self.lin.part(d).gram).sqrt();
            for &x in frame.partition().index(d).points() {
                let ax = act.act(a, x).expect("validated action");
                let r = frobenius(&(&self.psi[a.0] * self.lin.feature(x) - self.lin.feature(ax)));
                out.intertwining = out.intertwining.max(r / scale);
            }
        }
        Ok(out)
    }

    /// `‖J_{c(α)} Ψ̃_α − Ψ̃_α J_{d(α)}‖_F`.
    pub fn commutator(&self, frame: &ActionFrame, a: Elem) -> f64 {
        let sg = frame.action().semigroupoid();
        let (d, c) = (sg.d(a).0, sg.c(a).0);
        let psi = &self.psi[a.0];
        frobenius(&(self.lin.part(c).space.j() * psi - psi * self.lin.part(d).space.j()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reducibility {
    /// The dominant kernel is not invariant, or the representation was not
    /// built from it.
    NotApplicable {
        reason: String,
        witness: Option<(Elem, Point, Point)>,
    },
    Checked {
        /// Per element `‖J_c Ψ̃_α − Ψ̃_α J_d‖_F`.
        commutators: Vec<f64>,
        worst: f64,
        /// Bounded-shift constants of `L`.
        shift_bounds: Vec<ShiftBound>,
    },
}

pub fn fundamental_reducibility_check(
    rep: &KreinRepresentation,
    l: &OpKernel,
    frame: &ActionFrame,
    tol: &Tolerances,
) -> Result<Reducibility> {
    if rep.lin.route() != RouteKind::Dominant {
        return Ok(Reducibility::NotApplicable {
            reason: "representation was not built through a dominant kernel".into(),
            witness: None,
        });
    }
    let inv = is_invariant(l, frame, tol);
    if !inv.invariant {
        return Ok(Reducibility::NotApplicable {
            reason: format!(
                "dominant kernel is not invariant (residual {:e})",
                inv.residual
            ),
            witness: inv.witness,
        });
    }
    let sg = frame.action().semigroupoid();
    let commutators: Vec<f64> = sg.elems().map(|a| rep.commutator(frame, a)).collect();
    let worst = commutators.iter().fold(0.0_f64, |m, v| m.max(*v));
    let shift_bounds = sg
        .elems()
        .map(|a| bounded_shift_constant(l, frame, a, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(Reducibility::Checked {
        commutators,
        worst,
        shift_bounds,
    })
}
