//! Dense complex linear algebra used everywhere else in the crate.
//!
//! Everything here is deterministic: the Hermitian eigensolver is a cyclic
//! Jacobi iteration with a fixed sweep order, eigenpairs are sorted by a
//! fixed rule and eigenvector phases are normalised. Every classification of
//! eigenvalues as "zero" goes through [`Tolerances::cutoff`], so ranks,
//! definiteness tests, matrix signs and spectral projections agree with each
//! other.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_REL: f64 = 1e-13;
const TIE_REL: f64 = 1e-12;
const PHASE_EPS: f64 = 1.5e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: ‖A − A*‖_F = {residual:.3e} exceeds {bound:.3e}")]
    NotHermitian { residual: f64, bound: f64 },
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("expected a square matrix, got {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("square root requested for a matrix with eigenvalue {eigenvalue:.3e}")]
    NegativeForSqrt { eigenvalue: f64 },
    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("invalid tolerances: atol = {atol}, rank_rel = {rank_rel}")]
    BadTolerance { atol: f64, rank_rel: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Residual acceptance and the relative eigenvalue cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub atol: f64,
    pub rank_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rank_rel: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn new(atol: f64, rank_rel: f64) -> Result<Self> {
        let ok =
            atol.is_finite() && rank_rel.is_finite() && atol > 0.0 && rank_rel > 0.0 && atol < 1.0;
        if !ok {
            return Err(LinalgError::BadTolerance { atol, rank_rel });
        }
        Ok(Self { atol, rank_rel })
    }

    /// Eigenvalues with `|λ|` at or below this value count as zero.
    pub fn cutoff(&self, eigenvalues: &[f64]) -> f64 {
        self.rank_rel * max_abs(eigenvalues)
    }

    /// Absolute bound `atol·max(1, scale)`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.atol * scale.max(1.0)
    }
}

/// Which of the three matrix functions `herm_fn` applies to the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFn {
    Abs,
    SqrtPsd,
    Sign,
}

/// Ordering rule for eigenpairs that share an eigenvalue.
///
/// `Lexicographic` is the default and puts lexicographically larger
/// eigenvectors first. `Reversed` flips the order inside each
/// cluster of tied eigenvalues and normalises phases on the last significant
/// coordinate instead of the first; it exists so that two legitimately
/// different factorisations of the same matrix can be produced on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    Lexicographic,
    Reversed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` is the eigenvector of `eigenvalues[k]`.
    pub basis: CMatrix,
}

impl HermEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.eigenvalues)
    }

    pub fn cutoff(&self, tol: &Tolerances) -> f64 {
        tol.cutoff(&self.eigenvalues)
    }

    /// `U f(Λ) U*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.basis.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(k).scale_mut(w);
        }
        let mut out = &scaled * self.basis.adjoint();
        if n > 0 {
            symmetrize_in_place(&mut out);
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|l| l)
    }

    /// Indices of eigenvalues strictly above the cutoff, strictly below its
    /// negative, and the rest.
    pub fn classify(&self, tol: &Tolerances) -> SpectralClasses {
        let cut = self.cutoff(tol);
        let mut classes = SpectralClasses::default();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if l > cut {
                classes.positive.push(k);
            } else if l < -cut {
                classes.negative.push(k);
            } else {
                classes.zero.push(k);
            }
        }
        classes
    }

    /// Columns of the basis at the given indices.
    pub fn columns(&self, idx: &[usize]) -> CMatrix {
        let n = self.basis.nrows();
        CMatrix::from_fn(n, idx.len(), |i, j| self.basis[(i, idx[j])])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpectralClasses {
    pub negative: Vec<usize>,
    pub zero: Vec<usize>,
    pub positive: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProjections {
    pub minus: CMatrix,
    pub zero: CMatrix,
    pub plus: CMatrix,
}

/// Distances from zero to the nearest retained negative and positive
/// eigenvalue. `None` means there is no spectrum on that side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    pub neg: Option<f64>,
    pub pos: Option<f64>,
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Embeds a real matrix given row by row.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn check_finite(a: &CMatrix) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// `‖A − A*‖_F`.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

fn symmetrize_in_place(a: &mut CMatrix) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
}

/// Checks the Hermitian precondition and returns the exactly Hermitian part.
pub fn require_hermitian(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    check_finite(a)?;
    let residual = hermitian_residual(a);
    let bound = tol.bound(frobenius(a));
    if residual > bound {
        return Err(LinalgError::NotHermitian { residual, bound });
    }
    let mut h = a.clone();
    symmetrize_in_place(&mut h);
    Ok(h)
}

pub fn herm_eig(a: &CMatrix, tol: &Tolerances) -> Result<HermEig> {
    herm_eig_with(a, tol, TieBreak::Lexicographic)
}

pub fn herm_eig_with(a: &CMatrix, tol: &Tolerances, tie: TieBreak) -> Result<HermEig> {
    let h = require_hermitian(a, tol)?;
    let n = h.nrows();
    // Row-major working copy.
    let mut work: Vec<C64> = (0..n * n).map(|k| h[(k / n, k % n)]).collect();
    let mut vecs: Vec<C64> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    jacobi(&mut work, &mut vecs, n)?;

    let values: Vec<f64> = (0..n).map(|k| work[k * n + k].re).collect();
    let mut columns: Vec<Vec<C64>> = (0..n)
        .map(|k| (0..n).map(|i| vecs[i * n + k]).collect())
        .collect();
    for col in columns.iter_mut() {
        normalize_phase(col, tie);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let tie_tol = TIE_REL * max_abs(&values);
    let mut sorted = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] - values[order[end - 1]] <= tie_tol {
            end += 1;
        }
        let mut cluster: Vec<usize> = order[start..end].to_vec();
        cluster.sort_by(|&i, &j| lexicographic(&columns[j], &columns[i]));
        if tie == TieBreak::Reversed {
            cluster.reverse();
        }
        sorted.extend(cluster);
        start = end;
    }

    let eigenvalues = sorted.iter().map(|&k| values[k]).collect();
    let basis = CMatrix::from_fn(n, n, |i, j| columns[sorted[j]][i]);
    Ok(HermEig { eigenvalues, basis })
}

fn lexicographic(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

fn normalize_phase(col: &mut [C64], tie: TieBreak) {
    let pick = |z: &C64| z.norm() > PHASE_EPS;
    let pivot = match tie {
        TieBreak::Lexicographic => col.iter().position(pick),
        TieBreak::Reversed => col.iter().rposition(pick),
    };
    if let Some(p) = pivot {
        let phase = col[p].conj() / col[p].norm();
        for z in col.iter_mut() {
            *z *= phase;
        }
        col[p] = C64::new(col[p].re, 0.0);
    }
}

fn off_diagonal(a: &[C64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic complex Jacobi. On return `a` is diagonal (to the threshold) and
/// `v` holds the accumulated rotations, both row-major.
fn jacobi(a: &mut [C64], v: &mut [C64], n: usize) -> Result<()> {
    let total = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n < 2 || total == 0.0 {
        return Ok(());
    }
    let threshold = OFF_DIAGONAL_REL * total;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal(a, n) <= threshold {
            return Ok(());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // R = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on coordinates (p, q).
                let ph = apq / g;
                let phc = ph.conj();
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * phc * s;
                    a[k * n + q] = akp * s + akq * phc * c;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * ph * s;
                    a[q * n + k] = apk * s + aqk * ph * c;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p] = C64::new(app - t * g, 0.0);
                a[q * n + q] = C64::new(aqq + t * g, 0.0);
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * phc * s;
                    v[k * n + q] = vkp * s + vkq * phc * c;
                }
            }
        }
    }
    if off_diagonal(a, n) <= threshold {
        Ok(())
    } else {
        Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS })
    }
}

pub fn herm_fn(a: &CMatrix, f: MatrixFn, tol: &Tolerances) -> Result<CMatrix> {
    let eig = herm_eig(a, tol)?;
    herm_fn_from(&eig, f, tol)
}

pub fn herm_fn_from(eig: &HermEig, f: MatrixFn, tol: &Tolerances) -> Result<CMatrix> {
    let cut = eig.cutoff(tol);
    match f {
        MatrixFn::Abs => Ok(eig.apply(|l| if l.abs() > cut { l.abs() } else { 0.0 })),
        MatrixFn::Sign => Ok(eig.apply(|l| {
            if l > cut {
                1.0
            } else if l < -cut {
                -1.0
            } else {
                0.0
            }
        })),
        MatrixFn::SqrtPsd => {
            let floor = -tol.bound(eig.max_abs());
            if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < floor) {
                return Err(LinalgError::NegativeForSqrt { eigenvalue: bad });
            }
            Ok(eig.apply(|l| if l > cut { l.sqrt() } else { 0.0 }))
        }
    }
}

pub fn spectral_projections(a: &CMatrix, tol: &Tolerances) -> Result<SpectralProjections> {
    let eig = herm_eig(a, tol)?;
    let classes = eig.classify(tol);
    let proj = |idx: &[usize]| {
        let u = eig.columns(idx);
        let mut p = &u * u.adjoint();
        symmetrize_in_place(&mut p);
        p
    };
    let minus = proj(&classes.negative);
    let plus = proj(&classes.positive);
    let zero = identity(eig.dim()) - &minus - &plus;
    Ok(SpectralProjections { minus, zero, plus })
}

pub fn rank_tol(a: &CMatrix, tol: &Tolerances) -> Result<usize> {
    let eig = herm_eig(a, tol)?;
    let classes = eig.classify(tol);
    Ok(classes.positive.len() + classes.negative.len())
}

pub fn psd_check(a: &CMatrix, tol: &Tolerances) -> Result<bool> {
    let eig = herm_eig(a, tol)?;
    Ok(psd_from(&eig, tol))
}

pub fn psd_from(eig: &HermEig, tol: &Tolerances) -> bool {
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    min >= -tol.bound(eig.max_abs())
}

pub fn gap_at_zero(a: &CMatrix, tol: &Tolerances) -> Result<Gaps> {
    let eig = herm_eig(a, tol)?;
    Ok(gaps_from(&eig, tol))
}

pub fn gaps_from(eig: &HermEig, tol: &Tolerances) -> Gaps {
    let classes = eig.classify(tol);
    let neg = classes
        .negative
        .iter()
        .map(|&k| -eig.eigenvalues[k])
        .min_by(f64::total_cmp);
    let pos = classes
        .positive
        .iter()
        .map(|&k| eig.eigenvalues[k])
        .min_by(f64::total_cmp);
    Gaps { neg, pos }
}

/// Rank factorisation `A = Π* diag(signs) Π` of a Hermitian matrix with
/// `Π = |Λ_r|^{1/2} U_r*`, positive eigenvalues first.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFactor {
    /// `r × n`, full row rank.
    pub map: CMatrix,
    /// `n × r` with `map · right_inverse = I_r`.
    pub right_inverse: CMatrix,
    /// `+1.0` for the leading rows, `-1.0` for the trailing ones.
    pub signs: Vec<f64>,
    /// Orthonormal basis of the numerical kernel, `n × (n − r)`.
    pub null: CMatrix,
}

impl SpectralFactor {
    pub fn rank(&self) -> usize {
        self.signs.len()
    }

    pub fn positive(&self) -> usize {
        self.signs.iter().filter(|s| **s > 0.0).count()
    }

    pub fn negative(&self) -> usize {
        self.rank() - self.positive()
    }

    pub fn sign_matrix(&self) -> CMatrix {
        real_diag(&self.signs)
    }
}

pub fn spectral_factor(a: &CMatrix, tol: &Tolerances) -> Result<SpectralFactor> {
    spectral_factor_with(a, tol, TieBreak::Lexicographic)
}

pub fn spectral_factor_with(
    a: &CMatrix,
    tol: &Tolerances,
    tie: TieBreak,
) -> Result<SpectralFactor> {
    let eig = herm_eig_with(a, tol, tie)?;
    Ok(spectral_factor_from(&eig, tol))
}

pub fn spectral_factor_from(eig: &HermEig, tol: &Tolerances) -> SpectralFactor {
    let classes = eig.classify(tol);
    let kept: Vec<usize> = classes
        .positive
        .iter()
        .chain(&classes.negative)
        .copied()
        .collect();
    let n = eig.dim();
    let r = kept.len();
    let u = eig.columns(&kept);
    let mut map = u.adjoint();
    let mut right_inverse = u;
    let mut signs = Vec::with_capacity(r);
    for (row, &k) in kept.iter().enumerate() {
        let l = eig.eigenvalues[k];
        let w = l.abs().sqrt();
        map.row_mut(row).scale_mut(w);
        right_inverse.column_mut(row).scale_mut(1.0 / w);
        signs.push(l.signum());
    }
    let null = eig.columns(&classes.zero);
    debug_assert_eq!(null.ncols(), n - r);
    SpectralFactor {
        map,
        right_inverse,
        signs,
        null,
    }
}

/// Factor of a positive semidefinite matrix, `A = B* B`.
pub fn psd_factor_with(a: &CMatrix, tol: &Tolerances, tie: TieBreak) -> Result<SpectralFactor> {
    let eig = herm_eig_with(a, tol, tie)?;
    if !psd_from(&eig, tol) {
        return Err(LinalgError::NegativeForSqrt {
            eigenvalue: eig.eigenvalues[0],
        });
    }
    let classes = eig.classify(tol);
    let kept = classes.positive.clone();
    let mut zero: Vec<usize> = classes
        .negative
        .iter()
        .chain(&classes.zero)
        .copied()
        .collect();
    zero.sort_unstable();
    let u = eig.columns(&kept);
    let mut map = u.adjoint();
    let mut right_inverse = u;
    for (row, &k) in kept.iter().enumerate() {
        let w = eig.eigenvalues[k].sqrt();
        map.row_mut(row).scale_mut(w);
        right_inverse.column_mut(row).scale_mut(1.0 / w);
    }
    Ok(SpectralFactor {
        map,
        right_inverse,
        signs: vec![1.0; kept.len()],
        null: eig.columns(&zero),
    })
}

pub fn psd_factor(a: &CMatrix, tol: &Tolerances) -> Result<SpectralFactor> {
    psd_factor_with(a, tol, TieBreak::Lexicographic)
}

/// Largest eigenvalue of a Hermitian matrix; zero for the empty matrix.
pub fn lambda_max(a: &CMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(herm_eig(a, tol)?.eigenvalues.last().copied().unwrap_or(0.0))
}

/// Hermitian dilation `[[0, A], [A*, 0]]`; its eigenvalues are `±σ_i(A)`.
fn dilation(a: &CMatrix) -> CMatrix {
    let (m, n) = a.shape();
    let mut h = zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(a);
    h.view_mut((m, 0), (n, m)).copy_from(&a.adjoint());
    h
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    check_finite(a)?;
    let (m, n) = a.shape();
    let eig = herm_eig(&dilation(a), tol)?;
    let mut s: Vec<f64> = eig
        .eigenvalues
        .iter()
        .rev()
        .take(m.min(n))
        .map(|l| l.max(0.0))
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(a: &CMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(singular_values(a, tol)?.first().copied().unwrap_or(0.0))
}

/// Moore–Penrose pseudoinverse, computed from the eigendecomposition of the
/// Hermitian dilation so that no Gram matrix `A*A` is ever formed.
pub fn pinv(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    check_finite(a)?;
    let (m, n) = a.shape();
    let mut out = zeros(n, m);
    if m == 0 || n == 0 {
        return Ok(out);
    }
    let eig = herm_eig(&dilation(a), tol)?;
    let cut = eig.cutoff(tol);
    for (k, &sigma) in eig.eigenvalues.iter().enumerate() {
        if sigma <= cut {
            continue;
        }
        let col = eig.basis.column(k);
        let u = col.rows(0, m);
        let v = col.rows(m, n);
        // Each half of a unit dilation eigenvector has norm 1/√2.
        out += (v * u.adjoint()) * C64::new(2.0 / sigma, 0.0);
    }
    Ok(out)
}

/// Squared Frobenius-norm residuals of the four Moore–Penrose conditions.
pub fn penrose_residuals(a: &CMatrix, p: &CMatrix) -> [f64; 4] {
    let apa = a * p * a;
    let pap = p * a * p;
    let ap = a * p;
    let pa = p * a;
    [
        frobenius(&(apa - a)),
        frobenius(&(pap - p)),
        frobenius(&(&ap - ap.adjoint())),
        frobenius(&(&pa - pa.adjoint())),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && frobenius(&(a - b)) <= eps
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn swap_matrix_eigenpairs() {
        let a = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let eig = herm_eig(&a, &tol()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = from_real_rows(&[&[r, r], &[-r, r]]);
        assert!(close(&eig.basis, &expected, 1e-14), "{}", eig.basis);
    }

    #[test]
    fn identity_and_diagonal_eigenpairs() {
        let eig = herm_eig(&identity(3), &tol()).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(eig.basis, identity(3));

        let eig = herm_eig(&real_diag(&[2.0, -3.0]), &tol()).unwrap();
        assert_eq!(eig.eigenvalues, vec![-3.0, 2.0]);
    }

    #[test]
    fn rejects_non_hermitian_and_non_finite() {
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            herm_eig(&a, &tol()),
            Err(LinalgError::NotHermitian { .. })
        ));
        let mut b = identity(2);
        b[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(herm_eig(&b, &tol()), Err(LinalgError::NonFinite));
    }

    #[test]
    fn complex_hermitian_residuals() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(1.0, -1.0),
                c(0.0, 0.5),
                c(1.0, 1.0),
                c(-1.0, 0.0),
                c(0.3, 0.0),
                c(0.0, -0.5),
                c(0.3, 0.0),
                c(0.5, 0.0),
            ],
        );
        let eig = herm_eig(&a, &tol()).unwrap();
        let u = &eig.basis;
        assert!(frobenius(&(u.adjoint() * u - identity(3))) < 1e-13);
        let lam = real_diag(&eig.eigenvalues);
        assert!(frobenius(&(&a * u - u * lam)) < 1e-12);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn matrix_functions() {
        let swap = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(close(
            &herm_fn(&swap, MatrixFn::Abs, &tol()).unwrap(),
            &identity(2),
            1e-14
        ));
        let s = herm_fn(&real_diag(&[5.0, -2.0, 0.0]), MatrixFn::Sign, &tol()).unwrap();
        assert!(close(&s, &real_diag(&[1.0, -1.0, 0.0]), 1e-15));
        let r = herm_fn(&real_diag(&[4.0, 9.0]), MatrixFn::SqrtPsd, &tol()).unwrap();
        assert!(close(&r, &real_diag(&[2.0, 3.0]), 1e-15));
        assert!(matches!(
            herm_fn(&real_diag(&[4.0, -1.0]), MatrixFn::SqrtPsd, &tol()),
            Err(LinalgError::NegativeForSqrt { .. })
        ));
    }

    #[test]
    fn projections() {
        let p = spectral_projections(&real_diag(&[1.0, -1.0]), &tol()).unwrap();
        assert!(close(&p.minus, &real_diag(&[0.0, 1.0]), 1e-15));
        assert!(close(&p.plus, &real_diag(&[1.0, 0.0]), 1e-15));
        assert!(frobenius(&p.zero) < 1e-15);

        let p = spectral_projections(&zeros(2, 2), &tol()).unwrap();
        assert!(close(&p.zero, &identity(2), 0.0));
        assert!(frobenius(&p.minus) == 0.0 && frobenius(&p.plus) == 0.0);

        let p = spectral_projections(&from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), &tol()).unwrap();
        assert!(close(
            &p.plus,
            &from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]),
            1e-14
        ));
        assert!(close(
            &p.minus,
            &from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]),
            1e-14
        ));
    }

    #[test]
    fn pseudoinverse_examples() {
        let p = pinv(&real_diag(&[2.0, 0.0]), &tol()).unwrap();
        assert!(close(&p, &real_diag(&[0.5, 0.0]), 1e-14));
        assert!(close(
            &pinv(&identity(3), &tol()).unwrap(),
            &identity(3),
            1e-14
        ));
        let col = from_real_rows(&[&[1.0], &[1.0]]);
        let p = pinv(&col, &tol()).unwrap();
        assert!(close(&p, &from_real_rows(&[&[0.5, 0.5]]), 1e-14));
        assert_eq!(pinv(&zeros(0, 3), &tol()).unwrap().shape(), (3, 0));
    }

    #[test]
    fn rank_psd_gap() {
        let ones = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(psd_check(&ones, &tol()).unwrap());
        assert_eq!(rank_tol(&ones, &tol()).unwrap(), 1);
        assert!(!psd_check(&from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), &tol()).unwrap());
        let g = gap_at_zero(&real_diag(&[3.0, -0.5]), &tol()).unwrap();
        assert_eq!(
            g,
            Gaps {
                neg: Some(0.5),
                pos: Some(3.0)
            }
        );
        let g = gap_at_zero(&zeros(2, 2), &tol()).unwrap();
        assert_eq!(
            g,
            Gaps {
                neg: None,
                pos: None
            }
        );
    }

    #[test]
    fn tie_break_changes_only_the_degenerate_basis() {
        let a = real_diag(&[1.0, 1.0, -2.0]);
        let x = herm_eig_with(&a, &tol(), TieBreak::Lexicographic).unwrap();
        let y = herm_eig_with(&a, &tol(), TieBreak::Reversed).unwrap();
        assert_eq!(x.eigenvalues, y.eigenvalues);
        assert_ne!(x.basis, y.basis);
        assert!(close(&x.reconstruct(), &y.reconstruct(), 1e-14));
    }

    #[test]
    fn tolerances_validated() {
        assert!(Tolerances::new(0.0, 1e-10).is_err());
        assert!(Tolerances::new(1.5, 1e-10).is_err());
        assert!(Tolerances::new(1e-9, 1e-10).is_ok());
    }

    #[test]
    fn empty_matrix() {
        let eig = herm_eig(&zeros(0, 0), &tol()).unwrap();
        assert!(eig.eigenvalues.is_empty());
        assert!(psd_check(&zeros(0, 0), &tol()).unwrap());
    }
}
