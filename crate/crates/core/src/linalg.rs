//! Dense complex linear algebra: ℓ^p norms, operator norms, isometry
//! certification, Hermitian eigendecomposition and numerical rank.
//!
//! Two pairings are used throughout the crate and are kept apart here:
//!
//! * the Banach dual pairing [`dual_pair`] is **bilinear**: a functional is
//!   its coefficient vector and the adjoint of a matrix is its plain
//!   transpose;
//! * the Hilbert inner product [`inner`] is **sesquilinear** (conjugate-linear
//!   in the second slot) and adjoints are conjugate transposes.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// The norm carried by a finite-dimensional space ℂ^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L1,
    L2,
    LInf,
    /// ℓ^p with 1 < p < ∞.
    Lp(f64),
}

impl Norm {
    pub fn validate(self) -> Result<Self, LinalgError> {
        match self {
            Norm::Lp(p) if !(p.is_finite() && p > 1.0) => {
                Err(LinalgError::InvalidInput(format!("lp exponent must satisfy 1 < p < inf, got {p}")))
            }
            other => Ok(other),
        }
    }

    /// Exponent p, with `f64::INFINITY` for the sup norm.
    pub fn exponent(self) -> f64 {
        match self {
            Norm::L1 => 1.0,
            Norm::L2 => 2.0,
            Norm::LInf => f64::INFINITY,
            Norm::Lp(p) => p,
        }
    }

    pub fn is_hilbert(self) -> bool {
        matches!(self, Norm::L2)
    }

    /// Evaluate the norm without input checks.
    ///
    /// Summation runs in index order, so two callers evaluating the same
    /// slice get bit-identical results.
    pub fn eval(self, v: &[C64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|z| z.norm()).sum(),
            Norm::L2 => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            Norm::LInf => v.iter().fold(0.0, |acc, z| acc.max(z.norm())),
            Norm::Lp(p) => v.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::L1 => write!(f, "l1"),
            Norm::L2 => write!(f, "l2"),
            Norm::LInf => write!(f, "linf"),
            Norm::Lp(p) => write!(f, "l{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormedSpace {
    pub dim: usize,
    pub norm: Norm,
}

impl NormedSpace {
    pub fn new(dim: usize, norm: Norm) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::InvalidInput("space dimension must be >= 1".into()));
        }
        Ok(Self { dim, norm: norm.validate()? })
    }

    pub fn norm_of(&self, v: &CVector) -> f64 {
        self.norm.eval(v.as_slice())
    }
}

/// Numerical thresholds and sampling controls shared by every check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps_residual: f64,
    /// Relative singular-value cutoff for numerical rank.
    pub eps_rank: f64,
    pub sample_count: usize,
    pub seed: u64,
    /// Largest index set for which sup-over-subsets norms are enumerated.
    pub enum_cap: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eps_residual: 1e-9, eps_rank: 1e-10, sample_count: 256, seed: 0, enum_cap: 16 }
    }
}

impl Tolerance {
    pub fn validate(self) -> Result<Self, LinalgError> {
        let ok = self.eps_residual > 0.0
            && self.eps_rank > 0.0
            && self.eps_residual.is_finite()
            && self.eps_rank.is_finite()
            && self.sample_count >= 1
            && (1..=62).contains(&self.enum_cap);
        if ok {
            Ok(self)
        } else {
            Err(LinalgError::InvalidInput(format!("bad tolerance block {self:?}")))
        }
    }
}

fn check_finite(v: &[C64]) -> Result<(), LinalgError> {
    match v.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(i) => Err(LinalgError::InvalidInput(format!("non-finite entry at index {i}"))),
        None => Ok(()),
    }
}

pub fn vec_norm(v: &[C64], norm: Norm) -> Result<f64, LinalgError> {
    if v.is_empty() {
        return Err(LinalgError::InvalidInput("empty vector".into()));
    }
    check_finite(v)?;
    Ok(norm.validate()?.eval(v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpNorm {
    pub value: f64,
    /// True when `value` is only a certified lower bound.
    pub approximate: bool,
}

/// Operator norm of `m` acting ℓ^p → ℓ^p.
///
/// Exact for ℓ¹ (max column sum), ℓ^∞ (max row sum) and ℓ² (largest
/// singular value). For general p the result is the best ratio found over
/// random starts refined by the p-norm power iteration, which is a lower bound.
pub fn op_norm(m: &CMatrix, norm: Norm, tol: &Tolerance) -> Result<OpNorm, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::InvalidInput(format!(
            "operator norm needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite(m.as_slice())?;
    let exact = |value| Ok(OpNorm { value, approximate: false });
    match norm.validate()? {
        Norm::L1 => exact(max_col_sum(m)),
        Norm::LInf => exact(max_row_sum(m)),
        Norm::L2 => exact(spectral_norm(m)),
        Norm::Lp(p) => Ok(OpNorm { value: lp_norm_lower_bound(m, p, tol), approximate: true }),
    }
}

pub fn max_col_sum(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_row_sum(m: &CMatrix) -> f64 {
    m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    svd(m).s
}

/// Thin singular value decomposition m = U diag(s) V_t with s descending.
///
/// Columns of `u` paired with zero singular values are unspecified.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v_t: CMatrix,
}

impl Svd {
    fn reconstruction_residual(&self, m: &CMatrix) -> f64 {
        let scaled = CMatrix::from_fn(self.u.nrows(), self.s.len(), |i, j| self.u[(i, j)] * self.s[j]);
        max_abs_diff(m, &(scaled * &self.v_t))
    }

    fn sorted(mut self) -> Self {
        let mut order: Vec<usize> = (0..self.s.len()).collect();
        order.sort_by(|&a, &b| self.s[b].total_cmp(&self.s[a]));
        self.u = CMatrix::from_fn(self.u.nrows(), order.len(), |i, j| self.u[(i, order[j])]);
        self.v_t = CMatrix::from_fn(order.len(), self.v_t.ncols(), |i, j| self.v_t[(order[i], j)]);
        self.s = order.iter().map(|&k| self.s[k]).collect();
        self
    }

    fn adjoint(self) -> Self {
        Self { u: self.v_t.adjoint(), s: self.s, v_t: self.u.adjoint() }
    }
}

/// Singular value decomposition that is checked before it is trusted.
///
/// nalgebra's bidiagonal QR occasionally returns a factorization that does
/// not reproduce a rank-deficient input (entry errors around 1e-3 on 4×4
/// matrices), so its output must reconstruct `m` with orthonormal factors;
/// otherwise the decomposition is recomputed by one-sided Jacobi rotations,
/// which are slower but accurate to working precision.
pub fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd { u: CMatrix::zeros(rows, 0), s: Vec::new(), v_t: CMatrix::zeros(0, cols) };
    }
    let slack = 100.0 * f64::EPSILON * (rows + cols) as f64 * max_abs(m);
    let raw = m.clone().svd(true, true);
    if let (Some(u), Some(v_t)) = (raw.u, raw.v_t) {
        let candidate = Svd { u, s: raw.singular_values.iter().copied().collect(), v_t };
        let k = candidate.s.len();
        let orthonormal = max_abs_diff(&(candidate.u.adjoint() * &candidate.u), &CMatrix::identity(k, k)) <= slack
            && max_abs_diff(&(&candidate.v_t * candidate.v_t.adjoint()), &CMatrix::identity(k, k)) <= slack;
        if orthonormal && candidate.reconstruction_residual(m) <= slack {
            return candidate.sorted();
        }
    }
    if rows >= cols {
        jacobi_svd(m).sorted()
    } else {
        jacobi_svd(&m.adjoint()).adjoint().sorted()
    }
}

/// One-sided (Hestenes) Jacobi SVD of a matrix with at least as many rows as
/// columns: columns are rotated pairwise until mutually orthogonal.
fn jacobi_svd(m: &CMatrix) -> Svd {
    const MAX_SWEEPS: usize = 80;
    let (rows, cols) = m.shape();
    let mut g = m.clone();
    let mut v = CMatrix::identity(cols, cols);
    let threshold = rows as f64 * f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dotc(&g.column(q));
                let size = gamma.norm();
                if size == 0.0 || size <= threshold * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase of column q so ⟨g_p, g_q⟩ is real, then
                // apply the real Jacobi rotation that zeroes it.
                let phase = gamma.conj() / size;
                let zeta = (beta - alpha) / (2.0 * size);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut g, &mut v] {
                    for i in 0..mat.nrows() {
                        let a = mat[(i, p)];
                        let b = mat[(i, q)] * phase;
                        mat[(i, p)] = a * c - b * s;
                        mat[(i, q)] = a * s + b * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let s: Vec<f64> = (0..cols).map(|k| g.column(k).norm()).collect();
    let u = CMatrix::from_fn(rows, cols, |i, k| if s[k] > 0.0 { g[(i, k)] / s[k] } else { ZERO });
    Svd { u, s, v_t: v.adjoint() }
}

/// Dual vector of `y` for the ℓ^p norm: ⟨y, z⟩ = ‖y‖_p with ‖z‖_q = 1.
fn lp_dual(y: &CVector, p: f64) -> CVector {
    let n = Norm::Lp(p).eval(y.as_slice());
    if n == 0.0 {
        return CVector::zeros(y.len());
    }
    y.map(|z| {
        let a = z.norm();
        if a == 0.0 {
            ZERO
        } else {
            (z / a) * (a / n).powf(p - 1.0)
        }
    })
}

fn lp_norm_lower_bound(m: &CMatrix, p: f64, tol: &Tolerance) -> f64 {
    let d = m.ncols();
    let q = p / (p - 1.0);
    let lp = Norm::Lp(p);
    let ratio = |x: &CVector| {
        let nx = lp.eval(x.as_slice());
        if nx == 0.0 {
            0.0
        } else {
            lp.eval((m * x).as_slice()) / nx
        }
    };
    let mut rng = seeded_rng(tol.seed ^ 0x6f70_6e6f_726d);
    let mut starts: Vec<CVector> = (0..d).map(|k| basis_vector(d, k)).collect();
    starts.extend((0..tol.sample_count).map(|_| random_vector(&mut rng, d)));
    let mut best = 0.0f64;
    for start in starts {
        let mut x = start;
        let mut current = ratio(&x);
        for _ in 0..50 {
            let y = m * &x;
            let z = lp_dual(&y, p);
            let w = m.adjoint() * z;
            let next = lp_dual(&w, q);
            let r = ratio(&next);
            if r <= current * (1.0 + 1e-14) {
                break;
            }
            x = next;
            current = r;
        }
        best = best.max(current);
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub enum IsometryWitness {
    /// A vector v with ‖Mv‖ ≠ ‖v‖.
    Vector(CVector),
    /// A row breaking the generalized-permutation pattern.
    Row(usize),
    /// A column breaking the generalized-permutation pattern.
    Column(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryCheck {
    pub is_isometry: bool,
    pub residual: f64,
    pub witness: Option<IsometryWitness>,
}

/// Certify that `m` is a surjective isometry of (ℂ^d, norm).
///
/// For ℓ² the test is M*M = I. For every other ℓ^p norm a surjective isometry
/// must be a generalized permutation matrix (one unimodular entry in each row
/// and column), which is checked entrywise.
pub fn is_isometry(m: &CMatrix, norm: Norm, tol: &Tolerance) -> IsometryCheck {
    if !m.is_square() || m.nrows() == 0 {
        return IsometryCheck { is_isometry: false, residual: f64::INFINITY, witness: None };
    }
    if norm.is_hilbert() {
        let gram = m.adjoint() * m - CMatrix::identity(m.nrows(), m.ncols());
        let residual = max_abs(&gram);
        if residual <= tol.eps_residual {
            return IsometryCheck { is_isometry: true, residual, witness: None };
        }
        // The eigenvector of M*M - I with the largest |eigenvalue| changes norm the most.
        let eig = hermitian_part(&gram).symmetric_eigen();
        let k = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let v = eig.eigenvectors.column(k).into_owned();
        return IsometryCheck { is_isometry: false, residual, witness: Some(IsometryWitness::Vector(v)) };
    }
    generalized_permutation_check(m, tol.eps_residual)
}

fn generalized_permutation_check(m: &CMatrix, eps: f64) -> IsometryCheck {
    let n = m.nrows();
    let mut residual = 0.0f64;
    let mut witness = None;
    let mut col_hits = vec![0usize; n];
    for i in 0..n {
        let mut hits = 0;
        for j in 0..n {
            let a = m[(i, j)].norm();
            if a > eps {
                hits += 1;
                col_hits[j] += 1;
                residual = residual.max((a - 1.0).abs());
                if (a - 1.0).abs() > eps && witness.is_none() {
                    witness = Some(IsometryWitness::Row(i));
                }
            } else {
                residual = residual.max(a);
            }
        }
        if hits != 1 {
            residual = residual.max(1.0);
            if witness.is_none() {
                witness = Some(IsometryWitness::Row(i));
            }
        }
    }
    if witness.is_none() {
        if let Some(j) = col_hits.iter().position(|&h| h != 1) {
            residual = residual.max(1.0);
            witness = Some(IsometryWitness::Column(j));
        }
    }
    IsometryCheck { is_isometry: witness.is_none(), residual, witness }
}

#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column k paired with `values[k]`.
    pub vectors: CMatrix,
}

pub fn hermitian_eig(m: &CMatrix, tol: &Tolerance) -> Result<HermitianEig, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::InvalidInput("eigendecomposition needs a square matrix".into()));
    }
    check_finite(m.as_slice())?;
    let skew = max_abs_diff(m, &m.adjoint());
    if skew > tol.eps_residual * (1.0 + max_abs(m)) {
        return Err(LinalgError::InvalidInput(format!("matrix is not Hermitian (residual {skew:e})")));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEig { values: Vec::new(), vectors: CMatrix::zeros(0, 0) });
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

/// (M + M*) / 2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Number of singular values above `eps_rank` times the largest one.
pub fn numeric_rank(m: &CMatrix, tol: &Tolerance) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > tol.eps_rank * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn range_basis(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    let svd = svd(m);
    let top = svd.s.first().copied().unwrap_or(0.0);
    let keep = svd.s.iter().take_while(|&&s| top > 0.0 && s > tol.eps_rank * top).count();
    svd.u.columns(0, keep).into_owned()
}

/// Orthonormal basis of the (numerical) kernel of `m`.
pub fn kernel_basis(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    let n = m.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let gram = m.adjoint() * m;
    let eig = hermitian_part(&gram).symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    // Eigenvalues of M*M are squared singular values, so the cutoff is looser
    // than the one used for `numeric_rank`.
    let cutoff = (tol.eps_rank * top).max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] <= cutoff).collect();
    CMatrix::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])])
}

/// Moore–Penrose pseudo-inverse with the relative rank cutoff of `tol`.
pub fn pseudo_inverse(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    let svd = svd(m);
    let top = svd.s.first().copied().unwrap_or(0.0);
    let keep = svd.s.iter().take_while(|&&s| top > 0.0 && s > tol.eps_rank * top).count();
    let v = svd.v_t.rows(0, keep).adjoint();
    let u_scaled = CMatrix::from_fn(m.nrows(), keep, |i, k| svd.u[(i, k)] / svd.s[k]);
    v * u_scaled.adjoint()
}

/// Bilinear Banach pairing ⟨x, f⟩ = Σ x_i f_i.
pub fn dual_pair(x: &[C64], f: &[C64]) -> Result<C64, LinalgError> {
    if x.len() != f.len() {
        return Err(LinalgError::InvalidInput(format!("length mismatch {} vs {}", x.len(), f.len())));
    }
    Ok(x.iter().zip(f).map(|(a, b)| a * b).sum())
}

/// Sesquilinear Hilbert inner product ⟨x, y⟩ = Σ x_i conj(y_i).
pub fn inner(x: &[C64], y: &[C64]) -> Result<C64, LinalgError> {
    if x.len() != y.len() {
        return Err(LinalgError::InvalidInput(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    Ok(x.iter().zip(y).map(|(a, b)| a * b.conj()).sum())
}

/// Bilinear rank-one operator u ⊗ f : x ↦ ⟨x, f⟩ u.
pub fn bilinear_outer(u: &CVector, f: &CVector) -> CMatrix {
    u * f.transpose()
}

/// Sesquilinear rank-one operator u u* : x ↦ ⟨x, u⟩ u.
pub fn hilbert_outer(u: &CVector) -> CMatrix {
    u * u.adjoint()
}

/// Largest entry modulus; the residual measure used by every identity check.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn vec_max_abs_diff(a: &CVector, b: &CVector) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn basis_vector(d: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[k] = ONE;
    v
}

pub fn is_finite(m: &CMatrix) -> bool {
    check_finite(m.as_slice()).is_ok()
}

pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Vector with independent standard complex Gaussian entries.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    CVector::from_fn(len, |_, _| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
    }

    #[test]
    fn vec_norm_examples() {
        let tol = 1e-15;
        assert!((vec_norm(&[c(3.0), c(4.0)], Norm::L2).unwrap() - 5.0).abs() < tol);
        assert!((vec_norm(&[c(1.0), c(-1.0)], Norm::L1).unwrap() - 2.0).abs() < tol);
        let cube = vec_norm(&[c(1.0), c(1.0)], Norm::Lp(3.0)).unwrap();
        assert!((cube - 2f64.powf(1.0 / 3.0)).abs() < tol);
        assert_eq!(vec_norm(&[c(0.0), c(0.0)], Norm::LInf).unwrap(), 0.0);
    }

    #[test]
    fn vec_norm_rejects_bad_input() {
        assert!(vec_norm(&[C64::new(f64::NAN, 0.0)], Norm::L2).is_err());
        assert!(vec_norm(&[], Norm::L2).is_err());
        assert!(vec_norm(&[c(1.0)], Norm::Lp(0.5)).is_err());
    }

    #[test]
    fn op_norm_examples() {
        let t = Tolerance::default();
        let diag = real(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        assert!((op_norm(&diag, Norm::L2, &t).unwrap().value - 4.0).abs() < 1e-12);
        let shear = real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(op_norm(&shear, Norm::LInf, &t).unwrap().value, 2.0);
        let swap = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(op_norm(&swap, Norm::L1, &t).unwrap().value, 1.0);
        assert!(op_norm(&real(1, 2, &[1.0, 2.0]), Norm::L1, &t).is_err());
    }

    #[test]
    fn general_p_operator_norm_is_a_flagged_lower_bound() {
        let t = Tolerance::default();
        let shear = real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let est = op_norm(&shear, Norm::Lp(3.0), &t).unwrap();
        assert!(est.approximate);
        // Riesz–Thorin: the l3 norm sits between l1/linf (=2) and the l2 value.
        assert!(est.value <= 2.0 + 1e-12);
        assert!(est.value >= spectral_norm(&shear).min(2.0) - 0.05);
    }

    #[test]
    fn isometry_examples() {
        let t = Tolerance::default();
        for norm in [Norm::L1, Norm::L2, Norm::LInf, Norm::Lp(3.0)] {
            assert!(is_isometry(&CMatrix::identity(3, 3), norm, &t).is_isometry);
        }
        let swap = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(is_isometry(&swap, Norm::L1, &t).is_isometry);
        let shear = real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let check = is_isometry(&shear, Norm::L2, &t);
        assert!(!check.is_isometry);
        match check.witness {
            Some(IsometryWitness::Vector(v)) => {
                let before = Norm::L2.eval(v.as_slice());
                let after = Norm::L2.eval((&shear * &v).as_slice());
                assert!((before - after).abs() > 0.1);
            }
            other => panic!("expected vector witness, got {other:?}"),
        }
        let check = is_isometry(&shear, Norm::L1, &t);
        assert_eq!(check.witness, Some(IsometryWitness::Row(0)));
    }

    #[test]
    fn phase_permutations_are_lp_isometries() {
        let t = Tolerance::default();
        let i = C64::new(0.0, 1.0);
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, i, -ONE, ZERO]);
        for norm in [Norm::L1, Norm::L2, Norm::LInf, Norm::Lp(1.5)] {
            assert!(is_isometry(&m, norm, &t).is_isometry);
        }
        let scaled = m.scale(1.1);
        assert!(!is_isometry(&scaled, Norm::LInf, &t).is_isometry);
    }

    #[test]
    fn hermitian_eig_examples() {
        let t = Tolerance::default();
        let e = hermitian_eig(&real(2, 2, &[1.0, 0.0, 0.0, 0.0]), &t).unwrap();
        assert_eq!(e.values.len(), 2);
        assert!((e.values[0] - 1.0).abs() < 1e-15 && e.values[1].abs() < 1e-15);
        let proj = real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let e = hermitian_eig(&proj, &t).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && e.values[1].abs() < 1e-14);
        let e = hermitian_eig(&CMatrix::zeros(3, 3), &t).unwrap();
        assert!(e.values.iter().all(|&v| v == 0.0));
        assert!(hermitian_eig(&real(2, 2, &[0.0, 1.0, 0.0, 0.0]), &t).is_err());
    }

    #[test]
    fn numeric_rank_examples() {
        let t = Tolerance::default();
        assert_eq!(numeric_rank(&CMatrix::identity(3, 3), &t), 3);
        assert_eq!(numeric_rank(&real(2, 2, &[1.0, 1.0, 1.0, 1.0]), &t), 1);
        assert_eq!(numeric_rank(&real(2, 2, &[1.0, 0.0, 0.0, 1e-15]), &t), 1);
        assert_eq!(numeric_rank(&CMatrix::zeros(2, 2), &t), 0);
    }

    #[test]
    fn dual_pair_is_bilinear() {
        assert_eq!(dual_pair(&[c(1.0), c(2.0)], &[c(3.0), c(4.0)]).unwrap(), c(11.0));
        let i = C64::new(0.0, 1.0);
        assert_eq!(dual_pair(&[i, ZERO], &[ONE, ZERO]).unwrap(), i);
        assert_eq!(dual_pair(&[c(7.0), c(-2.0)], &[ONE, ZERO]).unwrap(), c(7.0));
        assert!(dual_pair(&[ONE], &[ONE, ONE]).is_err());
        // the Hilbert product conjugates its second slot
        assert_eq!(inner(&[ONE], &[i]).unwrap(), -i);
    }

    #[test]
    fn range_and_kernel_bases() {
        let t = Tolerance::default();
        let m = real(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let r = range_basis(&m, &t);
        assert_eq!(r.ncols(), 1);
        let k = kernel_basis(&m, &t);
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&m * &k)) < 1e-12);
    }

    fn assert_valid_svd(m: &CMatrix, d: &Svd) {
        let k = m.nrows().min(m.ncols());
        assert_eq!((d.u.shape(), d.s.len(), d.v_t.shape()), ((m.nrows(), k), k, (k, m.ncols())));
        assert!(d.reconstruction_residual(m) < 1e-12, "residual {:e}", d.reconstruction_residual(m));
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(max_abs_diff(&(&d.v_t * d.v_t.adjoint()), &CMatrix::identity(k, k)) < 1e-12);
        for j in (0..k).filter(|&j| d.s[j] > 1e-12) {
            for i in (0..k).filter(|&i| d.s[i] > 1e-12) {
                let expected = if i == j { ONE } else { ZERO };
                assert!((d.u.column(i).dotc(&d.u.column(j)) - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_survives_a_matrix_that_trips_the_bidiagonal_qr() {
        // Column-major entries of a rank-2 covariant atom; the plain nalgebra
        // factorization of this matrix misses it by about 1e-3.
        let m = CMatrix::from_column_slice(4, 4, &VALUES.map(c));
        let d = svd(&m);
        assert_valid_svd(&m, &d);
        assert_eq!(numeric_rank(&m, &Tolerance::default()), 2);
        let r = range_basis(&m, &Tolerance::default());
        assert!(max_abs(&(&m - &r * r.adjoint() * &m)) < 1e-14);
    }
    const VALUES: [f64; 16] = [
        -0.06961434874383221,
        0.06336475218659818,
        0.1343964776944162,
        -0.12707955202531077,
        0.2752445461890378,
        0.5855131026588707,
        -0.006722170701094085,
        -0.02392359262932965,
        -0.15681693888192522,
        0.08832765531771247,
        0.26860291466693814,
        -0.25200876006915285,
        0.19536617858364863,
        0.046344053816838704,
        -0.23649264948143944,
        0.21549833141802344,
    ];

    #[test]
    fn jacobi_svd_of_random_tall_wide_and_deficient_matrices() {
        let mut rng = seeded_rng(11);
        for (rows, cols, rank) in [(4, 4, 4), (5, 3, 3), (3, 5, 3), (6, 6, 2), (4, 4, 0), (1, 1, 1)] {
            let m = random_matrix(&mut rng, rows, rank) * random_matrix(&mut rng, rank, cols);
            let tall = if rows >= cols { jacobi_svd(&m) } else { jacobi_svd(&m.adjoint()).adjoint() };
            let d = tall.sorted();
            assert_valid_svd(&m, &d);
            assert_eq!(d.s.iter().filter(|&&s| s > 1e-10).count(), rank);
            let nalgebra = m.clone().svd(false, false).singular_values;
            let mut expected: Vec<f64> = nalgebra.iter().copied().collect();
            expected.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in d.s.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pseudo_inverse_satisfies_the_penrose_equations() {
        let t = Tolerance::default();
        let mut rng = seeded_rng(3);
        let m = random_matrix(&mut rng, 5, 2) * random_matrix(&mut rng, 2, 4);
        let p = pseudo_inverse(&m, &t);
        assert!(max_abs_diff(&(&m * &p * &m), &m) < 1e-12);
        assert!(max_abs_diff(&(&p * &m * &p), &p) < 1e-12);
        let (mp, pm) = (&m * &p, &p * &m);
        assert!(max_abs_diff(&mp, &mp.adjoint()) < 1e-12 && max_abs_diff(&pm, &pm.adjoint()) < 1e-12);
    }
}
