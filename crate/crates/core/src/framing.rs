//! θ-induced framings and their dilation to a space Z with a contractive
//! suppression-unconditional basis {e_{g,j}}.
//!
//! Z = ℂ^{G×J} with index (g, j) stored at g·J + j and norm
//! ‖f‖_Z = max_{E ⊆ G×J} ‖Σ_{(g,j)∈E} f(g,j) θ_g x_j‖_X. Functionals act by the
//! bilinear pairing, so the adjoint of a matrix is its transpose.

use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::algebra::{AtomSet, FiniteGroup, MeasurableSpace, Multiplier};
use crate::banach::{alpha_norm, VectorMeasure};
use crate::check::{max_residual, Check};
use crate::imprimitivity::{check_rep, ImprimitivityError, ProjectiveRep};
use crate::linalg::{
    basis_vector, bilinear_outer, max_abs_diff, random_vector, seeded_rng, singular_values, vec_max_abs_diff, CMatrix,
    CVector, Norm, NormedSpace, Tolerance, C64, ONE, ZERO,
};

/// Z norms over at most this many indices scan sub-subsets explicitly in the
/// suppression check; larger ones use a subset-maximum sweep.
const SUBMASK_SCAN_INDICES: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FramingError {
    #[error("{windows} windows but {duals} dual functionals")]
    WindowCountMismatch { windows: usize, duals: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("window {0} is zero")]
    ZeroWindow(usize),
    #[error("element {0} has no inverse")]
    NotAGroup(usize),
    #[error("{z_dim} basis indices exceed the enumeration cap {cap}")]
    EnumerationCapExceeded { z_dim: usize, cap: usize },
    #[error("frame operator is singular (reciprocal condition {rcond:e})")]
    SingularFrameOperator { rcond: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Rep(#[from] ImprimitivityError),
}

/// Windows x_j and dual functionals x*_j indexed by the orbit of θ.
#[derive(Debug, Clone, PartialEq)]
pub struct FramingSystem {
    theta: ProjectiveRep,
    windows: Vec<CVector>,
    duals: Vec<CVector>,
}

impl FramingSystem {
    pub fn new(theta: ProjectiveRep, windows: Vec<CVector>, duals: Vec<CVector>) -> Result<Self, FramingError> {
        if windows.len() != duals.len() {
            return Err(FramingError::WindowCountMismatch { windows: windows.len(), duals: duals.len() });
        }
        if windows.is_empty() {
            return Err(FramingError::ShapeMismatch("a framing needs at least one window".into()));
        }
        let d = theta.dim();
        if let Some(j) = windows.iter().chain(&duals).position(|v| v.len() != d) {
            return Err(FramingError::ShapeMismatch(format!("window/dual {j} does not have length {d}")));
        }
        let group = theta.group();
        if let Some(s) = group.elements().find(|&s| group.inverse(s).is_none()) {
            return Err(FramingError::NotAGroup(s));
        }
        Ok(Self { theta, windows, duals })
    }

    pub fn theta(&self) -> &ProjectiveRep {
        &self.theta
    }

    pub fn windows(&self) -> &[CVector] {
        &self.windows
    }

    pub fn duals(&self) -> &[CVector] {
        &self.duals
    }

    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    /// Σ_{g,j} ⟨x, θ*_{g⁻¹} x*_j⟩ θ_g x_j as a matrix.
    pub fn reconstruction(&self) -> CMatrix {
        let d = self.theta.dim();
        let group = self.theta.group();
        let mut total = CMatrix::zeros(d, d);
        for g in group.elements() {
            let th = self.theta.matrix(g);
            let th_inv_t = self.theta.matrix(group.inv(g)).transpose();
            for (x, f) in self.windows.iter().zip(&self.duals) {
                total += bilinear_outer(&(th * x), &(&th_inv_t * f));
            }
        }
        total
    }

    fn check_windows(&self, tol: &Tolerance) -> Result<(), FramingError> {
        let norm = self.theta.space().norm;
        match self.windows.iter().position(|x| norm.eval(x.as_slice()) <= tol.eps_residual) {
            Some(j) => Err(FramingError::ZeroWindow(j)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FramingReport {
    /// Reconstruction residual ‖e_k − Σ⟨e_k, θ*_{g⁻¹}x*_j⟩θ_g x_j‖ per basis vector e_k.
    pub residuals: Vec<f64>,
    pub check: Check,
}

/// Reconstruction residual on each standard basis vector; zero windows are rejected.
pub fn verify_framing(fs: &FramingSystem, tol: &Tolerance) -> Result<FramingReport, FramingError> {
    fs.check_windows(tol)?;
    let d = fs.theta.dim();
    let recon = fs.reconstruction();
    let residuals: Vec<f64> = (0..d)
        .map(|k| {
            let e = basis_vector(d, k);
            (&e - &recon * &e).iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
        })
        .collect();
    let check = Check::residual(
        "framing.reconstruction_identity",
        "x = Σ_{g,j} ⟨x, θ*_{g⁻¹} x*_j⟩ θ_g x_j on a basis of X",
        max_residual(residuals.iter().copied()),
        tol.eps_residual,
    );
    Ok(FramingReport { residuals, check })
}

/// The dilation space Z with its basis, the maps T: X → Z, S: Z → X and the
/// dilated representation λ_h e_{g,j} = m(h,g) e_{hg,j}.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedBasis {
    group: FiniteGroup,
    multiplier: Multiplier,
    x_space: NormedSpace,
    j_count: usize,
    cap: usize,
    t: CMatrix,
    s: CMatrix,
    lambda: Vec<CMatrix>,
}

impl DilatedBasis {
    pub fn z_dim(&self) -> usize {
        self.s.ncols()
    }

    pub fn index(&self, g: usize, j: usize) -> usize {
        g * self.j_count + j
    }

    /// T x = Σ ⟨x, θ*_{g⁻¹} x*_j⟩ e_{g,j}.
    pub fn t(&self) -> &CMatrix {
        &self.t
    }

    /// S e_{g,j} = θ_g x_j.
    pub fn s(&self) -> &CMatrix {
        &self.s
    }

    pub fn lambda(&self, h: usize) -> &CMatrix {
        &self.lambda[h]
    }

    /// The vector measure on G×J with atom values f(g,j) θ_g x_j; its α-norm is ‖f‖_Z.
    fn measure(&self, f: &CVector) -> VectorMeasure {
        let space = MeasurableSpace::new(self.z_dim()).expect("index count checked against the cap");
        let values = (0..self.z_dim()).map(|i| self.s.column(i) * f[i]).collect();
        VectorMeasure::new(space, self.x_space, values).expect("columns of S have length d")
    }

    /// ‖f‖_Z = max over E ⊆ G×J of ‖Σ_{i∈E} f_i S e_i‖_X.
    pub fn z_norm(&self, f: &CVector) -> f64 {
        alpha_norm(&self.measure(f), self.cap).expect("index count checked against the cap")
    }

    /// ‖Σ_{i∈F} f_i S e_i‖_X for every F ⊆ G×J, indexed by bitmask.
    fn partial_norms(&self, f: &CVector) -> Vec<f64> {
        let mu = self.measure(f);
        let norm = self.x_space.norm;
        (0..1u64 << self.z_dim()).map(|bits| norm.eval(mu.value(AtomSet(bits)).as_slice())).collect()
    }
}

pub fn build_dilated_basis(fs: &FramingSystem, tol: &Tolerance) -> Result<DilatedBasis, FramingError> {
    fs.check_windows(tol)?;
    let theta = fs.theta();
    let group = theta.group();
    let (n, jn, d) = (group.order(), fs.window_count(), theta.dim());
    let z_dim = n * jn;
    if z_dim > tol.enum_cap {
        return Err(FramingError::EnumerationCapExceeded { z_dim, cap: tol.enum_cap });
    }
    let mut t = CMatrix::zeros(z_dim, d);
    let mut s = CMatrix::zeros(d, z_dim);
    for g in group.elements() {
        let th = theta.matrix(g);
        let th_inv = theta.matrix(group.inv(g));
        for j in 0..jn {
            let i = g * jn + j;
            s.set_column(i, &(th * &fs.windows[j]));
            t.set_row(i, &(fs.duals[j].transpose() * th_inv));
        }
    }
    let multiplier = theta.multiplier().clone();
    let lambda = group
        .elements()
        .map(|h| {
            let mut l = CMatrix::zeros(z_dim, z_dim);
            for g in group.elements() {
                for j in 0..jn {
                    l[(group.mul(h, g) * jn + j, g * jn + j)] = multiplier.get(h, g);
                }
            }
            l
        })
        .collect();
    Ok(DilatedBasis {
        group: group.clone(),
        multiplier,
        x_space: theta.space(),
        j_count: jn,
        cap: tol.enum_cap,
        t,
        s,
        lambda,
    })
}

/// Largest relative excess of ‖P_E f‖_Z over ‖f‖_Z across every E ⊆ G×J.
fn suppression_excess(db: &DilatedBasis, f: &CVector) -> f64 {
    let partial = db.partial_norms(f);
    let n = db.z_dim();
    let full = partial.iter().copied().fold(0.0, f64::max);
    // ‖P_E f‖_Z is the largest partial norm over subsets F of E.
    let restricted: Vec<f64> = if n <= SUBMASK_SCAN_INDICES {
        (0..partial.len())
            .map(|e| {
                let mut best = partial[0];
                let mut sub = e;
                while sub > 0 {
                    best = best.max(partial[sub]);
                    sub = (sub - 1) & e;
                }
                best
            })
            .collect()
    } else {
        let mut closed = partial.clone();
        for bit in 0..n {
            for mask in 0..closed.len() {
                if mask & (1 << bit) != 0 {
                    closed[mask] = closed[mask].max(closed[mask ^ (1 << bit)]);
                }
            }
        }
        closed
    };
    let worst = restricted.iter().copied().fold(0.0, f64::max);
    if full > 0.0 {
        (worst - full).max(0.0) / full
    } else {
        worst
    }
}

/// The nine properties (a)–(i) of the dilated basis; see the check items.
pub fn verify_dilated_basis(db: &DilatedBasis, fs: &FramingSystem, tol: &Tolerance, samples: usize) -> Vec<Check> {
    let eps = tol.eps_residual;
    let theta = fs.theta();
    let group = &db.group;
    let m = &db.multiplier;
    let (d, z, jn) = (theta.dim(), db.z_dim(), db.j_count);
    if theta.group().order() != group.order() || z != group.order() * fs.window_count() || db.t.ncols() != d {
        return vec![Check::failure("framing.shape", "dilated basis matches the framing", "shape mismatch")];
    }
    let e = group.identity();
    let x_norm = theta.space().norm;

    let reconstruction = max_abs_diff(&(&db.s * &db.t), &CMatrix::identity(d, d));

    let projective = max_residual(group.elements().flat_map(|h| {
        group
            .elements()
            .map(move |k| max_abs_diff(&(db.lambda(h) * db.lambda(k)), &(db.lambda(group.mul(h, k)) * m.get(h, k))))
    }));

    let mut rng = seeded_rng(tol.seed);
    let fs_samples: Vec<CVector> = (0..samples).map(|_| random_vector(&mut rng, z)).collect();
    let xs: Vec<CVector> = (0..samples).map(|_| random_vector(&mut rng, d)).collect();
    let f_norms: Vec<f64> = fs_samples.iter().map(|f| db.z_norm(f)).collect();

    let isometry = max_residual(group.elements().flat_map(|h| {
        fs_samples.iter().zip(&f_norms).map(move |(f, &nf)| {
            let after = db.z_norm(&(db.lambda(h) * f));
            if nf > 0.0 {
                (after - nf).abs() / nf
            } else {
                after
            }
        })
    }));

    let intertwining = max_residual(group.elements().flat_map(|g| {
        [
            max_abs_diff(&(theta.matrix(g) * &db.s), &(&db.s * db.lambda(g))),
            max_abs_diff(&(db.lambda(g) * &db.t), &(&db.t * theta.matrix(g))),
        ]
    }));

    let coord = |i: usize| basis_vector(z, i);
    let mut functionals = 0.0f64;
    for g in group.elements() {
        let g_inv = group.inv(g);
        let th_inv_t = theta.matrix(g_inv).transpose();
        for j in 0..jn {
            let (gi, ui) = (db.index(g, j), db.index(e, j));
            functionals = functionals.max(vec_max_abs_diff(&coord(gi), &(db.lambda(g) * coord(ui))));
            let dual = db.lambda(g_inv).transpose() * coord(ui);
            functionals = functionals.max(vec_max_abs_diff(&coord(gi), &dual));
            let t_star = db.t.transpose() * coord(gi);
            functionals = functionals.max(vec_max_abs_diff(&t_star, &(&th_inv_t * &fs.duals[j])));
        }
    }

    let mut dual_action = 0.0f64;
    for h in group.elements() {
        let lt = db.lambda(h).transpose();
        let h_inv = group.inv(h);
        for g in group.elements() {
            let k = group.mul(h_inv, g);
            for j in 0..jn {
                let expected = coord(db.index(k, j)) * m.get(h, k);
                let actual = &lt * coord(db.index(g, j));
                dual_action = dual_action.max(vec_max_abs_diff(&actual, &expected));
            }
        }
    }

    let contractive = max_residual(fs_samples.iter().zip(&f_norms).map(|(f, &nf)| {
        let sf = x_norm.eval((&db.s * f).as_slice());
        (sf - nf).max(0.0) / nf.max(f64::MIN_POSITIVE)
    }));

    let suppression = max_residual(fs_samples.iter().map(|f| suppression_excess(db, f)));

    let lower = xs.iter().map(|x| db.z_norm(&(&db.t * x)) / x_norm.eval(x.as_slice())).fold(f64::INFINITY, f64::min);
    let sigma_min = singular_values(&db.t).last().copied().unwrap_or(0.0);
    let bounded_below = if lower > eps && sigma_min > eps { 0.0 } else { 1.0 };

    vec![
        Check::residual("framing.reconstruction", "S T = I_X", reconstruction, eps),
        Check::residual("framing.lambda_projective", "λ_h λ_h′ = m(h,h′) λ_hh′", projective, eps),
        Check::residual(
            "framing.lambda_isometry",
            "‖λ_h f‖_Z = ‖f‖_Z (relative, sampled)",
            isometry,
            crate::banach::isometry_threshold(tol),
        )
        .with_note(format!("sampled: {samples} vectors per element")),
        Check::residual("framing.intertwining", "θ_g S = S λ_g and λ_g T = T θ_g", intertwining, eps),
        Check::residual(
            "framing.coordinate_functionals",
            "e_{g,j} = λ_g e_{u,j}, e*_{g,j} = λ*_{g⁻¹} e*_{u,j}, T* e*_{g,j} = θ*_{g⁻¹} x*_j",
            functionals,
            eps,
        ),
        Check::residual("framing.dual_action", "λ*_h e*_{g,j} = m(h, h⁻¹g) e*_{h⁻¹g,j}", dual_action, eps),
        Check::residual("framing.s_contractive", "‖S f‖_X ≤ ‖f‖_Z (sampled)", contractive, eps)
            .with_note(format!("sampled: {samples}")),
        Check::residual("framing.suppression", "‖P_E f‖_Z ≤ ‖f‖_Z for every E ⊆ G×J (sampled f)", suppression, eps)
            .with_note(format!("exhaustive over {} subsets, {samples} samples", 1u64 << z)),
        Check::residual("framing.t_bounded_below", "‖T x‖_Z ≥ c ‖x‖_X with c > 0", bounded_below, 0.0)
            .with_note(format!("empirical c = {lower}, smallest singular value {sigma_min}")),
    ]
}

/// Cyclic shifts θ_k e_i = e_{i+k mod n} on ℓ^p(ℤ_n).
pub fn cyclic_shift_rep(n: usize, norm: Norm, tol: &Tolerance) -> Result<ProjectiveRep, FramingError> {
    if n == 0 {
        return Err(FramingError::InvalidParams("cycle length must be at least 1".into()));
    }
    let group = FiniteGroup::cyclic(n);
    let space = NormedSpace::new(n, norm).map_err(|e| FramingError::InvalidParams(e.to_string()))?;
    let shifts = (0..n).map(|k| CMatrix::from_fn(n, n, |i, j| if i == (j + k) % n { ONE } else { ZERO })).collect();
    Ok(check_rep(&group, &Multiplier::trivial(n), space, shifts, tol)?.0)
}

/// Canonical dual windows of the shift system {θ_k φ_i}: x*_i = conj(F⁻¹ φ_i)
/// with the frame operator F = Σ_{k,i} (θ_k φ_i)(θ_k φ_i)*.
pub fn p_frame_from_windows(theta: ProjectiveRep, windows: Vec<CVector>) -> Result<FramingSystem, FramingError> {
    let n = theta.dim();
    let mut frame = CMatrix::zeros(n, n);
    for th in theta.matrices() {
        for w in &windows {
            let v = th * w;
            frame += &v * v.adjoint();
        }
    }
    let sv = singular_values(&frame);
    let top = sv.first().copied().unwrap_or(0.0);
    let rcond = if top > 0.0 { sv.last().copied().unwrap_or(0.0) / top } else { 0.0 };
    if rcond < 1e-8 {
        return Err(FramingError::SingularFrameOperator { rcond });
    }
    let inverse = frame.try_inverse().ok_or(FramingError::SingularFrameOperator { rcond })?;
    let duals = windows.iter().map(|w| (&inverse * w).map(|z| z.conj())).collect();
    FramingSystem::new(theta, windows, duals)
}

/// Random real windows on ℂ^n with canonical duals, acting by shifts on ℓ^p(ℤ_n).
pub fn gen_p_frame_scenario(
    n: usize,
    r: usize,
    norm: Norm,
    seed: u64,
    tol: &Tolerance,
) -> Result<FramingSystem, FramingError> {
    if r == 0 {
        return Err(FramingError::InvalidParams("at least one window is required".into()));
    }
    let theta = cyclic_shift_rep(n, norm, tol)?;
    let mut rng = seeded_rng(seed);
    let windows = (0..r).map(|_| CVector::from_fn(n, |_, _| C64::new(StandardNormal.sample(&mut rng), 0.0))).collect();
    p_frame_from_windows(theta, windows)
}
