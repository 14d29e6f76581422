//! Minimal Banach-space dilation of an operator-valued system of imprimitivity.
//!
//! Elements of M_φ = span{φ_{x,E}} are stored by their atom values
//! (μ(ω))_{ω∈Ω} ∈ (ℂ^d)^m, so equality of formal combinations is exact and
//! ρ, V, Q, T are manifestly well defined. Because φ_{x,E}(ω) = φ({ω})x for
//! ω ∈ E, the space is the direct sum ⊕_ω range φ({ω}); coordinates use an
//! orthonormal basis of each block, and every operator is a matrix on ℂ^r.
//! The completion under ‖·‖_α is a no-op in finite dimension.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{AtomSet, FiniteGroup, MeasurableSpace, Multiplier};
use crate::check::{check_set_pairs, check_sets, max_residual, Check};
use crate::imprimitivity::ImprimitivitySystem;
use crate::linalg::{
    basis_vector, kernel_basis, max_abs, max_abs_diff, numeric_rank, pseudo_inverse, random_vector, range_basis,
    seeded_rng, spectral_norm, CMatrix, CVector, Norm, NormedSpace, Tolerance,
};
use crate::ovm::Ovm;

/// Subset scans over at least this many atoms run in parallel.
const PARALLEL_ATOMS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BanachError {
    #[error("the minimal dilation needs a group; element {0} has no inverse")]
    SemigroupNotSupported(usize),
    #[error("{m} atoms exceed the subset enumeration cap {cap}")]
    EnumerationCapExceeded { m: usize, cap: usize },
    #[error("{op} does not map M_phi into itself (residual {residual:e})")]
    ClosureViolation { op: String, residual: f64 },
    #[error("dilation identity {name} fails (residual {residual:e})")]
    IdentityViolation { name: String, residual: f64 },
    #[error("rho(Omega) is not idempotent (residual {residual:e})")]
    NotIdempotent { residual: f64 },
    #[error("dilation is not injective: {reason}")]
    NotInjective { reason: String, witness: CVector },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// A ℂ^d-valued measure on Ω stored by its atom values.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMeasure {
    space: MeasurableSpace,
    target: NormedSpace,
    atom_values: Vec<CVector>,
}

impl VectorMeasure {
    pub fn new(space: MeasurableSpace, target: NormedSpace, atom_values: Vec<CVector>) -> Result<Self, BanachError> {
        if atom_values.len() != space.atom_count() || atom_values.iter().any(|v| v.len() != target.dim) {
            return Err(BanachError::ShapeMismatch(format!(
                "vector measure needs {} atom values of length {}",
                space.atom_count(),
                target.dim
            )));
        }
        Ok(Self { space, target, atom_values })
    }

    pub fn zero(space: MeasurableSpace, target: NormedSpace) -> Self {
        Self { space, target, atom_values: vec![CVector::zeros(target.dim); space.atom_count()] }
    }

    pub fn space(&self) -> MeasurableSpace {
        self.space
    }

    pub fn target(&self) -> NormedSpace {
        self.target
    }

    pub fn atom_values(&self) -> &[CVector] {
        &self.atom_values
    }

    /// μ(E), summed over the atoms of E in increasing order.
    pub fn value(&self, set: AtomSet) -> CVector {
        set.atoms().fold(CVector::zeros(self.target.dim), |acc, w| acc + &self.atom_values[w])
    }

    pub fn is_zero(&self) -> bool {
        self.atom_values.iter().all(|v| v.iter().all(|z| *z == crate::linalg::ZERO))
    }
}

/// φ_{x,E}: F ↦ φ(E∩F)x.
pub fn make_phi_x_e(ovm: &Ovm, x: &CVector, set: AtomSet) -> Result<VectorMeasure, BanachError> {
    if x.len() != ovm.dim() {
        return Err(BanachError::ShapeMismatch(format!("vector of length {} in dimension {}", x.len(), ovm.dim())));
    }
    let d = ovm.dim();
    let values =
        (0..ovm.atom_count()).map(|w| if set.contains(w) { ovm.atom(w) * x } else { CVector::zeros(d) }).collect();
    VectorMeasure::new(ovm.space(), ovm.target(), values)
}

/// ‖μ‖_α = max over all E ⊆ Ω of ‖μ(E)‖_X.
pub fn alpha_norm(mu: &VectorMeasure, cap: usize) -> Result<f64, BanachError> {
    let m = mu.space.atom_count();
    if m > cap {
        return Err(BanachError::EnumerationCapExceeded { m, cap });
    }
    let norm = mu.target.norm;
    let eval = |bits: u64| norm.eval(mu.value(AtomSet(bits)).as_slice());
    let count = 1u64 << m;
    Ok(if m >= PARALLEL_ATOMS {
        (0..count).into_par_iter().map(eval).reduce(|| 0.0, f64::max)
    } else {
        (0..count).map(eval).fold(0.0, f64::max)
    })
}

/// Coordinates on M_φ = ⊕_ω range φ({ω}), normed by ‖·‖_α.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSpaceAlpha {
    ovm: Ovm,
    /// Orthonormal basis U_ω (d × r_ω) of range φ({ω}).
    blocks: Vec<CMatrix>,
    offsets: Vec<usize>,
    dim: usize,
    cap: usize,
}

impl DilationSpaceAlpha {
    pub fn new(ovm: &Ovm, tol: &Tolerance) -> Result<Self, BanachError> {
        let m = ovm.atom_count();
        if m > tol.enum_cap {
            return Err(BanachError::EnumerationCapExceeded { m, cap: tol.enum_cap });
        }
        let blocks: Vec<CMatrix> = ovm.atoms().iter().map(|a| range_basis(a, tol)).collect();
        let mut offsets = Vec::with_capacity(m);
        let mut dim = 0;
        for b in &blocks {
            offsets.push(dim);
            dim += b.ncols();
        }
        Ok(Self { ovm: ovm.clone(), blocks, offsets, dim, cap: tol.enum_cap })
    }

    pub fn ovm(&self) -> &Ovm {
        &self.ovm
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, w: usize) -> &CMatrix {
        &self.blocks[w]
    }

    pub fn block_rank(&self, w: usize) -> usize {
        self.blocks[w].ncols()
    }

    pub fn offset(&self, w: usize) -> usize {
        self.offsets[w]
    }

    /// The (m·d) × r block-diagonal isometry from coordinates to stacked atom values.
    pub fn basis(&self) -> CMatrix {
        let d = self.ovm.dim();
        let mut b = CMatrix::zeros(self.ovm.atom_count() * d, self.dim);
        for (w, u) in self.blocks.iter().enumerate() {
            b.view_mut((w * d, self.offsets[w]), (d, u.ncols())).copy_from(u);
        }
        b
    }

    pub fn to_measure(&self, coords: &CVector) -> VectorMeasure {
        let values = self.blocks.iter().enumerate().map(|(w, u)| u * coords.rows(self.offsets[w], u.ncols())).collect();
        VectorMeasure { space: self.ovm.space(), target: self.ovm.target(), atom_values: values }
    }

    /// Coordinates of the orthogonal projection of μ onto M_φ.
    pub fn coordinates(&self, mu: &VectorMeasure) -> CVector {
        let mut c = CVector::zeros(self.dim);
        for (w, u) in self.blocks.iter().enumerate() {
            c.rows_mut(self.offsets[w], u.ncols()).copy_from(&(u.adjoint() * &mu.atom_values[w]));
        }
        c
    }

    /// Largest atom-value distance from μ to M_φ; zero exactly for members.
    pub fn membership_residual(&self, mu: &VectorMeasure) -> f64 {
        let back = self.to_measure(&self.coordinates(mu));
        max_residual(
            mu.atom_values
                .iter()
                .zip(&back.atom_values)
                .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm())),
        )
    }

    /// The generators φ_{e_k,{ω}} in the order (ω, k).
    pub fn generators(&self) -> Vec<VectorMeasure> {
        let d = self.ovm.dim();
        (0..self.ovm.atom_count())
            .flat_map(|w| (0..d).map(move |k| (w, k)))
            .map(|(w, k)| {
                make_phi_x_e(&self.ovm, &basis_vector(d, k), AtomSet::singleton(w)).expect("basis vector has length d")
            })
            .collect()
    }

    /// r × (m·d) matrix whose column ω·d + k holds the coordinates of φ_{e_k,{ω}}.
    pub fn generator_matrix(&self) -> CMatrix {
        let d = self.ovm.dim();
        let mut g = CMatrix::zeros(self.dim, self.ovm.atom_count() * d);
        for (w, u) in self.blocks.iter().enumerate() {
            g.view_mut((self.offsets[w], w * d), (u.ncols(), d)).copy_from(&(u.adjoint() * self.ovm.atom(w)));
        }
        g
    }

    /// ‖·‖_α of the element with the given coordinates.
    pub fn norm(&self, coords: &CVector) -> f64 {
        alpha_norm(&self.to_measure(coords), self.cap).expect("atom count checked against the cap at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarrierKind {
    /// The standard ℓ² norm of the coordinates.
    Euclidean,
    Other,
}

/// The norm of a dilation carrier, evaluated on coordinate vectors.
#[derive(Clone)]
pub struct CarrierNorm {
    label: String,
    kind: CarrierKind,
    eval: Arc<dyn Fn(&CVector) -> f64 + Send + Sync>,
}

impl fmt::Debug for CarrierNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CarrierNorm").field("label", &self.label).field("kind", &self.kind).finish()
    }
}

impl CarrierNorm {
    pub fn euclidean() -> Self {
        Self::lp(Norm::L2)
    }

    pub fn lp(norm: Norm) -> Self {
        let kind = if norm.is_hilbert() { CarrierKind::Euclidean } else { CarrierKind::Other };
        Self { label: norm.to_string(), kind, eval: Arc::new(move |v: &CVector| norm.eval(v.as_slice())) }
    }

    pub fn alpha(space: DilationSpaceAlpha) -> Self {
        Self { label: "alpha".into(), kind: CarrierKind::Other, eval: Arc::new(move |c: &CVector| space.norm(c)) }
    }

    /// c ↦ ‖Uc‖_parent on the coordinates of a subspace with basis U.
    /// Stays Euclidean when the parent is Euclidean and U has orthonormal columns.
    pub fn restricted(basis: CMatrix, parent: &CarrierNorm) -> Self {
        let k = basis.ncols();
        let orthonormal = max_abs_diff(&(basis.adjoint() * &basis), &CMatrix::identity(k, k)) <= 1e-12;
        let kind = if parent.kind == CarrierKind::Euclidean && orthonormal {
            CarrierKind::Euclidean
        } else {
            CarrierKind::Other
        };
        let p = parent.eval.clone();
        Self {
            label: format!("restricted({})", parent.label),
            kind,
            eval: Arc::new(move |c: &CVector| p(&(&basis * c))),
        }
    }

    pub fn custom(label: &str, kind: CarrierKind, eval: impl Fn(&CVector) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), kind, eval: Arc::new(eval) }
    }

    pub fn eval(&self, v: &CVector) -> f64 {
        (self.eval)(v)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> CarrierKind {
        self.kind
    }

    pub fn is_euclidean(&self) -> bool {
        self.kind == CarrierKind::Euclidean
    }
}

/// (V, ρ, Q, T) on a carrier ℂ^z: ρ is stored by its atoms, ρ(E) = Σ_{ω∈E} ρ({ω}).
#[derive(Debug, Clone)]
pub struct DilationSystem {
    space: MeasurableSpace,
    group: FiniteGroup,
    multiplier: Multiplier,
    carrier: CarrierNorm,
    rho: Vec<CMatrix>,
    v: Vec<CMatrix>,
    q: CMatrix,
    t: CMatrix,
    alpha: Option<DilationSpaceAlpha>,
}

impl DilationSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        space: MeasurableSpace,
        group: FiniteGroup,
        multiplier: Multiplier,
        carrier: CarrierNorm,
        rho: Vec<CMatrix>,
        v: Vec<CMatrix>,
        q: CMatrix,
        t: CMatrix,
    ) -> Result<Self, BanachError> {
        let z = q.ncols();
        let d = q.nrows();
        let square = |m: &CMatrix| m.shape() == (z, z);
        if rho.len() != space.atom_count() || !rho.iter().all(square) {
            return Err(BanachError::ShapeMismatch(format!("need {} rho atoms of size {z}x{z}", space.atom_count())));
        }
        if v.len() != group.order() || !v.iter().all(square) {
            return Err(BanachError::ShapeMismatch(format!("need {} V matrices of size {z}x{z}", group.order())));
        }
        if t.shape() != (z, d) {
            return Err(BanachError::ShapeMismatch(format!("T must be {z}x{d}")));
        }
        if multiplier.table().len() != group.order() {
            return Err(BanachError::ShapeMismatch("multiplier does not match the group".into()));
        }
        Ok(Self { space, group, multiplier, carrier, rho, v, q, t, alpha: None })
    }

    /// Carrier dimension z.
    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    /// Dimension d of the original space X.
    pub fn target_dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn space(&self) -> MeasurableSpace {
        self.space
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn multiplier(&self) -> &Multiplier {
        &self.multiplier
    }

    pub fn carrier(&self) -> &CarrierNorm {
        &self.carrier
    }

    pub fn rho(&self, set: AtomSet) -> CMatrix {
        let z = self.dim();
        set.atoms().fold(CMatrix::zeros(z, z), |acc, w| acc + &self.rho[w])
    }

    pub fn rho_atoms(&self) -> &[CMatrix] {
        &self.rho
    }

    pub fn v(&self, s: usize) -> &CMatrix {
        &self.v[s]
    }

    pub fn vs(&self) -> &[CMatrix] {
        &self.v
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn t(&self) -> &CMatrix {
        &self.t
    }

    /// The α-coordinate space when this is the minimal dilation.
    pub fn alpha_space(&self) -> Option<&DilationSpaceAlpha> {
        self.alpha.as_ref()
    }

    pub fn with_carrier(mut self, carrier: CarrierNorm) -> Self {
        self.carrier = carrier;
        self
    }
}

struct MinimalOperators {
    rho: Vec<CMatrix>,
    v: Vec<CMatrix>,
    q: CMatrix,
    t: CMatrix,
}

/// ρ, V, Q, T on stacked atom values, compressed to M_φ coordinates, with the
/// closure of each operator on M_φ verified along the way.
fn minimal_operators(
    system: &ImprimitivitySystem,
    alpha: &DilationSpaceAlpha,
    tol: &Tolerance,
) -> Result<MinimalOperators, BanachError> {
    let ovm = system.ovm();
    let (m, d) = (ovm.atom_count(), ovm.dim());
    let big = m * d;
    let b = alpha.basis();
    let bh = b.adjoint();
    let compress = |op: String, l: &CMatrix| -> Result<CMatrix, BanachError> {
        let c = &bh * l * &b;
        let residual = max_abs_diff(&(l * &b), &(&b * &c));
        if residual > tol.eps_residual {
            return Err(BanachError::ClosureViolation { op, residual });
        }
        Ok(c)
    };

    let mut rho = Vec::with_capacity(m);
    for w in 0..m {
        let mut l = CMatrix::zeros(big, big);
        l.view_mut((w * d, w * d), (d, d)).fill_with_identity();
        rho.push(compress(format!("rho({{{w}}})"), &l)?);
    }

    let group = system.group();
    let mut v = Vec::with_capacity(group.order());
    for s in group.elements() {
        let mut l = CMatrix::zeros(big, big);
        for w in 0..m {
            let sw = system.action().act_point(s, w);
            l.view_mut((sw * d, w * d), (d, d)).copy_from(system.rep().matrix(s));
        }
        v.push(compress(format!("V_{s}"), &l)?);
    }

    let mut t_full = CMatrix::zeros(big, d);
    let mut q_full = CMatrix::zeros(d, big);
    for w in 0..m {
        t_full.view_mut((w * d, 0), (d, d)).copy_from(ovm.atom(w));
        q_full.view_mut((0, w * d), (d, d)).fill_with_identity();
    }
    let t = &bh * &t_full;
    let residual = max_abs_diff(&t_full, &(&b * &t));
    if residual > tol.eps_residual {
        return Err(BanachError::ClosureViolation { op: "T".into(), residual });
    }
    Ok(MinimalOperators { rho, v, q: q_full * b, t })
}

/// The minimal dilation system (V, ρ, Q, T) on (M_φ, ‖·‖_α):
/// ρ(E)μ = μ restricted to E, (V_s μ)(ω′) = W_s μ(s⁻¹ω′), Q μ = μ(Ω), T x = φ_{x,Ω}.
///
/// Closure on M_φ and the algebraic identities (a)–(g) of [`verify_dilation`]
/// are enforced here; the sampled isometry of V_s is left to the verifier.
pub fn build_minimal_dilation(system: &ImprimitivitySystem, tol: &Tolerance) -> Result<DilationSystem, BanachError> {
    let group = system.group();
    if let Some(s) = group.elements().find(|&s| group.inverse(s).is_none()) {
        return Err(BanachError::SemigroupNotSupported(s));
    }
    let alpha = DilationSpaceAlpha::new(system.ovm(), tol)?;
    let ops = minimal_operators(system, &alpha, tol)?;
    let mut ds = DilationSystem::new(
        system.ovm().space(),
        group.clone(),
        system.rep().multiplier().clone(),
        CarrierNorm::alpha(alpha.clone()),
        ops.rho,
        ops.v,
        ops.q,
        ops.t,
    )?;
    ds.alpha = Some(alpha);
    for check in identity_checks(&ds, system, tol) {
        if !check.pass {
            return Err(BanachError::IdentityViolation { name: check.name, residual: check.max_residual });
        }
    }
    Ok(ds)
}

fn compatible(ds: &DilationSystem, original: &ImprimitivitySystem) -> Result<(), String> {
    if ds.space() != original.ovm().space() {
        return Err("dilation and system live on different measurable spaces".into());
    }
    if ds.group().order() != original.group().order() {
        return Err("dilation and system use different groups".into());
    }
    if ds.target_dim() != original.ovm().dim() {
        return Err(format!("Q maps into dimension {}, system acts on {}", ds.target_dim(), original.ovm().dim()));
    }
    Ok(())
}

/// Checks (a)–(g): exact algebraic identities.
fn identity_checks(ds: &DilationSystem, original: &ImprimitivitySystem, tol: &Tolerance) -> Vec<Check> {
    let eps = tol.eps_residual;
    let ovm = original.ovm();
    let group = original.group();
    let w = original.rep();
    let sets = check_sets(ovm.space(), tol);
    let z = ds.dim();
    let (q, t) = (ds.q(), ds.t());

    let compression = max_residual(sets.iter().map(|&e| max_abs_diff(&ovm.evaluate(e), &(q * ds.rho(e) * t))));
    let q_intertwines = max_residual(group.elements().map(|s| max_abs_diff(&(q * ds.v(s)), &(w.matrix(s) * q))));
    let t_intertwines = max_residual(group.elements().map(|s| max_abs_diff(&(ds.v(s) * t), &(t * w.matrix(s)))));
    let multiplicative = max_residual(
        check_set_pairs(ovm.space(), tol)
            .into_iter()
            .map(|(a, b)| max_abs_diff(&ds.rho(a.intersection(b)), &(ds.rho(a) * ds.rho(b)))),
    );
    let probability = max_abs_diff(&ds.rho(ovm.space().full()), &CMatrix::identity(z, z));
    let projective = max_residual(group.elements().flat_map(|s| {
        group
            .elements()
            .map(move |u| max_abs_diff(&(ds.v(s) * ds.v(u)), &(ds.v(group.mul(s, u)) * ds.multiplier().get(s, u))))
    }));
    let covariance = max_residual(group.elements().flat_map(|s| {
        sets.iter().map(move |&e| {
            let se = original.action().act_on_set(s, e);
            max_abs_diff(&(ds.v(s) * ds.rho(e)), &(ds.rho(se) * ds.v(s)))
        })
    }));

    vec![
        Check::residual("banach.compression", "φ(E) = Q ρ(E) T for every set E", compression, eps),
        Check::residual("banach.q_intertwines", "Q V_s = W_s Q for every s", q_intertwines, eps),
        Check::residual("banach.t_intertwines", "V_s T = T W_s for every s", t_intertwines, eps),
        Check::residual("banach.rho_multiplicative", "ρ(A∩B) = ρ(A) ρ(B) for all sets A, B", multiplicative, eps),
        Check::residual("banach.rho_probability", "ρ(Ω) = I on the carrier", probability, eps),
        Check::residual("banach.v_projective", "V_s V_t = ω(s,t) V_st for all s, t", projective, eps),
        Check::residual("banach.covariance", "V_s ρ(E) = ρ(sE) V_s for all s and sets E", covariance, eps),
    ]
}

/// Relative threshold for norm equalities that are certified by sampling.
pub fn isometry_threshold(tol: &Tolerance) -> f64 {
    10.0 * tol.eps_residual
}

/// Largest relative deviation |‖V_s c‖ − ‖c‖| / ‖c‖ over `samples` random
/// carrier vectors per group element.
fn isometry_deviation(ds: &DilationSystem, tol: &Tolerance, samples: usize) -> f64 {
    let z = ds.dim();
    if z == 0 {
        return 0.0;
    }
    let mut rng = seeded_rng(tol.seed);
    let vectors: Vec<CVector> = (0..samples).map(|_| random_vector(&mut rng, z)).collect();
    max_residual(ds.group().elements().flat_map(|s| {
        let vectors = &vectors;
        vectors
            .par_iter()
            .map(|c| {
                let before = ds.carrier().eval(c);
                let after = ds.carrier().eval(&(ds.v(s) * c));
                if before == 0.0 {
                    after
                } else {
                    (after - before).abs() / before
                }
            })
            .collect::<Vec<f64>>()
    }))
}

/// Residuals of every dilation-system identity for `ds` against `original`:
/// (a) compression φ(E) = QρT, (b) QV = WQ, (c) VT = TW, (d) ρ multiplicative,
/// (e) ρ(Ω) = I, (f) V projective with ω, (g) covariance, and (h) the sampled
/// isometry of each V_s in the carrier norm.
pub fn verify_dilation(
    ds: &DilationSystem,
    original: &ImprimitivitySystem,
    tol: &Tolerance,
    samples: usize,
) -> Vec<Check> {
    if let Err(reason) = compatible(ds, original) {
        return vec![Check::failure("banach.shape", "dilation and system have compatible shapes", reason)];
    }
    let mut checks = identity_checks(ds, original, tol);
    let deviation = isometry_deviation(ds, tol, samples);
    checks.push(
        Check::residual(
            "banach.v_isometry",
            "‖V_s μ‖ = ‖μ‖ in the carrier norm (relative, sampled)",
            deviation,
            isometry_threshold(tol),
        )
        .with_note(format!("sampled: {samples} vectors per element, carrier {}", ds.carrier().label())),
    );
    checks
}

/// Restrict a dilation to Y = ρ(Ω)Z, where ρ becomes a probability measure:
/// operators are compressed to an orthonormal basis U of Y and T becomes
/// U*ρ(Ω)T. The returned checks cover invariance of Y, invariance of Q(Z)
/// under W_s and φ(E), and the full identity suite of the restriction.
pub fn restrict_probability(
    ds: &DilationSystem,
    original: &ImprimitivitySystem,
    tol: &Tolerance,
) -> Result<(DilationSystem, Vec<Check>), BanachError> {
    compatible(ds, original).map_err(BanachError::ShapeMismatch)?;
    let eps = tol.eps_residual;
    let p = ds.rho(ds.space().full());
    let residual = max_abs_diff(&(&p * &p), &p);
    if residual > eps {
        return Err(BanachError::NotIdempotent { residual });
    }
    let u = range_basis(&p, tol);
    let uh = u.adjoint();
    let invariance = |l: &CMatrix| max_abs_diff(&(l * &u), &(&u * (&uh * l * &u)));
    let range_invariance = max_residual(ds.rho_atoms().iter().chain(ds.vs()).map(invariance));

    let rho = ds.rho_atoms().iter().map(|l| &uh * l * &u).collect();
    let v = ds.vs().iter().map(|l| &uh * l * &u).collect();
    let restricted = DilationSystem::new(
        ds.space(),
        ds.group().clone(),
        ds.multiplier().clone(),
        CarrierNorm::restricted(u.clone(), ds.carrier()),
        rho,
        v,
        ds.q() * &u,
        &uh * &p * ds.t(),
    )?;

    let qz_invariance = q_range_invariance(ds, original, tol);
    let mut checks = vec![
        Check::residual("restrict.range_invariant", "ρ(E) and V_s leave ρ(Ω)Z invariant", range_invariance, eps),
        Check::residual("restrict.q_range_invariant", "Q(Z) is invariant under W_s and φ(E)", qz_invariance, eps),
    ];
    checks.extend(verify_dilation(&restricted, original, tol, tol.sample_count));
    Ok((restricted, checks))
}

/// Largest distance from W_s Q(Z) and φ({ω}) Q(Z) back to Q(Z).
fn q_range_invariance(ds: &DilationSystem, original: &ImprimitivitySystem, tol: &Tolerance) -> f64 {
    let y = range_basis(ds.q(), tol);
    let yh = y.adjoint();
    let leak = |l: &CMatrix| {
        let ly = l * &y;
        max_abs_diff(&ly, &(&y * (&yh * &ly)))
    };
    max_residual(original.rep().matrices().iter().chain(original.ovm().atoms()).map(leak))
}

/// The dilation norm induced on M_φ by an injective dilation, d(μ) = ‖Rμ‖_Z.
#[derive(Debug, Clone)]
pub struct InducedNorm {
    pub alpha: DilationSpaceAlpha,
    /// The minimal operators (V_d, ρ_d, Q_d, T_d) on M_φ, carrying the d-norm.
    pub minimal: DilationSystem,
    /// The isometry (M_φ, d) → Z sending φ_{x,E} to ρ(E)Tx.
    pub r: CMatrix,
    pub z_carrier: CarrierNorm,
    pub checks: Vec<Check>,
}

impl InducedNorm {
    pub fn d_norm(&self, coords: &CVector) -> f64 {
        self.minimal.carrier().eval(coords)
    }
}

/// Factor the map φ_{x,E} ↦ ρ(E)Tx through M_φ and induce the d-norm.
///
/// Well-definedness (every relation among generators in M_φ also holds among
/// their images) and injectivity (rank R = dim M_φ) are both required;
/// a failure of either returns [`BanachError::NotInjective`] with a witness
/// combination of generators (well-definedness) or M_φ coordinates (injectivity).
pub fn induced_norm_from_injective(
    ds: &DilationSystem,
    original: &ImprimitivitySystem,
    tol: &Tolerance,
) -> Result<InducedNorm, BanachError> {
    compatible(ds, original).map_err(BanachError::ShapeMismatch)?;
    let eps = tol.eps_residual;
    let ovm = original.ovm();
    let (m, d) = (ovm.atom_count(), ovm.dim());
    let alpha = DilationSpaceAlpha::new(ovm, tol)?;
    let ops = minimal_operators(original, &alpha, tol)?;
    let r_dim = alpha.dim();

    let g = alpha.generator_matrix();
    let mut images = CMatrix::zeros(ds.dim(), m * d);
    for w in 0..m {
        images.view_mut((0, w * d), (ds.dim(), d)).copy_from(&(&ds.rho_atoms()[w] * ds.t()));
    }
    let g_pinv = pseudo_inverse(&g, tol);
    let r = &images * &g_pinv;

    // Generator relations live in ker G, spanned by the columns of I − G⁺G.
    let relations = CMatrix::identity(m * d, m * d) - &g_pinv * &g;
    let leaked = &images * &relations;
    let factoring = max_abs(&leaked);
    if factoring > eps {
        let k = (0..leaked.ncols())
            .max_by(|&a, &b| leaked.column(a).norm().total_cmp(&leaked.column(b).norm()))
            .unwrap_or(0);
        return Err(BanachError::NotInjective {
            reason: format!("a relation among generators is not preserved (residual {factoring:e})"),
            witness: relations.column(k).into_owned(),
        });
    }
    let rank = numeric_rank(&r, tol);
    if rank < r_dim {
        let kernel = kernel_basis(&r, tol);
        let witness = if kernel.ncols() > 0 { kernel.column(0).into_owned() } else { CVector::zeros(r_dim) };
        return Err(BanachError::NotInjective {
            reason: format!("R has rank {rank} on M_phi of dimension {r_dim}"),
            witness,
        });
    }

    let z_carrier = ds.carrier().clone();
    let d_norm = {
        let (z, r) = (z_carrier.clone(), r.clone());
        CarrierNorm::custom(&format!("induced({})", z.label()), CarrierKind::Other, move |c| z.eval(&(&r * c)))
    };
    let mut minimal = DilationSystem::new(
        ovm.space(),
        original.group().clone(),
        original.rep().multiplier().clone(),
        d_norm,
        ops.rho,
        ops.v,
        ops.q,
        ops.t,
    )?;
    minimal.alpha = Some(alpha.clone());

    let group = original.group();
    let well_defined = max_abs_diff(&images, &(&r * &g));
    let v_identity = max_residual(group.elements().map(|s| max_abs_diff(&(&r * minimal.v(s)), &(ds.v(s) * &r))));
    let rho_identity =
        max_residual((0..m).map(|w| max_abs_diff(&(&r * &minimal.rho_atoms()[w]), &(&ds.rho_atoms()[w] * &r))));
    let q_identity = max_abs_diff(minimal.q(), &(ds.q() * &r));
    let t_identity = max_abs_diff(&(&r * minimal.t()), &(ds.rho(ovm.space().full()) * ds.t()));
    let checks = vec![
        Check::residual("induced.well_defined", "Σ ρ(E_i)T x_i depends only on Σ φ_{x_i,E_i}", well_defined, eps),
        Check::residual("induced.r_v", "R V_s = V_s R on M_φ", v_identity, eps),
        Check::residual("induced.r_rho", "R ρ(E) = ρ(E) R on M_φ", rho_identity, eps),
        Check::residual("induced.r_q", "Q on M_φ equals Q R", q_identity, eps),
        Check::residual("induced.r_t", "R T = ρ(Ω) T", t_identity, eps),
    ];
    Ok(InducedNorm { alpha, minimal, r, z_carrier, checks })
}

#[derive(Debug, Clone)]
pub struct MinimalityReport {
    /// K = max_E ‖Q ρ(E)‖ from (M_φ, d) to X.
    pub k: f64,
    /// False when K had to be estimated by sampling (a lower bound).
    pub k_exact: bool,
    /// Largest observed ratio ‖μ‖_α / d(μ).
    pub c_est: f64,
    pub samples: usize,
    pub violations: usize,
    pub checks: Vec<Check>,
}

/// Confirm ‖μ‖_α ≤ K d(μ) on `samples` random elements of M_φ.
///
/// K is exact when Z is Euclidean and X is ℓ² (largest singular value of
/// Qρ(E)R⁺) or ℓ^∞ (largest row norm); otherwise it is the best sampled ratio
/// and the check is flagged approximate.
pub fn minimality_bound(induced: &InducedNorm, tol: &Tolerance, samples: usize) -> MinimalityReport {
    let alpha = &induced.alpha;
    let x_norm = alpha.ovm().target().norm;
    let ds = &induced.minimal;
    let r_dim = alpha.dim();
    let sets: Vec<AtomSet> = alpha.ovm().space().subsets().collect();

    let exact_k = if induced.z_carrier.is_euclidean() && matches!(x_norm, Norm::L2 | Norm::LInf) {
        let r_pinv = pseudo_inverse(&induced.r, tol);
        let k = sets
            .par_iter()
            .map(|&e| {
                let l = ds.q() * ds.rho(e) * &r_pinv;
                match x_norm {
                    Norm::L2 => spectral_norm(&l),
                    _ => l.row_iter().map(|row| row.norm()).fold(0.0, f64::max),
                }
            })
            .reduce(|| 0.0, f64::max);
        Some(k)
    } else {
        None
    };

    let mut rng = seeded_rng(tol.seed);
    let pairs: Vec<(f64, f64)> =
        (0..samples).map(|_| random_vector(&mut rng, r_dim)).map(|c| (alpha.norm(&c), induced.d_norm(&c))).collect();
    let ratios = pairs.iter().filter(|(_, dn)| *dn > 0.0).map(|(a, dn)| a / dn);
    let c_est = ratios.fold(0.0, f64::max);
    let (k, k_exact) = match exact_k {
        Some(k) => (k, true),
        None => {
            let mut rng = seeded_rng(tol.seed.wrapping_add(1));
            let est = (0..tol.sample_count)
                .map(|_| random_vector(&mut rng, r_dim))
                .filter_map(|c| {
                    let dn = induced.d_norm(&c);
                    (dn > 0.0).then(|| alpha.norm(&c) / dn)
                })
                .fold(c_est, f64::max);
            (est, false)
        }
    };

    let excess = |(a, dn): &(f64, f64)| (a - k * dn).max(0.0) / (k * dn).max(1.0);
    let violations = pairs.iter().filter(|p| excess(p) > tol.eps_residual).count();
    let worst = max_residual(pairs.iter().map(excess));
    let mut check = Check::residual("minimality.alpha_bound", "‖μ‖_α ≤ K d(μ) on sampled μ", worst, tol.eps_residual)
        .with_note(format!("sampled: {samples}, K = {k}, empirical ratio {c_est}"));
    if !k_exact {
        check = check.with_note("approximate");
    }
    let ordered = Check::residual(
        "minimality.ratio_below_k",
        "empirical ratio ‖μ‖_α / d(μ) does not exceed K",
        (c_est - k).max(0.0) / k.max(1.0),
        tol.eps_residual,
    );
    MinimalityReport { k, k_exact, c_est, samples, violations, checks: vec![check, ordered] }
}
