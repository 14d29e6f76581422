//! Hilbert-space dilation of a positive system of imprimitivity to an
//! orthogonal projection-valued one.
//!
//! The sesquilinear form ⟨φ_{x,E}, φ_{y,F}⟩ = ⟨φ(E∩F)x, y⟩ on M_φ vanishes
//! across distinct atoms, so the Gram quotient splits into one block per atom.
//! Block ω is spanned by the eigenvectors of φ({ω}) with eigenvalue above
//! τ = eps_rank·λ_max, and the class of φ_{x,{ω}} has coordinates Λ_ω^{1/2} U_ω* x.

use thiserror::Error;

use crate::algebra::{AtomSet, FiniteGroup, Multiplier};
use crate::banach::{BanachError, CarrierNorm, DilationSystem};
use crate::check::{check_sets, max_residual, Check};
use crate::imprimitivity::ImprimitivitySystem;
use crate::linalg::{
    hermitian_eig, is_isometry, max_abs, max_abs_diff, op_norm, CMatrix, CVector, Norm, Tolerance, C64,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HilbertError {
    #[error("the OVM is not positive: {0}")]
    NotPositive(String),
    #[error("construction needs a Hilbert (l2) space, got {0}")]
    NonHilbertNorm(Norm),
    #[error("representation is not unitary at element {0}")]
    NotUnitaryRep(usize),
    #[error("element {0} has no inverse")]
    NotAGroup(usize),
    #[error("rank of phi({{{atom}}}) differs from rank of phi(g.{{{atom}}}) for g = {g}")]
    BlockRankMismatch { g: usize, atom: usize },
}

/// Kept eigenpairs of one atom: φ({ω}) ≈ U_ω Λ_ω U_ω*.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomBlock {
    pub vectors: CMatrix,
    pub values: Vec<f64>,
    pub offset: usize,
}

impl AtomBlock {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    fn scaled(&self, power: f64) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&l| C64::new(l.powf(power), 0.0)),
        ))
    }

    /// Λ^{1/2} U*: ℂ^d → block coordinates.
    pub fn coordinate_map(&self) -> CMatrix {
        self.scaled(0.5) * self.vectors.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertDilation {
    k_dim: usize,
    blocks: Vec<AtomBlock>,
    v: CMatrix,
    pi: Vec<CMatrix>,
    utilde: Vec<CMatrix>,
    group: FiniteGroup,
    multiplier: Multiplier,
    /// True when the representation carries a nontrivial multiplier.
    extension: bool,
}

impl HilbertDilation {
    pub fn k_dim(&self) -> usize {
        self.k_dim
    }

    pub fn blocks(&self) -> &[AtomBlock] {
        &self.blocks
    }

    /// V: ℂ^d → K, x ↦ ⊕_ω Λ_ω^{1/2} U_ω* x.
    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn pi_atoms(&self) -> &[CMatrix] {
        &self.pi
    }

    pub fn pi(&self, set: AtomSet) -> CMatrix {
        set.atoms().fold(CMatrix::zeros(self.k_dim, self.k_dim), |acc, w| acc + &self.pi[w])
    }

    pub fn utilde(&self, g: usize) -> &CMatrix {
        &self.utilde[g]
    }

    pub fn utildes(&self) -> &[CMatrix] {
        &self.utilde
    }

    pub fn is_extension(&self) -> bool {
        self.extension
    }

    /// Coordinates in K of the class of φ_{x,E}.
    pub fn class_coordinates(&self, x: &CVector, set: AtomSet) -> CVector {
        self.pi(set) * (&self.v * x)
    }
}

/// Build (V, π, Ũ) with φ(E) = V*π(E)V and Ũ_g V = V U_g.
pub fn build_hilbert_dilation(system: &ImprimitivitySystem, tol: &Tolerance) -> Result<HilbertDilation, HilbertError> {
    let rep = system.rep();
    let ovm = system.ovm();
    let group = system.group();
    let norm = rep.space().norm;
    if !norm.is_hilbert() {
        return Err(HilbertError::NonHilbertNorm(norm));
    }
    if let Some(s) = group.elements().find(|&s| group.inverse(s).is_none()) {
        return Err(HilbertError::NotAGroup(s));
    }
    if let Some(g) = rep.matrices().iter().position(|u| !is_isometry(u, Norm::L2, tol).is_isometry) {
        return Err(HilbertError::NotUnitaryRep(g));
    }

    let mut blocks = Vec::with_capacity(ovm.atom_count());
    let mut offset = 0;
    for (w, atom) in ovm.atoms().iter().enumerate() {
        let eig = hermitian_eig(atom, tol).map_err(|e| HilbertError::NotPositive(format!("atom {w}: {e}")))?;
        let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        if let Some(&low) = eig.values.last() {
            if low < -tol.eps_residual * top.max(1.0) {
                return Err(HilbertError::NotPositive(format!("atom {w} has eigenvalue {low:e}")));
            }
        }
        let tau = tol.eps_rank * top;
        let kept: Vec<usize> = (0..eig.values.len()).filter(|&k| top > 0.0 && eig.values[k] > tau).collect();
        let d = atom.nrows();
        let vectors = CMatrix::from_fn(d, kept.len(), |i, j| eig.vectors[(i, kept[j])]);
        let values = kept.iter().map(|&k| eig.values[k]).collect();
        blocks.push(AtomBlock { vectors, values, offset });
        offset += kept.len();
    }
    let k_dim = offset;
    let d = ovm.dim();

    let mut v = CMatrix::zeros(k_dim, d);
    let mut pi = Vec::with_capacity(blocks.len());
    for b in &blocks {
        v.view_mut((b.offset, 0), (b.rank(), d)).copy_from(&b.coordinate_map());
        let mut p = CMatrix::zeros(k_dim, k_dim);
        p.view_mut((b.offset, b.offset), (b.rank(), b.rank())).fill_with_identity();
        pi.push(p);
    }

    let mut utilde = Vec::with_capacity(group.order());
    for g in group.elements() {
        let mut u = CMatrix::zeros(k_dim, k_dim);
        for (w, from) in blocks.iter().enumerate() {
            let to = &blocks[system.action().act_point(g, w)];
            if to.rank() != from.rank() {
                return Err(HilbertError::BlockRankMismatch { g, atom: w });
            }
            let map = to.scaled(0.5) * to.vectors.adjoint() * rep.matrix(g) * &from.vectors * from.scaled(-0.5);
            u.view_mut((to.offset, from.offset), (to.rank(), from.rank())).copy_from(&map);
        }
        utilde.push(u);
    }

    let extension = !rep.multiplier().is_trivial(tol.eps_residual);
    Ok(HilbertDilation {
        k_dim,
        blocks,
        v,
        pi,
        utilde,
        group: group.clone(),
        multiplier: rep.multiplier().clone(),
        extension,
    })
}

/// The seven checks of the Hilbert dilation, in order: compression
/// φ(E) = V*π(E)V, unitarity of Ũ, the (projective) representation law,
/// Ũ_g V = V U_g, covariance of π, π projection-valued probability with
/// K_dim = Σ rank φ({ω}), and ‖V‖ = ‖φ(Ω)‖^{1/2}.
pub fn verify_hilbert_dilation(hd: &HilbertDilation, system: &ImprimitivitySystem, tol: &Tolerance) -> Vec<Check> {
    let ovm = system.ovm();
    let group = system.group();
    let rep = system.rep();
    let eps = tol.eps_residual;
    if hd.pi.len() != ovm.atom_count() || hd.v.ncols() != ovm.dim() || hd.utilde.len() != group.order() {
        return vec![Check::failure("hilbert.shape", "dilation and system have compatible shapes", "shape mismatch")];
    }
    let k = hd.k_dim;
    let identity = CMatrix::identity(k, k);
    let vh = hd.v.adjoint();
    let sets = check_sets(ovm.space(), tol);

    let compression = max_residual(sets.iter().map(|&e| max_abs_diff(&ovm.evaluate(e), &(&vh * hd.pi(e) * &hd.v))));
    let unitary = max_residual(hd.utilde.iter().map(|u| max_abs_diff(&(u.adjoint() * u), &identity)));
    let representation = max_residual(group.elements().flat_map(|s| {
        group.elements().map(move |t| {
            max_abs_diff(&(hd.utilde(s) * hd.utilde(t)), &(hd.utilde(group.mul(s, t)) * rep.multiplier().get(s, t)))
        })
    }));
    let intertwining =
        max_residual(group.elements().map(|g| max_abs_diff(&(hd.utilde(g) * &hd.v), &(&hd.v * rep.matrix(g)))));
    let covariance = max_residual(group.elements().flat_map(|g| {
        let sets = &sets;
        sets.iter().map(move |&e| {
            let u = hd.utilde(g);
            max_abs_diff(&(u * hd.pi(e) * u.adjoint()), &hd.pi(system.action().act_on_set(g, e)))
        })
    }));

    let mut projection = max_abs_diff(&hd.pi(ovm.space().full()), &identity);
    for (a, pa) in hd.pi.iter().enumerate() {
        projection = projection.max(max_abs_diff(pa, &pa.adjoint()));
        for (b, pb) in hd.pi.iter().enumerate() {
            let prod = pa * pb;
            projection = projection.max(if a == b { max_abs_diff(&prod, pa) } else { max_abs(&prod) });
        }
    }
    let expected_dim: usize = ovm.atoms().iter().map(|a| crate::linalg::numeric_rank(a, tol)).sum();
    if expected_dim != k {
        projection = projection.max(1.0);
    }

    let total = ovm.total();
    let norm_v = crate::linalg::spectral_norm(&hd.v);
    let norm_total = op_norm(&total, Norm::L2, tol).map(|n| n.value).unwrap_or(f64::NAN);
    let root = norm_total.sqrt();
    let v_norm = if root > 0.0 { (norm_v - root).abs() / root } else { norm_v };

    let mut rep_check =
        Check::residual("hilbert.representation", "Ũ_s Ũ_t = ω(s,t) Ũ_st for all s, t", representation, eps);
    if hd.extension {
        rep_check = rep_check.with_note("extension");
    }
    vec![
        Check::residual("hilbert.compression", "φ(E) = V* π(E) V for every set E", compression, eps),
        Check::residual("hilbert.unitary", "Ũ_g is unitary for every g", unitary, eps),
        rep_check,
        Check::residual("hilbert.intertwining", "Ũ_g V = V U_g for every g", intertwining, eps),
        Check::residual("hilbert.covariance", "Ũ_g π(E) Ũ_g* = π(gE) for all g and sets E", covariance, eps),
        Check::residual(
            "hilbert.projection_valued",
            "π atoms are orthogonal projections summing to I, dim K = Σ rank φ({ω})",
            projection,
            eps,
        )
        .with_note(format!("K_dim = {k}, expected {expected_dim}")),
        Check::residual("hilbert.v_norm", "‖V‖ = ‖φ(Ω)‖^{1/2} (relative)", v_norm, eps),
    ]
}

/// View the Hilbert dilation as a Euclidean dilation system with ρ = π,
/// V = Ũ, Q = V* and T = V.
pub fn hilbert_as_injective(hd: &HilbertDilation, system: &ImprimitivitySystem) -> Result<DilationSystem, BanachError> {
    DilationSystem::new(
        system.ovm().space(),
        hd.group.clone(),
        hd.multiplier.clone(),
        CarrierNorm::euclidean(),
        hd.pi.clone(),
        hd.utilde.clone(),
        hd.v.adjoint(),
        hd.v.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GroupAction, MeasurableSpace};
    use crate::banach::{induced_norm_from_injective, make_phi_x_e, restrict_probability, DilationSpaceAlpha};
    use crate::imprimitivity::{check_rep, check_system};
    use crate::linalg::{NormedSpace, ONE, ZERO};
    use crate::ovm::{bessel_ovm, Ovm};

    fn real(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn trivial_group_system(atoms: Vec<CMatrix>) -> ImprimitivitySystem {
        let t = Tolerance::default();
        let d = atoms[0].nrows();
        let g = FiniteGroup::trivial();
        let x = NormedSpace::new(d, Norm::L2).unwrap();
        let (rep, _) = check_rep(&g, &Multiplier::trivial(1), x, vec![CMatrix::identity(d, d)], &t).unwrap();
        let space = MeasurableSpace::new(atoms.len()).unwrap();
        let ovm = Ovm::new(space, x, atoms).unwrap();
        check_system(rep, ovm, GroupAction::trivial(&g, space), &t).unwrap().0
    }

    fn z2_bessel() -> ImprimitivitySystem {
        let t = Tolerance::default();
        let g = FiniteGroup::cyclic(2);
        let swap = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let x = NormedSpace::new(2, Norm::L2).unwrap();
        let (rep, _) = check_rep(&g, &Multiplier::trivial(2), x, vec![CMatrix::identity(2, 2), swap], &t).unwrap();
        let ovm = bessel_ovm(&rep, &CVector::from_vec(vec![ONE, ZERO]), &t).unwrap();
        check_system(rep, ovm, GroupAction::left_translation(&g), &t).unwrap().0
    }

    #[test]
    fn half_half_example() {
        let t = Tolerance::default();
        let sys = trivial_group_system(vec![CMatrix::from_element(1, 1, real(0.5)); 2]);
        let hd = build_hilbert_dilation(&sys, &t).unwrap();
        assert_eq!(hd.k_dim(), 2);
        let r = 0.5f64.sqrt();
        assert!(hd.v().iter().all(|z| (z.norm() - r).abs() < 1e-15));
        let vh = hd.v().adjoint();
        let first = &vh * hd.pi(AtomSet::singleton(0)) * hd.v();
        assert!((first[(0, 0)] - real(0.5)).norm() < 1e-15);
        let checks = verify_hilbert_dilation(&hd, &sys, &t);
        assert_eq!(checks.len(), 7);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn spectral_input_gives_a_unitary_v() {
        let t = Tolerance::default();
        let p = |k: usize| {
            let mut m = CMatrix::zeros(2, 2);
            m[(k, k)] = ONE;
            m
        };
        let sys = trivial_group_system(vec![p(0), p(1)]);
        let hd = build_hilbert_dilation(&sys, &t).unwrap();
        assert_eq!(hd.k_dim(), 2);
        assert!(max_abs_diff(&(hd.v().adjoint() * hd.v()), &CMatrix::identity(2, 2)) < 1e-12);
        assert!(max_abs_diff(&(hd.v() * hd.v().adjoint()), &CMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn bessel_lift_swaps_blocks() {
        let t = Tolerance::default();
        let sys = z2_bessel();
        let hd = build_hilbert_dilation(&sys, &t).unwrap();
        let u = hd.utilde(1);
        assert!(u[(0, 0)].norm() < 1e-12 && u[(1, 1)].norm() < 1e-12);
        assert!((u[(0, 1)].norm() - 1.0).abs() < 1e-12 && (u[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(&(u * hd.v()), &(hd.v() * sys.rep().matrix(1))) < 1e-12);
        assert!(verify_hilbert_dilation(&hd, &sys, &t).iter().all(|c| c.pass));
    }

    #[test]
    fn uniform_split_of_the_identity() {
        let t = Tolerance::default();
        let m = 3;
        let atom = CMatrix::identity(2, 2) * real(1.0 / m as f64);
        let sys = trivial_group_system(vec![atom; m]);
        let hd = build_hilbert_dilation(&sys, &t).unwrap();
        assert_eq!(hd.k_dim(), 6);
        assert!(max_abs_diff(&(hd.v().adjoint() * hd.v()), &CMatrix::identity(2, 2)) < 1e-12);
        assert!(verify_hilbert_dilation(&hd, &sys, &t).iter().all(|c| c.pass));
    }

    #[test]
    fn rejects_non_positive_systems() {
        let t = Tolerance::default();
        let sys =
            trivial_group_system(vec![CMatrix::from_element(1, 1, real(1.0)), CMatrix::from_element(1, 1, real(-1.0))]);
        assert!(matches!(build_hilbert_dilation(&sys, &t), Err(HilbertError::NotPositive(_))));
    }

    #[test]
    fn gram_fidelity() {
        let t = Tolerance::default();
        let mut rng = crate::linalg::seeded_rng(3);
        let a = crate::linalg::random_matrix(&mut rng, 3, 2);
        let b = crate::linalg::random_matrix(&mut rng, 3, 3);
        let sys = trivial_group_system(vec![&a * a.adjoint(), &b * b.adjoint()]);
        let hd = build_hilbert_dilation(&sys, &t).unwrap();
        assert_eq!(hd.k_dim(), 5);
        for _ in 0..20 {
            let x = crate::linalg::random_vector(&mut rng, 3);
            let y = crate::linalg::random_vector(&mut rng, 3);
            for w in 0..2 {
                let set = AtomSet::singleton(w);
                let lhs = hd.class_coordinates(&y, set).adjoint() * hd.class_coordinates(&x, set);
                let rhs = y.adjoint() * sys.ovm().atom(w) * &x;
                assert!((lhs[(0, 0)] - rhs[(0, 0)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn injective_adapter_induces_the_euclidean_norm() {
        let t = Tolerance::default();
        let sys = trivial_group_system(vec![CMatrix::from_element(1, 1, real(0.5)); 2]);
        let hd = build_hilbert_dilation(&sys, &t).unwrap();
        let ds = hilbert_as_injective(&hd, &sys).unwrap();
        let (restricted, checks) = restrict_probability(&ds, &sys, &t).unwrap();
        assert!(checks.iter().all(|c| c.pass));
        let induced = induced_norm_from_injective(&restricted, &sys, &t).unwrap();
        assert!(induced.checks.iter().all(|c| c.pass));
        let alpha = DilationSpaceAlpha::new(sys.ovm(), &t).unwrap();
        let one = CVector::from_element(1, ONE);
        let d_of = |set| induced.d_norm(&alpha.coordinates(&make_phi_x_e(sys.ovm(), &one, set).unwrap()));
        assert!((d_of(AtomSet(3)) - 1.0).abs() < 1e-12);
        assert!((d_of(AtomSet(1)) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(d_of(AtomSet::EMPTY), 0.0);
    }
}
