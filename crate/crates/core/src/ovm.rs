//! Operator-valued measures on a finite Ω, stored by their atom values.

use crate::algebra::{AtomSet, MeasurableSpace};
use crate::imprimitivity::ProjectiveRep;
use crate::linalg::{
    bilinear_outer, hermitian_eig, hilbert_outer, is_finite, is_isometry, max_abs, max_abs_diff, CMatrix, CVector,
    Norm, NormedSpace, Tolerance,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OvmError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("atom {0} has a non-finite entry")]
    NonFinite(usize),
    #[error("construction needs a Hilbert (l2) space, got {0}")]
    NonHilbertNorm(Norm),
    #[error("representation is not unitary at element {0}")]
    NonUnitaryRep(usize),
    #[error("{windows} windows but {duals} dual functionals")]
    WindowCountMismatch { windows: usize, duals: usize },
    #[error("semigroup element {0} has no inverse")]
    NotAGroup(usize),
}

/// B(X)-valued measure φ with φ(E) = Σ_{ω∈E} atoms[ω].
#[derive(Debug, Clone, PartialEq)]
pub struct Ovm {
    space: MeasurableSpace,
    target: NormedSpace,
    atoms: Vec<CMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OvmClass {
    pub probability: bool,
    pub positive: bool,
    pub spectral: bool,
    /// Always equal to `spectral`: idempotent-valued and multiplicative
    /// measures are the same thing.
    pub projection_valued: bool,
}

impl Ovm {
    pub fn new(space: MeasurableSpace, target: NormedSpace, atoms: Vec<CMatrix>) -> Result<Self, OvmError> {
        if atoms.len() != space.atom_count() {
            return Err(OvmError::Shape(format!("{} atom matrices for {} atoms", atoms.len(), space.atom_count())));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.shape() != (target.dim, target.dim) {
                return Err(OvmError::Shape(format!(
                    "atom {i} is {}x{}, expected d={}",
                    a.nrows(),
                    a.ncols(),
                    target.dim
                )));
            }
            if !is_finite(a) {
                return Err(OvmError::NonFinite(i));
            }
        }
        Ok(Self { space, target, atoms })
    }

    pub fn space(&self) -> MeasurableSpace {
        self.space
    }

    pub fn target(&self) -> NormedSpace {
        self.target
    }

    pub fn dim(&self) -> usize {
        self.target.dim
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[CMatrix] {
        &self.atoms
    }

    pub fn atom(&self, w: usize) -> &CMatrix {
        &self.atoms[w]
    }

    /// φ(E), summed over the atoms of E in increasing order.
    pub fn evaluate(&self, set: AtomSet) -> CMatrix {
        let d = self.dim();
        set.atoms().fold(CMatrix::zeros(d, d), |acc, w| acc + &self.atoms[w])
    }

    pub fn total(&self) -> CMatrix {
        self.evaluate(self.space.full())
    }

    /// Classify at atom level: positivity and spectrality over all sets
    /// follow from the atom conditions by additivity.
    pub fn classify(&self, tol: &Tolerance) -> OvmClass {
        let eps = tol.eps_residual;
        let d = self.dim();
        let probability = max_abs_diff(&self.total(), &CMatrix::identity(d, d)) <= eps;
        let positive = self
            .atoms
            .iter()
            .all(|a| hermitian_eig(a, tol).map(|e| e.values.last().is_none_or(|&low| low >= -eps)).unwrap_or(false));
        let spectral = self.atoms.iter().enumerate().all(|(i, a)| {
            self.atoms.iter().enumerate().all(|(j, b)| {
                let prod = a * b;
                if i == j {
                    max_abs_diff(&prod, a) <= eps
                } else {
                    max_abs(&prod) <= eps
                }
            })
        });
        OvmClass { probability, positive, spectral, projection_valued: spectral }
    }
}

/// The positive OVM of a Bessel vector: atoms[g] = (U_g f)(U_g f)* on Ω = G.
pub fn bessel_ovm(rep: &ProjectiveRep, f: &CVector, tol: &Tolerance) -> Result<Ovm, OvmError> {
    let space = rep.space();
    if !space.norm.is_hilbert() {
        return Err(OvmError::NonHilbertNorm(space.norm));
    }
    if f.len() != space.dim {
        return Err(OvmError::Shape(format!("vector of length {} in dimension {}", f.len(), space.dim)));
    }
    let mut atoms = Vec::with_capacity(rep.group().order());
    for (g, u) in rep.matrices().iter().enumerate() {
        if !is_isometry(u, Norm::L2, tol).is_isometry {
            return Err(OvmError::NonUnitaryRep(g));
        }
        atoms.push(hilbert_outer(&(u * f)));
    }
    let omega = MeasurableSpace::new(atoms.len()).map_err(|e| OvmError::Shape(e.to_string()))?;
    Ovm::new(omega, space, atoms)
}

/// The OVM induced by a θ-orbit framing on Ω = G:
/// atoms[g] = Σ_j (θ_g x_j) ⊗ (θ*_{g⁻¹} x*_j), with the bilinear rank-one
/// operator u ⊗ f : x ↦ ⟨x, f⟩ u.
pub fn framing_ovm(theta: &ProjectiveRep, windows: &[CVector], duals: &[CVector]) -> Result<Ovm, OvmError> {
    if windows.len() != duals.len() {
        return Err(OvmError::WindowCountMismatch { windows: windows.len(), duals: duals.len() });
    }
    let space = theta.space();
    let d = space.dim;
    if let Some(j) = windows.iter().chain(duals).position(|v| v.len() != d) {
        return Err(OvmError::Shape(format!("window/dual {j} has wrong length")));
    }
    let group = theta.group();
    let mut atoms = Vec::with_capacity(group.order());
    for g in group.elements() {
        let g_inv = group.inverse(g).ok_or(OvmError::NotAGroup(g))?;
        let th = theta.matrix(g);
        let th_inv_t = theta.matrix(g_inv).transpose();
        let atom = windows
            .iter()
            .zip(duals)
            .fold(CMatrix::zeros(d, d), |acc, (x, f)| acc + bilinear_outer(&(th * x), &(&th_inv_t * f)));
        atoms.push(atom);
    }
    let omega = MeasurableSpace::new(atoms.len()).map_err(|e| OvmError::Shape(e.to_string()))?;
    Ovm::new(omega, space, atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FiniteGroup, Multiplier};
    use crate::imprimitivity::check_rep;
    use crate::linalg::{C64, ONE, ZERO};

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, C64::new(x, 0.0))
    }

    fn diag(a: f64, b: f64) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(a, 0.0), C64::new(b, 0.0)]))
    }

    fn swap() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn scalar_ovm(values: &[f64]) -> Ovm {
        Ovm::new(
            MeasurableSpace::new(values.len()).unwrap(),
            NormedSpace::new(1, Norm::L2).unwrap(),
            values.iter().map(|&v| scalar(v)).collect(),
        )
        .unwrap()
    }

    fn z2_swap_rep(norm: Norm) -> ProjectiveRep {
        let g = FiniteGroup::cyclic(2);
        let space = NormedSpace::new(2, norm).unwrap();
        check_rep(&g, &Multiplier::trivial(2), space, vec![CMatrix::identity(2, 2), swap()], &Tolerance::default())
            .unwrap()
            .0
    }

    #[test]
    fn evaluate_examples() {
        let space = MeasurableSpace::new(2).unwrap();
        let target = NormedSpace::new(2, Norm::L2).unwrap();
        let ovm = Ovm::new(space, target, vec![diag(1.0, 0.0), diag(0.0, 1.0)]).unwrap();
        assert_eq!(ovm.evaluate(space.full()), CMatrix::identity(2, 2));
        assert_eq!(ovm.evaluate(AtomSet::singleton(0)), diag(1.0, 0.0));
        assert_eq!(ovm.evaluate(AtomSet::EMPTY), CMatrix::zeros(2, 2));
        assert_eq!(scalar_ovm(&[0.5, 0.5]).total(), scalar(1.0));
    }

    #[test]
    fn classify_examples() {
        let t = Tolerance::default();
        let space = MeasurableSpace::new(2).unwrap();
        let target = NormedSpace::new(2, Norm::L2).unwrap();
        let pvm = Ovm::new(space, target, vec![diag(1.0, 0.0), diag(0.0, 1.0)]).unwrap();
        let c = pvm.classify(&t);
        assert!(c.probability && c.positive && c.spectral && c.projection_valued);

        let c = scalar_ovm(&[0.5, 0.5]).classify(&t);
        assert!(c.probability && c.positive && !c.spectral);

        let c = scalar_ovm(&[1.0, -1.0]).classify(&t);
        assert!(!c.probability && !c.positive && !c.spectral);
    }

    #[test]
    fn non_hermitian_atoms_are_not_positive() {
        let space = MeasurableSpace::new(1).unwrap();
        let target = NormedSpace::new(2, Norm::L2).unwrap();
        let a = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        let ovm = Ovm::new(space, target, vec![a]).unwrap();
        assert!(!ovm.classify(&Tolerance::default()).positive);
    }

    #[test]
    fn rejects_bad_shapes() {
        let space = MeasurableSpace::new(2).unwrap();
        let target = NormedSpace::new(2, Norm::L2).unwrap();
        assert!(matches!(Ovm::new(space, target, vec![diag(1.0, 0.0)]), Err(OvmError::Shape(_))));
        let bad = CMatrix::from_element(2, 2, C64::new(f64::INFINITY, 0.0));
        assert_eq!(Ovm::new(space, target, vec![diag(1.0, 0.0), bad]), Err(OvmError::NonFinite(1)));
    }

    #[test]
    fn bessel_ovm_examples() {
        let t = Tolerance::default();
        let rep = z2_swap_rep(Norm::L2);
        let f = CVector::from_vec(vec![ONE, ZERO]);
        let ovm = bessel_ovm(&rep, &f, &t).unwrap();
        assert_eq!(ovm.atom(0), &diag(1.0, 0.0));
        assert_eq!(ovm.atom(1), &diag(0.0, 1.0));
        let c = ovm.classify(&t);
        assert!(c.probability && c.spectral);

        let zero = bessel_ovm(&rep, &CVector::zeros(2), &t).unwrap();
        let c = zero.classify(&t);
        assert!(c.positive && !c.probability);

        let z3 = FiniteGroup::cyclic(3);
        let shift = |k: usize| CMatrix::from_fn(3, 3, |i, j| if i == (j + k) % 3 { ONE } else { ZERO });
        let rep3 = check_rep(
            &z3,
            &Multiplier::trivial(3),
            NormedSpace::new(3, Norm::L2).unwrap(),
            (0..3).map(shift).collect(),
            &t,
        )
        .unwrap()
        .0;
        let e0 = CVector::from_vec(vec![ONE, ZERO, ZERO]);
        let ovm = bessel_ovm(&rep3, &e0, &t).unwrap();
        for g in 0..3 {
            let mut p = CMatrix::zeros(3, 3);
            p[(g, g)] = ONE;
            assert_eq!(ovm.atom(g), &p);
        }
        assert_eq!(ovm.total(), CMatrix::identity(3, 3));
    }

    #[test]
    fn bessel_ovm_rejects_banach_spaces() {
        let rep = z2_swap_rep(Norm::L1);
        let f = CVector::from_vec(vec![ONE, ZERO]);
        assert_eq!(bessel_ovm(&rep, &f, &Tolerance::default()), Err(OvmError::NonHilbertNorm(Norm::L1)));
    }

    #[test]
    fn framing_ovm_examples() {
        let t = Tolerance::default();
        let z2 = FiniteGroup::cyclic(2);
        let trivial = check_rep(
            &z2,
            &Multiplier::trivial(2),
            NormedSpace::new(1, Norm::L2).unwrap(),
            vec![scalar(1.0), scalar(1.0)],
            &t,
        )
        .unwrap()
        .0;
        let one = CVector::from_element(1, ONE);
        let half = CVector::from_element(1, C64::new(0.5, 0.0));
        let ovm = framing_ovm(&trivial, std::slice::from_ref(&one), &[half]).unwrap();
        assert_eq!(ovm.atoms(), &[scalar(0.5), scalar(0.5)]);
        assert!(ovm.classify(&t).probability);

        let rep = z2_swap_rep(Norm::L2);
        let e0 = CVector::from_vec(vec![ONE, ZERO]);
        let ovm = framing_ovm(&rep, std::slice::from_ref(&e0), std::slice::from_ref(&e0)).unwrap();
        assert_eq!(ovm.atoms(), &[diag(1.0, 0.0), diag(0.0, 1.0)]);

        let ovm = framing_ovm(&rep, std::slice::from_ref(&e0), &[CVector::zeros(2)]).unwrap();
        assert!(!ovm.classify(&t).probability);
        assert!(ovm.atoms().iter().all(|a| max_abs(a) == 0.0));

        assert_eq!(
            framing_ovm(&rep, &[e0.clone(), e0], &[CVector::zeros(2)]),
            Err(OvmError::WindowCountMismatch { windows: 2, duals: 1 })
        );
    }
}
