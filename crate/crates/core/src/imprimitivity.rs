//! Projective isometric representations and systems of imprimitivity.

use crate::algebra::{AtomSet, FiniteGroup, GroupAction, Multiplier};
use crate::linalg::{is_finite, is_isometry, max_abs_diff, CMatrix, IsometryWitness, NormedSpace, Tolerance};
use crate::ovm::{Ovm, OvmClass};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImprimitivityError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("W_e differs from the identity (residual {residual:e})")]
    UnitViolation { residual: f64 },
    #[error("W_{s} W_{t} != omega({s},{t}) W_{s}{t} (residual {residual:e})")]
    MultiplierRelationViolation { s: usize, t: usize, residual: f64 },
    #[error("W_{s} is not an isometry (residual {residual:e})")]
    NotIsometry { s: usize, residual: f64, witness: Option<IsometryWitness> },
    #[error("W_{s} phi({{{atom}}}) != phi(s.{{{atom}}}) W_{s} (residual {residual:e})")]
    CovarianceViolation { s: usize, atom: usize, residual: f64 },
}

/// A validated projective isometric representation W_s W_t = ω(s,t) W_{st}.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveRep {
    group: FiniteGroup,
    multiplier: Multiplier,
    space: NormedSpace,
    matrices: Vec<CMatrix>,
}

/// Largest residual observed for each representation axiom.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RepReport {
    pub unit_residual: f64,
    pub relation_residual: f64,
    pub isometry_residual: f64,
}

impl ProjectiveRep {
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn multiplier(&self) -> &Multiplier {
        &self.multiplier
    }

    pub fn space(&self) -> NormedSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, s: usize) -> &CMatrix {
        &self.matrices[s]
    }
}

/// Validate the unit axiom, the multiplier relation over all pairs, and the
/// isometry of every W_s, in that order.
pub fn check_rep(
    group: &FiniteGroup,
    multiplier: &Multiplier,
    space: NormedSpace,
    matrices: Vec<CMatrix>,
    tol: &Tolerance,
) -> Result<(ProjectiveRep, RepReport), ImprimitivityError> {
    let n = group.order();
    let d = space.dim;
    if matrices.len() != n {
        return Err(ImprimitivityError::ShapeMismatch(format!("{} matrices for a group of order {n}", matrices.len())));
    }
    if multiplier.table().len() != n {
        return Err(ImprimitivityError::ShapeMismatch("multiplier table does not match the group".into()));
    }
    if let Some(s) = matrices.iter().position(|m| m.shape() != (d, d) || !is_finite(m)) {
        return Err(ImprimitivityError::ShapeMismatch(format!("W_{s} is not a finite {d}x{d} matrix")));
    }
    let eps = tol.eps_residual;
    let mut report = RepReport {
        unit_residual: max_abs_diff(&matrices[group.identity()], &CMatrix::identity(d, d)),
        ..RepReport::default()
    };
    if report.unit_residual > eps {
        return Err(ImprimitivityError::UnitViolation { residual: report.unit_residual });
    }
    for s in 0..n {
        for t in 0..n {
            let lhs = &matrices[s] * &matrices[t];
            let rhs = &matrices[group.mul(s, t)] * multiplier.get(s, t);
            let residual = max_abs_diff(&lhs, &rhs);
            report.relation_residual = report.relation_residual.max(residual);
            if residual > eps {
                return Err(ImprimitivityError::MultiplierRelationViolation { s, t, residual });
            }
        }
    }
    for (s, m) in matrices.iter().enumerate() {
        let check = is_isometry(m, space.norm, tol);
        report.isometry_residual = report.isometry_residual.max(check.residual);
        if !check.is_isometry {
            return Err(ImprimitivityError::NotIsometry { s, residual: check.residual, witness: check.witness });
        }
    }
    let rep = ProjectiveRep { group: group.clone(), multiplier: multiplier.clone(), space, matrices };
    Ok((rep, report))
}

/// A covariant triple (W, φ, action): W_s φ(E) = φ(s·E) W_s.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprimitivitySystem {
    rep: ProjectiveRep,
    ovm: Ovm,
    action: GroupAction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemReport {
    /// covariance[s][ω] = ‖W_s φ({ω}) − φ({s·ω}) W_s‖.
    pub covariance: Vec<Vec<f64>>,
    pub max_covariance_residual: f64,
    pub class: OvmClass,
}

impl SystemReport {
    /// Positive systems are the input of the Hilbert-space dilation.
    pub fn is_positive(&self) -> bool {
        self.class.positive
    }

    pub fn is_spectral(&self) -> bool {
        self.class.spectral
    }
}

impl ImprimitivitySystem {
    pub fn rep(&self) -> &ProjectiveRep {
        &self.rep
    }

    pub fn ovm(&self) -> &Ovm {
        &self.ovm
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn group(&self) -> &FiniteGroup {
        self.rep.group()
    }

    /// ‖W_s φ(E) − φ(s·E) W_s‖ for an arbitrary set E.
    pub fn covariance_residual(&self, s: usize, set: AtomSet) -> f64 {
        let w = self.rep.matrix(s);
        let lhs = w * self.ovm.evaluate(set);
        let rhs = self.ovm.evaluate(self.action.act_on_set(s, set)) * w;
        max_abs_diff(&lhs, &rhs)
    }
}

/// Validate compatibility of the three components and covariance on every
/// (s, atom) pair; atoms suffice because both sides are additive in E.
pub fn check_system(
    rep: ProjectiveRep,
    ovm: Ovm,
    action: GroupAction,
    tol: &Tolerance,
) -> Result<(ImprimitivitySystem, SystemReport), ImprimitivityError> {
    if action.table().len() != rep.group().order() {
        return Err(ImprimitivityError::ShapeMismatch("action and representation use different groups".into()));
    }
    if action.space() != ovm.space() {
        return Err(ImprimitivityError::ShapeMismatch(format!(
            "action acts on {} atoms, OVM has {}",
            action.space().atom_count(),
            ovm.atom_count()
        )));
    }
    if rep.space() != ovm.target() {
        return Err(ImprimitivityError::ShapeMismatch("representation and OVM act on different spaces".into()));
    }
    let system = ImprimitivitySystem { rep, ovm, action };
    let m = system.ovm.atom_count();
    let covariance: Vec<Vec<f64>> = system
        .group()
        .elements()
        .map(|s| (0..m).map(|w| system.covariance_residual(s, AtomSet::singleton(w))).collect())
        .collect();
    let mut worst = (0, 0, 0.0f64);
    for (s, row) in covariance.iter().enumerate() {
        for (w, &r) in row.iter().enumerate() {
            if r > worst.2 {
                worst = (s, w, r);
            }
        }
    }
    if worst.2 > tol.eps_residual {
        return Err(ImprimitivityError::CovarianceViolation { s: worst.0, atom: worst.1, residual: worst.2 });
    }
    let class = system.ovm.classify(tol);
    let report = SystemReport { covariance, max_covariance_residual: worst.2, class };
    Ok((system, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_multiplier, MeasurableSpace};
    use crate::linalg::{CVector, Norm, C64, ONE, ZERO};
    use crate::ovm::bessel_ovm;

    fn swap() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn l2(d: usize) -> NormedSpace {
        NormedSpace::new(d, Norm::L2).unwrap()
    }

    fn z2_swap() -> ProjectiveRep {
        let g = FiniteGroup::cyclic(2);
        check_rep(&g, &Multiplier::trivial(2), l2(2), vec![CMatrix::identity(2, 2), swap()], &Tolerance::default())
            .unwrap()
            .0
    }

    #[test]
    fn check_rep_examples() {
        let t = Tolerance::default();
        let g = FiniteGroup::cyclic(3);
        let (_, report) = check_rep(&g, &Multiplier::trivial(3), l2(2), vec![CMatrix::identity(2, 2); 3], &t).unwrap();
        assert_eq!(report, RepReport::default());
        z2_swap();

        let z2 = FiniteGroup::cyclic(2);
        let minus = C64::new(-1.0, 0.0);
        let omega = check_multiplier(&z2, vec![vec![ONE, ONE], vec![ONE, minus]], 1e-12).unwrap();
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, minus]));
        let err = check_rep(&z2, &omega, l2(2), vec![CMatrix::identity(2, 2), d], &t).unwrap_err();
        assert!(
            matches!(err, ImprimitivityError::MultiplierRelationViolation { s: 1, t: 1, residual } if residual == 2.0)
        );
    }

    #[test]
    fn check_rep_failures() {
        let t = Tolerance::default();
        let z2 = FiniteGroup::cyclic(2);
        let half = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        let err = check_rep(&z2, &Multiplier::trivial(2), l2(2), vec![half, swap()], &t).unwrap_err();
        assert!(matches!(err, ImprimitivityError::UnitViolation { .. }));

        // A symmetric non-unitary involution satisfies the relation but not isometry.
        let c = C64::new(2.0f64.sqrt(), 0.0);
        let j = CMatrix::from_row_slice(2, 2, &[c, ONE, -ONE, -c]);
        assert!(max_abs_diff(&(&j * &j), &CMatrix::identity(2, 2)) < 1e-12);
        let err = check_rep(&z2, &Multiplier::trivial(2), l2(2), vec![CMatrix::identity(2, 2), j], &t).unwrap_err();
        assert!(matches!(err, ImprimitivityError::NotIsometry { s: 1, .. }));

        let err = check_rep(&z2, &Multiplier::trivial(2), l2(2), vec![CMatrix::identity(2, 2)], &t).unwrap_err();
        assert!(matches!(err, ImprimitivityError::ShapeMismatch(_)));
    }

    #[test]
    fn swap_is_isometric_for_every_norm() {
        let z2 = FiniteGroup::cyclic(2);
        for norm in [Norm::L1, Norm::LInf, Norm::Lp(3.0)] {
            let space = NormedSpace::new(2, norm).unwrap();
            check_rep(
                &z2,
                &Multiplier::trivial(2),
                space,
                vec![CMatrix::identity(2, 2), swap()],
                &Tolerance::default(),
            )
            .unwrap();
        }
    }

    #[test]
    fn check_system_examples() {
        let t = Tolerance::default();
        let rep = z2_swap();
        let f = CVector::from_vec(vec![ONE, ZERO]);
        let ovm = bessel_ovm(&rep, &f, &t).unwrap();
        let action = GroupAction::left_translation(rep.group());
        let (system, report) = check_system(rep.clone(), ovm.clone(), action.clone(), &t).unwrap();
        assert!(report.is_positive() && report.class.probability);
        for s in 0..2 {
            for set in ovm.space().subsets() {
                assert!(system.covariance_residual(s, set) <= 1e-12);
            }
        }

        let mut atoms = ovm.atoms().to_vec();
        atoms[1][(1, 1)] -= C64::new(0.5, 0.0);
        let perturbed = Ovm::new(ovm.space(), ovm.target(), atoms).unwrap();
        let err = check_system(rep, perturbed, action, &t).unwrap_err();
        match err {
            ImprimitivityError::CovarianceViolation { residual, .. } => assert!((residual - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trivial_group_systems_are_always_covariant() {
        let t = Tolerance::default();
        let g = FiniteGroup::trivial();
        let (rep, _) = check_rep(&g, &Multiplier::trivial(1), l2(2), vec![CMatrix::identity(2, 2)], &t).unwrap();
        let space = MeasurableSpace::new(3).unwrap();
        let atoms = vec![swap(), CMatrix::identity(2, 2), CMatrix::from_element(2, 2, C64::new(-3.0, 1.0))];
        let ovm = Ovm::new(space, l2(2), atoms).unwrap();
        let action = GroupAction::trivial(&g, space);
        let (_, report) = check_system(rep, ovm, action, &t).unwrap();
        assert!(!report.class.positive);
    }

    #[test]
    fn check_system_rejects_mismatched_components() {
        let t = Tolerance::default();
        let rep = z2_swap();
        let ovm = Ovm::new(MeasurableSpace::new(3).unwrap(), l2(2), vec![CMatrix::zeros(2, 2); 3]).unwrap();
        let action = GroupAction::left_translation(rep.group());
        assert!(matches!(check_system(rep, ovm, action, &t), Err(ImprimitivityError::ShapeMismatch(_))));
    }
}
