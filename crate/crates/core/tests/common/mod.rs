//! Seeded random systems of imprimitivity shared by the integration suites.

#![allow(dead_code)]

use dilatekit::algebra::{check_multiplier, FiniteGroup, GroupAction, MeasurableSpace, Multiplier};
use dilatekit::generate::{coset_action, covariant_atoms, cyclic_rep, s3_rep, twist, CovariantOptions};
use dilatekit::imprimitivity::{check_rep, check_system, ImprimitivitySystem};
use dilatekit::linalg::{seeded_rng, CMatrix, Norm, NormedSpace, Tolerance};
use dilatekit::ovm::Ovm;
use rand::Rng;

/// Groups used by the random suites: ℤ_2, ℤ_3, ℤ_4 and S_3.
pub fn group(index: usize) -> FiniteGroup {
    match index % 4 {
        0 => FiniteGroup::cyclic(2),
        1 => FiniteGroup::cyclic(3),
        2 => FiniteGroup::cyclic(4),
        _ => FiniteGroup::symmetric(3),
    }
}

/// An action of `group` on at most `max_atoms` atoms: left translation,
/// a coset action, or the trivial action.
pub fn action<R: Rng>(group: &FiniteGroup, max_atoms: usize, rng: &mut R) -> GroupAction {
    let n = group.order();
    let mut options: Vec<GroupAction> = Vec::new();
    if n <= max_atoms {
        options.push(GroupAction::left_translation(group));
    }
    if n == 4 {
        options.push(coset_action(group, &[0, 2]).unwrap());
    }
    if n == 6 {
        // Point stabilizer (3 cosets) and the alternating subgroup (2 cosets).
        let fixes_0: Vec<usize> =
            group.elements().filter(|&s| FiniteGroup::symmetric_permutation(3, s)[0] == 0).collect();
        options.push(coset_action(group, &fixes_0).unwrap());
        let even: Vec<usize> = group
            .elements()
            .filter(|&s| {
                let p = FiniteGroup::symmetric_permutation(3, s);
                (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count() % 2 == 0
            })
            .collect();
        options.push(coset_action(group, &even).unwrap());
    }
    let m = rng.random_range(1..=max_atoms.min(3));
    options.push(GroupAction::trivial(group, MeasurableSpace::new(m).unwrap()));
    options.swap_remove(rng.random_range(0..options.len()))
}

pub struct RandomSystem {
    pub system: ImprimitivitySystem,
    pub options: CovariantOptions,
    pub twisted: bool,
}

/// A covariant system with d ≤ 4 and m ≤ 5 built from `seed`.
pub fn random_system(seed: u64, options: CovariantOptions, norm: Norm) -> RandomSystem {
    let tol = Tolerance::default();
    let mut rng = seeded_rng(seed);
    let group = group(rng.random_range(0..4));
    let n = group.order();
    let d = rng.random_range(1..=4);
    let base = if n == 6 { s3_rep(d).unwrap() } else { cyclic_rep(n, d, &mut rng) };
    let twisted = rng.random_bool(0.5);
    let (rep, multiplier) = if twisted {
        let (rep, omega) = twist(&group, &base, &mut rng);
        (rep, check_multiplier(&group, omega, 1e-12).unwrap())
    } else {
        (base, Multiplier::trivial(n))
    };
    let action = action(&group, 5, &mut rng);
    let atoms = covariant_atoms(&group, &action, &rep, options, &mut rng);
    let space = NormedSpace::new(d, norm).unwrap();
    let (rep, _) = check_rep(&group, &multiplier, space, rep, &tol).unwrap();
    let ovm = Ovm::new(action.space(), space, atoms).unwrap();
    let (system, _) = check_system(rep, ovm, action, &tol).unwrap();
    RandomSystem { system, options, twisted }
}

pub fn norm_for(index: usize) -> Norm {
    [Norm::L1, Norm::L2, Norm::LInf, Norm::Lp(3.0)][index % 4]
}

/// All sets E ⊆ Ω.
pub fn all_sets(space: MeasurableSpace) -> Vec<dilatekit::algebra::AtomSet> {
    space.subsets().collect()
}

pub fn is_hermitian(m: &CMatrix, eps: f64) -> bool {
    dilatekit::linalg::max_abs_diff(m, &m.adjoint()) <= eps
}

/// Validate a scenario file all the way to a system of imprimitivity; framing
/// payloads become their induced OVM under left translation.
pub fn system_from_file(
    file: &dilatekit::scenario::ScenarioFile,
) -> (ImprimitivitySystem, Option<dilatekit::framing::FramingSystem>) {
    use dilatekit::scenario::{parse_scenario, to_json, Payload};
    let s = parse_scenario(&to_json(file)).unwrap();
    let tol = s.tolerance;
    let group = dilatekit::algebra::check_group(s.table.clone()).unwrap();
    let multiplier = match &s.multiplier {
        Some(m) => check_multiplier(&group, m.clone(), tol.eps_residual).unwrap(),
        None => Multiplier::trivial(group.order()),
    };
    let (rep, _) = check_rep(&group, &multiplier, s.space, s.rep.clone(), &tol).unwrap();
    match &s.payload {
        Payload::Ovm { atoms } => {
            let space = MeasurableSpace::new(atoms.len()).unwrap();
            let action = dilatekit::algebra::check_action(&group, space, s.action.clone().unwrap()).unwrap();
            let ovm = Ovm::new(space, s.space, atoms.clone()).unwrap();
            (check_system(rep, ovm, action, &tol).unwrap().0, None)
        }
        Payload::Framing { windows, duals } => {
            let fs = dilatekit::framing::FramingSystem::new(rep.clone(), windows.clone(), duals.clone()).unwrap();
            let ovm = dilatekit::ovm::framing_ovm(&rep, windows, duals).unwrap();
            let action = GroupAction::left_translation(&group);
            (check_system(rep, ovm, action, &tol).unwrap().0, Some(fs))
        }
    }
}

pub fn shipped(name: &str) -> dilatekit::scenario::ScenarioFile {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    dilatekit::scenario::load_scenario(&path).unwrap().file
}
