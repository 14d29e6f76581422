//! Seeded generators for example scenarios and random covariant systems.
//!
//! Representations are built from generalized permutation matrices
//! (permutation representations, characters, signs, optionally twisted by
//! unimodular phases), so they are isometries for every ℓ^p norm.

use std::f64::consts::PI;

use clap::ValueEnum;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::algebra::{FiniteGroup, GroupAction, MeasurableSpace};
use crate::framing::{gen_p_frame_scenario, FramingError, FramingSystem};
use crate::linalg::{
    hermitian_eig, hilbert_outer, random_matrix, random_vector, seeded_rng, CMatrix, Norm, Tolerance, C64, ONE,
};
use crate::scenario::{
    matrix_spec, vector_spec, FramingSpec, GroupSpec, OvmSpec, ScenarioFile, SpaceSpec, ToleranceSpec, SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

impl From<FramingError> for GenError {
    fn from(e: FramingError) -> Self {
        GenError::InvalidParams(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Bessel-vector OVM of a unitary representation of ℤ_n.
    BesselCyclic,
    /// Single-window framing under cyclic shifts on ℓ^p(ℤ_n).
    FramingSingle,
    /// Multi-window framing under cyclic shifts on ℓ^p(ℤ_n).
    PFrameCyclic,
    /// Commuting projections summing to I (trivial group).
    SpectralRandom,
    /// Positive covariant OVM for ℤ_n acting on itself.
    PositiveRandom,
    /// Non-positive covariant OVM with a twisted (projective) representation.
    CovariantRandom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    /// Group order (cycle length).
    pub n: usize,
    /// Dimension of X; framing kinds require d = n.
    pub dim: Option<usize>,
    /// Number of windows for framings.
    pub r: usize,
    pub p: Norm,
    /// Number of atoms for kinds on a trivial group.
    pub m: Option<usize>,
}

impl Default for GenParams {
    fn default() -> Self {
        Self { n: 2, dim: None, r: 1, p: Norm::L2, m: None }
    }
}

/// Column i of the result is e_{perm[i]}.
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        m[(j, i)] = ONE;
    }
    m
}

/// Left regular representation W_g e_h = e_{gh}.
pub fn regular_rep(group: &FiniteGroup) -> Vec<CMatrix> {
    group
        .elements()
        .map(|g| permutation_matrix(&group.elements().map(|h| group.mul(g, h)).collect::<Vec<_>>()))
        .collect()
}

/// Diagonal characters of ℤ_n: W_k = diag(exp(2πi k f_i / n)).
pub fn character_rep(n: usize, freqs: &[usize]) -> Vec<CMatrix> {
    (0..n)
        .map(|k| {
            CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
                freqs.len(),
                freqs.iter().map(|&f| C64::from_polar(1.0, 2.0 * PI * ((k * f) % n) as f64 / n as f64)),
            ))
        })
        .collect()
}

pub fn direct_sum(a: &[CMatrix], b: &[CMatrix]) -> Vec<CMatrix> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let (p, q) = (x.nrows(), y.nrows());
            let mut m = CMatrix::zeros(p + q, p + q);
            m.view_mut((0, 0), (p, p)).copy_from(x);
            m.view_mut((p, p), (q, q)).copy_from(y);
            m
        })
        .collect()
}

/// Representation of ℤ_n on ℂ^d: the regular representation on the first n
/// coordinates when d ≥ n, random characters on the rest.
pub fn cyclic_rep<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<CMatrix> {
    let group = FiniteGroup::cyclic(n);
    let regular = if d >= n { n } else { 0 };
    let freqs: Vec<usize> = (0..d - regular).map(|_| rng.random_range(0..n)).collect();
    let chars = character_rep(n, &freqs);
    if regular == 0 {
        chars
    } else if freqs.is_empty() {
        regular_rep(&group)
    } else {
        direct_sum(&regular_rep(&group), &chars)
    }
}

/// S_3 on ℂ^d for d ≤ 4 from the permutation, sign and trivial representations.
pub fn s3_rep(d: usize) -> Result<Vec<CMatrix>, GenError> {
    let group = FiniteGroup::symmetric(3);
    let perm: Vec<CMatrix> =
        group.elements().map(|s| permutation_matrix(&FiniteGroup::symmetric_permutation(3, s))).collect();
    let sign: Vec<CMatrix> = perm.iter().map(|p| CMatrix::from_element(1, 1, p.determinant())).collect();
    let trivial = vec![CMatrix::identity(1, 1); group.order()];
    Ok(match d {
        1 => sign,
        2 => direct_sum(&trivial, &sign),
        3 => perm,
        4 => direct_sum(&perm, &sign),
        _ => return Err(GenError::InvalidParams(format!("S_3 representations are provided for d ≤ 4, got {d}"))),
    })
}

/// Twist W_g by unimodular phases c_g (c_e = 1): W′_g = c_g W_g is a projective
/// representation with multiplier ω(s,t) = c_s c_t / c_{st}.
pub fn twist<R: Rng + ?Sized>(group: &FiniteGroup, rep: &[CMatrix], rng: &mut R) -> (Vec<CMatrix>, Vec<Vec<C64>>) {
    let phases: Vec<C64> = group
        .elements()
        .map(|g| if g == group.identity() { ONE } else { C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)) })
        .collect();
    let mats = rep.iter().zip(&phases).map(|(w, &c)| w * c).collect();
    let omega = group
        .elements()
        .map(|s| group.elements().map(|t| phases[s] * phases[t] * phases[group.mul(s, t)].conj()).collect())
        .collect();
    (mats, omega)
}

/// Action of G on the left cosets gH of a subgroup H, cosets numbered by
/// their smallest element.
pub fn coset_action(group: &FiniteGroup, subgroup: &[usize]) -> Result<GroupAction, GenError> {
    let coset_of = |g: usize| {
        let mut c: Vec<usize> = subgroup.iter().map(|&h| group.mul(g, h)).collect();
        c.sort_unstable();
        c
    };
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    for g in group.elements() {
        let c = coset_of(g);
        if !cosets.contains(&c) {
            cosets.push(c);
        }
    }
    let index = |c: &Vec<usize>| cosets.iter().position(|x| x == c).expect("coset enumerated");
    let map: Vec<Vec<usize>> =
        group.elements().map(|s| cosets.iter().map(|c| index(&coset_of(group.mul(s, c[0])))).collect()).collect();
    let space = MeasurableSpace::new(cosets.len()).map_err(|e| GenError::InvalidParams(e.to_string()))?;
    crate::algebra::check_action(group, space, map).map_err(|e| GenError::InvalidParams(format!("not a subgroup: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CovariantOptions {
    /// Positive semidefinite atoms.
    pub positive: bool,
    /// Normalize so that φ(Ω) = I (implies positive).
    pub probability: bool,
}

/// Random atoms satisfying W_s φ({ω}) W_s⁻¹ = φ({s·ω}).
///
/// For each orbit, a random matrix is averaged over the stabilizer of a
/// representative ω₀ and transported along the orbit by conjugation; the
/// phases of a projective representation cancel in conjugation.
pub fn covariant_atoms<R: Rng + ?Sized>(
    group: &FiniteGroup,
    action: &GroupAction,
    rep: &[CMatrix],
    options: CovariantOptions,
    rng: &mut R,
) -> Vec<CMatrix> {
    let d = rep[0].nrows();
    let m = action.space().atom_count();
    let inverses: Vec<CMatrix> = rep.iter().map(|w| w.adjoint()).collect();
    let conj = |g: usize, a: &CMatrix| &rep[g] * a * &inverses[g];
    let positive = options.positive || options.probability;
    let mut atoms: Vec<Option<CMatrix>> = vec![None; m];
    for w0 in 0..m {
        if atoms[w0].is_some() {
            continue;
        }
        let b = if positive {
            let c = random_matrix(rng, d, d);
            &c * c.adjoint()
        } else {
            random_matrix(rng, d, d)
        };
        let stabilizer: Vec<usize> = group.elements().filter(|&h| action.act_point(h, w0) == w0).collect();
        let scale = C64::new(1.0 / stabilizer.len() as f64, 0.0);
        let a0 = stabilizer.iter().fold(CMatrix::zeros(d, d), |acc, &h| acc + conj(h, &b)) * scale;
        for g in group.elements() {
            let w = action.act_point(g, w0);
            if atoms[w].is_none() {
                atoms[w] = Some(conj(g, &a0));
            }
        }
    }
    let mut atoms: Vec<CMatrix> = atoms.into_iter().map(|a| a.expect("every atom lies in an orbit")).collect();
    if positive {
        for a in &mut atoms {
            *a = crate::linalg::hermitian_part(a);
        }
    }
    if options.probability {
        let total = atoms.iter().fold(CMatrix::zeros(d, d), |acc, a| acc + a);
        let eig = hermitian_eig(&total, &Tolerance::default()).expect("sum of PSD atoms is Hermitian");
        let inv_sqrt = &eig.vectors
            * CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
                d,
                eig.values.iter().map(|&l| C64::new(1.0 / l.max(f64::MIN_POSITIVE).sqrt(), 0.0)),
            ))
            * eig.vectors.adjoint();
        for a in &mut atoms {
            *a = crate::linalg::hermitian_part(&(&inv_sqrt * &*a * &inv_sqrt));
        }
    }
    atoms
}

/// Random unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    random_matrix(rng, d, d).qr().q()
}

fn group_spec(group: &FiniteGroup) -> GroupSpec {
    GroupSpec { order: group.order(), table: group.table().to_vec() }
}

fn base_file(name: String, group: &FiniteGroup, d: usize, norm: Norm, rep: &[CMatrix], seed: u64) -> ScenarioFile {
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        name: Some(name),
        tolerance: ToleranceSpec { seed, ..ToleranceSpec::default() },
        group: group_spec(group),
        multiplier: None,
        space: SpaceSpec { dim: d, norm: norm.into() },
        action: None,
        rep: rep.iter().map(matrix_spec).collect(),
        ovm: None,
        framing: None,
        tasks: Vec::new(),
    }
}

/// Serialize a framing system as a scenario.
pub fn framing_file(name: String, fs: &FramingSystem, seed: u64) -> ScenarioFile {
    let theta = fs.theta();
    let mut file = base_file(name, theta.group(), theta.dim(), theta.space().norm, theta.matrices(), seed);
    if !theta.multiplier().is_trivial(0.0) {
        file.multiplier =
            Some(theta.multiplier().table().iter().map(|row| row.iter().map(|&z| [z.re, z.im]).collect()).collect());
    }
    file.framing = Some(FramingSpec {
        windows: fs.windows().iter().map(vector_spec).collect(),
        duals: fs.duals().iter().map(vector_spec).collect(),
    });
    file.tasks = vec!["dilate-framing".into(), "dilate-banach".into()];
    file
}

fn require(cond: bool, message: impl FnOnce() -> String) -> Result<(), GenError> {
    if cond {
        Ok(())
    } else {
        Err(GenError::InvalidParams(message()))
    }
}

/// Generate a scenario of the given kind; deterministic for a fixed seed.
pub fn gen_example(kind: GenKind, params: &GenParams, seed: u64) -> Result<ScenarioFile, GenError> {
    let n = params.n;
    require(n >= 1, || "n must be at least 1".into())?;
    params.p.validate().map_err(|e| GenError::InvalidParams(e.to_string()))?;
    let tol = Tolerance::default();
    let mut rng = seeded_rng(seed);
    match kind {
        GenKind::FramingSingle | GenKind::PFrameCyclic => {
            let r = if kind == GenKind::FramingSingle { 1 } else { params.r };
            require(r >= 1, || "r must be at least 1".into())?;
            require(params.dim.is_none_or(|d| d == n), || format!("framings on ℓ^p(ℤ_n) need dim = n = {n}"))?;
            let fs = gen_p_frame_scenario(n, r, params.p, seed, &tol)?;
            let name = format!("{}_n{n}_r{r}_{}_s{seed}", kind_name(kind), params.p);
            Ok(framing_file(name, &fs, seed))
        }
        GenKind::BesselCyclic => {
            let d = params.dim.unwrap_or(n);
            require(d >= 1, || "dim must be at least 1".into())?;
            require(params.p.is_hilbert(), || "Bessel scenarios live on l2".into())?;
            let group = FiniteGroup::cyclic(n);
            let rep = cyclic_rep(n, d, &mut rng);
            let f = random_vector(&mut rng, d);
            let atoms: Vec<CMatrix> = rep.iter().map(|u| hilbert_outer(&(u * &f))).collect();
            let mut file = base_file(format!("bessel_cyclic_n{n}_d{d}_s{seed}"), &group, d, Norm::L2, &rep, seed);
            file.action = Some(GroupAction::left_translation(&group).table().to_vec());
            file.ovm = Some(OvmSpec { atoms: atoms.iter().map(matrix_spec).collect() });
            file.tasks = vec!["dilate-hilbert".into(), "dilate-banach".into()];
            Ok(file)
        }
        GenKind::SpectralRandom => {
            let m = params.m.unwrap_or(n);
            let d = params.dim.unwrap_or(m);
            require(m >= 1 && d >= 1, || "m and dim must be at least 1".into())?;
            require(m <= crate::algebra::MAX_ATOMS, || format!("at most {} atoms", crate::algebra::MAX_ATOMS))?;
            let group = FiniteGroup::trivial();
            let u = random_unitary(&mut rng, d);
            let mut owner: Vec<usize> = (0..d).map(|k| k % m).collect();
            owner.shuffle(&mut rng);
            let atoms: Vec<CMatrix> = (0..m)
                .map(|a| {
                    (0..d)
                        .filter(|&k| owner[k] == a)
                        .fold(CMatrix::zeros(d, d), |acc, k| acc + hilbert_outer(&u.column(k).into_owned()))
                })
                .collect();
            let mut file = base_file(
                format!("spectral_random_m{m}_d{d}_s{seed}"),
                &group,
                d,
                params.p,
                &[CMatrix::identity(d, d)],
                seed,
            );
            file.action = Some(vec![(0..m).collect()]);
            file.ovm = Some(OvmSpec { atoms: atoms.iter().map(matrix_spec).collect() });
            file.tasks = vec!["dilate-banach".into()];
            Ok(file)
        }
        GenKind::PositiveRandom | GenKind::CovariantRandom => {
            let d = params.dim.unwrap_or(n);
            require(d >= 1, || "dim must be at least 1".into())?;
            let group = FiniteGroup::cyclic(n);
            let action = GroupAction::left_translation(&group);
            let base = cyclic_rep(n, d, &mut rng);
            let (rep, multiplier, options, norm) = if kind == GenKind::PositiveRandom {
                (base, None, CovariantOptions { positive: true, probability: false }, Norm::L2)
            } else {
                let (rep, omega) = twist(&group, &base, &mut rng);
                (rep, Some(omega), CovariantOptions::default(), params.p)
            };
            let atoms = covariant_atoms(&group, &action, &rep, options, &mut rng);
            let mut file = base_file(format!("{}_n{n}_d{d}_s{seed}", kind_name(kind)), &group, d, norm, &rep, seed);
            file.multiplier =
                multiplier.map(|om| om.iter().map(|row| row.iter().map(|&z| [z.re, z.im]).collect()).collect());
            file.action = Some(action.table().to_vec());
            file.ovm = Some(OvmSpec { atoms: atoms.iter().map(matrix_spec).collect() });
            file.tasks = if kind == GenKind::PositiveRandom {
                vec!["dilate-hilbert".into(), "dilate-banach".into()]
            } else {
                vec!["dilate-banach".into()]
            };
            Ok(file)
        }
    }
}

pub fn kind_name(kind: GenKind) -> String {
    kind.to_possible_value().map(|v| v.get_name().replace('-', "_")).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_multiplier, Multiplier};
    use crate::imprimitivity::{check_rep, check_system};
    use crate::linalg::{max_abs_diff, NormedSpace};
    use crate::ovm::Ovm;
    use crate::scenario::{parse_scenario, to_json};

    #[test]
    fn s3_reps_are_representations() {
        let t = Tolerance::default();
        let g = FiniteGroup::symmetric(3);
        for d in 1..=4 {
            for norm in [Norm::L1, Norm::L2, Norm::LInf] {
                let space = NormedSpace::new(d, norm).unwrap();
                check_rep(&g, &Multiplier::trivial(6), space, s3_rep(d).unwrap(), &t).unwrap();
            }
        }
        assert!(s3_rep(5).is_err());
    }

    #[test]
    fn twisted_reps_carry_a_valid_multiplier() {
        let t = Tolerance::default();
        let mut rng = seeded_rng(4);
        let g = FiniteGroup::cyclic(4);
        let (rep, omega) = twist(&g, &cyclic_rep(4, 3, &mut rng), &mut rng);
        let omega = check_multiplier(&g, omega, 1e-12).unwrap();
        assert!(!omega.is_trivial(1e-6));
        check_rep(&g, &omega, NormedSpace::new(3, Norm::Lp(3.0)).unwrap(), rep, &t).unwrap();
    }

    #[test]
    fn coset_actions() {
        let z4 = FiniteGroup::cyclic(4);
        let a = coset_action(&z4, &[0, 2]).unwrap();
        assert_eq!(a.space().atom_count(), 2);
        assert_eq!(a.table()[1], vec![1, 0]);
        let s3 = FiniteGroup::symmetric(3);
        let h: Vec<usize> = s3.elements().filter(|&s| FiniteGroup::symmetric_permutation(3, s)[2] == 2).collect();
        assert_eq!(coset_action(&s3, &h).unwrap().space().atom_count(), 3);
    }

    #[test]
    fn covariant_atoms_are_covariant() {
        let t = Tolerance::default();
        let mut rng = seeded_rng(9);
        let g = FiniteGroup::symmetric(3);
        let h: Vec<usize> = g.elements().filter(|&s| FiniteGroup::symmetric_permutation(3, s)[0] == 0).collect();
        let action = coset_action(&g, &h).unwrap();
        let (rep, omega) = twist(&g, &s3_rep(4).unwrap(), &mut rng);
        let omega = check_multiplier(&g, omega, 1e-12).unwrap();
        let space = NormedSpace::new(4, Norm::L2).unwrap();
        for options in [
            CovariantOptions::default(),
            CovariantOptions { positive: true, probability: false },
            CovariantOptions { positive: true, probability: true },
        ] {
            let atoms = covariant_atoms(&g, &action, &rep, options, &mut rng);
            let ovm = Ovm::new(action.space(), space, atoms).unwrap();
            let (rep, _) = check_rep(&g, &omega, space, rep.clone(), &t).unwrap();
            let (_, report) = check_system(rep, ovm, action.clone(), &t).unwrap();
            assert_eq!(report.class.positive, options.positive);
            assert_eq!(report.class.probability, options.probability);
        }
    }

    #[test]
    fn every_kind_generates_a_loadable_scenario() {
        let cases = [
            (GenKind::BesselCyclic, GenParams { n: 3, dim: Some(3), ..Default::default() }),
            (GenKind::BesselCyclic, GenParams { n: 5, dim: Some(2), ..Default::default() }),
            (GenKind::FramingSingle, GenParams { n: 3, p: Norm::L1, ..Default::default() }),
            (GenKind::PFrameCyclic, GenParams { n: 4, r: 2, p: Norm::L1, ..Default::default() }),
            (GenKind::SpectralRandom, GenParams { n: 3, dim: Some(3), ..Default::default() }),
            (GenKind::PositiveRandom, GenParams { n: 3, dim: Some(2), ..Default::default() }),
            (GenKind::CovariantRandom, GenParams { n: 4, dim: Some(3), p: Norm::LInf, ..Default::default() }),
        ];
        for (kind, params) in cases {
            let file = gen_example(kind, &params, 1).unwrap();
            assert_eq!(gen_example(kind, &params, 1).unwrap(), file, "{kind:?} is not deterministic");
            let loaded = parse_scenario(&to_json(&file)).unwrap();
            assert_eq!(loaded.file, file, "{kind:?} does not round-trip");
        }
    }

    #[test]
    fn spectral_random_atoms_are_projections() {
        let file =
            gen_example(GenKind::SpectralRandom, &GenParams { n: 3, dim: Some(3), ..Default::default() }, 2).unwrap();
        let s = parse_scenario(&to_json(&file)).unwrap();
        let crate::scenario::Payload::Ovm { atoms } = s.payload else { panic!("ovm payload") };
        let total = atoms.iter().fold(CMatrix::zeros(3, 3), |acc, a| acc + a);
        assert!(max_abs_diff(&total, &CMatrix::identity(3, 3)) < 1e-12);
        for a in &atoms {
            assert!(max_abs_diff(&(a * a), a) < 1e-12);
        }
    }

    #[test]
    fn bad_params_are_rejected() {
        let bad = GenParams { n: 4, dim: Some(3), ..Default::default() };
        assert!(gen_example(GenKind::PFrameCyclic, &bad, 0).is_err());
        assert!(gen_example(GenKind::BesselCyclic, &GenParams { n: 0, ..Default::default() }, 0).is_err());
        assert!(gen_example(GenKind::BesselCyclic, &GenParams { p: Norm::L1, ..Default::default() }, 0).is_err());
    }
}
