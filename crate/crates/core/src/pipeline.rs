//! Run validation and dilation constructions on a loaded scenario.
//!
//! Every failure — a broken axiom, a construction error, even a panic — is
//! turned into a named failed check, so a report is always produced.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use clap::ValueEnum;

use crate::algebra::{
    check_action, check_group, check_multiplier, FiniteGroup, GroupAction, MeasurableSpace, Multiplier,
};
use crate::banach::{build_minimal_dilation, induced_norm_from_injective, minimality_bound, verify_dilation};
use crate::check::Check;
use crate::framing::{build_dilated_basis, verify_dilated_basis, verify_framing, FramingError, FramingSystem};
use crate::hilbert::{build_hilbert_dilation, hilbert_as_injective, verify_hilbert_dilation};
use crate::imprimitivity::{check_rep, check_system, ImprimitivityError, ImprimitivitySystem, ProjectiveRep};
use crate::linalg::Tolerance;
use crate::ovm::{framing_ovm, Ovm};
use crate::report::Report;
use crate::scenario::{Payload, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check the algebraic and covariance axioms only.
    Validate,
    /// Minimal Banach-space dilation on the α-space of the OVM.
    DilateBanach,
    /// Hilbert-space dilation of a positive OVM.
    DilateHilbert,
    /// Dilated basis of a framing.
    DilateFraming,
    /// Every construction that applies to the scenario.
    All,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

/// Command-line overrides of the scenario tolerances.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub eps: Option<f64>,
    pub samples: Option<usize>,
    pub cap: Option<usize>,
    pub timing: bool,
}

impl Overrides {
    pub fn apply(&self, tol: &Tolerance) -> Tolerance {
        Tolerance {
            eps_residual: self.eps.unwrap_or(tol.eps_residual),
            sample_count: self.samples.unwrap_or(tol.sample_count),
            enum_cap: self.cap.unwrap_or(tol.enum_cap),
            ..*tol
        }
    }
}

/// Validated ingredients shared by all constructions.
struct Validated {
    system: ImprimitivitySystem,
    framing: Option<FramingSystem>,
    positive_hilbert: bool,
}

struct Run {
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Run {
    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }
}

/// Run `command` on `scenario`; never panics.
pub fn run_pipeline(scenario: &Scenario, command: Command, overrides: &Overrides) -> Report {
    let start = Instant::now();
    let tol = overrides.apply(&scenario.tolerance);
    let mut run = Run { checks: Vec::new(), notes: Vec::new() };
    let outcome = catch_unwind(AssertUnwindSafe(|| execute(scenario, command, &tol, &mut run)));
    if let Err(payload) = outcome {
        let msg = payload
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unknown panic".into());
        run.push(Check::failure("internal.panic", "the pipeline completes", msg));
    }
    let mut report =
        Report::new(&command.name(), scenario.name().map(str::to_string), scenario.digest(), run.checks, run.notes);
    if overrides.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    report
}

fn execute(scenario: &Scenario, command: Command, tol: &Tolerance, run: &mut Run) {
    let Some(v) = validate(scenario, tol, run) else {
        run.notes.push("constructions skipped: the scenario failed validation".into());
        return;
    };
    match command {
        Command::Validate => {}
        Command::DilateBanach => banach(&v, tol, run),
        Command::DilateHilbert => {
            if !v.positive_hilbert {
                run.push(Check::failure(
                    "hilbert.applicable",
                    "X is a Hilbert space and φ is positive",
                    "the Hilbert-space dilation needs an l2 norm and a positive OVM",
                ));
            } else {
                hilbert(&v, tol, run, false);
            }
        }
        Command::DilateFraming => match &v.framing {
            Some(fs) => framing(fs, tol, run),
            None => run.push(Check::failure(
                "framing.applicable",
                "the scenario carries a framing",
                "the scenario has an OVM payload, not a framing",
            )),
        },
        Command::All => {
            if let Some(fs) = &v.framing {
                framing(fs, tol, run);
            }
            banach(&v, tol, run);
            if v.positive_hilbert {
                hilbert(&v, tol, run, true);
            } else {
                run.notes.push("Hilbert-space dilation skipped: needs an l2 norm and a positive OVM".into());
            }
        }
    }
}

fn validate(scenario: &Scenario, tol: &Tolerance, run: &mut Run) -> Option<Validated> {
    let eps = tol.eps_residual;
    let group = match check_group(scenario.table.clone()) {
        Ok(g) => {
            run.push(Check::boolean("algebra.group", "the table defines a group", true));
            g
        }
        Err(e) => {
            run.push(Check::failure("algebra.group", "the table defines a group", e.to_string()));
            return None;
        }
    };
    let multiplier = match &scenario.multiplier {
        None => {
            run.push(
                Check::boolean("algebra.multiplier", "ω is a unimodular 2-cocycle", true)
                    .with_note("no multiplier given; using the trivial one"),
            );
            Multiplier::trivial(group.order())
        }
        Some(omega) => match check_multiplier(&group, omega.clone(), eps) {
            Ok(m) => {
                run.push(Check::boolean("algebra.multiplier", "ω is a unimodular 2-cocycle", true));
                m
            }
            Err(e) => {
                run.push(Check::failure("algebra.multiplier", "ω is a unimodular 2-cocycle", e.to_string()));
                return None;
            }
        },
    };
    let rep = representation(&group, &multiplier, scenario, tol, run)?;

    let (ovm, action, framing) = match &scenario.payload {
        Payload::Ovm { atoms } => {
            let Some(table) = &scenario.action else {
                run.push(Check::failure("algebra.action", "G acts on Ω", "no action given"));
                return None;
            };
            let action = action_check(&group, atoms.len(), table.clone(), run)?;
            let ovm = ovm_check(action.space(), scenario, atoms.clone(), run)?;
            (ovm, action, None)
        }
        Payload::Framing { windows, duals } => {
            let fs = match FramingSystem::new(rep.clone(), windows.clone(), duals.clone()) {
                Ok(fs) => fs,
                Err(e) => {
                    run.push(Check::failure("framing.shape", "windows and duals match X", e.to_string()));
                    return None;
                }
            };
            match verify_framing(&fs, tol) {
                Ok(report) => run.push(report.check),
                Err(FramingError::ZeroWindow(j)) => {
                    run.push(Check::failure(
                        "framing.zero_window",
                        "every window is nonzero",
                        format!("window {j} is zero"),
                    ));
                    return None;
                }
                Err(e) => {
                    run.push(Check::failure(
                        "framing.reconstruction_identity",
                        "the framing reconstructs X",
                        e.to_string(),
                    ));
                    return None;
                }
            }
            let action = match &scenario.action {
                Some(table) => action_check(&group, group.order(), table.clone(), run)?,
                None => GroupAction::left_translation(&group),
            };
            let ovm = match framing_ovm(&rep, fs.windows(), fs.duals()) {
                Ok(o) => o,
                Err(e) => {
                    run.push(Check::failure("ovm.shape", "the framing OVM is well formed", e.to_string()));
                    return None;
                }
            };
            (ovm, action, Some(fs))
        }
    };

    let item = "W_s φ({ω}) = φ({s·ω}) W_s for all s, ω";
    match check_system(rep, ovm, action, tol) {
        Ok((system, report)) => {
            let class = report.class;
            run.push(Check::residual("imprimitivity.covariance", item, report.max_covariance_residual, eps));
            run.notes.push(format!(
                "OVM class: probability={}, positive={}, spectral={}",
                class.probability, class.positive, class.spectral
            ));
            let positive_hilbert = class.positive && scenario.space.norm.is_hilbert();
            Some(Validated { system, framing, positive_hilbert })
        }
        Err(ImprimitivityError::CovarianceViolation { s, atom, residual }) => {
            run.push(
                Check::residual("imprimitivity.covariance", item, residual, eps)
                    .with_note(format!("worst violation at s = {s}, atom {atom}")),
            );
            None
        }
        Err(e) => {
            run.push(Check::failure("imprimitivity.covariance", item, e.to_string()));
            None
        }
    }
}

fn representation(
    group: &FiniteGroup,
    multiplier: &Multiplier,
    scenario: &Scenario,
    tol: &Tolerance,
    run: &mut Run,
) -> Option<ProjectiveRep> {
    const UNIT: (&str, &str) = ("imprimitivity.rep_unit", "W_e = I");
    const RELATION: (&str, &str) = ("imprimitivity.rep_multiplier_relation", "W_s W_t = ω(s,t) W_st");
    const ISOMETRY: (&str, &str) = ("imprimitivity.rep_isometry", "every W_s is an isometry of X");
    let eps = tol.eps_residual;
    match check_rep(group, multiplier, scenario.space, scenario.rep.clone(), tol) {
        Ok((rep, report)) => {
            run.push(Check::residual(UNIT.0, UNIT.1, report.unit_residual, eps));
            run.push(Check::residual(RELATION.0, RELATION.1, report.relation_residual, eps));
            run.push(Check::residual(ISOMETRY.0, ISOMETRY.1, report.isometry_residual, eps));
            Some(rep)
        }
        Err(e) => {
            match e {
                ImprimitivityError::UnitViolation { residual } => {
                    run.push(Check::residual(UNIT.0, UNIT.1, residual, eps));
                }
                ImprimitivityError::MultiplierRelationViolation { s, t, residual } => {
                    run.push(Check::boolean(UNIT.0, UNIT.1, true));
                    run.push(
                        Check::residual(RELATION.0, RELATION.1, residual, eps)
                            .with_note(format!("worst at s = {s}, t = {t}")),
                    );
                }
                ImprimitivityError::NotIsometry { s, residual, .. } => {
                    run.push(Check::boolean(UNIT.0, UNIT.1, true));
                    run.push(Check::boolean(RELATION.0, RELATION.1, true));
                    run.push(Check::residual(ISOMETRY.0, ISOMETRY.1, residual, eps).with_note(format!("W_{s} fails")));
                }
                other => {
                    run.push(Check::failure(
                        "imprimitivity.rep_shape",
                        "W has one d×d matrix per group element",
                        other.to_string(),
                    ));
                }
            }
            None
        }
    }
}

fn action_check(group: &FiniteGroup, atoms: usize, table: Vec<Vec<usize>>, run: &mut Run) -> Option<GroupAction> {
    let item = "the table defines an action of G on the atoms";
    let space = match MeasurableSpace::new(atoms) {
        Ok(s) => s,
        Err(e) => {
            run.push(Check::failure("algebra.action", item, e.to_string()));
            return None;
        }
    };
    match check_action(group, space, table) {
        Ok(a) => {
            run.push(Check::boolean("algebra.action", item, true));
            Some(a)
        }
        Err(e) => {
            run.push(Check::failure("algebra.action", item, e.to_string()));
            None
        }
    }
}

fn ovm_check(
    space: MeasurableSpace,
    scenario: &Scenario,
    atoms: Vec<crate::linalg::CMatrix>,
    run: &mut Run,
) -> Option<Ovm> {
    match Ovm::new(space, scenario.space, atoms) {
        Ok(o) => Some(o),
        Err(e) => {
            run.push(Check::failure("ovm.shape", "the atoms are finite d×d matrices", e.to_string()));
            None
        }
    }
}

fn banach(v: &Validated, tol: &Tolerance, run: &mut Run) {
    match build_minimal_dilation(&v.system, tol) {
        Ok(ds) => {
            run.notes.push(format!("minimal Banach dilation: dim M_φ = {}", ds.dim()));
            run.checks.extend(verify_dilation(&ds, &v.system, tol, tol.sample_count));
        }
        Err(e) => run.push(Check::failure("banach.construction", "the minimal dilation exists", e.to_string())),
    }
}

fn hilbert(v: &Validated, tol: &Tolerance, run: &mut Run, chain: bool) {
    let hd = match build_hilbert_dilation(&v.system, tol) {
        Ok(hd) => hd,
        Err(e) => {
            run.push(Check::failure("hilbert.construction", "the Hilbert-space dilation exists", e.to_string()));
            return;
        }
    };
    run.notes.push(format!("Hilbert dilation: dim K = {}", hd.k_dim()));
    run.checks.extend(verify_hilbert_dilation(&hd, &v.system, tol));
    if !chain {
        return;
    }
    // The Hilbert dilation is an injective dilation with Euclidean carrier;
    // check the induced norm on M_φ and the minimality bound against it.
    let ds = match hilbert_as_injective(&hd, &v.system) {
        Ok(ds) => ds,
        Err(e) => {
            run.push(Check::failure(
                "induced.construction",
                "the Hilbert dilation is a Banach dilation",
                e.to_string(),
            ));
            return;
        }
    };
    match induced_norm_from_injective(&ds, &v.system, tol) {
        Ok(induced) => {
            run.checks.extend(induced.checks.iter().cloned());
            let report = minimality_bound(&induced, tol, tol.sample_count);
            run.notes.push(format!(
                "minimality: K = {:.6} ({}), largest observed ratio {:.6}",
                report.k,
                if report.k_exact { "exact" } else { "sampled" },
                report.c_est
            ));
            run.checks.extend(report.checks);
        }
        Err(e) => run.push(Check::failure("induced.construction", "the dilation induces a norm on M_φ", e.to_string())),
    }
}

fn framing(fs: &FramingSystem, tol: &Tolerance, run: &mut Run) {
    match build_dilated_basis(fs, tol) {
        Ok(db) => {
            run.notes.push(format!("dilated basis: dim Z = {}", db.z_dim()));
            run.checks.extend(verify_dilated_basis(&db, fs, tol, tol.sample_count));
        }
        Err(e) => run.push(Check::failure("framing.construction", "the dilated basis exists", e.to_string())),
    }
}
