//! One verified identity: its largest residual against a threshold.

use crate::algebra::{AtomSet, MeasurableSpace};
use crate::linalg::{seeded_rng, Tolerance};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Set identities are checked on every subset up to this many atoms and on
/// atoms plus random subsets beyond.
pub const EXHAUSTIVE_ATOMS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Stable machine name, e.g. `banach.compression`.
    pub name: String,
    /// The identity or property under test, in words.
    pub item: String,
    /// Non-finite residuals (a check that could not be evaluated) serialize as null.
    #[serde(with = "finite_or_null")]
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Check {
    /// A residual check; NaN residuals fail.
    pub fn residual(name: &str, item: &str, max_residual: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            item: item.to_string(),
            max_residual,
            threshold,
            pass: max_residual <= threshold,
            notes: Vec::new(),
        }
    }

    /// A check that failed before a residual could be computed.
    pub fn failure(name: &str, item: &str, note: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            item: item.to_string(),
            max_residual: f64::INFINITY,
            threshold: 0.0,
            pass: false,
            notes: vec![note.into()],
        }
    }

    /// An exact yes/no property; the residual is 0 on success and 1 on failure.
    pub fn boolean(name: &str, item: &str, holds: bool) -> Self {
        Self::residual(name, item, if holds { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Maximum of a residual iterator; NaN propagates so that it fails a threshold.
pub fn max_residual(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc: f64, r| if r.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(r) })
}

/// The sets on which an identity over Σ = 2^Ω is checked: all of them for
/// small Ω, otherwise ∅, Ω, every atom and `sample_count` seeded random sets.
pub fn check_sets(space: MeasurableSpace, tol: &Tolerance) -> Vec<AtomSet> {
    let m = space.atom_count();
    if m <= EXHAUSTIVE_ATOMS {
        return space.subsets().collect();
    }
    let full = space.full();
    let mut rng = seeded_rng(tol.seed);
    let mut sets = vec![AtomSet::EMPTY, full];
    sets.extend((0..m).map(AtomSet::singleton));
    sets.extend((0..tol.sample_count).map(|_| AtomSet(rng.random::<u64>() & full.0)));
    sets
}

/// Pairs (A, B) for two-set identities, chosen like [`check_sets`].
pub fn check_set_pairs(space: MeasurableSpace, tol: &Tolerance) -> Vec<(AtomSet, AtomSet)> {
    let m = space.atom_count();
    if m <= EXHAUSTIVE_ATOMS {
        let sets: Vec<AtomSet> = space.subsets().collect();
        return sets.iter().flat_map(|&a| sets.iter().map(move |&b| (a, b))).collect();
    }
    let full = space.full();
    let mut rng = seeded_rng(tol.seed ^ 0x5eed);
    let mut pairs: Vec<(AtomSet, AtomSet)> =
        (0..m).flat_map(|a| (0..m).map(move |b| (AtomSet::singleton(a), AtomSet::singleton(b)))).collect();
    pairs.extend(
        (0..tol.sample_count).map(|_| (AtomSet(rng.random::<u64>() & full.0), AtomSet(rng.random::<u64>() & full.0))),
    );
    pairs
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
