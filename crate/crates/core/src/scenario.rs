//! The versioned JSON scenario format.
//!
//! A scenario carries a group (Cayley table), an optional multiplier, the
//! normed space X = (ℂ^d, ‖·‖_p), an action table, the representation
//! matrices, and exactly one payload: OVM atoms or a framing. Complex numbers
//! are `[re, im]` pairs and matrices are arrays of rows. Floats are written in
//! shortest round-trip form, so serialize → load is bit-exact.
//!
//! Loading checks syntax, field types, index ranges, shapes and finiteness.
//! Mathematical axioms (associativity, the cocycle identity, covariance, …)
//! are left to the verification pipeline so that they surface as named checks.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::linalg::{CMatrix, CVector, Norm, NormedSpace, Tolerance, C64};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {col}: {message}")]
    ParseError { line: usize, col: usize, message: String },
    #[error("schema error in {field}: {reason}")]
    SchemaError { field: String, reason: String },
    #[error("shape error in {field}: {reason}")]
    ShapeError { field: String, reason: String },
}

fn schema(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::SchemaError { field: field.into(), reason: reason.into() }
}

fn shape(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::ShapeError { field: field.into(), reason: reason.into() }
}

/// A complex number as `[re, im]`.
pub type ComplexPair = [f64; 2];
/// A matrix as an array of rows.
pub type MatrixSpec = Vec<Vec<ComplexPair>>;
pub type VectorSpec = Vec<ComplexPair>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "defaults::eps_residual")]
    pub eps_residual: f64,
    #[serde(default = "defaults::eps_rank")]
    pub eps_rank: f64,
    #[serde(default = "defaults::sample_count")]
    pub sample_count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::enum_cap")]
    pub enum_cap: usize,
}

mod defaults {
    use crate::linalg::Tolerance;

    pub fn eps_residual() -> f64 {
        Tolerance::default().eps_residual
    }
    pub fn eps_rank() -> f64 {
        Tolerance::default().eps_rank
    }
    pub fn sample_count() -> usize {
        Tolerance::default().sample_count
    }
    pub fn enum_cap() -> usize {
        Tolerance::default().enum_cap
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Tolerance::default().into()
    }
}

impl From<Tolerance> for ToleranceSpec {
    fn from(t: Tolerance) -> Self {
        Self {
            eps_residual: t.eps_residual,
            eps_rank: t.eps_rank,
            sample_count: t.sample_count,
            seed: t.seed,
            enum_cap: t.enum_cap,
        }
    }
}

impl ToleranceSpec {
    pub fn to_tolerance(&self) -> Tolerance {
        Tolerance {
            eps_residual: self.eps_residual,
            eps_rank: self.eps_rank,
            sample_count: self.sample_count,
            seed: self.seed,
            enum_cap: self.enum_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

/// `"l1" | "l2" | "linf" | {"lp": p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormSpec {
    Named(String),
    Lp { lp: f64 },
}

impl From<Norm> for NormSpec {
    fn from(n: Norm) -> Self {
        match n {
            Norm::L1 => NormSpec::Named("l1".into()),
            Norm::L2 => NormSpec::Named("l2".into()),
            Norm::LInf => NormSpec::Named("linf".into()),
            Norm::Lp(p) => NormSpec::Lp { lp: p },
        }
    }
}

impl NormSpec {
    pub fn to_norm(&self) -> Result<Norm, ScenarioError> {
        let norm = match self {
            NormSpec::Named(s) => match s.as_str() {
                "l1" => Norm::L1,
                "l2" => Norm::L2,
                "linf" => Norm::LInf,
                other => return Err(schema("space.norm", format!("unknown norm {other:?}"))),
            },
            NormSpec::Lp { lp } => Norm::Lp(*lp),
        };
        norm.validate().map_err(|e| schema("space.norm", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    pub norm: NormSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OvmSpec {
    pub atoms: Vec<MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramingSpec {
    pub windows: Vec<VectorSpec>,
    pub duals: Vec<VectorSpec>,
}

/// The on-disk form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<MatrixSpec>,
    pub space: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<Vec<usize>>>,
    pub rep: Vec<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ovm: Option<OvmSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub framing: Option<FramingSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tasks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Ovm { atoms: Vec<CMatrix> },
    Framing { windows: Vec<CVector>, duals: Vec<CVector> },
}

/// A structurally validated scenario, converted to matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub tolerance: Tolerance,
    pub table: Vec<Vec<usize>>,
    /// `None` when the file omits the multiplier (read as ω ≡ 1).
    pub multiplier: Option<Vec<Vec<C64>>>,
    pub space: NormedSpace,
    /// Action table over Ω; for framings the default is left translation on G.
    pub action: Option<Vec<Vec<usize>>>,
    pub rep: Vec<CMatrix>,
    pub payload: Payload,
}

impl Scenario {
    pub fn name(&self) -> Option<&str> {
        self.file.name.as_deref()
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        digest(&self.file)
    }
}

pub fn digest(file: &ScenarioFile) -> String {
    let bytes = serde_json::to_vec(file).expect("scenario serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn complex_pair(z: C64) -> ComplexPair {
    [z.re, z.im]
}

pub fn matrix_spec(m: &CMatrix) -> MatrixSpec {
    m.row_iter().map(|row| row.iter().map(|&z| complex_pair(z)).collect()).collect()
}

pub fn vector_spec(v: &CVector) -> VectorSpec {
    v.iter().map(|&z| complex_pair(z)).collect()
}

fn to_complex(pair: &ComplexPair, field: &str) -> Result<C64, ScenarioError> {
    if pair.iter().all(|x| x.is_finite()) {
        Ok(C64::new(pair[0], pair[1]))
    } else {
        Err(schema(field, "non-finite number"))
    }
}

fn to_matrix(spec: &MatrixSpec, rows: usize, cols: usize, field: &str) -> Result<CMatrix, ScenarioError> {
    if spec.len() != rows {
        return Err(shape(field, format!("expected {rows} rows, found {}", spec.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in spec.iter().enumerate() {
        if row.len() != cols {
            return Err(shape(format!("{field}[{i}]"), format!("expected {cols} entries, found {}", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = to_complex(z, &format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn to_vector(spec: &VectorSpec, len: usize, field: &str) -> Result<CVector, ScenarioError> {
    if spec.len() != len {
        return Err(shape(field, format!("expected length {len}, found {}", spec.len())));
    }
    spec.iter()
        .enumerate()
        .map(|(i, z)| to_complex(z, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>, _>>()
        .map(CVector::from_vec)
}

fn check_table(table: &[Vec<usize>], rows: usize, cols: usize, bound: usize, field: &str) -> Result<(), ScenarioError> {
    if table.len() != rows {
        return Err(shape(field, format!("expected {rows} rows, found {}", table.len())));
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != cols {
            return Err(shape(format!("{field}[{i}]"), format!("expected {cols} entries, found {}", row.len())));
        }
        if let Some(j) = row.iter().position(|&v| v >= bound) {
            return Err(schema(field, format!("entry [{i}][{j}] = {} out of range 0..{bound}", row[j])));
        }
    }
    Ok(())
}

/// Structural validation of a parsed file.
pub fn validate_file(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(schema("schema_version", format!("unsupported version {}", file.schema_version)));
    }
    let tolerance = file.tolerance.to_tolerance().validate().map_err(|e| schema("tolerance", e.to_string()))?;

    let n = file.group.order;
    if n == 0 {
        return Err(schema("group.order", "must be at least 1"));
    }
    check_table(&file.group.table, n, n, n, "group.table")?;

    let multiplier = match &file.multiplier {
        None => None,
        Some(spec) => {
            if spec.len() != n {
                return Err(shape("multiplier", format!("expected {n} rows, found {}", spec.len())));
            }
            let mut rows = Vec::with_capacity(n);
            for (i, row) in spec.iter().enumerate() {
                if row.len() != n {
                    return Err(shape(format!("multiplier[{i}]"), format!("expected {n} entries")));
                }
                rows.push(
                    row.iter()
                        .enumerate()
                        .map(|(j, z)| to_complex(z, &format!("multiplier[{i}][{j}]")))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            Some(rows)
        }
    };

    let norm = file.space.norm.to_norm()?;
    let d = file.space.dim;
    if d == 0 {
        return Err(schema("space.dim", "must be at least 1"));
    }
    let space = NormedSpace::new(d, norm).map_err(|e| schema("space", e.to_string()))?;

    if file.rep.len() != n {
        return Err(shape("rep", format!("expected {n} matrices (one per group element), found {}", file.rep.len())));
    }
    let rep = file
        .rep
        .iter()
        .enumerate()
        .map(|(s, m)| to_matrix(m, d, d, &format!("rep[{s}]")))
        .collect::<Result<Vec<_>, _>>()?;

    let payload = match (&file.ovm, &file.framing) {
        (Some(_), Some(_)) => return Err(schema("ovm/framing", "exactly one payload is allowed")),
        (None, None) => return Err(schema("ovm/framing", "a payload (ovm or framing) is required")),
        (Some(ovm), None) => {
            let m = ovm.atoms.len();
            if !(1..=crate::algebra::MAX_ATOMS).contains(&m) {
                return Err(schema(
                    "ovm.atoms",
                    format!("{m} atoms; between 1 and {} supported", crate::algebra::MAX_ATOMS),
                ));
            }
            let atoms = ovm
                .atoms
                .iter()
                .enumerate()
                .map(|(w, a)| to_matrix(a, d, d, &format!("ovm.atoms[{w}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Payload::Ovm { atoms }
        }
        (None, Some(fr)) => {
            if fr.windows.len() != fr.duals.len() {
                return Err(shape("framing", format!("{} windows but {} duals", fr.windows.len(), fr.duals.len())));
            }
            if fr.windows.is_empty() {
                return Err(schema("framing.windows", "at least one window is required"));
            }
            let windows = fr
                .windows
                .iter()
                .enumerate()
                .map(|(j, v)| to_vector(v, d, &format!("framing.windows[{j}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let duals = fr
                .duals
                .iter()
                .enumerate()
                .map(|(j, v)| to_vector(v, d, &format!("framing.duals[{j}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Payload::Framing { windows, duals }
        }
    };

    let atoms = match &payload {
        Payload::Ovm { atoms } => atoms.len(),
        Payload::Framing { .. } => n,
    };
    match &file.action {
        Some(table) => check_table(table, n, atoms, atoms, "action")?,
        None if matches!(payload, Payload::Ovm { .. }) => {
            return Err(schema("action", "an action table is required with an ovm payload"))
        }
        None => {}
    }

    Ok(Scenario {
        tolerance,
        table: file.group.table.clone(),
        multiplier,
        space,
        action: file.action.clone(),
        rep,
        payload,
        file,
    })
}

/// Parse and validate scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ScenarioError::ParseError {
        line: e.line(),
        col: e.column(),
        message: e.to_string(),
    })?;
    let file: ScenarioFile = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { "(root)".to_string() } else { path }, e.into_inner().to_string())
    })?;
    validate_file(file)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&text)
}

pub fn to_json(file: &ScenarioFile) -> String {
    serde_json::to_string_pretty(file).expect("scenario serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z2_BESSEL: &str = r#"{
      "schema_version": 1,
      "name": "z2_bessel",
      "group": {"order": 2, "table": [[0, 1], [1, 0]]},
      "space": {"dim": 2, "norm": "l2"},
      "action": [[0, 1], [1, 0]],
      "rep": [
        [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
        [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]
      ],
      "ovm": {"atoms": [
        [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
        [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]
      ]}
    }"#;

    #[test]
    fn loads_a_bessel_scenario() {
        let s = parse_scenario(Z2_BESSEL).unwrap();
        assert_eq!((s.order(), s.dim()), (2, 2));
        assert!(s.multiplier.is_none());
        assert_eq!(s.tolerance, Tolerance::default());
        assert!(matches!(s.payload, Payload::Ovm { ref atoms } if atoms.len() == 2));
    }

    #[test]
    fn out_of_range_table_entry_is_a_schema_error() {
        let text = Z2_BESSEL.replace("[[0, 1], [1, 0]]}", "[[0, 1], [1, 5]]}");
        match parse_scenario(&text) {
            Err(ScenarioError::SchemaError { field, reason }) => {
                assert_eq!(field, "group.table");
                assert!(reason.contains("out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_are_positional() {
        let err = parse_scenario("{\n  \"schema_version\": 1,\n  oops\n}").unwrap_err();
        assert!(matches!(err, ScenarioError::ParseError { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn type_errors_name_the_field() {
        let text = Z2_BESSEL.replace("\"dim\": 2", "\"dim\": \"two\"");
        match parse_scenario(&text) {
            Err(ScenarioError::SchemaError { field, .. }) => assert_eq!(field, "space.dim"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shape_errors_name_the_matrix() {
        let text = Z2_BESSEL.replace("[[[0, 0], [1, 0]], [[1, 0], [0, 0]]]", "[[[0, 0], [1, 0]]]");
        match parse_scenario(&text) {
            Err(ScenarioError::ShapeError { field, .. }) => assert_eq!(field, "rep[1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn norms_parse() {
        for (text, norm) in [("\"l1\"", Norm::L1), ("\"linf\"", Norm::LInf), ("{\"lp\": 3.5}", Norm::Lp(3.5))] {
            let s = parse_scenario(&Z2_BESSEL.replace("\"l2\"", text)).unwrap();
            assert_eq!(s.space.norm, norm);
        }
        assert!(matches!(
            parse_scenario(&Z2_BESSEL.replace("\"l2\"", "{\"lp\": 0.5}")),
            Err(ScenarioError::SchemaError { .. })
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let s = parse_scenario(Z2_BESSEL).unwrap();
        let mut file = s.file.clone();
        file.ovm.as_mut().unwrap().atoms[0][0][0] = [0.1 + 0.2, 1.0 / 3.0];
        let again = parse_scenario(&to_json(&file)).unwrap();
        assert_eq!(again.file, file);
        assert_eq!(digest(&again.file), digest(&file));
    }
}
