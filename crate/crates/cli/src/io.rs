//! Input file formats and the JSON envelopes printed by each command.

use std::io::Read;
use std::path::Path;

use gisk_core::continuity::PathReport;
use gisk_core::dhym::{DhymSpec, Reduction, ThetaWindow};
use gisk_core::proplab::SuiteResult;
use gisk_core::stability::DominanceVerdict;
use gisk_core::{FullCoeffs, GiskCoeffs, RootTuple, StabilityCertificate, Tee, ToyModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// Reads a file, or standard input for `-`.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// `{"n", "d"}` in reduced form or `{"n", "c"}` with all `n` unreduced coefficients.
#[derive(Debug, Clone, Deserialize)]
pub struct CoeffFile {
    pub n: usize,
    #[serde(default)]
    pub d: Option<Vec<f64>>,
    #[serde(default)]
    pub c: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Reduced,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadedCoeffs {
    pub format: InputFormat,
    /// Substitution shift applied to full-format input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    pub coeffs: GiskCoeffs,
}

pub fn load_coeffs(path: &Path) -> Result<LoadedCoeffs, CliError> {
    let raw: CoeffFile = read_json(path)?;
    match (raw.d, raw.c) {
        (Some(d), None) => Ok(LoadedCoeffs {
            format: InputFormat::Reduced,
            shift: None,
            coeffs: GiskCoeffs::new(raw.n, d)?,
        }),
        (None, Some(c)) => {
            let r = gisk_core::dhym::reduce_coefficients(&FullCoeffs::new(raw.n, c)?)?;
            Ok(LoadedCoeffs {
                format: InputFormat::Full,
                shift: Some(r.shift),
                coeffs: r.reduced,
            })
        }
        _ => Err(CliError::Usage(format!(
            "{}: expected exactly one of \"d\" or \"c\"",
            path.display()
        ))),
    }
}

pub fn load_roots(path: &Path) -> Result<RootTuple, CliError> {
    #[derive(Deserialize)]
    struct RootsFile {
        n: usize,
        x: Vec<f64>,
    }
    let raw: RootsFile = read_json(path)?;
    Ok(RootTuple::new(raw.n, raw.x)?)
}

pub fn load_model(path: &Path) -> Result<ToyModel, CliError> {
    let m: ToyModel = read_json(path)?;
    m.validate()?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutput {
    pub schema: u32,
    pub input: LoadedCoeffs,
    pub certificate: StabilityCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiOutput {
    pub schema: u32,
    pub input: LoadedCoeffs,
    pub roots: RootTuple,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roundtrip_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiOutput {
    pub schema: u32,
    pub roots: RootTuple,
    pub coeffs: GiskCoeffs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roundtrip_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeeOutput {
    pub schema: u32,
    pub input: LoadedCoeffs,
    pub tee: Tee,
    pub is_cy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronOutput {
    pub schema: u32,
    pub c: GiskCoeffs,
    pub d: GiskCoeffs,
    pub inside: bool,
    /// Normalized slack of each inequality, `l = 1..n−2`.
    pub slacks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceOutput {
    pub schema: u32,
    pub c: GiskCoeffs,
    pub d: GiskCoeffs,
    pub verdict: DominanceVerdict,
    pub root_dominates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DhymOutput {
    pub schema: u32,
    pub spec: DhymSpec,
    pub full: FullCoeffs,
    pub reduction: Reduction,
    pub certificate: StabilityCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutput {
    pub schema: u32,
    pub scan: ThetaWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceOutput {
    pub schema: u32,
    pub full: FullCoeffs,
    pub reduction: Reduction,
    pub certificate: StabilityCertificate,
}

pub type PathOutput = PathReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub schema: u32,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetOutput {
    pub schema: u32,
    pub seed: u64,
    pub coeffs: GiskCoeffs,
    pub roots: RootTuple,
    /// Points sorted in decreasing order.
    pub points: Vec<Vec<f64>>,
}
