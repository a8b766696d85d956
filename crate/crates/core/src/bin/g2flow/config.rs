//! Run configuration: a JSON document whose keys mirror the command-line
//! flags. Flags override the file.

use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub structure: StructureCfg,
    #[serde(default)]
    pub family: FamilyCfg,
    #[serde(default)]
    pub solver: SolverCfg,
    #[serde(default)]
    pub outputs: OutputsCfg,
    #[serde(default)]
    pub scan: ScanCfg,
    /// Path of a thresholds JSON file for `verify`.
    pub thresholds: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureCfg {
    /// `bryant_salamon`, `su23`, `linear` or `file`.
    pub kind: Option<String>,
    pub r_max: Option<f64>,
    pub b0: Option<f64>,
    pub path: Option<String>,
    /// Odd Taylor coefficients of `A₁`: `[a₁, a₃, a₅, …]` with `a₁ = 1/2`.
    pub a1: Option<Vec<f64>>,
    pub t_max: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyCfg {
    pub kind: Option<String>,
    pub x1: Option<f64>,
    pub y0: Option<f64>,
    pub t0: Option<f64>,
    pub a_plus: Option<[f64; 3]>,
    pub a_minus: Option<[f64; 3]>,
    pub f1: Option<[f64; 3]>,
    pub b0_minus: Option<f64>,
    pub u2: Option<f64>,
    pub u3: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverCfg {
    pub eps: Option<f64>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsCfg {
    pub dir: Option<String>,
    pub grid: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanCfg {
    pub values: Option<Vec<f64>>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
}

/// Overwrite `dst` when the flag was given.
pub fn merge<T>(dst: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *dst = flag;
    }
}
