//! Command implementations: each returns rendered report text; the binary
//! decides where it goes and which exit code follows.

use rayon::prelude::*;
use serde::Serialize;

use decotrace_core::constants::{EV_J, TORR_PA};
use decotrace_core::decoherence::{
    apply_kernel, closed_form_comparison, kernel_gaussian, kernel_quadrature_with_nodes,
    mix_branches, DecoherenceKernel,
};
use decotrace_core::metrics::{negativity, purity, schmidt_decompose, schmidt_number};
use decotrace_core::scenario::{sweep, threshold_check, SweepAxis};
use decotrace_core::{
    BiphotonAmplitude, BoundState, MatrixElementParams, MomentumGrid, Scenario, ThresholdVerdict,
};

use crate::error::{CliError, Result};
use crate::format::{csv_row, fmt_bool, fmt_num};

/// Largest joint dimension (n_s·n_i) the evolve pipeline accepts,
/// 48×48 grids; the PPT eigensolve is O(d³).
pub const MAX_JOINT_DIM: usize = 2304;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(CliError::Usage(format!(
                "unknown format \"{other}\"; use csv or json"
            ))),
        }
    }
}

#[derive(Serialize)]
struct ThresholdJson {
    label: String,
    n: f64,
    sigma_q2_m2: f64,
    lhs_m2: f64,
    rhs_m2: f64,
    survives: bool,
    margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

fn verdict_note(v: &ThresholdVerdict<f64>) -> Option<&'static str> {
    v.initially_separable.then_some("no initial entanglement")
}

/// Threshold report; the boolean is the survival verdict for the exit
/// code.
pub fn run_threshold(scenario: &Scenario<f64>, format: OutputFormat) -> Result<(String, bool)> {
    let v = threshold_check(scenario)?;
    let text = match format {
        OutputFormat::Csv => {
            let header = "n,sigma_q2_m2,lhs_m2,rhs_m2,survives,margin";
            let row = csv_row(&[
                fmt_num(v.n),
                fmt_num(v.sigma_q2),
                fmt_num(v.lhs),
                fmt_num(v.rhs),
                fmt_bool(v.survives).to_string(),
                fmt_num(v.margin),
            ]);
            format!("{header}\n{row}\n")
        }
        OutputFormat::Json => {
            let report = ThresholdJson {
                label: scenario.label.clone(),
                n: v.n,
                sigma_q2_m2: v.sigma_q2,
                lhs_m2: v.lhs,
                rhs_m2: v.rhs,
                survives: v.survives,
                margin: v.margin,
                note: verdict_note(&v),
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    Ok((text, v.survives))
}

fn parse_axis(axis: &str) -> Result<SweepAxis> {
    match axis {
        "pressure" => Ok(SweepAxis::Pressure),
        "length" => Ok(SweepAxis::Length),
        "energy" => Ok(SweepAxis::Energy),
        "sigma_p" => Ok(SweepAxis::SigmaP),
        other => Err(CliError::Usage(format!(
            "unknown sweep axis \"{other}\"; use pressure, length, energy, or sigma_p"
        ))),
    }
}

/// Scale factor from the user's unit to the SI unit of the axis.
fn unit_scale(axis: SweepAxis, unit: Option<&str>) -> Result<f64> {
    let scale = match (axis, unit) {
        (SweepAxis::Pressure, None | Some("pa")) => 1.0,
        (SweepAxis::Pressure, Some("torr")) => TORR_PA,
        (SweepAxis::Length, None | Some("m")) => 1.0,
        (SweepAxis::Energy, None | Some("ev")) => EV_J,
        (SweepAxis::Energy, Some("j")) => 1.0,
        (SweepAxis::SigmaP, None | Some("per_m")) => 1.0,
        (axis, Some(other)) => {
            return Err(CliError::Usage(format!(
                "unit \"{other}\" is not valid for the {} axis",
                axis.name()
            )))
        }
    };
    Ok(scale)
}

pub fn parse_value_list(raw: &str) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> =
        raw.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
    let values =
        values.map_err(|_| CliError::Usage(format!("cannot parse value list \"{raw}\"")))?;
    if values.is_empty() {
        return Err(CliError::Usage("value list is empty".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage("values must be finite".into()));
    }
    Ok(values)
}

#[derive(Serialize)]
struct SweepRowJson {
    axis_value: f64,
    n: f64,
    lhs_m2: f64,
    rhs_m2: f64,
    survives: bool,
    margin: f64,
}

#[derive(Serialize)]
struct SweepJson {
    label: String,
    axis: &'static str,
    crossing_index: Option<usize>,
    rows: Vec<SweepRowJson>,
}

/// Threshold verdicts along one axis. Values are echoed in the unit they
/// were given in; the trailing comment reports where survival flips.
pub fn run_sweep(
    scenario: &Scenario<f64>,
    axis: &str,
    values_raw: &str,
    unit: Option<&str>,
    format: OutputFormat,
) -> Result<String> {
    let axis = parse_axis(axis)?;
    let given = parse_value_list(values_raw)?;
    let scale = unit_scale(axis, unit)?;
    let si: Vec<f64> = given.iter().map(|v| v * scale).collect();
    if si.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("values must be strictly increasing".into()));
    }
    let result = sweep(scenario, axis, &si)?;

    match format {
        OutputFormat::Csv => {
            let mut out = String::from("axis_value,n,lhs_m2,rhs_m2,survives,margin\n");
            for (value, v) in given.iter().zip(&result.verdicts) {
                out.push_str(&csv_row(&[
                    fmt_num(*value),
                    fmt_num(v.n),
                    fmt_num(v.lhs),
                    fmt_num(v.rhs),
                    fmt_bool(v.survives).to_string(),
                    fmt_num(v.margin),
                ]));
                out.push('\n');
            }
            match result.crossing {
                Some(i) => out.push_str(&format!("# crossing_index = {i}\n")),
                None => out.push_str("# crossing_index = none\n"),
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let report = SweepJson {
                label: scenario.label.clone(),
                axis: result.axis.name(),
                crossing_index: result.crossing,
                rows: given
                    .iter()
                    .zip(&result.verdicts)
                    .map(|(value, v)| SweepRowJson {
                        axis_value: *value,
                        n: v.n,
                        lhs_m2: v.lhs,
                        rhs_m2: v.rhs,
                        survives: v.survives,
                        margin: v.margin,
                    })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
    }
}

/// Tabulates the scenario's double-Gaussian state on a symmetric grid.
fn scenario_state(
    scenario: &Scenario<f64>,
    grid_points: usize,
    extent: f64,
) -> Result<(BiphotonAmplitude<f64>, MomentumGrid<f64>)> {
    if extent <= 0.0 {
        return Err(CliError::Usage("extent must be positive".into()));
    }
    let half = extent * scenario.sigma_p.max(scenario.sigma_c);
    let grid = MomentumGrid::symmetric(half, grid_points)?;
    let f = BiphotonAmplitude::double_gaussian(scenario.sigma_p, scenario.sigma_c)?
        .tabulate(grid.clone(), grid.clone())?;
    Ok((f, grid))
}

#[derive(Debug)]
pub struct EvolveOutput {
    pub table: String,
    /// Diagonal of the final density matrix, when requested.
    pub diagonal: Option<String>,
}

/// Decoherence pipeline across a list of event numbers: tabulate the
/// state, dephase it with the Gaussian kernel at the scenario's recoil
/// width, mix the surviving and ionizing branches, and report negativity
/// and purity. The Schmidt number of the initial pure state is repeated
/// per row.
pub fn run_evolve(
    scenario: &Scenario<f64>,
    n_list_raw: &str,
    grid_points: usize,
    extent: f64,
    with_diagonal: bool,
) -> Result<EvolveOutput> {
    let n_list = parse_value_list(n_list_raw)?;
    if n_list.iter().any(|n| *n < 0.0) {
        return Err(CliError::Usage("event numbers must be >= 0".into()));
    }
    let joint = grid_points * grid_points;
    if joint > MAX_JOINT_DIM {
        return Err(CliError::Usage(format!(
            "joint dimension {joint} exceeds the cap {MAX_JOINT_DIM}; use --grid <= {}",
            (MAX_JOINT_DIM as f64).sqrt() as usize
        )));
    }
    let (f, grid) = scenario_state(scenario, grid_points, extent)?;
    let sigma_q = scenario.recoil_variance().sqrt();

    let k0 = schmidt_number(&schmidt_decompose(&f)?);
    let pure = apply_kernel(&f, &kernel_gaussian(sigma_q, 0.0, &grid)?)?;

    let rows: Vec<(f64, f64, f64)> = n_list
        .par_iter()
        .map(|&n| -> Result<(f64, f64, f64)> {
            let kernel = kernel_gaussian(sigma_q, n, &grid)?;
            let decohered = apply_kernel(&f, &kernel)?;
            let mixed = mix_branches(&pure, &decohered, n)?;
            Ok((n, negativity(&mixed)?, purity(&mixed)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = String::from("n_events,negativity,purity,schmidt_number_at_n0\n");
    for (n, neg, pur) in &rows {
        table.push_str(&csv_row(&[
            fmt_num(*n),
            fmt_num(*neg),
            fmt_num(*pur),
            fmt_num(k0),
        ]));
        table.push('\n');
    }

    let diagonal = if with_diagonal {
        let last = *n_list.last().expect("nonempty n list");
        let kernel = kernel_gaussian(sigma_q, last, &grid)?;
        let mixed = mix_branches(&pure, &apply_kernel(&f, &kernel)?, last)?;
        let mut out = String::from("k_s_per_m,k_i_per_m,probability\n");
        let ni = grid.n_points();
        for s in 0..grid.n_points() {
            for i in 0..ni {
                let a = mixed.index(s, i);
                out.push_str(&csv_row(&[
                    fmt_num(grid.point(s)),
                    fmt_num(grid.point(i)),
                    fmt_num(mixed.values()[(a, a)].re),
                ]));
                out.push('\n');
            }
        }
        Some(out)
    } else {
        None
    };

    Ok(EvolveOutput { table, diagonal })
}

#[derive(Serialize)]
struct SchmidtJson {
    label: String,
    schmidt_number: f64,
    coefficients: Vec<f64>,
}

/// Schmidt spectrum and participation ratio of the scenario's pure state.
pub fn run_schmidt(
    scenario: &Scenario<f64>,
    grid_points: usize,
    extent: f64,
    format: OutputFormat,
) -> Result<String> {
    let (f, _) = scenario_state(scenario, grid_points, extent)?;
    let spectrum = schmidt_decompose(&f)?;
    let k = schmidt_number(&spectrum);
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("index,coefficient\n");
            for (idx, c) in spectrum.coefficients().iter().enumerate() {
                out.push_str(&csv_row(&[idx.to_string(), fmt_num(*c)]));
                out.push('\n');
            }
            out.push_str(&format!("# schmidt_number = {}\n", fmt_num(k)));
            Ok(out)
        }
        OutputFormat::Json => {
            let report = SchmidtJson {
                label: scenario.label.clone(),
                schmidt_number: k,
                coefficients: spectrum.coefficients().to_vec(),
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    Quadrature,
    Gaussian,
}

impl std::str::FromStr for KernelMode {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(Self::Quadrature),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(CliError::Usage(format!(
                "unknown kernel mode \"{other}\"; use quadrature or gaussian"
            ))),
        }
    }
}

#[derive(Debug)]
pub struct KernelOutput {
    pub matrix: String,
    /// Diagonal-ratio comparison against the closed form (quadrature mode).
    pub comparison: Option<String>,
}

/// Builds the idler decoherence kernel on the scenario's grid and renders
/// it as CSV. Quadrature mode is the single-event microscopic kernel and
/// can emit the closed-form diagonal comparison; Gaussian mode uses the
/// scenario's interaction number.
pub fn run_kernel(
    scenario: &Scenario<f64>,
    mode: KernelMode,
    grid_points: usize,
    extent: f64,
    nodes: usize,
    with_comparison: bool,
) -> Result<KernelOutput> {
    if extent <= 0.0 {
        return Err(CliError::Usage("extent must be positive".into()));
    }
    let half = extent * scenario.sigma_p.max(scenario.sigma_c);
    let grid = MomentumGrid::symmetric(half, grid_points)?;
    let sigma_q2 = scenario.recoil_variance();
    if sigma_q2 <= 0.0 {
        return Err(CliError::Usage(
            "kernel construction requires a positive recoil variance".into(),
        ));
    }
    let bound = BoundState::gaussian(sigma_q2.sqrt())?;

    let kernel: DecoherenceKernel<f64> = match mode {
        KernelMode::Gaussian => {
            let n = scenario.interaction_number()?;
            kernel_gaussian(sigma_q2.sqrt(), n, &grid)?
        }
        KernelMode::Quadrature => {
            let params = MatrixElementParams::new(1.0, bound.clone())?;
            kernel_quadrature_with_nodes(&params, &grid, nodes)?
        }
    };

    let mut matrix = String::from("i,j,k_i_per_m,k_j_per_m,re,im\n");
    for r in 0..grid.n_points() {
        for c in 0..grid.n_points() {
            let z = kernel.values()[(r, c)];
            matrix.push_str(&csv_row(&[
                r.to_string(),
                c.to_string(),
                fmt_num(grid.point(r)),
                fmt_num(grid.point(c)),
                fmt_num(z.re),
                fmt_num(z.im),
            ]));
            matrix.push('\n');
        }
    }

    let comparison = if with_comparison {
        if mode != KernelMode::Quadrature {
            return Err(CliError::Usage(
                "the closed-form comparison applies to quadrature mode only".into(),
            ));
        }
        let params = MatrixElementParams::new(1.0, bound)?;
        let rows = closed_form_comparison(&params, &grid, nodes)?;
        let mut out =
            String::from("k_per_m,quadrature_ratio,closed_form_ratio,relative_difference\n");
        for row in rows {
            out.push_str(&csv_row(&[
                fmt_num(row.k),
                fmt_num(row.quadrature_ratio),
                fmt_num(row.closed_form_ratio),
                fmt_num(row.relative_difference),
            ]));
            out.push('\n');
        }
        Some(out)
    } else {
        None
    };

    Ok(KernelOutput { matrix, comparison })
}
