//! The `analyze`, `sweep-s` and `verify` pipelines.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use tspower_core::power::{self, LinePower};
use tspower_core::{
    budeanu, classical_summary, instantaneous, real_imaginary_power, solve, BalanceReport,
    BalanceResidual, BudeanuReactive, ClassicalSummary, InstantaneousSet, LineSpectrum,
    LoadCharacter, NetworkSolution, ScaledQuantities, TimeScaleModel,
};

use crate::config::AnalysisConfig;
use crate::error::CliError;
use crate::output::{scaled_file_name, Table};

/// Everything computed for one configuration.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub solution: NetworkSolution,
    pub instantaneous: InstantaneousSet,
    /// Real power `P(t)`.
    pub real_power: LineSpectrum,
    /// Imaginary power `Q(t)`.
    pub imaginary_power: LineSpectrum,
    pub scaled: ScaledQuantities,
    pub classical: ClassicalSummary,
    pub budeanu: BudeanuReactive,
    pub report: BalanceReport,
}

pub fn analyze(cfg: &AnalysisConfig) -> Result<Analysis, CliError> {
    let solution = solve(&cfg.netlist, &cfg.source)?;
    let instantaneous = instantaneous(&solution)?;
    let (real_power, imaginary_power) =
        real_imaginary_power(solution.source(), solution.port_current())?;
    let model = TimeScaleModel::new(&solution);
    let budeanu = budeanu(&model)?;
    let scaled = power::scaled_from_model(model, &cfg.t_grid, &cfg.s_grid)?;
    let classical = classical_summary(&solution);
    let report = BalanceReport::new(&instantaneous, &scaled);
    Ok(Analysis {
        solution,
        instantaneous,
        real_power,
        imaginary_power,
        scaled,
        classical,
        budeanu,
        report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualMaxima {
    pub instantaneous: f64,
    pub active: f64,
    pub reactive: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryDocument {
    /// Mean active power, W.
    pub active_power: f64,
    /// Budeanu reactive power, VAr.
    pub budeanu_reactive_power: f64,
    /// Apparent power `U I`, VA.
    pub apparent_power: f64,
    pub distortion_power: f64,
    pub voltage_rms: f64,
    pub current_rms: f64,
    pub character: LoadCharacter,
    pub budeanu_routes: BudeanuReactive,
    pub lines: Vec<LinePower>,
    /// Relative residual maxima of the three balances.
    pub residuals: ResidualMaxima,
}

impl SummaryDocument {
    pub fn new(a: &Analysis) -> Self {
        let q_b = a.budeanu.value();
        let s = a.classical.apparent_power;
        Self {
            active_power: a.classical.active_power,
            budeanu_reactive_power: q_b,
            apparent_power: s,
            distortion_power: a.classical.distortion_power(),
            voltage_rms: a.classical.voltage_rms,
            current_rms: a.classical.current_rms,
            character: LoadCharacter::classify(q_b, s),
            budeanu_routes: a.budeanu,
            lines: a.classical.lines.clone(),
            residuals: ResidualMaxima {
                instantaneous: a.report.instantaneous.relative(),
                active: a.report.active.relative(),
                reactive: a.report.reactive.relative(),
            },
        }
    }
}

pub const INSTANTANEOUS_HEADER: [&str; 9] = ["t", "p", "p_d", "w_m", "w_e", "w", "x", "P_t", "Q_t"];
pub const SCALED_HEADER: [&str; 8] = ["t", "W_m", "W_e", "W", "X", "P", "Q", "P_d"];
pub const SWEEP_HEADER: [&str; 3] = ["s", "mean_X", "mean_Q"];

pub fn instantaneous_table(a: &Analysis) -> Table {
    let set = &a.instantaneous;
    let mut table = Table::new(INSTANTANEOUS_HEADER.to_vec());
    for &t in a.scaled.t_grid() {
        table.push(vec![
            t,
            set.p.evaluate(t),
            set.p_d.evaluate(t),
            set.w_m.evaluate(t),
            set.w_e.evaluate(t),
            set.w.evaluate(t),
            set.x.evaluate(t),
            a.real_power.evaluate(t),
            a.imaginary_power.evaluate(t),
        ]);
    }
    table
}

pub fn scaled_table(sq: &ScaledQuantities, is: usize) -> Table {
    let mut table = Table::new(SCALED_HEADER.to_vec());
    for (t, v) in sq.t_grid().iter().zip(sq.slice(is)) {
        table.push(vec![*t, v.w_m, v.w_e, v.w(), v.x(), v.p, v.q, v.p_d]);
    }
    table
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("summary types serialize");
    text.push('\n');
    text
}

fn write_all(dir: &PathBuf, files: Vec<(String, String)>) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

/// Runs the full analysis and writes the requested outputs. Returns the
/// written paths.
pub fn run_analyze(cfg: &AnalysisConfig) -> Result<Vec<PathBuf>, CliError> {
    let a = analyze(cfg)?;
    let mut files = Vec::new();
    if cfg.format.csv() {
        files.push((
            "instantaneous.csv".to_string(),
            instantaneous_table(&a).to_csv(),
        ));
        for (is, &s) in a.scaled.s_grid().iter().enumerate() {
            files.push((scaled_file_name(s), scaled_table(&a.scaled, is).to_csv()));
        }
    }
    if cfg.format.json() {
        files.push((
            "summary.json".to_string(),
            to_json(&SummaryDocument::new(&a)),
        ));
        files.push(("balance.json".to_string(), to_json(&a.report)));
    }
    write_all(&cfg.output_dir, files)
}

/// Time means of `X(t, s)` and `Q(t, s)` along the scale grid.
pub fn sweep_table(cfg: &AnalysisConfig) -> Result<Table, CliError> {
    let solution = solve(&cfg.netlist, &cfg.source)?;
    let model = TimeScaleModel::new(&solution);
    let x = model.reactive_energy();
    let mut table = Table::new(SWEEP_HEADER.to_vec());
    for &s in &cfg.s_grid {
        table.push(vec![
            s,
            x.time_mean(s).re,
            model.complex_power.time_mean(s).im,
        ]);
    }
    Ok(table)
}

pub fn run_sweep_s(cfg: &AnalysisConfig) -> Result<PathBuf, CliError> {
    let table = sweep_table(cfg)?;
    let mut paths = write_all(
        &cfg.output_dir,
        vec![("sweep.csv".to_string(), table.to_csv())],
    )?;
    Ok(paths.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub lines: Vec<String>,
    pub passed: bool,
}

fn check(name: &str, r: &BalanceResidual, tol: f64) -> (bool, String) {
    let rel = r.relative();
    let ok = rel < tol;
    let line = format!(
        "{name}: {} relative residual {rel:.3e} (tolerance {tol:.3e}; worst point t = {}, s = {})",
        if ok { "PASS" } else { "FAIL" },
        r.worst_t,
        r.worst_s,
    );
    (ok, line)
}

/// Checks every balance against `cfg.tolerance` and the agreement of the two
/// Budeanu routes.
pub fn run_verify(cfg: &AnalysisConfig) -> Result<Verdict, CliError> {
    let solution = solve(&cfg.netlist, &cfg.source)?;
    let set = instantaneous(&solution)?;
    let model = TimeScaleModel::new(&solution);
    let budeanu_result = budeanu(&model);
    let sq = power::scaled_from_model(model, &cfg.t_grid, &cfg.s_grid)?;
    let report = BalanceReport::new(&set, &sq);

    let mut passed = true;
    let mut lines = Vec::new();
    for (name, r) in [
        (
            "instantaneous balance dw/dt = p - p_d",
            &report.instantaneous,
        ),
        ("active balance dW/dt = P - P_d", &report.active),
        ("reactive balance -dX/ds = Q", &report.reactive),
    ] {
        let (ok, line) = check(name, r, cfg.tolerance);
        passed &= ok;
        lines.push(line);
    }
    match budeanu_result {
        Ok(b) => lines.push(format!(
            "budeanu routes: PASS mean Q(t) = {}, -d/ds mean X = {} (relative gap {:.3e})",
            b.from_mean_q,
            b.from_reactive_energy,
            b.relative_gap()
        )),
        Err(e) => {
            passed = false;
            lines.push(format!("budeanu routes: FAIL {e}"));
        }
    }
    Ok(Verdict { lines, passed })
}
