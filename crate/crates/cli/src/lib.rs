//! Efficiency-index studies on the sine test problem and their tabular output.

use std::fmt::Write as _;

use majorant_core::{CaseConfig, CaseOutcome, MinimizerOptions, PrimalSolution, SineProblem, SolverOptions};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Markdown,
}

/// Study parameters. Every field is optional in the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Cells per side of the unit square, one block of rows per entry.
    pub n: Vec<usize>,
    pub p1: usize,
    /// Flux labels; label `p` selects `RT_{p-1}`.
    pub p2: Vec<usize>,
    pub k1: u32,
    pub k2: u32,
    pub a: [[f64; 2]; 2],
    pub lambda_override: Option<f64>,
    pub c_f_override: Option<f64>,
    pub eps: f64,
    pub imax: usize,
    pub beta0: f64,
    pub cg_tol: f64,
    pub quad_degree: Option<usize>,
    pub out: Option<String>,
    pub format: Format,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            n: vec![20],
            p1: 1,
            p2: vec![1, 2, 3],
            k1: 1,
            k2: 1,
            a: [[2.0, 1.0], [0.0, 3.0]],
            lambda_override: None,
            c_f_override: None,
            eps: 1e-6,
            imax: 50,
            beta0: 1.0,
            cg_tol: 1e-10,
            quad_degree: None,
            out: None,
            format: Format::Csv,
        }
    }
}

impl StudyConfig {
    /// The first table: `p1 = 1`, `k1 = k2 = 1`, all flux labels on the 20 and 40 meshes.
    pub fn table1() -> Self {
        Self {
            n: vec![20, 40],
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid study config: {e}"))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n.contains(&0) {
            return Err("mesh sizes must be positive".into());
        }
        if !(1..=2).contains(&self.p1) {
            return Err(format!("p1 must be 1 or 2, got {}", self.p1));
        }
        if let Some(p) = self.p2.iter().find(|p| !(1..=3).contains(*p)) {
            return Err(format!("p2 entries must be in 1..=3, got {p}"));
        }
        if self.k1 == 0 || self.k2 == 0 {
            return Err("k1 and k2 must be at least 1".into());
        }
        if !(self.eps > 0.0) {
            return Err(format!("eps must be positive, got {}", self.eps));
        }
        if self.imax == 0 {
            return Err("imax must be at least 1".into());
        }
        if !(self.beta0 > 0.0) || !(self.cg_tol > 0.0) {
            return Err("beta0 and cg_tol must be positive".into());
        }
        Ok(())
    }

    fn case(&self, n: usize) -> CaseConfig {
        CaseConfig {
            n,
            p1: self.p1,
            k1: self.k1,
            k2: self.k2,
            a: self.a,
            lambda_override: self.lambda_override,
            c_f_override: self.c_f_override,
            quad_degree: self.quad_degree,
            minimizer: MinimizerOptions {
                eps: self.eps,
                imax: self.imax,
                beta0: self.beta0,
                solver: SolverOptions::with_tol(self.cg_tol),
            },
            ..CaseConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub n1: usize,
    pub p2: usize,
    pub n2: usize,
    pub k: usize,
    pub maj_sq: f64,
    pub dual: f64,
    pub equi: f64,
    /// `maj_sq / err_sq`.
    pub ieff: f64,
    pub maj: f64,
    pub beta: f64,
}

impl StudyRow {
    fn new(n: usize, out: &CaseOutcome) -> Self {
        Self {
            n,
            n1: out.n1,
            p2: out.p2,
            n2: out.n2,
            k: out.result.iterations,
            maj_sq: out.result.maj_sq,
            dual: out.result.dual,
            equi: out.result.equi,
            ieff: out.ieff,
            maj: out.result.maj,
            beta: out.result.beta,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    /// One diagnostic per row that could not be computed.
    pub failures: Vec<String>,
}

/// Rows in config order: mesh sizes outer, flux labels inner. A failing row is
/// reported in `failures` and the remaining rows are still computed.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport, String> {
    config.validate()?;
    let mut report = StudyReport::default();
    for &n in &config.n {
        if config.p2.is_empty() {
            continue;
        }
        let primal = match PrimalSolution::compute(&config.case(n)) {
            Ok(p) => p,
            Err(e) => {
                report
                    .failures
                    .extend(config.p2.iter().map(|p2| format!("n={n} p2={p2}: primal solve failed: {e}")));
                continue;
            }
        };
        let opts = config.case(n).minimizer;
        for &p2 in &config.p2 {
            match primal.majorant(p2, &opts) {
                Ok(out) => report.rows.push(StudyRow::new(n, &out)),
                Err(e) => report.failures.push(format!("n={n} p2={p2}: {e}")),
            }
        }
    }
    Ok(report)
}

/// Note on the right-hand side for the configured wave numbers, if any.
pub fn rhs_note(config: &StudyConfig) -> Option<String> {
    SineProblem::new(config.k1, config.k2, config.a).ok()?.rhs_note()
}

/// `1.76E+00` style: three significant digits and a signed two-digit exponent.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2E}");
    let (mantissa, exp) = s.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}E{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

pub const CSV_HEADER: &str = "N1,p2,N2,k,maj_sq,dual,equi,Ieff,maj,beta";

pub fn emit_table(rows: &[StudyRow], format: Format) -> String {
    if rows.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{:.4},{},{}",
                    r.n1,
                    r.p2,
                    r.n2,
                    r.k,
                    sci(r.maj_sq),
                    sci(r.dual),
                    sci(r.equi),
                    r.ieff,
                    sci(r.maj),
                    sci(r.beta)
                );
            }
        }
        Format::Markdown => {
            out.push_str("| N1 | p2 | N2 | k | maj_sq | dual | equi | Ieff |\n");
            out.push_str("|---:|---:|---:|---:|---:|---:|---:|---:|\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} | {:.4} |",
                    r.n1,
                    r.p2,
                    r.n2,
                    r.k,
                    sci(r.maj_sq),
                    sci(r.dual),
                    sci(r.equi),
                    r.ieff
                );
            }
        }
    }
    out
}
