//! Grid-refinement studies and their CSV form.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::exact::{exact_eval, example_problem};
use crate::analysis::norms::{error_norms, error_norms_mac, ErrorTriple};
use crate::error::{Error, Result};
use crate::grid::Circle;
use crate::kernels::DeltaKernel;
use crate::mac::solve_mac;
use crate::poisson::LinearSolveOptions;
use crate::three_poisson::solve_three_poisson;

pub const CSV_HEADER: &str = "N,err_u_inf,rate_u,err_p_l2,rate_p,err_p_far,rate_p_far";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ThreePoisson,
    Mac,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ThreePoisson => "three-poisson",
            Method::Mac => "mac",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "three-poisson" | "threepoisson" | "3p" => Ok(Method::ThreePoisson),
            "mac" => Ok(Method::Mac),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

/// Boundary data for the pressure equation of the three-Poisson method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PressureBoundary {
    /// Exact `∂p/∂n` on ∂Ω.
    #[default]
    Data,
    /// `∂P/∂n = 0`.
    Homogeneous,
}

impl FromStr for PressureBoundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "data" | "exact" => Ok(PressureBoundary::Data),
            "homogeneous" | "zero" => Ok(PressureBoundary::Homogeneous),
            _ => Err(Error::InvalidArgument(format!("unknown pressure boundary '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StudyOptions {
    pub spacing_factor: f64,
    pub solve: LinearSolveOptions,
    pub pressure_boundary: PressureBoundary,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self { spacing_factor: 1.0, solve: LinearSolveOptions::default(), pressure_boundary: PressureBoundary::Data }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub errors: ErrorTriple,
    pub rate_u: Option<f64>,
    pub rate_p: Option<f64>,
    pub rate_p_far: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Means of the defined rates per column.
    pub average: [Option<f64>; 3],
}

/// `log(e_a/e_b) / log(n_b/n_a)`; `None` when either error is zero or not finite.
pub fn observed_rate(n_a: usize, e_a: f64, n_b: usize, e_b: f64) -> Option<f64> {
    if !(e_a > 0.0 && e_b > 0.0 && e_a.is_finite() && e_b.is_finite()) || n_a == n_b {
        return None;
    }
    Some((e_a / e_b).ln() / (n_b as f64 / n_a as f64).ln())
}

fn mean(v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let d: Vec<f64> = v.flatten().collect();
    (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
}

impl ConvergenceReport {
    /// Builds rates from errors on increasing grids.
    pub fn from_errors(errors: &[(usize, ErrorTriple)]) -> Result<Self> {
        if errors.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument("grid sizes must be strictly increasing".into()));
        }
        let rows: Vec<ConvergenceRow> = errors
            .iter()
            .enumerate()
            .map(|(k, &(n, e))| {
                let prev = k.checked_sub(1).map(|p| errors[p]);
                let rate = |f: fn(&ErrorTriple) -> f64| prev.and_then(|(m, pe)| observed_rate(m, f(&pe), n, f(&e)));
                ConvergenceRow {
                    n,
                    errors: e,
                    rate_u: rate(|t| t.err_u_inf),
                    rate_p: rate(|t| t.err_p_l2),
                    rate_p_far: rate(|t| t.err_p_far),
                }
            })
            .collect();
        let average = [
            mean(rows.iter().map(|r| r.rate_u)),
            mean(rows.iter().map(|r| r.rate_p)),
            mean(rows.iter().map(|r| r.rate_p_far)),
        ];
        Ok(Self { rows, average })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let opt = |r: Option<f64>| r.map_or_else(|| "NA".to_string(), |v| format!("{v:e}"));
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            let e = r.errors;
            writeln!(
                w,
                "{},{:e},{},{:e},{},{:e},{}",
                r.n,
                e.err_u_inf,
                opt(r.rate_u),
                e.err_p_l2,
                opt(r.rate_p),
                e.err_p_far,
                opt(r.rate_p_far)
            )?;
        }
        let [a, b, c] = self.average;
        writeln!(w, "average,,{},,{},,{}", opt(a), opt(b), opt(c))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Csv("empty input".into()))??;
        if header.trim() != CSV_HEADER {
            return Err(Error::Csv(format!("unexpected header '{}'", header.trim())));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Csv(format!("'{s}': {e}")));
        let opt = |s: &str| if s.trim() == "NA" { Ok(None) } else { num(s).map(Some) };
        let mut rows = Vec::new();
        let mut average = None;
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(Error::Csv(format!("line {}: expected 7 columns, got {}", k + 2, cols.len())));
            }
            if cols[0] == "average" {
                average = Some([opt(cols[2])?, opt(cols[4])?, opt(cols[6])?]);
                continue;
            }
            let n = cols[0].parse().map_err(|e| Error::Csv(format!("line {}: N '{}': {e}", k + 2, cols[0])))?;
            rows.push(ConvergenceRow {
                n,
                errors: ErrorTriple { err_u_inf: num(cols[1])?, err_p_l2: num(cols[3])?, err_p_far: num(cols[5])? },
                rate_u: opt(cols[2])?,
                rate_p: opt(cols[4])?,
                rate_p_far: opt(cols[6])?,
            });
        }
        let average = average.ok_or_else(|| Error::Csv("missing average row".into()))?;
        Ok(Self { rows, average })
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        writeln!(f, "{:>6} {:>12} {:>8} {:>12} {:>8} {:>12} {:>8}", "N", "|E_u|inf", "rate", "|E_p|2", "rate", "|E_p|far", "rate")?;
        for row in &self.rows {
            let e = row.errors;
            writeln!(
                f,
                "{:>6} {:>12.4e} {:>8} {:>12.4e} {:>8} {:>12.4e} {:>8}",
                row.n,
                e.err_u_inf,
                r(row.rate_u),
                e.err_p_l2,
                r(row.rate_p),
                e.err_p_far,
                r(row.rate_p_far)
            )?;
        }
        let [a, b, c] = self.average;
        write!(f, "{:>6} {:>12} {:>8} {:>12} {:>8} {:>12} {:>8}", "avg", "", r(a), "", r(b), "", r(c))
    }
}

/// Solves the example on one grid and measures its errors.
pub fn example_errors(method: Method, kernel: DeltaKernel, n: usize, opts: &StudyOptions) -> Result<ErrorTriple> {
    let mut problem = example_problem(n, kernel, opts.spacing_factor)?;
    if opts.pressure_boundary == PressureBoundary::Homogeneous {
        problem.boundary_pressure_gradient = None;
    }
    let circle = Circle::unit();
    match method {
        Method::ThreePoisson => {
            let s = solve_three_poisson(&problem, opts.solve)?;
            error_norms(&s.u, &s.v, &s.p, s.pin, &exact_eval, &circle)
        }
        Method::Mac => {
            let s = solve_mac(&problem, opts.solve)?;
            error_norms_mac(&s.u, &s.v, &s.p, s.pin, &exact_eval, &circle)
        }
    }
}

/// Runs the example on every grid in `grids` (solved in parallel) and tabulates errors and rates.
pub fn run_convergence_study(method: Method, kernel: DeltaKernel, grids: &[usize], opts: &StudyOptions) -> Result<ConvergenceReport> {
    if grids.is_empty() {
        return Err(Error::InvalidArgument("no grid sizes given".into()));
    }
    let mut sorted = grids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let errors: Vec<(usize, ErrorTriple)> = sorted
        .par_iter()
        .map(|&n| example_errors(method, kernel, n, opts).map(|e| (n, e)))
        .collect::<Result<_>>()?;
    ConvergenceReport::from_errors(&errors)
}
