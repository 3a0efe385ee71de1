//! Command-line front end. Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::convergence::{run_convergence_study, Method, PressureBoundary, StudyOptions};
use crate::analysis::diagnostics::{boundary_layer_sum_check, truncation_diagnostics, PiecewiseScalar};
use crate::analysis::exact::{exact_eval, example_problem};
use crate::analysis::norms::{error_norms, error_norms_mac};
use crate::error::{Error, Result};
use crate::green::{verify_decay, DecayOptions, GreenBoundary, GreenSolver};
use crate::grid::{Circle, GridSpec};
use crate::kernels::DeltaKernel;
use crate::mac::solve_mac;
use crate::poisson::{LinearSolveOptions, SolveMethod};
use crate::three_poisson::solve_three_poisson;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ibstokes", version, about = "Immersed boundary Stokes solvers and grid-refinement studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid-refinement study on the circular-interface example; writes a CSV report.
    Converge(ConvergeArgs),
    /// Solve the example on one grid and dump the fields.
    Solve(SolveArgs),
    /// Discrete Green function of the 5-point Laplacian on [−1, 1]².
    Green(GreenArgs),
    /// Truncation-error classes and the boundary-layer sum on one grid.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    ThreePoisson,
    Mac,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::ThreePoisson => Method::ThreePoisson,
            MethodArg::Mac => Method::Mac,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Hat,
    Cosine,
    Delta1,
}

impl From<KernelArg> for DeltaKernel {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Hat => DeltaKernel::Hat,
            KernelArg::Cosine => DeltaKernel::Cosine,
            KernelArg::Delta1 => DeltaKernel::Delta1,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PressureBcArg {
    /// Exact normal pressure gradient on the box walls.
    Data,
    /// Zero normal pressure gradient.
    Homogeneous,
}

impl From<PressureBcArg> for PressureBoundary {
    fn from(p: PressureBcArg) -> Self {
        match p {
            PressureBcArg::Data => PressureBoundary::Data,
            PressureBcArg::Homogeneous => PressureBoundary::Homogeneous,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BcArg {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    /// Sparse LU with iterative refinement.
    Direct,
    /// Sine transform (Dirichlet solves only).
    Fast,
}

#[derive(Debug, Args)]
pub struct SolveCommon {
    /// Relative residual tolerance for every linear solve.
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    /// Maximum number of refinement steps per solve.
    #[arg(long, default_value_t = 5)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Direct)]
    pub solver: SolverArg,
}

impl SolveCommon {
    fn options(&self) -> Result<LinearSolveOptions> {
        let method = match self.solver {
            SolverArg::Direct => SolveMethod::DirectSparse,
            SolverArg::Fast => SolveMethod::FastTransform,
        };
        let opts = LinearSolveOptions { method, tol: self.tol, max_iter: self.max_iter };
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::ThreePoisson)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = KernelArg::Cosine)]
    pub kernel: KernelArg,
    /// Comma-separated grid sizes, strictly increasing.
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64, 128, 256])]
    pub grids: Vec<usize>,
    /// Output CSV path.
    #[arg(long, default_value = "convergence.csv")]
    pub out: PathBuf,
    /// Marker spacing as a multiple of h.
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    #[arg(long = "pressure-bc", value_enum, default_value_t = PressureBcArg::Data)]
    pub pressure_bc: PressureBcArg,
    #[command(flatten)]
    pub solve: SolveCommon,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::ThreePoisson)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = KernelArg::Cosine)]
    pub kernel: KernelArg,
    #[arg(long)]
    pub n: usize,
    /// Output prefix; writes `<prefix>_u.csv`, `<prefix>_v.csv` and `<prefix>_p.csv`.
    #[arg(long, default_value = "solution")]
    pub out: String,
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    #[arg(long = "pressure-bc", value_enum, default_value_t = PressureBcArg::Data)]
    pub pressure_bc: PressureBcArg,
    #[command(flatten)]
    pub solve: SolveCommon,
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    #[arg(long, value_enum)]
    pub bc: BcArg,
    #[arg(long)]
    pub n: usize,
    /// Source point `x,y`; snapped to the nearest interior node.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.28, -0.2])]
    pub center: Vec<f64>,
    #[arg(long, default_value = "green.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub solve: SolveCommon,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub n: usize,
    /// Half-width of the boundary layer in grid spacings.
    #[arg(long, default_value_t = 2.0)]
    pub layer_width: f64,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidGrid(_) => Failure::Usage(e.to_string()),
            e => Failure::Runtime(e),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Converge(a) => cmd_converge(&a, out),
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Green(a) => cmd_green(&a, out),
        Command::Diagnose(a) => cmd_diagnose(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Runtime(Error::from(e))
}

fn check_grids(grids: &[usize], err_out: &mut dyn Write) -> CmdResult {
    if grids.is_empty() {
        return Err(Failure::Usage("--grids is empty".into()));
    }
    if let Some(&n) = grids.iter().find(|&&n| n < 4) {
        return Err(Failure::Usage(format!("grid size {n} is below the minimum of 4")));
    }
    for w in grids.windows(2) {
        if w[1] <= w[0] {
            return Err(Failure::Usage(format!("grid sizes must be strictly increasing ({} then {})", w[0], w[1])));
        }
        if w[1] % w[0] != 0 {
            return Err(Failure::Usage(format!("grid size {} does not divide {}", w[0], w[1])));
        }
        if w[1] != 2 * w[0] {
            let _ = writeln!(err_out, "warning: {} -> {} is not a doubling", w[0], w[1]);
        }
    }
    Ok(())
}

fn study_options(spacing: f64, bc: PressureBcArg, solve: &SolveCommon) -> std::result::Result<StudyOptions, Failure> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Failure::Usage(format!("--spacing must be positive, got {spacing}")));
    }
    Ok(StudyOptions { spacing_factor: spacing, solve: solve.options()?, pressure_boundary: bc.into() })
}

fn cmd_converge(a: &ConvergeArgs, out: &mut dyn Write) -> CmdResult {
    check_grids(&a.grids, out)?;
    let opts = study_options(a.spacing, a.pressure_bc, &a.solve)?;
    let method: Method = a.method.into();
    let kernel: DeltaKernel = a.kernel.into();
    let start = Instant::now();
    let report = run_convergence_study(method, kernel, &a.grids, &opts)?;
    let file = File::create(&a.out).map_err(io)?;
    let mut w = BufWriter::new(file);
    report.write_csv(&mut w)?;
    w.flush().map_err(io)?;
    writeln!(out, "method {method}, kernel {kernel}").map_err(io)?;
    writeln!(out, "{report}").map_err(io)?;
    writeln!(out, "wrote {} ({:.2} s)", a.out.display(), start.elapsed().as_secs_f64()).map_err(io)?;
    Ok(())
}

fn write_field(path: &str, field: &crate::grid::ScalarField) -> CmdResult {
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    field.write_csv(&mut w)?;
    w.flush().map_err(io)
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CmdResult {
    if a.n < 4 {
        return Err(Failure::Usage(format!("--n must be at least 4, got {}", a.n)));
    }
    let opts = study_options(a.spacing, a.pressure_bc, &a.solve)?;
    let mut problem = example_problem(a.n, a.kernel.into(), opts.spacing_factor)?;
    if opts.pressure_boundary == PressureBoundary::Homogeneous {
        problem.boundary_pressure_gradient = None;
    }
    let circle = Circle::unit();
    let (u, v, p, errors) = match a.method {
        MethodArg::ThreePoisson => {
            let s = solve_three_poisson(&problem, opts.solve)?;
            let e = error_norms(&s.u, &s.v, &s.p, s.pin, &exact_eval, &circle)?;
            writeln!(out, "pressure pinned at node {:?}", s.pin).map_err(io)?;
            (s.u, s.v, s.p, e)
        }
        MethodArg::Mac => {
            let s = solve_mac(&problem, opts.solve)?;
            let e = error_norms_mac(&s.u, &s.v, &s.p, s.pin, &exact_eval, &circle)?;
            writeln!(out, "pressure pinned at cell {:?}; max |div u| = {:.3e}", s.pin, s.divergence_max).map_err(io)?;
            (s.u, s.v, s.p, e)
        }
    };
    for (suffix, f) in [("u", &u), ("v", &v), ("p", &p)] {
        write_field(&format!("{}_{suffix}.csv", a.out), f)?;
    }
    writeln!(
        out,
        "N = {}: |E_u|inf = {:.4e}, |E_p|2 = {:.4e}, |E_p|far = {:.4e}",
        a.n, errors.err_u_inf, errors.err_p_l2, errors.err_p_far
    )
    .map_err(io)?;
    Ok(())
}

fn cmd_green(a: &GreenArgs, out: &mut dyn Write) -> CmdResult {
    if a.n < 4 {
        return Err(Failure::Usage(format!("--n must be at least 4, got {}", a.n)));
    }
    let &[x, y] = a.center.as_slice() else {
        return Err(Failure::Usage(format!("--center takes x,y; got {} values", a.center.len())));
    };
    let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, a.n)?;
    if !(x > grid.a && x < grid.b && y > grid.c && y < grid.d) {
        return Err(Failure::Usage(format!("center ({x}, {y}) lies outside the open domain (-1, 1)^2")));
    }
    let (l, m) = grid.nearest_node(x, y);
    if l == 0 || m == 0 || l == a.n || m == a.n {
        return Err(Failure::Usage(format!("center ({x}, {y}) snaps to boundary node ({l}, {m})")));
    }
    let bc = match a.bc {
        BcArg::Dirichlet => GreenBoundary::Dirichlet,
        BcArg::Neumann => GreenBoundary::Neumann,
    };
    let solver = GreenSolver::new(&grid, bc, a.solve.options()?)?;
    let g = solver.green(l, m)?;
    let mut w = BufWriter::new(File::create(&a.out).map_err(io)?);
    g.field.write_csv(&mut w)?;
    w.flush().map_err(io)?;
    let (cx, cy) = g.center_point();
    let report = verify_decay(&g, DecayOptions::default());
    writeln!(out, "{bc} Green function, N = {}, center node ({l}, {m}) at ({cx:.4}, {cy:.4})", a.n).map_err(io)?;
    if let Some(pin) = g.pin {
        writeln!(out, "pinned node {pin:?} (G = 0 there; the pin absorbs the net source)").map_err(io)?;
    }
    writeln!(out, "defining-identity residual {:.3e} (tol {:.1e})", g.identity_residual(), a.solve.tol).map_err(io)?;
    writeln!(
        out,
        "decay constants: C0 = {:.4}, C1 = {:.4}, C2 = {:.4} (envelope margin {:.4}, {} samples)",
        report.c0, report.c1, report.c2, report.envelope_margin, report.samples
    )
    .map_err(io)?;
    writeln!(out, "wrote {}", a.out.display()).map_err(io)?;
    Ok(())
}

fn cmd_diagnose(a: &DiagnoseArgs, out: &mut dyn Write) -> CmdResult {
    if a.n < 16 {
        return Err(Failure::Usage(format!("--n must be at least 16 for a nonempty far-field set, got {}", a.n)));
    }
    if !(a.layer_width > 0.0 && a.layer_width.is_finite()) {
        return Err(Failure::Usage(format!("--layer-width must be positive, got {}", a.layer_width)));
    }
    let grid = GridSpec::example(a.n)?;
    writeln!(out, "truncation error of the pressure rows, N = {}", a.n).map_err(io)?;
    writeln!(out, "{:<14} {:>8} {:>12} {:>8} {:>12} {:>8} {:>12}", "pressure", "regular", "max|T|", "irreg.", "max|T|", "bdry", "max|T|")
        .map_err(io)?;
    for (name, field) in [("example", PiecewiseScalar::example_pressure()), ("manufactured", PiecewiseScalar::manufactured_pressure())] {
        let t = truncation_diagnostics(&grid, &field);
        writeln!(
            out,
            "{:<14} {:>8} {:>12.4e} {:>8} {:>12.4e} {:>8} {:>12.4e}",
            name, t.regular_count, t.regular_max, t.irregular_count, t.irregular_max, t.boundary_count, t.boundary_max
        )
        .map_err(io)?;
    }
    writeln!(out, "boundary-layer sum, layer half-width {} h", a.layer_width).map_err(io)?;
    let q_one: &dyn Fn(f64, f64) -> f64 = &|_, _| 1.0;
    let q_y: &dyn Fn(f64, f64) -> f64 = &|_, y| y;
    for (name, q, target) in [("Q = 1", q_one, 0.0), ("Q = y", q_y, -PI / 4.0)] {
        let s = boundary_layer_sum_check(&grid, q, a.layer_width);
        writeln!(
            out,
            "{name}: lhs = {:.6}, rhs = {:.6} (analytic {:.6}), gap = {:.3e}",
            s.lhs, s.rhs, target, s.gap
        )
        .map_err(io)?;
    }
    Ok(())
}
