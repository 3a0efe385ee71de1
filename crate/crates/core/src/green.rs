//! Discrete Green functions of the 5-point Laplacian on a bounded node grid and their decay.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{FieldLayout, GridSpec, ScalarField};
use crate::poisson::{DirichletSolver, LinearSolveOptions, NeumannSolver, SolveMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreenBoundary {
    Dirichlet,
    Neumann,
}

impl GreenBoundary {
    pub fn name(self) -> &'static str {
        match self {
            GreenBoundary::Dirichlet => "dirichlet",
            GreenBoundary::Neumann => "neumann",
        }
    }
}

impl fmt::Display for GreenBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GreenBoundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(GreenBoundary::Dirichlet),
            "neumann" => Ok(GreenBoundary::Neumann),
            _ => Err(Error::InvalidArgument(format!("unknown boundary type '{s}' (valid: dirichlet, neumann)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteGreen {
    pub bc: GreenBoundary,
    pub center: (usize, usize),
    pub field: ScalarField,
    /// Pinned node of the Neumann system.
    pub pin: Option<(usize, usize)>,
}

fn impulse(grid: &GridSpec, l: usize, m: usize) -> Result<ScalarField> {
    if l == 0 || m == 0 || l >= grid.n || m >= grid.n {
        return Err(Error::InvalidArgument(format!(
            "center ({l}, {m}) is not an interior node of the {0}x{0} node grid",
            grid.n + 1
        )));
    }
    let mut e = ScalarField::zeros(grid, FieldLayout::Nodes);
    e.set(l, m, 1.0 / (grid.h * grid.h));
    Ok(e)
}

/// Factorized operator shared by many centres.
#[derive(Debug)]
pub enum GreenSolver {
    Dirichlet(DirichletSolver),
    Neumann(NeumannSolver),
}

impl GreenSolver {
    pub fn new(grid: &GridSpec, bc: GreenBoundary, opts: LinearSolveOptions) -> Result<Self> {
        Ok(match bc {
            GreenBoundary::Dirichlet => GreenSolver::Dirichlet(DirichletSolver::new(grid, opts)?),
            GreenBoundary::Neumann => {
                let opts = LinearSolveOptions { method: SolveMethod::DirectSparse, ..opts };
                GreenSolver::Neumann(NeumannSolver::new(grid, NeumannSolver::DEFAULT_PIN, opts)?)
            }
        })
    }

    pub fn green(&self, l: usize, m: usize) -> Result<DiscreteGreen> {
        match self {
            GreenSolver::Dirichlet(s) => {
                let e = impulse(s.grid(), l, m)?;
                let zero = ScalarField::zeros(s.grid(), FieldLayout::Nodes);
                let (field, _) = s.solve(&e, &zero)?;
                Ok(DiscreteGreen { bc: GreenBoundary::Dirichlet, center: (l, m), field, pin: None })
            }
            GreenSolver::Neumann(s) => {
                let e = impulse(s.grid(), l, m)?;
                let (field, _) = s.solve(&e)?;
                Ok(DiscreteGreen { bc: GreenBoundary::Neumann, center: (l, m), field, pin: Some(s.pin()) })
            }
        }
    }
}

pub fn dirichlet_green(grid: &GridSpec, l: usize, m: usize, opts: LinearSolveOptions) -> Result<DiscreteGreen> {
    GreenSolver::new(grid, GreenBoundary::Dirichlet, opts)?.green(l, m)
}

pub fn neumann_green(grid: &GridSpec, l: usize, m: usize, opts: LinearSolveOptions) -> Result<DiscreteGreen> {
    GreenSolver::new(grid, GreenBoundary::Neumann, opts)?.green(l, m)
}

impl DiscreteGreen {
    /// Largest violation of the defining rows: `A_h G = e_lm/h²` at interior nodes, plus the
    /// boundary rows (`G = 0`, or the forward-difference flux rows away from the pin).
    pub fn identity_residual(&self) -> f64 {
        let g = &self.field;
        let grid = g.grid();
        let (n, h) = (grid.n, grid.h);
        let mut worst = 0.0f64;
        for j in 1..n {
            for i in 1..n {
                let lap = (g.get(i - 1, j) + g.get(i + 1, j) + g.get(i, j - 1) + g.get(i, j + 1) - 4.0 * g.get(i, j)) / (h * h);
                let target = if (i, j) == self.center { 1.0 / (h * h) } else { 0.0 };
                worst = worst.max((lap - target).abs());
            }
        }
        for j in 0..=n {
            for i in 0..=n {
                if !(i == 0 || j == 0 || i == n || j == n) || Some((i, j)) == self.pin {
                    continue;
                }
                let r = match self.bc {
                    GreenBoundary::Dirichlet => g.get(i, j),
                    GreenBoundary::Neumann => {
                        let (pi, pj) = if i == 0 {
                            (1, j)
                        } else if i == n {
                            (n - 1, j)
                        } else if j == 0 {
                            (i, 1)
                        } else {
                            (i, n - 1)
                        };
                        (g.get(i, j) - g.get(pi, pj)) / h
                    }
                };
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// Central-difference gradient magnitude at interior nodes (zero on the boundary).
    pub fn gradient_magnitude(&self) -> ScalarField {
        let g = &self.field;
        let grid = *g.grid();
        let inv = 0.5 / grid.h;
        let mut out = ScalarField::zeros(&grid, FieldLayout::Nodes);
        for j in 1..grid.n {
            for i in 1..grid.n {
                let gx = (g.get(i + 1, j) - g.get(i - 1, j)) * inv;
                let gy = (g.get(i, j + 1) - g.get(i, j - 1)) * inv;
                out.set(i, j, gx.hypot(gy));
            }
        }
        out
    }

    pub fn center_point(&self) -> (f64, f64) {
        let grid = self.field.grid();
        (grid.node_x(self.center.0), grid.node_y(self.center.1))
    }
}

/// Sampling choices for [`verify_decay`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    /// Nodes within this fraction of `dist(center, ∂Ω)` fit the gradient constant `C₁`.
    pub near_fraction: f64,
    /// Nodes closer than this to ∂Ω are excluded from the gradient checks.
    pub boundary_margin: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { near_fraction: 0.5, boundary_margin: 0.25 }
    }
}

/// Smallest constants making `G ≤ 1/4 + log(d² + h²)/16 + C₀h` hold at every node and
/// `|∇_h G| ≤ C₁/(d + h) + C₂h` hold at the sampled nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Largest `G − 1/4 − log(d² + h²)/16` over all nodes (negative when the bound has slack).
    pub envelope_margin: f64,
    pub near_radius: f64,
    pub samples: usize,
}

pub fn verify_decay(green: &DiscreteGreen, opts: DecayOptions) -> DecayReport {
    let g = &green.field;
    let grid = *g.grid();
    let (n, h) = (grid.n, grid.h);
    let (cx, cy) = green.center_point();
    let near_radius = opts.near_fraction * grid.dist_to_boundary(cx, cy);
    let dist = |i: usize, j: usize| (grid.node_x(i) - cx).hypot(grid.node_y(j) - cy);

    let mut envelope_margin = f64::NEG_INFINITY;
    for j in 0..=n {
        for i in 0..=n {
            let d = dist(i, j);
            let excess = g.get(i, j) - 0.25 - (d * d + h * h).ln() / 16.0;
            envelope_margin = envelope_margin.max(excess);
        }
    }
    let c0 = envelope_margin.max(0.0) / h;

    let grad = green.gradient_magnitude();
    let mut c1 = 0.0f64;
    let mut sampled = Vec::new();
    for j in 1..n {
        for i in 1..n {
            let (x, y) = (grid.node_x(i), grid.node_y(j));
            if grid.dist_to_boundary(x, y) < opts.boundary_margin {
                continue;
            }
            let d = dist(i, j);
            if d <= near_radius {
                c1 = c1.max(grad.get(i, j) * (d + h));
            }
            sampled.push((grad.get(i, j), d));
        }
    }
    let c2 = sampled
        .iter()
        .map(|&(gm, d)| (gm - c1 / (d + h)).max(0.0) / h)
        .fold(0.0, f64::max);
    DecayReport { c0, c1, c2, envelope_margin, near_radius, samples: sampled.len() }
}

/// Two interior node indices.
pub type NodePair = ((usize, usize), (usize, usize));

/// Largest `|G(x_ij; x_lm) − G(x_lm; x_ij)|` over the given pairs of interior nodes.
pub fn dirichlet_symmetry_defect(
    grid: &GridSpec,
    pairs: &[NodePair],
    opts: LinearSolveOptions,
) -> Result<f64> {
    let solver = GreenSolver::new(grid, GreenBoundary::Dirichlet, opts)?;
    let mut worst = 0.0f64;
    for &(a, b) in pairs {
        let ga = solver.green(a.0, a.1)?;
        let gb = solver.green(b.0, b.1)?;
        worst = worst.max((ga.field.get(b.0, b.1) - gb.field.get(a.0, a.1)).abs());
    }
    Ok(worst)
}

/// Relative disagreement between two Green functions with the same centre at its 8 neighbours,
/// `max |a − b| / |a|`. With `gauge_free`, values are taken relative to the centre value, which
/// removes the additive constant that the Neumann pin fixes.
pub fn neighbour_agreement(a: &DiscreteGreen, b: &DiscreteGreen, gauge_free: bool) -> f64 {
    let (l, m) = a.center;
    let (ca, cb) = if gauge_free { (a.field.get(l, m), b.field.get(l, m)) } else { (0.0, 0.0) };
    let mut worst = 0.0f64;
    for dj in -1i64..=1 {
        for di in -1i64..=1 {
            if di == 0 && dj == 0 {
                continue;
            }
            let (i, j) = ((l as i64 + di) as usize, (m as i64 + dj) as usize);
            let va = a.field.get(i, j) - ca;
            let vb = b.field.get(i, j) - cb;
            worst = worst.max((va - vb).abs() / va.abs());
        }
    }
    worst
}
