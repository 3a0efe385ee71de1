//! Three-Poisson IB solver on the node grid: a pinned Neumann pressure solve followed by two
//! Dirichlet velocity solves.

use crate::error::{Error, Result};
use crate::grid::{FieldLayout, ScalarField};
use crate::kernels::spread_forces;
use crate::poisson::{DirichletSolver, LinearSolveOptions, NeumannSolver, SolveMethod};
pub use crate::problem::StokesProblem;

#[derive(Debug, Clone)]
pub struct ThreePoissonSolution {
    pub u: ScalarField,
    pub v: ScalarField,
    pub p: ScalarField,
    pub pin: (usize, usize),
    /// Backward errors of the pressure, `U` and `V` solves.
    pub residuals: [f64; 3],
}

/// `(G¹ + F¹, G² + F²)` on the node layout.
pub fn total_node_force(problem: &StokesProblem) -> Result<(ScalarField, ScalarField)> {
    problem.validate()?;
    let (g1, g2) = problem.sample_body_force(FieldLayout::Nodes)?;
    let (f1, f2) = spread_forces(&problem.grid, FieldLayout::Nodes, &problem.markers, &problem.force, problem.kernel)?;
    Ok((g1.zip_with(&f1, |a, b| a + b)?, g2.zip_with(&f2, |a, b| a + b)?))
}

/// Central-difference divergence `D^x a + D^y b` at interior nodes; zero on the boundary.
pub fn discrete_divergence_node(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    for f in [a, b] {
        if f.layout() != FieldLayout::Nodes {
            return Err(Error::ShapeMismatch { expected: "node layout".into(), got: f.layout().to_string() });
        }
    }
    if a.grid() != b.grid() {
        return Err(Error::ShapeMismatch {
            expected: format!("N = {}", a.grid().n),
            got: format!("N = {}", b.grid().n),
        });
    }
    let grid = *a.grid();
    let inv = 0.5 / grid.h;
    let mut out = ScalarField::zeros(&grid, FieldLayout::Nodes);
    for j in 1..grid.n {
        for i in 1..grid.n {
            let d = (a.get(i + 1, j) - a.get(i - 1, j)) * inv + (b.get(i, j + 1) - b.get(i, j - 1)) * inv;
            out.set(i, j, d);
        }
    }
    Ok(out)
}

/// Right-hand side of the pressure equation: `D^x(G¹+F¹) + D^y(G²+F²)` at interior nodes.
pub fn assemble_pressure_rhs(problem: &StokesProblem) -> Result<ScalarField> {
    let (t1, t2) = total_node_force(problem)?;
    discrete_divergence_node(&t1, &t2)
}

pub fn solve_three_poisson(problem: &StokesProblem, opts: LinearSolveOptions) -> Result<ThreePoissonSolution> {
    opts.validate()?;
    let grid = problem.grid;
    let n = grid.n;
    let (t1, t2) = total_node_force(problem)?;
    let rhs = discrete_divergence_node(&t1, &t2)?;

    let neumann_opts = LinearSolveOptions { method: SolveMethod::DirectSparse, ..opts };
    let pin = NeumannSolver::DEFAULT_PIN;
    let flux = problem.pressure_flux()?;
    let (p, p_stats) = NeumannSolver::new(&grid, pin, neumann_opts)?.solve_with_flux(&rhs, flux.as_ref())?;

    // μΔU = D^x P − (G¹ + F¹), μΔV = D^y P − (G² + F²)
    let inv = 0.5 / grid.h;
    let mut ru = ScalarField::zeros(&grid, FieldLayout::Nodes);
    let mut rv = ScalarField::zeros(&grid, FieldLayout::Nodes);
    for j in 1..n {
        for i in 1..n {
            let px = (p.get(i + 1, j) - p.get(i - 1, j)) * inv;
            let py = (p.get(i, j + 1) - p.get(i, j - 1)) * inv;
            ru.set(i, j, (px - t1.get(i, j)) / problem.mu);
            rv.set(i, j, (py - t2.get(i, j)) / problem.mu);
        }
    }
    let mut bu = ScalarField::zeros(&grid, FieldLayout::Nodes);
    let mut bv = ScalarField::zeros(&grid, FieldLayout::Nodes);
    for j in 0..=n {
        for i in 0..=n {
            if i == 0 || j == 0 || i == n || j == n {
                let (x, y) = (grid.node_x(i), grid.node_y(j));
                let (ub, vb) = (problem.boundary_velocity)(x, y);
                bu.set(i, j, ub);
                bv.set(i, j, vb);
            }
        }
    }
    if !(bu.is_finite() && bv.is_finite()) {
        return Err(Error::InvalidArgument("boundary velocity is not finite".into()));
    }
    let dirichlet = DirichletSolver::new(&grid, opts)?;
    let (ur, vr) = rayon::join(|| dirichlet.solve(&ru, &bu), || dirichlet.solve(&rv, &bv));
    let (u, u_stats) = ur?;
    let (v, v_stats) = vr?;
    Ok(ThreePoissonSolution {
        u,
        v,
        p,
        pin,
        residuals: [p_stats.relative_residual, u_stats.relative_residual, v_stats.relative_residual],
    })
}
