//! The stationary Stokes problem with a singular interface force.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{FieldLayout, ForceDensity, GridSpec, InterfaceMarkers, ScalarField};
use crate::kernels::DeltaKernel;

/// Pointwise vector-valued evaluator `(x, y) -> (a, b)`.
pub type VectorFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// `−∇p + μΔu + G + ∫ f δ ds = 0`, `∇·u = 0` in Ω, `u = u₀` on ∂Ω.
#[derive(Clone)]
pub struct StokesProblem {
    pub grid: GridSpec,
    pub mu: f64,
    pub body_force: VectorFn,
    pub boundary_velocity: VectorFn,
    pub markers: InterfaceMarkers,
    pub force: ForceDensity,
    pub kernel: DeltaKernel,
    /// `∇p` on ∂Ω for the pressure boundary rows of the three-Poisson scheme; `None` imposes
    /// `∂p/∂n = 0`.
    pub boundary_pressure_gradient: Option<VectorFn>,
}

impl fmt::Debug for StokesProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StokesProblem")
            .field("grid", &self.grid)
            .field("mu", &self.mu)
            .field("markers", &self.markers.len())
            .field("kernel", &self.kernel)
            .field("pressure_bc", &if self.boundary_pressure_gradient.is_some() { "data" } else { "homogeneous" })
            .finish()
    }
}

pub fn zero_vector_fn() -> VectorFn {
    Arc::new(|_, _| (0.0, 0.0))
}

impl StokesProblem {
    /// Problem with no body force, no-slip walls and zero interface force.
    pub fn quiescent(grid: &GridSpec, markers: InterfaceMarkers, kernel: DeltaKernel) -> Self {
        let force = ForceDensity::zeros(markers.len());
        Self {
            grid: *grid,
            mu: 1.0,
            body_force: zero_vector_fn(),
            boundary_velocity: zero_vector_fn(),
            markers,
            force,
            kernel,
            boundary_pressure_gradient: None,
        }
    }

    pub fn with_force(&self, force: ForceDensity) -> Self {
        Self { force, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {}", self.mu)));
        }
        if self.force.len() != self.markers.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} force values", self.markers.len()),
                got: self.force.len().to_string(),
            });
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&self.markers.x) && finite(&self.markers.y) && finite(&self.force.f1) && finite(&self.force.f2)) {
            return Err(Error::InvalidArgument("non-finite marker position or force".into()));
        }
        Ok(())
    }

    /// Samples `G` on a layout; fails if any sample is not finite.
    pub fn sample_body_force(&self, layout: FieldLayout) -> Result<(ScalarField, ScalarField)> {
        let g1 = ScalarField::from_fn(&self.grid, layout, |x, y| (self.body_force)(x, y).0);
        let g2 = ScalarField::from_fn(&self.grid, layout, |x, y| (self.body_force)(x, y).1);
        if !(g1.is_finite() && g2.is_finite()) {
            return Err(Error::InvalidArgument(format!("body force is not finite on the {layout} layout")));
        }
        Ok((g1, g2))
    }

    /// Outward normal derivative of the pressure at boundary nodes (corners use the x-direction
    /// normal), or `None` for homogeneous rows.
    pub fn pressure_flux(&self) -> Result<Option<ScalarField>> {
        let Some(grad) = &self.boundary_pressure_gradient else { return Ok(None) };
        let n = self.grid.n;
        let mut out = ScalarField::zeros(&self.grid, FieldLayout::Nodes);
        for j in 0..=n {
            for i in 0..=n {
                let (nx, ny) = if i == 0 {
                    (-1.0, 0.0)
                } else if i == n {
                    (1.0, 0.0)
                } else if j == 0 {
                    (0.0, -1.0)
                } else if j == n {
                    (0.0, 1.0)
                } else {
                    continue;
                };
                let (px, py) = grad(self.grid.node_x(i), self.grid.node_y(j));
                out.set(i, j, nx * px + ny * py);
            }
        }
        if !out.is_finite() {
            return Err(Error::InvalidArgument("boundary pressure gradient is not finite".into()));
        }
        Ok(Some(out))
    }
}
