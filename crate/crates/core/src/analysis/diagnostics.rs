//! Truncation-error classes of the pressure equation and the boundary-layer cancellation sum.

use crate::analysis::exact::{circle_quadrature, exact_jumps, exact_pressure};
use crate::grid::{Circle, GridSpec};

/// Scalar field smooth on each side of a circle, with its per-side Laplacian.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseScalar {
    pub circle: Circle,
    pub inside: fn(f64, f64) -> f64,
    pub outside: fn(f64, f64) -> f64,
    pub lap_inside: fn(f64, f64) -> f64,
    pub lap_outside: fn(f64, f64) -> f64,
}

impl PiecewiseScalar {
    pub fn is_inside(&self, x: f64, y: f64) -> bool {
        (x - self.circle.cx).hypot(y - self.circle.cy) <= self.circle.radius
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        if self.is_inside(x, y) {
            (self.inside)(x, y)
        } else {
            (self.outside)(x, y)
        }
    }

    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        if self.is_inside(x, y) {
            (self.lap_inside)(x, y)
        } else {
            (self.lap_outside)(x, y)
        }
    }

    /// The example's pressure (`xy/2` inside, `−xy/2` outside; harmonic on both sides).
    pub fn example_pressure() -> Self {
        Self {
            circle: Circle::unit(),
            inside: |x, y| 0.5 * x * y,
            outside: |x, y| -0.5 * x * y,
            lap_inside: |_, _| 0.0,
            lap_outside: |_, _| 0.0,
        }
    }

    /// A non-polynomial pressure with a jump on the unit circle, so regular nodes carry a
    /// nonzero `O(h²)` truncation error.
    pub fn manufactured_pressure() -> Self {
        Self {
            circle: Circle::unit(),
            inside: |x, y| x.exp() * y.cos(),
            outside: |x, y| -0.5 * x * y + x.sin() * y.cos(),
            lap_inside: |_, _| 0.0,
            lap_outside: |x, y| -2.0 * x.sin() * y.cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    /// Interior node whose 5-point stencil lies on one side of the interface.
    Regular,
    /// Interior node whose stencil straddles the interface.
    Irregular,
    Boundary,
}

pub fn classify_node(grid: &GridSpec, field: &PiecewiseScalar, i: usize, j: usize) -> NodeClass {
    let n = grid.n;
    if i == 0 || j == 0 || i == n || j == n {
        return NodeClass::Boundary;
    }
    let side = |i: usize, j: usize| field.is_inside(grid.node_x(i), grid.node_y(j));
    let s = side(i, j);
    if [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)].iter().all(|&(a, b)| side(a, b) == s) {
        NodeClass::Regular
    } else {
        NodeClass::Irregular
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub n: usize,
    pub regular_max: f64,
    pub irregular_max: f64,
    pub boundary_max: f64,
    pub regular_count: usize,
    pub irregular_count: usize,
    pub boundary_count: usize,
}

/// Truncation error of the pressure rows for an exact piecewise pressure.
///
/// Interior: `T = Δ_h p − Δp` (Δp from the node's own side). Boundary rows, e.g. `i = 0`:
/// `T = Δp − (p_{1,j} − p_{0,j})/h`; corners use the x-direction row.
pub fn truncation_diagnostics(grid: &GridSpec, field: &PiecewiseScalar) -> TruncationReport {
    let n = grid.n;
    let h = grid.h;
    let p = |i: usize, j: usize| field.value(grid.node_x(i), grid.node_y(j));
    let mut rep = TruncationReport {
        n,
        regular_max: 0.0,
        irregular_max: 0.0,
        boundary_max: 0.0,
        regular_count: 0,
        irregular_count: 0,
        boundary_count: 0,
    };
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = (grid.node_x(i), grid.node_y(j));
            let lap = field.laplacian(x, y);
            match classify_node(grid, field, i, j) {
                NodeClass::Boundary => {
                    let diff = if i == 0 {
                        p(1, j) - p(0, j)
                    } else if i == n {
                        p(n, j) - p(n - 1, j)
                    } else if j == 0 {
                        p(i, 1) - p(i, 0)
                    } else {
                        p(i, n) - p(i, n - 1)
                    };
                    rep.boundary_max = rep.boundary_max.max((lap - diff / h).abs());
                    rep.boundary_count += 1;
                }
                class => {
                    let lap_h = (p(i - 1, j) + p(i + 1, j) + p(i, j - 1) + p(i, j + 1) - 4.0 * p(i, j)) / (h * h);
                    let t = (lap_h - lap).abs();
                    if class == NodeClass::Regular {
                        rep.regular_max = rep.regular_max.max(t);
                        rep.regular_count += 1;
                    } else {
                        rep.irregular_max = rep.irregular_max.max(t);
                        rep.irregular_count += 1;
                    }
                }
            }
        }
    }
    rep
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLayerSum {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Compares `Σ h² (p(x_{i+1},y_j) − p(x_{i−1},y_j))/(2h) Q(x_ij)` over nodes within
/// `layer_width · h` of the unit circle against `∫_Γ [p] cos θ Q ds`, for the example pressure.
pub fn boundary_layer_sum_check(grid: &GridSpec, q: &dyn Fn(f64, f64) -> f64, layer_width: f64) -> BoundaryLayerSum {
    let circle = Circle::unit();
    let h = grid.h;
    let mut lhs = 0.0;
    for j in 0..=grid.n {
        for i in 1..grid.n {
            let (x, y) = (grid.node_x(i), grid.node_y(j));
            if circle.signed_distance(x, y).abs() > layer_width * h {
                continue;
            }
            let dpx = (exact_pressure(grid.node_x(i + 1), y) - exact_pressure(grid.node_x(i - 1), y)) / (2.0 * h);
            lhs += h * h * dpx * q(x, y);
        }
    }
    let rhs = circle_quadrature(4096, |t| exact_jumps(t).p * t.cos() * q(t.cos(), t.sin()));
    BoundaryLayerSum { lhs, rhs, gap: (lhs - rhs).abs() }
}
