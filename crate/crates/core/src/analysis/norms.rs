//! Velocity and pressure error norms against an exact solution.

use crate::error::{Error, Result};
use crate::grid::{dist_to_interface, FieldLayout, InterfaceGeometry, ScalarField};

/// Exact `(u, v, p)` evaluator.
pub type ExactFn<'a> = &'a dyn Fn(f64, f64) -> (f64, f64, f64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTriple {
    /// `sqrt(‖E_u‖∞² + ‖E_v‖∞²)`
    pub err_u_inf: f64,
    /// `sqrt(h² Σ |E_p|²)`
    pub err_p_l2: f64,
    /// `‖E_p‖∞` over points at least `√h` from the interface.
    pub err_p_far: f64,
}

impl ErrorTriple {
    pub const ZERO: ErrorTriple = ErrorTriple { err_u_inf: 0.0, err_p_l2: 0.0, err_p_far: 0.0 };
}

fn velocity_error(field: &ScalarField, exact: ExactFn, component: usize) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..field.ny() {
        for i in 0..field.nx() {
            let (x, y) = field.point(i, j);
            let e = exact(x, y);
            let ex = if component == 0 { e.0 } else { e.1 };
            worst = worst.max((ex - field.get(i, j)).abs());
        }
    }
    worst
}

/// Pressure norms with both pressures referenced to the pinned point:
/// `E = (p − p(pin)) − (P − P(pin))`.
fn pressure_error(p: &ScalarField, pin: (usize, usize), exact: ExactFn, interface: &dyn InterfaceGeometry) -> Result<(f64, f64, f64)> {
    let grid = p.grid();
    let threshold = grid.h.sqrt();
    let (px, py) = p.point(pin.0, pin.1);
    let p_ref = exact(px, py).2;
    let q_ref = p.get(pin.0, pin.1);
    let (mut sum, mut far, mut all) = (0.0, f64::NEG_INFINITY, 0.0f64);
    for j in 0..p.ny() {
        for i in 0..p.nx() {
            let (x, y) = p.point(i, j);
            let e = (exact(x, y).2 - p_ref) - (p.get(i, j) - q_ref);
            sum += e * e;
            all = all.max(e.abs());
            if dist_to_interface(x, y, interface) >= threshold {
                far = far.max(e.abs());
            }
        }
    }
    if far == f64::NEG_INFINITY {
        return Err(Error::EmptyFarField { threshold });
    }
    Ok(((grid.h * grid.h * sum).sqrt(), far, all))
}

/// Norms for node-collocated fields (three-Poisson).
pub fn error_norms(
    u: &ScalarField,
    v: &ScalarField,
    p: &ScalarField,
    pin: (usize, usize),
    exact: ExactFn,
    interface: &dyn InterfaceGeometry,
) -> Result<ErrorTriple> {
    for f in [u, v, p] {
        if f.layout() != FieldLayout::Nodes {
            return Err(Error::ShapeMismatch { expected: "node layout".into(), got: f.layout().to_string() });
        }
    }
    let eu = velocity_error(u, exact, 0);
    let ev = velocity_error(v, exact, 1);
    let (l2, far, _) = pressure_error(p, pin, exact, interface)?;
    Ok(ErrorTriple { err_u_inf: eu.hypot(ev), err_p_l2: l2, err_p_far: far })
}

/// Norms for staggered fields: faces compared at face points, pressure at centres.
pub fn error_norms_mac(
    u: &ScalarField,
    v: &ScalarField,
    p: &ScalarField,
    pin: (usize, usize),
    exact: ExactFn,
    interface: &dyn InterfaceGeometry,
) -> Result<ErrorTriple> {
    let layouts = (u.layout(), v.layout(), p.layout());
    if layouts != (FieldLayout::XFaces, FieldLayout::YFaces, FieldLayout::Centers) {
        return Err(Error::ShapeMismatch {
            expected: "xfaces, yfaces, centers".into(),
            got: format!("{}, {}, {}", layouts.0, layouts.1, layouts.2),
        });
    }
    let eu = velocity_error(u, exact, 0);
    let ev = velocity_error(v, exact, 1);
    let (l2, far, _) = pressure_error(p, pin, exact, interface)?;
    Ok(ErrorTriple { err_u_inf: eu.hypot(ev), err_p_l2: l2, err_p_far: far })
}

/// `max |E_p|` over all points, with the same pin referencing as the norms.
pub fn pressure_error_max(p: &ScalarField, pin: (usize, usize), exact: ExactFn, interface: &dyn InterfaceGeometry) -> Result<f64> {
    Ok(pressure_error(p, pin, exact, interface)?.2)
}
