//! Piecewise-polynomial Stokes solution with a unit-circle interface on [−2, 2]², μ = 1.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::grid::{make_circle_markers, Circle, ForceDensity, GridSpec};
use crate::kernels::DeltaKernel;
use crate::problem::StokesProblem;

/// Nodes this close to the circle take the inside value of the body force.
pub const INTERFACE_TIE: f64 = 1e-12;

/// `(u, v, p)` from the branch valid for `r < 1`.
pub fn inside_branch(x: f64, y: f64) -> (f64, f64, f64) {
    let s = x * x + y * y - 1.0;
    (0.5 * y * s, -0.5 * x * s, 0.5 * x * y)
}

/// `(u, v, p)` from the branch valid for `r > 1`.
pub fn outside_branch(x: f64, y: f64) -> (f64, f64, f64) {
    let s = x * x + y * y - 1.0;
    let y2 = y * y;
    (
        0.5 * y * (x.powi(4) - y2 * y2 + 2.0 * y2 - 1.0),
        -x.powi(3) * s,
        -0.5 * x * y,
    )
}

/// Exact `(u, v, p)`; the inside formulas apply for `r ≤ 1`.
pub fn exact_eval(x: f64, y: f64) -> (f64, f64, f64) {
    if x.hypot(y) <= 1.0 {
        inside_branch(x, y)
    } else {
        outside_branch(x, y)
    }
}

pub fn exact_pressure(x: f64, y: f64) -> f64 {
    exact_eval(x, y).2
}

/// `∇p` from the branch that contains `(x, y)`.
pub fn exact_pressure_gradient(x: f64, y: f64) -> (f64, f64) {
    if x.hypot(y) <= 1.0 {
        (0.5 * y, 0.5 * x)
    } else {
        (-0.5 * y, -0.5 * x)
    }
}

/// `G = ∇p − Δu` per side.
pub fn exact_body_force(x: f64, y: f64) -> (f64, f64) {
    if x.hypot(y) - 1.0 <= INTERFACE_TIE {
        (-3.5 * y, 4.5 * x)
    } else {
        (
            -0.5 * y - 6.0 * x * x * y + 10.0 * y.powi(3) - 6.0 * y,
            -0.5 * x + 22.0 * x.powi(3) + 6.0 * x * y * y - 6.0 * x,
        )
    }
}

/// Interface jumps (outside minus inside) and the force density at angle θ on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jumps {
    pub p: f64,
    /// `[∂u/∂n]`
    pub un: f64,
    /// `[∂v/∂n]`
    pub vn: f64,
    pub fhat1: f64,
    pub fhat2: f64,
    pub f1: f64,
    pub f2: f64,
}

pub fn exact_jumps(theta: f64) -> Jumps {
    let (s, c) = theta.sin_cos();
    let c2 = (2.0 * theta).cos();
    let p = -c * s;
    let un = s * c2;
    let vn = -c * c2;
    Jumps { p, un, vn, fhat1: p, fhat2: c2, f1: p * c - un, f2: p * s - vn }
}

/// The example posed on an `N × N` grid with markers spaced `spacing_factor · h` apart.
///
/// The exact pressure gradient is supplied on ∂Ω; drop it to get homogeneous pressure rows.
pub fn example_problem(n: usize, kernel: DeltaKernel, spacing_factor: f64) -> Result<StokesProblem> {
    let grid = GridSpec::example(n)?;
    let markers = make_circle_markers(&Circle::unit(), grid.h, spacing_factor)?;
    let (f1, f2): (Vec<f64>, Vec<f64>) = markers
        .theta
        .iter()
        .map(|&t| {
            let j = exact_jumps(t);
            (j.f1, j.f2)
        })
        .unzip();
    let force = ForceDensity::from_cartesian(&markers, f1, f2)?;
    let problem = StokesProblem {
        grid,
        mu: 1.0,
        body_force: Arc::new(exact_body_force),
        boundary_velocity: Arc::new(|x, y| {
            let (u, v, _) = exact_eval(x, y);
            (u, v)
        }),
        markers,
        force,
        kernel,
        boundary_pressure_gradient: Some(Arc::new(exact_pressure_gradient)),
    };
    problem.validate()?;
    Ok(problem)
}

/// `∫₀^{2π} q(θ) dθ` on the unit circle by the periodic trapezoid rule.
pub fn circle_quadrature(samples: usize, q: impl Fn(f64) -> f64) -> f64 {
    let dt = 2.0 * PI / samples as f64;
    (0..samples).map(|k| q(k as f64 * dt)).sum::<f64>() * dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand::rngs::StdRng;

    // Richardson-extrapolated one-sided derivative of `f` along `(dx, dy)` from `(x, y)`.
    fn one_sided(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, dx: f64, dy: f64) -> f64 {
        let d = |e: f64| (-3.0 * f(x, y) + 4.0 * f(x + e * dx, y + e * dy) - f(x + 2.0 * e * dx, y + 2.0 * e * dy)) / (2.0 * e);
        let e = 1e-3;
        (4.0 * d(e / 2.0) - d(e)) / 3.0
    }

    fn jump_oracle(theta: f64) -> (f64, f64, f64) {
        let (s, c) = theta.sin_cos();
        let out_u = one_sided(|x, y| outside_branch(x, y).0, c, s, c, s);
        let in_u = -one_sided(|x, y| inside_branch(x, y).0, c, s, -c, -s);
        let out_v = one_sided(|x, y| outside_branch(x, y).1, c, s, c, s);
        let in_v = -one_sided(|x, y| inside_branch(x, y).1, c, s, -c, -s);
        let p = outside_branch(c, s).2 - inside_branch(c, s).2;
        (p, out_u - in_u, out_v - in_v)
    }

    fn laplacian_oracle(f: impl Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
        let l = |e: f64| (f(x + e, y) + f(x - e, y) + f(x, y + e) + f(x, y - e) - 4.0 * f(x, y)) / (e * e);
        let e = 1e-2;
        (4.0 * l(e / 2.0) - l(e)) / 3.0
    }

    fn gradient_oracle(f: impl Fn(f64, f64) -> f64, x: f64, y: f64) -> (f64, f64) {
        let e = 1e-5;
        ((f(x + e, y) - f(x - e, y)) / (2.0 * e), (f(x, y + e) - f(x, y - e)) / (2.0 * e))
    }

    #[test]
    fn point_values() {
        assert_eq!(exact_eval(0.0, 0.0), (0.0, 0.0, 0.0));
        assert_eq!(exact_eval(1.5, 1.0).2, -0.75);
        let (u, _, p) = exact_eval(0.5, 0.5);
        assert!((u + 0.125).abs() < 1e-15 && (p - 0.125).abs() < 1e-15);
    }

    #[test]
    fn velocity_continuous_and_pressure_jump() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            let (x, y) = (t.cos(), t.sin());
            let a = inside_branch(x, y);
            let b = outside_branch(x, y);
            assert!((a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);
            assert!((b.2 - a.2 - exact_jumps(t).p).abs() <= 1e-12);
        }
    }

    #[test]
    fn jumps_match_finite_difference_oracle() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            let (p, un, vn) = jump_oracle(t);
            let j = exact_jumps(t);
            assert!((p - j.p).abs() < 1e-12);
            assert!((un - j.un).abs() < 1e-8, "{t}: {un} vs {}", j.un);
            assert!((vn - j.vn).abs() < 1e-8);
            let (s, c) = t.sin_cos();
            assert!((un - j.fhat2 * s).abs() < 1e-8 && (vn + j.fhat2 * c).abs() < 1e-8);
            assert!((j.f1 - (p * c - un)).abs() < 1e-8 && (j.f2 - (p * s - vn)).abs() < 1e-8);
            // normal/tangential split of the Cartesian force
            assert!((j.f1 * c + j.f2 * s - j.fhat1).abs() < 1e-12);
            assert!((-j.f1 * s + j.f2 * c - j.fhat2).abs() < 1e-12);
        }
        assert!((exact_jumps(PI / 4.0).p + 0.5).abs() < 1e-15);
        assert!(jump_oracle(PI / 4.0).1.abs() < 1e-8);
    }

    #[test]
    fn body_force_closes_momentum_per_side() {
        let mut rng = StdRng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 100 {
            let (x, y): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let r = x.hypot(y);
            if (r - 1.0).abs() < 0.05 {
                continue;
            }
            let branch = if r < 1.0 { inside_branch } else { outside_branch };
            let (px, py) = gradient_oracle(|a, b| branch(a, b).2, x, y);
            let lu = laplacian_oracle(|a, b| branch(a, b).0, x, y);
            let lv = laplacian_oracle(|a, b| branch(a, b).1, x, y);
            let (g1, g2) = exact_body_force(x, y);
            assert!((px - lu - g1).abs() < 1e-8, "G1 at ({x},{y})");
            assert!((py - lv - g2).abs() < 1e-8, "G2 at ({x},{y})");
            // per-side divergence of the velocity
            let (ux, _) = gradient_oracle(|a, b| branch(a, b).0, x, y);
            let (_, vy) = gradient_oracle(|a, b| branch(a, b).1, x, y);
            assert!((ux + vy).abs() < 1e-8);
            // point symmetry: G(−x,−y) = −G(x,y)
            let (m1, m2) = exact_body_force(-x, -y);
            assert!((m1 + g1).abs() < 1e-12 && (m2 + g2).abs() < 1e-12);
            checked += 1;
        }
    }

    #[test]
    fn body_force_tie_break_is_inside() {
        let (s, c) = 0.3f64.sin_cos();
        assert_eq!(exact_body_force(c, s), (-3.5 * s, 4.5 * c));
    }

    #[test]
    fn boundary_layer_integrals() {
        let q1 = circle_quadrature(4096, |t| exact_jumps(t).p * t.cos());
        let qy = circle_quadrature(4096, |t| exact_jumps(t).p * t.cos() * t.sin());
        assert!(q1.abs() < 1e-14);
        assert!((qy + PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn example_problem_markers_and_forces() {
        let p = example_problem(32, DeltaKernel::Cosine, 1.0).unwrap();
        assert_eq!(p.markers.len(), 51);
        assert!(p.force.consistency_error(&p.markers) < 1e-12);
        // net force vanishes: ∫ f ds = 0
        let s1: f64 = p.force.f1.iter().zip(&p.markers.ds).map(|(f, d)| f * d).sum();
        let s2: f64 = p.force.f2.iter().zip(&p.markers.ds).map(|(f, d)| f * d).sum();
        assert!(s1.abs() < 1e-12 && s2.abs() < 1e-12);
    }
}
