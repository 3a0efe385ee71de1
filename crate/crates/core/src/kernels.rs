//! Discrete delta functions and the spreading/interpolation operators built from them.
//!
//! All kernels are one-dimensional and combined as a tensor product. Supports are half-open,
//! `[-W h, W h)`, so the one-cell `Delta1` kernel hands each shift to exactly one grid index.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{FieldLayout, ForceDensity, GridSpec, InterfaceMarkers, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeltaKernel {
    /// `(1 − |r|/h)/h` on `|r| < h`.
    Hat,
    /// `(1 + cos(πr/2h))/(4h)` on `|r| < 2h`.
    Cosine,
    /// `1/h` on `−h/2 ≤ r < h/2`.
    Delta1,
}

impl DeltaKernel {
    pub const ALL: [DeltaKernel; 3] = [DeltaKernel::Hat, DeltaKernel::Cosine, DeltaKernel::Delta1];

    /// Support half-width in units of `h`.
    pub fn half_width(self) -> f64 {
        match self {
            DeltaKernel::Hat => 1.0,
            DeltaKernel::Cosine => 2.0,
            DeltaKernel::Delta1 => 0.5,
        }
    }

    pub fn eval(self, r: f64, h: f64) -> f64 {
        let s = r / h;
        match self {
            DeltaKernel::Hat => {
                if (-1.0..1.0).contains(&s) {
                    (1.0 - s.abs()) / h
                } else {
                    0.0
                }
            }
            DeltaKernel::Cosine => {
                if (-2.0..2.0).contains(&s) {
                    (1.0 + (0.5 * PI * s).cos()) / (4.0 * h)
                } else {
                    0.0
                }
            }
            DeltaKernel::Delta1 => {
                if (-0.5..0.5).contains(&s) {
                    1.0 / h
                } else {
                    0.0
                }
            }
        }
    }

    /// One-dimensional weights for a source at fractional grid coordinate `t` (source position
    /// minus the coordinate of index 0, divided by `h`).
    ///
    /// Returns the first index touched and `h·δ_h(x_i − X)` for the consecutive indices from
    /// there; the weights sum to one.
    pub fn stencil(self, t: f64) -> (i64, Stencil) {
        match self {
            DeltaKernel::Delta1 => {
                // x_i − X ∈ [−h/2, h/2)  ⇔  i = ceil(t − 1/2)
                let i = (t - 0.5).ceil();
                (i as i64, Stencil::new(&[1.0]))
            }
            DeltaKernel::Hat => {
                let i0 = t.floor();
                let frac = t - i0;
                (i0 as i64, Stencil::new(&[1.0 - frac, frac]))
            }
            DeltaKernel::Cosine => {
                let i0 = t.floor();
                let frac = t - i0;
                let mut w = [0.0; 4];
                for (m, wm) in w.iter_mut().enumerate() {
                    let s = (m as f64 - 1.0) - frac;
                    *wm = if (-2.0..2.0).contains(&s) {
                        0.25 * (1.0 + (0.5 * PI * s).cos())
                    } else {
                        0.0
                    };
                }
                (i0 as i64 - 1, Stencil::new(&w))
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DeltaKernel::Hat => "hat",
            DeltaKernel::Cosine => "cosine",
            DeltaKernel::Delta1 => "delta1",
        }
    }
}

impl fmt::Display for DeltaKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeltaKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hat" => Ok(DeltaKernel::Hat),
            "cosine" => Ok(DeltaKernel::Cosine),
            "delta1" => Ok(DeltaKernel::Delta1),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel '{other}' (valid: hat, cosine, delta1)"
            ))),
        }
    }
}

/// Up to four dimensionless weights of a 1D kernel footprint.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    len: usize,
    w: [f64; 4],
}

impl Stencil {
    fn new(w: &[f64]) -> Self {
        let mut s = Self { len: w.len(), w: [0.0; 4] };
        s.w[..w.len()].copy_from_slice(w);
        s
    }

    pub fn weights(&self) -> &[f64] {
        &self.w[..self.len]
    }
}

/// Tensor-product footprint of one marker on a layout: `(i, j, h²·δ_h·δ_h)` for every point hit.
fn footprint(
    grid: &GridSpec,
    layout: FieldLayout,
    kernel: DeltaKernel,
    x: f64,
    y: f64,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let (nx, ny) = layout.dims(grid.n);
    let (ox, oy) = layout.offsets();
    let (i0, wx) = kernel.stencil((x - grid.a) / grid.h - ox);
    let (j0, wy) = kernel.stencil((y - grid.c) / grid.h - oy);
    for (dj, &wyj) in wy.weights().iter().enumerate() {
        let j = j0 + dj as i64;
        if j < 0 || j >= ny as i64 || wyj == 0.0 {
            continue;
        }
        for (di, &wxi) in wx.weights().iter().enumerate() {
            let i = i0 + di as i64;
            if i < 0 || i >= nx as i64 || wxi == 0.0 {
                continue;
            }
            visit(i as usize, j as usize, wxi * wyj);
        }
    }
}

/// Spreads marker forces onto a layout:
/// `F(p) = Σ_k f_k δ_h(p_x − X_k) δ_h(p_y − Y_k) Δs_k`.
///
/// Footprint points falling outside the layout are dropped.
pub fn spread_forces(
    grid: &GridSpec,
    layout: FieldLayout,
    markers: &InterfaceMarkers,
    force: &ForceDensity,
    kernel: DeltaKernel,
) -> Result<(ScalarField, ScalarField)> {
    if force.len() != markers.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} force values", markers.len()),
            got: force.len().to_string(),
        });
    }
    let mut f1 = ScalarField::zeros(grid, layout);
    let mut f2 = ScalarField::zeros(grid, layout);
    let inv_h2 = 1.0 / (grid.h * grid.h);
    for k in 0..markers.len() {
        let s1 = force.f1[k] * markers.ds[k] * inv_h2;
        let s2 = force.f2[k] * markers.ds[k] * inv_h2;
        footprint(grid, layout, kernel, markers.x[k], markers.y[k], |i, j, w| {
            f1.add(i, j, s1 * w);
            f2.add(i, j, s2 * w);
        });
    }
    Ok((f1, f2))
}

/// Spreads a single scalar density `g_k` (per arclength) onto a layout.
pub fn spread_scalar(
    grid: &GridSpec,
    layout: FieldLayout,
    markers: &InterfaceMarkers,
    density: &[f64],
    kernel: DeltaKernel,
) -> Result<ScalarField> {
    if density.len() != markers.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} density values", markers.len()),
            got: density.len().to_string(),
        });
    }
    let mut out = ScalarField::zeros(grid, layout);
    let inv_h2 = 1.0 / (grid.h * grid.h);
    for (k, d) in density.iter().enumerate() {
        let s = d * markers.ds[k] * inv_h2;
        footprint(grid, layout, kernel, markers.x[k], markers.y[k], |i, j, w| out.add(i, j, s * w));
    }
    Ok(out)
}

/// Interpolates a field to the markers: `U_k = h² Σ_p U(p) δ_h(p_x − X_k) δ_h(p_y − Y_k)`.
pub fn interpolate(field: &ScalarField, markers: &InterfaceMarkers, kernel: DeltaKernel) -> Vec<f64> {
    let grid = *field.grid();
    (0..markers.len())
        .map(|k| {
            let mut acc = 0.0;
            footprint(&grid, field.layout(), kernel, markers.x[k], markers.y[k], |i, j, w| {
                acc += field.get(i, j) * w;
            });
            acc
        })
        .collect()
}
