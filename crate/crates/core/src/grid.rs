//! Grid geometry, field storage and the Lagrangian description of the immersed interface.
//!
//! A [`GridSpec`] describes the square domain `[a,b]×[c,d]` cut into `N×N` square cells of
//! side `h`. Fields live on one of four staggered locations ([`FieldLayout`]):
//!
//! * `Nodes`: `x_i = a + i h`, `i = 0..=N` (the collocated grid of the three-Poisson method)
//! * `Centers`: `x_i = a + (i + 1/2) h`, `i = 0..N` (MAC pressure)
//! * `XFaces`: `(a + i h, c + (j + 1/2) h)`, `i = 0..=N`, `j = 0..N` (MAC `u`)
//! * `YFaces`: `(a + (i + 1/2) h, c + j h)`, `i = 0..N`, `j = 0..=N` (MAC `v`)

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Smallest number of cells per side accepted by [`GridSpec::new`].
pub const MIN_CELLS: usize = 8;

/// Uniform square-cell grid on `[a,b]×[c,d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub n: usize,
    pub h: f64,
}

impl GridSpec {
    pub fn new(a: f64, b: f64, c: f64, d: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(Error::InvalidGrid("domain corners must be finite".into()));
        }
        if b <= a || d <= c {
            return Err(Error::InvalidGrid(format!(
                "need b > a and d > c, got [{a}, {b}] x [{c}, {d}]"
            )));
        }
        if n < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_CELLS} cells per side, got {n}"
            )));
        }
        let hx = (b - a) / n as f64;
        let hy = (d - c) / n as f64;
        if (hx - hy).abs() > 1e-12 * hx.max(hy) {
            return Err(Error::InvalidGrid(format!(
                "non-square cells: hx = {hx}, hy = {hy}"
            )));
        }
        Ok(Self { a, b, c, d, n, h: hx })
    }

    /// The `[-2,2]²` domain used by the circular-interface example.
    pub fn example(n: usize) -> Result<Self> {
        Self::new(-2.0, 2.0, -2.0, 2.0, n)
    }

    #[inline]
    pub fn node_x(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }

    #[inline]
    pub fn node_y(&self, j: usize) -> f64 {
        self.c + j as f64 * self.h
    }

    /// Node index nearest to `(x, y)`, clamped to the grid.
    pub fn nearest_node(&self, x: f64, y: f64) -> (usize, usize) {
        let clamp = |t: f64| t.round().clamp(0.0, self.n as f64) as usize;
        (clamp((x - self.a) / self.h), clamp((y - self.c) / self.h))
    }

    /// Distance from `(x, y)` to the outer boundary (negative outside the domain).
    pub fn dist_to_boundary(&self, x: f64, y: f64) -> f64 {
        (x - self.a).min(self.b - x).min(y - self.c).min(self.d - y)
    }
}

/// Storage location of a grid function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldLayout {
    Nodes,
    Centers,
    XFaces,
    YFaces,
}

impl FieldLayout {
    /// `(nx, ny)` for a grid with `n` cells per side.
    pub fn dims(self, n: usize) -> (usize, usize) {
        match self {
            FieldLayout::Nodes => (n + 1, n + 1),
            FieldLayout::Centers => (n, n),
            FieldLayout::XFaces => (n + 1, n),
            FieldLayout::YFaces => (n, n + 1),
        }
    }

    /// Offsets of the `(0,0)` point from `(a, c)` in units of `h`.
    pub fn offsets(self) -> (f64, f64) {
        match self {
            FieldLayout::Nodes => (0.0, 0.0),
            FieldLayout::Centers => (0.5, 0.5),
            FieldLayout::XFaces => (0.0, 0.5),
            FieldLayout::YFaces => (0.5, 0.0),
        }
    }

    pub fn point(self, grid: &GridSpec, i: usize, j: usize) -> (f64, f64) {
        let (ox, oy) = self.offsets();
        (
            grid.a + (i as f64 + ox) * grid.h,
            grid.c + (j as f64 + oy) * grid.h,
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldLayout::Nodes => "nodes",
            FieldLayout::Centers => "centers",
            FieldLayout::XFaces => "xfaces",
            FieldLayout::YFaces => "yfaces",
        }
    }
}

impl fmt::Display for FieldLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nodes" => Ok(FieldLayout::Nodes),
            "centers" => Ok(FieldLayout::Centers),
            "xfaces" => Ok(FieldLayout::XFaces),
            "yfaces" => Ok(FieldLayout::YFaces),
            other => Err(Error::InvalidArgument(format!("unknown layout '{other}'"))),
        }
    }
}

/// A real grid function on one [`FieldLayout`]. Entry `(i, j)` is stored at `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    layout: FieldLayout,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &GridSpec, layout: FieldLayout) -> Self {
        let (nx, ny) = layout.dims(grid.n);
        Self {
            grid: *grid,
            layout,
            nx,
            ny,
            values: vec![0.0; nx * ny],
        }
    }

    /// Samples `f(x, y)` at every point of the layout.
    pub fn from_fn(grid: &GridSpec, layout: FieldLayout, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(grid, layout);
        for j in 0..field.ny {
            for i in 0..field.nx {
                let (x, y) = layout.point(grid, i, j);
                field.values[j * field.nx + i] = f(x, y);
            }
        }
        field
    }

    pub fn from_values(grid: &GridSpec, layout: FieldLayout, values: Vec<f64>) -> Result<Self> {
        let (nx, ny) = layout.dims(grid.n);
        if values.len() != nx * ny {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values for {layout} with N = {}", nx * ny, grid.n),
                got: values.len().to_string(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at flat index {k}")));
        }
        Ok(Self {
            grid: *grid,
            layout,
            nx,
            ny,
            values,
        })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn layout(&self) -> FieldLayout {
        self.layout
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.nx && j < self.ny);
        self.values[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nx && j < self.ny);
        self.values[j * self.nx + i] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.nx + i] += v;
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        self.layout.point(&self.grid, i, j)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Combines two fields on the same grid and layout entry by entry.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.layout != other.layout || self.grid != other.grid {
            return Err(Error::ShapeMismatch {
                expected: format!("{} field with N = {}", self.layout, self.grid.n),
                got: format!("{} field with N = {}", other.layout, other.grid.n),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            layout: self.layout,
            nx: self.nx,
            ny: self.ny,
            values,
        })
    }

    /// Writes the field as CSV: a header line `layout,N,h` with the values of those three
    /// quantities, then one line per `j` (ascending `y`) holding the `nx` entries of that row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{},{},{:e}", self.layout, self.grid.n, self.grid.h)?;
        let mut line = String::new();
        for j in 0..self.ny {
            line.clear();
            for i in 0..self.nx {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{:e}", self.get(i, j)));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Reads a field written by [`ScalarField::write_csv`] back onto `grid`.
    pub fn read_csv<R: BufRead>(grid: &GridSpec, r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Csv("missing header line".into()))??;
        let parts: Vec<&str> = header.trim().split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Csv(format!("bad header '{header}'")));
        }
        let layout: FieldLayout = parts[0].parse()?;
        let n: usize = parts[1]
            .parse()
            .map_err(|_| Error::Csv(format!("bad N '{}'", parts[1])))?;
        if n != grid.n {
            return Err(Error::Csv(format!("file has N = {n}, grid has N = {}", grid.n)));
        }
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.split(',') {
                values.push(
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Csv(format!("bad value '{tok}'")))?,
                );
            }
        }
        Self::from_values(grid, layout, values)
    }
}

/// Anything that can report the unsigned distance from a point to the interface.
pub trait InterfaceGeometry {
    fn distance(&self, x: f64, y: f64) -> f64;
}

/// A circle, the only interface shape the solvers are exercised on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl Circle {
    pub fn new(cx: f64, cy: f64, radius: f64) -> Self {
        Self { cx, cy, radius }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    /// Positive outside (Ω⁺), negative inside (Ω⁻).
    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        (x - self.cx).hypot(y - self.cy) - self.radius
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }
}

impl InterfaceGeometry for Circle {
    fn distance(&self, x: f64, y: f64) -> f64 {
        self.signed_distance(x, y).abs()
    }
}

/// Lagrangian marker points on a closed curve, with arclength weights and normal angles.
///
/// The outward normal at marker `k` is `(cos θ_k, sin θ_k)` and points from the inside (Ω⁻)
/// to the outside (Ω⁺); the tangent is `(−sin θ_k, cos θ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMarkers {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
    pub ds: Vec<f64>,
}

impl InterfaceMarkers {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn normal(&self, k: usize) -> (f64, f64) {
        let (s, c) = self.theta[k].sin_cos();
        (c, s)
    }

    pub fn tangent(&self, k: usize) -> (f64, f64) {
        let (s, c) = self.theta[k].sin_cos();
        (-s, c)
    }

    pub fn total_length(&self) -> f64 {
        self.ds.iter().sum()
    }

    pub fn max_ds(&self) -> f64 {
        self.ds.iter().fold(0.0, |m, &d| m.max(d))
    }

    /// Translates every marker by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            x: self.x.iter().map(|v| v + dx).collect(),
            y: self.y.iter().map(|v| v + dy).collect(),
            theta: self.theta.clone(),
            ds: self.ds.clone(),
        }
    }

    /// Checks the marker invariants against grid spacing `h` and the exact curve length.
    pub fn validate(&self, h: f64, exact_length: f64) -> Result<()> {
        let n = self.len();
        if n < 3 || self.y.len() != n || self.theta.len() != n || self.ds.len() != n {
            return Err(Error::InvalidArgument(
                "markers need at least 3 points and equal-length arrays".into(),
            ));
        }
        if self.max_ds() > 2.0 * h {
            return Err(Error::InvalidArgument(format!(
                "max ds = {} exceeds 2h = {}",
                self.max_ds(),
                2.0 * h
            )));
        }
        let rel = (self.total_length() - exact_length).abs() / exact_length;
        if rel > 1e-3 {
            return Err(Error::InvalidArgument(format!(
                "sum of ds deviates from the curve length by {rel:.3e} (relative)"
            )));
        }
        Ok(())
    }
}

impl InterfaceGeometry for InterfaceMarkers {
    /// Distance to the closed polygon through the markers (last marker joins the first).
    fn distance(&self, px: f64, py: f64) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for k in 0..n {
            let k1 = (k + 1) % n;
            let (ax, ay) = (self.x[k], self.y[k]);
            let (ex, ey) = (self.x[k1] - ax, self.y[k1] - ay);
            let len2 = ex * ex + ey * ey;
            let t = if len2 > 0.0 {
                (((px - ax) * ex + (py - ay) * ey) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let d = (px - ax - t * ex).hypot(py - ay - t * ey);
            best = best.min(d);
        }
        best
    }
}

/// Unsigned distance from `(x, y)` to an interface description.
pub fn dist_to_interface(x: f64, y: f64, interface: &dyn InterfaceGeometry) -> f64 {
    interface.distance(x, y)
}

/// Equally spaced markers on a circle.
///
/// `N_b = ceil(2πR / (spacing_factor·h))`, `θ_k = 2πk/N_b`, and every marker carries the exact
/// arclength weight `2πR/N_b`.
pub fn make_circle_markers(circle: &Circle, h: f64, spacing_factor: f64) -> Result<InterfaceMarkers> {
    if !(circle.radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {}", circle.radius)));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    if !(spacing_factor > 0.0 && spacing_factor <= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "spacing factor must lie in (0, 2], got {spacing_factor}"
        )));
    }
    let length = circle.length();
    let count = (length / (spacing_factor * h)).ceil() as usize;
    Ok(markers_with_count(circle, count.max(3)))
}

/// `count` equally spaced markers on a circle, independent of any grid.
pub fn markers_with_count(circle: &Circle, count: usize) -> InterfaceMarkers {
    let ds = circle.length() / count as f64;
    let mut m = InterfaceMarkers {
        x: Vec::with_capacity(count),
        y: Vec::with_capacity(count),
        theta: Vec::with_capacity(count),
        ds: vec![ds; count],
    };
    for k in 0..count {
        let theta = 2.0 * PI * k as f64 / count as f64;
        let (s, c) = theta.sin_cos();
        m.x.push(circle.cx + circle.radius * c);
        m.y.push(circle.cy + circle.radius * s);
        m.theta.push(theta);
    }
    m
}

/// Force strength per unit arclength at each marker, in Cartesian and normal/tangential form.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceDensity {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub fhat1: Vec<f64>,
    pub fhat2: Vec<f64>,
}

impl ForceDensity {
    pub fn zeros(n: usize) -> Self {
        Self {
            f1: vec![0.0; n],
            f2: vec![0.0; n],
            fhat1: vec![0.0; n],
            fhat2: vec![0.0; n],
        }
    }

    /// Builds `(f1, f2) = f̂₁ n + f̂₂ τ` at every marker.
    pub fn from_normal_tangential(markers: &InterfaceMarkers, fhat1: Vec<f64>, fhat2: Vec<f64>) -> Result<Self> {
        check_len(markers, fhat1.len())?;
        check_len(markers, fhat2.len())?;
        let (mut f1, mut f2) = (Vec::with_capacity(fhat1.len()), Vec::with_capacity(fhat1.len()));
        for k in 0..markers.len() {
            let (nx, ny) = markers.normal(k);
            let (tx, ty) = markers.tangent(k);
            f1.push(fhat1[k] * nx + fhat2[k] * tx);
            f2.push(fhat1[k] * ny + fhat2[k] * ty);
        }
        Ok(Self { f1, f2, fhat1, fhat2 })
    }

    /// Builds `f̂₁ = f·n`, `f̂₂ = f·τ` from Cartesian strengths.
    pub fn from_cartesian(markers: &InterfaceMarkers, f1: Vec<f64>, f2: Vec<f64>) -> Result<Self> {
        check_len(markers, f1.len())?;
        check_len(markers, f2.len())?;
        let (mut fhat1, mut fhat2) = (Vec::with_capacity(f1.len()), Vec::with_capacity(f1.len()));
        for k in 0..markers.len() {
            let (nx, ny) = markers.normal(k);
            let (tx, ty) = markers.tangent(k);
            fhat1.push(f1[k] * nx + f2[k] * ny);
            fhat2.push(f1[k] * tx + f2[k] * ty);
        }
        Ok(Self { f1, f2, fhat1, fhat2 })
    }

    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    /// Largest relative mismatch between the Cartesian and the normal/tangential forms.
    pub fn consistency_error(&self, markers: &InterfaceMarkers) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let (nx, ny) = markers.normal(k);
            let (tx, ty) = markers.tangent(k);
            let g1 = self.fhat1[k] * nx + self.fhat2[k] * tx;
            let g2 = self.fhat1[k] * ny + self.fhat2[k] * ty;
            let scale = self.f1[k].abs().max(self.f2[k].abs()).max(1.0);
            worst = worst.max((g1 - self.f1[k]).abs() / scale).max((g2 - self.f2[k]).abs() / scale);
        }
        worst
    }
}

fn check_len(markers: &InterfaceMarkers, len: usize) -> Result<()> {
    if len != markers.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} marker values", markers.len()),
            got: len.to_string(),
        });
    }
    Ok(())
}
