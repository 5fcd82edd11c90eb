//! Periodic grids, sampled complex fields, cubes, and the discrete Fourier
//! transform pair.
//!
//! The spatial lattice is `x_i = -L/2 + i*h` with `h = L/N`; the frequency
//! lattice is `xi_k = 2*pi*k/L` for integer `k` in `[-N/2, N/2)`. The
//! convention is fixed so that quantizing the symbol `a == 1` gives the
//! identity: the forward transform carries no prefactor and the inverse
//! carries `(2*pi)^{-d}`:
//!
//! ```text
//! u_hat(xi) = h^d * sum_x e^{-i<x,xi>} u(x)
//! u(x)      = (2*pi)^{-d} * dxi^d * sum_xi e^{i<x,xi>} u_hat(xi)
//! ```

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::par;

/// A point of the box or of frequency space. For 1-d grids the second
/// coordinate is fixed to zero.
pub type Point = [f64; 2];

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Space {
    Spatial,
    Frequency,
}

/// Periodic sampling lattice on `[-L/2, L/2)^dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    points_per_dim: usize,
    side_length: f64,
}

impl Grid {
    pub fn new(dim: usize, points_per_dim: usize, side_length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Parameter(format!("dim must be 1 or 2, got {dim}")));
        }
        if points_per_dim < 8 || points_per_dim % 2 != 0 {
            return Err(Error::Parameter(format!(
                "points per dim must be even and >= 8, got {points_per_dim}"
            )));
        }
        if !(side_length > 0.0) || !side_length.is_finite() {
            return Err(Error::Parameter(format!(
                "side length must be positive and finite, got {side_length}"
            )));
        }
        Ok(Grid {
            dim,
            points_per_dim,
            side_length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    /// Lattice spacing `h = L/N`.
    pub fn spacing(&self) -> f64 {
        self.side_length / self.points_per_dim as f64
    }

    /// Frequency spacing `2*pi/L`.
    pub fn freq_spacing(&self) -> f64 {
        TAU / self.side_length
    }

    /// Largest frequency magnitude on the lattice, `(N/2) * 2*pi/L`.
    pub fn nyquist(&self) -> f64 {
        self.freq_spacing() * (self.points_per_dim / 2) as f64
    }

    /// Total number of lattice points, `N^dim`.
    pub fn num_points(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    /// Cell volume `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn axis_coord(&self, i: usize) -> f64 {
        -0.5 * self.side_length + i as f64 * self.spacing()
    }

    pub fn axis_freq(&self, k: usize) -> f64 {
        (k as f64 - (self.points_per_dim / 2) as f64) * self.freq_spacing()
    }

    /// Decompose a flat index into per-axis indices (row-major).
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.points_per_dim, idx % self.points_per_dim],
        }
    }

    pub fn flat_index(&self, ij: [usize; 2]) -> usize {
        match self.dim {
            1 => ij[0],
            _ => ij[0] * self.points_per_dim + ij[1],
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let ij = self.axis_indices(idx);
        match self.dim {
            1 => [self.axis_coord(ij[0]), 0.0],
            _ => [self.axis_coord(ij[0]), self.axis_coord(ij[1])],
        }
    }

    pub fn freq(&self, idx: usize) -> Point {
        let ij = self.axis_indices(idx);
        match self.dim {
            1 => [self.axis_freq(ij[0]), 0.0],
            _ => [self.axis_freq(ij[0]), self.axis_freq(ij[1])],
        }
    }

    /// Signed offset wrapped to `[-L/2, L/2)`.
    pub fn wrap(&self, d: f64) -> f64 {
        let l = self.side_length;
        let mut r = d % l;
        if r < -0.5 * l {
            r += l;
        } else if r >= 0.5 * l {
            r -= l;
        }
        r
    }

    /// Periodic Euclidean distance between two points.
    pub fn periodic_distance(&self, a: Point, b: Point) -> f64 {
        let mut s = 0.0;
        for ax in 0..self.dim {
            let d = self.wrap(a[ax] - b[ax]);
            s += d * d;
        }
        s.sqrt()
    }

    /// Table of `e^{i x_i xi_k}` for one axis; shared by both axes.
    pub(crate) fn axis_phase_table(&self) -> Vec<Complex64> {
        let n = self.points_per_dim;
        let mut t = Vec::with_capacity(n * n);
        for i in 0..n {
            let x = self.axis_coord(i);
            for k in 0..n {
                t.push(Complex64::from_polar(1.0, x * self.axis_freq(k)));
            }
        }
        t
    }
}

/// Complex samples on the spatial or frequency lattice of a grid.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    space: Space,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::Parameter(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.num_points()
            )));
        }
        let f = Field { grid, space, values };
        f.check_finite("Field::new")?;
        Ok(f)
    }

    pub fn zeros(grid: Grid, space: Space) -> Self {
        Field {
            grid,
            space,
            values: vec![Complex64::new(0.0, 0.0); grid.num_points()],
        }
    }

    pub fn constant(grid: Grid, space: Space, c: Complex64) -> Self {
        Field {
            grid,
            space,
            values: vec![c; grid.num_points()],
        }
    }

    /// Sample a function of the spatial point.
    pub fn from_spatial_fn(grid: Grid, f: impl Fn(Point) -> Complex64) -> Self {
        let values = (0..grid.num_points()).map(|i| f(grid.point(i))).collect();
        Field {
            grid,
            space: Space::Spatial,
            values,
        }
    }

    /// Sample a function of the frequency point.
    pub fn from_freq_fn(grid: Grid, f: impl Fn(Point) -> Complex64) -> Self {
        let values = (0..grid.num_points()).map(|i| f(grid.freq(i))).collect();
        Field {
            grid,
            space: Space::Frequency,
            values,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                let p = match self.space {
                    Space::Spatial => self.grid.point(i),
                    Space::Frequency => self.grid.freq(i),
                };
                return Err(Error::Evaluation {
                    context: context.to_string(),
                    x: p,
                    xi: p,
                });
            }
        }
        Ok(())
    }

    fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space != expected {
            return Err(Error::SpaceTag {
                expected,
                got: self.space,
            });
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: Complex64) -> Field {
        Field {
            grid: self.grid,
            space: self.space,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        other.expect_space(self.space)?;
        Ok(Field {
            grid: self.grid,
            space: self.space,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise moduli.
    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `h^d * sum_x f(x) * conj(g(x))`, the discrete L^2 pairing.
    pub fn inner(&self, other: &Field) -> Complex64 {
        let w = self.grid.cell_volume();
        let mut s = Complex64::new(0.0, 0.0);
        for (a, b) in self.values.iter().zip(&other.values) {
            s += a * b.conj();
        }
        s * w
    }

    /// Discrete L^2 norm, `sqrt(h^d * sum |f|^2)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell_volume()).sqrt()
    }
}

/// `u_hat(xi) = h^d * sum_x e^{-i<x,xi>} u(x)`, computed axis by axis.
pub fn forward_transform(u: &Field) -> Result<Field> {
    u.expect_space(Space::Spatial)?;
    let grid = u.grid();
    let table = grid.axis_phase_table();
    let values = transform_separable(grid, u.values(), &table, true);
    let scale = grid.cell_volume();
    let values = values.into_iter().map(|v| v * scale).collect();
    Ok(Field {
        grid,
        space: Space::Frequency,
        values,
    })
}

/// `u(x) = (2*pi)^{-d} * dxi^d * sum_xi e^{i<x,xi>} v(xi)`.
pub fn inverse_transform(v: &Field) -> Result<Field> {
    v.expect_space(Space::Frequency)?;
    let grid = v.grid();
    let table = grid.axis_phase_table();
    let values = transform_separable(grid, v.values(), &table, false);
    let scale = (grid.freq_spacing() / TAU).powi(grid.dim() as i32);
    let values = values.into_iter().map(|v| v * scale).collect();
    Ok(Field {
        grid,
        space: Space::Spatial,
        values,
    })
}

/// Unscaled separable DFT. `conjugate` selects the e^{-i x xi} direction.
/// Output index i (or k) accumulates over the other variable in lattice order.
fn transform_separable(
    grid: Grid,
    input: &[Complex64],
    table: &[Complex64],
    conjugate: bool,
) -> Vec<Complex64> {
    let n = grid.points_per_dim();
    let phase = |i: usize, k: usize| {
        let t = table[i * n + k];
        if conjugate {
            t.conj()
        } else {
            t
        }
    };
    match grid.dim() {
        1 => par::map_indexed(n, |out| {
            let mut s = Complex64::new(0.0, 0.0);
            for inp in 0..n {
                // forward: out indexes xi, inp indexes x; inverse: vice versa
                let p = if conjugate {
                    phase(inp, out)
                } else {
                    phase(out, inp)
                };
                s += p * input[inp];
            }
            s
        }),
        _ => {
            // axis 1 (fast index), then axis 0
            let stage1: Vec<Complex64> = par::map_indexed(n * n, |idx| {
                let (i0, out) = (idx / n, idx % n);
                let mut s = Complex64::new(0.0, 0.0);
                for inp in 0..n {
                    let p = if conjugate {
                        phase(inp, out)
                    } else {
                        phase(out, inp)
                    };
                    s += p * input[i0 * n + inp];
                }
                s
            });
            par::map_indexed(n * n, |idx| {
                let (out, k1) = (idx / n, idx % n);
                let mut s = Complex64::new(0.0, 0.0);
                for inp in 0..n {
                    let p = if conjugate {
                        phase(inp, out)
                    } else {
                        phase(out, inp)
                    };
                    s += p * stage1[inp * n + k1];
                }
                s
            })
        }
    }
}

/// Axis-aligned cube on the periodic box, with half-open membership
/// `wrap(x - center) in [-side/2, side/2)` per axis.
#[derive(Clone, Copy, Debug)]
pub struct Cube {
    pub center: Point,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Point, side: f64) -> Self {
        Cube { center, side }
    }

    pub fn contains(&self, grid: &Grid, p: Point) -> bool {
        // tolerance so that boundary cells classify identically after
        // lattice translations of both the cube and the point
        let tol = 1e-9 * grid.spacing();
        for ax in 0..grid.dim() {
            let d = grid.wrap(p[ax] - self.center[ax]);
            if d < -0.5 * self.side - tol || d >= 0.5 * self.side - tol {
                return false;
            }
        }
        true
    }
}

/// Mean of `u` over the lattice cells whose centers lie in `q`.
pub fn cube_average(u: &Field, q: &Cube) -> Result<Complex64> {
    let grid = u.grid();
    if q.side < grid.spacing() {
        return Err(Error::DegenerateCube {
            side: q.side,
            spacing: grid.spacing(),
        });
    }
    if q.side > grid.side_length() + 1e-9 * grid.side_length() {
        return Err(Error::Parameter(format!(
            "cube side {} exceeds the box side {}",
            q.side,
            grid.side_length()
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for i in 0..grid.num_points() {
        if q.contains(&grid, grid.point(i)) {
            sum += u.values()[i];
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::DegenerateCube {
            side: q.side,
            spacing: grid.spacing(),
        });
    }
    Ok(sum / count as f64)
}
