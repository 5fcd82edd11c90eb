//! Discrete Kohn-Nirenberg quantization, its dual, kernel extraction, and
//! Fourier integral operators with homogeneous phases.
//!
//! The quantization is a direct double sum over the lattice,
//!
//! ```text
//! T_a u(x)  = (2*pi)^{-d} dxi^d sum_xi e^{i<x,xi>} a(x,xi) u_hat(xi)
//! T*_a u(x) = (2*pi)^{-d} dxi^d sum_xi e^{i<x,xi>} [ h^d sum_y e^{-i<y,xi>} a(y,xi) u(y) ]
//! ```
//!
//! O(N^{2d}) time with O(N^d) memory; kernel matrices exist only as a
//! cross-check at small N. Output points are computed independently and
//! reduced in lattice order, so results do not depend on the thread count.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, Field, Grid, Point, Space};
use crate::par;
use crate::symbol::Symbol;

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

type PhaseFn = dyn Fn(Point, Point) -> f64 + Send + Sync;

/// Real phase function, positively 1-homogeneous in the frequency variable.
#[derive(Clone)]
pub struct Phase {
    name: String,
    class_k: u32,
    rough: bool,
    linear: bool,
    eval: Arc<PhaseFn>,
}

impl std::fmt::Debug for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Phase")
            .field("name", &self.name)
            .field("class_k", &self.class_k)
            .field("rough", &self.rough)
            .finish()
    }
}

impl Phase {
    pub fn from_fn(
        name: impl Into<String>,
        class_k: u32,
        rough: bool,
        eval: impl Fn(Point, Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Phase {
            name: name.into(),
            class_k,
            rough,
            linear: false,
            eval: Arc::new(eval),
        }
    }

    /// `phi(x,xi) = <x,xi>`, the degenerate phase of the plain quantization.
    pub fn linear() -> Self {
        Phase {
            name: "linear".into(),
            class_k: 1,
            rough: false,
            linear: true,
            eval: Arc::new(|x, xi| dot(x, xi)),
        }
    }

    /// `phi(x,xi) = <x,xi> + |xi|`, the half-wave phase; the difference from
    /// the linear phase is |xi|, smooth and 1-homogeneous away from 0.
    pub fn half_wave() -> Self {
        Phase {
            name: "half_wave".into(),
            class_k: 1,
            rough: false,
            linear: false,
            eval: Arc::new(|x, xi| dot(x, xi) + (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class_k(&self) -> u32 {
        self.class_k
    }

    pub fn is_rough(&self) -> bool {
        self.rough
    }

    pub fn is_linear(&self) -> bool {
        self.linear
    }

    /// Phase value; homogeneity forces 0 at xi = 0.
    pub fn eval(&self, x: Point, xi: Point) -> f64 {
        if xi[0] == 0.0 && xi[1] == 0.0 {
            0.0
        } else {
            (self.eval)(x, xi)
        }
    }

    /// Largest defect `|phi(x, t*xi) - t*phi(x, xi)| / (t |xi|)` over lattice
    /// frequencies and the given dilation factors.
    pub fn homogeneity_defect(&self, grid: &Grid, ts: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for idx in (0..grid.num_points()).step_by(1 + grid.num_points() / 64) {
            let x = grid.point(idx);
            for kidx in 0..grid.num_points() {
                let xi = grid.freq(kidx);
                let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                if r == 0.0 {
                    continue;
                }
                let base = self.eval(x, xi);
                for &t in ts {
                    let scaled = self.eval(x, [t * xi[0], t * xi[1]]);
                    worst = worst.max((scaled - t * base).abs() / (t * r));
                }
            }
        }
        worst
    }
}

/// Dense kernel matrix K(x,y) over lattice pairs; a cross-check device.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    grid: Grid,
    dual: bool,
    entries: Vec<Complex64>,
}

/// Lattice-point budget for kernel matrices (rows = columns = N^dim).
pub const KERNEL_POINT_LIMIT: usize = 4096;

impl KernelMatrix {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }

    pub fn entry(&self, x_idx: usize, y_idx: usize) -> Complex64 {
        self.entries[x_idx * self.grid.num_points() + y_idx]
    }

    /// `(K u)(x) = h^d sum_y K(x,y) u(y)`.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        if u.space() != Space::Spatial {
            return Err(Error::SpaceTag {
                expected: Space::Spatial,
                got: u.space(),
            });
        }
        let n = self.grid.num_points();
        let w = self.grid.cell_volume();
        let vals = par::map_indexed(n, |xi| {
            let mut s = Complex64::new(0.0, 0.0);
            for (yi, uv) in u.values().iter().enumerate() {
                s += self.entries[xi * n + yi] * uv;
            }
            s * w
        });
        Field::new(self.grid, Space::Spatial, vals)
    }

    /// Largest deviation from the circulant property K(x+e, y+e) = K(x, y).
    pub fn circulant_defect(&self) -> f64 {
        let g = self.grid;
        let n = g.num_points();
        let npd = g.points_per_dim();
        let shift = |idx: usize| {
            let ij = g.axis_indices(idx);
            match g.dim() {
                1 => (ij[0] + 1) % npd,
                _ => g.flat_index([(ij[0] + 1) % npd, (ij[1] + 1) % npd]),
            }
        };
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                let d = (self.entry(shift(x), shift(y)) - self.entry(x, y)).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// Shared per-axis table of `e^{i x_i xi_k}`.
struct PhaseTable {
    n: usize,
    dim: usize,
    t: Vec<Complex64>,
}

impl PhaseTable {
    fn new(grid: &Grid) -> Self {
        PhaseTable {
            n: grid.points_per_dim(),
            dim: grid.dim(),
            t: grid.axis_phase_table(),
        }
    }

    /// `e^{i <x_idx, xi_kidx>}` from per-axis factors.
    fn forward(&self, x_idx: [usize; 2], k_idx: [usize; 2]) -> Complex64 {
        let p0 = self.t[x_idx[0] * self.n + k_idx[0]];
        if self.dim == 1 {
            p0
        } else {
            p0 * self.t[x_idx[1] * self.n + k_idx[1]]
        }
    }
}

fn quant_scale(grid: &Grid) -> f64 {
    (grid.freq_spacing() / TAU).powi(grid.dim() as i32)
}

fn finite_or_err(v: Complex64, context: &str, x: Point, xi: Point) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            context: context.to_string(),
            x,
            xi,
        })
    }
}

/// `T_a u`, the Kohn-Nirenberg quantization applied to a spatial field.
pub fn apply_pdo(a: &Symbol, u: &Field) -> Result<Field> {
    let u_hat = forward_transform(u)?;
    pdo_from_spectrum(a, &u_hat)
}

/// Quantization acting on an already-transformed spectrum.
pub fn pdo_from_spectrum(a: &Symbol, u_hat: &Field) -> Result<Field> {
    if u_hat.space() != Space::Frequency {
        return Err(Error::SpaceTag {
            expected: Space::Frequency,
            got: u_hat.space(),
        });
    }
    let grid = u_hat.grid();
    let table = PhaseTable::new(&grid);
    let scale = quant_scale(&grid);
    let n = grid.num_points();
    let rows: Vec<Result<Complex64>> = par::map_indexed(n, |xi_flat| {
        let x = grid.point(xi_flat);
        let xid = grid.axis_indices(xi_flat);
        let mut s = Complex64::new(0.0, 0.0);
        for k_flat in 0..n {
            let xi = grid.freq(k_flat);
            let av = finite_or_err(a.eval(x, xi), a.name(), x, xi)?;
            s += table.forward(xid, grid.axis_indices(k_flat)) * av * u_hat.values()[k_flat];
        }
        Ok(s * scale)
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Field::new(grid, Space::Spatial, values)
}

/// The dual quantization: the symbol is evaluated at the integration point.
pub fn apply_dual_pdo(a: &Symbol, u: &Field) -> Result<Field> {
    let w = dual_inner_sum(a, None, u)?;
    inverse_transform(&w)
}

/// Inner frequency profile `w(xi) = h^d sum_y e^{-i<y,xi>} b(y,xi) u(y)`
/// where `b` is `a` itself or, with a phase, `a * e^{i(phi - <y,xi>)}`.
fn dual_inner_sum(a: &Symbol, phase: Option<&Phase>, u: &Field) -> Result<Field> {
    if u.space() != Space::Spatial {
        return Err(Error::SpaceTag {
            expected: Space::Spatial,
            got: u.space(),
        });
    }
    let grid = u.grid();
    let table = PhaseTable::new(&grid);
    let h = grid.cell_volume();
    let n = grid.num_points();
    let rows: Vec<Result<Complex64>> = par::map_indexed(n, |k_flat| {
        let xi = grid.freq(k_flat);
        let kid = grid.axis_indices(k_flat);
        let mut s = Complex64::new(0.0, 0.0);
        for y_flat in 0..n {
            let y = grid.point(y_flat);
            let mut av = finite_or_err(a.eval(y, xi), a.name(), y, xi)?;
            if let Some(p) = phase {
                let shift = p.eval(y, xi) - dot(y, xi);
                if !shift.is_finite() {
                    return Err(Error::Evaluation {
                        context: p.name().to_string(),
                        x: y,
                        xi,
                    });
                }
                av *= Complex64::from_polar(1.0, shift);
            }
            s += table.forward(grid.axis_indices(y_flat), kid).conj() * av * u.values()[y_flat];
        }
        Ok(s * h)
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Field::new(grid, Space::Frequency, values)
}

/// Dense kernel of `T_a` (or `T*_a` when `dual`), by direct frequency
/// summation. Guarded to small grids; applying the result with weight h^d
/// reproduces the direct quantization.
pub fn kernel_matrix(a: &Symbol, grid: &Grid, dual: bool) -> Result<KernelMatrix> {
    let n = grid.num_points();
    if n > KERNEL_POINT_LIMIT {
        return Err(Error::SizeGuard {
            points: n,
            limit: KERNEL_POINT_LIMIT,
        });
    }
    let table = PhaseTable::new(grid);
    let scale = quant_scale(grid);
    let rows: Vec<Result<Vec<Complex64>>> = par::map_indexed(n, |x_flat| {
        let x = grid.point(x_flat);
        let xid = grid.axis_indices(x_flat);
        let mut row = Vec::with_capacity(n);
        for y_flat in 0..n {
            let y = grid.point(y_flat);
            let yid = grid.axis_indices(y_flat);
            let mut s = Complex64::new(0.0, 0.0);
            for k_flat in 0..n {
                let xi = grid.freq(k_flat);
                let at = if dual { y } else { x };
                let av = finite_or_err(a.eval(at, xi), a.name(), at, xi)?;
                let kid = grid.axis_indices(k_flat);
                s += table.forward(xid, kid) * table.forward(yid, kid).conj() * av;
            }
            row.push(s * scale);
        }
        Ok(row)
    });
    let mut entries = Vec::with_capacity(n * n);
    for row in rows {
        entries.extend(row?);
    }
    Ok(KernelMatrix {
        grid: *grid,
        dual,
        entries,
    })
}

/// `T_{a,phi} u(x) = (2*pi)^{-d} dxi^d sum_xi e^{i phi(x,xi)} a(x,xi) u_hat(xi)`.
pub fn apply_fio(a: &Symbol, phi: &Phase, u: &Field) -> Result<Field> {
    let u_hat = forward_transform(u)?;
    let grid = u_hat.grid();
    let scale = quant_scale(&grid);
    let n = grid.num_points();
    let rows: Vec<Result<Complex64>> = par::map_indexed(n, |xi_flat| {
        let x = grid.point(xi_flat);
        let mut s = Complex64::new(0.0, 0.0);
        for k_flat in 0..n {
            let xi = grid.freq(k_flat);
            let ph = phi.eval(x, xi);
            if !ph.is_finite() {
                return Err(Error::Evaluation {
                    context: phi.name().to_string(),
                    x,
                    xi,
                });
            }
            let av = finite_or_err(a.eval(x, xi), a.name(), x, xi)?;
            s += Complex64::from_polar(1.0, ph) * av * u_hat.values()[k_flat];
        }
        Ok(s * scale)
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Field::new(grid, Space::Spatial, values)
}

/// Fold the oscillation into the amplitude:
/// `b(x,xi) = a(x,xi) e^{i(phi(x,xi) - <x,xi>)}`, so `T_{a,phi} = T_b`.
///
/// A unit derivative gain cannot survive the extra oscillation, so the
/// reduced symbol is declared with rho = 0; with the linear phase the
/// symbol is returned unchanged.
pub fn reduce_to_pdo(a: &Symbol, phi: &Phase) -> Symbol {
    if phi.is_linear() {
        return a.clone();
    }
    let mut meta = a.meta();
    meta.rho = 0.0;
    meta.rough = meta.rough || phi.is_rough();
    let a_inner = a.clone();
    let phi_inner = phi.clone();
    Symbol::from_fn(
        format!("reduced({}, {})", a.name(), phi.name()),
        meta,
        move |x, xi| {
            let shift = phi_inner.eval(x, xi) - dot(x, xi);
            a_inner.eval(x, xi) * Complex64::from_polar(1.0, shift)
        },
    )
}

/// Dual Fourier integral operator; defined as the dual quantization of the
/// reduced symbol, so `apply_dual_fio(a, phi, u)` agrees with
/// `apply_dual_pdo(reduce_to_pdo(a, phi), u)` by the same quadrature.
pub fn apply_dual_fio(a: &Symbol, phi: &Phase, u: &Field) -> Result<Field> {
    let w = if phi.is_linear() {
        dual_inner_sum(a, None, u)?
    } else {
        dual_inner_sum(a, Some(phi), u)?
    };
    inverse_transform(&w)
}
