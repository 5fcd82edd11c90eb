//! Hardy-Littlewood and Fefferman-Stein sharp maximal operators over a
//! dyadic cube family, Muckenhoupt weights with A_p constant estimation,
//! and weighted strong/weak norms.
//!
//! The cube family consists of lattice-centered cubes whose sides run over
//! the geometric ladder h*2^k up to the full box. Averages use windowed
//! prefix sums and the sup over cubes containing a point uses a sliding
//! window maximum, so one maximal function costs O(N^d) per side length.

use num_complex::Complex64;
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Point, Space};
use crate::par;

/// Lattice-centered cubes with dyadic side ladder `h * 2^k`, always
/// including single-cell cubes and the full box.
#[derive(Clone, Debug)]
pub struct CubeFamily {
    grid: Grid,
    cell_counts: Vec<usize>,
}

impl CubeFamily {
    pub fn dyadic(grid: Grid) -> Self {
        let n = grid.points_per_dim();
        let mut cell_counts = Vec::new();
        let mut m = 1usize;
        while m <= n {
            cell_counts.push(m);
            m *= 2;
        }
        if *cell_counts.last().unwrap() != n {
            cell_counts.push(n);
        }
        CubeFamily { grid, cell_counts }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Cube sides in length units.
    pub fn sides(&self) -> Vec<f64> {
        self.cell_counts
            .iter()
            .map(|&m| m as f64 * self.grid.spacing())
            .collect()
    }

    /// Per-axis cell counts of the side ladder.
    pub fn cell_counts(&self) -> &[usize] {
        &self.cell_counts
    }
}

/// Windowed sum along one line with wraparound; the window covers cell
/// offsets [-m/2, m/2 - 1] for even m and just the cell itself for m = 1.
fn window_sum_line(line: &[f64], m: usize) -> Vec<f64> {
    let n = line.len();
    let lo = if m == 1 { 0isize } else { -((m / 2) as isize) };
    let mut prefix = Vec::with_capacity(3 * n + 1);
    prefix.push(0.0);
    for i in 0..3 * n {
        let last = *prefix.last().unwrap();
        prefix.push(last + line[i % n]);
    }
    (0..n)
        .map(|j| {
            let start = (n as isize + j as isize + lo) as usize;
            prefix[start + m] - prefix[start]
        })
        .collect()
}

/// Monotone-deque sliding max: out[i] = max of the tripled line over
/// [n + start_off + i, n + start_off + i + win - 1].
fn sliding_max_line(line: &[f64], start_off: isize, win: usize) -> Vec<f64> {
    let n = line.len();
    let ext: Vec<f64> = (0..3 * n).map(|i| line[i % n]).collect();
    let start = (n as isize + start_off) as usize;
    let mut out = Vec::with_capacity(n);
    let mut dq: VecDeque<usize> = VecDeque::new();
    for pos in start..start + n + win - 1 {
        while let Some(&b) = dq.back() {
            if ext[b] <= ext[pos] {
                dq.pop_back();
            } else {
                break;
            }
        }
        dq.push_back(pos);
        while let Some(&f) = dq.front() {
            if f + win <= pos {
                dq.pop_front();
            } else {
                break;
            }
        }
        if pos + 1 >= start + win {
            out.push(ext[*dq.front().unwrap()]);
        }
    }
    out
}

/// Max over the centers whose cube of m cells covers each point: center
/// offsets [-m/2 + 1, m/2] for even m, the point itself for m = 1.
fn window_max_line(line: &[f64], m: usize) -> Vec<f64> {
    if m == 1 {
        return line.to_vec();
    }
    sliding_max_line(line, -((m / 2) as isize) + 1, m)
}

/// Apply a per-line transform along the given axis.
fn along_axis(
    grid: &Grid,
    vals: &[f64],
    axis: usize,
    f: impl Fn(&[f64]) -> Vec<f64> + Sync,
) -> Vec<f64> {
    let n = grid.points_per_dim();
    match grid.dim() {
        1 => f(vals),
        _ => {
            let mut out = vec![0.0; vals.len()];
            if axis == 1 {
                let rows: Vec<Vec<f64>> = par::map_indexed(n, |i0| {
                    let line: Vec<f64> = (0..n).map(|i1| vals[i0 * n + i1]).collect();
                    f(&line)
                });
                for (i0, row) in rows.into_iter().enumerate() {
                    out[i0 * n..(i0 + 1) * n].copy_from_slice(&row);
                }
            } else {
                let cols: Vec<Vec<f64>> = par::map_indexed(n, |i1| {
                    let line: Vec<f64> = (0..n).map(|i0| vals[i0 * n + i1]).collect();
                    f(&line)
                });
                for (i1, col) in cols.into_iter().enumerate() {
                    for (i0, v) in col.into_iter().enumerate() {
                        out[i0 * n + i1] = v;
                    }
                }
            }
            out
        }
    }
}

/// Averages over the cubes of `m` cells per axis, indexed by cube center.
fn box_averages(grid: &Grid, vals: &[f64], m: usize) -> Vec<f64> {
    let mut sums = vals.to_vec();
    for axis in 0..grid.dim() {
        sums = along_axis(grid, &sums, axis, |line| window_sum_line(line, m));
    }
    let count = (m as f64).powi(grid.dim() as i32);
    sums.into_iter().map(|s| s / count).collect()
}

/// Max over covering cubes of per-center values.
fn cover_max(grid: &Grid, per_center: &[f64], m: usize) -> Vec<f64> {
    let mut vals = per_center.to_vec();
    for axis in 0..grid.dim() {
        vals = along_axis(grid, &vals, axis, |line| window_max_line(line, m));
    }
    vals
}

fn real_field(grid: Grid, vals: Vec<f64>) -> Field {
    let values = vals.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    Field::new(grid, Space::Spatial, values).expect("maximal output finite")
}

/// Hardy-Littlewood maximal function over the family:
/// `Mu(x) = max over cubes containing x of the average of |u|`.
pub fn hl_maximal(u: &Field, family: &CubeFamily) -> Result<Field> {
    if u.space() != Space::Spatial {
        return Err(Error::SpaceTag {
            expected: Space::Spatial,
            got: u.space(),
        });
    }
    let grid = u.grid();
    let base = u.abs_values();
    let mut best = vec![0.0f64; base.len()];
    for &m in &family.cell_counts {
        let avg = box_averages(&grid, &base, m);
        let covered = cover_max(&grid, &avg, m);
        for (b, v) in best.iter_mut().zip(covered) {
            *b = b.max(v);
        }
    }
    Ok(real_field(grid, best))
}

const GOLDEN_INV: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimum of a unimodal function on [a, b]; returns the
/// best value seen.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - GOLDEN_INV * (b - a);
    let mut d = a + GOLDEN_INV * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = fc.min(fd);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN_INV * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN_INV * (b - a);
            fd = f(d);
        }
        best = best.min(fc.min(fd));
    }
    best
}

fn median(sorted: &[f64]) -> f64 {
    sorted[(sorted.len() - 1) / 2]
}

/// Best-constant mean absolute deviation `inf_c avg |v - c|` over complex c.
///
/// The objective is convex in c. Coordinate medians give the exact minimum
/// for real-valued data and a strong starting value otherwise; golden
/// sweeps in each coordinate can only improve it.
pub(crate) fn cube_oscillation(values: &[Complex64]) -> f64 {
    if values.len() <= 1 {
        return 0.0;
    }
    let objective = |c: Complex64| -> f64 {
        let s: f64 = values.iter().map(|v| (v - c).norm()).sum();
        s / values.len() as f64
    };
    let mut re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = values.iter().map(|v| v.im).collect();
    re.sort_by(f64::total_cmp);
    im.sort_by(f64::total_cmp);
    let (re_lo, re_hi) = (re[0], re[re.len() - 1]);
    let (im_lo, im_hi) = (im[0], im[im.len() - 1]);
    let cr = median(&re);
    let ci = median(&im);
    let mut best = objective(Complex64::new(cr, ci));
    for _ in 0..2 {
        if re_hi > re_lo {
            let v = golden_min(
                |c| objective(Complex64::new(c, ci)),
                re_lo,
                re_hi,
                1e-12 * (re_hi - re_lo),
            );
            best = best.min(v);
        }
        if im_hi > im_lo {
            let v = golden_min(
                |c| objective(Complex64::new(cr, c)),
                im_lo,
                im_hi,
                1e-12 * (im_hi - im_lo),
            );
            best = best.min(v);
        }
    }
    best
}

/// Sharp maximal function:
/// `M#u(x) = max over cubes containing x of inf_c avg_Q |u - c|`.
pub fn sharp_maximal(u: &Field, family: &CubeFamily) -> Result<Field> {
    if u.space() != Space::Spatial {
        return Err(Error::SpaceTag {
            expected: Space::Spatial,
            got: u.space(),
        });
    }
    let grid = u.grid();
    let n = grid.num_points();
    let npd = grid.points_per_dim();
    let mut best = vec![0.0f64; n];
    for &m in &family.cell_counts {
        if m == 1 {
            continue; // single-cell oscillation vanishes
        }
        let lo = -((m / 2) as isize);
        let osc: Vec<f64> = par::map_indexed(n, |center| {
            let cij = grid.axis_indices(center);
            let mut cube_vals = Vec::with_capacity(m.pow(grid.dim() as u32));
            match grid.dim() {
                1 => {
                    for o in 0..m {
                        let i = (cij[0] as isize + lo + o as isize).rem_euclid(npd as isize);
                        cube_vals.push(u.values()[i as usize]);
                    }
                }
                _ => {
                    for o0 in 0..m {
                        let i0 = (cij[0] as isize + lo + o0 as isize).rem_euclid(npd as isize);
                        for o1 in 0..m {
                            let i1 = (cij[1] as isize + lo + o1 as isize).rem_euclid(npd as isize);
                            cube_vals.push(u.values()[i0 as usize * npd + i1 as usize]);
                        }
                    }
                }
            }
            cube_oscillation(&cube_vals)
        });
        let covered = cover_max(&grid, &osc, m);
        for (b, v) in best.iter_mut().zip(covered) {
            *b = b.max(v);
        }
    }
    Ok(real_field(grid, best))
}

/// Nonnegative spatial weight.
#[derive(Clone, Debug)]
pub struct Weight {
    name: String,
    grid: Grid,
    values: Vec<f64>,
}

impl Weight {
    pub fn from_values(name: impl Into<String>, grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::Parameter("weight length does not match grid".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Parameter(
                "weight values must be finite and nonnegative".into(),
            ));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(Error::Parameter("weight is identically zero".into()));
        }
        Ok(Weight {
            name: name.into(),
            grid,
            values,
        })
    }

    pub fn constant(grid: Grid) -> Self {
        Weight {
            name: "constant".into(),
            grid,
            values: vec![1.0; grid.num_points()],
        }
    }

    /// `w(x) = dist(x, center)^{-b}` with periodic distance; the cell at the
    /// singularity gets the value at distance h/2.
    pub fn power(grid: Grid, b: f64, center: Point) -> Self {
        let floor = 0.5 * grid.spacing();
        let values = (0..grid.num_points())
            .map(|i| {
                let d = grid.periodic_distance(grid.point(i), center).max(floor);
                d.powf(-b)
            })
            .collect();
        Weight {
            name: format!("power({b})"),
            grid,
            values,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn as_field(&self) -> Field {
        real_field(self.grid, self.values.clone())
    }
}

/// Muckenhoupt constant over the cube family. For p > 1 this is the max of
/// `avg_Q(w) * avg_Q(w^{1/(1-p)})^{p-1}`; for p = 1 it is `max Mw/w`.
pub fn ap_constant(w: &Weight, p: f64, family: &CubeFamily) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("A_p needs p >= 1, got {p}")));
    }
    let grid = w.grid;
    if (p - 1.0).abs() < 1e-14 {
        if let Some(idx) = w.values.iter().position(|&v| v <= 0.0) {
            return Err(Error::DegenerateWeight { index: idx });
        }
        let mw = hl_maximal(&w.as_field(), family)?;
        let mut best = 0.0f64;
        for (m, v) in mw.values().iter().zip(&w.values) {
            best = best.max(m.re / v);
        }
        return Ok(best);
    }
    let dual: Vec<f64> = w.values.iter().map(|v| v.powf(1.0 / (1.0 - p))).collect();
    let mut best = 0.0f64;
    for &m in &family.cell_counts {
        let a = box_averages(&grid, &w.values, m);
        let b = box_averages(&grid, &dual, m);
        for (av, bv) in a.iter().zip(&b) {
            best = best.max(av * bv.powf(p - 1.0));
        }
    }
    Ok(best)
}

/// `(sum |u|^p w h^d)^{1/p}`.
pub fn weighted_norm(u: &Field, w: &Weight, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Parameter(format!(
            "norm exponent must be positive, got {p}"
        )));
    }
    let h = u.grid().cell_volume();
    let s: f64 = u
        .values()
        .iter()
        .zip(&w.values)
        .map(|(uv, wv)| uv.norm().powf(p) * wv)
        .sum();
    Ok((s * h).powf(1.0 / p))
}

/// The exact discrete superlevel-set curve behind the weak norm.
#[derive(Clone, Debug)]
pub struct WeakNormCurve {
    /// Thresholds just below each distinct value of |u|, descending.
    pub lambdas: Vec<f64>,
    /// `w({|u| > lambda})` at each threshold.
    pub masses: Vec<f64>,
    /// `lambda^p * mass` at each threshold.
    pub products: Vec<f64>,
    /// The discrete supremum of the products.
    pub sup: f64,
    pub p: f64,
}

/// Weak L^p norm data: sort by |u| descending; cumulative w-masses give the
/// superlevel measures exactly, evaluated just below each distinct value.
pub fn weighted_weak_norm(u: &Field, w: &Weight, p: f64) -> Result<WeakNormCurve> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Parameter(format!(
            "weak norm exponent must be positive, got {p}"
        )));
    }
    let h = u.grid().cell_volume();
    let abs = u.abs_values();
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| abs[b].total_cmp(&abs[a]));

    let mut lambdas = Vec::new();
    let mut masses = Vec::new();
    let mut products = Vec::new();
    let mut running_mass = 0.0f64;
    let mut i = 0usize;
    while i < order.len() {
        let v = abs[order[i]];
        if v <= 0.0 {
            break;
        }
        // absorb the whole tied group before recording the level
        let mut j = i;
        while j < order.len() && abs[order[j]] == v {
            running_mass += w.values[order[j]] * h;
            j += 1;
        }
        let lambda = v * (1.0 - 1e-12);
        lambdas.push(lambda);
        masses.push(running_mass);
        products.push(lambda.powf(p) * running_mass);
        i = j;
    }
    let sup = products.iter().copied().fold(0.0, f64::max);
    Ok(WeakNormCurve {
        lambdas,
        masses,
        products,
        sup,
        p,
    })
}

/// `w({|u| > lambda})` computed directly, for cross-checks.
pub fn superlevel_mass(u: &Field, w: &Weight, lambda: f64) -> f64 {
    let h = u.grid().cell_volume();
    u.values()
        .iter()
        .zip(&w.values)
        .filter(|(uv, _)| uv.norm() > lambda)
        .map(|(_, wv)| wv)
        .sum::<f64>()
        * h
}
