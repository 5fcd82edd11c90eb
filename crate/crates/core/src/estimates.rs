//! Experiment drivers: pointwise domination by the maximal function,
//! per-block scaling laws, the exponent schedule for the dyadic ladder,
//! Fefferman-Stein ratios, and weak-type / L^1 ratio measurements.
//!
//! Scaling laws are asserted through fitted log2-slopes only; the hidden
//! constants of the underlying inequalities are never pinned.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{cube_average, inverse_transform, Cube, Field, Grid, Point, Space};
use crate::lp::{block_kernel, decompose, LPPartition};
use crate::maximal::{
    hl_maximal, sharp_maximal, weighted_norm, weighted_weak_norm, CubeFamily, Weight,
};
use crate::quantize::{apply_dual_pdo, apply_fio, apply_pdo, Phase};
use crate::symbol::Symbol;

/// Which quantization an experiment drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Pdo,
    Dual,
    Fio,
}

impl OperatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            OperatorKind::Pdo => "pdo",
            OperatorKind::Dual => "dual",
            OperatorKind::Fio => "fio",
        }
    }
}

fn apply_kind(kind: OperatorKind, a: &Symbol, phi: Option<&Phase>, u: &Field) -> Result<Field> {
    match kind {
        OperatorKind::Pdo => apply_pdo(a, u),
        OperatorKind::Dual => apply_dual_pdo(a, u),
        OperatorKind::Fio => {
            let phi = phi.ok_or_else(|| {
                Error::Precondition("fio experiments need a phase function".into())
            })?;
            apply_fio(a, phi, u)
        }
    }
}

// ---------------------------------------------------------------- schedule

/// Proof constants of the dyadic-ladder argument for 0 < delta < 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentSchedule {
    pub n: u32,
    pub delta: f64,
    /// Smallest integer strictly above `2n/(1-delta) + n`.
    pub n_delta: u32,
    /// Midpoint of the admissible window for theta_0.
    pub theta0: f64,
    pub t_delta: f64,
    /// First positive integer with `delta^{-gamma} >= (n - n^2/N)/T`.
    pub gamma: u32,
    pub theta1: f64,
    pub epsilon: f64,
    /// Integration-by-parts order used for large cubes.
    pub n_parts: u32,
}

impl ExponentSchedule {
    /// The lambda ladder `delta^{-k}`, k = 0..gamma-1.
    pub fn lambda_ladder(&self) -> Vec<f64> {
        (0..self.gamma)
            .map(|k| self.delta.powi(-(k as i32)))
            .collect()
    }

    /// Lower bound on 2^j demanded by the small-cube tail estimate.
    pub fn tail_threshold(&self, side: f64) -> f64 {
        let nf = self.n as f64;
        let exp = (nf - nf * nf / self.n_delta as f64) / self.t_delta;
        side.powf(-exp)
    }
}

/// Build the schedule; delta = 0 has no ladder and is rejected.
pub fn schedule(n: u32, delta: f64) -> Result<ExponentSchedule> {
    if n == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!(
            "the exponent schedule exists only for 0 < delta < 1 (got {delta}); \
             at delta = 0 the two-way dyadic split needs no ladder"
        )));
    }
    let nf = n as f64;
    let bound = 2.0 * nf / (1.0 - delta) + nf;
    let n_delta = (bound + 1e-9).floor() as u32 + 1;
    let nd = n_delta as f64;

    let upper = nf * (1.0 - delta) / 2.0 - nf * nf / (nd - nf);
    let lower = (nf * (1.0 - delta) / 2.0 - nf * nd / (nd - nf)).max(0.0);
    if !(lower < upper) {
        return Err(Error::Precondition(format!(
            "empty theta_0 window for n={n}, delta={delta}"
        )));
    }
    let theta0 = 0.5 * (lower + upper);
    let t_delta = -nf * nf / nd + (1.0 - nf / nd) * (nf * (1.0 - delta) / 2.0 - theta0);
    if !(t_delta > 0.0) {
        return Err(Error::Precondition(format!(
            "nonpositive decay rate t_delta={t_delta} for n={n}, delta={delta}"
        )));
    }

    let target = (nf - nf * nf / nd) / t_delta;
    let mut gamma = 1u32;
    while delta.powi(-(gamma as i32)) < target * (1.0 - 1e-12) {
        gamma += 1;
        if gamma > 10_000 {
            return Err(Error::Precondition("ladder does not terminate".into()));
        }
    }

    let theta1 = nf * (1.0 - delta) / 4.0;
    let epsilon = 0.5 * ((1.0 - delta) / 2.0 - theta1 / nf);
    debug_assert!(theta1 > 0.0 && theta1 < nf * (1.0 - delta) / 2.0);
    debug_assert!(epsilon > 0.0);

    Ok(ExponentSchedule {
        n,
        delta,
        n_delta,
        theta0,
        t_delta,
        gamma,
        theta1,
        epsilon,
        n_parts: n + 2,
    })
}

// ------------------------------------------------------------- slope fits

/// Least-squares fit of log2(measurement) against log2(abscissa).
#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub abscissae: Vec<f64>,
    pub measurements: Vec<f64>,
    pub fitted_slope: f64,
    /// Inclusive index range used for the fit.
    pub fit_window: (usize, usize),
    pub r_squared: f64,
    /// log2-slopes the bound predicts; two entries when two terms compete.
    pub predicted_slopes: Vec<f64>,
    /// Where the bound's dominant term switches, when it has two.
    pub crossover_index: Option<usize>,
}

/// Drop the extreme points when the range is wide enough to afford it.
fn default_fit_window(len: usize) -> (usize, usize) {
    if len >= 6 {
        (1, len - 2)
    } else {
        (0, len.saturating_sub(1))
    }
}

pub fn fit_loglog(
    abscissae: &[f64],
    measurements: &[f64],
    window: (usize, usize),
) -> Result<(f64, f64)> {
    let (lo, hi) = window;
    if hi < lo + 1 || hi >= abscissae.len() {
        return Err(Error::Precondition(
            "slope fit needs at least two points".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in lo..=hi {
        if !(abscissae[i] > 0.0) || !(measurements[i] > 0.0) {
            return Err(Error::Precondition(format!(
                "log-log fit needs positive data, got ({}, {}) at index {i}",
                abscissae[i], measurements[i]
            )));
        }
        xs.push(abscissae[i].log2());
        ys.push(measurements[i].log2());
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok((slope, r2))
}

fn build_report(
    abscissae: Vec<f64>,
    measurements: Vec<f64>,
    predicted_slopes: Vec<f64>,
    crossover_index: Option<usize>,
) -> Result<ScalingReport> {
    let window = default_fit_window(abscissae.len());
    let (fitted_slope, r_squared) = fit_loglog(&abscissae, &measurements, window)?;
    Ok(ScalingReport {
        abscissae,
        measurements,
        fitted_slope,
        fit_window: window,
        r_squared,
        predicted_slopes,
        crossover_index,
    })
}

// ------------------------------------------------------------- domination

/// Pointwise comparison of `M#(T u)` against `M u`.
#[derive(Clone, Debug)]
pub struct DominationReport {
    pub symbol_name: String,
    pub input_name: String,
    pub ratio_field: Vec<f64>,
    pub sup_ratio: f64,
}

/// Hypothesis of the sharp-maximal domination: order -n, no derivative
/// gain, and (for the non-dual operator) smoothness in x with delta < 1.
fn check_domination_meta(kind: OperatorKind, a: &Symbol, dim: usize) -> Result<()> {
    let meta = a.meta();
    if (meta.order + dim as f64).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "domination needs order -n = {}, got {}",
            -(dim as f64),
            meta.order
        )));
    }
    if meta.rho != 0.0 {
        return Err(Error::Precondition(format!(
            "domination is stated for rho = 0, got {}",
            meta.rho
        )));
    }
    match kind {
        OperatorKind::Pdo => {
            if meta.rough {
                return Err(Error::Precondition(
                    "rough symbols go through the dual operator".into(),
                ));
            }
            if meta.delta >= 1.0 {
                return Err(Error::Precondition("domination needs delta < 1".into()));
            }
        }
        OperatorKind::Dual => {}
        OperatorKind::Fio => {
            return Err(Error::Precondition(
                "domination experiments take pdo or dual".into(),
            ))
        }
    }
    Ok(())
}

pub fn domination_report(
    kind: OperatorKind,
    a: &Symbol,
    u: &Field,
    input_name: &str,
    family: &CubeFamily,
) -> Result<DominationReport> {
    check_domination_meta(kind, a, u.grid().dim())?;
    if u.max_abs() == 0.0 {
        return Ok(DominationReport {
            symbol_name: a.name().to_string(),
            input_name: input_name.to_string(),
            ratio_field: vec![0.0; u.len()],
            sup_ratio: 0.0,
        });
    }
    let tu = apply_kind(kind, a, None, u)?;
    let sharp = sharp_maximal(&tu, family)?;
    let mu = hl_maximal(u, family)?;
    let mut ratio_field = Vec::with_capacity(u.len());
    let mut sup_ratio = 0.0f64;
    for (s, m) in sharp.values().iter().zip(mu.values()) {
        let r = if m.re > 0.0 { s.re / m.re } else { f64::INFINITY };
        ratio_field.push(r);
        sup_ratio = sup_ratio.max(r);
    }
    Ok(DominationReport {
        symbol_name: a.name().to_string(),
        input_name: input_name.to_string(),
        ratio_field,
        sup_ratio,
    })
}

// ---------------------------------------------------------- lemma scaling

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lemma {
    L1,
    L2,
    L3,
    L4,
    L5,
}

impl Lemma {
    pub fn label(&self) -> &'static str {
        match self {
            Lemma::L1 => "L1",
            Lemma::L2 => "L2",
            Lemma::L3 => "L3",
            Lemma::L4 => "L4",
            Lemma::L5 => "L5",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "L1" | "l1" => Ok(Lemma::L1),
            "L2" | "l2" => Ok(Lemma::L2),
            "L3" | "l3" => Ok(Lemma::L3),
            "L4" | "l4" => Ok(Lemma::L4),
            "L5" | "l5" => Ok(Lemma::L5),
            other => Err(Error::Parameter(format!("unknown lemma {other}"))),
        }
    }
}

/// Cube, block range, and ladder data for one lemma experiment.
#[derive(Clone, Debug)]
pub struct LemmaConfig {
    /// Cube center; the box center unless an experiment moves it.
    pub x0: Point,
    /// Cube side l.
    pub side: f64,
    /// Inclusive dyadic block range.
    pub j_range: (u32, u32),
    /// delta used for ladder-dependent predictions (L3, L4, L5).
    pub delta: f64,
    /// Integration-by-parts order N > n for the large-cube bound (L5).
    pub n_parts: u32,
    /// Number of translated copies of the cube the measurement is averaged
    /// over. The bound holds for every translate, so averaging reduces the
    /// speckle noise of a single small cube without moving the exponent.
    pub translates: u32,
}

impl LemmaConfig {
    pub fn new(side: f64, j_lo: u32, j_hi: u32, delta: f64) -> Self {
        LemmaConfig {
            x0: [0.0, 0.0],
            side,
            j_range: (j_lo, j_hi),
            delta,
            n_parts: 3,
            translates: 1,
        }
    }

    pub fn with_translates(mut self, translates: u32) -> Self {
        self.translates = translates.max(1);
        self
    }

    /// Cube centers: x0 shifted along the first axis by L/translates steps.
    pub fn cube_centers(&self, grid: &Grid) -> Vec<Point> {
        let t = self.translates.max(1);
        let step = grid.side_length() / t as f64;
        (0..t)
            .map(|k| {
                let mut c = self.x0;
                c[0] = grid.wrap(c[0] + k as f64 * step);
                c
            })
            .collect()
    }
}

/// Indices of lattice cells belonging to the cube.
pub fn member_cells(grid: &Grid, q: &Cube) -> Vec<usize> {
    (0..grid.num_points())
        .filter(|&i| q.contains(grid, grid.point(i)))
        .collect()
}

/// Kernel-difference mass `sum_y |u(y)| |K_j(x,y) - K_j(z,y)| h^d` for one
/// pair of evaluation points.
pub fn kernel_pair_discrepancy(
    kernel: &crate::quantize::KernelMatrix,
    u: &Field,
    x_idx: usize,
    z_idx: usize,
) -> f64 {
    let h = u.grid().cell_volume();
    u.values()
        .iter()
        .enumerate()
        .map(|(y, uv)| uv.norm() * (kernel.entry(x_idx, y) - kernel.entry(z_idx, y)).norm())
        .sum::<f64>()
        * h
}

fn check_lemma_hypotheses(
    lemma: Lemma,
    grid: &Grid,
    cfg: &LemmaConfig,
    partition: &LPPartition,
) -> Result<()> {
    let (j_lo, j_hi) = cfg.j_range;
    if j_lo < 1 || j_hi < j_lo {
        return Err(Error::Precondition(
            "block range must start at j >= 1".into(),
        ));
    }
    if j_hi > partition.j_max() {
        return Err(Error::Precondition(format!(
            "block {j_hi} beyond the partition's j_max {}",
            partition.j_max()
        )));
    }
    if cfg.side < grid.spacing() {
        return Err(Error::Precondition(
            "cube side below lattice spacing".into(),
        ));
    }
    let small_cube = cfg.side < 1.0;
    match lemma {
        Lemma::L1 => {
            if !small_cube {
                return Err(Error::Precondition("L1 needs side < 1".into()));
            }
        }
        Lemma::L2 | Lemma::L3 => {
            if !small_cube {
                return Err(Error::Precondition("L2/L3 need side < 1".into()));
            }
            if 2f64.powi(j_lo as i32) * cfg.side < 1.0 - 1e-9 {
                return Err(Error::Precondition(format!(
                    "L2/L3 need 2^j >= 1/side; j={j_lo} violates it for side {}",
                    cfg.side
                )));
            }
            if lemma == Lemma::L3 && !(cfg.delta > 0.0 && cfg.delta < 1.0) {
                return Err(Error::Precondition("L3 needs 0 < delta < 1".into()));
            }
        }
        Lemma::L4 => {
            if !small_cube {
                return Err(Error::Precondition("L4 needs side < 1".into()));
            }
            let sched = schedule(grid.dim() as u32, cfg.delta)?;
            let threshold = sched.tail_threshold(cfg.side);
            if 2f64.powi(j_lo as i32) < threshold * (1.0 - 1e-9) {
                return Err(Error::Precondition(format!(
                    "L4 needs 2^j >= side^(-(n - n^2/N)/T) = {threshold:.3}, j={j_lo} is too small"
                )));
            }
        }
        Lemma::L5 => {
            if small_cube {
                return Err(Error::Precondition("L5 needs side >= 1".into()));
            }
            if cfg.n_parts as usize <= grid.dim() {
                return Err(Error::Precondition("L5 needs N > n".into()));
            }
        }
    }
    Ok(())
}

/// Measure one lemma's left-hand quantity across the block range and fit
/// its log2-slope. L1 measures the kernel-difference mass over point pairs
/// in the cube; the others measure the block average of |T_j u| over the
/// cube.
pub fn lemma_scaling(
    lemma: Lemma,
    a: &Symbol,
    u: &Field,
    partition: &LPPartition,
    cfg: &LemmaConfig,
) -> Result<ScalingReport> {
    let grid = u.grid();
    check_lemma_hypotheses(lemma, &grid, cfg, partition)?;
    let centers = cfg.cube_centers(&grid);
    let cubes: Vec<Cube> = centers.iter().map(|c| Cube::new(*c, cfg.side)).collect();
    for q in &cubes {
        if member_cells(&grid, q).is_empty() {
            return Err(Error::Precondition("cube contains no lattice cells".into()));
        }
    }
    let blocks = decompose(a, partition);
    let (j_lo, j_hi) = cfg.j_range;
    let nf = grid.dim() as f64;

    let mut abscissae = Vec::new();
    let mut measurements = Vec::new();
    for j in j_lo..=j_hi {
        let block = &blocks[j as usize];
        let m = match lemma {
            Lemma::L1 => {
                let k = block_kernel(block, false)?;
                let mut acc = 0.0;
                for q in &cubes {
                    let cells = member_cells(&grid, q);
                    // subsample pairs when the cube is large
                    let stride = 1 + cells.len() / 8;
                    let pts: Vec<usize> = cells.iter().copied().step_by(stride).collect();
                    let mut worst = 0.0f64;
                    for (ai, &x_idx) in pts.iter().enumerate() {
                        for &z_idx in pts.iter().skip(ai + 1) {
                            worst = worst.max(kernel_pair_discrepancy(&k, u, x_idx, z_idx));
                        }
                    }
                    acc += worst;
                }
                acc / cubes.len() as f64
            }
            _ => {
                let tu = apply_pdo(&block.symbol(), u)?;
                let abs = Field::new(
                    grid,
                    Space::Spatial,
                    tu.values()
                        .iter()
                        .map(|v| Complex64::new(v.norm(), 0.0))
                        .collect(),
                )?;
                let mut acc = 0.0;
                for q in &cubes {
                    acc += cube_average(&abs, q)?.re;
                }
                acc / cubes.len() as f64
            }
        };
        abscissae.push(match lemma {
            Lemma::L1 => 2f64.powi(j as i32) * cfg.side,
            _ => 2f64.powi(j as i32),
        });
        measurements.push(m);
    }

    let (predicted, crossover) = match lemma {
        Lemma::L1 => (vec![1.0], None),
        Lemma::L2 => (vec![-nf / 2.0], None),
        // bound exponents of the two competing terms at fixed lambda
        Lemma::L3 => (vec![cfg.delta, -nf / 2.0], None),
        Lemma::L4 => {
            let sched = schedule(grid.dim() as u32, cfg.delta)?;
            (vec![-sched.t_delta], None)
        }
        Lemma::L5 => {
            let sched = schedule(grid.dim() as u32, cfg.delta)?;
            let s1 = -nf / 2.0 * (1.0 - cfg.delta) + sched.theta1 + sched.epsilon * nf;
            let s2 = -sched.epsilon * (cfg.n_parts as f64 - nf);
            let lfac = cfg.side.powf(-(cfg.n_parts as f64 - nf));
            // dominant term per block; flag the switch if it happens in range
            let mut cross = None;
            let mut prev_first = None;
            for (idx, j) in (j_lo..=j_hi).enumerate() {
                let t1 = 2f64.powf(j as f64 * s1);
                let t2 = 2f64.powf(j as f64 * s2) * lfac;
                let first = t1 >= t2;
                if let Some(p) = prev_first {
                    if p != first && cross.is_none() {
                        cross = Some(idx);
                    }
                }
                prev_first = Some(first);
            }
            (vec![s1, s2], cross)
        }
    };
    build_report(abscissae, measurements, predicted, crossover)
}

// -------------------------------------------------------- ratio experiments

/// `||Mu|| / ||M#u||` in the requested weighted norm.
pub fn fefferman_stein_ratio(u: &Field, w: &Weight, p: f64, weak: bool) -> Result<f64> {
    let first = u.values()[0];
    if u.values().iter().all(|v| *v == first) {
        return Err(Error::DegenerateInput(
            "constant input has vanishing sharp maximal function".into(),
        ));
    }
    let family = CubeFamily::dyadic(u.grid());
    let mu = hl_maximal(u, &family)?;
    let sharp = sharp_maximal(u, &family)?;
    let (num, den) = if weak {
        (
            weighted_weak_norm(&mu, w, p)?.sup.powf(1.0 / p),
            weighted_weak_norm(&sharp, w, p)?.sup.powf(1.0 / p),
        )
    } else {
        (weighted_norm(&mu, w, p)?, weighted_norm(&sharp, w, p)?)
    };
    if den == 0.0 {
        return Err(Error::DegenerateInput("sharp maximal norm vanished".into()));
    }
    Ok(num / den)
}

/// `||T u||_{L^{1,inf}_w} / ||u||_{L^1_w}`. The theorem hypotheses travel
/// in the symbol's metadata and are the caller's contract; deliberately
/// violating the order is how sharpness gets measured.
pub fn weak_type_ratio(
    kind: OperatorKind,
    a: &Symbol,
    phi: Option<&Phase>,
    u: &Field,
    w: &Weight,
) -> Result<f64> {
    if u.max_abs() == 0.0 {
        return Err(Error::DegenerateInput(
            "weak-type ratio of zero input".into(),
        ));
    }
    let tu = apply_kind(kind, a, phi, u)?;
    let num = weighted_weak_norm(&tu, w, 1.0)?.sup;
    let den = weighted_norm(u, w, 1.0)?;
    Ok(num / den)
}

/// Unweighted `||T u||_1 / ||u||_1` under the strict-order hypothesis.
pub fn l1_ratio(kind: OperatorKind, a: &Symbol, u: &Field) -> Result<f64> {
    let meta = a.meta();
    let nf = u.grid().dim() as f64;
    let bound = match kind {
        OperatorKind::Pdo => {
            -nf / 2.0 * (1.0 - meta.rho) - nf / 2.0 * (meta.delta - meta.rho).max(0.0)
        }
        OperatorKind::Dual => -nf / 2.0 * (1.0 - meta.rho),
        OperatorKind::Fio => return Err(Error::Precondition("l1 ratio takes pdo or dual".into())),
    };
    if !(meta.order < bound) {
        return Err(Error::Precondition(format!(
            "L^1 bound needs order strictly below {bound}, got {}",
            meta.order
        )));
    }
    if u.max_abs() == 0.0 {
        return Err(Error::DegenerateInput("l1 ratio of zero input".into()));
    }
    let tu = apply_kind(kind, a, None, u)?;
    let w = Weight::constant(u.grid());
    Ok(weighted_norm(&tu, &w, 1.0)? / weighted_norm(u, &w, 1.0)?)
}

// ------------------------------------------------------------ input families

/// Seeded input generators used by the ratio and domination experiments.
#[derive(Clone, Debug, PartialEq)]
pub enum InputKind {
    /// Single lattice cell of unit L^1 mass at a random position.
    Spike,
    /// Unit-modulus random phases on the whole frequency lattice.
    RandomPhase,
    /// Random spectrum supported below a quarter of the Nyquist frequency.
    BandLimited,
    /// Smooth positive bump of random width and position.
    Bump,
    /// `|x|^{-a} chi(|x| < eta)` with the singular cell set at distance h/2.
    SingularProfile { a_exp: f64, eta: f64 },
}

impl InputKind {
    pub fn label(&self) -> String {
        match self {
            InputKind::Spike => "spike".into(),
            InputKind::RandomPhase => "random_phase".into(),
            InputKind::BandLimited => "band_limited".into(),
            InputKind::Bump => "bump".into(),
            InputKind::SingularProfile { a_exp, eta } => format!("singular({a_exp},{eta})"),
        }
    }
}

pub fn make_input(grid: Grid, kind: &InputKind, rng: &mut ChaCha8Rng) -> Result<Field> {
    match kind {
        InputKind::Spike => {
            let mut vals = vec![Complex64::new(0.0, 0.0); grid.num_points()];
            let at = rng.random_range(0..grid.num_points());
            vals[at] = Complex64::new(1.0 / grid.cell_volume(), 0.0);
            Field::new(grid, Space::Spatial, vals)
        }
        InputKind::RandomPhase => {
            let vals: Vec<Complex64> = (0..grid.num_points())
                .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
                .collect();
            let spec = Field::new(grid, Space::Frequency, vals)?;
            inverse_transform(&spec)
        }
        InputKind::BandLimited => {
            let cutoff = grid.nyquist() / 4.0;
            let vals: Vec<Complex64> = (0..grid.num_points())
                .map(|k| {
                    let xi = grid.freq(k);
                    let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                    if r <= cutoff {
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let spec = Field::new(grid, Space::Frequency, vals)?;
            inverse_transform(&spec)
        }
        InputKind::Bump => {
            let l = grid.side_length();
            let sigma = l / 16.0 + rng.random::<f64>() * l / 8.0;
            let c0 = (rng.random::<f64>() - 0.5) * l;
            let c1 = if grid.dim() == 2 {
                (rng.random::<f64>() - 0.5) * l
            } else {
                0.0
            };
            let g = grid;
            Ok(Field::from_spatial_fn(grid, move |x| {
                let d = g.periodic_distance(x, [c0, c1]);
                Complex64::new((-(d * d) / (sigma * sigma)).exp(), 0.0)
            }))
        }
        InputKind::SingularProfile { a_exp, eta } => {
            let floor = 0.5 * grid.spacing();
            let (a_exp, eta) = (*a_exp, *eta);
            Ok(Field::from_spatial_fn(grid, move |x| {
                let d = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if d < eta {
                    Complex64::new(d.max(floor).powf(-a_exp), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }))
        }
    }
}

/// A deterministic labeled family cycling over the requested kinds.
pub fn input_family(
    grid: Grid,
    kinds: &[InputKind],
    count: usize,
    seed: u64,
) -> Result<Vec<(String, Field)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let kind = &kinds[i % kinds.len()];
        let field = make_input(grid, kind, &mut rng)?;
        out.push((format!("{}#{i}", kind.label()), field));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn schedule_frozen_values_dim_one() {
        // closed-form rationals: N=6, theta0 = 1/40, T = 1/48, gamma = 6
        let s = schedule(1, 0.5).unwrap();
        assert_eq!(s.n_delta, 6);
        assert!((s.theta0 - 0.025).abs() < 1e-12);
        assert!((s.t_delta - 1.0 / 48.0).abs() < 1e-9);
        assert_eq!(s.gamma, 6);
        assert!((s.theta1 - 0.125).abs() < 1e-12);
        assert!((s.epsilon - 0.0625).abs() < 1e-12);
        assert!(s.n_parts > s.n);
    }

    #[test]
    fn schedule_frozen_values_dim_two() {
        // N=11, theta0 = 1/36, T = 1/44
        let s = schedule(2, 0.5).unwrap();
        assert_eq!(s.n_delta, 11);
        assert!((s.theta0 - 1.0 / 36.0).abs() < 1e-12);
        assert!((s.t_delta - 1.0 / 44.0).abs() < 1e-9);
    }

    #[test]
    fn schedule_invariants_over_the_delta_grid() {
        for n in [1u32, 2] {
            for k in 1..=9 {
                let delta = k as f64 / 10.0;
                let s = schedule(n, delta).unwrap();
                let nf = n as f64;
                let nd = s.n_delta as f64;
                assert!(nd > 2.0 * nf / (1.0 - delta) + nf - 1e-9);
                let upper = nf * (1.0 - delta) / 2.0 - nf * nf / (nd - nf);
                let lower = (nf * (1.0 - delta) / 2.0 - nf * nd / (nd - nf)).max(0.0);
                assert!(s.theta0 > lower && s.theta0 < upper);
                assert!(s.t_delta > 0.0, "n={n} delta={delta}");
                // gamma is the first integer reaching the ladder target
                let target = (nf - nf * nf / nd) / s.t_delta;
                assert!(delta.powi(-(s.gamma as i32)) >= target * (1.0 - 1e-9));
                if s.gamma > 1 {
                    assert!(delta.powi(-(s.gamma as i32 - 1)) < target);
                }
                assert!(s.theta1 > 0.0 && s.theta1 < nf * (1.0 - delta) / 2.0);
                assert!(s.epsilon > 0.0 && s.epsilon < (1.0 - delta) / 2.0 - s.theta1 / nf);
                let ladder = s.lambda_ladder();
                assert_eq!(ladder.len(), s.gamma as usize);
                assert!(ladder.iter().all(|l| *l >= 1.0));
            }
        }
    }

    #[test]
    fn schedule_rejects_delta_zero_and_one() {
        assert!(matches!(schedule(1, 0.0), Err(Error::Precondition(_))));
        assert!(matches!(schedule(1, 1.0), Err(Error::Precondition(_))));
        assert!(matches!(schedule(2, -0.3), Err(Error::Precondition(_))));
    }

    #[test]
    fn loglog_fit_recovers_exact_power_law() {
        let xs: Vec<f64> = (1..=6).map(|k| 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.7)).collect();
        let (slope, r2) = fit_loglog(&xs, &ys, (0, 5)).unwrap();
        assert!((slope + 0.7).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
        // windowed fit drops the extremes for long ranges
        assert_eq!(default_fit_window(6), (1, 4));
        assert_eq!(default_fit_window(4), (0, 3));
    }

    #[test]
    fn domination_zero_input_and_meta_guards() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let fam = CubeFamily::dyadic(g);
        let zero = Field::zeros(g, Space::Spatial);
        let a = Symbol::bessel_multiplier(-1.0);
        let rep = domination_report(OperatorKind::Pdo, &a, &zero, "zero", &fam).unwrap();
        assert_eq!(rep.sup_ratio, 0.0);

        // wrong order
        let bad = Symbol::bessel_multiplier(-0.3);
        let u = make_input(g, &InputKind::Spike, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(domination_report(OperatorKind::Pdo, &bad, &u, "spike", &fam).is_err());
        // rough symbols must go through the dual operator
        let rough = Symbol::rough_sample(-1.0);
        assert!(domination_report(OperatorKind::Pdo, &rough, &u, "spike", &fam).is_err());
        assert!(domination_report(OperatorKind::Dual, &rough, &u, "spike", &fam).is_ok());
    }

    #[test]
    fn domination_finite_for_conforming_symbols() {
        let g = Grid::new(1, 64, TAU).unwrap();
        let fam = CubeFamily::dyadic(g);
        let inputs = input_family(g, &[InputKind::Spike, InputKind::RandomPhase], 4, 42).unwrap();
        for a in [
            Symbol::bessel_multiplier(-1.0),
            Symbol::oscillating_exotic(-1.0, 0.5).unwrap(),
        ] {
            for (name, u) in &inputs {
                let rep = domination_report(OperatorKind::Pdo, &a, u, name, &fam).unwrap();
                assert!(rep.sup_ratio.is_finite() && rep.sup_ratio > 0.0);
            }
        }
    }

    #[test]
    fn lemma_hypothesis_guards() {
        let g = Grid::new(1, 64, TAU).unwrap();
        let p = LPPartition::build(g, 2.0).unwrap();
        let a = Symbol::bessel_multiplier(-1.0);
        let u = make_input(g, &InputKind::RandomPhase, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();

        // L2 with 2^j < 1/side
        let cfg = LemmaConfig::new(0.25, 1, 3, 0.5);
        assert!(matches!(
            lemma_scaling(Lemma::L2, &a, &u, &p, &cfg),
            Err(Error::Precondition(_))
        ));
        // L5 with a small cube
        let cfg = LemmaConfig::new(0.25, 2, 4, 0.5);
        assert!(lemma_scaling(Lemma::L5, &a, &u, &p, &cfg).is_err());
        // L1 with side >= 1
        let cfg = LemmaConfig::new(1.5, 2, 4, 0.5);
        assert!(lemma_scaling(Lemma::L1, &a, &u, &p, &cfg).is_err());
        // block range beyond the partition
        let cfg = LemmaConfig::new(0.25, 2, 40, 0.5);
        assert!(lemma_scaling(Lemma::L2, &a, &u, &p, &cfg).is_err());
    }

    #[test]
    fn kernel_difference_vanishes_at_equal_points() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let p = LPPartition::build(g, 2.0).unwrap();
        let a = Symbol::counterexample(-0.2);
        let u = make_input(g, &InputKind::RandomPhase, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let blocks = decompose(&a, &p);
        let k = block_kernel(&blocks[2], false).unwrap();
        assert_eq!(kernel_pair_discrepancy(&k, &u, 5, 5), 0.0);
        assert!(kernel_pair_discrepancy(&k, &u, 5, 6) > 0.0);
    }

    #[test]
    fn l2_block_average_decays_with_the_right_slope() {
        // quarter-unit cubes, flat-spectrum input: slope ~ -1/2
        let g = Grid::new(1, 128, std::f64::consts::PI).unwrap();
        let p = LPPartition::build(g, 2.0).unwrap();
        let a = Symbol::bessel_multiplier(-1.0);
        let u = make_input(g, &InputKind::RandomPhase, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let cfg = LemmaConfig::new(0.25, 3, 6, 0.5).with_translates(12);
        let rep = lemma_scaling(Lemma::L2, &a, &u, &p, &cfg).unwrap();
        assert_eq!(rep.predicted_slopes, vec![-0.5]);
        assert!(
            (rep.fitted_slope + 0.5).abs() < 0.35,
            "slope {}",
            rep.fitted_slope
        );
        assert!(rep.r_squared > 0.8, "r2 {}", rep.r_squared);
    }

    #[test]
    fn fefferman_stein_guards_and_scale_invariance() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let w = Weight::constant(g);
        let constant = Field::constant(g, Space::Spatial, Complex64::new(2.0, 0.0));
        assert!(matches!(
            fefferman_stein_ratio(&constant, &w, 1.0, true),
            Err(Error::DegenerateInput(_))
        ));

        let u = make_input(g, &InputKind::Bump, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        let r1 = fefferman_stein_ratio(&u, &w, 1.0, true).unwrap();
        let r2 =
            fefferman_stein_ratio(&u.scaled(Complex64::new(17.0, 0.0)), &w, 1.0, true).unwrap();
        assert!(r1.is_finite() && r1 > 0.0);
        assert!((r1 - r2).abs() < 1e-12 * r1);
    }

    #[test]
    fn weak_type_ratio_basics() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let w = Weight::constant(g);
        let a = Symbol::bessel_multiplier(-1.0);
        let zero = Field::zeros(g, Space::Spatial);
        assert!(matches!(
            weak_type_ratio(OperatorKind::Pdo, &a, None, &zero, &w),
            Err(Error::DegenerateInput(_))
        ));

        let u = make_input(g, &InputKind::Spike, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let r = weak_type_ratio(OperatorKind::Pdo, &a, None, &u, &w).unwrap();
        assert!(r.is_finite() && r > 0.0);

        // exact invariance under input scaling
        let rs = weak_type_ratio(
            OperatorKind::Pdo,
            &a,
            None,
            &u.scaled(Complex64::new(0.037, 0.0)),
            &w,
        )
        .unwrap();
        assert!((r - rs).abs() < 1e-10 * r);

        // degenerate phase reduces the fio kind to the pdo kind
        let rf = weak_type_ratio(OperatorKind::Fio, &a, Some(&Phase::linear()), &u, &w).unwrap();
        assert!((r - rf).abs() < 1e-10 * r);
        assert!(weak_type_ratio(OperatorKind::Fio, &a, None, &u, &w).is_err());
    }

    #[test]
    fn l1_ratio_hypothesis_and_values() {
        let g = Grid::new(1, 32, TAU).unwrap();
        // order must be strictly below -n/2
        let borderline = Symbol::bessel_multiplier(-0.4);
        let u = make_input(g, &InputKind::Spike, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert!(matches!(
            l1_ratio(OperatorKind::Pdo, &borderline, &u),
            Err(Error::Precondition(_))
        ));

        let a = Symbol::bessel_multiplier(-0.8);
        let mut ratios = Vec::new();
        for (_, v) in input_family(g, &[InputKind::Spike, InputKind::BandLimited], 10, 9).unwrap()
        {
            ratios.push(l1_ratio(OperatorKind::Pdo, &a, &v).unwrap());
        }
        assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        let top = ratios.iter().copied().fold(0.0, f64::max);
        assert!(top < 50.0, "family ratios unexpectedly large: {top}");

        // scaling invariance
        let r1 = l1_ratio(OperatorKind::Pdo, &a, &u).unwrap();
        let r2 = l1_ratio(OperatorKind::Pdo, &a, &u.scaled(Complex64::new(0.0, 3.0))).unwrap();
        assert!((r1 - r2).abs() < 1e-12 * r1);

        // zero symbol gives ratio zero
        let zero_sym = Symbol::multiplier(
            "zero",
            crate::symbol::SymbolMeta::new(-1.0, 0.0, 0.0).unwrap(),
            |_| Complex64::new(0.0, 0.0),
        );
        assert_eq!(l1_ratio(OperatorKind::Pdo, &zero_sym, &u).unwrap(), 0.0);
    }

    #[test]
    fn input_family_is_deterministic() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let f1 = input_family(g, &[InputKind::Spike, InputKind::Bump], 6, 11).unwrap();
        let f2 = input_family(g, &[InputKind::Spike, InputKind::Bump], 6, 11).unwrap();
        for ((n1, u1), (n2, u2)) in f1.iter().zip(&f2) {
            assert_eq!(n1, n2);
            assert_eq!(u1.values(), u2.values());
        }
        // singular profile vanishes outside its support
        let sp = make_input(
            g,
            &InputKind::SingularProfile {
                a_exp: 0.9,
                eta: 1.0,
            },
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        for i in 0..g.num_points() {
            let d = g.point(i)[0].abs();
            if d >= 1.0 {
                assert_eq!(sp.values()[i].norm(), 0.0);
            }
        }
    }
}
