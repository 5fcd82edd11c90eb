//! Sharpness of the critical symbol order: Bessel potential kernels, the
//! convolution identity for the modulated multiplier `e^{i xi_1} <xi>^m`,
//! and the blow-up ladder that makes the weighted weak-type bound fail
//! above order -n.
//!
//! With the transform convention used here, multiplying the spectrum by
//! `e^{i xi_1} = e^{i <x0, xi>}` shifts the kernel's singularity to the
//! image point `-x0`. The singular input sits at the origin, the weight
//! and the observation annuli are centered at the image point, and the two
//! regions are kept disjoint. On the torus this is the reflection of the
//! same construction with the opposite modulation sign.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimates::{fit_loglog, weak_type_ratio, InputKind, OperatorKind, ScalingReport};
use crate::grid::{forward_transform, inverse_transform, Field, Grid, Point, Space};
use crate::maximal::Weight;
use crate::quantize::apply_pdo;
use crate::symbol::{bracket, Symbol};

/// Parameters of the blow-up construction.
///
/// The exponents satisfy `0 < -m < a < n`, `0 < b < n` and `a + b + m >= n`;
/// equality is admitted for boundary (flat-scaling) runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SharpnessConfig {
    /// Symbol order, 0 > m > -n.
    pub m: f64,
    /// Input singularity exponent a.
    pub a_exp: f64,
    /// Weight exponent b.
    pub b_exp: f64,
    /// Support radius of the singular input.
    pub eta: f64,
    /// Modulation vector of the symbol; the kernel image sits at -x0.
    pub x0: Point,
    /// Observation radii, descending.
    pub eps_ladder: Vec<f64>,
}

impl SharpnessConfig {
    /// The standard 1-d configuration.
    pub fn standard_1d() -> Self {
        SharpnessConfig {
            m: -0.2,
            a_exp: 0.9,
            b_exp: 0.9,
            eta: 0.25,
            x0: [1.0, 0.0],
            eps_ladder: vec![0.2, 0.14, 0.1, 0.07, 0.05],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let n = dim as f64;
        if !(self.m < 0.0 && -self.m < self.a_exp && self.a_exp < n) {
            return Err(Error::Parameter(format!(
                "need 0 < -m < a < n, got m={}, a={}",
                self.m, self.a_exp
            )));
        }
        if !(self.b_exp > 0.0 && self.b_exp < n) {
            return Err(Error::Parameter(format!(
                "need 0 < b < n, got b={}",
                self.b_exp
            )));
        }
        if self.a_exp + self.b_exp + self.m < n - 1e-12 {
            return Err(Error::Parameter(format!(
                "need a + b + m >= n for the blow-up, got {}",
                self.a_exp + self.b_exp + self.m
            )));
        }
        if !(self.eta > 0.0) {
            return Err(Error::Parameter("eta must be positive".into()));
        }
        let dist = (self.x0[0] * self.x0[0] + self.x0[1] * self.x0[1]).sqrt();
        let eps_max = self.eps_ladder.first().copied().unwrap_or(0.0);
        if self.eta + eps_max >= dist {
            return Err(Error::Parameter(format!(
                "input ball (radius {}) and observation ball (radius {eps_max}) \
                 around the image point must stay disjoint",
                self.eta
            )));
        }
        let mut prev = f64::INFINITY;
        for &e in &self.eps_ladder {
            if !(e > 0.0 && e < prev) {
                return Err(Error::Parameter(
                    "eps ladder must be positive and strictly descending".into(),
                ));
            }
            prev = e;
        }
        Ok(())
    }

    /// Predicted log2-slope of the ladder measurements against eps.
    pub fn predicted_slope(&self, dim: usize) -> f64 {
        dim as f64 - self.a_exp - self.m - self.b_exp
    }

    /// Where the kernel singularity lands: the reflected modulation point.
    pub fn singular_point(&self) -> Point {
        [-self.x0[0], -self.x0[1]]
    }
}

/// Sampled Bessel potential kernel of order `-m`.
#[derive(Clone, Debug)]
pub struct BesselKernel {
    pub order: f64,
    pub samples: Field,
}

/// Inverse transform of the multiplier `<xi>^m` on the lattice. Requires
/// `-n < m < 0` so the near-origin singularity `|x|^{-n-m}` is integrable.
pub fn bessel_kernel(m: f64, grid: &Grid) -> Result<BesselKernel> {
    let n = grid.dim() as f64;
    if !(m < 0.0 && m > -n) {
        return Err(Error::Parameter(format!(
            "bessel kernel needs -n < m < 0, got m={m} in dimension {n}"
        )));
    }
    let spec = Field::from_freq_fn(*grid, |xi| Complex64::new(bracket(xi).powf(m), 0.0));
    let samples = inverse_transform(&spec)?;
    Ok(BesselKernel { order: -m, samples })
}

impl BesselKernel {
    /// Total lattice mass `sum G h^d`; equals the multiplier at zero
    /// frequency, i.e. 1, up to rounding.
    pub fn total_mass(&self) -> f64 {
        let h = self.samples.grid().cell_volume();
        self.samples.values().iter().map(|v| v.re).sum::<f64>() * h
    }

    /// Log-log slope of |G| against |x| over the decade of lattice radii
    /// nearest the origin. The expected value is -(n + m).
    pub fn near_origin_slope(&self) -> Result<(f64, f64)> {
        let grid = self.samples.grid();
        let h = grid.spacing();
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for i in 0..grid.num_points() {
            let r = grid.periodic_distance(grid.point(i), [0.0, 0.0]);
            if r > 0.5 * h && r <= 10.0 * h {
                pts.push((r, self.samples.values()[i].norm()));
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
        let (rs, gs): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        fit_loglog(&rs, &gs, (0, rs.len() - 1))
    }

    /// Largest asymmetry |G(x) - G(-x)| over the lattice.
    pub fn radial_asymmetry(&self) -> f64 {
        let grid = self.samples.grid();
        let npd = grid.points_per_dim();
        let reflect = |i: usize| (npd - i) % npd;
        let mut worst = 0.0f64;
        for idx in 0..grid.num_points() {
            let ij = grid.axis_indices(idx);
            let r = match grid.dim() {
                1 => reflect(ij[0]),
                _ => grid.flat_index([reflect(ij[0]), reflect(ij[1])]),
            };
            worst = worst.max((self.samples.values()[idx] - self.samples.values()[r]).norm());
        }
        worst
    }
}

/// The singular input `u = |x|^{-a} chi(|x| < eta)` and the power weight
/// centered at the kernel's image point.
pub fn counterexample_fields(cfg: &SharpnessConfig, grid: &Grid) -> Result<(Field, Weight)> {
    cfg.validate(grid.dim())?;
    let half_box = 0.5 * grid.side_length();
    let x0_norm = (cfg.x0[0] * cfg.x0[0] + cfg.x0[1] * cfg.x0[1]).sqrt();
    if x0_norm + cfg.eta >= half_box {
        return Err(Error::Parameter(format!(
            "box side {} too small to separate the construction from the wrap seam",
            grid.side_length()
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let u = crate::estimates::make_input(
        *grid,
        &InputKind::SingularProfile {
            a_exp: cfg.a_exp,
            eta: cfg.eta,
        },
        &mut rng,
    )?;
    let w = Weight::power(*grid, cfg.b_exp, cfg.singular_point());
    Ok((u, w))
}

use rand::SeedableRng;

/// Per-axis lattice shift realizing the modulation vector; errors if x0 is
/// not lattice-aligned.
fn modulation_shift(grid: &Grid, x0: Point) -> Result<[usize; 2]> {
    let h = grid.spacing();
    let npd = grid.points_per_dim();
    let mut s = [0usize; 2];
    for ax in 0..grid.dim() {
        let cells = x0[ax] / h;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "modulation point {:?} is not lattice-aligned (h = {h})",
                x0
            )));
        }
        s[ax] = (rounded as i64).rem_euclid(npd as i64) as usize;
    }
    Ok(s)
}

/// Compare `T_a u` for the modulated multiplier against spectral
/// convolution with the shifted Bessel kernel; returns the largest
/// relative discrepancy.
pub fn convolution_identity_check(cfg: &SharpnessConfig, grid: &Grid) -> Result<f64> {
    cfg.validate(grid.dim())?;
    let (u, _) = counterexample_fields(cfg, grid)?;
    let a = Symbol::counterexample(cfg.m);
    let route1 = apply_pdo(&a, &u)?;

    let kernel = bessel_kernel(cfg.m, grid)?;
    let shift = modulation_shift(grid, cfg.x0)?;
    let npd = grid.points_per_dim();
    let shifted: Vec<Complex64> = (0..grid.num_points())
        .map(|idx| {
            let ij = grid.axis_indices(idx);
            let s0 = (ij[0] + shift[0]) % npd;
            let src = match grid.dim() {
                1 => s0,
                _ => grid.flat_index([s0, (ij[1] + shift[1]) % npd]),
            };
            kernel.samples.values()[src]
        })
        .collect();
    let g_shift = Field::new(*grid, Space::Spatial, shifted)?;

    // periodic convolution through the spectrum
    let gh = forward_transform(&g_shift)?;
    let uh = forward_transform(&u)?;
    let prod: Vec<Complex64> = gh
        .values()
        .iter()
        .zip(uh.values())
        .map(|(a, b)| a * b)
        .collect();
    let route2 = inverse_transform(&Field::new(*grid, Space::Frequency, prod)?)?;

    let scale = route1.max_abs().max(1e-300);
    Ok(route1.max_abs_diff(&route2) / scale)
}

/// Largest relative dip along a ladder that should be non-decreasing.
pub fn max_relative_dip(measurements: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for w in measurements.windows(2) {
        if w[0] > 0.0 && w[1] < w[0] {
            worst = worst.max(1.0 - w[1] / w[0]);
        }
    }
    worst
}

/// The blow-up ladder: for each observation radius eps, take the realized
/// superlevel threshold `lambda = min |T_a u|` on the punctured ball
/// around the image point and weigh its superlevel set. The products
/// `lambda * w(E)` scale like `eps^{n - a - m - b}`, so they diverge as
/// eps decreases whenever the order exceeds -n.
pub fn blowup_experiment(cfg: &SharpnessConfig, grid: &Grid) -> Result<ScalingReport> {
    cfg.validate(grid.dim())?;
    let h = grid.spacing();
    let floor = 2.0 * h;
    if let Some(&smallest) = cfg.eps_ladder.last() {
        if smallest <= floor {
            return Err(Error::Precondition(format!(
                "eps ladder reaches {smallest}, below the resolution floor 2h = {floor}"
            )));
        }
    } else {
        return Err(Error::Parameter("empty eps ladder".into()));
    }

    let (u, w) = counterexample_fields(cfg, grid)?;
    let a = Symbol::counterexample(cfg.m);
    let tu = apply_pdo(&a, &u)?;
    let center = cfg.singular_point();

    let mut abscissae = Vec::new();
    let mut measurements = Vec::new();
    for &eps in &cfg.eps_ladder {
        let mut lambda = f64::INFINITY;
        for i in 0..grid.num_points() {
            let d = grid.periodic_distance(grid.point(i), center);
            if d > 0.5 * h && d < eps {
                lambda = lambda.min(tu.values()[i].norm());
            }
        }
        if !lambda.is_finite() {
            return Err(Error::Precondition(format!(
                "no lattice point inside the eps = {eps} annulus"
            )));
        }
        let mass = crate::maximal::superlevel_mass(&tu, &w, lambda);
        abscissae.push(eps);
        measurements.push(lambda * mass);
    }

    let window = (0, abscissae.len() - 1);
    let (fitted_slope, r_squared) = fit_loglog(&abscissae, &measurements, window)?;
    Ok(ScalingReport {
        abscissae,
        measurements,
        fitted_slope,
        fit_window: window,
        r_squared,
        predicted_slopes: vec![cfg.predicted_slope(grid.dim())],
        crossover_index: None,
    })
}

/// `min |T_a u(x)| * dist^{a+m}` over the annulus `2h <= dist <= eta`
/// around the image point; bounded below by a positive constant when the
/// kernel singularity is genuine.
pub fn near_singularity_lower_bound(cfg: &SharpnessConfig, grid: &Grid) -> Result<f64> {
    cfg.validate(grid.dim())?;
    let (u, _) = counterexample_fields(cfg, grid)?;
    let tu = apply_pdo(&Symbol::counterexample(cfg.m), &u)?;
    let center = cfg.singular_point();
    let h = grid.spacing();
    let mut best = f64::INFINITY;
    for i in 0..grid.num_points() {
        let d = grid.periodic_distance(grid.point(i), center);
        if d >= 2.0 * h && d <= cfg.eta {
            best = best.min(tu.values()[i].norm() * d.powf(cfg.a_exp + cfg.m));
        }
    }
    if !best.is_finite() {
        return Err(Error::Precondition("annulus holds no lattice point".into()));
    }
    Ok(best)
}

/// Weak-type ratios of the counterexample pair `(u, w)` for a symbol of
/// the given order, across a list of resolutions. Order -n stays bounded
/// under refinement; larger orders grow.
pub fn contrast_ratios(
    cfg: &SharpnessConfig,
    order: f64,
    dim: usize,
    box_side: f64,
    resolutions: &[usize],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let grid = Grid::new(dim, n, box_side)?;
        let (u, w) = counterexample_fields(cfg, &grid)?;
        let a = Symbol::counterexample(order);
        out.push(weak_type_ratio(OperatorKind::Pdo, &a, None, &u, &w)?);
    }
    Ok(out)
}
