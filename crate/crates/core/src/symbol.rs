//! Symbols a(x, xi) with class metadata, numerical seminorm estimation,
//! and a catalog of named test symbols.
//!
//! A symbol declares membership of the Hormander class S^m_{rho,delta}
//! through its metadata; `estimate_seminorms` probes the declaration with
//! central finite differences, producing the sup of
//! `|d^beta_x d^alpha_xi a| * <xi>^{-(m - rho|alpha| + delta|beta|)}`
//! over a sample set. Rough symbols (bounded measurable in x) only get
//! xi-derivative rows.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Point;
use crate::par;

/// `<xi> = (1 + |xi|^2)^{1/2}`.
pub fn bracket(xi: Point) -> f64 {
    (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}

/// Smooth transition from 0 at `r <= 1` to 1 at `r >= 2` (cosine ramp),
/// used to realize low-frequency cutoffs without leaving the class.
pub fn smooth_cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        0.0
    } else if r >= 2.0 {
        1.0
    } else {
        0.5 * (1.0 - (std::f64::consts::PI * (r - 1.0)).cos())
    }
}

/// Declared class data of a symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolMeta {
    /// Order m.
    pub order: f64,
    /// rho in [0, 1]; derivative gain in xi.
    pub rho: f64,
    /// delta in [0, 1]; derivative loss in x. Ignored for rough symbols.
    pub delta: f64,
    /// Only bounded measurable in x; just xi-derivatives are controlled.
    pub rough: bool,
    /// Symbol vanishes for |xi| <= 1 (smooth ramp on 1 <= |xi| <= 2).
    pub low_freq_cutoff: bool,
}

impl SymbolMeta {
    pub fn new(order: f64, rho: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) || !(0.0..=1.0).contains(&delta) {
            return Err(Error::Parameter(format!(
                "rho and delta must lie in [0,1], got rho={rho}, delta={delta}"
            )));
        }
        Ok(SymbolMeta {
            order,
            rho,
            delta,
            rough: false,
            low_freq_cutoff: false,
        })
    }

    pub fn rough(mut self) -> Self {
        self.rough = true;
        self
    }

    pub fn with_cutoff(mut self) -> Self {
        self.low_freq_cutoff = true;
        self
    }
}

type EvalFn = dyn Fn(Point, Point) -> Complex64 + Send + Sync;

/// Evaluable symbol with class metadata.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    meta: SymbolMeta,
    eval: Arc<EvalFn>,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("meta", &self.meta)
            .finish()
    }
}

impl Symbol {
    pub fn from_fn(
        name: impl Into<String>,
        meta: SymbolMeta,
        eval: impl Fn(Point, Point) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Symbol {
            name: name.into(),
            meta,
            eval: Arc::new(eval),
        }
    }

    /// x-independent symbol (Fourier multiplier).
    pub fn multiplier(
        name: impl Into<String>,
        meta: SymbolMeta,
        sigma: impl Fn(Point) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Symbol::from_fn(name, meta, move |_x, xi| sigma(xi))
    }

    pub fn eval(&self, x: Point, xi: Point) -> Complex64 {
        (self.eval)(x, xi)
    }

    pub fn meta(&self) -> SymbolMeta {
        self.meta
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Same symbol with different declared class data.
    pub fn with_meta(&self, meta: SymbolMeta) -> Symbol {
        Symbol {
            name: self.name.clone(),
            meta,
            eval: self.eval.clone(),
        }
    }

    /// Complex conjugate symbol; class data is unchanged.
    pub fn conj(&self) -> Symbol {
        let inner = self.eval.clone();
        Symbol {
            name: format!("conj({})", self.name),
            meta: self.meta,
            eval: Arc::new(move |x, xi| inner(x, xi).conj()),
        }
    }

    // ---- catalog ----

    /// a == 1.
    pub fn identity() -> Symbol {
        Symbol::from_fn(
            "identity",
            SymbolMeta::new(0.0, 1.0, 0.0).unwrap(),
            |_x, _xi| Complex64::new(1.0, 0.0),
        )
    }

    /// `<xi>^m`, the Bessel-potential multiplier of order -m.
    pub fn bessel_multiplier(m: f64) -> Symbol {
        Symbol::multiplier(
            format!("bessel_multiplier({m})"),
            SymbolMeta::new(m, 0.0, 0.0).unwrap(),
            move |xi| Complex64::new(bracket(xi).powf(m), 0.0),
        )
    }

    /// `e^{i xi_1} <xi>^m`; modulated Bessel multiplier whose kernel is a
    /// shifted Bessel potential. Smooth, but with no derivative gain in xi.
    pub fn counterexample(m: f64) -> Symbol {
        Symbol::multiplier(
            format!("counterexample({m})"),
            SymbolMeta::new(m, 0.0, 0.0).unwrap(),
            move |xi| Complex64::from_polar(bracket(xi).powf(m), xi[0]),
        )
    }

    /// `<xi>^m e^{i <xi>^delta phi(x)} chi(|xi| > 1)` with
    /// `phi(x) = sin x_1 + sin x_2`; a genuine S^m_{0,delta} exemplar whose
    /// x-derivatives cost a factor `<xi>^delta`.
    pub fn oscillating_exotic(m: f64, delta: f64) -> Result<Symbol> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::Parameter(format!(
                "oscillating_exotic needs delta in [0,1], got {delta}"
            )));
        }
        Ok(Symbol::from_fn(
            format!("oscillating_exotic({m},{delta})"),
            SymbolMeta::new(m, 0.0, delta)?.with_cutoff(),
            move |x, xi| {
                let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                let chi = smooth_cutoff(r);
                if chi == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let phi = x[0].sin() + x[1].sin();
                Complex64::from_polar(chi * bracket(xi).powf(m), bracket(xi).powf(delta) * phi)
            },
        ))
    }

    /// `s(x) <xi>^m` with a bounded staircase `s`; no smoothness in x at
    /// all, so only the xi-derivative estimates are meaningful.
    pub fn rough_sample(m: f64) -> Symbol {
        Symbol::from_fn(
            format!("rough_sample({m})"),
            SymbolMeta::new(m, 0.0, 0.0).unwrap().rough(),
            move |x, xi| {
                let s = 1.0
                    + 0.25 * (7.0 * x[0] + 1.3).sin().signum()
                    + 0.25 * (5.0 * x[1] - 0.7).cos().signum();
                Complex64::new(s * bracket(xi).powf(m), 0.0)
            },
        )
    }
}

/// String-addressable catalog used by the CLI config.
pub fn catalog(name: &str, m: f64, delta: Option<f64>) -> Result<Symbol> {
    match name {
        "identity" => Ok(Symbol::identity()),
        "bessel_multiplier" => Ok(Symbol::bessel_multiplier(m)),
        "counterexample" => Ok(Symbol::counterexample(m)),
        "oscillating_exotic" => Symbol::oscillating_exotic(m, delta.unwrap_or(0.5)),
        "rough_sample" => Ok(Symbol::rough_sample(m)),
        other => Err(Error::Catalog(other.to_string())),
    }
}

/// Multi-index over at most two axes.
pub type MultiIndex = [u8; 2];

fn multi_order(a: MultiIndex) -> u32 {
    a[0] as u32 + a[1] as u32
}

/// Sample points used by `estimate_seminorms`.
#[derive(Clone, Debug)]
pub struct SamplingSpec {
    pub dim: usize,
    pub x_points: Vec<Point>,
    pub xi_points: Vec<Point>,
}

impl SamplingSpec {
    /// Spread x over the box and xi over signed radial ladders along the
    /// coordinate axes (and diagonals in 2-d) up to `xi_max`. The ladder
    /// resolves the low-frequency cutoff ramp on [1, 2] before switching
    /// to geometric growth.
    pub fn standard(dim: usize, box_side: f64, xi_max: f64) -> Self {
        let mut x_points = Vec::new();
        let nx = 9;
        let coord = |i: usize| -0.5 * box_side + (i as f64 + 0.37) * box_side / nx as f64;
        match dim {
            1 => {
                for i in 0..nx {
                    x_points.push([coord(i), 0.0]);
                }
            }
            _ => {
                for i in (0..nx).step_by(2) {
                    for j in (0..nx).step_by(2) {
                        x_points.push([coord(i), coord(j)]);
                    }
                }
            }
        }

        let mut dirs: Vec<Point> = vec![[1.0, 0.0], [-1.0, 0.0]];
        if dim == 2 {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            dirs.extend_from_slice(&[[0.0, 1.0], [0.0, -1.0], [s, s], [-s, s]]);
        }
        let mut radii = vec![0.5, 1.0, 1.25, 1.5, 1.75, 2.0, 3.0];
        let mut r = 4.0;
        while r <= xi_max {
            radii.push(r);
            r *= 2.0;
        }
        radii.retain(|r| *r <= xi_max);
        let mut xi_points = vec![[0.0, 0.0]];
        for r in radii {
            for d in &dirs {
                xi_points.push([r * d[0], r * d[1]]);
            }
        }
        SamplingSpec {
            dim,
            x_points,
            xi_points,
        }
    }

    /// Refined sample set containing this one: midpoints are inserted in x
    /// and geometric midpoints in the xi ladder.
    pub fn doubled(&self) -> SamplingSpec {
        let mut x_points = self.x_points.clone();
        for w in self.x_points.windows(2) {
            x_points.push([0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])]);
        }
        let mut xi_points = self.xi_points.clone();
        for p in &self.xi_points {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if r > 0.0 {
                let s = std::f64::consts::SQRT_2;
                xi_points.push([p[0] * s, p[1] * s]);
            }
        }
        SamplingSpec {
            dim: self.dim,
            x_points,
            xi_points,
        }
    }

    /// Same directions with all xi radii multiplied by `factor`.
    pub fn scaled_radius(&self, factor: f64) -> SamplingSpec {
        SamplingSpec {
            dim: self.dim,
            x_points: self.x_points.clone(),
            xi_points: self
                .xi_points
                .iter()
                .map(|p| [p[0] * factor, p[1] * factor])
                .collect(),
        }
    }
}

/// Estimated class constants `C_{alpha,beta}`, keyed by (alpha, beta).
#[derive(Clone, Debug)]
pub struct SeminormTable {
    entries: BTreeMap<(MultiIndex, MultiIndex), f64>,
    max_order: u32,
}

impl SeminormTable {
    pub fn get(&self, alpha: MultiIndex, beta: MultiIndex) -> Option<f64> {
        self.entries.get(&(alpha, beta)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &f64)> {
        self.entries.iter()
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }
}

/// Central finite-difference stencil for one derivative order; offsets are
/// in units of the step and the weights already include the 1/h^k factor
/// (applied by the caller).
fn stencil(order: u8) -> &'static [(i8, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("stencil order above 4"),
    }
}

/// Mixed partial `d^beta_x d^alpha_xi a` at (x, xi) by nested central
/// differences; `hx` and `hxi` are the per-axis steps.
fn mixed_derivative(
    a: &Symbol,
    x: Point,
    xi: Point,
    alpha: MultiIndex,
    beta: MultiIndex,
    hx: f64,
    hxi: f64,
) -> Complex64 {
    let sa0 = stencil(alpha[0]);
    let sa1 = stencil(alpha[1]);
    let sb0 = stencil(beta[0]);
    let sb1 = stencil(beta[1]);
    let mut acc = Complex64::new(0.0, 0.0);
    for (oa0, wa0) in sa0 {
        for (oa1, wa1) in sa1 {
            for (ob0, wb0) in sb0 {
                for (ob1, wb1) in sb1 {
                    let xp = [x[0] + *ob0 as f64 * hx, x[1] + *ob1 as f64 * hx];
                    let xip = [xi[0] + *oa0 as f64 * hxi, xi[1] + *oa1 as f64 * hxi];
                    acc += wa0 * wa1 * wb0 * wb1 * a.eval(xp, xip);
                }
            }
        }
    }
    let scale = hxi.powi(multi_order(alpha) as i32) * hx.powi(multi_order(beta) as i32);
    acc / scale
}

/// Estimate the class constants of `a` up to `max_order` over the sample
/// set. Rough symbols only produce beta = 0 rows.
pub fn estimate_seminorms(
    a: &Symbol,
    max_order: u32,
    samples: &SamplingSpec,
) -> Result<SeminormTable> {
    if max_order > 4 {
        return Err(Error::Parameter(format!(
            "seminorm estimation is limited to order 4, got {max_order}"
        )));
    }
    let meta = a.meta();
    let mut indices: Vec<(MultiIndex, MultiIndex)> = Vec::new();
    let top = max_order as u8;
    for a0 in 0..=top {
        for a1 in 0..=top - a0 {
            for b0 in 0..=top - a0 - a1 {
                for b1 in 0..=top - a0 - a1 - b0 {
                    // the second axis only exists in 2-d
                    if samples.dim == 1 && (a1 > 0 || b1 > 0) {
                        continue;
                    }
                    let alpha = [a0, a1];
                    let beta = [b0, b1];
                    if meta.rough && multi_order(beta) > 0 {
                        continue;
                    }
                    indices.push((alpha, beta));
                }
            }
        }
    }

    let pairs: Vec<(Point, Point)> = samples
        .x_points
        .iter()
        .flat_map(|x| samples.xi_points.iter().map(move |xi| (*x, *xi)))
        .collect();

    let per_pair: Vec<Result<Vec<f64>>> = par::map_indexed(pairs.len(), |pi| {
        let (x, xi) = pairs[pi];
        let hx = 1e-3;
        let hxi = 1e-3f64.max(1e-3 * bracket(xi));
        let mut row = Vec::with_capacity(indices.len());
        for &(alpha, beta) in &indices {
            let d = mixed_derivative(a, x, xi, alpha, beta, hx, hxi);
            if !d.re.is_finite() || !d.im.is_finite() {
                return Err(Error::Evaluation {
                    context: format!("seminorm of `{}`, alpha={alpha:?} beta={beta:?}", a.name()),
                    x,
                    xi,
                });
            }
            let weight = bracket(xi).powf(
                -(meta.order - meta.rho * multi_order(alpha) as f64
                    + if meta.rough {
                        0.0
                    } else {
                        meta.delta * multi_order(beta) as f64
                    }),
            );
            row.push(d.norm() * weight);
        }
        Ok(row)
    });

    let mut sups = vec![0.0f64; indices.len()];
    for row in per_pair {
        let row = row?;
        for (s, v) in sups.iter_mut().zip(row) {
            *s = s.max(v);
        }
    }

    let mut entries = BTreeMap::new();
    for (&(alpha, beta), &sup) in indices.iter().zip(&sups) {
        entries.insert((alpha, beta), sup);
    }
    Ok(SeminormTable {
        entries,
        max_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_1d() -> SamplingSpec {
        SamplingSpec::standard(1, std::f64::consts::TAU, 64.0)
    }

    #[test]
    fn identity_symbol() {
        let a = Symbol::identity();
        assert_eq!(a.meta().order, 0.0);
        assert_eq!(a.meta().rho, 1.0);
        assert_eq!(a.meta().delta, 0.0);
        assert_eq!(a.eval([0.3, 0.0], [5.0, 0.0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn bessel_multiplier_at_zero_frequency() {
        for m in [-1.0, -0.2, -2.0] {
            let a = Symbol::bessel_multiplier(m);
            assert_eq!(a.eval([0.1, 0.0], [0.0, 0.0]), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn counterexample_closed_form() {
        let a = Symbol::counterexample(-0.2);
        assert!((a.eval([0.4, 0.0], [0.0, 0.0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let got = a.eval([0.0, 0.0], [1.0, 0.0]);
        let expect = Complex64::from_polar(2.0f64.powf(-0.1), 1.0);
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn unknown_catalog_name_is_rejected() {
        assert!(matches!(
            catalog("no_such_symbol", -1.0, None),
            Err(Error::Catalog(_))
        ));
        assert!(catalog("bessel_multiplier", -1.0, None).is_ok());
    }

    #[test]
    fn bracket_power_ratio_is_exactly_one() {
        // a = <xi>^{-n} declared (m=-n, 0, 0): the (0,0) entry is the sup of
        // |a| <xi>^{n}, identically 1.
        let a = Symbol::bessel_multiplier(-1.0);
        let t = estimate_seminorms(&a, 0, &spec_1d()).unwrap();
        let e = t.get([0, 0], [0, 0]).unwrap();
        assert!((e - 1.0).abs() < 1e-9, "entry {e}");
    }

    #[test]
    fn x_independent_symbol_has_zero_x_rows() {
        let a = Symbol::bessel_multiplier(-1.0);
        let t = estimate_seminorms(&a, 2, &spec_1d()).unwrap();
        for (&(_, beta), &v) in t.entries() {
            if multi_order(beta) > 0 {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn counterexample_first_xi_derivative_entry() {
        // d_{xi_1}[e^{i xi_1} <xi>^m] has modulus >= <xi>^m, so the
        // normalized entry is >= 1 up to finite-difference error.
        let a = Symbol::counterexample(-0.2);
        let t = estimate_seminorms(&a, 1, &spec_1d()).unwrap();
        let e = t.get([1, 0], [0, 0]).unwrap();
        assert!(e >= 0.999, "entry {e}");
        assert!(e.is_finite());
    }

    #[test]
    fn rough_symbol_only_gets_xi_rows() {
        let a = Symbol::rough_sample(-1.0);
        let t = estimate_seminorms(&a, 2, &spec_1d()).unwrap();
        assert!(t.entries().count() > 0);
        for (&(_, beta), _) in t.entries() {
            assert_eq!(multi_order(beta), 0);
        }
    }

    #[test]
    fn misdeclared_bessel_as_rho_one_stays_finite() {
        // <xi>^{-n} really lies in S^{-n}_{1,0}, so claiming rho = 1 keeps
        // every entry finite.
        let a = Symbol::bessel_multiplier(-1.0)
            .with_meta(SymbolMeta::new(-1.0, 1.0, 0.0).unwrap());
        let t = estimate_seminorms(&a, 3, &spec_1d()).unwrap();
        assert!(t.max_entry().is_finite());
        assert!(t.max_entry() < 1e3);
    }

    #[test]
    fn misdeclared_exotic_delta_diverges_with_radius() {
        // true delta = 0.5 declared as 0: the (alpha=0, beta=e1) entry grows
        // like the sample radius^0.5, i.e. at least 1.5x per radius quadrupling.
        let a = Symbol::oscillating_exotic(-1.0, 0.5)
            .unwrap()
            .with_meta(SymbolMeta::new(-1.0, 0.0, 0.0).unwrap().with_cutoff());
        let base = spec_1d();
        let e1 = estimate_seminorms(&a, 1, &base)
            .unwrap()
            .get([0, 0], [1, 0])
            .unwrap();
        let e2 = estimate_seminorms(&a, 1, &base.scaled_radius(4.0))
            .unwrap()
            .get([0, 0], [1, 0])
            .unwrap();
        let e3 = estimate_seminorms(&a, 1, &base.scaled_radius(16.0))
            .unwrap()
            .get([0, 0], [1, 0])
            .unwrap();
        assert!(e2 >= 1.5 * e1, "e1={e1} e2={e2}");
        assert!(e3 >= 1.5 * e2, "e2={e2} e3={e3}");
    }

    #[test]
    fn correctly_declared_entries_stable_under_sample_doubling() {
        let symbols = vec![
            Symbol::bessel_multiplier(-1.0),
            Symbol::counterexample(-0.2),
            Symbol::oscillating_exotic(-1.0, 0.5).unwrap(),
            Symbol::rough_sample(-1.0),
        ];
        let base = spec_1d();
        let refined = base.doubled();
        for s in &symbols {
            let t0 = estimate_seminorms(s, 3, &base).unwrap();
            let t1 = estimate_seminorms(s, 3, &refined).unwrap();
            for (&(alpha, beta), &v0) in t0.entries() {
                let v1 = t1.get(alpha, beta).unwrap();
                assert!(v1.is_finite());
                // sups are monotone under sample refinement
                assert!(v1 >= v0 - 1e-12, "{} {:?}{:?}", s.name(), alpha, beta);
                if v0 > 1e-9 {
                    assert!(
                        v1 <= 1.10 * v0,
                        "{} {:?}{:?}: {v0} -> {v1}",
                        s.name(),
                        alpha,
                        beta
                    );
                }
            }
        }
    }

    #[test]
    fn max_order_is_capped() {
        let a = Symbol::identity();
        assert!(estimate_seminorms(&a, 5, &spec_1d()).is_err());
    }
}
