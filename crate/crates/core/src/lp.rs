//! Dyadic (Littlewood-Paley) partition of unity on the frequency lattice
//! and the induced block decomposition of a symbol.
//!
//! The masks are radial in log2|xi|: a cosine step `S` of half-width `w`
//! gives the mother bump `psi(t) = S(t) - S(t-1)`, block j is `psi(t - j)`,
//! and the low-frequency piece (block 0) is `1 - S(t-1)`. Consecutive
//! blocks share the same step values, so the sum telescopes to 1 exactly
//! up to rounding at every lattice frequency below the last resolved
//! scale. The spread constant C > 1 controls the support annuli
//! `C^{-1} 2^j <= |xi| <= C 2^{j+1}`.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, Point};
use crate::quantize::{kernel_matrix, KernelMatrix};
use crate::symbol::Symbol;

/// Frequency cutoffs realizing the dyadic partition on a grid.
#[derive(Clone, Copy, Debug)]
pub struct LPPartition {
    grid: Grid,
    c: f64,
    ramp_halfwidth: f64,
    j_max: u32,
}

fn cosine_step(tau: f64, w: f64) -> f64 {
    if tau <= -w {
        0.0
    } else if tau >= w {
        1.0
    } else {
        0.5 * (1.0 - (std::f64::consts::PI * (tau + w) / (2.0 * w)).cos())
    }
}

impl LPPartition {
    /// Build the partition for a grid; `c` is the support-spread constant.
    pub fn build(grid: Grid, c: f64) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::Parameter(format!(
                "partition constant must satisfy C > 1, got {c}"
            )));
        }
        let ramp_halfwidth = 0.45f64.min(c.log2());
        let nyquist = grid.nyquist();
        let mut j_max = 1u32;
        while 2f64.powi(j_max as i32) / c <= nyquist {
            j_max += 1;
        }
        Ok(LPPartition {
            grid,
            c,
            ramp_halfwidth,
            j_max,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Largest dyadic index; `2^{j_max} / C` exceeds the Nyquist frequency.
    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    /// Blocks are indexed 0 (low-frequency piece) through `j_max`.
    pub fn num_blocks(&self) -> usize {
        self.j_max as usize + 1
    }

    fn step_at(&self, t: f64, j: u32) -> f64 {
        cosine_step(t - j as f64, self.ramp_halfwidth)
    }

    /// Mask value of a block at an arbitrary frequency point.
    pub fn mask_value(&self, block: u32, xi: Point) -> f64 {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        if block == 0 {
            if r == 0.0 {
                return 1.0;
            }
            return 1.0 - self.step_at(r.log2(), 1);
        }
        if r == 0.0 {
            return 0.0;
        }
        let t = r.log2();
        self.step_at(t, block) - self.step_at(t, block + 1)
    }

    /// Mask sampled on the frequency lattice.
    pub fn mask_field(&self, block: u32) -> Vec<f64> {
        (0..self.grid.num_points())
            .map(|k| self.mask_value(block, self.grid.freq(k)))
            .collect()
    }

    /// Radial support bounds [lo, hi] of a block.
    pub fn support_bounds(&self, block: u32) -> (f64, f64) {
        let w = self.ramp_halfwidth;
        if block == 0 {
            (0.0, 2f64.powf(1.0 + w))
        } else {
            (
                2f64.powf(block as f64 - w),
                2f64.powf(block as f64 + 1.0 + w),
            )
        }
    }

    /// Sum of all masks at a frequency point.
    pub fn mask_sum(&self, xi: Point) -> f64 {
        (0..=self.j_max).map(|b| self.mask_value(b, xi)).sum()
    }

    /// Largest discrete gradient of a block mask on the lattice.
    pub fn mask_discrete_gradient(&self, block: u32) -> f64 {
        let g = &self.grid;
        let dxi = g.freq_spacing();
        let npd = g.points_per_dim();
        let mut worst = 0.0f64;
        for k in 0..g.num_points() {
            let xi = g.freq(k);
            let here = self.mask_value(block, xi);
            let ij = g.axis_indices(k);
            for ax in 0..g.dim() {
                if ij[ax] + 1 < npd {
                    let mut next = xi;
                    next[ax] += dxi;
                    worst = worst.max((self.mask_value(block, next) - here).abs() / dxi);
                }
            }
        }
        worst
    }
}

/// One dyadic block of a symbol: `a_j(x,xi) = a(x,xi) * psi_j(xi)`.
#[derive(Clone, Debug)]
pub struct BlockSymbol {
    j: u32,
    base: Symbol,
    partition: LPPartition,
}

impl BlockSymbol {
    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn base(&self) -> &Symbol {
        &self.base
    }

    pub fn partition(&self) -> &LPPartition {
        &self.partition
    }

    pub fn eval(&self, x: Point, xi: Point) -> Complex64 {
        self.base.eval(x, xi) * self.partition.mask_value(self.j, xi)
    }

    /// The block as a plain symbol (shares the base evaluator).
    pub fn symbol(&self) -> Symbol {
        let base = self.base.clone();
        let partition = self.partition;
        let j = self.j;
        let meta = base.meta();
        Symbol::from_fn(
            format!("{}[block {}]", base.name(), j),
            meta,
            move |x, xi| base.eval(x, xi) * partition.mask_value(j, xi),
        )
    }

    /// Radial support bounds inherited from the mask.
    pub fn support_bounds(&self) -> (f64, f64) {
        self.partition.support_bounds(self.j)
    }
}

/// Split a symbol into its dyadic blocks; the blocks sum back to the
/// symbol at every lattice point.
pub fn decompose(a: &Symbol, partition: &LPPartition) -> Vec<BlockSymbol> {
    (0..=partition.j_max())
        .map(|j| BlockSymbol {
            j,
            base: a.clone(),
            partition: *partition,
        })
        .collect()
}

/// Kernel matrix of a dyadic block operator.
pub fn block_kernel(block: &BlockSymbol, dual: bool) -> Result<KernelMatrix> {
    kernel_matrix(&block.symbol(), &block.partition.grid(), dual)
}

/// Convenience: blocks of a symbol as plain symbols.
pub fn block_symbols(a: &Symbol, partition: &LPPartition) -> Vec<Symbol> {
    decompose(a, partition).iter().map(|b| b.symbol()).collect()
}

/// Shared handle used when many experiments walk the same decomposition.
pub type SharedPartition = Arc<LPPartition>;
