//! Centralized numeric tolerances used by the experiments and the
//! acceptance suite. Exact-arithmetic identities get machine-precision
//! budgets; statements that only pin an exponent get slope windows.

/// Identities that reassociate the same lattice quadrature.
pub const SAME_QUADRATURE: f64 = 1e-12;

/// Identities that pass through one transform round trip.
pub const ROUND_TRIP: f64 = 1e-12;

/// Operator identities with an extra O(N) reduction (identity symbol,
/// kernel-vs-direct application, adjoint pairing).
pub const OPERATOR_IDENTITY: f64 = 1e-10;

/// Partition-of-unity defect allowed at a lattice frequency.
pub const PARTITION_SUM: f64 = 1e-12;

/// Window around a predicted log2-slope for scaling-law fits.
pub const SLOPE_WINDOW: f64 = 0.3;

/// Minimum goodness of fit demanded of a measured scaling law.
pub const R_SQUARED_MIN: f64 = 0.9;

/// Window for the Bessel kernel near-origin slope.
pub const BESSEL_SLOPE_WINDOW: f64 = 0.2;

/// Relative discrepancy allowed in the convolution identity.
pub const CONVOLUTION_IDENTITY: f64 = 1e-8;

/// Exponent-schedule arithmetic (closed-form rationals evaluated in f64).
pub const SCHEDULE_ABS: f64 = 1e-9;

/// Allowed ratio drift of a bounded quantity under one grid doubling.
pub const REFINEMENT_FACTOR: f64 = 2.0;

/// Family spread allowed in the domination experiments (max/min of the
/// per-input sup ratios).
pub const FAMILY_SPREAD: f64 = 10.0;

/// Growth demanded per refinement step from a quantity that must diverge.
pub const DIVERGENCE_FACTOR: f64 = 1.3;

/// Stability band for the critical-order weak-type ratio under refinement.
pub const CRITICAL_STABILITY: f64 = 1.2;

/// Fraction by which a blow-up ladder may dip while trending upward.
pub const BLOWUP_DIP: f64 = 0.10;
