//! Desk-scale laboratory for pseudo-differential and Fourier integral
//! operators on periodic grids.
//!
//! The crate discretizes the Kohn-Nirenberg quantization on the torus
//! `[-L/2, L/2)^d` (d = 1 or 2), builds the standard companion machinery
//! (Littlewood-Paley frequency blocks, Hardy-Littlewood and sharp maximal
//! functions, Muckenhoupt weights, weighted weak norms), and exposes
//! experiment drivers that measure domination inequalities, per-block
//! scaling laws, and the sharpness counterexample for weak-type (1,1)
//! bounds at the critical symbol order.
//!
//! All heavy loops are data-parallel over grid points. With the default
//! `parallel` feature they run on rayon; without it a sequential fallback
//! is used. Results are bitwise identical either way because every output
//! point is reduced in a fixed order.

pub mod error;
pub mod estimates;
pub mod grid;
pub mod lp;
pub mod maximal;
pub(crate) mod par;
pub mod quantize;
pub mod sharpness;
pub mod symbol;
pub mod tolerances;

pub use error::{Error, Result};
pub use grid::{Cube, Field, Grid, Point, Space};
pub use symbol::{Symbol, SymbolMeta};
