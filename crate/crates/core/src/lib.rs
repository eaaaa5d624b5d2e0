//! Decreasing rearrangements of probability densities, the majorisation
//! order they induce, and the lattice of DR cdfs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod empirical;
pub mod entropy;
pub mod error;
pub mod expr;
pub mod families;
pub mod isotonic;
pub mod order;
pub mod quad;
pub mod rearrange;
pub mod sampling;
pub mod tabulated;

pub use error::{Error, Result};
pub use rearrange::{cdf_of_dr, dr_from_density_1d, functional_inverse, measure_function};
pub use rearrange::{DensityFn, DrCdf, DrPdf, MeasureFn, ValueGrid};
pub use tabulated::{Grid, Monotonicity, TabulatedFn};
