//! Independent references for the analytic results: simulation, numerical
//! inversion and the exact diagonal case.

pub mod closed_form;
pub mod inversion;
pub mod simulate;

pub use closed_form::{one_dimensional_transform, ClosedFormError, DiagonalClosedForms};
pub use inversion::{invert_transform, BoundaryInverter, DensityTable, InversionError, InversionMethod, Side};
pub use simulate::{simulate, Estimate, Histogram, LaplaceEstimate, Scheme, SimConfig, SimError, SimResult};
