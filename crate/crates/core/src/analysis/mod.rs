//! Numerical checks of the regularity and critical-set properties.

pub mod criticality;
pub mod holder;
pub mod interpolation;
pub mod level_set;
pub mod nondiff;
