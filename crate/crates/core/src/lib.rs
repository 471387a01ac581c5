//! Exact-rational constructions of Cantor-type Hölder and `C^{1,alpha}`
//! functions, with certified evaluation, pushforward measures and probes of their
//! critical sets.

pub mod analysis;
pub mod error;
pub mod evaluator;
pub mod geometry;
pub mod interval;
pub mod measure;
pub mod plateau;
pub mod rational;
pub mod schedule;
pub mod series;

pub use error::{Error, Result};
pub use geometry::{CellAddress, Construction, Dimension, Location, RationalCell};
pub use rational::Rational;
pub use schedule::{AlphaSchedule, GeometrySequences, ScheduleKind};
