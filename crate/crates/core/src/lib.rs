//! Outerplanar maps through decorated trees: exact counting, uniform and
//! Boltzmann sampling, first-passage percolation metrics and the CRT
//! diameter reference.

pub mod bijection;
pub mod classes;
pub mod crt;
pub mod error;
pub mod experiments;
pub mod maps;
pub mod metrics;
pub mod real;
pub mod sampler;
pub mod series;
pub mod stats;

pub use bijection::{compose, decompose, DecoratedTree};
pub use classes::{Analytic, BlockLaw, ClassSpec, ClassTables, FaceSet};
pub use error::{Error, Result};
pub use maps::{Dissection, PlanarMap};
pub use metrics::WeightModel;
pub use real::Real;
pub use series::TruncatedSeries;

pub use num_bigint;
