//! Fairness post-processing for binary classifiers.
//!
//! The Model Absolute Density Distance (MADD) compares the histograms of
//! predicted probabilities of two groups. The post-processing remaps each
//! group's probabilities toward the pooled distribution by a coefficient
//! `lambda` in `[0, 1]`, and a grid sweep picks the `lambda` minimizing a
//! weighted sum of accuracy loss and half the MADD.
//!
//! ```
//! use madd::{fip, Group, ScoredRecord};
//!
//! let records = vec![
//!     ScoredRecord::new(0.2, Group::G0, None).unwrap(),
//!     ScoredRecord::new(0.3, Group::G0, None).unwrap(),
//!     ScoredRecord::new(0.7, Group::G1, None).unwrap(),
//!     ScoredRecord::new(0.9, Group::G1, None).unwrap(),
//! ];
//! let remapped = fip(&records, 0.5, 10).unwrap();
//! assert_eq!(remapped.len(), 4);
//! ```

pub mod commands;
pub mod densities;
pub mod error;
pub mod io;
pub mod model;
pub mod objective;
pub mod pipeline;
pub mod record;
pub mod simulate;
pub mod transport;

pub use densities::{kde_plot_curve, madd, pool_density_vectors, DensityVector, DEFAULT_BINS};
pub use error::{MaddError, Result};
pub use objective::{
    accuracy_loss, apply_threshold, fairness_loss, sweep, total_loss, ObjectiveConfig, SweepResult, SweepRow,
};
pub use record::{Group, ScoredRecord};
pub use simulate::{SimulationSpec, Simulator};
pub use transport::{fip, FipBasis, FipMap, PiecewiseLinearCdf};
