//! Competitor tests: a kernel two-sample test on raw windows, and
//! fixed-resolution grids fed to the same transition-matrix statistic.

mod grids;
mod mmd;

pub use grids::{ewd_bins, ewd_test, scott_bins, scott_test};
pub use mmd::{mmd_statistic, mmd_test, split_windows, MmdConfig, MmdReport};
