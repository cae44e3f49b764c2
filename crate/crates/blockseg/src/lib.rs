// SPDX-License-Identifier: MIT OR Apache-2.0

//! File formats, parallel drivers and the `blockseg` command line on top of
//! [`blockseg_core`].

#![forbid(unsafe_code)]

pub mod cli;
pub mod error;
pub mod io;
pub mod output;
pub mod parallel;

pub use error::{Error, Result};
pub use io::{load_marker_map, load_matrix, parse_marker_map, parse_matrix};
pub use parallel::Runner;
