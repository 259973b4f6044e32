//! Scenario files, output writers and the `pairgen` command line.

pub mod error;
pub mod materials_cmd;
pub mod output;
pub mod run;
pub mod scenario;
pub mod units;
