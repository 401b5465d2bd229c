//! Benchmark circuit generators, the evaluation-table replica runner, the
//! superscalar width sweeps and the latency-model calibration search.

mod calibrate;
mod generate;
mod reference;
mod report;
mod table2;
mod widths;

pub use calibrate::{calibrate, calibrated_latency, CalibrationOutcome};
pub use generate::{generate, BenchError, BenchSpec, Density, Family};
pub use reference::{ReferenceRow, TABLE2_ROWS};
pub use report::{render_csv, render_markdown, rows_from_result, ReportRow, CSV_SCHEMA};
pub use table2::{run_table2, table2_specs, RowResult};
pub use widths::{run_width_sweep, width_sweep_cycles, WidthSweepSpec};
