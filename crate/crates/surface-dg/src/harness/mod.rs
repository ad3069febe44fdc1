//! Benchmark registry, manufactured solutions, refinement sweeps and
//! reporting.

mod benchmarks;
mod manufactured;
mod report;
mod sweep;

pub use benchmarks::{by_name, flat_patch, quarter_cylinder, torus, Benchmark, BENCHMARK_NAMES};
pub use manufactured::{CylinderSolution, PolynomialSolution, TorusSolution};
pub use report::{csv_string, write_csv, write_json, write_svg};
pub use sweep::{run_sweep, solve_tuple, SweepRequest, SweepResult, SweepRow};
