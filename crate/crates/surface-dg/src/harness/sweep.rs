//! Refinement sweeps over (variant, degree, level) tuples.

use std::time::Instant;

use serde::Serialize;

use crate::assembly::{assemble, MethodConfig, ProblemData, Variant};
use crate::error::Result;
use crate::geometry::dot3;
use crate::multipatch::MultipatchSurface;
use crate::norms::{dg_error, rates};
use crate::solve::{solve_system, SolverScalar};
use crate::space::{DgSpace, DiscreteFunction};


use super::benchmarks::by_name;

/// What to run: the CLI flags in struct form (also the config-file schema).
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct SweepRequest {
    pub benchmark: String,
    pub variants: Vec<Variant>,
    pub degrees: Vec<usize>,
    pub levels: usize,
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(default)]
    pub delta1: Option<f64>,
    /// Record wall times; off by default so that sweep outputs are
    /// byte-deterministic.
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub variant: Variant,
    pub p: usize,
    pub level: usize,
    pub dofs: usize,
    pub h: f64,
    pub err_h: f64,
    pub err_hstar: f64,
    pub err_l2: f64,
    pub rate_h: Option<f64>,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub benchmark: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }
}

/// Runs one tuple: assemble, solve, measure the error.
pub fn solve_tuple<T: SolverScalar>(
    mp: &MultipatchSurface<T>,
    mesh: &crate::multipatch::MeshLevel<T>,
    space: &DgSpace<T>,
    config: &MethodConfig<T>,
    exact: &dyn crate::norms::ExactSolution<T>,
    closed: bool,
) -> Result<(DiscreteFunction<T>, crate::norms::ErrorReport<T>)> {
    let source = |x: &[T; 3]| exact.source(x);
    let g0 = |x: &[T; 3]| exact.value(x);
    let g1 = |x: &[T; 3], m: &[T; 3]| dot3(m, &exact.surface_gradient(x));
    let g2 = |x: &[T; 3]| exact.laplacian(x);
    let g3 = |x: &[T; 3], m: &[T; 3]| -dot3(m, &exact.grad_laplacian(x));
    let data = if closed {
        ProblemData::interior_only(&source)
    } else {
        ProblemData {
            source: &source,
            dirichlet_value: Some(&g0),
            dirichlet_slope: Some(&g1),
            neumann_moment: Some(&g2),
            neumann_flux: Some(&g3),
        }
    };
    let system = assemble(mp, mesh, space, config, &data)?;
    let report = solve_system(&system)?;
    let u_h = DiscreteFunction::from_coefficients(space, report.solution)?;
    let error = dg_error(mp, mesh, space, &u_h, exact, config)?;
    Ok((u_h, error))
}

/// Runs the sweep serially in tuple order; solver failures are recorded per
/// tuple without aborting the sweep.
pub fn run_sweep<T: SolverScalar>(request: &SweepRequest) -> Result<SweepResult> {
    let mut rows = Vec::new();
    for &degree in &request.degrees {
        let bench = by_name::<T>(&request.benchmark, degree)?;
        let mp = MultipatchSurface::<T>::from_geometry(&bench.geometry)?;
        for &variant in &request.variants {
            let mut config = MethodConfig::<T>::new(variant, degree);
            if let Some(d0) = request.delta0 {
                config.delta0 = crate::real(d0);
            }
            if let Some(d1) = request.delta1 {
                config.delta1 = crate::real(d1);
            }
            let mut errors: Vec<f64> = Vec::new();
            for level in 0..request.levels {
                let started = Instant::now();
                let outcome = mp.refined_mesh(level).and_then(|mesh| {
                    let space = DgSpace::new(&mp, &mesh, degree)?;
                    let (_, err) =
                        solve_tuple(&mp, &mesh, &space, &config, bench.exact.as_ref(), bench.closed)?;
                    Ok((mesh, space, err))
                });
                let seconds = if request.timing {
                    started.elapsed().as_secs_f64()
                } else {
                    0.0
                };
                match outcome {
                    Ok((mesh, space, err)) => {
                        let err_h = err.dg_norm.to_f64().unwrap_or(f64::NAN);
                        errors.push(err_h);
                        rows.push(SweepRow {
                            variant,
                            p: degree,
                            level,
                            dofs: space.total_dofs(),
                            h: mesh.max_h().to_f64().unwrap_or(f64::NAN),
                            err_h,
                            err_hstar: err.dg_star_norm.to_f64().unwrap_or(f64::NAN),
                            err_l2: err.l2_norm.to_f64().unwrap_or(f64::NAN),
                            rate_h: None,
                            seconds,
                            failure: None,
                        });
                    }
                    Err(e) => {
                        errors.push(f64::NAN);
                        rows.push(SweepRow {
                            variant,
                            p: degree,
                            level,
                            dofs: 0,
                            h: f64::NAN,
                            err_h: f64::NAN,
                            err_hstar: f64::NAN,
                            err_l2: f64::NAN,
                            rate_h: None,
                            seconds,
                            failure: Some(e.to_string()),
                        });
                    }
                }
            }
            if bench.rates {
                let rate_list = rates(&errors);
                let base = rows.len() - request.levels;
                for (i, rate) in rate_list.into_iter().enumerate() {
                    let row = &mut rows[base + 1 + i];
                    row.rate_h = rate.filter(|r| r.is_finite());
                }
            }
        }
    }
    Ok(SweepResult {
        benchmark: request.benchmark.clone(),
        rows,
    })
}
