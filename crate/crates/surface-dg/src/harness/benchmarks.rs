//! Benchmark registry: geometries plus their manufactured solutions.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::multipatch::{BoundaryRecord, FacetKind, GeometryFile, InterfaceRecord, PatchRecord};
use crate::norms::ExactSolution;
use crate::geometry::Side;
use crate::Real;

use super::manufactured::{CylinderSolution, PolynomialSolution, TorusSolution};

pub const BENCHMARK_NAMES: [&str; 3] = ["quarter-cylinder", "torus", "flat-patch"];

/// A geometry, its manufactured solution, and benchmark metadata.
pub struct Benchmark<T> {
    pub name: &'static str,
    pub description: String,
    pub geometry: GeometryFile,
    pub exact: Box<dyn ExactSolution<T>>,
    /// Closed surfaces have no boundary facets.
    pub closed: bool,
    /// Whether convergence rates are meaningful (reproduction benchmarks
    /// sit at roundoff on every level).
    pub rates: bool,
}

pub fn by_name<T: Real>(name: &str, degree: usize) -> Result<Benchmark<T>> {
    match name {
        "quarter-cylinder" => Ok(quarter_cylinder()),
        "torus" => Ok(torus()),
        "flat-patch" => Ok(flat_patch(degree)),
        other => Err(Error::Topology(format!(
            "unknown benchmark '{other}' (expected one of {BENCHMARK_NAMES:?})"
        ))),
    }
}

/// Unit-radius quarter cylinder in the first quadrant, height 4, split into
/// four stacked patches of unit height; all boundary sides Dirichlet.
pub fn quarter_cylinder<T: Real>() -> Benchmark<T> {
    let arc_x = [1.0, 1.0, 0.0];
    let arc_y = [0.0, 1.0, 1.0];
    let arc_w = [1.0, FRAC_1_SQRT_2, 1.0];
    let mut patches = Vec::new();
    for k in 0..4 {
        let (z0, z1) = (k as f64, k as f64 + 1.0);
        let mut control_points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..3 {
            for &z in &[z0, z1] {
                control_points.push([arc_x[i], arc_y[i], z]);
                weights.push(arc_w[i]);
            }
        }
        patches.push(PatchRecord {
            degrees: [2, 1],
            knots_u: vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            knots_v: vec![0.0, 0.0, 1.0, 1.0],
            control_points,
            weights,
        });
    }
    let interfaces = (0..3)
        .map(|k| InterfaceRecord {
            patch_a: k,
            side_a: Side::VMax,
            patch_b: k + 1,
            side_b: Side::VMin,
            reversed: false,
        })
        .collect();
    let mut boundaries = vec![
        BoundaryRecord {
            patch: 0,
            side: Side::VMin,
            kind: FacetKind::Dirichlet,
        },
        BoundaryRecord {
            patch: 3,
            side: Side::VMax,
            kind: FacetKind::Dirichlet,
        },
    ];
    for k in 0..4 {
        for side in [Side::UMin, Side::UMax] {
            boundaries.push(BoundaryRecord {
                patch: k,
                side,
                kind: FacetKind::Dirichlet,
            });
        }
    }
    Benchmark {
        name: "quarter-cylinder",
        description: "open surface: unit-radius quarter cylinder (x >= 0, y >= 0), height L = 4, \
                      4 stacked patches; u = rho (1 - cos phi)(1 - sin phi) sin(sigma pi z / L) \
                      with sigma = 3, rho = 1/(3/2 - sqrt 2); all-Dirichlet boundary"
            .into(),
        geometry: GeometryFile {
            patches,
            interfaces,
            boundaries,
        },
        exact: Box::new(CylinderSolution::default()),
        closed: false,
        rates: true,
    }
}

/// Torus with major radius 2 and minor radius 1, four patches stacked
/// around the tube, each wrapping the full major circle (a seam
/// self-interface); closed, so no boundary facets.
pub fn torus<T: Real>() -> Benchmark<T> {
    // 9-point rational quadratic full circle in the plane
    let circle_x = [1.0, 1.0, 0.0, -1.0, -1.0, -1.0, 0.0, 1.0, 1.0];
    let circle_y = [0.0, 1.0, 1.0, 1.0, 0.0, -1.0, -1.0, -1.0, 0.0];
    let circle_w: Vec<f64> = (0..9)
        .map(|i| if i % 2 == 0 { 1.0 } else { FRAC_1_SQRT_2 })
        .collect();
    // quarter arcs of the tube profile in the (rho, z) plane, (value, weight)
    let profiles: [[([f64; 2], f64); 3]; 4] = [
        [([3.0, 0.0], 1.0), ([3.0, 1.0], FRAC_1_SQRT_2), ([2.0, 1.0], 1.0)],
        [([2.0, 1.0], 1.0), ([1.0, 1.0], FRAC_1_SQRT_2), ([1.0, 0.0], 1.0)],
        [([1.0, 0.0], 1.0), ([1.0, -1.0], FRAC_1_SQRT_2), ([2.0, -1.0], 1.0)],
        [([2.0, -1.0], 1.0), ([3.0, -1.0], FRAC_1_SQRT_2), ([3.0, 0.0], 1.0)],
    ];
    let mut patches = Vec::new();
    for profile in &profiles {
        let mut control_points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..9 {
            for ([rho, z], w_prof) in profile {
                control_points.push([circle_x[i] * rho, circle_y[i] * rho, *z]);
                weights.push(circle_w[i] * w_prof);
            }
        }
        patches.push(PatchRecord {
            degrees: [2, 2],
            knots_u: vec![0.0, 0.0, 0.0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0, 1.0, 1.0],
            knots_v: vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            control_points,
            weights,
        });
    }
    let mut interfaces = Vec::new();
    for k in 0..4usize {
        interfaces.push(InterfaceRecord {
            patch_a: k,
            side_a: Side::VMax,
            patch_b: (k + 1) % 4,
            side_b: Side::VMin,
            reversed: false,
        });
    }
    for k in 0..4usize {
        interfaces.push(InterfaceRecord {
            patch_a: k,
            side_a: Side::UMax,
            patch_b: k,
            side_b: Side::UMin,
            reversed: false,
        });
    }
    Benchmark {
        name: "torus",
        description: "closed surface: torus (sqrt(x^2+y^2) - 2)^2 + z^2 = 1, 4 patches around \
                      the tube, each a full major circle closed by a seam self-interface; \
                      u = sin(3 phi) cos(3 theta + phi); no boundary"
            .into(),
        geometry: GeometryFile {
            patches,
            interfaces,
            boundaries: Vec::new(),
        },
        exact: Box::new(TorusSolution::default()),
        closed: true,
        rates: true,
    }
}

/// Two flat unit patches side by side in the plane `z = 0` with an interior
/// interface at `x = 1`; polynomial manufactured solution of total degree
/// `degree` (reproduction benchmark: errors sit at roundoff, no rates).
pub fn flat_patch<T: Real>(degree: usize) -> Benchmark<T> {
    let patch = |x0: f64| PatchRecord {
        degrees: [1, 1],
        knots_u: vec![0.0, 0.0, 1.0, 1.0],
        knots_v: vec![0.0, 0.0, 1.0, 1.0],
        control_points: vec![
            [x0, 0.0, 0.0],
            [x0, 1.0, 0.0],
            [x0 + 1.0, 0.0, 0.0],
            [x0 + 1.0, 1.0, 0.0],
        ],
        weights: vec![1.0; 4],
    };
    let mut boundaries = vec![BoundaryRecord {
        patch: 0,
        side: Side::UMin,
        kind: FacetKind::Dirichlet,
    }];
    boundaries.push(BoundaryRecord {
        patch: 1,
        side: Side::UMax,
        kind: FacetKind::Dirichlet,
    });
    for patch in 0..2 {
        for side in [Side::VMin, Side::VMax] {
            boundaries.push(BoundaryRecord {
                patch,
                side,
                kind: FacetKind::Dirichlet,
            });
        }
    }
    Benchmark {
        name: "flat-patch",
        description: format!(
            "consistency check: two flat unit patches in the plane, interface at x = 1, \
             all-Dirichlet; u = dense polynomial of total degree {degree}"
        ),
        geometry: GeometryFile {
            patches: vec![patch(0.0), patch(1.0)],
            interfaces: vec![InterfaceRecord {
                patch_a: 0,
                side_a: Side::UMax,
                patch_b: 1,
                side_b: Side::UMin,
                reversed: false,
            }],
            boundaries,
        },
        exact: Box::new(PolynomialSolution::total_degree(degree)),
        closed: false,
        rates: false,
    }
}
