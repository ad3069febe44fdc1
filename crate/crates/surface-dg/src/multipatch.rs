//! Multipatch topology: patch collection, facet enumeration with matched
//! interface parametrization, dyadically refined meshes and mesh sizes.
//!
//! The geometry file is JSON with the following shape (all field names are
//! part of the format):
//!
//! ```json
//! {
//!   "patches": [{
//!     "degrees": [2, 1],
//!     "knots_u": [0, 0, 0, 1, 1, 1],
//!     "knots_v": [0, 0, 1, 1],
//!     "control_points": [[1.0, 0.0, 0.0], ...],
//!     "weights": [1.0, ...]
//!   }],
//!   "interfaces": [{"patch_a": 0, "side_a": "v_max",
//!                   "patch_b": 1, "side_b": "v_min", "reversed": false}],
//!   "boundaries": [{"patch": 0, "side": "u_min", "kind": "dirichlet"}]
//! }
//! ```
//!
//! Control points are row-major with index `iu * num_v + iv`. Sides are
//! `u_min | u_max | v_min | v_max`; a patch may interface with itself
//! (a seam on a closed surface). Knot vectors are normalized to `[0, 1]`
//! on ingestion. Matching meshes are assumed and verified, never repaired.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot3, facet_frame, norm3, sub3, NurbsPatch, Side};
use crate::splines::KnotVector;
use crate::{real, Real};

/// Number of sample points used to verify that interface parametrizations
/// geometrically coincide.
pub const MATCHING_SAMPLES: usize = 33;

fn matching_tolerance<T: Real>() -> T {
    real::<T>(1e-10).max(T::epsilon() * real::<T>(100.0))
}

// ---------------------------------------------------------------- file format

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryFile {
    pub patches: Vec<PatchRecord>,
    pub interfaces: Vec<InterfaceRecord>,
    pub boundaries: Vec<BoundaryRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchRecord {
    /// Polynomial degrees `[p_u, p_v]`.
    pub degrees: [usize; 2],
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    /// Row-major control grid, index `iu * num_v + iv`.
    pub control_points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InterfaceRecord {
    pub patch_a: usize,
    pub side_a: Side,
    pub patch_b: usize,
    pub side_b: Side,
    /// Orientation flag: side-b facet coordinate is `1 - t` when set.
    pub reversed: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundaryRecord {
    pub patch: usize,
    pub side: Side,
    pub kind: FacetKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FacetKind {
    Dirichlet,
    Neumann,
}

impl GeometryFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

// ------------------------------------------------------------------- topology

#[derive(Debug, Clone, Copy)]
pub struct InteriorFacet {
    pub patch_a: usize,
    pub side_a: Side,
    pub patch_b: usize,
    pub side_b: Side,
    pub reversed: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryFacet {
    pub patch: usize,
    pub side: Side,
    pub kind: FacetKind,
}

/// Validated multipatch surface: patches plus the facet graph
/// (interior interfaces and classified boundary sides).
#[derive(Debug, Clone)]
pub struct MultipatchSurface<T> {
    patches: Vec<NurbsPatch<T>>,
    interior: Vec<InteriorFacet>,
    boundary: Vec<BoundaryFacet>,
    max_matching_error: T,
}

impl<T: Real> MultipatchSurface<T> {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_geometry(&GeometryFile::read(path)?)
    }

    /// Builds and validates the topology: every patch side must appear in
    /// exactly one facet record, and interface parametrizations must
    /// geometrically coincide with anti-parallel co-normals.
    pub fn from_geometry(file: &GeometryFile) -> Result<Self> {
        let mut patches = Vec::with_capacity(file.patches.len());
        for (id, rec) in file.patches.iter().enumerate() {
            let kv_u = KnotVector::new(normalize_knots::<T>(&rec.knots_u)?, rec.degrees[0])?;
            let kv_v = KnotVector::new(normalize_knots::<T>(&rec.knots_v)?, rec.degrees[1])?;
            let points: Vec<[T; 3]> = rec
                .control_points
                .iter()
                .map(|p| [real(p[0]), real(p[1]), real(p[2])])
                .collect();
            let weights: Vec<T> = rec.weights.iter().map(|&w| real(w)).collect();
            patches.push(NurbsPatch::new(id, kv_u, kv_v, points, weights)?);
        }

        // every side used exactly once across all records
        let mut seen = vec![[false; 4]; patches.len()];
        let mut mark = |patch: usize, side: Side| -> Result<()> {
            if patch >= seen.len() {
                return Err(Error::Topology(format!("facet record names patch {patch}")));
            }
            let slot = &mut seen[patch][side_ordinal(side)];
            if *slot {
                return Err(Error::Topology(format!(
                    "patch {patch} side {side} appears in more than one facet record"
                )));
            }
            *slot = true;
            Ok(())
        };
        for rec in &file.interfaces {
            mark(rec.patch_a, rec.side_a)?;
            mark(rec.patch_b, rec.side_b)?;
        }
        for rec in &file.boundaries {
            mark(rec.patch, rec.side)?;
        }
        for (p, sides) in seen.iter().enumerate() {
            for (s, &used) in sides.iter().enumerate() {
                if !used {
                    return Err(Error::Topology(format!(
                        "patch {p} side {} is not covered by any facet record",
                        Side::ALL[s]
                    )));
                }
            }
        }

        let interior: Vec<InteriorFacet> = file
            .interfaces
            .iter()
            .map(|r| InteriorFacet {
                patch_a: r.patch_a,
                side_a: r.side_a,
                patch_b: r.patch_b,
                side_b: r.side_b,
                reversed: r.reversed,
            })
            .collect();
        let boundary: Vec<BoundaryFacet> = file
            .boundaries
            .iter()
            .map(|r| BoundaryFacet {
                patch: r.patch,
                side: r.side,
                kind: r.kind,
            })
            .collect();

        let mut surface = Self {
            patches,
            interior,
            boundary,
            max_matching_error: T::zero(),
        };
        surface.max_matching_error = surface.verify_matching()?;
        Ok(surface)
    }

    /// Samples every interior facet and checks the two parametrizations map
    /// to the same points with anti-parallel co-normals. Returns the largest
    /// observed mismatch.
    fn verify_matching(&self) -> Result<T> {
        let tol = matching_tolerance::<T>();
        let mut worst = T::zero();
        for (k, f) in self.interior.iter().enumerate() {
            let pa = &self.patches[f.patch_a];
            let pb = &self.patches[f.patch_b];
            for i in 0..MATCHING_SAMPLES {
                let t = real::<T>(i as f64 / (MATCHING_SAMPLES - 1) as f64);
                let tb = if f.reversed { T::one() - t } else { t };
                let fa = facet_frame(pa, f.side_a, t)?;
                let fb = facet_frame(pb, f.side_b, tb)?;
                let gap = norm3(&sub3(&fa.point, &fb.point));
                let align = dot3(&fa.conormal, &fb.conormal) + T::one();
                worst = worst.max(gap).max(align.abs());
                if gap > tol {
                    return Err(Error::Topology(format!(
                        "interface {k} fails geometric matching: gap {} at t = {}",
                        gap.to_f64().unwrap_or(f64::NAN),
                        t.to_f64().unwrap_or(f64::NAN)
                    )));
                }
                if align.abs() > tol {
                    return Err(Error::Topology(format!(
                        "interface {k} co-normals are not anti-parallel at t = {}",
                        t.to_f64().unwrap_or(f64::NAN)
                    )));
                }
            }
        }
        Ok(worst)
    }

    pub fn patches(&self) -> &[NurbsPatch<T>] {
        &self.patches
    }

    pub fn patch(&self, i: usize) -> &NurbsPatch<T> {
        &self.patches[i]
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn interior_facets(&self) -> &[InteriorFacet] {
        &self.interior
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    pub fn max_matching_error(&self) -> T {
        self.max_matching_error
    }

    /// Per-patch knot partitions after `level` dyadic refinements (each
    /// level halves every span in both directions), together with physical
    /// mesh sizes and measured quasi-uniformity constants. The geometry
    /// itself is untouched.
    pub fn refined_mesh(&self, level: usize) -> Result<MeshLevel<T>> {
        let mut partitions = Vec::with_capacity(self.patches.len());
        let mut inherited = Vec::with_capacity(self.patches.len());
        let mut h = Vec::with_capacity(self.patches.len());
        let mut c_u = Vec::with_capacity(self.patches.len());
        for patch in &self.patches {
            let base_u = patch.kv_u().breakpoints();
            let base_v = patch.kv_v().breakpoints();
            let part_u = dyadic_refine(&base_u, level);
            let part_v = dyadic_refine(&base_v, level);
            let (h_i, min_hk) = mesh_size(patch, &part_u, &part_v)?;
            h.push(h_i);
            c_u.push(h_i / min_hk);
            partitions.push([part_u, part_v]);
            inherited.push([
                base_u[1..base_u.len() - 1].to_vec(),
                base_v[1..base_v.len() - 1].to_vec(),
            ]);
        }
        let mesh = MeshLevel {
            level,
            partitions,
            inherited,
            h,
            c_u,
        };
        self.verify_interface_partitions(&mesh)?;
        Ok(mesh)
    }

    /// Interface meshes must match: the facet-direction partitions of the
    /// two sides coincide (after orientation reversal).
    fn verify_interface_partitions(&self, mesh: &MeshLevel<T>) -> Result<()> {
        let tol = real::<T>(1e-12).max(T::epsilon() * real::<T>(8.0));
        for (k, f) in self.interior.iter().enumerate() {
            let a = &mesh.partitions[f.patch_a][f.side_a.tangent_direction()];
            let b = &mesh.partitions[f.patch_b][f.side_b.tangent_direction()];
            if a.len() != b.len() {
                return Err(Error::Topology(format!(
                    "interface {k}: facet partitions differ in size"
                )));
            }
            let n = a.len();
            for i in 0..n {
                let bi = if f.reversed { T::one() - b[n - 1 - i] } else { b[i] };
                if (a[i] - bi).abs() > tol {
                    return Err(Error::Topology(format!(
                        "interface {k}: facet partitions do not match"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn side_ordinal(side: Side) -> usize {
    match side {
        Side::UMin => 0,
        Side::UMax => 1,
        Side::VMin => 2,
        Side::VMax => 3,
    }
}

fn normalize_knots<T: Real>(knots: &[f64]) -> Result<Vec<T>> {
    if knots.len() < 2 {
        return Err(Error::KnotVector("knot vector too short".into()));
    }
    let (a, b) = (knots[0], knots[knots.len() - 1]);
    if !(b > a) {
        return Err(Error::KnotVector("knot vector has empty range".into()));
    }
    Ok(knots.iter().map(|&k| real((k - a) / (b - a))).collect())
}

/// Inserts span midpoints `level` times.
fn dyadic_refine<T: Real>(breaks: &[T], level: usize) -> Vec<T> {
    let mut cur = breaks.to_vec();
    let half = real::<T>(0.5);
    for _ in 0..level {
        let mut next = Vec::with_capacity(cur.len() * 2 - 1);
        for w in cur.windows(2) {
            next.push(w[0]);
            next.push((w[0] + w[1]) * half);
        }
        next.push(*cur.last().unwrap());
        cur = next;
    }
    cur
}

/// Physical mesh data of every patch at one refinement level.
#[derive(Debug, Clone)]
pub struct MeshLevel<T> {
    pub level: usize,
    /// Per patch: breakpoints per direction, endpoints included.
    pub partitions: Vec<[Vec<T>; 2]>,
    /// Per patch: interior breakpoints inherited from the geometry knot
    /// vectors (present at every level).
    pub inherited: Vec<[Vec<T>; 2]>,
    /// Per-patch mesh size `h_i` (max element diameter).
    pub h: Vec<T>,
    /// Measured quasi-uniformity constant `h_i / min h_K` per patch.
    pub c_u: Vec<T>,
}

impl<T: Real> MeshLevel<T> {
    /// Elements of a patch as spans `([ua, ub], [va, vb])` in lexicographic
    /// order (u-major).
    pub fn elements(&self, patch: usize) -> Vec<([T; 2], [T; 2])> {
        let [pu, pv] = &self.partitions[patch];
        let mut out = Vec::with_capacity((pu.len() - 1) * (pv.len() - 1));
        for wu in pu.windows(2) {
            for wv in pv.windows(2) {
                out.push(([wu[0], wu[1]], [wv[0], wv[1]]));
            }
        }
        out
    }

    pub fn max_h(&self) -> T {
        self.h.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    /// Facet mesh size used for penalty scaling: `min(h_a, h_b)` on
    /// interior facets, `h_i` on boundary facets.
    pub fn facet_h_interior(&self, f: &InteriorFacet) -> T {
        self.h[f.patch_a].min(self.h[f.patch_b])
    }
}

/// Mesh size of one patch partition: per element the diameter is
/// approximated by the largest chord among the 4 mapped corners and 4 edge
/// midpoints; `h_i` is the maximum over elements. Also returns the smallest
/// element diameter for the quasi-uniformity measurement.
pub fn mesh_size<T: Real>(patch: &NurbsPatch<T>, part_u: &[T], part_v: &[T]) -> Result<(T, T)> {
    let half = real::<T>(0.5);
    let mut h_max = T::zero();
    let mut h_min = T::infinity();
    for wu in part_u.windows(2) {
        for wv in part_v.windows(2) {
            let (ua, ub) = (wu[0], wu[1]);
            let (va, vb) = (wv[0], wv[1]);
            let um = (ua + ub) * half;
            let vm = (va + vb) * half;
            let params = [
                [ua, va],
                [ub, va],
                [ua, vb],
                [ub, vb],
                [um, va],
                [um, vb],
                [ua, vm],
                [ub, vm],
            ];
            let mut mapped = [[T::zero(); 3]; 8];
            for (slot, xi) in mapped.iter_mut().zip(params.iter()) {
                *slot = patch.point(*xi)?;
            }
            let mut h_k = T::zero();
            for i in 0..8 {
                for j in i + 1..8 {
                    h_k = h_k.max(norm3(&sub3(&mapped[i], &mapped[j])));
                }
            }
            h_max = h_max.max(h_k);
            h_min = h_min.min(h_k);
        }
    }
    Ok((h_max, h_min))
}

// ------------------------------------------------------------------- reports

#[derive(Debug, Clone, Serialize)]
pub struct TopologyReport {
    pub patches: usize,
    pub interior_facets: usize,
    pub dirichlet_facets: usize,
    pub neumann_facets: usize,
    pub max_matching_error: f64,
    pub mesh: Vec<PatchMeshReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchMeshReport {
    pub patch: usize,
    pub elements: usize,
    pub h: f64,
    pub quasi_uniformity: f64,
}

pub fn topology_report<T: Real>(
    mp: &MultipatchSurface<T>,
    mesh: &MeshLevel<T>,
) -> TopologyReport {
    TopologyReport {
        patches: mp.num_patches(),
        interior_facets: mp.interior_facets().len(),
        dirichlet_facets: mp
            .boundary_facets()
            .iter()
            .filter(|f| f.kind == FacetKind::Dirichlet)
            .count(),
        neumann_facets: mp
            .boundary_facets()
            .iter()
            .filter(|f| f.kind == FacetKind::Neumann)
            .count(),
        max_matching_error: mp.max_matching_error().to_f64().unwrap_or(f64::NAN),
        mesh: (0..mp.num_patches())
            .map(|i| PatchMeshReport {
                patch: i,
                elements: mesh.elements(i).len(),
                h: mesh.h[i].to_f64().unwrap_or(f64::NAN),
                quasi_uniformity: mesh.c_u[i].to_f64().unwrap_or(f64::NAN),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{flat_patch, quarter_cylinder, torus};

    fn flat_mp() -> MultipatchSurface<f64> {
        MultipatchSurface::from_geometry(&flat_patch::<f64>(2).geometry).unwrap()
    }

    #[test]
    fn flat_mesh_size_is_element_diagonal() {
        let mp = flat_mp();
        let mesh = mp.refined_mesh(1).unwrap(); // 2x2 elements per unit patch
        let expected = std::f64::consts::SQRT_2 / 2.0;
        assert!((mesh.h[0] - expected).abs() < 1e-14);
        assert!((mesh.c_u[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cylinder_level0_mesh_size_is_corner_diagonal() {
        let bench = quarter_cylinder::<f64>();
        let mp = MultipatchSurface::<f64>::from_geometry(&bench.geometry).unwrap();
        let mesh = mp.refined_mesh(0).unwrap();
        // chord of the quarter arc is sqrt(2), height 1
        assert!((mesh.h[0] - 3.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn refinement_shrinks_mesh_size() {
        for geometry in [
            quarter_cylinder::<f64>().geometry,
            torus::<f64>().geometry,
            flat_patch::<f64>(2).geometry,
        ] {
            let mp = MultipatchSurface::<f64>::from_geometry(&geometry).unwrap();
            let mut prev = f64::INFINITY;
            for level in 0..3 {
                let mesh = mp.refined_mesh(level).unwrap();
                let h = mesh.max_h();
                assert!(h < prev);
                prev = h;
            }
        }
    }

    #[test]
    fn flat_refinement_halves_h() {
        let mp = flat_mp();
        let h0 = mp.refined_mesh(0).unwrap().max_h();
        let h1 = mp.refined_mesh(1).unwrap().max_h();
        let ratio = h1 / h0;
        assert!((0.49..=0.51).contains(&ratio));
    }

    #[test]
    fn element_count_grows_by_four_per_level() {
        let mp = flat_mp();
        for level in 0..4 {
            let mesh = mp.refined_mesh(level).unwrap();
            assert_eq!(mesh.elements(0).len(), 4usize.pow(level as u32));
        }
    }

    #[test]
    fn quasi_uniformity_below_two_on_benchmarks() {
        for geometry in [
            quarter_cylinder::<f64>().geometry,
            torus::<f64>().geometry,
            flat_patch::<f64>(2).geometry,
        ] {
            let mp = MultipatchSurface::<f64>::from_geometry(&geometry).unwrap();
            for level in 0..3 {
                let mesh = mp.refined_mesh(level).unwrap();
                for &cu in &mesh.c_u {
                    assert!(cu <= 2.0, "C_u = {cu}");
                }
            }
        }
    }

    #[test]
    fn duplicate_side_is_rejected() {
        let mut file = flat_patch::<f64>(2).geometry;
        file.boundaries.push(BoundaryRecord {
            patch: 0,
            side: Side::UMin,
            kind: FacetKind::Neumann,
        });
        assert!(matches!(
            MultipatchSurface::<f64>::from_geometry(&file),
            Err(Error::Topology(_))
        ));
    }

    #[test]
    fn uncovered_side_is_rejected() {
        let mut file = flat_patch::<f64>(2).geometry;
        file.boundaries.pop();
        assert!(matches!(
            MultipatchSurface::<f64>::from_geometry(&file),
            Err(Error::Topology(_))
        ));
    }

    #[test]
    fn mismatched_interface_is_rejected() {
        let mut file = flat_patch::<f64>(2).geometry;
        // shift the second patch so the interface gaps open
        for p in file.patches[1].control_points.iter_mut() {
            p[0] += 0.01;
        }
        assert!(matches!(
            MultipatchSurface::<f64>::from_geometry(&file),
            Err(Error::Topology(_))
        ));
    }

    #[test]
    fn wrong_orientation_flag_is_rejected() {
        let mut file = flat_patch::<f64>(2).geometry;
        file.interfaces[0].reversed = true;
        // points still coincide at t = 0.5 but not elsewhere
        assert!(MultipatchSurface::<f64>::from_geometry(&file).is_err());
    }

    #[test]
    fn geometry_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("geom.json");
        let file = torus::<f64>().geometry;
        file.write(&path).unwrap();
        let read = GeometryFile::read(&path).unwrap();
        let mp = MultipatchSurface::<f64>::from_geometry(&read).unwrap();
        assert_eq!(mp.num_patches(), 4);
        assert_eq!(mp.interior_facets().len(), 8);
    }

    #[test]
    fn knots_are_normalized_on_ingestion() {
        let mut file = flat_patch::<f64>(2).geometry;
        file.patches[0].knots_u = vec![2.0, 2.0, 6.0, 6.0];
        let mp = MultipatchSurface::<f64>::from_geometry(&file).unwrap();
        assert_eq!(mp.patch(0).kv_u().knots(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn topology_report_counts() {
        let bench = quarter_cylinder::<f64>();
        let mp = MultipatchSurface::<f64>::from_geometry(&bench.geometry).unwrap();
        let mesh = mp.refined_mesh(1).unwrap();
        let report = topology_report(&mp, &mesh);
        assert_eq!(report.patches, 4);
        assert_eq!(report.interior_facets, 3);
        assert_eq!(report.dirichlet_facets, 10);
        assert_eq!(report.neumann_facets, 0);
        assert!(report.max_matching_error <= 1e-10);
        assert_eq!(report.mesh[0].elements, 4);
    }
}
