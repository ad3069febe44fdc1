//! The discontinuous multipatch solution space: one tensor B-spline space of
//! degree `p` per patch, glued only through the facet terms of the bilinear
//! form. No degree of freedom is shared across patches.
//!
//! Within a patch the space is maximally smooth (`C^{p-1}`, simple knots) at
//! refinement-inserted breakpoints. Interior breakpoints inherited from the
//! geometry knot vector are inserted with multiplicity `p - 1` (a `C¹` join):
//! the benchmark geometries are only `C¹` across those lines, and a smoother
//! space cannot approximate the pulled-back solution there at optimal order.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{shape_surface_data, ParamJet, ShapeSurfaceData};
use crate::multipatch::{MeshLevel, MultipatchSurface};
use crate::quadrature::gauss_legendre;
use crate::splines::KnotVector;
use crate::{real, Real};

/// Tensor B-spline space on one patch with its global DOF offset.
#[derive(Debug, Clone)]
pub struct PatchSpace<T> {
    kv_u: KnotVector<T>,
    kv_v: KnotVector<T>,
    dof_offset: usize,
    num_u: usize,
    num_v: usize,
}

/// Nonzero basis functions at one parameter point: the tensor jets of the
/// `(p+1)²` active functions, u-major, together with the active spans.
#[derive(Debug, Clone)]
pub struct ActiveBasis<T> {
    pub span_u: usize,
    pub span_v: usize,
    pub jets: Vec<ParamJet<T>>,
}

impl<T: Real> PatchSpace<T> {
    pub fn kv_u(&self) -> &KnotVector<T> {
        &self.kv_u
    }

    pub fn kv_v(&self) -> &KnotVector<T> {
        &self.kv_v
    }

    pub fn num_u(&self) -> usize {
        self.num_u
    }

    pub fn num_v(&self) -> usize {
        self.num_v
    }

    pub fn num_dofs(&self) -> usize {
        self.num_u * self.num_v
    }

    pub fn dof_offset(&self) -> usize {
        self.dof_offset
    }

    pub fn global_index(&self, iu: usize, iv: usize) -> usize {
        self.dof_offset + iu * self.num_v + iv
    }

    /// Global indices of the active functions at the given spans, in the
    /// same order as [`ActiveBasis::jets`].
    pub fn active_indices(&self, span_u: usize, span_v: usize) -> Vec<usize> {
        let (pu, pv) = (self.kv_u.degree(), self.kv_v.degree());
        let mut out = Vec::with_capacity((pu + 1) * (pv + 1));
        for r in 0..=pu {
            for s in 0..=pv {
                out.push(self.global_index(span_u - pu + r, span_v - pv + s));
            }
        }
        out
    }

    /// Tensor jets (mixed parametric derivatives to total order 3) of the
    /// active basis functions at `xi`.
    pub fn active_basis(&self, xi: [T; 2]) -> Result<ActiveBasis<T>> {
        let (pu, pv) = (self.kv_u.degree(), self.kv_v.degree());
        let bu = self.kv_u.eval_basis_derivs(xi[0], 3)?;
        let bv = self.kv_v.eval_basis_derivs(xi[1], 3)?;
        let mut jets = Vec::with_capacity((pu + 1) * (pv + 1));
        for r in 0..=pu {
            for s in 0..=pv {
                let mut jet = ParamJet::default();
                for a in 0..4usize {
                    for b in 0..4 - a {
                        let fu = bu.values.get(a).map_or(T::zero(), |row| row[r]);
                        let fv = bv.values.get(b).map_or(T::zero(), |row| row[s]);
                        jet.d[a][b] = fu * fv;
                    }
                }
                jets.push(jet);
            }
        }
        Ok(ActiveBasis {
            span_u: bu.span,
            span_v: bv.span,
            jets,
        })
    }
}

/// The discontinuous multipatch space `V_h` with global block numbering.
#[derive(Debug, Clone)]
pub struct DgSpace<T> {
    degree: usize,
    level: usize,
    patches: Vec<PatchSpace<T>>,
    total_dofs: usize,
}

impl<T: Real> DgSpace<T> {
    /// Builds per-patch open knot vectors of degree `p >= 2` on the mesh
    /// partitions.
    pub fn new(mp: &MultipatchSurface<T>, mesh: &MeshLevel<T>, degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Space(format!(
                "degree {degree} below 2: the broken norm needs elementwise Laplacians in L2"
            )));
        }
        let mut patches = Vec::with_capacity(mp.num_patches());
        let mut offset = 0usize;
        for i in 0..mp.num_patches() {
            let make = |dir: usize| -> Result<KnotVector<T>> {
                let breaks = &mesh.partitions[i][dir];
                let inherited = &mesh.inherited[i][dir];
                let mult: Vec<usize> = breaks[1..breaks.len() - 1]
                    .iter()
                    .map(|b| {
                        if inherited.contains(b) {
                            degree - 1
                        } else {
                            1
                        }
                    })
                    .collect();
                KnotVector::from_breakpoints(degree, breaks, &mult)
            };
            let kv_u = make(0)?;
            let kv_v = make(1)?;
            let (num_u, num_v) = (kv_u.num_basis(), kv_v.num_basis());
            patches.push(PatchSpace {
                kv_u,
                kv_v,
                dof_offset: offset,
                num_u,
                num_v,
            });
            offset += num_u * num_v;
        }
        Ok(Self {
            degree,
            level: mesh.level,
            patches,
            total_dofs: offset,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn total_dofs(&self) -> usize {
        self.total_dofs
    }

    pub fn patch(&self, i: usize) -> &PatchSpace<T> {
        &self.patches[i]
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn signature(&self) -> SpaceSignature {
        SpaceSignature {
            degree: self.degree,
            level: self.level,
            patch_dims: self
                .patches
                .iter()
                .map(|p| [p.num_u, p.num_v])
                .collect(),
        }
    }
}

/// Identifies the space a coefficient vector belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSignature {
    pub degree: usize,
    pub level: usize,
    pub patch_dims: Vec<[usize; 2]>,
}

/// A function in `V_h`: one coefficient per global DOF.
#[derive(Debug, Clone)]
pub struct DiscreteFunction<T> {
    pub coefficients: Vec<T>,
}

impl<T: Real> DiscreteFunction<T> {
    pub fn zeros(space: &DgSpace<T>) -> Self {
        Self {
            coefficients: vec![T::zero(); space.total_dofs()],
        }
    }

    pub fn from_coefficients(space: &DgSpace<T>, coefficients: Vec<T>) -> Result<Self> {
        if coefficients.len() != space.total_dofs() {
            return Err(Error::Space(format!(
                "coefficient vector of length {} for a space with {} DOFs",
                coefficients.len(),
                space.total_dofs()
            )));
        }
        Ok(Self { coefficients })
    }

    /// Value, tangential gradient, Laplace–Beltrami and its surface gradient
    /// of the discrete function at one parameter point of a patch.
    pub fn evaluate(
        &self,
        mp: &MultipatchSurface<T>,
        space: &DgSpace<T>,
        patch: usize,
        xi: [T; 2],
    ) -> Result<ShapeSurfaceData<T>> {
        let frame = crate::geometry::frame_at(mp.patch(patch), xi)?;
        let ps = space.patch(patch);
        let basis = ps.active_basis(xi)?;
        let indices = ps.active_indices(basis.span_u, basis.span_v);
        let mut combined = ParamJet::default();
        for (jet, &gi) in basis.jets.iter().zip(&indices) {
            let c = self.coefficients[gi];
            for a in 0..4usize {
                for b in 0..4 - a {
                    combined.d[a][b] += c * jet.d[a][b];
                }
            }
        }
        Ok(shape_surface_data(&frame, &combined))
    }

    pub fn to_artifact(&self, space: &DgSpace<T>) -> SolutionArtifact {
        SolutionArtifact {
            signature: space.signature(),
            coefficients: self
                .coefficients
                .iter()
                .map(|c| c.to_f64().unwrap_or(f64::NAN))
                .collect(),
        }
    }

    pub fn from_artifact(space: &DgSpace<T>, artifact: &SolutionArtifact) -> Result<Self> {
        if artifact.signature != space.signature() {
            return Err(Error::Artifact(format!(
                "artifact signature {:?} does not match the space {:?}",
                artifact.signature,
                space.signature()
            )));
        }
        Self::from_coefficients(space, artifact.coefficients.iter().map(|&c| real(c)).collect())
    }
}

/// Coefficient vector plus the space signature, for reproducible storage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionArtifact {
    pub signature: SpaceSignature,
    pub coefficients: Vec<f64>,
}

impl SolutionArtifact {
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Patchwise L2 projection of a point function onto the space; exact (up to
/// roundoff) for functions already in the space.
pub fn l2_project<T: Real>(
    mp: &MultipatchSurface<T>,
    mesh: &MeshLevel<T>,
    space: &DgSpace<T>,
    f: &dyn Fn(&[T; 3]) -> T,
) -> Result<DiscreteFunction<T>> {
    let rule = gauss_legendre::<T>(space.degree() + 3)?;
    let mut coeffs = vec![T::zero(); space.total_dofs()];
    for pi in 0..mp.num_patches() {
        let ps = space.patch(pi);
        let n = ps.num_dofs();
        let mut mass = vec![vec![T::zero(); n]; n];
        let mut rhs = vec![T::zero(); n];
        for (eu, ev) in mesh.elements(pi) {
            for (u, wu) in rule.mapped(eu[0], eu[1]) {
                for (v, wv) in rule.mapped(ev[0], ev[1]) {
                    let frame = crate::geometry::frame_at(mp.patch(pi), [u, v])?;
                    let basis = ps.active_basis([u, v])?;
                    let locals: Vec<usize> = ps
                        .active_indices(basis.span_u, basis.span_v)
                        .iter()
                        .map(|g| g - ps.dof_offset)
                        .collect();
                    let scale = wu * wv * frame.area_element;
                    let fv = f(&frame.point);
                    for (a, &ia) in locals.iter().enumerate() {
                        let va = basis.jets[a].d[0][0];
                        rhs[ia] += scale * fv * va;
                        for (b, &ib) in locals.iter().enumerate() {
                            mass[ia][ib] += scale * va * basis.jets[b].d[0][0];
                        }
                    }
                }
            }
        }
        let sol = crate::solve::dense_solve_spd(mass, rhs)?;
        coeffs[ps.dof_offset..ps.dof_offset + n].copy_from_slice(&sol);
    }
    Ok(DiscreteFunction { coefficients: coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{flat_patch, quarter_cylinder, torus, PolynomialSolution};
    use crate::multipatch::MultipatchSurface;
    use crate::norms::ExactSolution;

    fn build(
        geometry: &crate::multipatch::GeometryFile,
        degree: usize,
        level: usize,
    ) -> (MultipatchSurface<f64>, MeshLevel<f64>, DgSpace<f64>) {
        let mp = MultipatchSurface::<f64>::from_geometry(geometry).unwrap();
        let mesh = mp.refined_mesh(level).unwrap();
        let space = DgSpace::new(&mp, &mesh, degree).unwrap();
        (mp, mesh, space)
    }

    #[test]
    fn quarter_cylinder_dof_counts() {
        let bench = quarter_cylinder::<f64>();
        let (_, _, space) = build(&bench.geometry, 2, 0);
        for i in 0..4 {
            assert_eq!(space.patch(i).num_dofs(), 9);
        }
        assert_eq!(space.total_dofs(), 36);
    }

    #[test]
    fn offsets_are_increasing_and_disjoint() {
        let bench = torus::<f64>();
        let (_, _, space) = build(&bench.geometry, 3, 1);
        let mut expected = 0;
        for i in 0..space.num_patches() {
            assert_eq!(space.patch(i).dof_offset(), expected);
            expected += space.patch(i).num_dofs();
        }
        assert_eq!(space.total_dofs(), expected);
    }

    #[test]
    fn refinement_grows_basis_by_inserted_knots() {
        let bench = quarter_cylinder::<f64>();
        let (_, _, s0) = build(&bench.geometry, 3, 0);
        let (_, _, s1) = build(&bench.geometry, 3, 1);
        // one refinement adds one knot per direction here (single span each)
        assert_eq!(s1.patch(0).num_u(), s0.patch(0).num_u() + 1);
        assert_eq!(s1.patch(0).num_v(), s0.patch(0).num_v() + 1);
    }

    #[test]
    fn torus_junctions_get_reduced_continuity_knots() {
        let bench = torus::<f64>();
        let (_, _, space) = build(&bench.geometry, 3, 1);
        let kv = space.patch(0).kv_u();
        let count = |b: f64| kv.knots().iter().filter(|&&u| u == b).count();
        // inherited geometry breakpoints carry multiplicity p - 1 = 2
        assert_eq!(count(0.25), 2);
        assert_eq!(count(0.5), 2);
        assert_eq!(count(0.75), 2);
        // dyadically inserted breakpoints are simple
        assert_eq!(count(0.125), 1);
        assert_eq!(count(0.375), 1);
        // n = interior knots + p + 1 = (3*2 + 4) + 4 = 14
        assert_eq!(kv.num_basis(), 14);
    }

    #[test]
    fn degree_below_two_is_rejected() {
        let bench = flat_patch::<f64>(1);
        let mp = MultipatchSurface::<f64>::from_geometry(&bench.geometry).unwrap();
        let mesh = mp.refined_mesh(0).unwrap();
        assert!(DgSpace::new(&mp, &mesh, 1).is_err());
    }

    #[test]
    fn constant_function_has_vanishing_derivatives() {
        let bench = quarter_cylinder::<f64>();
        let (mp, _, space) = build(&bench.geometry, 2, 1);
        let c = 2.75;
        let u = DiscreteFunction::from_coefficients(
            &space,
            vec![c; space.total_dofs()],
        )
        .unwrap();
        for &xi in &[[0.2, 0.3], [0.7, 0.9]] {
            let data = u.evaluate(&mp, &space, 1, xi).unwrap();
            assert!((data.value - c).abs() < 1e-12);
            assert!(crate::geometry::norm3(&data.surface_gradient) < 1e-11);
            assert!(data.laplace_beltrami.abs() < 1e-10);
            assert!(crate::geometry::norm3(&data.grad_laplace_beltrami) < 1e-9);
        }
    }

    #[test]
    fn linear_function_is_harmonic_on_flat_patches() {
        let bench = flat_patch::<f64>(2);
        let (mp, mesh, space) = build(&bench.geometry, 2, 1);
        let f = |x: &[f64; 3]| 0.7 * x[0] - 1.3 * x[1] + 0.25;
        let u = l2_project(&mp, &mesh, &space, &f).unwrap();
        for &xi in &[[0.2, 0.6], [0.9, 0.1]] {
            let data = u.evaluate(&mp, &space, 0, xi).unwrap();
            assert!(data.laplace_beltrami.abs() < 1e-10);
        }
    }

    #[test]
    fn polynomial_reproduction_on_flat_patches() {
        for p in [2usize, 3, 4] {
            let bench = flat_patch::<f64>(p);
            let (mp, mesh, space) = build(&bench.geometry, p, 1);
            let exact = PolynomialSolution::<f64>::total_degree(p);
            let f = |x: &[f64; 3]| exact.value(x);
            let u = l2_project(&mp, &mesh, &space, &f).unwrap();
            for pi in 0..2 {
                for i in 0..4 {
                    for j in 0..4 {
                        let xi = [i as f64 / 3.0, j as f64 / 3.0];
                        let data = u.evaluate(&mp, &space, pi, xi).unwrap();
                        let frame = crate::geometry::frame_at(mp.patch(pi), xi).unwrap();
                        let err = (data.value - exact.value(&frame.point)).abs();
                        assert!(err <= 1e-9, "p={p} patch {pi} at {xi:?}: {err:e}");
                    }
                }
            }
        }
    }

    #[test]
    fn patch_indicator_jumps_by_one_across_the_interface() {
        let bench = flat_patch::<f64>(2);
        let (mp, _, space) = build(&bench.geometry, 2, 1);
        let mut coeffs = vec![0.0; space.total_dofs()];
        for c in coeffs.iter_mut().take(space.patch(0).num_dofs()) {
            *c = 1.0;
        }
        let u = DiscreteFunction::from_coefficients(&space, coeffs).unwrap();
        for i in 0..5 {
            let t = i as f64 / 4.0;
            let a = u.evaluate(&mp, &space, 0, [1.0, t]).unwrap();
            let b = u.evaluate(&mp, &space, 1, [0.0, t]).unwrap();
            assert!(((a.value - b.value).abs() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn laplacian_matches_divergence_of_gradient_by_finite_differences() {
        use rand::{Rng, SeedableRng};
        let bench = quarter_cylinder::<f64>();
        let (mp, _, space) = build(&bench.geometry, 3, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let coeffs: Vec<f64> = (0..space.total_dofs()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let u = DiscreteFunction::from_coefficients(&space, coeffs).unwrap();
        let patch = mp.patch(0);
        let ps = space.patch(0);
        // parametric partials of u_h
        let du = |alpha: usize, xi: [f64; 2]| -> f64 {
            let basis = ps.active_basis(xi).unwrap();
            let idx = ps.active_indices(basis.span_u, basis.span_v);
            let mut out = 0.0;
            for (jet, &g) in basis.jets.iter().zip(&idx) {
                let d = if alpha == 0 { jet.d[1][0] } else { jet.d[0][1] };
                out += u.coefficients[g] * d;
            }
            out
        };
        let stencil = |f: &dyn Fn(f64) -> f64, x: f64, h: f64| -> f64 {
            let c = [(3.0 / 4.0, 1.0), (-3.0 / 20.0, 2.0), (1.0 / 60.0, 3.0)];
            c.iter().map(|&(w, k)| w * (f(x + k * h) - f(x - k * h))).sum::<f64>() / h
        };
        let h = 1e-3;
        for &xi in &[[0.3, 0.3], [0.62, 0.8]] {
            // keep the stencil inside one element (level-1 spans have width 1/2)
            let frame = crate::geometry::frame_at(patch, xi).unwrap();
            let q = |alpha: usize, u1: f64, v1: f64| -> f64 {
                let fr = crate::geometry::frame_at(patch, [u1, v1]).unwrap();
                let g = fr.metric.scaled_inv;
                g[alpha][0] * du(0, [u1, v1]) + g[alpha][1] * du(1, [u1, v1])
            };
            let div = stencil(&|t| q(0, t, xi[1]), xi[0], h) + stencil(&|t| q(1, xi[0], t), xi[1], h);
            let lap_fd = div * frame.metric.inv_area;
            let lap = u.evaluate(&mp, &space, 0, xi).unwrap().laplace_beltrami;
            let rel = (lap - lap_fd).abs() / lap.abs().max(1.0);
            assert!(rel < 1e-6, "at {xi:?}: {lap} vs {lap_fd}");
        }
    }

    #[test]
    fn artifact_roundtrip_and_signature_check() {
        let bench = flat_patch::<f64>(2);
        let (_, mesh, space) = build(&bench.geometry, 2, 1);
        let u = DiscreteFunction::from_coefficients(
            &space,
            (0..space.total_dofs()).map(|i| i as f64).collect(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("solution.json");
        u.to_artifact(&space).write(&path).unwrap();
        let artifact = SolutionArtifact::read(&path).unwrap();
        let back = DiscreteFunction::from_artifact(&space, &artifact).unwrap();
        assert_eq!(back.coefficients, u.coefficients);
        // different level -> signature mismatch
        let mp = MultipatchSurface::<f64>::from_geometry(&bench.geometry).unwrap();
        let other = DgSpace::new(&mp, &mesh, 3).unwrap();
        assert!(DiscreteFunction::from_artifact(&other, &artifact).is_err());
    }
}
