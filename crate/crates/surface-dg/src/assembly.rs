//! Assembly of the interior-penalty forms for the four dG variants.
//!
//! Volume terms integrate `Δ_Ω u Δ_Ω v + u v` per patch. On interior and
//! Dirichlet facets the coupling terms are, with `⟦·⟧` jumps, `{·}` averages,
//! `m̂` the fixed co-normal of the facet's first side and `h` the facet mesh
//! size,
//!
//! ```text
//!   − ∫ ⟦∇v⟧{Δu}  − β₀ ∫ ⟦∇u⟧{Δv}  + ∫ {∇Δu}⟦v⟧  + β₁ ∫ {∇Δv}⟦u⟧
//!   + (δ₁/h³) ∫ ⟦u⟧⟦v⟧  + (δ₀/h) ∫ ⟦∇u⟧⟦∇v⟧
//! ```
//!
//! On Dirichlet facets jumps and averages are plain traces and the data
//! enters the right-hand side mirroring the matrix terms
//! (`(δ₁/h³) v + β₁ m̂·∇Δv` against `g₀`, `(δ₀/h) m̂·∇v − β₀ Δv` against
//! `g₁`). Neumann facets contribute `∫ (m̂·∇v) g₂ + v g₃` to the right-hand
//! side only.
//!
//! Loops run patch-major, element-lexicographic, facet-ordinal; triplets are
//! merged with a stable sort, so serial assembly is bit-reproducible.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot3, facet_frame_full, frame_at, shape_surface_data, ShapeSurfaceData};
use crate::multipatch::{FacetKind, MeshLevel, MultipatchSurface};
use crate::quadrature::{element_rule, facet_rule};
use crate::space::{DgSpace, SpaceSignature};
use crate::sparse::CsrMatrix;
use crate::{real, Real};

/// The four interior-penalty variants: sign choices `(β₀, β₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sipg,
    Nipg,
    Ssipg1,
    Ssipg2,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Sipg, Variant::Nipg, Variant::Ssipg1, Variant::Ssipg2];

    pub fn betas<T: Real>(&self) -> (T, T) {
        let one = T::one();
        match self {
            Variant::Sipg => (one, one),
            Variant::Nipg => (-one, -one),
            Variant::Ssipg1 => (-one, one),
            Variant::Ssipg2 => (one, -one),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Sipg => "sipg",
            Variant::Nipg => "nipg",
            Variant::Ssipg1 => "ssipg1",
            Variant::Ssipg2 => "ssipg2",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sipg" => Ok(Variant::Sipg),
            "nipg" => Ok(Variant::Nipg),
            "ssipg1" => Ok(Variant::Ssipg1),
            "ssipg2" => Ok(Variant::Ssipg2),
            other => Err(Error::Solver(format!("unknown method variant '{other}'"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Default penalty `(p+1)(p+3)/3` for both jump terms.
pub fn default_penalty<T: Real>(p: usize) -> T {
    real::<T>(((p + 1) * (p + 3)) as f64 / 3.0)
}

/// Variant plus penalty parameters.
#[derive(Debug, Clone, Copy)]
pub struct MethodConfig<T> {
    pub variant: Variant,
    pub delta0: T,
    pub delta1: T,
}

impl<T: Real> MethodConfig<T> {
    pub fn new(variant: Variant, degree: usize) -> Self {
        let d = default_penalty(degree);
        Self {
            variant,
            delta0: d,
            delta1: d,
        }
    }

    pub fn with_penalties(variant: Variant, delta0: T, delta1: T) -> Self {
        Self {
            variant,
            delta0,
            delta1,
        }
    }
}

/// Problem data callbacks, all taking physical points. `dirichlet_slope`
/// and `neumann_flux` additionally receive the outward co-normal.
///
/// The Neumann flux enters the linear form as `+∫ v g₃`; data manufactured
/// from an exact solution must therefore supply `g₃ = −m̂·∇_Ω Δ_Ω u`.
pub struct ProblemData<'a, T> {
    pub source: &'a dyn Fn(&[T; 3]) -> T,
    /// `g₀`: boundary value on Dirichlet facets.
    pub dirichlet_value: Option<&'a dyn Fn(&[T; 3]) -> T>,
    /// `g₁`: co-normal derivative on Dirichlet facets.
    pub dirichlet_slope: Option<&'a dyn Fn(&[T; 3], &[T; 3]) -> T>,
    /// `g₂`: Laplacian trace on Neumann facets.
    pub neumann_moment: Option<&'a dyn Fn(&[T; 3]) -> T>,
    /// `g₃`: flux datum on Neumann facets.
    pub neumann_flux: Option<&'a dyn Fn(&[T; 3], &[T; 3]) -> T>,
}

impl<'a, T: Real> ProblemData<'a, T> {
    pub fn interior_only(source: &'a dyn Fn(&[T; 3]) -> T) -> Self {
        Self {
            source,
            dirichlet_value: None,
            dirichlet_slope: None,
            neumann_moment: None,
            neumann_flux: None,
        }
    }
}

/// Jumps and averages of facet traces with a fixed co-normal.
#[derive(Debug, Clone, Copy)]
pub struct JumpAverage<T> {
    /// `⟦v⟧`
    pub value_jump: T,
    /// `⟦∇_Ω v⟧ = m̂·(∇v_a − ∇v_b)`
    pub gradient_jump: T,
    /// `{Δ_Ω v}`
    pub laplacian_avg: T,
    /// `{∇_Ω Δ_Ω v} = ½ m̂·(∇Δv_a + ∇Δv_b)`
    pub flux_avg: T,
}

/// Jump/average of one-sided traces. On interior facets (`side_b` present)
/// the jump is `a − b` against the fixed co-normal `m̂` of side a, and
/// averages are halved sums; on boundary facets both are plain traces.
pub fn jump_average<T: Real>(
    side_a: &ShapeSurfaceData<T>,
    side_b: Option<&ShapeSurfaceData<T>>,
    conormal: &[T; 3],
) -> JumpAverage<T> {
    match side_b {
        Some(b) => {
            let half = real::<T>(0.5);
            JumpAverage {
                value_jump: side_a.value - b.value,
                gradient_jump: dot3(conormal, &side_a.surface_gradient)
                    - dot3(conormal, &b.surface_gradient),
                laplacian_avg: half * (side_a.laplace_beltrami + b.laplace_beltrami),
                flux_avg: half
                    * (dot3(conormal, &side_a.grad_laplace_beltrami)
                        + dot3(conormal, &b.grad_laplace_beltrami)),
            }
        }
        None => JumpAverage {
            value_jump: side_a.value,
            gradient_jump: dot3(conormal, &side_a.surface_gradient),
            laplacian_avg: side_a.laplace_beltrami,
            flux_avg: dot3(conormal, &side_a.grad_laplace_beltrami),
        },
    }
}

/// Penalty weights actually used on one facet (for scaling diagnostics).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FacetPenalty<T> {
    pub interior: bool,
    pub index: usize,
    pub h: T,
    /// `δ₁ / h³`
    pub jump_weight: T,
    /// `δ₀ / h`
    pub gradient_weight: T,
}

/// Sparse system for one (variant, degree, level) tuple.
#[derive(Debug, Clone)]
pub struct AssembledSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub config: MethodConfig<T>,
    pub signature: SpaceSignature,
    pub facet_penalties: Vec<FacetPenalty<T>>,
}

#[derive(Serialize, Deserialize)]
struct TripletExport {
    n: usize,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
}

impl<T: Real> AssembledSystem<T> {
    /// Writes the system in the documented triplet JSON format
    /// `{"n": .., "triplets": [[row, col, value], ..], "rhs": [..]}`.
    pub fn export_triplets(&self, path: &Path) -> Result<()> {
        let export = TripletExport {
            n: self.matrix.n_rows(),
            triplets: self
                .matrix
                .iter()
                .map(|(r, c, v)| (r, c, v.to_f64().unwrap_or(f64::NAN)))
                .collect(),
            rhs: self.rhs.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        };
        std::fs::write(path, serde_json::to_string(&export)?)?;
        Ok(())
    }
}

struct SideTraces<T> {
    globals: Vec<usize>,
    /// per active function: (⟦·⟧-signed value, signed co-normal gradient,
    /// half/full laplacian, half/full co-normal flux)
    parts: Vec<JumpAverage<T>>,
}

/// Evaluates the active basis of `patch` at a facet point and forms the
/// per-function jump/average parts with the given sign and averaging factor.
#[allow(clippy::too_many_arguments)]
fn side_traces<T: Real>(
    mp: &MultipatchSurface<T>,
    space: &DgSpace<T>,
    patch: usize,
    xi: [T; 2],
    conormal: &[T; 3],
    sign: T,
    interior: bool,
    frame: &crate::geometry::SurfaceFrame<T>,
) -> Result<SideTraces<T>> {
    let _ = mp;
    let ps = space.patch(patch);
    let basis = ps.active_basis(xi)?;
    let globals = ps.active_indices(basis.span_u, basis.span_v);
    let zero = ShapeSurfaceData {
        value: T::zero(),
        surface_gradient: [T::zero(); 3],
        laplace_beltrami: T::zero(),
        grad_laplace_beltrami: [T::zero(); 3],
    };
    let parts = basis
        .jets
        .iter()
        .map(|jet| {
            let data = shape_surface_data(frame, jet);
            let mut ja = if interior {
                jump_average(&data, Some(&zero), conormal)
            } else {
                jump_average(&data, None, conormal)
            };
            ja.value_jump *= sign;
            ja.gradient_jump *= sign;
            ja
        })
        .collect();
    Ok(SideTraces { globals, parts })
}

/// Assembles matrix and right-hand side over volume, interior-facet,
/// Dirichlet-facet and Neumann-facet contributions.
pub fn assemble<T: Real>(
    mp: &MultipatchSurface<T>,
    mesh: &MeshLevel<T>,
    space: &DgSpace<T>,
    config: &MethodConfig<T>,
    data: &ProblemData<'_, T>,
) -> Result<AssembledSystem<T>> {
    let n = space.total_dofs();
    let p = space.degree();
    let (beta0, beta1) = config.variant.betas::<T>();
    let vol_rule = element_rule::<T>(p)?;
    let line_rule = facet_rule::<T>(p)?;

    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    let mut rhs = vec![T::zero(); n];
    let mut penalties = Vec::new();

    // volume terms, patch-major and element-lexicographic
    for pi in 0..mp.num_patches() {
        let patch = mp.patch(pi);
        let ps = space.patch(pi);
        for (eu, ev) in mesh.elements(pi) {
            for (u, wu) in vol_rule.mapped(eu[0], eu[1]) {
                for (v, wv) in vol_rule.mapped(ev[0], ev[1]) {
                    let frame = frame_at(patch, [u, v])?;
                    let basis = ps.active_basis([u, v])?;
                    let globals = ps.active_indices(basis.span_u, basis.span_v);
                    let scale = wu * wv * frame.area_element;
                    let shapes: Vec<ShapeSurfaceData<T>> = basis
                        .jets
                        .iter()
                        .map(|jet| shape_surface_data(&frame, jet))
                        .collect();
                    let f_val = (data.source)(&frame.point);
                    if !f_val.is_finite() {
                        return Err(Error::NonFinite(format!(
                            "source on patch {pi} at ({u}, {v})"
                        )));
                    }
                    for (a, &ga) in globals.iter().enumerate() {
                        rhs[ga] += scale * f_val * shapes[a].value;
                        for (b, &gb) in globals.iter().enumerate() {
                            let val = scale
                                * (shapes[a].laplace_beltrami * shapes[b].laplace_beltrami
                                    + shapes[a].value * shapes[b].value);
                            if !val.is_finite() {
                                return Err(Error::NonFinite(format!(
                                    "volume term on patch {pi}, element ({:?}, {:?})",
                                    eu, ev
                                )));
                            }
                            triplets.push((ga, gb, val));
                        }
                    }
                }
            }
        }
    }

    // interior facets
    for (fi, facet) in mp.interior_facets().iter().enumerate() {
        let h = mesh.facet_h_interior(facet);
        let w_jump = config.delta1 / (h * h * h);
        let w_grad = config.delta0 / h;
        penalties.push(FacetPenalty {
            interior: true,
            index: fi,
            h,
            jump_weight: w_jump,
            gradient_weight: w_grad,
        });
        let dir = facet.side_a.tangent_direction();
        let partition = mesh.partitions[facet.patch_a][dir].clone();
        for seg in partition.windows(2) {
            for (t, wt) in line_rule.mapped(seg[0], seg[1]) {
                let (frame_a, facet_a) =
                    facet_frame_full(mp.patch(facet.patch_a), facet.side_a, t)?;
                let m = facet_a.conormal;
                let side_a = side_traces(
                    mp,
                    space,
                    facet.patch_a,
                    facet.side_a.xi(t),
                    &m,
                    T::one(),
                    true,
                    &frame_a,
                )?;
                let tb = if facet.reversed { T::one() - t } else { t };
                let xi_b = facet.side_b.xi(tb);
                let frame_b = frame_at(mp.patch(facet.patch_b), xi_b)?;
                let side_b = side_traces(
                    mp,
                    space,
                    facet.patch_b,
                    xi_b,
                    &m,
                    -T::one(),
                    true,
                    &frame_b,
                )?;
                let measure = wt * facet_a.arc_factor;
                scatter_facet(
                    &mut triplets,
                    &[&side_a, &side_b],
                    measure,
                    beta0,
                    beta1,
                    w_jump,
                    w_grad,
                    || format!("interior facet {fi}"),
                )?;
            }
        }
    }

    // boundary facets
    for (bi, facet) in mp.boundary_facets().iter().enumerate() {
        let h = mesh.h[facet.patch];
        let w_jump = config.delta1 / (h * h * h);
        let w_grad = config.delta0 / h;
        if facet.kind == FacetKind::Dirichlet {
            penalties.push(FacetPenalty {
                interior: false,
                index: bi,
                h,
                jump_weight: w_jump,
                gradient_weight: w_grad,
            });
        }
        let dir = facet.side.tangent_direction();
        let partition = mesh.partitions[facet.patch][dir].clone();
        for seg in partition.windows(2) {
            for (t, wt) in line_rule.mapped(seg[0], seg[1]) {
                let (frame, ff) = facet_frame_full(mp.patch(facet.patch), facet.side, t)?;
                let m = ff.conormal;
                let traces = side_traces(
                    mp,
                    space,
                    facet.patch,
                    facet.side.xi(t),
                    &m,
                    T::one(),
                    false,
                    &frame,
                )?;
                let measure = wt * ff.arc_factor;
                match facet.kind {
                    FacetKind::Dirichlet => {
                        scatter_facet(
                            &mut triplets,
                            &[&traces],
                            measure,
                            beta0,
                            beta1,
                            w_jump,
                            w_grad,
                            || format!("dirichlet facet {bi}"),
                        )?;
                        let g0 = data
                            .dirichlet_value
                            .ok_or(Error::MissingData("dirichlet_value (g0)"))?(
                            &ff.point
                        );
                        let g1 = data
                            .dirichlet_slope
                            .ok_or(Error::MissingData("dirichlet_slope (g1)"))?(
                            &ff.point, &m,
                        );
                        for (part, &g) in traces.parts.iter().zip(&traces.globals) {
                            let val = measure
                                * ((w_jump * part.value_jump + beta1 * part.flux_avg) * g0
                                    + (w_grad * part.gradient_jump - beta0 * part.laplacian_avg)
                                        * g1);
                            if !val.is_finite() {
                                return Err(Error::NonFinite(format!("dirichlet facet {bi}")));
                            }
                            rhs[g] += val;
                        }
                    }
                    FacetKind::Neumann => {
                        let g2 = data
                            .neumann_moment
                            .ok_or(Error::MissingData("neumann_moment (g2)"))?(
                            &ff.point
                        );
                        let g3 = data
                            .neumann_flux
                            .ok_or(Error::MissingData("neumann_flux (g3)"))?(
                            &ff.point, &m
                        );
                        for (part, &g) in traces.parts.iter().zip(&traces.globals) {
                            let val = measure * (part.gradient_jump * g2 + part.value_jump * g3);
                            if !val.is_finite() {
                                return Err(Error::NonFinite(format!("neumann facet {bi}")));
                            }
                            rhs[g] += val;
                        }
                    }
                }
            }
        }
    }

    Ok(AssembledSystem {
        matrix: CsrMatrix::from_triplets(n, n, triplets),
        rhs,
        config: *config,
        signature: space.signature(),
        facet_penalties: penalties,
    })
}

/// Scatters the facet bilinear terms for every (test, trial) pair of active
/// functions across the participating sides.
#[allow(clippy::too_many_arguments)]
fn scatter_facet<T: Real>(
    triplets: &mut Vec<(usize, usize, T)>,
    sides: &[&SideTraces<T>],
    measure: T,
    beta0: T,
    beta1: T,
    w_jump: T,
    w_grad: T,
    location: impl Fn() -> String,
) -> Result<()> {
    for side_r in sides {
        for (r_part, &gr) in side_r.parts.iter().zip(&side_r.globals) {
            for side_c in sides {
                for (c_part, &gc) in side_c.parts.iter().zip(&side_c.globals) {
                    let val = measure
                        * (-r_part.gradient_jump * c_part.laplacian_avg
                            - beta0 * c_part.gradient_jump * r_part.laplacian_avg
                            + c_part.flux_avg * r_part.value_jump
                            + beta1 * r_part.flux_avg * c_part.value_jump
                            + w_jump * c_part.value_jump * r_part.value_jump
                            + w_grad * c_part.gradient_jump * r_part.gradient_jump);
                    if !val.is_finite() {
                        return Err(Error::NonFinite(location()));
                    }
                    triplets.push((gr, gc, val));
                }
            }
        }
    }
    Ok(())
}
