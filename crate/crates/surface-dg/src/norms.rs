//! Broken-norm error measurement and convergence rates.
//!
//! The primary norm combines elementwise Laplace–Beltrami and L2 terms with
//! scaled facet jumps,
//!
//! ```text
//!   ‖v‖²_h  = Σ_i ‖Δ_Ω v‖² + Σ_i ‖v‖² + Σ_F (δ₁/h³)‖⟦v⟧‖² + Σ_F (δ₀/h)‖⟦∇_Ω v⟧‖²,
//! ```
//!
//! and the extended norm adds the scaled flux averages
//! `(h³/δ₁)‖{∇_Ω Δ_Ω v}‖² + (h/δ₀)‖{Δ_Ω v}‖²`. Facet sums run over interior
//! and Dirichlet facets. Error quadrature uses one more point per direction
//! than assembly.

use serde::Serialize;

use crate::assembly::{jump_average, JumpAverage, MethodConfig};
use crate::error::Result;
use crate::geometry::{
    facet_frame_full, frame_at, shape_surface_data, sub3, ShapeSurfaceData, SurfaceFrame,
};
use crate::multipatch::{FacetKind, MeshLevel, MultipatchSurface};
use crate::quadrature::gauss_legendre;
use crate::space::{DgSpace, DiscreteFunction, PatchSpace};
use crate::Real;

/// A manufactured solution: closed-form surface fields at physical points.
pub trait ExactSolution<T>: Send + Sync {
    fn value(&self, x: &[T; 3]) -> T;
    fn surface_gradient(&self, x: &[T; 3]) -> [T; 3];
    fn laplacian(&self, x: &[T; 3]) -> T;
    fn grad_laplacian(&self, x: &[T; 3]) -> [T; 3];
    /// Source `f = Δ²u + u`.
    fn source(&self, x: &[T; 3]) -> T;
}

/// Squared contributions per term of the norms.
#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorBreakdown<T> {
    pub volume_laplacian_sq: T,
    pub volume_l2_sq: T,
    pub value_jump_sq: T,
    pub gradient_jump_sq: T,
    /// star-norm extra: `(h/δ₀) {Δ_Ω e}²`
    pub laplacian_avg_sq: T,
    /// star-norm extra: `(h³/δ₁) {∇_Ω Δ_Ω e}²`
    pub flux_avg_sq: T,
}

#[derive(Debug, Clone, Copy)]
pub struct ErrorReport<T> {
    pub dg_norm: T,
    pub dg_star_norm: T,
    pub l2_norm: T,
    pub terms: ErrorBreakdown<T>,
}

/// f64 view of an [`ErrorReport`] for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReportOut {
    pub dg_norm: f64,
    pub dg_star_norm: f64,
    pub l2_norm: f64,
    pub volume_laplacian_sq: f64,
    pub volume_l2_sq: f64,
    pub value_jump_sq: f64,
    pub gradient_jump_sq: f64,
    pub laplacian_avg_sq: f64,
    pub flux_avg_sq: f64,
}

impl<T: Real> ErrorReport<T> {
    pub fn as_f64(&self) -> ErrorReportOut {
        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        ErrorReportOut {
            dg_norm: f(self.dg_norm),
            dg_star_norm: f(self.dg_star_norm),
            l2_norm: f(self.l2_norm),
            volume_laplacian_sq: f(self.terms.volume_laplacian_sq),
            volume_l2_sq: f(self.terms.volume_l2_sq),
            value_jump_sq: f(self.terms.value_jump_sq),
            gradient_jump_sq: f(self.terms.gradient_jump_sq),
            laplacian_avg_sq: f(self.terms.laplacian_avg_sq),
            flux_avg_sq: f(self.terms.flux_avg_sq),
        }
    }
}

/// Error fields `e = u − u_h` at one evaluation point of one patch side.
fn error_traces<T: Real>(
    frame: &SurfaceFrame<T>,
    ps: &PatchSpace<T>,
    xi: [T; 2],
    u_h: &DiscreteFunction<T>,
    exact: &dyn ExactSolution<T>,
) -> Result<ShapeSurfaceData<T>> {
    let basis = ps.active_basis(xi)?;
    let globals = ps.active_indices(basis.span_u, basis.span_v);
    let mut combined = crate::geometry::ParamJet::default();
    for (jet, &g) in basis.jets.iter().zip(&globals) {
        let c = u_h.coefficients[g];
        for a in 0..4usize {
            for b in 0..4 - a {
                combined.d[a][b] += c * jet.d[a][b];
            }
        }
    }
    let dh = shape_surface_data(frame, &combined);
    let x = frame.point;
    Ok(ShapeSurfaceData {
        value: exact.value(&x) - dh.value,
        surface_gradient: sub3(&exact.surface_gradient(&x), &dh.surface_gradient),
        laplace_beltrami: exact.laplacian(&x) - dh.laplace_beltrami,
        grad_laplace_beltrami: sub3(&exact.grad_laplacian(&x), &dh.grad_laplace_beltrami),
    })
}

/// Measures `u − u_h` in the broken norms and in L2.
pub fn dg_error<T: Real>(
    mp: &MultipatchSurface<T>,
    mesh: &MeshLevel<T>,
    space: &DgSpace<T>,
    u_h: &DiscreteFunction<T>,
    exact: &dyn ExactSolution<T>,
    config: &MethodConfig<T>,
) -> Result<ErrorReport<T>> {
    let rule = gauss_legendre::<T>(space.degree() + 3)?;
    let mut terms = ErrorBreakdown::<T>::default();

    for pi in 0..mp.num_patches() {
        let patch = mp.patch(pi);
        let ps = space.patch(pi);
        for (eu, ev) in mesh.elements(pi) {
            for (u, wu) in rule.mapped(eu[0], eu[1]) {
                for (v, wv) in rule.mapped(ev[0], ev[1]) {
                    let frame = frame_at(patch, [u, v])?;
                    let e = error_traces(&frame, ps, [u, v], u_h, exact)?;
                    let scale = wu * wv * frame.area_element;
                    terms.volume_laplacian_sq += scale * e.laplace_beltrami * e.laplace_beltrami;
                    terms.volume_l2_sq += scale * e.value * e.value;
                }
            }
        }
    }

    let mut add_facet = |ja: JumpAverage<T>, measure: T, h: T| {
        let w_jump = config.delta1 / (h * h * h);
        let w_grad = config.delta0 / h;
        terms.value_jump_sq += measure * w_jump * ja.value_jump * ja.value_jump;
        terms.gradient_jump_sq += measure * w_grad * ja.gradient_jump * ja.gradient_jump;
        terms.laplacian_avg_sq += measure * (h / config.delta0) * ja.laplacian_avg * ja.laplacian_avg;
        terms.flux_avg_sq += measure * (h * h * h / config.delta1) * ja.flux_avg * ja.flux_avg;
    };

    for facet in mp.interior_facets() {
        let h = mesh.facet_h_interior(facet);
        let dir = facet.side_a.tangent_direction();
        let partition = mesh.partitions[facet.patch_a][dir].clone();
        for seg in partition.windows(2) {
            for (t, wt) in rule.mapped(seg[0], seg[1]) {
                let (frame_a, ff) = facet_frame_full(mp.patch(facet.patch_a), facet.side_a, t)?;
                let ea = error_traces(&frame_a, space.patch(facet.patch_a), facet.side_a.xi(t), u_h, exact)?;
                let tb = if facet.reversed { T::one() - t } else { t };
                let xi_b = facet.side_b.xi(tb);
                let frame_b = frame_at(mp.patch(facet.patch_b), xi_b)?;
                let eb = error_traces(&frame_b, space.patch(facet.patch_b), xi_b, u_h, exact)?;
                let ja = jump_average(&ea, Some(&eb), &ff.conormal);
                add_facet(ja, wt * ff.arc_factor, h);
            }
        }
    }

    for facet in mp.boundary_facets() {
        if facet.kind != FacetKind::Dirichlet {
            continue;
        }
        let h = mesh.h[facet.patch];
        let dir = facet.side.tangent_direction();
        let partition = mesh.partitions[facet.patch][dir].clone();
        for seg in partition.windows(2) {
            for (t, wt) in rule.mapped(seg[0], seg[1]) {
                let (frame, ff) = facet_frame_full(mp.patch(facet.patch), facet.side, t)?;
                let e = error_traces(&frame, space.patch(facet.patch), facet.side.xi(t), u_h, exact)?;
                let ja = jump_average(&e, None, &ff.conormal);
                add_facet(ja, wt * ff.arc_factor, h);
            }
        }
    }

    let h_sq = terms.volume_laplacian_sq
        + terms.volume_l2_sq
        + terms.value_jump_sq
        + terms.gradient_jump_sq;
    let star_sq = h_sq + terms.laplacian_avg_sq + terms.flux_avg_sq;
    Ok(ErrorReport {
        dg_norm: h_sq.sqrt(),
        dg_star_norm: star_sq.sqrt(),
        l2_norm: terms.volume_l2_sq.sqrt(),
        terms,
    })
}

/// Convergence rates `log₂(e_i / e_{i+1})`; `None` where an error is not
/// strictly positive.
pub fn rates<T: Real>(errors: &[T]) -> Vec<Option<T>> {
    errors
        .windows(2)
        .map(|w| {
            if w[0] > T::zero() && w[1] > T::zero() {
                Some((w[0] / w[1]).log2())
            } else {
                None
            }
        })
        .collect()
}
