//! NURBS surface patches and the pullback differential operators.
//!
//! A patch maps the unit square into R³. All surface operators are evaluated
//! through the parametrization: with Jacobian `J` (columns `∂Φ/∂ξ_l`), first
//! fundamental form `F = JᵀJ` and area element `g = √det F`,
//!
//! - tangential gradient: `∇_Ω φ = J F⁻¹ ∇̂φ̂`
//! - Laplace–Beltrami:    `Δ_Ω φ = (1/g) ∇̂·(g F⁻¹ ∇̂φ̂)`
//! - its surface gradient: `∇_Ω Δ_Ω φ = J F⁻¹ ∇̂(Δ_Ω φ)`
//!
//! Derivatives of the metric factors are computed analytically from the
//! patch derivatives via `d(F⁻¹) = −F⁻¹ (dF) F⁻¹` and `dg = d(det F)/(2g)`,
//! with one more product-rule pass for the second-order factors, so that the
//! third-order flux terms carry no finite-difference noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splines::{nurbs_surface_derivs, KnotVector, SurfaceJet};
use crate::{real, Real};

/// Threshold on `det F` below which the parametrization counts as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

pub(crate) type V2<T> = [T; 2];
pub(crate) type V3<T> = [T; 3];
pub(crate) type M2<T> = [[T; 2]; 2];

#[inline]
pub fn dot3<T: Real>(a: &V3<T>, b: &V3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3<T: Real>(a: &V3<T>) -> T {
    dot3(a, a).sqrt()
}

#[inline]
pub fn scale3<T: Real>(a: &V3<T>, s: T) -> V3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn sub3<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add3<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
fn mat2_vec<T: Real>(m: &M2<T>, v: V2<T>) -> V2<T> {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[inline]
fn mat2_mul<T: Real>(a: &M2<T>, b: &M2<T>) -> M2<T> {
    let mut out = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[inline]
fn mat2_scale<T: Real>(a: &M2<T>, s: T) -> M2<T> {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

#[inline]
fn mat2_add<T: Real>(a: &M2<T>, b: &M2<T>) -> M2<T> {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

/// One NURBS patch: bidirectional knot vectors plus a weighted control net
/// mapping the unit square into R³. Control points are stored row-major
/// with index `iu * num_v + iv`.
#[derive(Debug, Clone)]
pub struct NurbsPatch<T> {
    pub id: usize,
    kv_u: KnotVector<T>,
    kv_v: KnotVector<T>,
    points: Vec<[T; 3]>,
    weights: Vec<T>,
    num_u: usize,
    num_v: usize,
}

impl<T: Real> NurbsPatch<T> {
    pub fn new(
        id: usize,
        kv_u: KnotVector<T>,
        kv_v: KnotVector<T>,
        points: Vec<[T; 3]>,
        weights: Vec<T>,
    ) -> Result<Self> {
        let (num_u, num_v) = (kv_u.num_basis(), kv_v.num_basis());
        if points.len() != num_u * num_v {
            return Err(Error::Geometry(format!(
                "patch {id}: control grid has {} points, expected {} x {}",
                points.len(),
                num_u,
                num_v
            )));
        }
        if weights.len() != points.len() {
            return Err(Error::Geometry(format!(
                "patch {id}: {} weights for {} control points",
                weights.len(),
                points.len()
            )));
        }
        if weights.iter().any(|&w| w <= T::zero()) {
            return Err(Error::Geometry(format!(
                "patch {id}: weights must be strictly positive"
            )));
        }
        Ok(Self {
            id,
            kv_u,
            kv_v,
            points,
            weights,
            num_u,
            num_v,
        })
    }

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

    pub fn control_points(&self) -> &[[T; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// All mixed parametric derivatives of the patch map to total order `k`.
    pub fn derivs(&self, xi: [T; 2], k: usize) -> Result<SurfaceJet<T>> {
        nurbs_surface_derivs(&self.kv_u, &self.kv_v, &self.points, &self.weights, self.num_v, xi, k)
    }

    pub fn point(&self, xi: [T; 2]) -> Result<[T; 3]> {
        Ok(self.derivs(xi, 0)?.point())
    }
}

/// First- and second-order derivatives of the metric factors needed by the
/// Laplace–Beltrami pipeline: `G = g F⁻¹`, its parametric derivatives, and
/// `1/g` with its first derivatives.
#[derive(Debug, Clone)]
pub(crate) struct MetricDerivs<T> {
    pub scaled_inv: M2<T>,
    pub d_scaled_inv: [M2<T>; 2],
    /// second derivatives at index pairs (0,0), (0,1), (1,1)
    pub dd_scaled_inv: [M2<T>; 3],
    pub inv_area: T,
    pub d_inv_area: V2<T>,
}

/// Complete geometric data of a patch at one parameter point.
#[derive(Debug, Clone)]
pub struct SurfaceFrame<T> {
    pub point: V3<T>,
    /// `tangents[l] = ∂Φ/∂ξ_l` — the two columns of the Jacobian.
    pub tangents: [V3<T>; 2],
    pub first_form: M2<T>,
    pub first_form_inv: M2<T>,
    pub det_first_form: T,
    /// `g = √det F`, the area element.
    pub area_element: T,
    pub normal: V3<T>,
    pub(crate) metric: MetricDerivs<T>,
}

impl<T: Real> SurfaceFrame<T> {
    /// `J F⁻¹ v` for a parametric 2-vector `v`: lifts parametric gradients
    /// into the tangent plane.
    pub fn push_gradient(&self, v: V2<T>) -> V3<T> {
        let w = mat2_vec(&self.first_form_inv, v);
        add3(&scale3(&self.tangents[0], w[0]), &scale3(&self.tangents[1], w[1]))
    }
}

const SYM: [[usize; 2]; 3] = [[0, 0], [0, 1], [1, 1]];

#[inline]
fn sym_index(a: usize, b: usize) -> usize {
    a + b // (0,0) -> 0, (0,1)/(1,0) -> 1, (1,1) -> 2
}

/// Evaluates the geometric frame of `patch` at `xi`, including all metric
/// derivatives required for third-order surface operators.
pub fn frame_at<T: Real>(patch: &NurbsPatch<T>, xi: [T; 2]) -> Result<SurfaceFrame<T>> {
    let jet = patch.derivs(xi, 3)?;
    frame_from_jet(patch.id, xi, &jet)
}

/// Same as [`frame_at`] for an already-computed jet of order 3.
pub fn frame_from_jet<T: Real>(
    patch_id: usize,
    xi: [T; 2],
    jet: &SurfaceJet<T>,
) -> Result<SurfaceFrame<T>> {
    let d = &jet.d;
    let tangents = [d[1][0], d[0][1]];
    // ∂_γ t_l and ∂_δ∂_γ t_l from the jet
    let dt = [[d[2][0], d[1][1]], [d[1][1], d[0][2]]]; // dt[γ][l]
    let ddt = [
        [d[3][0], d[2][1]], // (0,0)
        [d[2][1], d[1][2]], // (0,1)
        [d[1][2], d[0][3]], // (1,1)
    ];

    let mut first_form = [[T::zero(); 2]; 2];
    for l in 0..2 {
        for m in 0..2 {
            first_form[l][m] = dot3(&tangents[l], &tangents[m]);
        }
    }

    let mut d_first = [[[T::zero(); 2]; 2]; 2];
    for gamma in 0..2 {
        for l in 0..2 {
            for m in 0..2 {
                d_first[gamma][l][m] =
                    dot3(&dt[gamma][l], &tangents[m]) + dot3(&tangents[l], &dt[gamma][m]);
            }
        }
    }

    let mut dd_first = [[[T::zero(); 2]; 2]; 3];
    for (s, pair) in SYM.iter().enumerate() {
        let (delta, gamma) = (pair[0], pair[1]);
        for l in 0..2 {
            for m in 0..2 {
                dd_first[s][l][m] = dot3(&ddt[s][l], &tangents[m])
                    + dot3(&dt[gamma][l], &dt[delta][m])
                    + dot3(&dt[delta][l], &dt[gamma][m])
                    + dot3(&tangents[l], &ddt[s][m]);
            }
        }
    }

    let det = first_form[0][0] * first_form[1][1] - first_form[0][1] * first_form[0][1];
    if !(det > real::<T>(DEGENERACY_THRESHOLD)) {
        return Err(Error::DegenerateGeometry {
            patch: patch_id,
            u: xi[0].to_f64().unwrap_or(f64::NAN),
            v: xi[1].to_f64().unwrap_or(f64::NAN),
            det: det.to_f64().unwrap_or(f64::NAN),
        });
    }

    let d_det = |gamma: usize| {
        d_first[gamma][0][0] * first_form[1][1] + first_form[0][0] * d_first[gamma][1][1]
            - real::<T>(2.0) * first_form[0][1] * d_first[gamma][0][1]
    };
    let ddet = [d_det(0), d_det(1)];
    let mut dd_det = [T::zero(); 3];
    for (s, pair) in SYM.iter().enumerate() {
        let (delta, gamma) = (pair[0], pair[1]);
        dd_det[s] = dd_first[s][0][0] * first_form[1][1]
            + d_first[gamma][0][0] * d_first[delta][1][1]
            + d_first[delta][0][0] * d_first[gamma][1][1]
            + first_form[0][0] * dd_first[s][1][1]
            - real::<T>(2.0)
                * (d_first[delta][0][1] * d_first[gamma][0][1]
                    + first_form[0][1] * dd_first[s][0][1]);
    }

    let g = det.sqrt();
    let two_g = real::<T>(2.0) * g;
    let dg = [ddet[0] / two_g, ddet[1] / two_g];
    let mut ddg = [T::zero(); 3];
    for (s, pair) in SYM.iter().enumerate() {
        let (delta, gamma) = (pair[0], pair[1]);
        ddg[s] = dd_det[s] / two_g - dg[delta] * dg[gamma] / g;
    }

    let inv_det = det.recip();
    let first_form_inv = [
        [first_form[1][1] * inv_det, -first_form[0][1] * inv_det],
        [-first_form[0][1] * inv_det, first_form[0][0] * inv_det],
    ];

    let d_inv = |gamma: usize| {
        let inner = mat2_mul(&first_form_inv, &d_first[gamma]);
        mat2_scale(&mat2_mul(&inner, &first_form_inv), -T::one())
    };
    let d_first_inv = [d_inv(0), d_inv(1)];

    let mut dd_first_inv = [[[T::zero(); 2]; 2]; 3];
    for (s, pair) in SYM.iter().enumerate() {
        let (delta, gamma) = (pair[0], pair[1]);
        let a = mat2_mul(&d_first_inv[delta], &mat2_mul(&d_first[gamma], &first_form_inv));
        let b = mat2_mul(&first_form_inv, &mat2_mul(&dd_first[s], &first_form_inv));
        let c = mat2_mul(&first_form_inv, &mat2_mul(&d_first[gamma], &d_first_inv[delta]));
        dd_first_inv[s] = mat2_scale(&mat2_add(&mat2_add(&a, &b), &c), -T::one());
    }

    let scaled_inv = mat2_scale(&first_form_inv, g);
    let d_scaled = |gamma: usize| {
        mat2_add(
            &mat2_scale(&first_form_inv, dg[gamma]),
            &mat2_scale(&d_first_inv[gamma], g),
        )
    };
    let d_scaled_inv = [d_scaled(0), d_scaled(1)];
    let mut dd_scaled_inv = [[[T::zero(); 2]; 2]; 3];
    for (s, pair) in SYM.iter().enumerate() {
        let (delta, gamma) = (pair[0], pair[1]);
        let mut acc = mat2_scale(&first_form_inv, ddg[s]);
        acc = mat2_add(&acc, &mat2_scale(&d_first_inv[delta], dg[gamma]));
        acc = mat2_add(&acc, &mat2_scale(&d_first_inv[gamma], dg[delta]));
        acc = mat2_add(&acc, &mat2_scale(&dd_first_inv[s], g));
        dd_scaled_inv[s] = acc;
    }

    let raw_normal = cross3(&tangents[0], &tangents[1]);
    let normal = scale3(&raw_normal, norm3(&raw_normal).recip());

    Ok(SurfaceFrame {
        point: d[0][0],
        tangents,
        first_form,
        first_form_inv,
        det_first_form: det,
        area_element: g,
        normal,
        metric: MetricDerivs {
            scaled_inv,
            d_scaled_inv,
            dd_scaled_inv,
            inv_area: g.recip(),
            d_inv_area: [-dg[0] / det, -dg[1] / det],
        },
    })
}

/// Mixed parametric derivatives of a scalar shape function to total order 3:
/// `d[a][b]` is the derivative taken `a` times in `ξ₁` and `b` in `ξ₂`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParamJet<T> {
    pub d: [[T; 4]; 4],
}

/// A shape function's surface quantities at one evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct ShapeSurfaceData<T> {
    pub value: T,
    pub surface_gradient: V3<T>,
    pub laplace_beltrami: T,
    pub grad_laplace_beltrami: V3<T>,
}

/// Evaluates value, tangential gradient, Laplace–Beltrami and its surface
/// gradient of a shape function from its parametric jet and the frame.
pub fn shape_surface_data<T: Real>(
    frame: &SurfaceFrame<T>,
    jet: &ParamJet<T>,
) -> ShapeSurfaceData<T> {
    let d = &jet.d;
    let m = &frame.metric;
    let g = &m.scaled_inv;
    let two = real::<T>(2.0);

    let surface_gradient = frame.push_gradient([d[1][0], d[0][1]]);

    // S = Σ_{α,β} ∂_α G_{αβ} ∂_β φ + G : ∇̂²φ, so that Δ_Ω φ = S / g
    let c0 = m.d_scaled_inv[0][0][0] + m.d_scaled_inv[1][1][0];
    let c1 = m.d_scaled_inv[0][0][1] + m.d_scaled_inv[1][1][1];
    let s_val = c0 * d[1][0]
        + c1 * d[0][1]
        + g[0][0] * d[2][0]
        + two * g[0][1] * d[1][1]
        + g[1][1] * d[0][2];
    let laplace_beltrami = m.inv_area * s_val;

    // Λ_γ = ∂_γ (S / g) expanded by the product rule
    let mut lambda = [T::zero(); 2];
    for gamma in 0..2 {
        let dd0 = m.dd_scaled_inv[sym_index(gamma, 0)];
        let dd1 = m.dd_scaled_inv[sym_index(gamma, 1)];
        let t1 = (dd0[0][0] + dd1[1][0]) * d[1][0] + (dd0[0][1] + dd1[1][1]) * d[0][1];

        let (phi_g0, phi_g1) = if gamma == 0 {
            (d[2][0], d[1][1])
        } else {
            (d[1][1], d[0][2])
        };
        let t2 = c0 * phi_g0 + c1 * phi_g1;

        let dgm = &m.d_scaled_inv[gamma];
        let t3 = dgm[0][0] * d[2][0] + two * dgm[0][1] * d[1][1] + dgm[1][1] * d[0][2];

        let t4 = if gamma == 0 {
            g[0][0] * d[3][0] + two * g[0][1] * d[2][1] + g[1][1] * d[1][2]
        } else {
            g[0][0] * d[2][1] + two * g[0][1] * d[1][2] + g[1][1] * d[0][3]
        };

        lambda[gamma] = m.d_inv_area[gamma] * s_val + m.inv_area * (t1 + t2 + t3 + t4);
    }
    let grad_laplace_beltrami = frame.push_gradient(lambda);

    ShapeSurfaceData {
        value: d[0][0],
        surface_gradient,
        laplace_beltrami,
        grad_laplace_beltrami,
    }
}

/// One of the four sides of a patch's parameter square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    UMin,
    UMax,
    VMin,
    VMax,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::UMin, Side::UMax, Side::VMin, Side::VMax];

    /// Parameter point on the side for facet coordinate `t`.
    pub fn xi<T: Real>(&self, t: T) -> [T; 2] {
        match self {
            Side::UMin => [T::zero(), t],
            Side::UMax => [T::one(), t],
            Side::VMin => [t, T::zero()],
            Side::VMax => [t, T::one()],
        }
    }

    /// Index of the parameter direction the side runs along.
    pub fn tangent_direction(&self) -> usize {
        match self {
            Side::UMin | Side::UMax => 1,
            Side::VMin | Side::VMax => 0,
        }
    }

    /// Outward direction in parameter space.
    pub fn outward<T: Real>(&self) -> [T; 2] {
        match self {
            Side::UMin => [-T::one(), T::zero()],
            Side::UMax => [T::one(), T::zero()],
            Side::VMin => [T::zero(), -T::one()],
            Side::VMax => [T::zero(), T::one()],
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Side::UMin => "u_min",
            Side::UMax => "u_max",
            Side::VMin => "v_min",
            Side::VMax => "v_max",
        };
        f.write_str(s)
    }
}

/// Point, outward co-normal and 1-D arc-length factor on a patch side.
#[derive(Debug, Clone)]
pub struct FacetFrame<T> {
    pub point: V3<T>,
    /// Unit vector in the tangent plane, normal to the side, pointing out
    /// of the patch.
    pub conormal: V3<T>,
    /// `|∂Φ/∂t|` along the side, the 1-D quadrature weight factor.
    pub arc_factor: T,
}

/// Evaluates the facet frame together with the full surface frame at the
/// same point (the assembly needs both).
pub fn facet_frame_full<T: Real>(
    patch: &NurbsPatch<T>,
    side: Side,
    t: T,
) -> Result<(SurfaceFrame<T>, FacetFrame<T>)> {
    let frame = frame_at(patch, side.xi(t))?;
    let tangent = frame.tangents[side.tangent_direction()];
    let arc_factor = norm3(&tangent);
    if !(arc_factor > real::<T>(DEGENERACY_THRESHOLD)) {
        return Err(Error::Geometry(format!(
            "degenerate facet tangent on patch {} side {side}",
            patch.id
        )));
    }
    let unit_tangent = scale3(&tangent, arc_factor.recip());
    let out = side.outward::<T>();
    // mapped outward parametric direction, then orthogonalized against the
    // facet tangent within the tangent plane
    let mapped = add3(
        &scale3(&frame.tangents[0], out[0]),
        &scale3(&frame.tangents[1], out[1]),
    );
    let mut conormal = sub3(&mapped, &scale3(&unit_tangent, dot3(&mapped, &unit_tangent)));
    let len = norm3(&conormal);
    if !(len > real::<T>(DEGENERACY_THRESHOLD)) {
        return Err(Error::Geometry(format!(
            "vanishing co-normal on patch {} side {side}",
            patch.id
        )));
    }
    conormal = scale3(&conormal, len.recip());
    let facet = FacetFrame {
        point: frame.point,
        conormal,
        arc_factor,
    };
    Ok((frame, facet))
}

/// Point, outward co-normal and arc-length factor on a patch side.
pub fn facet_frame<T: Real>(patch: &NurbsPatch<T>, side: Side, t: T) -> Result<FacetFrame<T>> {
    facet_frame_full(patch, side, t).map(|(_, f)| f)
}
