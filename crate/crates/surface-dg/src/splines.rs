//! Univariate and tensor-product B-spline/NURBS evaluation with derivatives
//! up to order 3, plus Boehm knot insertion.
//!
//! All knot vectors live on the unit interval and are open (clamped): the
//! first and last knots are repeated exactly `degree + 1` times. Rational
//! derivatives are recovered from derivatives of the weighted sums by the
//! generalized Leibniz rule.

use crate::error::{Error, Result};
use crate::{real, Real};

/// Open knot vector on `[0, 1]` together with its polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector<T> {
    knots: Vec<T>,
    degree: usize,
}

/// One nonempty knot span `[begin, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span<T> {
    /// Index into the knot vector such that `knots[index] = begin`.
    pub index: usize,
    pub begin: T,
    pub end: T,
}

/// Nonzero basis functions and their derivatives at one parameter value.
///
/// `values[j][r]` holds the j-th derivative of the r-th nonzero function;
/// the nonzero functions at `span` are those with indices `span - p .. span`.
#[derive(Debug, Clone)]
pub struct BasisEval<T> {
    pub span: usize,
    pub values: Vec<Vec<T>>,
}

impl<T: Real> KnotVector<T> {
    pub fn new(knots: Vec<T>, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::KnotVector("degree must be at least 1".into()));
        }
        let len = knots.len();
        if len < 2 * (degree + 1) {
            return Err(Error::KnotVector(format!(
                "need at least {} knots for degree {}, got {}",
                2 * (degree + 1),
                degree,
                len
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::KnotVector("knots must be non-decreasing".into()));
        }
        if knots[0] != T::zero() || knots[len - 1] != T::one() {
            return Err(Error::KnotVector("knot vector must span [0, 1]".into()));
        }
        if knots[degree] != knots[0] || knots[len - 1 - degree] != knots[len - 1] {
            return Err(Error::KnotVector(format!(
                "end knots must be repeated {} times",
                degree + 1
            )));
        }
        if knots[degree + 1] == knots[0] || knots[len - 2 - degree] == knots[len - 1] {
            return Err(Error::KnotVector(format!(
                "end knots must be repeated exactly {} times",
                degree + 1
            )));
        }
        // interior multiplicity at most p keeps the space at least C0
        let mut run = 1usize;
        for i in degree + 2..len - degree {
            if knots[i] == knots[i - 1] {
                run += 1;
                if run > degree {
                    return Err(Error::KnotVector(format!(
                        "interior knot {} has multiplicity above the degree",
                        knots[i].to_f64().unwrap_or(f64::NAN)
                    )));
                }
            } else {
                run = 1;
            }
        }
        Ok(Self { knots, degree })
    }

    /// Open knot vector of the given degree over supplied breakpoints with
    /// per-interior-breakpoint multiplicities.
    pub fn from_breakpoints(degree: usize, breaks: &[T], interior_mult: &[usize]) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::KnotVector("need at least two breakpoints".into()));
        }
        if interior_mult.len() != breaks.len().saturating_sub(2) {
            return Err(Error::KnotVector(
                "one multiplicity per interior breakpoint required".into(),
            ));
        }
        let mut knots = vec![breaks[0]; degree + 1];
        for (b, &m) in breaks[1..breaks.len() - 1].iter().zip(interior_mult) {
            knots.extend(std::iter::repeat(*b).take(m));
        }
        knots.extend(std::iter::repeat(breaks[breaks.len() - 1]).take(degree + 1));
        Self::new(knots, degree)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Number of basis functions `n = len(knots) - p - 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut out = Vec::new();
        for &k in &self.knots {
            if out.last() != Some(&k) {
                out.push(k);
            }
        }
        out
    }

    /// Nonempty spans in increasing order.
    pub fn spans(&self) -> Vec<Span<T>> {
        let mut out = Vec::new();
        for i in self.degree..self.num_basis() {
            if self.knots[i + 1] > self.knots[i] {
                out.push(Span {
                    index: i,
                    begin: self.knots[i],
                    end: self.knots[i + 1],
                });
            }
        }
        out
    }

    /// Locates the knot span containing `xi`: `knots[s] <= xi < knots[s+1]`,
    /// with `xi = 1` mapping to the last nonempty span.
    pub fn find_span(&self, xi: T) -> Result<usize> {
        if !(xi >= T::zero() && xi <= T::one()) {
            return Err(Error::Domain(xi.to_f64().unwrap_or(f64::NAN)));
        }
        let n = self.num_basis();
        if xi >= self.knots[n] {
            return Ok(n - 1);
        }
        let (mut lo, mut hi) = (self.degree, n);
        let mut mid = (lo + hi) / 2;
        while xi < self.knots[mid] || xi >= self.knots[mid + 1] {
            if xi < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
            mid = (lo + hi) / 2;
        }
        Ok(mid)
    }

    /// Nonzero basis functions and derivatives up to order `k` at `xi`.
    ///
    /// Rows beyond the degree are exact zeros. Divisions that would be 0/0
    /// are defined to be zero by explicit guards.
    pub fn eval_basis_derivs(&self, xi: T, k: usize) -> Result<BasisEval<T>> {
        let span = self.find_span(xi)?;
        Ok(self.eval_basis_derivs_in_span(xi, k, span))
    }

    /// Same as [`Self::eval_basis_derivs`] with a caller-chosen span whose
    /// closed interval must contain `xi`; evaluating at a span's right end
    /// yields the one-sided limit from the left.
    pub fn eval_basis_derivs_in_span(&self, xi: T, k: usize, span: usize) -> BasisEval<T> {
        let p = self.degree;
        debug_assert!(xi >= self.knots[span] && xi <= self.knots[span + 1]);
        let kk = k.min(p);

        // triangular table: ndu[r][j] basis values, ndu[j][r] knot differences
        let mut ndu = vec![vec![T::zero(); p + 1]; p + 1];
        let mut left = vec![T::zero(); p + 1];
        let mut right = vec![T::zero(); p + 1];
        ndu[0][0] = T::one();
        for j in 1..=p {
            left[j] = xi - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - xi;
            let mut saved = T::zero();
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                ndu[j][r] = denom;
                let temp = if denom != T::zero() {
                    ndu[r][j - 1] / denom
                } else {
                    T::zero()
                };
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![T::zero(); p + 1]; k + 1];
        ders[0].copy_from_slice(&(0..=p).map(|r| ndu[r][p]).collect::<Vec<_>>());

        let mut a = [vec![T::zero(); p + 1], vec![T::zero(); p + 1]];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0].iter_mut().for_each(|v| *v = T::zero());
            a[1].iter_mut().for_each(|v| *v = T::zero());
            a[0][0] = T::one();
            for ord in 1..=kk {
                let mut d = T::zero();
                let rk = r as isize - ord as isize;
                let pk = p - ord;
                if r >= ord {
                    let denom = ndu[pk + 1][rk as usize];
                    a[s2][0] = if denom != T::zero() {
                        a[s1][0] / denom
                    } else {
                        T::zero()
                    };
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r <= pk + 1 { ord - 1 } else { p - r };
                for j in j1..=j2 {
                    let denom = ndu[pk + 1][(rk + j as isize) as usize];
                    a[s2][j] = if denom != T::zero() {
                        (a[s1][j] - a[s1][j - 1]) / denom
                    } else {
                        T::zero()
                    };
                    d += a[s2][j] * ndu[(rk + j as isize) as usize][pk];
                }
                if r <= pk {
                    let denom = ndu[pk + 1][r];
                    a[s2][ord] = if denom != T::zero() {
                        -a[s1][ord - 1] / denom
                    } else {
                        T::zero()
                    };
                    d += a[s2][ord] * ndu[r][pk];
                }
                ders[ord][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }

        // scale row `ord` by p (p-1) ... (p-ord+1)
        let mut cumulative = T::one();
        for (ord, row) in ders.iter_mut().enumerate().take(kk + 1).skip(1) {
            cumulative *= real::<T>((p + 1 - ord) as f64);
            for v in row.iter_mut() {
                *v *= cumulative;
            }
        }

        BasisEval { span, values: ders }
    }
}

/// Inserts `xi` into the knot vector, updating the control rows by the Boehm
/// rule; the underlying curve is unchanged. Rows may be any dimension
/// (use homogeneous coordinates for rational curves).
pub fn insert_knot<T: Real>(
    kv: &KnotVector<T>,
    rows: &[Vec<T>],
    xi: T,
) -> Result<(KnotVector<T>, Vec<Vec<T>>)> {
    let p = kv.degree();
    let n = kv.num_basis();
    if rows.len() != n {
        return Err(Error::KnotVector(format!(
            "expected {} control rows, got {}",
            n,
            rows.len()
        )));
    }
    if !(xi > T::zero() && xi < T::one()) {
        return Err(Error::Domain(xi.to_f64().unwrap_or(f64::NAN)));
    }
    let mult = kv.knots.iter().filter(|&&u| u == xi).count();
    if mult >= p {
        return Err(Error::Refinement {
            value: xi.to_f64().unwrap_or(f64::NAN),
            degree: p,
        });
    }
    let span = kv.find_span(xi)?;

    let mut new_knots = kv.knots.clone();
    new_knots.insert(span + 1, xi);

    let dim = rows[0].len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if i + p <= span {
            out.push(rows[i].clone());
        } else if i > span {
            out.push(rows[i - 1].clone());
        } else {
            let denom = kv.knots[i + p] - kv.knots[i];
            let alpha = if denom > T::zero() {
                (xi - kv.knots[i]) / denom
            } else {
                T::zero()
            };
            let mut blended = vec![T::zero(); dim];
            for d in 0..dim {
                blended[d] = alpha * rows[i][d] + (T::one() - alpha) * rows[i - 1][d];
            }
            out.push(blended);
        }
    }
    Ok((KnotVector::new(new_knots, p)?, out))
}

/// Derivatives (orders `0..=k`) of a B-spline combination of control rows.
pub fn bspline_curve_derivs<T: Real>(
    kv: &KnotVector<T>,
    rows: &[Vec<T>],
    xi: T,
    k: usize,
) -> Result<Vec<Vec<T>>> {
    let p = kv.degree();
    let basis = kv.eval_basis_derivs(xi, k)?;
    let dim = rows[0].len();
    let mut out = vec![vec![T::zero(); dim]; k + 1];
    for (j, row) in basis.values.iter().enumerate() {
        for (r, &b) in row.iter().enumerate() {
            let ctrl = &rows[basis.span - p + r];
            for d in 0..dim {
                out[j][d] += b * ctrl[d];
            }
        }
    }
    Ok(out)
}

/// Point and derivatives (orders `0..=k`) of a rational curve.
///
/// Weighted-sum derivatives are divided out with the Leibniz rule
/// `A^(j) = Σ C(j,i) W^(i) C^(j-i)` solved for `C^(j)`.
pub fn nurbs_curve_derivs<T: Real>(
    kv: &KnotVector<T>,
    points: &[Vec<T>],
    weights: &[T],
    xi: T,
    k: usize,
) -> Result<Vec<Vec<T>>> {
    if weights.iter().any(|&w| w <= T::zero()) {
        return Err(Error::Geometry("weights must be strictly positive".into()));
    }
    let dim = points[0].len();
    let rows: Vec<Vec<T>> = points
        .iter()
        .zip(weights)
        .map(|(pt, &w)| {
            let mut h = Vec::with_capacity(dim + 1);
            h.extend(pt.iter().map(|&c| c * w));
            h.push(w);
            h
        })
        .collect();
    let homo = bspline_curve_derivs(kv, &rows, xi, k)?;
    let w0 = homo[0][dim];
    let mut out = vec![vec![T::zero(); dim]; k + 1];
    for j in 0..=k {
        let mut num = homo[j][..dim].to_vec();
        for i in 1..=j {
            let c = real::<T>(binomial(j, i) as f64) * homo[i][dim];
            for d in 0..dim {
                num[d] -= c * out[j - i][d];
            }
        }
        for d in 0..dim {
            out[j][d] = num[d] / w0;
        }
    }
    Ok(out)
}

/// All mixed parametric derivatives of a tensor NURBS surface up to total
/// order `k`: `d[a][b]` holds the derivative taken `a` times in the first
/// and `b` times in the second parameter, for `a + b <= k`.
#[derive(Debug, Clone)]
pub struct SurfaceJet<T> {
    pub order: usize,
    pub d: Vec<Vec<[T; 3]>>,
}

impl<T: Real> SurfaceJet<T> {
    pub fn point(&self) -> [T; 3] {
        self.d[0][0]
    }
}

/// Evaluates a rational tensor-product surface with all mixed derivatives
/// to total order `k`. Control points are indexed `iu * nv + iv`.
#[allow(clippy::too_many_arguments)]
pub fn nurbs_surface_derivs<T: Real>(
    kv_u: &KnotVector<T>,
    kv_v: &KnotVector<T>,
    points: &[[T; 3]],
    weights: &[T],
    nv: usize,
    xi: [T; 2],
    k: usize,
) -> Result<SurfaceJet<T>> {
    let (pu, pv) = (kv_u.degree(), kv_v.degree());
    let bu = kv_u.eval_basis_derivs(xi[0], k)?;
    let bv = kv_v.eval_basis_derivs(xi[1], k)?;

    // homogeneous sums A[a][b] = (sum w P, sum w)
    let mut hom = vec![vec![[T::zero(); 4]; k + 1]; k + 1];
    for a in 0..=k {
        for b in 0..=k - a {
            let mut acc = [T::zero(); 4];
            for (r, &fu) in bu.values[a].iter().enumerate() {
                if fu == T::zero() {
                    continue;
                }
                let iu = bu.span - pu + r;
                for (s, &fv) in bv.values[b].iter().enumerate() {
                    let iv = bv.span - pv + s;
                    let idx = iu * nv + iv;
                    let w = weights[idx];
                    let c = fu * fv * w;
                    let pt = points[idx];
                    acc[0] += c * pt[0];
                    acc[1] += c * pt[1];
                    acc[2] += c * pt[2];
                    acc[3] += fu * fv * w;
                }
            }
            hom[a][b] = acc;
        }
    }

    let w00 = hom[0][0][3];
    if !(w00 > T::zero()) {
        return Err(Error::Geometry("nonpositive rational denominator".into()));
    }

    let mut d = vec![vec![[T::zero(); 3]; k + 1]; k + 1];
    for total in 0..=k {
        for a in 0..=total {
            let b = total - a;
            let mut num = [hom[a][b][0], hom[a][b][1], hom[a][b][2]];
            for i in 0..=a {
                for j in 0..=b {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let c = real::<T>((binomial(a, i) * binomial(b, j)) as f64) * hom[i][j][3];
                    for t in 0..3 {
                        num[t] -= c * d[a - i][b - j][t];
                    }
                }
            }
            for t in 0..3 {
                d[a][b][t] = num[t] / w00;
            }
        }
    }
    Ok(SurfaceJet { order: k, d })
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1u64;
    for i in 0..k {
        out = out * (n - i) as u64 / (i + 1) as u64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn kv(knots: &[f64], p: usize) -> KnotVector<f64> {
        KnotVector::new(knots.to_vec(), p).unwrap()
    }

    fn quarter_circle() -> (KnotVector<f64>, Vec<Vec<f64>>, Vec<f64>) {
        let kv = kv(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2);
        let points = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let weights = vec![1.0, FRAC_1_SQRT_2, 1.0];
        (kv, points, weights)
    }

    #[test]
    fn find_span_examples() {
        assert_eq!(kv(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).find_span(0.3).unwrap(), 2);
        assert_eq!(kv(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).find_span(1.0).unwrap(), 2);
        assert_eq!(kv(&[0.0, 0.0, 0.5, 1.0, 1.0], 1).find_span(0.75).unwrap(), 2);
    }

    #[test]
    fn find_span_rejects_out_of_domain() {
        let k = kv(&[0.0, 0.0, 1.0, 1.0], 1);
        assert!(matches!(k.find_span(-0.1), Err(Error::Domain(_))));
        assert!(matches!(k.find_span(1.1), Err(Error::Domain(_))));
    }

    #[test]
    fn knot_vector_validation() {
        assert!(KnotVector::<f64>::new(vec![0.0, 0.0, 1.0, 1.0], 2).is_err()); // too short
        assert!(KnotVector::<f64>::new(vec![0.0, 0.5, 0.0, 1.0], 1).is_err()); // decreasing
        assert!(KnotVector::<f64>::new(vec![0.0, 0.0, 0.5, 1.0], 1).is_err()); // not clamped
        // interior multiplicity above degree
        assert!(KnotVector::<f64>::new(
            vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0],
            2
        )
        .is_err());
        // multiplicity == degree is allowed
        assert!(KnotVector::<f64>::new(
            vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0],
            2
        )
        .is_ok());
    }

    #[test]
    fn linear_hat_functions() {
        let k = kv(&[0.0, 0.0, 1.0, 1.0], 1);
        let b = k.eval_basis_derivs(0.5, 1).unwrap();
        assert_eq!(b.values[0], vec![0.5, 0.5]);
        assert_eq!(b.values[1], vec![-1.0, 1.0]);
    }

    #[test]
    fn clamped_endpoint_interpolation() {
        let k = kv(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2);
        let b = k.eval_basis_derivs(0.0, 0).unwrap();
        assert_eq!(b.values[0], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn bernstein_third_derivative() {
        // first cubic Bernstein function is (1 - x)^3, third derivative -6
        let k = kv(&[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0], 3);
        for &x in &[0.1, 0.33, 0.5, 0.77, 0.9] {
            let b = k.eval_basis_derivs(x, 3).unwrap();
            assert!((b.values[3][0] + 6.0).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn derivatives_above_degree_are_zero() {
        let k = kv(&[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0], 2);
        let b = k.eval_basis_derivs(0.3, 3).unwrap();
        assert!(b.values[3].iter().all(|&v| v == 0.0));
    }

    fn test_vectors() -> Vec<KnotVector<f64>> {
        vec![
            kv(&[0.0, 0.0, 1.0, 1.0], 1),
            kv(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2),
            kv(&[0.0, 0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0, 1.0], 2),
            kv(&[0.0, 0.0, 0.0, 0.0, 0.2, 0.4, 0.4, 0.8, 1.0, 1.0, 1.0, 1.0], 3),
            kv(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.6, 1.0, 1.0, 1.0, 1.0, 1.0], 4),
        ]
    }

    #[test]
    fn partition_of_unity_and_derivative_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in test_vectors() {
            for _ in 0..1000 {
                let x: f64 = rng.gen();
                let b = k.eval_basis_derivs(x, 3).unwrap();
                let s0: f64 = b.values[0].iter().sum();
                assert!((s0 - 1.0).abs() < 1e-12);
                assert!(b.values[0].iter().all(|&v| (-1e-14..=1.0 + 1e-14).contains(&v)));
                for row in &b.values[1..] {
                    let s: f64 = row.iter().sum();
                    assert!(s.abs() < 1e-12 * row.iter().fold(1.0f64, |m, v| m.max(v.abs())));
                }
            }
        }
    }

    /// Central stencils that are exact for polynomials through degree 6,
    /// so the only error is roundoff.
    fn fd1(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn fd2_wide(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
            / (12.0 * h * h)
    }

    fn fd3_wide(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let c = [(-13.0 / 8.0, 1.0), (1.0, 2.0), (-1.0 / 8.0, 3.0)];
        c.iter()
            .map(|&(w, k)| w * (f(x + k * h) - f(x - k * h)))
            .sum::<f64>()
            / (h * h * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in test_vectors() {
            let p = k.degree();
            let n = k.num_basis();
            for _ in 0..60 {
                // stay away from knot lines so stencils stay on one polynomial piece
                let x: f64 = 0.06 + 0.88 * rng.gen::<f64>();
                let breaks = k.breakpoints();
                if breaks.iter().any(|&b| (x - b).abs() < 0.045) {
                    continue;
                }
                let b = k.eval_basis_derivs(x, 3).unwrap();
                for r in 0..=p {
                    let idx = b.span - p + r;
                    let eval = |t: f64| -> f64 {
                        let bb = k.eval_basis_derivs(t, 0).unwrap();
                        let lo = bb.span - p;
                        if idx >= lo && idx <= bb.span {
                            bb.values[0][idx - lo]
                        } else {
                            0.0
                        }
                    };
                    let _ = n;
                    let checks = [
                        (b.values[1][r], fd1(&eval, x, 1e-5)),
                        (b.values[2][r], fd2_wide(&eval, x, 1e-3)),
                        (b.values[3][r], fd3_wide(&eval, x, 5e-3)),
                    ];
                    for (exact, approx) in checks {
                        let rel = (exact - approx).abs() / exact.abs().max(1.0);
                        assert!(rel < 1e-6, "p={p} x={x}: exact {exact} vs fd {approx}");
                    }
                }
            }
        }
    }

    #[test]
    fn smoothness_across_simple_interior_knots() {
        // degree p with simple knots is C^{p-1}: one-sided values of
        // derivative orders 0..p-1 agree across the knot
        for k in test_vectors() {
            let p = k.degree();
            for &b in &k.breakpoints() {
                if b <= 0.0 || b >= 1.0 {
                    continue;
                }
                let mult = k.knots().iter().filter(|&&u| u == b).count();
                if mult != 1 {
                    continue;
                }
                // one-sided limits evaluated exactly at the knot
                let left_span = k.spans().iter().find(|s| s.end == b).unwrap().index;
                let left = k.eval_basis_derivs_in_span(b, p - 1, left_span);
                let right = k.eval_basis_derivs(b, p - 1).unwrap();
                for ord in 0..p {
                    // compare full basis rows mapped to global indices
                    let mut lv = vec![0.0; k.num_basis()];
                    let mut rv = vec![0.0; k.num_basis()];
                    for r in 0..=p {
                        lv[left.span - p + r] = left.values[ord][r];
                        rv[right.span - p + r] = right.values[ord][r];
                    }
                    for i in 0..k.num_basis() {
                        assert!(
                            (lv[i] - rv[i]).abs() < 1e-9,
                            "order {ord} basis {i} at knot {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn knot_insertion_linear_midpoint() {
        let k = kv(&[0.0, 0.0, 1.0, 1.0], 1);
        let rows = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let (k2, rows2) = insert_knot(&k, &rows, 0.5).unwrap();
        assert_eq!(k2.knots(), &[0.0, 0.0, 0.5, 1.0, 1.0]);
        assert_eq!(rows2, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn knot_insertion_midpoint_of_quadratic() {
        let k = kv(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2);
        let rows = vec![vec![0.0], vec![1.0], vec![2.0]];
        let (k2, _) = insert_knot(&k, &rows, 0.5).unwrap();
        assert_eq!(k2.knots(), &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn knot_insertion_preserves_geometry() {
        let (k, points, weights) = quarter_circle();
        // homogeneous rows (w x, w y, w)
        let rows: Vec<Vec<f64>> = points
            .iter()
            .zip(&weights)
            .map(|(p, &w)| vec![p[0] * w, p[1] * w, w])
            .collect();
        let (k2, rows2) = insert_knot(&k, &rows, 0.37).unwrap();
        let (k3, rows3) = insert_knot(&k2, &rows2, 0.8).unwrap();
        for i in 0..50 {
            let x = i as f64 / 49.0;
            let before = bspline_curve_derivs(&k, &rows, x, 0).unwrap();
            let after = bspline_curve_derivs(&k3, &rows3, x, 0).unwrap();
            for d in 0..3 {
                let a = before[0][d] / before[0][2];
                let b = after[0][d] / after[0][2];
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn knot_insertion_multiplicity_overflow() {
        let k = kv(&[0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0], 2);
        let rows = vec![vec![0.0]; k.num_basis()];
        assert!(matches!(
            insert_knot(&k, &rows, 0.5),
            Err(Error::Refinement { .. })
        ));
        assert!(insert_knot(&k, &rows, 0.25).is_ok());
    }

    #[test]
    fn quarter_circle_midpoint_and_norm() {
        let (k, points, weights) = quarter_circle();
        let c = nurbs_curve_derivs(&k, &points, &weights, 0.5, 0).unwrap();
        assert!((c[0][0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((c[0][1] - FRAC_1_SQRT_2).abs() < 1e-15);
        for i in 0..20 {
            let x = i as f64 / 19.0;
            let c = nurbs_curve_derivs(&k, &points, &weights, x, 0).unwrap();
            let r = (c[0][0] * c[0][0] + c[0][1] * c[0][1]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rational_derivatives_match_finite_differences() {
        let (k, points, weights) = quarter_circle();
        for i in 1..10 {
            let x = 0.08 + 0.84 * i as f64 / 10.0;
            let c = nurbs_curve_derivs(&k, &points, &weights, x, 3).unwrap();
            for d in 0..2 {
                let eval = |t: f64| nurbs_curve_derivs(&k, &points, &weights, t, 0).unwrap()[0][d];
                let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
                assert!(rel(c[1][d], fd1(&eval, x, 1e-5)) < 1e-6);
                assert!(rel(c[2][d], fd2_wide(&eval, x, 1e-3)) < 1e-5);
                assert!(rel(c[3][d], fd3_wide(&eval, x, 5e-3)) < 1e-4);
            }
        }
    }

    #[test]
    fn unit_weights_reduce_to_bspline() {
        let k = kv(&[0.0, 0.0, 0.0, 0.4, 1.0, 1.0, 1.0], 2);
        let points = vec![
            vec![0.0, 0.0],
            vec![0.4, 1.0],
            vec![1.3, 0.6],
            vec![2.0, -0.2],
        ];
        let weights = vec![1.0; 4];
        for i in 0..9 {
            let x = i as f64 / 8.0;
            let rational = nurbs_curve_derivs(&k, &points, &weights, x, 2).unwrap();
            let plain = bspline_curve_derivs(&k, &points, x, 2).unwrap();
            for j in 0..=2 {
                for d in 0..2 {
                    assert!((rational[j][d] - plain[j][d]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn nonpositive_weights_rejected() {
        let (k, points, mut weights) = quarter_circle();
        weights[1] = 0.0;
        assert!(nurbs_curve_derivs(&k, &points, &weights, 0.5, 0).is_err());
        weights[1] = -1.0;
        assert!(nurbs_curve_derivs(&k, &points, &weights, 0.5, 0).is_err());
    }

    #[test]
    fn surface_jet_of_bilinear_patch() {
        let ku = kv(&[0.0, 0.0, 1.0, 1.0], 1);
        let kvv = kv(&[0.0, 0.0, 1.0, 1.0], 1);
        // Phi(u, v) = (2u, 3v, uv), iu-major with nv = 2
        let points = vec![
            [0.0, 0.0, 0.0],
            [0.0, 3.0, 0.0],
            [2.0, 0.0, 0.0],
            [2.0, 3.0, 1.0],
        ];
        let weights = vec![1.0; 4];
        let jet = nurbs_surface_derivs(&ku, &kvv, &points, &weights, 2, [0.3, 0.7], 3).unwrap();
        assert!((jet.d[0][0][0] - 0.6).abs() < 1e-15);
        assert!((jet.d[0][0][1] - 2.1).abs() < 1e-15);
        assert!((jet.d[0][0][2] - 0.21).abs() < 1e-15);
        assert!((jet.d[1][0][2] - 0.7).abs() < 1e-15); // d(uv)/du = v
        assert!((jet.d[0][1][2] - 0.3).abs() < 1e-15);
        assert!((jet.d[1][1][2] - 1.0).abs() < 1e-15); // mixed derivative
        assert!(jet.d[2][0].iter().all(|&v| v.abs() < 1e-15));
    }
}
