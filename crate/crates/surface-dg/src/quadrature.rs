//! Gauss–Legendre quadrature on the unit interval.
//!
//! Volume integrals use a tensor product of 1-D rules per knot-span element,
//! facet integrals the 1-D rule on the facet's knot-span trace. Rules carry
//! `p + 2` points per direction for degree-`p` spaces: one point beyond
//! polynomial exactness to absorb the rational geometry factors.

use crate::error::{Error, Result};
use crate::{real, Real};

/// Nodes in `(0, 1)` with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped<'a>(&'a self, a: T, b: T) -> impl Iterator<Item = (T, T)> + 'a {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (a + len * x, w * len))
    }
}

/// `n`-point Gauss–Legendre rule on `(0, 1)`, `1 <= n <= 30`.
///
/// Nodes are found by Newton iteration on the Legendre polynomial; the
/// iteration is run to machine precision.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<QuadratureRule<T>> {
    if !(1..=30).contains(&n) {
        return Err(Error::Quadrature(format!(
            "point count {n} outside supported range 1..=30"
        )));
    }
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half = real::<T>(0.5);
    for i in 0..n.div_ceil(2) {
        // root of P_n in (-1, 1), largest first
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = real::<T>(guess);
        for _ in 0..100 {
            let (pn, pn_prev) = legendre_pair::<T>(n, x);
            let dp = real::<T>(n as f64) * (x * pn - pn_prev) / (x * x - T::one());
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= T::epsilon() {
                break;
            }
        }
        let (pn, pn_prev) = legendre_pair::<T>(n, x);
        let dp = real::<T>(n as f64) * (x * pn - pn_prev) / (x * x - T::one());
        let w = real::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[n - 1 - i] = half * (T::one() + x);
        nodes[i] = half * (T::one() - x);
        weights[n - 1 - i] = half * w;
        weights[i] = half * w;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// 1-D rule used per direction of the volume tensor rule for degree `p`.
pub fn element_rule<T: Real>(p: usize) -> Result<QuadratureRule<T>> {
    gauss_legendre(p + 2)
}

/// 1-D rule used on facet traces for degree `p`.
pub fn facet_rule<T: Real>(p: usize) -> Result<QuadratureRule<T>> {
    gauss_legendre(p + 2)
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p_cur = x;
    if n == 0 {
        return (p_prev, T::zero());
    }
    for k in 1..n {
        let kf = real::<T>(k as f64);
        let next = ((real::<T>(2.0) * kf + T::one()) * x * p_cur - kf * p_prev) / (kf + T::one());
        p_prev = p_cur;
        p_cur = next;
    }
    (p_cur, p_prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(rule: &QuadratureRule<f64>, d: u32) -> f64 {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * x.powi(d as i32))
            .sum()
    }

    #[test]
    fn one_point_is_midpoint() {
        let r = gauss_legendre::<f64>(1).unwrap();
        assert_eq!(r.nodes, vec![0.5]);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn two_point_rule_matches_legendre_roots() {
        let r = gauss_legendre::<f64>(2).unwrap();
        let off = 1.0 / (2.0 * 3.0_f64.sqrt());
        assert!((r.nodes[0] - (0.5 - off)).abs() < 1e-15);
        assert!((r.nodes[1] - (0.5 + off)).abs() < 1e-15);
        assert!((r.weights[0] - 0.5).abs() < 1e-15);
        assert!((r.weights[1] - 0.5).abs() < 1e-15);
        // degree-3 exactness: int_0^1 x^3 = 1/4
        assert!((monomial_integral(&r, 3) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exactness_to_degree_2n_minus_1() {
        for n in 1..=12usize {
            let r = gauss_legendre::<f64>(n).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for d in 0..=(2 * n - 1) as u32 {
                let exact = 1.0 / (d as f64 + 1.0);
                assert!(
                    (monomial_integral(&r, d) - exact).abs() < 1e-13,
                    "n = {n}, degree {d}"
                );
            }
        }
    }

    #[test]
    fn mapped_rule_scales_weights() {
        let r = gauss_legendre::<f64>(3).unwrap();
        let total: f64 = r.mapped(0.0, 0.5).map(|(_, w)| w).sum();
        assert!((total - 0.5).abs() < 1e-15);
        let area: f64 = r.mapped(0.25, 0.75).map(|(_, w)| w).sum();
        assert!((area - 0.5).abs() < 1e-15);
    }

    #[test]
    fn point_count_bounds() {
        assert!(gauss_legendre::<f64>(0).is_err());
        assert!(gauss_legendre::<f64>(31).is_err());
        assert!(element_rule::<f64>(3).unwrap().len() == 5);
        assert!(facet_rule::<f64>(3).unwrap().len() == 5);
    }

    #[test]
    fn f32_rule_is_consistent() {
        let r = gauss_legendre::<f32>(4).unwrap();
        assert!((r.weights.iter().sum::<f32>() - 1.0).abs() < 1e-6);
    }
}
