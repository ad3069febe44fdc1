//! Manufactured solutions with closed-form surface derivatives.
//!
//! All fields are functions of the physical point; the surface coordinates
//! are recovered from the embedding (`atan2`), so the solutions are
//! independent of how the patches are parametrized.

use crate::norms::ExactSolution;
use crate::{real, Real};

/// `u(φ, z) = ϱ (1 − cos φ)(1 − sin φ) sin(σπz/L)` on the unit-radius
/// quarter cylinder in the first quadrant, `φ = atan2(x, y)`.
///
/// On the unit cylinder the surface metric in `(φ, z)` is the identity, so
/// the Laplace–Beltrami operator is `∂²_φ + ∂²_z` and all fields reduce to
/// derivatives of the two univariate factors.
#[derive(Debug, Clone)]
pub struct CylinderSolution<T> {
    pub amplitude: T,
    pub sigma: T,
    pub length: T,
}

impl<T: Real> Default for CylinderSolution<T> {
    fn default() -> Self {
        Self {
            // 1 / (3/2 - sqrt 2): normalizes max |u| to 1
            amplitude: T::one() / (real::<T>(1.5) - real::<T>(2.0).sqrt()),
            sigma: real(3.0),
            length: real(4.0),
        }
    }
}

struct CylinderPoint<T> {
    phi: T,
    z: T,
    e_phi: [T; 3],
}

impl<T: Real> CylinderSolution<T> {
    fn wavenumber(&self) -> T {
        self.sigma * T::PI() / self.length
    }

    fn angular(&self, phi: T) -> [T; 5] {
        // (1 - cos)(1 - sin) and its derivatives
        let (s, c) = (phi.sin(), phi.cos());
        let (s2, c2) = ((phi + phi).sin(), (phi + phi).cos());
        let half = real::<T>(0.5);
        let g = T::one() - s - c + half * s2;
        let g1 = s - c + c2;
        let g2 = c + s - real::<T>(2.0) * s2;
        let g3 = -s + c - real::<T>(4.0) * c2;
        let g4 = -c - s + real::<T>(8.0) * s2;
        [g, g1, g2, g3, g4]
    }

    fn local(&self, x: &[T; 3]) -> CylinderPoint<T> {
        let phi = x[0].atan2(x[1]);
        CylinderPoint {
            phi,
            z: x[2],
            e_phi: [phi.cos(), -phi.sin(), T::zero()],
        }
    }
}

impl<T: Real> ExactSolution<T> for CylinderSolution<T> {
    fn value(&self, x: &[T; 3]) -> T {
        let p = self.local(x);
        let g = self.angular(p.phi);
        self.amplitude * g[0] * (self.wavenumber() * p.z).sin()
    }

    fn surface_gradient(&self, x: &[T; 3]) -> [T; 3] {
        let p = self.local(x);
        let g = self.angular(p.phi);
        let k = self.wavenumber();
        let (sz, cz) = ((k * p.z).sin(), (k * p.z).cos());
        let u_phi = self.amplitude * g[1] * sz;
        let u_z = self.amplitude * g[0] * k * cz;
        [
            u_phi * p.e_phi[0],
            u_phi * p.e_phi[1],
            u_z,
        ]
    }

    fn laplacian(&self, x: &[T; 3]) -> T {
        let p = self.local(x);
        let g = self.angular(p.phi);
        let k = self.wavenumber();
        self.amplitude * (k * p.z).sin() * (g[2] - k * k * g[0])
    }

    fn grad_laplacian(&self, x: &[T; 3]) -> [T; 3] {
        let p = self.local(x);
        let g = self.angular(p.phi);
        let k = self.wavenumber();
        let (sz, cz) = ((k * p.z).sin(), (k * p.z).cos());
        let lap_phi = self.amplitude * sz * (g[3] - k * k * g[1]);
        let lap_z = self.amplitude * k * cz * (g[2] - k * k * g[0]);
        [
            lap_phi * p.e_phi[0],
            lap_phi * p.e_phi[1],
            lap_z,
        ]
    }

    fn source(&self, x: &[T; 3]) -> T {
        let p = self.local(x);
        let g = self.angular(p.phi);
        let k = self.wavenumber();
        let k2 = k * k;
        let bilap = g[4] - real::<T>(2.0) * k2 * g[2] + k2 * k2 * g[0];
        self.amplitude * (k * p.z).sin() * bilap + self.value(x)
    }
}

/// `u(φ, θ) = sin(3φ) cos(3θ + φ)` on the torus with major radius 2 and
/// minor radius 1; `φ` is the angle around the axis, `θ` the angle around
/// the tube.
///
/// With `w(θ) = 2 + cos θ` the Laplace–Beltrami operator in `(φ, θ)` is
/// `Δv = v_φφ/w² + v_θθ − (sin θ / w) v_θ`; the bi-Laplacian below applies
/// it twice via the product rule, using that
/// `u = ½ sin(4φ + 3θ) + ½ sin(2φ − 3θ)` has elementary mixed derivatives.
#[derive(Debug, Clone, Default)]
pub struct TorusSolution<T> {
    _marker: std::marker::PhantomData<T>,
}

const TORUS_MAJOR: f64 = 2.0;

struct TorusPoint<T> {
    phi: T,
    theta: T,
    e_phi: [T; 3],
    e_theta: [T; 3],
    w: T,
}

#[derive(Debug, Clone, Copy)]
struct TorusFields<T> {
    u: T,
    u_phi: T,
    u_theta: T,
    lap: T,
    lap_phi: T,
    lap_theta: T,
    source: T,
}

impl<T: Real> TorusSolution<T> {
    fn local(&self, x: &[T; 3]) -> TorusPoint<T> {
        let phi = x[1].atan2(x[0]);
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let theta = x[2].atan2(rho - real::<T>(TORUS_MAJOR));
        let (sp, cp) = (phi.sin(), phi.cos());
        let (st, ct) = (theta.sin(), theta.cos());
        TorusPoint {
            phi,
            theta,
            e_phi: [-sp, cp, T::zero()],
            e_theta: [-st * cp, -st * sp, ct],
            w: real::<T>(TORUS_MAJOR) + ct,
        }
    }

    /// `∂_φ^a ∂_θ^b u` from the two-sine form.
    fn u_deriv(a: usize, b: usize, phi: T, theta: T) -> T {
        let n = (a + b) % 4;
        let cycle = |arg: T| match n {
            0 => arg.sin(),
            1 => arg.cos(),
            2 => -arg.sin(),
            _ => -arg.cos(),
        };
        let four = real::<T>(4.0);
        let three = real::<T>(3.0);
        let two = real::<T>(2.0);
        let half = real::<T>(0.5);
        let c1 = four.powi(a as i32) * three.powi(b as i32);
        let c2 = two.powi(a as i32) * (-three).powi(b as i32);
        half * (c1 * cycle(four * phi + three * theta) + c2 * cycle(two * phi - three * theta))
    }

    fn fields(&self, phi: T, theta: T) -> TorusFields<T> {
        let (st, ct) = (theta.sin(), theta.cos());
        let w = real::<T>(TORUS_MAJOR) + ct;
        let iw2 = (w * w).recip();
        let iw3 = iw2 / w;
        let iw4 = iw3 / w;
        let two = real::<T>(2.0);
        let four = real::<T>(4.0);
        let six = real::<T>(6.0);
        // metric coefficients of Δ and their θ-derivatives
        let g = st / w;
        let g1 = (two * ct + T::one()) * iw2;
        let g2 = two * st * (ct - T::one()) * iw3;

        let ud = |a: usize, b: usize| Self::u_deriv(a, b, phi, theta);

        let u = ud(0, 0);
        let u_phi = ud(1, 0);
        let u_theta = ud(0, 1);
        let lap = ud(2, 0) * iw2 + ud(0, 2) - g * ud(0, 1);
        let lap_phi = ud(3, 0) * iw2 + ud(1, 2) - g * ud(1, 1);
        let lap_phiphi = ud(4, 0) * iw2 + ud(2, 2) - g * ud(2, 1);
        let lap_theta =
            ud(2, 1) * iw2 + two * st * iw3 * ud(2, 0) + ud(0, 3) - g * ud(0, 2) - g1 * ud(0, 1);
        let lap_thetatheta = ud(2, 2) * iw2
            + four * st * iw3 * ud(2, 1)
            + (two * ct * iw3 + six * st * st * iw4) * ud(2, 0)
            + ud(0, 4)
            - g * ud(0, 3)
            - two * g1 * ud(0, 2)
            - g2 * ud(0, 1);
        let bilap = lap_phiphi * iw2 + lap_thetatheta - g * lap_theta;
        TorusFields {
            u,
            u_phi,
            u_theta,
            lap,
            lap_phi,
            lap_theta,
            source: bilap + u,
        }
    }
}

impl<T: Real> ExactSolution<T> for TorusSolution<T> {
    fn value(&self, x: &[T; 3]) -> T {
        let p = self.local(x);
        self.fields(p.phi, p.theta).u
    }

    fn surface_gradient(&self, x: &[T; 3]) -> [T; 3] {
        let p = self.local(x);
        let f = self.fields(p.phi, p.theta);
        let a = f.u_phi / p.w;
        let b = f.u_theta;
        [
            a * p.e_phi[0] + b * p.e_theta[0],
            a * p.e_phi[1] + b * p.e_theta[1],
            a * p.e_phi[2] + b * p.e_theta[2],
        ]
    }

    fn laplacian(&self, x: &[T; 3]) -> T {
        let p = self.local(x);
        self.fields(p.phi, p.theta).lap
    }

    fn grad_laplacian(&self, x: &[T; 3]) -> [T; 3] {
        let p = self.local(x);
        let f = self.fields(p.phi, p.theta);
        let a = f.lap_phi / p.w;
        let b = f.lap_theta;
        [
            a * p.e_phi[0] + b * p.e_theta[0],
            a * p.e_phi[1] + b * p.e_theta[1],
            a * p.e_phi[2] + b * p.e_theta[2],
        ]
    }

    fn source(&self, x: &[T; 3]) -> T {
        let p = self.local(x);
        self.fields(p.phi, p.theta).source
    }
}

/// Bivariate polynomial solution on flat geometry in the `z = 0` plane:
/// all fields reduce to planar derivatives.
#[derive(Debug, Clone)]
pub struct PolynomialSolution<T> {
    /// coefficient of `x^a y^b` at `coeffs[a][b]`
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> PolynomialSolution<T> {
    pub fn new(coeffs: Vec<Vec<T>>) -> Self {
        Self { coeffs }
    }

    /// Dense polynomial with every monomial of total degree `<= p`,
    /// coefficients `1 / (1 + a + 2b)`.
    pub fn total_degree(p: usize) -> Self {
        let mut coeffs = vec![vec![T::zero(); p + 1]; p + 1];
        for (a, row) in coeffs.iter_mut().enumerate() {
            for (b, slot) in row.iter_mut().enumerate() {
                if a + b <= p {
                    *slot = T::one() / real::<T>((1 + a + 2 * b) as f64);
                }
            }
        }
        Self { coeffs }
    }

    /// `∂_x^dx ∂_y^dy u` at `(x, y)`.
    fn deriv(&self, dx: usize, dy: usize, x: T, y: T) -> T {
        let mut acc = T::zero();
        for (a, row) in self.coeffs.iter().enumerate() {
            if a < dx {
                continue;
            }
            for (b, &c) in row.iter().enumerate() {
                if b < dy || c == T::zero() {
                    continue;
                }
                let mut factor = c;
                for k in 0..dx {
                    factor *= real::<T>((a - k) as f64);
                }
                for k in 0..dy {
                    factor *= real::<T>((b - k) as f64);
                }
                acc += factor * x.powi((a - dx) as i32) * y.powi((b - dy) as i32);
            }
        }
        acc
    }
}

impl<T: Real> ExactSolution<T> for PolynomialSolution<T> {
    fn value(&self, x: &[T; 3]) -> T {
        self.deriv(0, 0, x[0], x[1])
    }

    fn surface_gradient(&self, x: &[T; 3]) -> [T; 3] {
        [
            self.deriv(1, 0, x[0], x[1]),
            self.deriv(0, 1, x[0], x[1]),
            T::zero(),
        ]
    }

    fn laplacian(&self, x: &[T; 3]) -> T {
        self.deriv(2, 0, x[0], x[1]) + self.deriv(0, 2, x[0], x[1])
    }

    fn grad_laplacian(&self, x: &[T; 3]) -> [T; 3] {
        [
            self.deriv(3, 0, x[0], x[1]) + self.deriv(1, 2, x[0], x[1]),
            self.deriv(2, 1, x[0], x[1]) + self.deriv(0, 3, x[0], x[1]),
            T::zero(),
        ]
    }

    fn source(&self, x: &[T; 3]) -> T {
        let bilap = self.deriv(4, 0, x[0], x[1])
            + real::<T>(2.0) * self.deriv(2, 2, x[0], x[1])
            + self.deriv(0, 4, x[0], x[1]);
        bilap + self.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values computed symbolically from the closed forms
    const TORUS_SAMPLES: [[f64; 9]; 4] = [
        [0.3, 0.7, -0.57762034037365131484, -1.9042223381500268031, -1.5873254573648518992,
         5.9944956878665725560, 21.711400520733131214, 16.954255135596610255, -63.678082865753749636],
        [1.1, 2.0, -0.10798428907146736979, -1.9129362267688743545, 0.34497518173078205369,
         2.9259695850187045202, 21.728283094986509660, 2.2605300160135357201, -53.964941191796511438],
        [4.0, 5.5, 0.042691655461170167872, 0.33345177780932359603, 1.6046156143978458316,
         -0.71235391957950381577, -6.7181903057322886075, -16.703962611981482340, 11.906957311196114431],
        [2.2, 3.9, 0.073196586825117510895, 0.36695038282402470782, -0.90846162698946933386,
         -5.0141186399553874279, -7.6363228508905024521, 14.861288061250894500, 127.11782375183984466],
    ];

    fn torus_point(phi: f64, theta: f64) -> [f64; 3] {
        let w = TORUS_MAJOR + theta.cos();
        [w * phi.cos(), w * phi.sin(), theta.sin()]
    }

    #[test]
    fn torus_fields_match_symbolic_reference() {
        let sol = TorusSolution::<f64>::default();
        for row in TORUS_SAMPLES {
            let [phi, theta, u, u_phi, u_theta, lap, lap_phi, lap_theta, f] = row;
            let fields = sol.fields(phi, theta);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
            assert!(rel(fields.u, u) < 1e-13);
            assert!(rel(fields.u_phi, u_phi) < 1e-13);
            assert!(rel(fields.u_theta, u_theta) < 1e-13);
            assert!(rel(fields.lap, lap) < 1e-13);
            assert!(rel(fields.lap_phi, lap_phi) < 1e-13);
            assert!(rel(fields.lap_theta, lap_theta) < 1e-13);
            assert!(rel(fields.source, f) < 1e-13);
        }
    }

    #[test]
    fn torus_fields_from_embedded_point() {
        let sol = TorusSolution::<f64>::default();
        for row in TORUS_SAMPLES {
            let x = torus_point(row[0], row[1]);
            assert!((sol.value(&x) - row[2]).abs() < 1e-12);
            assert!((sol.laplacian(&x) - row[5]).abs() < 1e-11);
            assert!((sol.source(&x) - row[8]).abs() < 1e-10);
        }
    }

    #[test]
    fn cylinder_fields_match_symbolic_reference() {
        let sol = CylinderSolution::<f64>::default();
        // (phi, z, u, lap, f)
        let samples: [(f64, f64, f64, f64, f64); 2] = [
            (0.4, 0.9, 0.47905189232829353681, -3.8942925623398453764, 72.967801175264811413),
            (1.2, 2.7, 0.039633366059244408836, -0.27173179674246830500, 5.5935376490358232973),
        ];
        for (phi, z, u, lap, f) in samples {
            let x = [phi.sin(), phi.cos(), z];
            assert!((sol.value(&x) - u).abs() < 1e-13);
            assert!((sol.laplacian(&x) - lap).abs() < 1e-12);
            assert!((sol.source(&x) - f).abs() < 1e-11);
        }
        // u(pi/4, 1) = rho (1 - sqrt2/2)^2 sqrt2/2 = sqrt2/2
        let x = [
            std::f64::consts::FRAC_PI_4.sin(),
            std::f64::consts::FRAC_PI_4.cos(),
            1.0,
        ];
        assert!((sol.value(&x) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        // u vanishes along phi = 0
        let x0 = [0.0, 1.0, 2.3];
        assert!(sol.value(&x0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_fields() {
        // u = x^2 y + 3: grad = (2xy, x^2); lap = 2y; bilap = 0
        let mut coeffs = vec![vec![0.0; 3]; 3];
        coeffs[0][0] = 3.0;
        coeffs[2][1] = 1.0;
        let sol = PolynomialSolution::new(coeffs);
        let x = [1.5, -2.0, 0.0];
        assert_eq!(sol.value(&x), 1.5 * 1.5 * -2.0 + 3.0);
        assert_eq!(sol.surface_gradient(&x)[0], 2.0 * 1.5 * -2.0);
        assert_eq!(sol.surface_gradient(&x)[1], 1.5 * 1.5);
        assert_eq!(sol.laplacian(&x), -4.0);
        assert_eq!(sol.source(&x), sol.value(&x));
    }
}
