//! Complex space forms of curvature 4R: the groups G_R, their Lie algebras,
//! and the Kahler geometry of the affine chart Z0 = 1.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::linalg::Mat3;
use crate::numeric::{lit, Real};

/// Curvature parameter R; holomorphic sectional curvature is 4R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormParams<T> {
    pub curvature: T,
}

impl<T: Real> SpaceFormParams<T> {
    pub fn new(curvature: T) -> Self {
        Self { curvature }
    }
}

/// H_R = diag(1, R, R).
pub fn hermitian_form<T: Real>(params: SpaceFormParams<T>) -> Mat3<T> {
    let r = Complex::new(params.curvature, T::zero());
    Mat3::diag([Complex::new(T::one(), T::zero()), r, r])
}

/// Coordinates of an element of the Lie algebra of G_R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement<T> {
    pub r1: T,
    pub r2: T,
    pub x: Complex<T>,
    pub y: Complex<T>,
    pub z: Complex<T>,
}

impl<T: Real> AlgebraElement<T> {
    pub fn diagonal(r1: T, r2: T) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self { r1, r2, x: z, y: z, z }
    }

    pub fn to_matrix(&self, params: SpaceFormParams<T>) -> Mat3<T> {
        let i = Complex::new(T::zero(), T::one());
        let rr = params.curvature;
        Mat3::from_rows([
            [i * self.r1, -self.x.conj() * rr, -self.y.conj() * rr],
            [self.x, i * self.r2, -self.z.conj()],
            [self.y, self.z, -i * (self.r1 + self.r2)],
        ])
    }

    /// Reads the coordinates off `m`, or `None` if `m` deviates from the pattern by more than `tol`.
    pub fn from_matrix(m: &Mat3<T>, params: SpaceFormParams<T>, tol: T) -> Option<Self> {
        let a = Self { r1: m[(0, 0)].im, r2: m[(1, 1)].im, x: m[(1, 0)], y: m[(2, 0)], z: m[(2, 1)] };
        let d = (a.to_matrix(params) - *m).max_abs();
        (d <= tol).then_some(a)
    }
}

/// True iff `m` lies in the Lie algebra of G_R within `tol` entrywise.
pub fn is_algebra_element<T: Real>(m: &Mat3<T>, params: SpaceFormParams<T>, tol: T) -> bool {
    AlgebraElement::from_matrix(m, params, tol).is_some()
}

/// True iff `m` lies in G_R within `tol`.
///
/// For R = 0 the form is degenerate and the block criterion is used:
/// unimodular phase in the corner, vanishing first row off the corner and a
/// unitary lower-right block.
pub fn is_group_element<T: Real>(m: &Mat3<T>, params: SpaceFormParams<T>, tol: T) -> bool {
    if (m.det() - Complex::new(T::one(), T::zero())).norm() > tol {
        return false;
    }
    if params.curvature != T::zero() {
        let h = hermitian_form(params);
        return (m.conj_transpose() * h * *m - h).max_abs() <= tol;
    }
    if m[(0, 1)].norm() > tol || m[(0, 2)].norm() > tol || (m[(0, 0)].norm() - T::one()).abs() > tol {
        return false;
    }
    for i in 1..3 {
        for j in 1..3 {
            let mut s = Complex::new(T::zero(), T::zero());
            for k in 1..3 {
                s = s + m[(k, i)].conj() * m[(k, j)];
            }
            let want = if i == j { T::one() } else { T::zero() };
            if (s - Complex::new(want, T::zero())).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// An element of G_R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement<T> {
    pub m: Mat3<T>,
    pub params: SpaceFormParams<T>,
}

impl<T: Real> GroupElement<T> {
    pub fn new(m: Mat3<T>, params: SpaceFormParams<T>, tol: T) -> Result<Self> {
        if is_group_element(&m, params, tol) {
            Ok(Self { m, params })
        } else {
            Err(Error::InvalidArgument("matrix is not in G_R".into()))
        }
    }

    pub fn act(&self, p: &AmbientPoint<T>) -> AmbientPoint<T> {
        AmbientPoint { z: self.m.mul_vec(p.z) }
    }
}

/// exp(tA) in G_R.
pub fn matrix_exp<T: Real>(a: &AlgebraElement<T>, t: T, params: SpaceFormParams<T>) -> GroupElement<T> {
    GroupElement { m: a.to_matrix(params).scale_re(t).exp(), params }
}

/// Homogeneous coordinates (Z0, Z1, Z2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint<T> {
    pub z: [Complex<T>; 3],
}

impl<T: Real> AmbientPoint<T> {
    pub fn new(z0: Complex<T>, z1: Complex<T>, z2: Complex<T>) -> Self {
        Self { z: [z0, z1, z2] }
    }

    /// |Z0|^2 + R(|Z1|^2 + |Z2|^2).
    pub fn form_value(&self, params: SpaceFormParams<T>) -> T {
        self.z[0].norm_sqr() + params.curvature * (self.z[1].norm_sqr() + self.z[2].norm_sqr())
    }

    pub fn is_valid(&self, params: SpaceFormParams<T>) -> bool {
        self.form_value(params) > T::zero()
    }
}

/// Affine coordinates z_i = Z_i / Z0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint<T> {
    pub z1: Complex<T>,
    pub z2: Complex<T>,
}

impl<T: Real> ChartPoint<T> {
    pub fn new(z1: Complex<T>, z2: Complex<T>) -> Self {
        Self { z1, z2 }
    }

    pub fn to_ambient(&self) -> AmbientPoint<T> {
        AmbientPoint::new(Complex::new(T::one(), T::zero()), self.z1, self.z2)
    }

    pub fn norm_sqr(&self) -> T {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    fn coords(&self) -> [Complex<T>; 2] {
        [self.z1, self.z2]
    }
}

pub fn project_to_chart<T: Real>(p: &AmbientPoint<T>) -> Result<ChartPoint<T>> {
    let z0 = p.z[0];
    let scale = p.z.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    if z0.norm() <= T::epsilon() * scale || z0.norm() == T::zero() {
        return Err(Error::PointAtInfinity);
    }
    Ok(ChartPoint { z1: p.z[1] / z0, z2: p.z[2] / z0 })
}

/// Hermitian 2x2 matrix h[a][b] = h_{a b-bar}.
pub type Herm2<T> = [[Complex<T>; 2]; 2];

fn chart_s<T: Real>(p: &ChartPoint<T>, params: SpaceFormParams<T>) -> Result<T> {
    let s = T::one() + params.curvature * p.norm_sqr();
    if s <= T::zero() {
        return Err(Error::OutsideDomain { form_value: s.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(s)
}

/// Metric coefficients h_{a b-bar} of the potential (1/R) log(1 + R|z|^2).
pub fn kahler_metric<T: Real>(p: &ChartPoint<T>, params: SpaceFormParams<T>) -> Result<Herm2<T>> {
    let s = chart_s(p, params)?;
    let r = params.curvature;
    let z = p.coords();
    let mut h = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let delta = if a == b { T::one() / s } else { T::zero() };
            h[a][b] = Complex::new(delta, T::zero()) - z[a].conj() * z[b] * (r / (s * s));
        }
    }
    Ok(h)
}

/// Christoffel symbols gamma[l][a][m] = h^{l b-bar} d_a h_{m b-bar} of the chart metric.
pub fn kahler_christoffel<T: Real>(p: &ChartPoint<T>, params: SpaceFormParams<T>) -> Result<[[[Complex<T>; 2]; 2]; 2]> {
    let s = chart_s(p, params)?;
    let r = params.curvature;
    let z = p.coords();
    let h = kahler_metric(p, params)?;
    let hinv = herm2_inverse(&h);
    let zero = Complex::new(T::zero(), T::zero());
    let two: T = lit(2.0);
    // dh[a][m][b] = d_a h_{m b-bar}
    let mut dh = [[[zero; 2]; 2]; 2];
    for a in 0..2 {
        for m in 0..2 {
            for b in 0..2 {
                let mut v = z[a].conj() * z[m].conj() * z[b] * (two * r * r / (s * s * s));
                if m == b {
                    v = v - z[a].conj() * (r / (s * s));
                }
                if a == b {
                    v = v - z[m].conj() * (r / (s * s));
                }
                dh[a][m][b] = v;
            }
        }
    }
    let mut g = [[[zero; 2]; 2]; 2];
    for l in 0..2 {
        for a in 0..2 {
            for m in 0..2 {
                // h^{l b-bar} with h_{m b-bar} h^{l b-bar} = delta: use the transpose inverse.
                let mut acc = zero;
                for b in 0..2 {
                    acc = acc + hinv[b][l] * dh[a][m][b];
                }
                g[l][a][m] = acc;
            }
        }
    }
    Ok(g)
}

/// Inverse of a 2x2 complex matrix.
pub fn herm2_inverse<T: Real>(h: &Herm2<T>) -> Herm2<T> {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    [[h[1][1] / det, -h[0][1] / det], [-h[1][0] / det, h[0][0] / det]]
}

/// Real part of the Hermitian product sum h_{a b-bar} u^a conj(v^b).
pub fn metric_dot<T: Real>(h: &Herm2<T>, u: &[Complex<T>; 2], v: &[Complex<T>; 2]) -> T {
    let mut acc = Complex::new(T::zero(), T::zero());
    for a in 0..2 {
        for b in 0..2 {
            acc = acc + h[a][b] * u[a] * v[b].conj();
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;
    const TOL: f64 = 1e-12;

    fn p(r: f64) -> SpaceFormParams<f64> {
        SpaceFormParams::new(r)
    }

    #[test]
    fn hermitian_forms() {
        for r in [1.0, 0.0, -1.0] {
            let h = hermitian_form(p(r));
            let want = Mat3::diag([C::new(1.0, 0.0), C::new(r, 0.0), C::new(r, 0.0)]);
            assert_eq!(h, want);
        }
    }

    #[test]
    fn algebra_examples() {
        for r in [1.0, 0.0, -1.0] {
            assert!(is_algebra_element(&Mat3::<f64>::zero(), p(r), TOL));
            let d = Mat3::diag([C::new(0.0, 1.0), C::new(0.0, 1.0), C::new(0.0, -2.0)]);
            assert!(is_algebra_element(&d, p(r), TOL));
        }
        let mut m = Mat3::<f64>::zero();
        m[(0, 1)] = C::new(1.0, 0.0);
        m[(1, 0)] = C::new(-1.0, 0.0);
        assert!(is_algebra_element(&m, p(1.0), TOL));
        let a = AlgebraElement::from_matrix(&m, p(1.0), TOL).unwrap();
        assert_eq!(a.x, C::new(-1.0, 0.0));
        m[(0, 1)] = C::new(-1.0, 0.0);
        assert!(!is_algebra_element(&m, p(1.0), TOL));
    }

    #[test]
    fn assembled_algebra_is_traceless() {
        let a = AlgebraElement { r1: 0.3, r2: -1.1, x: C::new(1.0, 2.0), y: C::new(-0.5, 0.1), z: C::new(0.0, 0.7) };
        for r in [1.0, 0.0, -1.0] {
            assert!(a.to_matrix(p(r)).trace().norm() < TOL);
        }
    }

    #[test]
    fn group_examples() {
        for r in [1.0, 0.0, -1.0] {
            assert!(is_group_element(&Mat3::<f64>::identity(), p(r), TOL));
        }
        let bad = Mat3::diag([C::new(2.0, 0.0), C::new(0.5, 0.0), C::new(1.0, 0.0)]);
        assert!(!is_group_element(&bad, p(1.0), 1e-9));
        let a = AlgebraElement { r1: 0.2, r2: 0.9, x: C::new(0.4, -0.3), y: C::new(1.0, 0.5), z: C::new(-0.2, 0.6) };
        for r in [1.0, 0.0, -1.0] {
            for t in [0.1, 1.0] {
                let g = matrix_exp(&a, t, p(r));
                assert!(is_group_element(&g.m, p(r), 1e-9), "R={r} t={t}");
            }
        }
    }

    #[test]
    fn exp_zero_and_diagonal() {
        let a = AlgebraElement::diagonal(0.4, -1.3);
        assert!((matrix_exp(&a, 0.0, p(1.0)).m - Mat3::identity()).max_abs() < TOL);
        let t = 0.8;
        let l = [0.4, -1.3, 0.9];
        let want = Mat3::diag(l.map(|v| C::new(0.0, t * v).exp()));
        assert!((matrix_exp(&a, t, p(-1.0)).m - want).max_abs() < TOL);
    }

    #[test]
    fn exp_of_nilpotent_truncates() {
        // Generator of the parabolic conic family: z^2 != 0, z^3 = 0.
        let z = Mat3::from_parts([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, -1.0, 0.0]], [[0.0; 3]; 3]);
        let a = AlgebraElement::from_matrix(&z, p(-1.0), TOL).unwrap();
        let t = 1.7;
        let z2 = z * z;
        assert!(z2.max_abs() > 0.5);
        assert!((z2 * z).max_abs() < TOL);
        let want = Mat3::identity() + z.scale_re(t) + z2.scale_re(t * t / 2.0);
        assert!((matrix_exp(&a, t, p(-1.0)).m - want).max_abs() < 1e-13);
    }

    #[test]
    fn projection_examples() {
        let c = |re: f64, im: f64| C::new(re, im);
        let a = project_to_chart(&AmbientPoint::new(c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0))).unwrap();
        assert_eq!((a.z1, a.z2), (c(2.0, 0.0), c(3.0, 0.0)));
        let b = project_to_chart(&AmbientPoint::new(c(2.0, 0.0), c(4.0, 0.0), c(6.0, 0.0))).unwrap();
        assert_eq!(a, b);
        let d = project_to_chart(&AmbientPoint::new(c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0))).unwrap();
        assert_eq!((d.z1, d.z2), (c(0.0, 1.0), c(0.0, -1.0)));
        assert_eq!(project_to_chart(&AmbientPoint::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))), Err(Error::PointAtInfinity));
    }

    #[test]
    fn metric_examples() {
        let q = ChartPoint::new(C::new(0.3, -0.2), C::new(1.5, 0.4));
        let h = kahler_metric(&q, p(0.0)).unwrap();
        assert_eq!(h, [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]]);
        let o = ChartPoint::new(C::new(0.0, 0.0), C::new(0.0, 0.0));
        let h = kahler_metric(&o, p(1.0)).unwrap();
        assert_eq!(h, [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]]);
        let out = ChartPoint::new(C::new(1.0, 0.0), C::new(0.5, 0.0));
        assert!(matches!(kahler_metric(&out, p(-1.0)), Err(Error::OutsideDomain { .. })));
    }

    /// Finite-difference derivative of the metric, independent of the analytic formula.
    #[test]
    fn christoffel_matches_finite_differences() {
        let q = ChartPoint::new(C::new(0.2, 0.1), C::new(-0.3, 0.25));
        for r in [1.0, -1.0] {
            let g = kahler_christoffel(&q, p(r)).unwrap();
            let h = kahler_metric(&q, p(r)).unwrap();
            let eps = 1e-6;
            for a in 0..2 {
                // d/dz_a = (d/dx - i d/dy) / 2
                let shift = |d: C| {
                    let mut c = q;
                    if a == 0 {
                        c.z1 += d;
                    } else {
                        c.z2 += d;
                    }
                    kahler_metric(&c, p(r)).unwrap()
                };
                let (hx1, hx0) = (shift(C::new(eps, 0.0)), shift(C::new(-eps, 0.0)));
                let (hy1, hy0) = (shift(C::new(0.0, eps)), shift(C::new(0.0, -eps)));
                for m in 0..2 {
                    for b in 0..2 {
                        let dx = (hx1[m][b] - hx0[m][b]) / (2.0 * eps);
                        let dy = (hy1[m][b] - hy0[m][b]) / (2.0 * eps);
                        let da = (dx - C::new(0.0, 1.0) * dy) * 0.5;
                        // Contract: sum_l Gamma[l][a][m] h_{l b-bar} = d_a h_{m b-bar}
                        let lhs = g[0][a][m] * h[0][b] + g[1][a][m] * h[1][b];
                        assert!((lhs - da).norm() < 1e-8, "R={r} a={a} m={m} b={b}");
                    }
                }
            }
        }
    }

    /// Affine lines in the chart are projective lines, hence totally geodesic; their
    /// Gauss curvature from the pulled-back metric is the holomorphic sectional curvature.
    #[test]
    fn holomorphic_sectional_curvature_is_4r() {
        let pts = [(0.1, -0.2, 0.05, 0.3), (-0.3, 0.1, 0.2, 0.2), (0.25, 0.25, -0.1, 0.0), (0.0, 0.4, 0.1, -0.2), (-0.15, -0.1, -0.3, 0.1)];
        let dirs = [C::new(1.0, 0.0), C::new(0.3, 0.8), C::new(-0.6, 0.2), C::new(0.1, -1.0), C::new(0.7, 0.7)];
        for r in [1.0, 0.0, -1.0] {
            for (k, &(a, b, c, d)) in pts.iter().enumerate() {
                let base = [C::new(a, b), C::new(c, d)];
                let u = [dirs[k], dirs[(k + 2) % 5]];
                let lam = |t: C| {
                    let q = ChartPoint::new(base[0] + u[0] * t, base[1] + u[1] * t);
                    metric_dot(&kahler_metric(&q, p(r)).unwrap(), &u, &u)
                };
                let h = 1e-3;
                let l0 = lam(C::new(0.0, 0.0));
                let lap = (lam(C::new(h, 0.0)).ln() + lam(C::new(-h, 0.0)).ln() + lam(C::new(0.0, h)).ln() + lam(C::new(0.0, -h)).ln()
                    - 4.0 * l0.ln())
                    / (h * h);
                let k_gauss = -lap / (2.0 * l0);
                assert!((k_gauss - 4.0 * r).abs() < 1e-5, "R={r}: {k_gauss}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn algebra() -> impl Strategy<Value = AlgebraElement<f64>> {
            let c = || (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C::new(a, b));
            (-1.0..1.0f64, -1.0..1.0f64, c(), c(), c()).prop_map(|(r1, r2, x, y, z)| AlgebraElement { r1, r2, x, y, z })
        }

        fn curvature() -> impl Strategy<Value = f64> {
            prop_oneof![Just(1.0), Just(0.0), Just(-1.0)]
        }

        proptest! {
            #[test]
            fn exp_lands_in_group(a in algebra(), t in -2.0..2.0f64, r in curvature()) {
                let g = matrix_exp(&a, t, p(r));
                prop_assert!(is_group_element(&g.m, p(r), 1e-9));
            }

            #[test]
            fn products_preserve_form(gens in prop::collection::vec((algebra(), -1.0..1.0f64), 20), r in prop_oneof![Just(1.0), Just(-1.0)]) {
                let h = hermitian_form(p(r));
                let mut m = Mat3::identity();
                for (a, t) in &gens {
                    m = m * matrix_exp(a, *t, p(r)).m;
                }
                let scale = m.max_abs().powi(2).max(1.0);
                prop_assert!((m.conj_transpose() * h * m - h).max_abs() < 1e-9 * scale);
            }

            #[test]
            fn algebra_round_trip(a in algebra(), r in curvature()) {
                let m = a.to_matrix(p(r));
                prop_assert!(m.trace().norm() < 1e-14);
                let b = AlgebraElement::from_matrix(&m, p(r), 1e-14).unwrap();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn projection_is_scale_invariant(z in prop::array::uniform3((-2.0..2.0f64, -2.0..2.0f64)), s in (0.1..3.0f64, -3.0..3.0f64)) {
                let z = z.map(|(a, b)| C::new(a, b));
                prop_assume!(z[0].norm() > 1e-3);
                let s = C::new(s.0, s.1);
                let a = project_to_chart(&AmbientPoint::new(z[0], z[1], z[2])).unwrap();
                let b = project_to_chart(&AmbientPoint::new(z[0] * s, z[1] * s, z[2] * s)).unwrap();
                prop_assert!((a.z1 - b.z1).norm() < 1e-12 * (1.0 + a.z1.norm()));
                prop_assert!((a.z2 - b.z2).norm() < 1e-12 * (1.0 + a.z2.norm()));
            }
        }
    }
}
