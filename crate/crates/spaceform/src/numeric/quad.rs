//! Adaptive Gauss-Kronrod and fixed composite Gauss-Legendre quadrature.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use super::{lit, Real};

/// Values that can be summed by a quadrature rule.
pub trait Integrable<T: Real>: Copy + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn scale(self, s: T) -> Self;
    fn magnitude(&self) -> T;
}

impl<T: Real> Integrable<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn scale(self, s: T) -> Self {
        self * s
    }
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Integrable<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn scale(self, s: T) -> Self {
        self * s
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
}

/// A pair of complex values, summed componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CPair<T>(pub Complex<T>, pub Complex<T>);

impl<T: Real> Add for CPair<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CPair(self.0 + o.0, self.1 + o.1)
    }
}

impl<T: Real> Sub for CPair<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        CPair(self.0 - o.0, self.1 - o.1)
    }
}

impl<T: Real> Mul<Complex<T>> for CPair<T> {
    type Output = Self;
    fn mul(self, c: Complex<T>) -> Self {
        CPair(self.0 * c, self.1 * c)
    }
}

impl<T: Real> Integrable<T> for CPair<T> {
    fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        CPair(z, z)
    }
    fn scale(self, s: T) -> Self {
        CPair(self.0 * s, self.1 * s)
    }
    fn magnitude(&self) -> T {
        self.0.norm().max(self.1.norm())
    }
}

/// Quadrature failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge on [{a}, {b}] (estimated error {err:e})")]
    NoConvergence { a: f64, b: f64, err: f64 },
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel; returns (Kronrod, Gauss) estimates.
pub fn gauss_kronrod15<T, V, F>(f: &mut F, a: T, b: T) -> (V, V)
where
    T: Real,
    V: Integrable<T>,
    F: FnMut(T) -> V,
{
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let fc = f(mid);
    let mut k = fc.scale(lit(WGK[7]));
    let mut g = fc.scale(lit(WG[3]));
    for i in 0..7 {
        let dx = half * lit(XGK[i]);
        let s = f(mid - dx) + f(mid + dx);
        k = k + s.scale(lit(WGK[i]));
        if i % 2 == 1 {
            g = g + s.scale(lit(WG[i / 2]));
        }
    }
    (k.scale(half), g.scale(half))
}

/// Adaptive G7-K15 quadrature with recursive bisection.
pub fn integrate<T, V, F>(mut f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> Result<V, QuadError>
where
    T: Real,
    V: Integrable<T>,
    F: FnMut(T) -> V,
{
    if a == b {
        return Ok(V::zero());
    }
    let (k, g) = gauss_kronrod15(&mut f, a, b);
    let mut total = V::zero();
    let mut stack = vec![(a, b, k, (k - g).magnitude(), 0usize)];
    let tol_scale = abs_tol.max(rel_tol * k.magnitude());
    let mut worst = T::zero();
    let mut worst_ab = (a, b);
    while let Some((lo, hi, est, err, depth)) = stack.pop() {
        let width_frac = ((hi - lo) / (b - a)).abs();
        let local_tol = tol_scale * width_frac.sqrt().max(width_frac);
        if err <= local_tol || err <= T::epsilon() * lit(50.0) * est.magnitude() {
            total = total + est;
            continue;
        }
        if depth >= 40 {
            total = total + est;
            if err > worst {
                worst = err;
                worst_ab = (lo, hi);
            }
            continue;
        }
        let m = (lo + hi) * lit(0.5);
        let (k1, g1) = gauss_kronrod15(&mut f, lo, m);
        let (k2, g2) = gauss_kronrod15(&mut f, m, hi);
        stack.push((lo, m, k1, (k1 - g1).magnitude(), depth + 1));
        stack.push((m, hi, k2, (k2 - g2).magnitude(), depth + 1));
    }
    if worst > tol_scale {
        return Err(QuadError::NoConvergence {
            a: worst_ab.0.to_f64().unwrap_or(f64::NAN),
            b: worst_ab.1.to_f64().unwrap_or(f64::NAN),
            err: worst.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(total)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre_rule<T: Real>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let nf: T = lit(n as f64);
    for i in 0..n {
        let mut x = (T::PI() * (lit::<T>(i as f64) + lit(0.75)) / (nf + lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= T::epsilon() * lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf: T = lit(k as f64);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = lit::<T>(n as f64) * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Composite Gauss-Legendre rule with `panels` equal panels of order `order`.
pub fn gauss_legendre<T, V, F>(mut f: F, a: T, b: T, panels: usize, order: usize) -> V
where
    T: Real,
    V: Integrable<T>,
    F: FnMut(T) -> V,
{
    let rule = gauss_legendre_rule::<T>(order);
    let h = (b - a) / lit(panels as f64);
    let mut total = V::zero();
    for p in 0..panels {
        let lo = a + h * lit(p as f64);
        let mid = lo + h * lit(0.5);
        let mut acc = V::zero();
        for &(x, w) in &rule {
            acc = acc + f(mid + h * lit::<T>(0.5) * x).scale(w);
        }
        total = total + acc.scale(h * lit(0.5));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v: f64 = integrate(|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let v: f64 = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-6, 1e-6).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn complex_oscillatory() {
        let v: Complex<f64> = integrate(|t: f64| Complex::new(0.0, t).exp(), 0.0, std::f64::consts::PI, 1e-13, 1e-13).unwrap();
        assert!((v - Complex::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn legendre_rule_weights() {
        for n in [1, 2, 5, 12, 20] {
            let r = gauss_legendre_rule::<f64>(n);
            let s: f64 = r.iter().map(|p| p.1).sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
        }
        let v: f64 = gauss_legendre(|x: f64| x.exp(), 0.0, 1.0, 4, 8);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn reversed_interval_negates() {
        let a: f64 = integrate(|x: f64| x.sin(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        let b: f64 = integrate(|x: f64| x.sin(), 1.0, 0.0, 1e-13, 1e-13).unwrap();
        assert!((a + b).abs() < 1e-14);
    }
}
