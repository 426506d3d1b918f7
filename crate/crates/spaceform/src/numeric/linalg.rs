//! Dense complex 3x3 matrices.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{lit, Real};

/// Complex 3x3 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3<T> {
    pub e: [[Complex<T>; 3]; 3],
}

#[inline]
fn cz<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> Mat3<T> {
    pub fn zero() -> Self {
        Self { e: [[cz(); 3]; 3] }
    }

    pub fn identity() -> Self {
        Self::diag([Complex::new(T::one(), T::zero()); 3])
    }

    pub fn diag(d: [Complex<T>; 3]) -> Self {
        let mut m = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.e[i][i] = v;
        }
        m
    }

    pub fn from_rows(e: [[Complex<T>; 3]; 3]) -> Self {
        Self { e }
    }

    /// Builds a matrix from real and imaginary parts.
    pub fn from_parts(re: [[T; 3]; 3], im: [[T; 3]; 3]) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.e[i][j] = Complex::new(re[i][j], im[i][j]);
            }
        }
        m
    }

    pub fn conj_transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.e[i][j] = self.e[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let mut m = *self;
        m.e.iter_mut().flatten().for_each(|v| *v = *v * s);
        m
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        self.e[0][0] + self.e[1][1] + self.e[2][2]
    }

    pub fn det(&self) -> Complex<T> {
        let e = &self.e;
        e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
            + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
    }

    /// Inverse by the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == T::zero() || !d.norm().is_finite() {
            return None;
        }
        let e = &self.e;
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                m.e[i][j] = (e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0]) / d;
            }
        }
        Some(m)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.e.iter().flatten().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Induced 1-norm (largest column sum).
    pub fn norm1(&self) -> T {
        (0..3).map(|j| (0..3).fold(T::zero(), |s, i| s + self.e[i][j].norm())).fold(T::zero(), T::max)
    }

    pub fn mul_vec(&self, v: [Complex<T>; 3]) -> [Complex<T>; 3] {
        let mut out = [cz(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.e[i][0] * v[0] + self.e[i][1] * v[1] + self.e[i][2] * v[2];
        }
        out
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::identity();
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    /// Commutator `self * o - o * self`.
    pub fn commutator(&self, o: &Self) -> Self {
        *self * *o - *o * *self
    }

    /// Matrix exponential by scaling and squaring with a diagonal [8/8] Pade approximant.
    pub fn exp(&self) -> Self {
        let norm = self.norm1();
        let half: T = lit(0.5);
        let mut s = 0i32;
        if norm > half {
            s = (norm / half).log2().ceil().to_i32().unwrap_or(0).max(0);
        }
        let b = self.scale_re(lit::<T>(2.0).powi(-s));
        // c_k = (2q-k)! q! / ((2q)! k! (q-k)!), q = 8.
        const Q: usize = 8;
        let mut c = [0.0f64; Q + 1];
        c[0] = 1.0;
        for k in 1..=Q {
            c[k] = c[k - 1] * ((Q + 1 - k) as f64) / (k as f64 * (2 * Q + 1 - k) as f64);
        }
        let mut num = Self::identity();
        let mut den = Self::identity();
        let mut p = Self::identity();
        for (k, ck) in c.iter().enumerate().skip(1) {
            p = p * b;
            let term = p.scale_re(lit(*ck));
            num = num + term;
            den = if k % 2 == 0 { den + term } else { den - term };
        }
        let mut x = den.inverse().expect("Pade denominator is invertible for scaled input") * num;
        for _ in 0..s {
            x = x * x;
        }
        x
    }
}

impl<T: Real> Index<(usize, usize)> for Mat3<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.e[i][j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Mat3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.e[i][j]
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.e[i][j] = self.e[i][0] * o.e[0][j] + self.e[i][1] * o.e[1][j] + self.e[i][2] * o.e[2][j];
            }
        }
        m
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.e[i][j] = self.e[i][j] + o.e[i][j];
            }
        }
        self
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.e[i][j] = self.e[i][j] - o.e[i][j];
            }
        }
        self
    }
}

impl<T: Real> Neg for Mat3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-T::one())
    }
}
