//! The exceptional flat solution: frame fields, conserved quantities and the
//! coframe γ on the domain D* ⊂ (x, y, θ), together with its holonomy, the
//! quaternionic lattice and the quartic-curve description of the leaves.

pub mod holonomy;
pub mod quartic;
pub mod quaternion;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::linalg::Mat3;
use crate::weierstrass::{sec_pow, Axis, Profile, ThetaSlice};

type CMat3 = Mat3<f64>;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest accepted f − g; below this the point is treated as lying on a branch curve.
pub const MIN_GAP: f64 = 1e-10;

/// Frame quantities at one point of D*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub s: f64,
    pub a: Complex64,
    pub p: f64,
    /// f(x, θ), g(y, θ) and their derivatives and primitives.
    pub f: f64,
    pub g: f64,
    pub fx: f64,
    pub gy: f64,
    pub big_f: f64,
    pub big_g: f64,
}

impl FrameSample {
    pub fn gap(&self) -> f64 {
        self.f - self.g
    }
}

/// The pair (A, B) whose combination A³ − B² is constant along the solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedPair {
    pub a: f64,
    pub b: f64,
}

impl ConservedPair {
    pub fn invariant(&self) -> f64 {
        self.a.powi(3) - self.b * self.b
    }
}

/// Coefficients of the coframe forms in the basis (dx, dy, dθ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoframeSample {
    pub eta: [Complex64; 3],
    pub omega: [Complex64; 3],
    pub tau: [Complex64; 3],
    pub phi: [Complex64; 3],
    pub sigma: [Complex64; 3],
    /// γ(∂x), γ(∂y), γ(∂θ).
    pub gamma: [CMat3; 3],
}

/// Profiles f and g at one θ, shared by every frame evaluation on that slice.
#[derive(Debug, Clone)]
pub struct ThetaLeaf {
    pub slice: ThetaSlice,
    pub f: Profile,
    pub g: Profile,
}

impl ThetaLeaf {
    pub fn new(theta: f64) -> Result<Self> {
        let slice = ThetaSlice::new(theta)?;
        Ok(Self { slice, f: Profile::new(slice, Axis::X)?, g: Profile::new(slice, Axis::Y)? })
    }

    pub fn theta(&self) -> f64 {
        self.slice.theta
    }

    pub fn frame(&self, x: f64, y: f64) -> Result<FrameSample> {
        let (fv, gv) = (self.f.eval(x)?, self.g.eval(y)?);
        let d = fv.value - gv.value;
        let theta = self.theta();
        if !(d > MIN_GAP) {
            return Err(Error::BranchPoint { x, y, theta, gap: d });
        }
        Ok(FrameSample {
            x,
            y,
            theta,
            s: d.powf(0.75),
            a: Complex64::new(fv.derivative, gv.derivative) * (d.powf(-0.75) / 8.0),
            p: -6.0 * d.powf(-0.25) * (fv.value + gv.value),
            f: fv.value,
            g: gv.value,
            fx: fv.derivative,
            gy: gv.derivative,
            big_f: fv.primitive,
            big_g: gv.primitive,
        })
    }

    pub fn coframe(&self, x: f64, y: f64) -> Result<CoframeSample> {
        Ok(coframe_of(&self.frame(x, y)?))
    }
}

pub fn frame_fields(x: f64, y: f64, theta: f64) -> Result<FrameSample> {
    ThetaLeaf::new(theta)?.frame(x, y)
}

pub fn conserved(fs: &FrameSample) -> ConservedPair {
    let (s, a, p) = (fs.s, fs.a, fs.p);
    let a2 = a.norm_sqr();
    let big_a = s.powf(2.0 / 3.0) * (48.0 * a2 + 12.0 * s * s + p * p) / 9.0;
    let big_b = s * (432.0 * (a * a).re * s + 72.0 * a2 * p - 36.0 * s * s * p + p.powi(3)) / 27.0;
    ConservedPair { a: big_a, b: big_b }
}

fn coframe_of(fs: &FrameSample) -> CoframeSample {
    let d = fs.gap();
    let sec23 = sec_pow(fs.theta, 2.0 / 3.0);
    let zero = Complex64::new(0.0, 0.0);
    let eta = [zero, zero, Complex64::new(d.powf(0.25) * sec23 / 6.0, 0.0)];
    let q = d.powf(-0.25);
    let omega = [Complex64::new(q, 0.0), I * q, Complex64::new(fs.big_f, fs.big_g) * (q * sec23 / 6.0)];
    let (a, s) = (fs.a, fs.s);
    let phi = omega.map(|w| -I * a * w + I * a.conj() * w.conj());
    let mut sigma = [zero; 3];
    for k in 0..3 {
        sigma[k] = -2.0 * a.conj() * eta[k] - 2.0 * s * omega[k].conj();
    }
    let gamma = std::array::from_fn(|k| {
        Mat3::from_rows([[zero; 3], [eta[k], I * phi[k], -sigma[k].conj()], [omega[k], sigma[k], -I * phi[k]]])
    });
    CoframeSample { eta, omega, tau: [zero; 3], phi, sigma, gamma }
}

pub fn coframe(x: f64, y: f64, theta: f64) -> Result<CoframeSample> {
    ThetaLeaf::new(theta)?.coframe(x, y)
}

/// Caches θ-slices so that stencils in θ do not rebuild profiles.
#[derive(Debug, Default)]
pub struct LeafCache {
    leaves: HashMap<u64, Arc<ThetaLeaf>>,
}

impl LeafCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, theta: f64) -> Result<Arc<ThetaLeaf>> {
        if let Some(l) = self.leaves.get(&theta.to_bits()) {
            return Ok(l.clone());
        }
        let l = Arc::new(ThetaLeaf::new(theta)?);
        self.leaves.insert(theta.to_bits(), l.clone());
        Ok(l)
    }

    pub fn gamma(&mut self, p: [f64; 3]) -> Result<[CMat3; 3]> {
        Ok(self.get(p[2])?.coframe(p[0], p[1])?.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    ThreePoint,
    FivePoint,
}

/// Residual matrices ∂_iγ_j − ∂_jγ_i + [γ_i, γ_j] for the pairs (x,y), (x,θ), (y,θ).
pub fn flatness_residual(cache: &mut LeafCache, p: [f64; 3], h: f64, stencil: Stencil) -> Result<[CMat3; 3]> {
    let g0 = cache.gamma(p)?;
    let mut dg = [[Mat3::zero(); 3]; 3];
    for (k, dk) in dg.iter_mut().enumerate() {
        let at = |cache: &mut LeafCache, t: f64| {
            let mut q = p;
            q[k] += t * h;
            cache.gamma(q)
        };
        let (p1, m1) = (at(cache, 1.0)?, at(cache, -1.0)?);
        for j in 0..3 {
            dk[j] = (p1[j] - m1[j]).scale_re(0.5 / h);
        }
        if stencil == Stencil::FivePoint {
            let (p2, m2) = (at(cache, 2.0)?, at(cache, -2.0)?);
            for j in 0..3 {
                dk[j] = (p1[j] - m1[j]).scale_re(8.0 / (12.0 * h)) - (p2[j] - m2[j]).scale_re(1.0 / (12.0 * h));
            }
        }
    }
    let pairs = [(0, 1), (0, 2), (1, 2)];
    Ok(pairs.map(|(i, j)| dg[i][j] - dg[j][i] + g0[i].commutator(&g0[j])))
}

/// Largest residual entry over a set of points.
pub fn check_flatness(points: &[[f64; 3]], h: f64, stencil: Stencil) -> Result<f64> {
    let mut cache = LeafCache::new();
    let mut worst = 0.0f64;
    for &p in points {
        for r in flatness_residual(&mut cache, p, h, stencil)? {
            worst = worst.max(r.max_abs());
        }
    }
    Ok(worst)
}

/// `n`³ cell-centred points in the box `lo..hi`.
pub fn box_grid(lo: [f64; 3], hi: [f64; 3], n: [usize; 3]) -> Vec<[f64; 3]> {
    let c = |k: usize, i: usize| lo[k] + (hi[k] - lo[k]) * (i as f64 + 0.5) / n[k] as f64;
    let mut out = Vec::with_capacity(n[0] * n[1] * n[2]);
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                out.push([c(0, i), c(1, j), c(2, k)]);
            }
        }
    }
    out
}

/// Worst deviations of (A, B, A³ − B²) from (sec^{2/3}θ, −tan θ, 1) on an
/// `nx` × `ny` grid over the period cell for each θ.
pub fn conservation_grid(thetas: &[f64], nx: usize, ny: usize) -> Result<[f64; 3]> {
    use rayon::prelude::*;
    let per: Vec<Result<[f64; 3]>> = thetas
        .par_iter()
        .map(|&t| {
            let leaf = ThetaLeaf::new(t)?;
            let (a_want, b_want) = (sec_pow(t, 2.0 / 3.0), -t.tan());
            let mut worst = [0.0f64; 3];
            for i in 0..nx {
                for j in 0..ny {
                    let x = 2.0 * leaf.slice.rho_plus * (i as f64 + 0.5) / nx as f64;
                    let y = 2.0 * leaf.slice.rho_minus * (j as f64 + 0.5) / ny as f64;
                    let c = conserved(&leaf.frame(x, y)?);
                    worst[0] = worst[0].max((c.a - a_want).abs());
                    worst[1] = worst[1].max((c.b - b_want).abs());
                    worst[2] = worst[2].max((c.invariant() - 1.0).abs());
                }
            }
            Ok(worst)
        })
        .collect();
    let mut worst = [0.0f64; 3];
    for w in per {
        let w = w?;
        for k in 0..3 {
            worst[k] = worst[k].max(w[k]);
        }
    }
    Ok(worst)
}

/// Gauss curvature of the leaf metric |ω|² at fixed θ by a five-point Laplacian,
/// with the expected value 4(0 − 2s²) = −8(f − g)^{3/2}.
pub fn leaf_curvature(leaf: &ThetaLeaf, x: f64, y: f64, h: f64) -> Result<(f64, f64)> {
    let lam = |x: f64, y: f64| -> Result<f64> { Ok(leaf.coframe(x, y)?.omega[0].norm_sqr()) };
    let l0 = lam(x, y)?;
    let lap = (lam(x + h, y)?.ln() + lam(x - h, y)?.ln() + lam(x, y + h)?.ln() + lam(x, y - h)?.ln() - 4.0 * l0.ln()) / (h * h);
    let fs = leaf.frame(x, y)?;
    Ok((-lap / (2.0 * l0), -8.0 * fs.gap().powf(1.5)))
}
