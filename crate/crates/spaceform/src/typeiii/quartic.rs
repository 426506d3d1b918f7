//! The quartic v⁴ = 16bw − 48r₂w² − 16bw³, abelian integrals of (w, 1) dw/v³
//! along tracked paths, and the comparison of the resulting map with the
//! developing map of the coframe.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::holonomy::{develop, m_function};
use super::quaternion::{lattice_build, to_real, translation, LatticeF4, Mat2};
use super::ThetaLeaf;
use crate::error::{Error, Result};
use crate::numeric::quad::{self, CPair};
use crate::weierstrass::{center, w_map_at, ThetaSlice};

/// Paths must stay this far from ramification points and within 1/margin of the origin.
pub const PATH_MARGIN: f64 = 1e-2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 16bw − 48r₂w² − 16bw³.
pub fn quartic_rhs(slice: &ThetaSlice, w: Complex64) -> Complex64 {
    let (b, r2) = (slice.b, slice.r2());
    16.0 * b * w - 48.0 * r2 * w * w - 16.0 * b * w * w * w
}

/// Finite ramification values of w: 0 and the roots of w² + 3(r₂/b)w − 1.
pub fn ramification_points(slice: &ThetaSlice) -> [Complex64; 3] {
    let p = 3.0 * slice.r2() / slice.b;
    let disc = (p * p + 4.0).sqrt();
    [c(0.0, 0.0), c(0.5 * (-p + disc), 0.0), c(0.5 * (-p - disc), 0.0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCurvePoint {
    pub theta: f64,
    pub w: Complex64,
    pub v: Complex64,
}

impl QuarticCurvePoint {
    /// [W₀, W₁, W₂] = [1, w, v].
    pub fn homogeneous(&self) -> [Complex64; 3] {
        [c(1.0, 0.0), self.w, self.v]
    }

    /// W₂⁴ − (16bW₀³W₁ − 48r₂W₀²W₁² − 16bW₀W₁³).
    pub fn residual(&self, slice: &ThetaSlice) -> Complex64 {
        self.v.powi(4) - quartic_rhs(slice, self.w)
    }

    /// Image [W₀², W₀W₁, W₂²] on the cubic.
    pub fn cubic_image(&self) -> [Complex64; 3] {
        let h = self.homogeneous();
        [h[0] * h[0], h[0] * h[1], h[2] * h[2]]
    }
}

/// Z₀Z₂² − (16bZ₀²Z₁ − 48r₂Z₀Z₁² − 16bZ₁³).
pub fn cubic_residual(slice: &ThetaSlice, z: [Complex64; 3]) -> Complex64 {
    let (b, r2) = (slice.b, slice.r2());
    z[0] * z[2] * z[2] - (16.0 * b * z[0] * z[0] * z[1] - 48.0 * r2 * z[0] * z[1] * z[1] - 16.0 * b * z[1].powi(3))
}

/// The point over w on sheet `branch` (principal fourth root times iᵇʳᵃⁿᶜʰ).
pub fn quartic_lift(slice: &ThetaSlice, w: Complex64, branch: u8) -> QuarticCurvePoint {
    let v = quartic_rhs(slice, w).powf(0.25) * c(0.0, 1.0).powi(branch as i32 % 4);
    QuarticCurvePoint { theta: slice.theta, w, v }
}

/// n̂(θ) = [1, i, 2(3r₂ + 2bi)^{1/4}].
pub fn base_point(slice: &ThetaSlice) -> QuarticCurvePoint {
    QuarticCurvePoint { theta: slice.theta, w: c(0.0, 1.0), v: 2.0 * c(3.0 * slice.r2(), 2.0 * slice.b).powf(0.25) }
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    if d.norm_sqr() == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / d.norm_sqr();
    (p - (a + d * t.clamp(0.0, 1.0))).norm()
}

fn check_segment(ram: &[Complex64; 3], a: Complex64, b: Complex64) -> Result<f64> {
    let (k, dmin) = ram.iter().enumerate().map(|(k, &p)| (k, segment_distance(p, a, b))).fold((0, f64::INFINITY), |m, e| if e.1 < m.1 { e } else { m });
    if dmin < PATH_MARGIN {
        return Err(Error::BranchDiscontinuity { re: ram[k].re, im: ram[k].im });
    }
    if a.norm() > 1.0 / PATH_MARGIN || b.norm() > 1.0 / PATH_MARGIN {
        return Err(Error::BranchDiscontinuity { re: f64::INFINITY, im: 0.0 });
    }
    Ok(dmin)
}

/// Integrates √2 (w, 1) dw / v³ along one piece on which the argument of the
/// quartic changes by less than π/4; returns the integral and the end point.
fn integrate_piece(slice: &ThetaSlice, start: QuarticCurvePoint, wb: Complex64) -> Result<(CPair<f64>, QuarticCurvePoint)> {
    let (wa, va) = (start.w, start.v);
    let qa = quartic_rhs(slice, wa);
    let dw = wb - wa;
    let vt = |w: Complex64| va * (quartic_rhs(slice, w) / qa).powf(0.25);
    let s2 = std::f64::consts::SQRT_2;
    let val: CPair<f64> = quad::integrate(
        |t: f64| {
            let w = wa + dw * t;
            let k = dw * s2 / vt(w).powi(3);
            CPair(w * k, k)
        },
        0.0,
        1.0,
        1e-14,
        1e-12,
    )?;
    let vb = vt(wb);
    let arg = (quartic_rhs(slice, wb) / qa).arg().abs();
    if arg > std::f64::consts::FRAC_PI_4 {
        return Err(Error::BranchDiscontinuity { re: wb.re, im: wb.im });
    }
    Ok((val, QuarticCurvePoint { theta: slice.theta, w: wb, v: vb }))
}

/// ϑ = ∫ √2 (w, 1) dw/v³ along the polyline `path` (in the w-plane) starting at `start`,
/// with v continued along the path. Returns the integral and the lifted end point.
pub fn abelian_theta(slice: &ThetaSlice, start: QuarticCurvePoint, path: &[Complex64]) -> Result<([Complex64; 2], QuarticCurvePoint)> {
    let ram = ramification_points(slice);
    let mut acc = CPair(c(0.0, 0.0), c(0.0, 0.0));
    let mut cur = start;
    if let Some(&first) = path.first() {
        if (first - start.w).norm() > 1e-12 {
            return Err(Error::InvalidArgument("path does not start at the start point".into()));
        }
    }
    for win in path.windows(2) {
        let (a, b) = (win[0], win[1]);
        check_segment(&ram, a, b)?;
        // Split so every piece is short relative to its distance from the ramification points;
        // each linear factor of the quartic then turns by less than π/12.
        let mut stack = vec![(a, b)];
        let mut pieces = Vec::new();
        while let Some((p, q)) = stack.pop() {
            let dmin = ram.iter().map(|&r| segment_distance(r, p, q)).fold(f64::INFINITY, f64::min);
            if (q - p).norm() <= 0.25 * dmin {
                pieces.push((p, q));
            } else {
                let m = (p + q) * 0.5;
                stack.push((m, q));
                stack.push((p, m));
            }
        }
        for (_, q) in pieces {
            let (v, next) = integrate_piece(slice, cur, q)?;
            acc = acc + v;
            cur = next;
        }
    }
    Ok(([acc.0, acc.1], cur))
}

/// Unit functions with the conjugate phase: A = v̄/(v√(1+|w|²)), B = −v̄w/(v√(1+|w|²)).
pub fn unit_functions_conjugate_phase(p: &QuarticCurvePoint) -> (Complex64, Complex64) {
    let n = (1.0 + p.w.norm_sqr()).sqrt();
    let ph = p.v.conj() / p.v;
    (ph / n, -ph * p.w / n)
}

/// Unit functions with phase −arg v: A = |v|/(v√(1+|w|²)), B = −|v|w/(v√(1+|w|²)).
pub fn unit_functions(p: &QuarticCurvePoint) -> (Complex64, Complex64) {
    let n = (1.0 + p.w.norm_sqr()).sqrt();
    let ph = p.v.norm() / p.v;
    (ph / n, -ph * p.w / n)
}

/// [[A, B], [−B̄, Ā]].
pub fn rotation(a: Complex64, b: Complex64) -> Mat2 {
    [[a, b], [-b.conj(), a.conj()]]
}

fn apply(m: &Mat2, x: [Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
}

/// Polyline image under w of the straight z-segment from the centre to `z`, refined until
/// consecutive vertices are close relative to the ramification points.
pub fn w_polyline(slice: &ThetaSlice, z: Complex64) -> Result<Vec<Complex64>> {
    let ram = ramification_points(slice);
    let z0 = center(slice);
    let mut n = 16;
    loop {
        let pts: Vec<Complex64> = (0..=n).map(|k| w_map_at(slice, z0 + (z - z0) * (k as f64 / n as f64)).map(|v| v.0)).collect::<Result<_>>()?;
        let fine = pts.windows(2).all(|p| {
            let d = ram.iter().map(|&r| (r - p[0]).norm()).fold(f64::INFINITY, f64::min);
            (p[1] - p[0]).norm() <= 0.1 * d
        });
        if fine || n >= 4096 {
            let mut pts = pts;
            pts[0] = crate::typeiii::quartic::base_point(slice).w;
            return Ok(pts);
        }
        n *= 2;
    }
}

/// Φ at (x, y) on the θ-slice: M·ϑ + (m(θ), 0), ϑ taken from n̂ along the image of the
/// straight segment from the centre.
pub fn abel_map(slice: &ThetaSlice, rot: &Mat2, x: f64, y: f64) -> Result<[Complex64; 2]> {
    let path = w_polyline(slice, c(x, y))?;
    let (th, _) = abelian_theta(slice, base_point(slice), &path)?;
    let p = apply(rot, th);
    Ok([p[0] + m_function(slice.theta)?, p[1]])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub samples: usize,
    /// Largest |T − Φ − c| modulo Λ, c taken at the base point.
    pub max_discrepancy: f64,
    /// The same with the conjugate-phase unit functions.
    pub max_discrepancy_conjugate_phase: f64,
    /// Developing-map increments over the loops X and Y.
    pub loop_x_increment: [Complex64; 2],
    pub loop_y_increment: [Complex64; 2],
}

/// Sample points on an n × n grid inside the cell (0, 2ρ₀)², away from its corners.
pub fn fundamental_samples(slice: &ThetaSlice, n: usize) -> Vec<(f64, f64)> {
    let (rp, rm) = (slice.rho_plus, slice.rho_minus);
    let t = |k: usize| 0.35 + 1.3 * k as f64 / (n.max(2) - 1) as f64;
    (0..n).flat_map(|i| (0..n).map(move |j| (rp * t(i), rm * t(j)))).collect()
}

fn distance_mod(lat: &LatticeF4, d: [Complex64; 2]) -> f64 {
    lat.reduce(to_real(d)).iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Compares the developing map T (translation part of the transported frame from the centre)
/// with Φ at θ = 0 over `samples`, and records the loop increments.
pub fn developing_map_crosscheck(samples: &[(f64, f64)], r: f64) -> Result<CrosscheckReport> {
    use rayon::prelude::*;
    let leaf = ThetaLeaf::new(0.0)?;
    let slice = leaf.slice;
    let base = (slice.rho_plus, slice.rho_minus);
    let n0 = base_point(&slice);
    let (a, b) = unit_functions(&n0);
    let (ap, bp) = unit_functions_conjugate_phase(&n0);
    let (rot, rot_p) = (rotation(a, b), rotation(ap, bp));
    let lat = lattice_build(r)?;
    let diffs: Vec<Result<([Complex64; 2], [Complex64; 2])>> = samples
        .par_iter()
        .map(|&(x, y)| {
            let g = develop(&leaf, base, (x, y))?;
            let t = [g[(1, 0)], g[(2, 0)]];
            let path = w_polyline(&slice, c(x, y))?;
            let (th, _) = abelian_theta(&slice, n0, &path)?;
            let (p, pp) = (apply(&rot, th), apply(&rot_p, th));
            Ok(([t[0] - p[0], t[1] - p[1]], [t[0] - pp[0], t[1] - pp[1]]))
        })
        .collect();
    let diffs: Vec<_> = diffs.into_iter().collect::<Result<_>>()?;
    // Both maps vanish at the base point, so the alignment constant is zero.
    let mut worst = 0.0f64;
    let mut worst_p = 0.0f64;
    for (d, dp) in &diffs {
        worst = worst.max(distance_mod(&lat, *d));
        worst_p = worst_p.max(distance_mod(&lat, *dp));
    }
    let gx = develop(&leaf, base, (base.0 + 2.0 * slice.rho_plus, base.1))?;
    let gy = develop(&leaf, base, (base.0, base.1 + 2.0 * slice.rho_minus))?;
    Ok(CrosscheckReport {
        samples: samples.len(),
        max_discrepancy: worst,
        max_discrepancy_conjugate_phase: worst_p,
        loop_x_increment: [gx[(1, 0)], gx[(2, 0)]],
        loop_y_increment: [gy[(1, 0)], gy[(2, 0)]],
    })
}

/// Distance of a loop increment from (Σ aₖ eₖ)v.
pub fn increment_error(inc: [Complex64; 2], a: [f64; 4], r: f64) -> f64 {
    let t = translation(a, r);
    ((inc[0] - t[0]).norm_sqr() + (inc[1] - t[1]).norm_sqr()).sqrt()
}
