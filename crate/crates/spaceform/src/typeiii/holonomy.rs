//! Holonomy of the flat coframe around the two generating loops of the θ = 0 leaf.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ThetaLeaf;
use crate::error::Result;
use crate::numeric::linalg::Mat3;
use crate::numeric::ode::Dopri5;
use crate::numeric::quad;
use crate::weierstrass::{cubic_roots, periods, sec_pow};

type CMat3 = Mat3<f64>;

const S3: f64 = 1.732_050_807_568_877_2;
const V_TOP: f64 = S3 / 2.0;
const V_BOTTOM: f64 = S3 / 4.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The quartic P(v) = 64 v (√3/2 − v)(v − √3/4) and its derivative.
pub fn v_quartic(v: f64) -> (f64, f64) {
    let p = 64.0 * v * (V_TOP - v) * (v - V_BOTTOM);
    let dp = 64.0 * ((V_TOP - v) * (v - V_BOTTOM) - v * (v - V_BOTTOM) + v * (V_TOP - v));
    (p, dp)
}

fn v_rhs(_: f64, u: &[f64; 2]) -> [f64; 2] {
    [u[1], 0.5 * v_quartic(u[0]).1]
}

fn integrator() -> Dopri5<f64> {
    Dopri5::new(1e-12, 1e-14)
}

/// v(t) = f(t + ρ₀, 0) + √3/4, solving v'' = P'(v)/2 with v(0) = √3/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VProfile {
    pub rho0: f64,
    nodes: Vec<[f64; 2]>,
}

const V_NODES: usize = 64;

impl VProfile {
    pub fn period(&self) -> f64 {
        2.0 * self.rho0
    }

    /// (v, v') at t.
    pub fn eval(&self, t: f64) -> Result<[f64; 2]> {
        let per = self.period();
        let tr = t - per * (t / per).floor();
        let dt = per / V_NODES as f64;
        let k = ((tr / dt).round() as usize).min(V_NODES);
        Ok(integrator().integrate(v_rhs, k as f64 * dt, self.nodes[k], tr)?)
    }
}

pub fn v_profile() -> Result<VProfile> {
    let rho0 = periods(0.0)?.0;
    let dt = 2.0 * rho0 / V_NODES as f64;
    let mut u = [V_TOP, 0.0];
    let mut nodes = vec![u];
    for k in 0..V_NODES {
        u = integrator().integrate(v_rhs, k as f64 * dt, u, (k + 1) as f64 * dt)?;
        nodes.push(u);
    }
    Ok(VProfile { rho0, nodes })
}

/// State of the reduced loop system at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSample {
    pub t: f64,
    pub v: f64,
    pub phi: f64,
    pub u1: f64,
    pub u2: f64,
}

/// Integrates φ' = 2√v, u₁' = sin φ · v^e, u₂' = cos φ · v^e over [0, 2ρ₀]
/// and returns the states at `samples + 1` equally spaced abscissae.
pub fn reduced_system(exponent: f64, samples: usize) -> Result<Vec<AngleSample>> {
    let rho0 = periods(0.0)?.0;
    let n = samples.max(1);
    let dt = 2.0 * rho0 / n as f64;
    let rhs = move |_: f64, u: &[f64; 5]| {
        let (v, phi) = (u[0], u[2]);
        let ve = v.powf(exponent);
        [u[1], 0.5 * v_quartic(v).1, 2.0 * v.sqrt(), phi.sin() * ve, phi.cos() * ve]
    };
    let mut u = [V_TOP, 0.0, 0.0, 0.0, 0.0];
    let mut out = vec![AngleSample { t: 0.0, v: u[0], phi: 0.0, u1: 0.0, u2: 0.0 }];
    for k in 0..n {
        let t1 = (k + 1) as f64 * dt;
        u = integrator().integrate(rhs, k as f64 * dt, u, t1)?;
        out.push(AngleSample { t: t1, v: u[0], phi: u[2], u1: u[3], u2: u[4] });
    }
    Ok(out)
}

/// Solves g' = g·A(t), g(0) = I over [0, len].
pub fn transport<F>(mut a: F, len: f64) -> Result<CMat3>
where
    F: FnMut(f64) -> Result<CMat3>,
{
    let mut err = None;
    let rhs = |t: f64, y: &[f64; 18]| {
        let mut g = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                g.e[i][j] = c(y[6 * i + 2 * j], y[6 * i + 2 * j + 1]);
            }
        }
        let am = match a(t) {
            Ok(m) => m,
            Err(e) => {
                err.get_or_insert(e);
                Mat3::zero()
            }
        };
        let d = g * am;
        let mut out = [0.0; 18];
        for i in 0..3 {
            for j in 0..3 {
                out[6 * i + 2 * j] = d.e[i][j].re;
                out[6 * i + 2 * j + 1] = d.e[i][j].im;
            }
        }
        out
    };
    let mut y0 = [0.0; 18];
    for i in 0..3 {
        y0[6 * i + 2 * i] = 1.0;
    }
    let y = Dopri5::new(1e-11, 1e-13).integrate(rhs, 0.0, y0, len)?;
    if let Some(e) = err {
        return Err(e);
    }
    let mut g = Mat3::zero();
    for i in 0..3 {
        for j in 0..3 {
            g.e[i][j] = c(y[6 * i + 2 * j], y[6 * i + 2 * j + 1]);
        }
    }
    Ok(g)
}

/// Developing map along the straight segment from `from` to `to` in the leaf.
pub fn develop(leaf: &ThetaLeaf, from: (f64, f64), to: (f64, f64)) -> Result<CMat3> {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    transport(
        |t| {
            let g = leaf.coframe(from.0 + t * dx, from.1 + t * dy)?.gamma;
            Ok(g[0].scale_re(dx) + g[1].scale_re(dy))
        },
        1.0,
    )
}

/// Holonomy of the coframe along X(t) = (ρ₀ + t, ρ₀) and Y(t) = (ρ₀, ρ₀ + t), t ∈ [0, 2ρ₀], at θ = 0.
pub fn loop_holonomies(leaf: &ThetaLeaf) -> Result<(CMat3, CMat3)> {
    let rho0 = leaf.slice.rho_plus;
    let hx = transport(|t| Ok(leaf.coframe(rho0 + t, rho0)?.gamma[0]), 2.0 * rho0)?;
    let hy = transport(|t| Ok(leaf.coframe(rho0, rho0 + t)?.gamma[1]), 2.0 * rho0)?;
    Ok((hx, hy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyData {
    pub rho0: f64,
    /// u₁(2ρ₀).
    pub r: f64,
    /// u₂(2ρ₀), equal to r by the symmetry of v.
    pub r_u2: f64,
    /// φ(2ρ₀).
    pub angle_end: f64,
    pub h_x: CMat3,
    pub h_y: CMat3,
    pub angle_profile: Vec<AngleSample>,
}

pub fn holonomy() -> Result<HolonomyData> {
    let prof = reduced_system(-0.25, 32)?;
    let end = *prof.last().expect("non-empty profile");
    let leaf = ThetaLeaf::new(0.0)?;
    let (h_x, h_y) = loop_holonomies(&leaf)?;
    Ok(HolonomyData {
        rho0: leaf.slice.rho_plus,
        r: end.u1,
        r_u2: end.u2,
        angle_end: end.phi,
        h_x,
        h_y,
        angle_profile: prof,
    })
}

/// [[1,0,0],[r,0,1],[r,−1,0]].
pub fn block_h_x(r: f64) -> CMat3 {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    Mat3::from_rows([[o, z, z], [c(r, 0.0), z, o], [c(r, 0.0), -o, z]])
}

/// [[1,0,0],[−ir,0,−i],[r,−i,0]].
pub fn block_h_y(r: f64) -> CMat3 {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    Mat3::from_rows([[o, z, z], [-i * r, z, -i], [c(r, 0.0), -i, z]])
}

/// Holonomy of the alternate loop pullbacks, whose lower-left entry is v^{−1/4} dt
/// on both loops and whose rotation block is 2√v (real) on X and −2i√v on Y.
pub fn alternate_pullback_holonomy(vp: &VProfile) -> Result<(CMat3, CMat3)> {
    let len = vp.period();
    let build = |t: f64, ybranch: bool| -> Result<CMat3> {
        let v = vp.eval(t)?[0];
        let (q, s) = (v.powf(-0.25), 2.0 * v.sqrt());
        let z = c(0.0, 0.0);
        let (m12, m21) = if ybranch { (c(0.0, -s), c(0.0, -s)) } else { (c(s, 0.0), c(-s, 0.0)) };
        Ok(Mat3::from_rows([[z; 3], [z, z, m12], [c(q, 0.0), m21, z]]))
    };
    Ok((transport(|t| build(t, false), len)?, transport(|t| build(t, true), len)?))
}

/// m(θ) = ∫₀^θ ⅙ (r₃ − r₁)^{1/4} sec^{2/3} by adaptive quadrature.
pub fn m_function(theta: f64) -> Result<f64> {
    crate::weierstrass::check_theta(theta)?;
    Ok(quad::integrate(m_integrand, 0.0, theta, 1e-15, 1e-14)?)
}

/// m(θ) by a composite Gauss-Legendre rule of the given order.
pub fn m_function_fixed(theta: f64, panels: usize, order: usize) -> Result<f64> {
    crate::weierstrass::check_theta(theta)?;
    Ok(quad::gauss_legendre(m_integrand, 0.0, theta, panels, order))
}

pub fn m_integrand(t: f64) -> f64 {
    let r = cubic_roots(t).expect("theta checked by caller");
    (r[2] - r[0]).powf(0.25) * sec_pow(t, 2.0 / 3.0) / 6.0
}

/// φ(2ρ₀) − π/2.
pub fn turning_defect(h: &HolonomyData) -> f64 {
    h.angle_end - FRAC_PI_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{is_group_element, SpaceFormParams};
    use crate::weierstrass::{Axis, Profile, ThetaSlice};

    #[test]
    fn v_profile_examples() {
        let vp = v_profile().unwrap();
        assert_eq!(vp.eval(0.0).unwrap()[0], V_TOP);
        assert!((vp.eval(vp.rho0).unwrap()[0] - V_BOTTOM).abs() < 1e-9);
        assert!((vp.rho0 - 0.498083225).abs() < 1e-6);
        let f = Profile::new(ThetaSlice::new(0.0).unwrap(), Axis::X).unwrap();
        for t in [0.05, 0.3, 0.61, 0.9] {
            let v = vp.eval(t).unwrap()[0];
            assert!((V_BOTTOM..=V_TOP).contains(&v));
            assert!((v - vp.eval(-t).unwrap()[0]).abs() < 1e-12);
            assert!((v - vp.eval(2.0 * vp.rho0 - t).unwrap()[0]).abs() < 1e-10);
            assert!((v - f.eval(t + vp.rho0).unwrap().value - V_BOTTOM).abs() < 1e-10);
            let (p, _) = v_quartic(v);
            assert!((vp.eval(t).unwrap()[1].powi(2) - p).abs() < 1e-9);
        }
    }

    #[test]
    fn period_of_v_from_turning_point() {
        // v' changes sign at ρ₀ and again at 2ρ₀.
        let vp = v_profile().unwrap();
        let d = |t: f64| vp.eval(t).unwrap()[1];
        assert!(d(vp.rho0 - 1e-3) < 0.0 && d(vp.rho0 + 1e-3) > 0.0);
        assert!((vp.eval(2.0 * vp.rho0).unwrap()[0] - V_TOP).abs() < 1e-8);
    }

    #[test]
    fn angle_profile_symmetry() {
        let prof = reduced_system(-0.25, 20).unwrap();
        let end = prof[20];
        assert!((end.phi - FRAC_PI_2).abs() < 1e-8);
        assert!((end.u1 - end.u2).abs() < 1e-8);
        for k in 0..=20 {
            assert!((prof[k].phi + prof[20 - k].phi - FRAC_PI_2).abs() < 1e-8);
        }
    }

    /// The reference value of r is reproduced by the exponent +1/4; the coframe's own
    /// normalization has −1/4 (see `holonomy_matches_coframe`).
    #[test]
    fn r_under_alternative_exponent() {
        let alt = reduced_system(0.25, 8).unwrap()[8];
        assert!((alt.u1 - 0.565201447).abs() < 1e-8, "{}", alt.u1);
        let own = reduced_system(-0.25, 8).unwrap()[8];
        assert!((own.u1 - 0.7301872).abs() < 1e-6, "{}", own.u1);
    }

    #[test]
    fn holonomy_matches_coframe() {
        let h = holonomy().unwrap();
        assert!((h.h_x - block_h_x(h.r)).max_abs() < 1e-6);
        // Y loop of the coframe itself: q = −j, translation (−i + k)v.
        let i = c(0.0, 1.0);
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        let want_y = Mat3::from_rows([[o, z, z], [c(-h.r, 0.0), z, i], [i * h.r, i, z]]);
        assert!((h.h_y - want_y).max_abs() < 1e-6);
        let p0 = SpaceFormParams::new(0.0);
        assert!(is_group_element(&h.h_x, p0, 1e-8) && is_group_element(&h.h_y, p0, 1e-8));
    }

    #[test]
    fn alternate_pullbacks_reproduce_block_forms() {
        let vp = v_profile().unwrap();
        let r = reduced_system(-0.25, 4).unwrap()[4].u1;
        let (hx, hy) = alternate_pullback_holonomy(&vp).unwrap();
        assert!((hx - block_h_x(r)).max_abs() < 1e-8);
        assert!((hy - block_h_y(r)).max_abs() < 1e-8);
    }

    #[test]
    fn block_forms_have_order_four() {
        for r in [0.565201447, 0.7301872] {
            let id = Mat3::identity();
            assert!((block_h_x(r).powi(4) - id).max_abs() < 1e-9);
            assert!((block_h_y(r).powi(4) - id).max_abs() < 1e-9);
        }
    }

    #[test]
    fn m_examples() {
        assert_eq!(m_function(0.0).unwrap(), 0.0);
        let a = m_function(0.3).unwrap();
        let b = m_function_fixed(0.3, 4, 10).unwrap();
        let c = m_function_fixed(0.3, 8, 12).unwrap();
        assert!((a - b).abs() < 1e-10 && (b - c).abs() < 1e-10);
        assert!(m_function(0.6).unwrap() > a && a > 0.0);
        assert!(m_function(-0.3).unwrap() < 0.0);
    }
}
