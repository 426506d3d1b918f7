//! Per-θ elliptic machinery: the cubic p(λ, θ), its roots and half-periods,
//! the real profiles f and g with their primitives, the complex function ℘
//! and the degree-two map w.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::elliptic::carlson_rf;
use crate::numeric::ode::Dopri5;
use crate::numeric::quad;

/// Step used for every derivative in θ.
pub const THETA_STEP: f64 = 1e-4;
/// Smallest distance from a pole of ℘ that is still evaluated.
pub const POLE_MARGIN: f64 = 1e-3;

pub fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta.abs() < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::ThetaOutOfRange(theta))
    }
}

/// sec(θ)^e on the real branch.
pub fn sec_pow(theta: f64, e: f64) -> f64 {
    theta.cos().powf(-e)
}

/// p(λ, θ) = −2 tan θ + 12 sec^{2/3}θ λ − 64 λ³.
pub fn cubic(lambda: f64, theta: f64) -> f64 {
    -2.0 * theta.tan() + 12.0 * sec_pow(theta, 2.0 / 3.0) * lambda - 64.0 * lambda.powi(3)
}

/// Roots r1 < r2 < r3 of p(·, θ).
pub fn cubic_roots(theta: f64) -> Result<[f64; 3]> {
    check_theta(theta)?;
    let s = sec_pow(theta, 1.0 / 3.0);
    Ok([-1.0, 0.0, 1.0].map(|k| 0.5 * (theta / 3.0 + k * 2.0 * PI / 3.0).sin() * s))
}

/// Half-periods (ρ₊, ρ₋) from Carlson's R_F.
pub fn periods(theta: f64) -> Result<(f64, f64)> {
    let [r1, r2, r3] = cubic_roots(theta)?;
    let rf = |y, z| carlson_rf(0.0, y, z).ok_or_else(|| Error::InvalidArgument("R_F undefined".into()));
    Ok((0.25 * rf(r2 - r1, r3 - r1)?, 0.25 * rf(r3 - r2, r3 - r1)?))
}

/// Half-periods by adaptive quadrature after the substitution a = r + (s − r) sin²u,
/// which removes both endpoint singularities.
pub fn periods_by_quadrature(theta: f64) -> Result<(f64, f64)> {
    let [r1, r2, r3] = cubic_roots(theta)?;
    let plus = quad::integrate(|u: f64| 2.0 / (r2 + (r3 - r2) * u.sin().powi(2) - r1).sqrt(), 0.0, FRAC_PI_2, 1e-15, 1e-14)?;
    let minus = quad::integrate(|u: f64| 2.0 / (r3 - (r1 + (r2 - r1) * u.sin().powi(2))).sqrt(), 0.0, FRAC_PI_2, 1e-15, 1e-14)?;
    Ok((plus / 8.0, minus / 8.0))
}

/// c₁(θ) = 3 sec^{2/3}θ (1 − 4 sin²(θ/3)), the leading coefficient of f − g at the origin.
pub fn c1(theta: f64) -> f64 {
    3.0 * sec_pow(theta, 2.0 / 3.0) * (1.0 - 4.0 * (theta / 3.0).sin().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSlice {
    pub theta: f64,
    pub roots: [f64; 3],
    pub b: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
}

impl ThetaSlice {
    pub fn new(theta: f64) -> Result<Self> {
        let roots = cubic_roots(theta)?;
        let (rho_plus, rho_minus) = periods(theta)?;
        let b = ((roots[2] - roots[1]) * (roots[1] - roots[0])).sqrt();
        Ok(Self { theta, roots, b, rho_plus, rho_minus })
    }

    /// sec^{2/3}θ, the constant in the profile equations.
    pub fn a(&self) -> f64 {
        sec_pow(self.theta, 2.0 / 3.0)
    }

    pub fn cubic(&self, lambda: f64) -> f64 {
        cubic(lambda, self.theta)
    }

    pub fn r2(&self) -> f64 {
        self.roots[1]
    }
}

/// Evenly spaced θ values `a:b:n`, endpoints included.
pub fn theta_range(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("theta range needs at least one point".into()));
    }
    let out: Vec<f64> = if n == 1 { vec![a] } else { (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect() };
    for &t in &out {
        check_theta(t)?;
    }
    Ok(out)
}

pub fn tabulate(thetas: &[f64]) -> Result<Vec<ThetaSlice>> {
    thetas.iter().map(|&t| ThetaSlice::new(t)).collect()
}

pub fn write_table<W: Write>(rows: &[ThetaSlice], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theta,r1,r2,r3,rho_plus,rho_minus")?;
    for s in rows {
        writeln!(out, "{},{},{},{},{},{}", s.theta, s.roots[0], s.roots[1], s.roots[2], s.rho_plus, s.rho_minus)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// f(x, θ): f'' = 6A − 96 f², oscillating in [r2, r3].
    X,
    /// g(y, θ): g'' = −6A + 96 g², oscillating in [r1, r2].
    Y,
}

impl Axis {
    fn sign(self) -> f64 {
        match self {
            Axis::X => 1.0,
            Axis::Y => -1.0,
        }
    }
}

/// Value, derivative and primitive (4 times the integral from 0) of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileValue {
    pub value: f64,
    pub derivative: f64,
    pub primitive: f64,
}

fn integrator() -> Dopri5<f64> {
    Dopri5::new(1e-12, 1e-14)
}

fn profile_rhs(a: f64, sign: f64) -> impl FnMut(f64, &[f64; 3]) -> [f64; 3] {
    move |_, u| [u[1], sign * (6.0 * a - 96.0 * u[0] * u[0]), 4.0 * u[0]]
}

/// Integrates the profile ODE directly from 0 to `x` without periodic reduction.
pub fn integrate_profile(slice: &ThetaSlice, axis: Axis, x: f64) -> Result<ProfileValue> {
    let u = integrator().integrate(profile_rhs(slice.a(), axis.sign()), 0.0, [slice.r2(), 0.0, 0.0], x)?;
    Ok(ProfileValue { value: u[0], derivative: u[1], primitive: u[2] })
}

/// First positive zero of the profile derivative, located by Newton steps on a bracket.
pub fn first_turning_point(slice: &ThetaSlice, axis: Axis) -> Result<f64> {
    let guess = match axis {
        Axis::X => slice.rho_plus,
        Axis::Y => slice.rho_minus,
    };
    let rhs = profile_rhs(slice.a(), axis.sign());
    let dt = guess / 64.0;
    let mut t = dt;
    let mut u = integrator().integrate(rhs, 0.0, [slice.r2(), 0.0, 0.0], t)?;
    let s0 = u[1].signum();
    while u[1].signum() == s0 {
        let next = integrator().integrate(profile_rhs(slice.a(), axis.sign()), t, u, t + dt)?;
        if next[1].signum() != s0 {
            break;
        }
        t += dt;
        u = next;
        if t > 4.0 * guess {
            return Err(Error::InvalidArgument("profile derivative has no zero".into()));
        }
    }
    // Newton from the bracket start; f'' is available from the equation.
    let (mut x, mut state) = (t, u);
    for _ in 0..50 {
        let fpp = axis.sign() * (6.0 * slice.a() - 96.0 * state[0] * state[0]);
        let step = -state[1] / fpp;
        if step.abs() < 1e-15 {
            break;
        }
        state = integrator().integrate(profile_rhs(slice.a(), axis.sign()), x, state, x + step)?;
        x += step;
    }
    Ok(x)
}

/// A profile f or g at fixed θ, stored on nodes over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub axis: Axis,
    pub slice: ThetaSlice,
    /// Full period 2ρ.
    pub period: f64,
    nodes: Vec<[f64; 3]>,
}

const PROFILE_NODES: usize = 64;

impl Profile {
    pub fn new(slice: ThetaSlice, axis: Axis) -> Result<Self> {
        let period = 2.0 * match axis {
            Axis::X => slice.rho_plus,
            Axis::Y => slice.rho_minus,
        };
        let dx = period / PROFILE_NODES as f64;
        let mut nodes = Vec::with_capacity(PROFILE_NODES + 1);
        let mut u = [slice.r2(), 0.0, 0.0];
        nodes.push(u);
        for k in 0..PROFILE_NODES {
            u = integrator().integrate(profile_rhs(slice.a(), axis.sign()), k as f64 * dx, u, (k + 1) as f64 * dx)?;
            nodes.push(u);
        }
        Ok(Self { axis, slice, period, nodes })
    }

    /// Primitive increment over one period.
    pub fn jump(&self) -> f64 {
        self.nodes[PROFILE_NODES][2]
    }

    pub fn eval(&self, x: f64) -> Result<ProfileValue> {
        let n = (x / self.period).floor();
        let xr = x - n * self.period;
        let dx = self.period / PROFILE_NODES as f64;
        let k = ((xr / dx).round() as usize).min(PROFILE_NODES);
        let x0 = k as f64 * dx;
        let start = self.nodes[k];
        let u = if (xr - x0).abs() < 1e-300 {
            start
        } else {
            integrator().integrate(profile_rhs(self.slice.a(), self.axis.sign()), x0, start, xr)?
        };
        Ok(ProfileValue { value: u[0], derivative: u[1], primitive: u[2] + n * self.jump() })
    }

    /// Residual of the first integral: f_x² − p(f) for X, g_y² + p(g) for Y.
    pub fn first_integral_residual(&self, x: f64) -> Result<f64> {
        let v = self.eval(x)?;
        Ok(v.derivative * v.derivative - self.axis.sign() * self.slice.cubic(v.value))
    }
}

pub fn solve_f(theta: f64) -> Result<Profile> {
    Profile::new(ThetaSlice::new(theta)?, Axis::X)
}

pub fn solve_g(theta: f64) -> Result<Profile> {
    Profile::new(ThetaSlice::new(theta)?, Axis::Y)
}

/// F or G as a function of its argument at fixed θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub profile: Profile,
}

impl Primitive {
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.profile.eval(x)?.primitive)
    }

    /// F(x + period) − F(x).
    pub fn jump(&self) -> f64 {
        self.profile.jump()
    }
}

pub fn primitives(theta: f64) -> Result<(Primitive, Primitive)> {
    Ok((Primitive { profile: solve_f(theta)? }, Primitive { profile: solve_g(theta)? }))
}

/// The integration-free expression
/// [6 cos^{2/3}θ (f_θ − r₂′) + 8 (f² − r₂²)] / f_x, with θ-derivatives by central differences.
/// The same expression in g gives G.
pub fn primitive_closed_form(axis: Axis, x: f64, theta: f64) -> Result<f64> {
    let h = THETA_STEP;
    let at = |t: f64| Profile::new(ThetaSlice::new(t)?, axis);
    let (p0, pp, pm) = (at(theta)?, at(theta + h)?, at(theta - h)?);
    let v = p0.eval(x)?;
    let f_theta = (pp.eval(x)?.value - pm.eval(x)?.value) / (2.0 * h);
    let r2p = (cubic_roots(theta + h)?[1] - cubic_roots(theta - h)?[1]) / (2.0 * h);
    let r2 = p0.slice.r2();
    Ok((6.0 * theta.cos().powf(2.0 / 3.0) * (f_theta - r2p) + 8.0 * (v.value * v.value - r2 * r2)) / v.derivative)
}

/// −12 ρ′ cos^{2/3}θ for the half-period belonging to `axis`.
pub fn pseudo_period_jump(axis: Axis, theta: f64) -> Result<f64> {
    let h = THETA_STEP;
    let pick = |t: f64| -> Result<f64> {
        let (p, m) = periods(t)?;
        Ok(if axis == Axis::X { p } else { m })
    };
    let d = (pick(theta + h)? - pick(theta - h)?) / (2.0 * h);
    Ok(-12.0 * d * theta.cos().powf(2.0 / 3.0))
}

/// ℘(z, θ) and ℘_z(z, θ).
pub fn weierstrass_p(z: Complex64, theta: f64) -> Result<(Complex64, Complex64)> {
    weierstrass_p_at(&ThetaSlice::new(theta)?, z)
}

fn reduce(v: f64, half: f64) -> f64 {
    v - 2.0 * half * (v / (2.0 * half)).round()
}

/// Straight-path integration of U'' = z²(6A − 96U²) from 0 to 1, U(s) = ℘(sz).
fn p_from_origin(slice: &ThetaSlice, z: Complex64) -> Result<(Complex64, Complex64)> {
    if z.norm() == 0.0 {
        return Ok((Complex64::new(slice.r2(), 0.0), Complex64::new(0.0, 0.0)));
    }
    let a = slice.a();
    let z2 = z * z;
    let u = integrator().integrate(
        |_, u: &[f64; 4]| {
            let p = Complex64::new(u[0], u[1]);
            let acc = z2 * (6.0 * a - 96.0 * p * p);
            [u[2], u[3], acc.re, acc.im]
        },
        0.0,
        [slice.r2(), 0.0, 0.0, 0.0],
        1.0,
    )?;
    Ok((Complex64::new(u[0], u[1]), Complex64::new(u[2], u[3]) / z))
}

pub fn weierstrass_p_at(slice: &ThetaSlice, z: Complex64) -> Result<(Complex64, Complex64)> {
    let (rp, rm) = (slice.rho_plus, slice.rho_minus);
    let zr = Complex64::new(reduce(z.re, rp), reduce(z.im, rm));
    let corner = Complex64::new(rp.copysign(zr.re), rm.copysign(zr.im));
    let distance = (zr - corner).norm();
    if distance < POLE_MARGIN {
        return Err(Error::PoleProximity { distance });
    }
    if zr.re.abs() > 0.5 * rp && zr.im.abs() > 0.5 * rm {
        // Half-period addition across the pole at the corner.
        let [r1, r2, r3] = slice.roots;
        let k = (r2 - r1) * (r2 - r3);
        let (p, dp) = p_from_origin(slice, zr - corner)?;
        let d = p - r2;
        Ok((r2 + k / d, -k * dp / (d * d)))
    } else {
        p_from_origin(slice, zr)
    }
}

/// w(z, θ) = (℘(z/2) − r₂)/b and w_z.
pub fn w_map(z: Complex64, theta: f64) -> Result<(Complex64, Complex64)> {
    w_map_at(&ThetaSlice::new(theta)?, z)
}

pub fn w_map_at(slice: &ThetaSlice, z: Complex64) -> Result<(Complex64, Complex64)> {
    let (p, dp) = weierstrass_p_at(slice, z / 2.0)?;
    Ok(((p - slice.r2()) / slice.b, dp / (2.0 * slice.b)))
}

/// The centre ρ₊ + iρ₋ of the fundamental rectangle.
pub fn center(slice: &ThetaSlice) -> Complex64 {
    Complex64::new(slice.rho_plus, slice.rho_minus)
}

/// w_z at the centre, checked against the branch 4√(3r₂ + 2bi) with positive imaginary part.
pub fn center_derivative(slice: &ThetaSlice) -> Result<Complex64> {
    let (_, wz) = w_map_at(slice, center(slice))?;
    let expected = 4.0 * Complex64::new(3.0 * slice.r2(), 2.0 * slice.b).sqrt();
    if (wz - expected).norm() > (wz + expected).norm() {
        return Err(Error::BranchDiscontinuity { re: wz.re, im: wz.im });
    }
    Ok(wz)
}

/// Gauss curvature of (f − g)(dx² + dy²) at (x, y) by a five-point Laplacian of log(f − g).
pub fn conformal_curvature(f: &Profile, g: &Profile, x: f64, y: f64, h: f64) -> Result<f64> {
    let gap = |dx: f64, dy: f64| -> Result<f64> { Ok(f.eval(x + dx)?.value - g.eval(y + dy)?.value) };
    let l0 = gap(0.0, 0.0)?;
    let lap = (gap(h, 0.0)?.ln() + gap(-h, 0.0)?.ln() + gap(0.0, h)?.ln() + gap(0.0, -h)?.ln() - 4.0 * l0.ln()) / (h * h);
    Ok(-lap / (2.0 * l0))
}
