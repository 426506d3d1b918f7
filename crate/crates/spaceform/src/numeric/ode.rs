//! Dormand-Prince 5(4) integrator with embedded error control.
//!
//! States are fixed-size arrays so that complex or matrix-valued systems
//! are flattened by the caller.

use super::{lit, Real};

/// Failure modes of [`Dopri5`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget of {steps} exhausted at t = {t}")]
    MaxSteps { t: f64, steps: usize },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

/// Accepted nodes of an integration, endpoints included.
#[derive(Debug, Clone)]
pub struct Trajectory<T, const N: usize> {
    pub ts: Vec<T>,
    pub ys: Vec<[T; N]>,
}

impl<T: Real, const N: usize> Trajectory<T, N> {
    pub fn last(&self) -> [T; N] {
        *self.ys.last().expect("trajectory has at least one node")
    }
}

/// Adaptive Dormand-Prince 5(4) stepper.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Upper bound on |h|; `None` leaves the step unbounded.
    pub h_max: Option<T>,
}

impl<T: Real> Default for Dopri5<T> {
    fn default() -> Self {
        Self::new(lit(1e-12), lit(1e-14))
    }
}

// Butcher tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl<T: Real> Dopri5<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Self { rtol, atol, max_steps: 1_000_000, h_max: None }
    }

    pub fn with_h_max(mut self, h: T) -> Self {
        self.h_max = Some(h);
        self
    }

    /// Integrates from `t0` to `t1` and returns the final state.
    pub fn integrate<F, const N: usize>(&self, f: F, t0: T, y0: [T; N], t1: T) -> Result<[T; N], OdeError>
    where
        F: FnMut(T, &[T; N]) -> [T; N],
    {
        self.run(f, t0, y0, t1, false).map(|tr| tr.last())
    }

    /// Integrates from `t0` to `t1`, keeping every accepted node.
    pub fn trajectory<F, const N: usize>(&self, f: F, t0: T, y0: [T; N], t1: T) -> Result<Trajectory<T, N>, OdeError>
    where
        F: FnMut(T, &[T; N]) -> [T; N],
    {
        self.run(f, t0, y0, t1, true)
    }

    fn run<F, const N: usize>(&self, mut f: F, t0: T, y0: [T; N], t1: T, record: bool) -> Result<Trajectory<T, N>, OdeError>
    where
        F: FnMut(T, &[T; N]) -> [T; N],
    {
        let mut traj = Trajectory { ts: vec![t0], ys: vec![y0] };
        let span = t1 - t0;
        if span == T::zero() {
            return Ok(traj);
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&y, &k1, span.abs()) * dir;
        let eps = T::epsilon();
        let five = lit::<T>(5.0);
        let mut steps = 0usize;
        let mut last_rejected = false;

        loop {
            if steps >= self.max_steps {
                return Err(OdeError::MaxSteps { t: t.to_f64().unwrap_or(f64::NAN), steps });
            }
            steps += 1;
            if let Some(hm) = self.h_max {
                if h.abs() > hm {
                    h = hm * dir;
                }
            }
            let remaining = t1 - t;
            let tiny_tail = remaining.abs() <= lit::<T>(1e3) * eps * t.abs().max(t1.abs());
            let last = tiny_tail || (h.abs() >= remaining.abs()) || (remaining.abs() - h.abs()).abs() <= eps * t1.abs();
            if last {
                h = remaining;
            }
            if !last && h.abs() < lit::<T>(16.0) * eps * t.abs().max(lit::<T>(1e-3) * span.abs()) {
                return Err(OdeError::StepUnderflow { t: t.to_f64().unwrap_or(f64::NAN) });
            }

            let mut k = [[T::zero(); N]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = lit::<T>(A[s][j]);
                    if a != T::zero() {
                        for i in 0..N {
                            ys[i] = ys[i] + h * a * kj[i];
                        }
                    }
                }
                k[s] = f(t + h * lit(C[s]), &ys);
            }
            // Stage 7 is evaluated at the fifth-order solution (FSAL).
            let mut y_new = y;
            for i in 0..N {
                let mut acc = T::zero();
                for s in 0..6 {
                    acc = acc + lit::<T>(A[6][s]) * k[s][i];
                }
                y_new[i] = y[i] + h * acc;
            }
            k[6] = f(t + h, &y_new);

            let mut err = T::zero();
            for i in 0..N {
                let mut e = T::zero();
                for s in 0..7 {
                    e = e + lit::<T>(E[s]) * k[s][i];
                }
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                let q = h * e / sc;
                err = err + q * q;
            }
            err = (err / lit(N.max(1) as f64)).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                // Shrink hard; a non-finite trial usually means the step overshot a singularity.
                if h.abs() < eps * lit(1e3) {
                    return Err(OdeError::NonFinite { t: t.to_f64().unwrap_or(f64::NAN) });
                }
                h = h * lit(0.1);
                last_rejected = true;
                continue;
            }

            if err <= T::one() {
                t = if last { t1 } else { t + h };
                y = y_new;
                k1 = k[6];
                if record || last {
                    traj.ts.push(t);
                    traj.ys.push(y);
                }
                if last {
                    if !record && traj.ts.len() > 2 {
                        traj.ts.drain(1..traj.ts.len() - 1);
                        traj.ys.drain(1..traj.ys.len() - 1);
                    }
                    return Ok(traj);
                }
                let mut fac = if err == T::zero() { five } else { lit::<T>(0.9) * err.powf(lit(-0.2)) };
                fac = fac.min(five).max(lit(0.2));
                if last_rejected {
                    fac = fac.min(T::one());
                }
                h = h * fac;
                last_rejected = false;
            } else {
                let fac = (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2));
                h = h * fac;
                last_rejected = true;
            }
        }
    }

    fn initial_step<const N: usize>(&self, y: &[T; N], dy: &[T; N], span: T) -> T {
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 = d0 + (y[i] / sc).powi(2);
            d1 = d1 + (dy[i] / sc).powi(2);
        }
        let h = if d0.sqrt() < lit(1e-5) || d1.sqrt() < lit(1e-5) {
            lit(1e-6)
        } else {
            lit::<T>(0.01) * (d0 / d1).sqrt()
        };
        // A tiny but nonzero state can make the ratio estimate absurdly small; the
        // controller shrinks from this floor if it is too large.
        let h = h.max(span * lit(1e-6)).min(span * lit(0.1));
        match self.h_max {
            Some(hm) => h.min(hm),
            None => h,
        }
    }
}
