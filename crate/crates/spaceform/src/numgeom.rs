//! Finite-difference verification of Levi-flatness and minimality using only
//! the ambient chart metric.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Domain, Hypersurface, HypersurfacePatch};
use crate::numeric::halton::halton;
use crate::space::{kahler_christoffel, kahler_metric, metric_dot, Herm2};

type C2 = [Complex64; 2];
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Finite-difference steps for first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub first: f64,
    pub second: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self { first: 1e-4, second: 1e-3 }
    }
}

impl FdSteps {
    pub fn scaled(&self, f: f64) -> Self {
        Self { first: self.first * f, second: self.second * f }
    }
}

/// Largest induced-metric condition number accepted before a sample is called degenerate.
pub const MAX_CONDITION: f64 = 1e8;

fn chart_vec<S: Hypersurface + ?Sized>(s: &S, u: [f64; 3]) -> Result<C2> {
    let q = s.chart(Complex64::new(u[0], u[1]), u[2])?;
    Ok([q.z1, q.z2])
}

fn add(a: C2, b: C2) -> C2 {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: C2, b: C2) -> C2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn scale(a: C2, s: Complex64) -> C2 {
    [a[0] * s, a[1] * s]
}

fn to_real(v: C2) -> [f64; 4] {
    [v[0].re, v[0].im, v[1].re, v[1].im]
}

fn from_real(v: [f64; 4]) -> C2 {
    [Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])]
}

fn shifted(u: [f64; 3], i: usize, d: f64) -> [f64; 3] {
    let mut v = u;
    v[i] += d;
    v
}

/// Real 4x4 Gram matrix of the ambient metric in the basis (x1, y1, x2, y2).
fn real_metric(h: &Herm2<f64>) -> [[f64; 4]; 4] {
    let basis: [C2; 4] = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [I, Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        [Complex64::new(0.0, 0.0), I],
    ];
    let mut g = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            g[a][b] = metric_dot(h, &basis[a], &basis[b]);
        }
    }
    g
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut s = b[row];
        for k in row + 1..N {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> [f64; N] {
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..N {
            for j in 0..N {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        let diag: f64 = (0..N).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev = [0.0; N];
    for i in 0..N {
        ev[i] = a[i][i];
    }
    ev
}

/// Mean curvature (trace of the second fundamental form over 3) at the chart image of (w, r).
pub fn mean_curvature<S: Hypersurface + ?Sized>(s: &S, w: Complex64, r: f64, h: FdSteps) -> Result<f64> {
    let u = [w.re, w.im, r];
    let params = s.params();
    let x0 = chart_vec(s, u)?;
    let p = crate::space::ChartPoint::new(x0[0], x0[1]);
    let hm = kahler_metric(&p, params)?;
    let gam = kahler_christoffel(&p, params)?;

    let (h1, h2) = (h.first, h.second);
    let mut t = [[Complex64::new(0.0, 0.0); 2]; 3];
    for (i, ti) in t.iter_mut().enumerate() {
        let d = sub(chart_vec(s, shifted(u, i, h1))?, chart_vec(s, shifted(u, i, -h1))?);
        *ti = scale(d, Complex64::new(0.5 / h1, 0.0));
    }
    let mut xx = [[[Complex64::new(0.0, 0.0); 2]; 3]; 3];
    for i in 0..3 {
        let p1 = chart_vec(s, shifted(u, i, h2))?;
        let m1 = chart_vec(s, shifted(u, i, -h2))?;
        let d = sub(add(p1, m1), scale(x0, Complex64::new(2.0, 0.0)));
        xx[i][i] = scale(d, Complex64::new(1.0 / (h2 * h2), 0.0));
        for j in i + 1..3 {
            let pp = chart_vec(s, shifted(shifted(u, i, h2), j, h2))?;
            let pm = chart_vec(s, shifted(shifted(u, i, h2), j, -h2))?;
            let mp = chart_vec(s, shifted(shifted(u, i, -h2), j, h2))?;
            let mm = chart_vec(s, shifted(shifted(u, i, -h2), j, -h2))?;
            let d = add(sub(sub(pp, pm), mp), mm);
            xx[i][j] = scale(d, Complex64::new(0.25 / (h2 * h2), 0.0));
            xx[j][i] = xx[i][j];
        }
    }

    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = metric_dot(&hm, &t[i], &t[j]);
        }
    }
    let ev = symmetric_eigenvalues(g);
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Degenerate { condition: cond });
    }

    // Euclidean cross product of the three tangent vectors in R^4, raised with the ambient metric.
    let tr = t.map(to_real);
    let mut nu = [0.0; 4];
    for k in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != k).collect();
        let mut m = [[0.0; 3]; 3];
        for (row, tv) in tr.iter().enumerate() {
            for (ci, &cidx) in cols.iter().enumerate() {
                m[row][ci] = tv[cidx];
            }
        }
        nu[k] = if k % 2 == 0 { det3(m) } else { -det3(m) };
    }
    let gr = real_metric(&hm);
    let n = solve(gr, nu).ok_or(Error::Degenerate { condition: f64::INFINITY })?;
    let nn: f64 = (0..4).map(|a| (0..4).map(|b| n[a] * gr[a][b] * n[b]).sum::<f64>()).sum();
    let n = from_real(n.map(|v| v / nn.sqrt()));

    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut cov = xx[i][j];
            for l in 0..2 {
                for a in 0..2 {
                    for m in 0..2 {
                        cov[l] += gam[l][a][m] * t[i][a] * t[j][m];
                    }
                }
            }
            b[i][j] = metric_dot(&hm, &cov, &n);
        }
    }
    let ginv = invert3(g).ok_or(Error::Degenerate { condition: cond })?;
    let mut tr_b = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            tr_b += ginv[i][j] * b[i][j];
        }
    }
    Ok(tr_b / 3.0)
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let d = det3(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
        }
    }
    Some(inv)
}

fn leaf_derivatives<S: Hypersurface + ?Sized>(s: &S, w: Complex64, r: f64, h: f64) -> Result<(Herm2<f64>, C2, C2)> {
    let u = [w.re, w.im, r];
    let x0 = chart_vec(s, u)?;
    let hm = kahler_metric(&crate::space::ChartPoint::new(x0[0], x0[1]), s.params())?;
    let k = Complex64::new(0.5 / h, 0.0);
    let dx = scale(sub(chart_vec(s, shifted(u, 0, h))?, chart_vec(s, shifted(u, 0, -h))?), k);
    let dy = scale(sub(chart_vec(s, shifted(u, 1, h))?, chart_vec(s, shifted(u, 1, -h))?), k);
    Ok((hm, dx, dy))
}

/// Metric norm of the anti-holomorphic derivative of the leaf through (w, r).
pub fn levi_defect<S: Hypersurface + ?Sized>(s: &S, w: Complex64, r: f64, h: f64) -> Result<f64> {
    let (hm, dx, dy) = leaf_derivatives(s, w, r, h)?;
    let dbar = scale(add(dx, scale(dy, I)), Complex64::new(0.5, 0.0));
    Ok(metric_dot(&hm, &dbar, &dbar).max(0.0).sqrt())
}

/// Relative distance of J(d/dx) from the leaf tangent plane span(d/dx, d/dy).
pub fn j_invariance_defect<S: Hypersurface + ?Sized>(s: &S, w: Complex64, r: f64, h: f64) -> Result<f64> {
    let (hm, dx, dy) = leaf_derivatives(s, w, r, h)?;
    let jx = scale(dx, I);
    let g = [[metric_dot(&hm, &dx, &dx), metric_dot(&hm, &dx, &dy)], [metric_dot(&hm, &dy, &dx), metric_dot(&hm, &dy, &dy)]];
    let rhs = [metric_dot(&hm, &jx, &dx), metric_dot(&hm, &jx, &dy)];
    let c = solve(g, rhs).ok_or(Error::Degenerate { condition: f64::INFINITY })?;
    let proj = add(scale(dx, Complex64::new(c[0], 0.0)), scale(dy, Complex64::new(c[1], 0.0)));
    let res = sub(jx, proj);
    Ok((metric_dot(&hm, &res, &res).max(0.0) / g[0][0]).sqrt())
}

/// Gauss curvature of the leaf r = const at w, from the conformal factor
/// lambda = |d/dw|^2: K = -Laplacian(log lambda) / (2 lambda).
pub fn leaf_gauss_curvature<S: Hypersurface + ?Sized>(s: &S, w: Complex64, r: f64, h: FdSteps) -> Result<f64> {
    let lam = |z: Complex64| -> Result<f64> {
        let (hm, dx, _) = leaf_derivatives(s, z, r, h.first)?;
        Ok(metric_dot(&hm, &dx, &dx))
    };
    let l0 = lam(w)?;
    if !(l0 > 0.0) {
        return Err(Error::Degenerate { condition: f64::INFINITY });
    }
    let k = h.second;
    let mut lap = -4.0 * l0.ln();
    for d in [Complex64::new(k, 0.0), Complex64::new(-k, 0.0), Complex64::new(0.0, k), Complex64::new(0.0, -k)] {
        lap += lam(w + d)?.ln();
    }
    lap /= k * k;
    Ok(-lap / (2.0 * l0))
}

/// A quasi-random sample plan: `n_w` Halton points in the w-rectangle on each of `n_r` leaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub n_w: usize,
    pub n_r: usize,
    pub seed: u64,
}

impl SampleGrid {
    pub fn new(n_w: usize, n_r: usize, seed: u64) -> Result<Self> {
        if n_w < 2 || n_r < 2 {
            return Err(Error::InvalidArgument(format!("grid {n_w}x{n_r}: sizes must be at least 2")));
        }
        Ok(Self { n_w, n_r, seed })
    }

    /// Parses `AxB`.
    pub fn parse(s: &str, seed: u64) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::InvalidArgument(format!("grid '{s}' is not of the form AxB")))?;
        let p = |v: &str| v.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("grid '{s}' is not of the form AxB")));
        Self::new(p(a)?, p(b)?, seed)
    }

    pub fn spec(&self) -> String {
        format!("{}x{}", self.n_w, self.n_r)
    }

    /// Sample points inside `domain`, kept `margin` away from its boundary.
    pub fn points(&self, domain: &Domain, margin: f64) -> Vec<(Complex64, f64)> {
        let shrink = |[lo, hi]: [f64; 2]| {
            let m = margin.min(0.25 * (hi - lo));
            [lo + m, hi - m]
        };
        let d = Domain { re_w: shrink(domain.re_w), im_w: shrink(domain.im_w), r: shrink(domain.r) };
        let mut out = Vec::with_capacity(self.n_w * self.n_r);
        for j in 0..self.n_r {
            let t = j as f64 / (self.n_r - 1) as f64;
            for i in 0..self.n_w {
                let [a, b] = halton::<2>(self.seed, i as u64);
                out.push(d.at([a, b, t]));
            }
        }
        out
    }
}

/// Acceptance thresholds of a family run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub mean_curvature: f64,
    pub levi_defect: f64,
    pub leaf_curvature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { mean_curvature: 1e-5, levi_defect: 1e-7, leaf_curvature: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub w_re: f64,
    pub w_im: f64,
    pub r: f64,
    pub mean_curvature: Option<f64>,
    pub levi_defect: Option<f64>,
    pub j_defect: Option<f64>,
    pub leaf_curvature: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub report_version: String,
    pub family: String,
    pub grid: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub sample_count: usize,
    pub skipped_count: usize,
    pub max_abs_mean_curvature: f64,
    pub max_levi_defect: f64,
    pub max_j_defect: f64,
    /// Expected leaf curvature 4R when the leaves are totally geodesic.
    pub expected_leaf_curvature: Option<f64>,
    pub max_leaf_curvature_residual: Option<f64>,
    pub pass: bool,
    pub samples: Vec<SampleRecord>,
}

fn evaluate_sample(patch: &HypersurfacePatch, w: Complex64, r: f64, steps: FdSteps) -> SampleRecord {
    let mut rec = SampleRecord {
        w_re: w.re,
        w_im: w.im,
        r,
        mean_curvature: None,
        levi_defect: None,
        j_defect: None,
        leaf_curvature: None,
        skipped: None,
    };
    let run = || -> Result<(f64, f64, f64, f64)> {
        Ok((
            mean_curvature(patch, w, r, steps)?,
            levi_defect(patch, w, r, steps.first)?,
            j_invariance_defect(patch, w, r, steps.first)?,
            leaf_gauss_curvature(patch, w, r, steps)?,
        ))
    };
    match run() {
        Ok((hh, l, j, k)) => {
            rec.mean_curvature = Some(hh);
            rec.levi_defect = Some(l);
            rec.j_defect = Some(j);
            rec.leaf_curvature = Some(k);
        }
        Err(e) => rec.skipped = Some(e.to_string()),
    }
    rec
}

/// Runs all checks over the grid and aggregates them.
pub fn verify_family(patch: &HypersurfacePatch, grid: SampleGrid, tol: Tolerances, steps: FdSteps) -> VerificationReport {
    let pts = grid.points(&patch.domain, 2.0 * steps.second);
    let samples: Vec<SampleRecord> = pts.par_iter().map(|&(w, r)| evaluate_sample(patch, w, r, steps)).collect();
    let expected = patch.spec.is_type_one().then(|| 4.0 * patch.spec.curvature());
    let fold = |f: &dyn Fn(&SampleRecord) -> Option<f64>| samples.iter().filter_map(f).fold(0.0f64, |m, v| m.max(v.abs()));
    let max_h = fold(&|s| s.mean_curvature);
    let max_l = fold(&|s| s.levi_defect);
    let max_j = fold(&|s| s.j_defect);
    let max_k = expected.map(|k| fold(&|s| s.leaf_curvature.map(|v| v - k)));
    let skipped = samples.iter().filter(|s| s.skipped.is_some()).count();
    let evaluated = samples.len() - skipped;
    let pass = evaluated > 0
        && max_h < tol.mean_curvature
        && max_l < tol.levi_defect
        && max_j < tol.levi_defect.max(1e-6)
        && max_k.map_or(true, |k| k < tol.leaf_curvature);
    log::info!("{}: {} samples, max|H| = {max_h:e}, max levi = {max_l:e}", patch.label(), samples.len());
    VerificationReport {
        report_version: "1".into(),
        family: patch.label(),
        grid: grid.spec(),
        seed: grid.seed,
        tolerances: tol,
        sample_count: samples.len(),
        skipped_count: skipped,
        max_abs_mean_curvature: max_h,
        max_levi_defect: max_l,
        max_j_defect: max_j,
        expected_leaf_curvature: expected,
        max_leaf_curvature_residual: max_k,
        pass,
        samples,
    }
}
