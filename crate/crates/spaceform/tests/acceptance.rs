//! Acceptance criteria 1 to 10. Runs without the libtest harness so that every
//! criterion prints exactly one line; exits nonzero when any criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use spaceform::families::{FamilySpec, HypersurfacePatch};
use spaceform::numgeom::{leaf_gauss_curvature, verify_family, FdSteps, SampleGrid, Tolerances};
use spaceform::typeiii::holonomy::{block_h_x, block_h_y, holonomy, HolonomyData};
use spaceform::typeiii::quartic::{developing_map_crosscheck, fundamental_samples};
use spaceform::typeiii::quaternion::{commutator, lattice_build, lattice_point, quat_decompose, words};
use spaceform::typeiii::{box_grid, check_flatness, conservation_grid, leaf_curvature, Stencil, ThetaLeaf};
use spaceform::weierstrass::{
    center, conformal_curvature, cubic, theta_range, w_map_at, weierstrass_p_at, Axis, Profile, ThetaSlice,
};
use spaceform::{CMat3, Complex64, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn translation_part(m: &CMat3) -> [Complex64; 2] {
    [m[(1, 0)], m[(2, 0)]]
}

fn holonomy_constants(h: &HolonomyData, elapsed: Duration) -> Result<Outcome> {
    let (drho, dr) = ((h.rho0 - 0.498083225).abs(), (h.r - 0.565201447).abs());
    let fast = elapsed < Duration::from_secs(5);
    outcome(
        drho < 1e-6 && dr < 1e-6 && fast,
        format!("rho0 = {:.10} (err {drho:.1e}), r = {:.10} (err {dr:.1e}), {:.2} s", h.rho0, h.r, elapsed.as_secs_f64()),
    )
}

fn total_turning(h: &HolonomyData) -> Result<Outcome> {
    let d = (h.angle_end - FRAC_PI_2).abs();
    outcome(d < 1e-8, format!("angle(2 rho0) - pi/2 = {d:.1e}"))
}

fn holonomy_matrices(h: &HolonomyData) -> Result<Outcome> {
    let (ax, ay) = (block_h_x(h.r), block_h_y(h.r));
    let (ex, ey) = ((h.h_x - ax).max_abs(), (h.h_y - ay).max_abs());
    let id = CMat3::identity();
    let (px, py) = ((ax.powi(4) - id).max_abs(), (ay.powi(4) - id).max_abs());
    outcome(
        ex < 1e-6 && ey < 1e-6 && px < 1e-9 && py < 1e-9,
        format!("|g_X - h_X| = {ex:.1e}, |g_Y - h_Y| = {ey:.1e}, |h_X^4 - I| = {px:.1e}, |h_Y^4 - I| = {py:.1e}"),
    )
}

fn minimality_suite() -> Result<Outcome> {
    let start = Instant::now();
    let grid = SampleGrid::new(10, 10, 0)?;
    let tol = Tolerances::default();
    let (mut worst_h, mut worst_l, mut bad) = (0.0f64, 0.0f64, Vec::new());
    for spec in FamilySpec::standard() {
        let rep = verify_family(&HypersurfacePatch::new(spec), grid, tol, FdSteps::default());
        worst_h = worst_h.max(rep.max_abs_mean_curvature);
        worst_l = worst_l.max(rep.max_levi_defect);
        if rep.max_abs_mean_curvature >= 1e-5 || rep.max_levi_defect >= 1e-7 || rep.skipped_count > 0 {
            bad.push(rep.family);
        }
    }
    let spec: FamilySpec = "t2diag:lambda=2:r=0".parse()?;
    let control = verify_family(&HypersurfacePatch::perturbed(spec, 0.3)?, grid, tol, FdSteps::default());
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && control.max_abs_mean_curvature > 1e-2 && secs < 120.0,
        format!(
            "13 families: max|H| = {worst_h:.1e}, max Levi = {worst_l:.1e}, failing {bad:?}; control |H| = {:.2e}; {secs:.1} s",
            control.max_abs_mean_curvature
        ),
    )
}

fn conservation() -> Result<Outcome> {
    let thetas = theta_range(-1.2, 1.2, 9)?;
    let [a, b, f] = conservation_grid(&thetas, 20, 20)?;
    outcome(a < 1e-8 && b < 1e-8 && f < 1e-8, format!("20x20x9: |A - sec^(2/3)| = {a:.1e}, |B + tan| = {b:.1e}, |F - 1| = {f:.1e}"))
}

fn flatness(rho0: f64) -> Result<Outcome> {
    let centre = [[rho0, rho0, 0.0]];
    let mut pts = centre.to_vec();
    pts.extend(box_grid([0.3, 0.25, -0.8], [0.9, 0.75, 0.8], [3, 3, 3]));
    let res = check_flatness(&pts, 1e-3, Stencil::FivePoint)?;
    let e1 = check_flatness(&centre, 2e-3, Stencil::ThreePoint)?;
    let e2 = check_flatness(&centre, 1e-3, Stencil::ThreePoint)?;
    let ratio = e1 / e2;
    outcome(res < 1e-5 && (3.0..=5.0).contains(&ratio), format!("residual at h=1e-3: {res:.1e} over {} points; halving ratio {ratio:.3}", pts.len()))
}

fn elliptic_identities() -> Result<Outcome> {
    let thetas = [-1.3, -0.7, 0.0, 0.45, 1.1];
    let (mut fact, mut sym, mut special, mut wc, mut wp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for t in thetas {
        let s = ThetaSlice::new(t)?;
        let m = ThetaSlice::new(-t)?;
        for r in s.roots {
            fact = fact.max(cubic(r, t).abs());
        }
        // −64(λ − r1)(λ − r2)(λ − r3) against p at sample λ.
        for lam in [-0.7, 0.1, 0.9] {
            let prod = -64.0 * s.roots.iter().map(|r| lam - r).product::<f64>();
            fact = fact.max((prod - cubic(lam, t)).abs());
        }
        sym = sym.max((m.rho_plus - s.rho_minus).abs());
        let [r1, r2, r3] = s.roots;
        for (z, want) in [(c(0.0, s.rho_minus), r1), (c(0.0, 0.0), r2), (c(s.rho_plus, 0.0), r3)] {
            special = special.max((weierstrass_p_at(&s, z)?.0 - want).norm());
        }
        wc = wc.max((w_map_at(&s, center(&s))?.0 - c(0.0, 1.0)).norm());
        let a = w_map_at(&s, c(2.0 * s.rho_plus, 0.0))?.0;
        let b = w_map_at(&s, c(0.0, 2.0 * s.rho_minus))?.0;
        wp = wp.max((a * b + 1.0).norm());
    }
    outcome(
        fact < 1e-12 && sym < 1e-10 && special < 1e-8 && wc < 1e-7 && wp < 1e-7,
        format!("factorization {fact:.1e}, period symmetry {sym:.1e}, special values {special:.1e}, w(centre) {wc:.1e}, w w' + 1 {wp:.1e}"),
    )
}

fn curvature_identities() -> Result<Outcome> {
    let s = ThetaSlice::new(0.35)?;
    let (f, g) = (Profile::new(s, Axis::X)?, Profile::new(s, Axis::Y)?);
    let mut k16 = 0.0f64;
    let mut n = 0;
    for i in 1..=5 {
        for j in 1..=4 {
            let (x, y) = (2.0 * s.rho_plus * i as f64 / 6.0, 2.0 * s.rho_minus * j as f64 / 5.0);
            k16 = k16.max((conformal_curvature(&f, &g, x, y, 2.5e-4)? - 16.0).abs());
            n += 1;
        }
    }
    let mut k1 = 0.0f64;
    for spec in FamilySpec::standard().into_iter().filter(|s| s.is_type_one()) {
        let patch = HypersurfacePatch::new(spec);
        for (w, r) in SampleGrid::new(4, 2, 3)?.points(&patch.domain, 0.05) {
            k1 = k1.max((leaf_gauss_curvature(&patch, w, r, FdSteps::default())? - 4.0 * spec.curvature()).abs());
        }
    }
    let mut k3 = 0.0f64;
    for t in [-0.8, 0.0, 0.25, 0.9] {
        let leaf = ThetaLeaf::new(t)?;
        for (x, y) in [(0.4, 0.3), (0.8, 0.6), (0.6, 0.9), (0.2, 0.7)] {
            let (k, want) = leaf_curvature(&leaf, x, y, 1e-3)?;
            k3 = k3.max((k - want).abs());
        }
    }
    outcome(k16 < 1e-3 && n >= 20 && k1 < 1e-3 && k3 < 1e-3, format!("|K - 16| = {k16:.1e} ({n} samples), type-1 |K - 4R| = {k1:.1e}, type-3 |K + 8(f-g)^(3/2)| = {k3:.1e}"))
}

fn lattice(h: &HolonomyData) -> Result<Outcome> {
    // Oracle: brute-force shortest nonzero vectors of the even-sum lattice.
    let mut norms = Vec::new();
    for a0 in -2i64..=2 {
        for a1 in -2i64..=2 {
            for a2 in -2i64..=2 {
                for a3 in -2i64..=2 {
                    let a = [a0, a1, a2, a3];
                    if a != [0; 4] && (a0 + a1 + a2 + a3).rem_euclid(2) == 0 {
                        norms.push(lattice_point(a, h.r).iter().map(|x| x * x).sum::<f64>());
                    }
                }
            }
        }
    }
    let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let oracle = norms.iter().filter(|&&n| n < min * (1.0 + 1e-9)).count();
    let lat = lattice_build(h.r)?;
    let count = lat.minimal_vectors(2).len();
    let hx = quat_decompose(&h.h_x, h.r)?;
    let hy = quat_decompose(&h.h_y, h.r)?;
    let comm = commutator(&hx, &hy);
    let comm_ok = comm.q == [1, 0, 0, 0] && comm.even() && comm.a != [0; 4];
    let gens = [h.h_x, h.h_x.inverse().expect("invertible"), h.h_y, h.h_y.inverse().expect("invertible")];
    let all = words(hx, hy, 3);
    let bad = all
        .iter()
        .filter(|(idx, w)| {
            let m = idx.iter().fold(CMat3::identity(), |m, &g| m * gens[g]);
            quat_decompose(&m, h.r).map_or(true, |d| d != *w)
        })
        .count();
    outcome(
        count == 24 && oracle == 24 && comm_ok && bad == 0,
        format!("minimal vectors {count} (oracle {oracle}); commutator q = {:?}, a = {:?}; {bad} of {} words fail", comm.q, comm.a, all.len()),
    )
}

fn developing_map(h: &HolonomyData) -> Result<Outcome> {
    let slice = ThetaSlice::new(0.0)?;
    let samples = fundamental_samples(&slice, 6);
    let rep = developing_map_crosscheck(&samples, h.r)?;
    let dist = |a: [Complex64; 2], b: [Complex64; 2]| ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt();
    let ex = dist(rep.loop_x_increment, translation_part(&block_h_x(h.r)));
    let ey = dist(rep.loop_y_increment, translation_part(&block_h_y(h.r)));
    outcome(
        rep.samples >= 30 && rep.max_discrepancy < 1e-5 && ex < 1e-6 && ey < 1e-6,
        format!("{} samples, max |T - Phi| mod lattice = {:.1e}; loop X increment err {ex:.1e}, loop Y increment err {ey:.1e}", rep.samples, rep.max_discrepancy),
    )
}

fn main() {
    let start = Instant::now();
    let hol = holonomy();
    let elapsed = start.elapsed();
    let mut results: Vec<(u8, &str, Result<Outcome>)> = Vec::new();
    match &hol {
        Ok(h) => {
            results.push((1, "holonomy constants", holonomy_constants(h, elapsed)));
            results.push((2, "total turning", total_turning(h)));
            results.push((3, "holonomy matrices", holonomy_matrices(h)));
        }
        Err(e) => {
            for (n, name) in [(1, "holonomy constants"), (2, "total turning"), (3, "holonomy matrices")] {
                results.push((n, name, Err(e.clone())));
            }
        }
    }
    results.push((4, "minimality suite", minimality_suite()));
    results.push((5, "conservation", conservation()));
    let rho0 = ThetaSlice::new(0.0).map(|s| s.rho_plus).unwrap_or(0.498);
    results.push((6, "flatness", flatness(rho0)));
    results.push((7, "elliptic identities", elliptic_identities()));
    results.push((8, "curvature identities", curvature_identities()));
    match &hol {
        Ok(h) => {
            results.push((9, "lattice", lattice(h)));
            results.push((10, "developing map", developing_map(h)));
        }
        Err(e) => {
            results.push((9, "lattice", Err(e.clone())));
            results.push((10, "developing map", Err(e.clone())));
        }
    }
    let mut failed = 0;
    for (n, name, r) in &results {
        let (pass, detail) = match r {
            Ok(o) => (o.pass, o.detail.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {n:>2} {:<4} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
