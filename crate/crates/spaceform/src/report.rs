//! Consolidated check reports for the type-3 pipeline and the full suite.

use std::f64::consts::FRAC_PI_2;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FamilySpec, HypersurfacePatch};
use crate::numgeom::{verify_family, FdSteps, SampleGrid, Tolerances, VerificationReport};
use crate::typeiii::holonomy::{block_h_x, block_h_y, holonomy, HolonomyData};
use crate::typeiii::quartic::{developing_map_crosscheck, fundamental_samples, increment_error};
use crate::typeiii::quaternion::{commutator, lattice_build, quat_decompose, words, QuatWord};
use crate::typeiii::{box_grid, check_flatness, conservation_grid, leaf_curvature, Stencil, ThetaLeaf};
use crate::weierstrass::{
    center, conformal_curvature, cubic, periods_by_quadrature, tabulate, w_map_at, weierstrass_p_at, Axis, Profile,
    ThetaSlice,
};
use crate::{CMat3, Complex64};

pub const REPORT_VERSION: &str = "1";

/// Reference constants of the θ = 0 holonomy.
pub const RHO0: f64 = 0.498083225;
pub const R_CONSTANT: f64 = 0.565201447;

/// Check groups of the type-3 pipeline, in execution order.
pub const TYPEIII_CHECKS: [&str; 7] = ["tabulation", "profiles", "conservation", "flatness", "holonomy", "lattice", "abelian"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity or constant the check refers to.
    pub anchor: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    /// Passes when |measured − target| < tolerance.
    pub fn near(name: &str, anchor: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            target,
            tolerance,
            pass: (measured - target).abs() < tolerance,
            note: None,
        }
    }

    /// Passes when measured < bound.
    pub fn below(name: &str, anchor: &str, measured: f64, bound: f64) -> Self {
        Self { pass: measured < bound, ..Self::near(name, anchor, measured, 0.0, bound) }
    }

    /// Passes when measured > bound.
    pub fn above(name: &str, anchor: &str, measured: f64, bound: f64) -> Self {
        Self { pass: measured > bound, ..Self::near(name, anchor, measured, bound, 0.0) }
    }

    pub fn failed(name: &str, anchor: &str, err: &Error) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured: f64::NAN,
            target: 0.0,
            tolerance: 0.0,
            pass: false,
            note: Some(err.to_string()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomySummary {
    pub rho0: f64,
    pub r: f64,
    pub angle_end: f64,
    pub h_x: CMat3,
    pub h_y: CMat3,
    pub h_x_word: Option<QuatWord>,
    pub h_y_word: Option<QuatWord>,
    pub commutator: Option<QuatWord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsolidatedReport {
    pub report_version: String,
    pub suite: String,
    pub records: Vec<CheckRecord>,
    pub skipped: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holonomy: Option<HolonomySummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub families: Vec<VerificationReport>,
    pub pass: bool,
    /// Seconds since the Unix epoch; excluded from reproducibility comparisons.
    pub timestamp: u64,
}

impl ConsolidatedReport {
    pub fn new(suite: &str, records: Vec<CheckRecord>, skipped: Vec<String>) -> Self {
        let mut r = Self {
            report_version: REPORT_VERSION.into(),
            suite: suite.into(),
            records,
            skipped,
            holonomy: None,
            families: Vec::new(),
            pass: false,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        r.update_pass();
        r
    }

    /// Overall pass is the conjunction of the record passes.
    pub fn update_pass(&mut self) {
        self.pass = !self.records.is_empty() && self.records.iter().all(|r| r.pass);
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeIiiConfig {
    pub thetas: Vec<f64>,
    /// Grid per θ-slice for the conservation check.
    pub conservation_grid: (usize, usize),
    /// Samples per side of the abelian cross-check grid.
    pub abelian_side: usize,
    pub skip: Vec<String>,
}

impl Default for TypeIiiConfig {
    fn default() -> Self {
        Self {
            thetas: crate::weierstrass::theta_range(-1.2, 1.2, 9).expect("valid range"),
            conservation_grid: (20, 20),
            abelian_side: 6,
            skip: Vec::new(),
        }
    }
}

impl TypeIiiConfig {
    pub fn validate(&self) -> Result<()> {
        for s in &self.skip {
            if !TYPEIII_CHECKS.contains(&s.as_str()) {
                return Err(Error::InvalidArgument(format!("unknown check '{s}'; expected one of {}", TYPEIII_CHECKS.join(", "))));
            }
        }
        if self.thetas.is_empty() {
            return Err(Error::InvalidArgument("empty theta range".into()));
        }
        for &t in &self.thetas {
            crate::weierstrass::check_theta(t)?;
        }
        Ok(())
    }

    fn runs(&self, name: &str) -> bool {
        !self.skip.iter().any(|s| s == name)
    }
}

fn or_fail(name: &str, anchor: &str, r: Result<Vec<CheckRecord>>) -> Vec<CheckRecord> {
    r.unwrap_or_else(|e| vec![CheckRecord::failed(name, anchor, &e)])
}

fn max_over<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?.abs())))
}

fn tabulation_checks(thetas: &[f64]) -> Result<Vec<CheckRecord>> {
    let rows = tabulate(thetas)?;
    let anchor = "cubic p(λ, θ) and its half-periods";
    let fact = rows.iter().flat_map(|s| s.roots.map(|r| cubic(r, s.theta).abs())).fold(0.0, f64::max);
    let mut sym = 0.0f64;
    let mut quad = 0.0f64;
    for s in &rows {
        let m = ThetaSlice::new(-s.theta)?;
        sym = sym.max((m.rho_plus - s.rho_minus).abs());
        let (p, q) = periods_by_quadrature(s.theta)?;
        quad = quad.max((p - s.rho_plus).abs()).max((q - s.rho_minus).abs());
    }
    Ok(vec![
        CheckRecord::below("root_factorization", anchor, fact, 1e-12),
        CheckRecord::below("period_symmetry", anchor, sym, 1e-10),
        CheckRecord::below("periods_carlson_vs_quadrature", anchor, quad, 1e-10),
    ])
}

fn profile_checks(thetas: &[f64]) -> Result<Vec<CheckRecord>> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut first = 0.0f64;
    let mut special = 0.0f64;
    let mut w_center = 0.0f64;
    let mut w_product = 0.0f64;
    let mut curv = 0.0f64;
    for &t in thetas {
        let s = ThetaSlice::new(t)?;
        let (f, g) = (Profile::new(s, Axis::X)?, Profile::new(s, Axis::Y)?);
        for k in 1..8 {
            let u = k as f64 / 8.0;
            first = first.max(f.first_integral_residual(u * f.period)?).max(g.first_integral_residual(u * g.period)?);
        }
        let [r1, r2, r3] = s.roots;
        for (z, want) in [(c(0.0, s.rho_minus), r1), (c(0.0, 0.0), r2), (c(s.rho_plus, 0.0), r3)] {
            special = special.max((weierstrass_p_at(&s, z)?.0 - want).norm());
        }
        w_center = w_center.max((w_map_at(&s, center(&s))?.0 - c(0.0, 1.0)).norm());
        let a = w_map_at(&s, c(2.0 * s.rho_plus, 0.0))?.0;
        let b = w_map_at(&s, c(0.0, 2.0 * s.rho_minus))?.0;
        w_product = w_product.max((a * b + 1.0).norm());
        for i in 1..=5 {
            for j in 1..=4 {
                let (x, y) = (2.0 * s.rho_plus * i as f64 / 6.0, 2.0 * s.rho_minus * j as f64 / 5.0);
                curv = curv.max((conformal_curvature(&f, &g, x, y, 2.5e-4)? - 16.0).abs());
            }
        }
    }
    let anchor = "profiles f, g and the function w";
    Ok(vec![
        CheckRecord::below("first_integral", anchor, first, 1e-9),
        CheckRecord::below("p_special_values", anchor, special, 1e-8),
        CheckRecord::below("w_center_is_i", anchor, w_center, 1e-7),
        CheckRecord::below("w_product_is_minus_one", anchor, w_product, 1e-7),
        CheckRecord::below("conformal_curvature_16", "constant Gauss curvature 16", curv, 1e-3),
    ])
}

fn conservation_checks(thetas: &[f64], (nx, ny): (usize, usize)) -> Result<Vec<CheckRecord>> {
    let [a, b, f] = conservation_grid(thetas, nx, ny)?;
    let anchor = "conserved A, B with A³ − B² = 1";
    Ok(vec![
        CheckRecord::below("conserved_a", anchor, a, 1e-8),
        CheckRecord::below("conserved_b", anchor, b, 1e-8),
        CheckRecord::below("invariant_f", anchor, f, 1e-8),
    ])
}

fn flatness_checks(rho0: f64) -> Result<Vec<CheckRecord>> {
    let anchor = "structure equation dγ = −γ∧γ";
    let centre = [[rho0, rho0, 0.0]];
    let mut pts = centre.to_vec();
    pts.extend(box_grid([0.3, 0.25, -0.6], [0.9, 0.7, 0.6], [3, 3, 3]));
    let res = check_flatness(&pts, 1e-3, Stencil::FivePoint)?;
    let e1 = check_flatness(&centre, 2e-3, Stencil::ThreePoint)?;
    let e2 = check_flatness(&centre, 1e-3, Stencil::ThreePoint)?;
    let leaf = ThetaLeaf::new(0.25)?;
    let leaf_k = max_over([(0.4, 0.3), (0.8, 0.6), (0.6, 0.9)].map(|(x, y)| leaf_curvature(&leaf, x, y, 1e-3).map(|(k, want)| k - want)))?;
    Ok(vec![
        CheckRecord::below("flatness_residual", anchor, res, 1e-5),
        CheckRecord::near("flatness_convergence_ratio", anchor, e1 / e2, 4.0, 1.0),
        CheckRecord::below("leaf_curvature", "leaf curvature −8(f − g)^{3/2}", leaf_k, 1e-3),
    ])
}

fn holonomy_checks(h: &HolonomyData) -> Vec<CheckRecord> {
    let anchor = "holonomy of the θ = 0 leaf";
    let id = CMat3::identity();
    let analytic_x = block_h_x(h.r);
    let analytic_y = block_h_y(h.r);
    vec![
        CheckRecord::near("rho0", anchor, h.rho0, RHO0, 1e-6),
        CheckRecord::near("r", anchor, h.r, R_CONSTANT, 1e-6),
        CheckRecord::near("total_turning", anchor, h.angle_end, FRAC_PI_2, 1e-8),
        CheckRecord::below("h_x_entrywise", anchor, (h.h_x - analytic_x).max_abs(), 1e-6),
        CheckRecord::below("h_y_entrywise", anchor, (h.h_y - analytic_y).max_abs(), 1e-6),
        CheckRecord::below("h_x_order_four", anchor, (analytic_x.powi(4) - id).max_abs(), 1e-9),
        CheckRecord::below("h_y_order_four", anchor, (analytic_y.powi(4) - id).max_abs(), 1e-9),
    ]
}

fn lattice_checks(h: &HolonomyData, summary: &mut HolonomySummary) -> Result<Vec<CheckRecord>> {
    let anchor = "lattice Λ and the holonomy words";
    let lat = lattice_build(h.r)?;
    let minimal = lat.minimal_vectors(2).len();
    let mut out = vec![CheckRecord::near("minimal_vectors", anchor, minimal as f64, 24.0, 0.5)];
    let hx = quat_decompose(&h.h_x, h.r)?;
    let hy = quat_decompose(&h.h_y, h.r)?;
    let comm = commutator(&hx, &hy);
    summary.h_x_word = Some(hx);
    summary.h_y_word = Some(hy);
    summary.commutator = Some(comm);
    let q_err = comm.q.iter().zip([1, 0, 0, 0]).map(|(a, b)| (a - b).abs()).sum::<i64>();
    out.push(CheckRecord::below("commutator_rotation_trivial", anchor, q_err as f64, 0.5).with_note(format!("q = {:?}", comm.q)));
    let even_nonzero = comm.even() && comm.a != [0; 4];
    out.push(CheckRecord::near("commutator_translation_even", anchor, f64::from(u8::from(even_nonzero)), 1.0, 0.5).with_note(format!("a = {:?}", comm.a)));
    let mut bad = 0usize;
    let all = words(hx, hy, 3);
    for (idx, w) in &all {
        let gens = [h.h_x, h.h_x.inverse().expect("invertible"), h.h_y, h.h_y.inverse().expect("invertible")];
        let m = idx.iter().fold(CMat3::identity(), |m, &g| m * gens[g]);
        match quat_decompose(&m, h.r) {
            Ok(d) if d == *w => {}
            _ => bad += 1,
        }
    }
    out.push(CheckRecord::below("three_letter_words", anchor, bad as f64, 0.5).with_note(format!("{} words", all.len())));
    Ok(out)
}

fn abelian_checks(h: &HolonomyData, side: usize) -> Result<Vec<CheckRecord>> {
    let anchor = "developing map versus abelian integrals";
    let slice = ThetaSlice::new(0.0)?;
    let samples = fundamental_samples(&slice, side);
    let rep = developing_map_crosscheck(&samples, h.r)?;
    Ok(vec![
        CheckRecord::above("abelian_sample_count", anchor, rep.samples as f64, 29.5),
        CheckRecord::below("abelian_discrepancy", anchor, rep.max_discrepancy, 1e-5),
        CheckRecord::below("loop_x_increment", anchor, increment_error(rep.loop_x_increment, [1.0, 1.0, 0.0, 0.0], h.r), 1e-6),
        CheckRecord::below("loop_y_increment", anchor, increment_error(rep.loop_y_increment, [1.0, 0.0, 1.0, 0.0], h.r), 1e-6),
    ])
}

/// Runs the type-3 pipeline; failures of individual checks are recorded, not propagated.
pub fn run_typeiii(config: &TypeIiiConfig) -> Result<ConsolidatedReport> {
    config.validate()?;
    let mut records = Vec::new();
    if config.runs("tabulation") {
        records.extend(or_fail("tabulation", "tabulation", tabulation_checks(&config.thetas)));
    }
    if config.runs("profiles") {
        records.extend(or_fail("profiles", "profiles", profile_checks(&config.thetas)));
    }
    if config.runs("conservation") {
        records.extend(or_fail("conservation", "conservation", conservation_checks(&config.thetas, config.conservation_grid)));
    }
    let needs_holonomy = ["flatness", "holonomy", "lattice", "abelian"].iter().any(|n| config.runs(n));
    let hol = if needs_holonomy { Some(holonomy()) } else { None };
    let mut summary = None;
    match hol {
        Some(Ok(h)) => {
            let mut s = HolonomySummary {
                rho0: h.rho0,
                r: h.r,
                angle_end: h.angle_end,
                h_x: h.h_x,
                h_y: h.h_y,
                h_x_word: None,
                h_y_word: None,
                commutator: None,
            };
            if config.runs("flatness") {
                records.extend(or_fail("flatness", "flatness", flatness_checks(h.rho0)));
            }
            if config.runs("holonomy") {
                records.extend(holonomy_checks(&h));
            }
            if config.runs("lattice") {
                records.extend(or_fail("lattice", "lattice", lattice_checks(&h, &mut s)));
            }
            if config.runs("abelian") {
                records.extend(or_fail("abelian", "abelian", abelian_checks(&h, config.abelian_side)));
            }
            summary = Some(s);
        }
        Some(Err(e)) => records.push(CheckRecord::failed("holonomy", "holonomy", &e)),
        None => {}
    }
    let mut report = ConsolidatedReport::new("typeiii", records, config.skip.clone());
    report.holonomy = summary;
    Ok(report)
}

/// Every standard family on a `grid`, the y-perturbed negative control, then the type-3 pipeline.
pub fn run_all(grid: SampleGrid, tol: Tolerances, typeiii: &TypeIiiConfig) -> Result<ConsolidatedReport> {
    let mut records = Vec::new();
    let mut families = Vec::new();
    for spec in FamilySpec::standard() {
        let rep = verify_family(&HypersurfacePatch::new(spec), grid, tol, FdSteps::default());
        let anchor = "minimal Levi-flat family";
        records.push(CheckRecord::below(&format!("{}:mean_curvature", rep.family), anchor, rep.max_abs_mean_curvature, tol.mean_curvature));
        records.push(CheckRecord::below(&format!("{}:levi_defect", rep.family), anchor, rep.max_levi_defect, tol.levi_defect));
        if let Some(k) = rep.max_leaf_curvature_residual {
            records.push(CheckRecord::below(&format!("{}:leaf_curvature", rep.family), "totally geodesic leaves of curvature 4R", k, tol.leaf_curvature));
        }
        families.push(rep);
    }
    let spec: FamilySpec = "t2diag:lambda=2:r=0".parse()?;
    let control = verify_family(&HypersurfacePatch::perturbed(spec, 0.3)?, grid, tol, FdSteps::default());
    records.push(CheckRecord::above("negative_control:mean_curvature", "non-minimal deformation", control.max_abs_mean_curvature, 1e-2));
    let t3 = run_typeiii(typeiii)?;
    records.extend(t3.records);
    let mut report = ConsolidatedReport::new("verify-all", records, typeiii.skip.clone());
    report.holonomy = t3.holonomy;
    report.families = families;
    Ok(report)
}

/// Pretty JSON with the timestamp removed, for comparing runs.
pub fn comparable_json(report: &ConsolidatedReport) -> String {
    let mut v = serde_json::to_value(report).expect("report serializes");
    if let Some(o) = v.as_object_mut() {
        o.remove("timestamp");
    }
    serde_json::to_string_pretty(&v).expect("value serializes")
}
