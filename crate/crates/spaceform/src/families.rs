//! Explicit Levi-flat minimal families: the totally geodesic type-1 solutions
//! and the homogeneous type-2 solutions, with their implicit equations and
//! one-parameter symmetry groups.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{project_to_chart, AlgebraElement, AmbientPoint, SpaceFormParams};
use crate::{AlgebraElement64, AmbientPoint64, ChartPoint64, Params64};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Family kinds. Type-1 families come first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyKind {
    ConeRpos,
    HyperplaneR0,
    ConeR0,
    ConeRneg,
    HorosphereRneg,
    HyperplaneRneg,
    /// Diagonal type-2 family in curvature `curvature` (1, 0 or -1).
    T2Diag { lambda: f64, curvature: i8 },
    T2Translation,
    T2NullPair { lambda: f64 },
    T2Parabolic { mu: f64 },
    T2Nilpotent,
}

/// A validated family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    kind: FamilyKind,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        match kind {
            FamilyKind::T2Diag { lambda, curvature } => {
                if !lambda.is_finite() || lambda == 0.0 || lambda == 1.0 {
                    return Err(Error::InvalidFamily(format!("lambda = {lambda} is degenerate")));
                }
                if !matches!(curvature, -1..=1) {
                    return Err(Error::InvalidFamily(format!("curvature {curvature} not in {{-1, 0, 1}}")));
                }
            }
            FamilyKind::T2Parabolic { mu } if mu == 0.0 || !mu.is_finite() => {
                return Err(Error::InvalidFamily("mu must be nonzero".into()));
            }
            FamilyKind::T2NullPair { lambda } if !lambda.is_finite() => {
                return Err(Error::InvalidFamily("lambda must be finite".into()));
            }
            _ => {}
        }
        Ok(Self { kind })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn curvature(&self) -> f64 {
        use FamilyKind::*;
        match self.kind {
            ConeRpos => 1.0,
            HyperplaneR0 | ConeR0 | T2Translation => 0.0,
            ConeRneg | HorosphereRneg | HyperplaneRneg | T2NullPair { .. } | T2Parabolic { .. } | T2Nilpotent => -1.0,
            T2Diag { curvature, .. } => f64::from(curvature),
        }
    }

    pub fn params(&self) -> Params64 {
        SpaceFormParams::new(self.curvature())
    }

    /// Totally geodesic leaves (type 1).
    pub fn is_type_one(&self) -> bool {
        use FamilyKind::*;
        matches!(self.kind, ConeRpos | HyperplaneR0 | ConeR0 | ConeRneg | HorosphereRneg | HyperplaneRneg)
    }

    /// The six type-1 and seven type-2 families with the default parameters used by the test suite.
    pub fn standard() -> Vec<FamilySpec> {
        use FamilyKind::*;
        [
            ConeRpos,
            HyperplaneR0,
            ConeR0,
            ConeRneg,
            HorosphereRneg,
            HyperplaneRneg,
            T2Diag { lambda: 2.0, curvature: 1 },
            T2Diag { lambda: 2.0, curvature: 0 },
            T2Diag { lambda: 2.0, curvature: -1 },
            T2Translation,
            T2NullPair { lambda: 0.5 },
            T2Parabolic { mu: 1.0 },
            T2Nilpotent,
        ]
        .into_iter()
        .map(|k| FamilySpec::new(k).expect("standard parameters are valid"))
        .collect()
    }

    /// Sampling rectangle known to satisfy the positivity constraint.
    pub fn default_domain(&self) -> Domain {
        use FamilyKind::*;
        let d = |re: [f64; 2], im: [f64; 2], r: [f64; 2]| Domain { re_w: re, im_w: im, r };
        match self.kind {
            ConeRpos | ConeR0 => d([0.3, 0.8], [-0.5, 0.5], [0.1, 3.0]),
            ConeRneg => d([0.2, 0.5], [-0.3, 0.3], [0.1, 3.0]),
            HyperplaneR0 => d([-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]),
            HorosphereRneg => d([-0.4, 0.2], [-0.3, 0.3], [-0.5, 0.5]),
            HyperplaneRneg => d([-0.4, 0.4], [-0.4, 0.4], [-0.5, 0.5]),
            // Both |e^{w+r}| and |e^{lambda w}| must stay small in the ball.
            T2Diag { curvature: -1, lambda } if lambda > 0.0 => d([-1.5, -0.8], [-1.0, 1.0], [-0.5, 0.3]),
            T2Diag { curvature: -1, .. } => d([0.3, 0.6], [-1.0, 1.0], [-1.6, -1.0]),
            T2Diag { .. } => d([-0.5, 0.5], [-1.0, 1.0], [-0.5, 0.5]),
            T2Translation => d([-0.5, 0.5], [-1.0, 1.0], [0.2, 1.0]),
            T2NullPair { .. } => d([-0.5, 0.5], [-0.3, 0.3], [0.0, 0.5]),
            T2Parabolic { .. } => d([-0.3, 0.3], [-1.0, 1.0], [0.5, 1.5]),
            T2Nilpotent => d([-0.5, 0.5], [-0.4, 0.4], [0.5, 1.5]),
        }
    }

    /// Builds a spec from CLI-style parts: a bare family name plus optional parameters.
    pub fn from_parts(name: &str, lambda: Option<f64>, mu: Option<f64>, curvature: Option<f64>) -> Result<Self> {
        let mut id = name.to_string();
        if let Some(l) = lambda {
            id.push_str(&format!(":lambda={l}"));
        }
        if let Some(m) = mu {
            id.push_str(&format!(":mu={m}"));
        }
        if let Some(r) = curvature {
            id.push_str(&format!(":r={r}"));
        }
        id.parse()
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FamilyKind::*;
        match self.kind {
            ConeRpos => write!(f, "cone-rpos"),
            HyperplaneR0 => write!(f, "hyperplane-r0"),
            ConeR0 => write!(f, "cone-r0"),
            ConeRneg => write!(f, "cone-rneg"),
            HorosphereRneg => write!(f, "horosphere"),
            HyperplaneRneg => write!(f, "hyperplane-rneg"),
            T2Diag { lambda, curvature } => write!(f, "t2diag:lambda={lambda}:r={curvature}"),
            T2Translation => write!(f, "t2translation"),
            T2NullPair { lambda } => write!(f, "t2nullpair:lambda={lambda}"),
            T2Parabolic { mu } => write!(f, "t2parabolic:mu={mu}"),
            T2Nilpotent => write!(f, "t2nilpotent"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let (mut lambda, mut mu, mut curv) = (None, None, None);
        for kv in parts {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::UnknownFamily(s.to_string()))?;
            let val: f64 = v.trim().parse().map_err(|_| Error::UnknownFamily(s.to_string()))?;
            match k.trim().to_ascii_lowercase().as_str() {
                "lambda" => lambda = Some(val),
                "mu" => mu = Some(val),
                "r" => curv = Some(val),
                _ => return Err(Error::UnknownFamily(s.to_string())),
            }
        }
        let bare = |kind: FamilyKind| {
            if lambda.is_some() || mu.is_some() || curv.is_some() {
                Err(Error::InvalidFamily(format!("{name} takes no parameters")))
            } else {
                FamilySpec::new(kind)
            }
        };
        use FamilyKind::*;
        match name.as_str() {
            "cone-rpos" | "c1" => bare(ConeRpos),
            "hyperplane-r0" | "h0" => bare(HyperplaneR0),
            "cone-r0" | "c0" => bare(ConeR0),
            "cone-rneg" | "c-1" => bare(ConeRneg),
            "horosphere" | "horosphere-rneg" | "s-1" => bare(HorosphereRneg),
            "hyperplane-rneg" | "h-1" => bare(HyperplaneRneg),
            "t2diag" => {
                let lambda = lambda.ok_or_else(|| Error::InvalidFamily("t2diag needs lambda".into()))?;
                let r = curv.unwrap_or(0.0);
                let curvature = match r {
                    x if x == 1.0 => 1,
                    x if x == 0.0 => 0,
                    x if x == -1.0 => -1,
                    _ => return Err(Error::InvalidFamily(format!("t2diag curvature {r} not in {{-1, 0, 1}}"))),
                };
                FamilySpec::new(T2Diag { lambda, curvature })
            }
            "t2translation" => bare(T2Translation),
            "t2nullpair" => FamilySpec::new(T2NullPair { lambda: lambda.unwrap_or(0.5) }),
            "t2parabolic" => FamilySpec::new(T2Parabolic { mu: mu.unwrap_or(1.0) }),
            "t2nilpotent" => bare(T2Nilpotent),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

/// Parameter rectangle: Re w, Im w and the leaf parameter r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub re_w: [f64; 2],
    pub im_w: [f64; 2],
    pub r: [f64; 2],
}

impl Domain {
    pub fn contains(&self, w: Complex64, r: f64) -> bool {
        let inside = |v: f64, [lo, hi]: [f64; 2]| v >= lo && v <= hi;
        inside(w.re, self.re_w) && inside(w.im, self.im_w) && inside(r, self.r)
    }

    /// Maps unit-cube coordinates into the rectangle.
    pub fn at(&self, u: [f64; 3]) -> (Complex64, f64) {
        let lerp = |t: f64, [lo, hi]: [f64; 2]| lo + t * (hi - lo);
        (Complex64::new(lerp(u[0], self.re_w), lerp(u[1], self.im_w)), lerp(u[2], self.r))
    }
}

/// A parametrized real hypersurface foliated by the holomorphic curves r = const.
pub trait Hypersurface: Sync {
    fn params(&self) -> Params64;
    fn point(&self, w: Complex64, r: f64) -> Result<AmbientPoint64>;
    fn label(&self) -> String;

    fn chart(&self, w: Complex64, r: f64) -> Result<ChartPoint64> {
        project_to_chart(&self.point(w, r)?)
    }
}

/// A family restricted to a parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypersurfacePatch {
    pub spec: FamilySpec,
    pub domain: Domain,
    /// Slope c of the non-minimal deformation y(r) = c r of the diagonal family.
    pub perturb_y: f64,
}

impl HypersurfacePatch {
    pub fn new(spec: FamilySpec) -> Self {
        Self { spec, domain: spec.default_domain(), perturb_y: 0.0 }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Replaces e^{w+r} by e^{w+r+i c r} in the diagonal family.
    pub fn perturbed(spec: FamilySpec, c: f64) -> Result<Self> {
        if !matches!(spec.kind, FamilyKind::T2Diag { .. }) {
            return Err(Error::InvalidFamily("only the diagonal family admits the y-perturbation".into()));
        }
        Ok(Self { perturb_y: c, ..Self::new(spec) })
    }
}

/// Closed-form homogeneous coordinates of the family at (w, r).
pub fn parametrize(patch: &HypersurfacePatch, w: Complex64, r: f64) -> Result<AmbientPoint64> {
    use FamilyKind::*;
    let one = c(1.0);
    let p = match patch.spec.kind {
        ConeRpos | ConeR0 | ConeRneg => AmbientPoint::new(one, w, (I * r).exp() * w),
        HyperplaneR0 | HyperplaneRneg => AmbientPoint::new(one, w, c(r)),
        HorosphereRneg => AmbientPoint::new(one, w, I * r * (one - w)),
        T2Diag { lambda, .. } => {
            AmbientPoint::new(one, (w + r + I * (patch.perturb_y * r)).exp(), (w * lambda).exp())
        }
        T2Translation => AmbientPoint::new(one, w, w.exp() * r),
        T2NullPair { lambda } => {
            let a = (Complex64::new(1.0, lambda) * (w + r)).exp();
            let b = (Complex64::new(-1.0, lambda) * w).exp();
            AmbientPoint::new(a + b, a - b, one)
        }
        T2Parabolic { mu } => AmbientPoint::new(w + r + 1.0, w + r - 1.0, (w * mu).exp()),
        T2Nilpotent => AmbientPoint::new(w * w + r + 1.0, w * w + r - 1.0, w * 2.0),
    };
    let params = patch.spec.params();
    let v = p.form_value(params);
    let scale = p.z.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if !(v > 1e-14 * scale) || !v.is_finite() {
        return Err(Error::OutsideDomain { form_value: v });
    }
    Ok(p)
}

impl Hypersurface for HypersurfacePatch {
    fn params(&self) -> Params64 {
        self.spec.params()
    }
    fn point(&self, w: Complex64, r: f64) -> Result<AmbientPoint64> {
        parametrize(self, w, r)
    }
    fn label(&self) -> String {
        if self.perturb_y != 0.0 {
            format!("{}:perturb_y={}", self.spec, self.perturb_y)
        } else {
            self.spec.to_string()
        }
    }
}

/// A hypersurface given by an arbitrary chart-valued closure, used for controls.
pub struct CustomPatch<F> {
    pub params: Params64,
    pub name: String,
    pub chart_fn: F,
}

impl<F> Hypersurface for CustomPatch<F>
where
    F: Fn(Complex64, f64) -> ChartPoint64 + Sync,
{
    fn params(&self) -> Params64 {
        self.params
    }
    fn point(&self, w: Complex64, r: f64) -> Result<AmbientPoint64> {
        let p = (self.chart_fn)(w, r).to_ambient();
        if !p.is_valid(self.params) {
            return Err(Error::OutsideDomain { form_value: p.form_value(self.params) });
        }
        Ok(p)
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// `lambda = p/q` with `|p|, q <= 6`, if it is such a fraction.
pub fn small_rational(lambda: f64) -> Option<(i32, i32)> {
    (1..=6).find_map(|q| {
        let p = lambda * q as f64;
        let pr = p.round();
        ((p - pr).abs() < 1e-12 && pr.abs() <= 6.0 && pr != 0.0).then_some((pr as i32, q))
    })
}

fn cpow(z: Complex64, n: i32) -> Complex64 {
    z.powi(n)
}

/// Residual of the defining equation of the family at `p`.
pub fn implicit_residual(spec: &FamilySpec, p: &AmbientPoint64) -> Result<f64> {
    use FamilyKind::*;
    let none = || Error::NoImplicitEquation(spec.to_string());
    match spec.kind {
        ConeRpos | ConeR0 | ConeRneg => {
            let q = project_to_chart(p)?;
            Ok(q.z1.norm_sqr() - q.z2.norm_sqr())
        }
        HyperplaneR0 | HyperplaneRneg => Ok(project_to_chart(p)?.z2.im),
        HorosphereRneg => {
            let q = project_to_chart(p)?;
            Ok((q.z2 / (c(1.0) - q.z1)).re)
        }
        T2Diag { lambda, .. } => {
            let (a, b) = small_rational(lambda).ok_or_else(none)?;
            let q = project_to_chart(p)?;
            let (z1, z2) = (q.z1, q.z2);
            let v = if a > 0 {
                cpow(z1, a) * cpow(z2.conj(), b) - cpow(z1.conj(), a) * cpow(z2, b)
            } else {
                cpow(z1.conj(), -a) * cpow(z2.conj(), b) - cpow(z1, -a) * cpow(z2, b)
            };
            Ok(v.norm())
        }
        T2Translation => {
            let q = project_to_chart(p)?;
            Ok((q.z2 * (-q.z1).exp()).im)
        }
        T2Nilpotent => {
            let d = p.z[0] - p.z[1];
            if d.norm() == 0.0 {
                return Err(Error::PointAtInfinity);
            }
            Ok(((p.z[0] + p.z[1]) / d - (p.z[2] / d).powi(2)).im)
        }
        T2NullPair { .. } | T2Parabolic { .. } => Err(none()),
    }
}

/// How the symmetry flow acts on the parameter w of each leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LeafAction {
    /// w -> w + v t.
    Shift(Complex64),
    /// w -> e^{it} w.
    Rotate,
    /// w -> (w + it(1 - w)) / (1 + it(1 - w)).
    Parabolic,
}

impl LeafAction {
    pub fn apply(&self, w: Complex64, t: f64) -> Complex64 {
        match *self {
            LeafAction::Shift(v) => w + v * t,
            LeafAction::Rotate => (I * t).exp() * w,
            LeafAction::Parabolic => {
                let k = I * t * (1.0 - w);
                (w + k) / (1.0 + k)
            }
        }
    }
}

/// Generator of a one-parameter symmetry group together with its action on parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryFlow {
    pub generator: AlgebraElement64,
    pub action: LeafAction,
}

/// The one-parameter group preserving the family and each leaf parameter r.
pub fn symmetry_flow(spec: &FamilySpec) -> SymmetryFlow {
    use FamilyKind::*;
    let z = Complex64::new(0.0, 0.0);
    let diag = |r1: f64, r2: f64| AlgebraElement::diagonal(r1, r2);
    match spec.kind {
        ConeRpos | ConeR0 | ConeRneg => SymmetryFlow { generator: diag(-2.0 / 3.0, 1.0 / 3.0), action: LeafAction::Rotate },
        HyperplaneR0 => SymmetryFlow {
            generator: AlgebraElement { r1: 0.0, r2: 0.0, x: c(1.0), y: z, z },
            action: LeafAction::Shift(c(1.0)),
        },
        HyperplaneRneg => SymmetryFlow { generator: diag(-1.0 / 3.0, 2.0 / 3.0), action: LeafAction::Rotate },
        HorosphereRneg => SymmetryFlow {
            generator: AlgebraElement { r1: 1.0, r2: -1.0, x: I, y: z, z },
            action: LeafAction::Parabolic,
        },
        T2Diag { lambda, .. } => {
            let l0 = -(1.0 + lambda) / 3.0;
            SymmetryFlow { generator: diag(l0, l0 + 1.0), action: LeafAction::Shift(I) }
        }
        T2Translation => SymmetryFlow {
            generator: AlgebraElement { r1: -1.0 / 3.0, r2: -1.0 / 3.0, x: I, y: z, z },
            action: LeafAction::Shift(I),
        },
        T2NullPair { lambda } => {
            let m = lambda / 3.0;
            SymmetryFlow { generator: AlgebraElement { r1: m, r2: m, x: c(1.0), y: z, z }, action: LeafAction::Shift(c(1.0)) }
        }
        T2Parabolic { mu } => {
            let nu = -2.0 * mu / 3.0;
            SymmetryFlow {
                generator: AlgebraElement { r1: nu + 1.0, r2: nu - 1.0, x: I, y: z, z },
                action: LeafAction::Shift(Complex64::new(0.0, 2.0)),
            }
        }
        T2Nilpotent => SymmetryFlow {
            generator: AlgebraElement { r1: 0.0, r2: 0.0, x: z, y: c(1.0), z: c(-1.0) },
            action: LeafAction::Shift(c(1.0)),
        },
    }
}

/// Fixed-r restriction of a patch.
#[derive(Debug, Clone, Copy)]
pub struct Leaf<'a> {
    pub patch: &'a HypersurfacePatch,
    pub r: f64,
}

impl Leaf<'_> {
    pub fn eval(&self, w: Complex64) -> Result<AmbientPoint64> {
        parametrize(self.patch, w, self.r)
    }
}

pub fn leaf_map(patch: &HypersurfacePatch, r: f64) -> Leaf<'_> {
    Leaf { patch, r }
}

/// Projective distance between two homogeneous triples: the largest 2x2 minor, normalized.
pub fn projective_distance(a: &AmbientPoint64, b: &AmbientPoint64) -> f64 {
    let na = a.z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut m: f64 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            m = m.max((a.z[i] * b.z[j] - a.z[j] * b.z[i]).norm());
        }
    }
    m / (na * nb)
}
