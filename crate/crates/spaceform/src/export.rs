//! Mesh, point-cloud and lattice files.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::families::{Hypersurface, HypersurfacePatch};
use crate::numgeom::{levi_defect, mean_curvature, FdSteps};
use crate::typeiii::quartic::{abel_map, base_point, fundamental_samples, rotation, unit_functions};
use crate::typeiii::quaternion::LatticeF4;
use crate::weierstrass::ThetaSlice;
use crate::Complex64;

fn io(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("write failed: {e}"))
}

/// A triangulated (Re w, r) grid at the middle of the Im w range.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub n_re: usize,
    pub n_r: usize,
    /// (Re z₁, Im z₁, Re z₂).
    pub vertices: Vec<[f64; 3]>,
    pub im_z2: Vec<f64>,
    pub params: Vec<(Complex64, f64)>,
    /// Zero-based vertex indices.
    pub triangles: Vec<[usize; 3]>,
}

pub fn build_mesh(patch: &HypersurfacePatch, n_re: usize, n_r: usize) -> Result<Mesh> {
    if n_re < 2 || n_r < 2 {
        return Err(Error::InvalidArgument(format!("mesh grid {n_re}x{n_r} is empty")));
    }
    let d = patch.domain;
    let im = 0.5 * (d.im_w[0] + d.im_w[1]);
    let lerp = |k: usize, n: usize, [lo, hi]: [f64; 2]| lo + (hi - lo) * k as f64 / (n - 1) as f64;
    let params: Vec<(Complex64, f64)> = (0..n_r)
        .flat_map(|j| (0..n_re).map(move |i| (Complex64::new(lerp(i, n_re, d.re_w), im), lerp(j, n_r, d.r))))
        .collect();
    let chart: Vec<_> = params.iter().map(|&(w, r)| patch.chart(w, r)).collect::<Result<_>>()?;
    let vertices = chart.iter().map(|p| [p.z1.re, p.z1.im, p.z2.re]).collect();
    let im_z2 = chart.iter().map(|p| p.z2.im).collect();
    let mut triangles = Vec::with_capacity(2 * (n_re - 1) * (n_r - 1));
    for j in 0..n_r - 1 {
        for i in 0..n_re - 1 {
            let v = j * n_re + i;
            triangles.push([v, v + 1, v + n_re + 1]);
            triangles.push([v, v + n_re + 1, v + n_re]);
        }
    }
    Ok(Mesh { n_re, n_r, vertices, im_z2, params, triangles })
}

pub fn write_obj<W: Write>(mesh: &Mesh, label: &str, mut out: W) -> Result<()> {
    writeln!(out, "# {label}: {}x{} grid in (Re w, r)", mesh.n_re, mesh.n_r).map_err(io)?;
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v[0], v[1], v[2]).map_err(io)?;
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).map_err(io)?;
    }
    Ok(())
}

/// Per-vertex sidecar: parameters, Im z₂, |H| and the Levi defect (empty when not evaluable).
pub fn write_mesh_sidecar<W: Write>(patch: &HypersurfacePatch, mesh: &Mesh, steps: FdSteps, mut out: W) -> Result<()> {
    let fields: Vec<(Option<f64>, Option<f64>)> = mesh
        .params
        .par_iter()
        .map(|&(w, r)| (mean_curvature(patch, w, r, steps).ok().map(f64::abs), levi_defect(patch, w, r, steps.first).ok()))
        .collect();
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    writeln!(out, "index,w_re,w_im,r,im_z2,abs_h,levi").map_err(io)?;
    for (k, (&(w, r), (h, l))) in mesh.params.iter().zip(fields).enumerate() {
        writeln!(out, "{k},{},{},{r},{},{},{}", w.re, w.im, mesh.im_z2[k], opt(h), opt(l)).map_err(io)?;
    }
    Ok(())
}

/// Images of an n × n grid of the fundamental cell under the abelian map of the θ-leaf.
pub fn leaf_point_cloud(theta: f64, n: usize) -> Result<Vec<((f64, f64), [Complex64; 2])>> {
    let slice = ThetaSlice::new(theta)?;
    let (a, b) = unit_functions(&base_point(&slice));
    let rot = rotation(a, b);
    fundamental_samples(&slice, n)
        .par_iter()
        .map(|&(x, y)| Ok(((x, y), abel_map(&slice, &rot, x, y)?)))
        .collect()
}

pub fn write_point_cloud<W: Write>(points: &[((f64, f64), [Complex64; 2])], mut out: W) -> Result<()> {
    writeln!(out, "x,y,re_phi1,im_phi1,re_phi2,im_phi2").map_err(io)?;
    for ((x, y), p) in points {
        writeln!(out, "{x},{y},{},{},{},{}", p[0].re, p[0].im, p[1].re, p[1].im).map_err(io)?;
    }
    Ok(())
}

/// Basis rows followed by the minimal vectors found with coefficients bounded by `bound`.
pub fn write_lattice<W: Write>(lat: &LatticeF4, bound: i64, mut out: W) -> Result<()> {
    writeln!(out, "kind,a0,a1,a2,a3,x0,x1,x2,x3").map_err(io)?;
    let row = |out: &mut W, kind: &str, a: [i64; 4]| -> Result<()> {
        let p = crate::typeiii::quaternion::lattice_point(a, lat.r);
        writeln!(out, "{kind},{},{},{},{},{},{},{},{}", a[0], a[1], a[2], a[3], p[0], p[1], p[2], p[3]).map_err(io)
    };
    for a in lat.coefficients {
        row(&mut out, "basis", a)?;
    }
    for a in lat.minimal_vectors(bound) {
        row(&mut out, "minimal", a)?;
    }
    Ok(())
}
