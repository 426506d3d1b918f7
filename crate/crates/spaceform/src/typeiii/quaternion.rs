//! Integer quaternion words [[1, 0], [(a₀𝟏 + a₁𝐢 + a₂𝐣 + a₃𝐤)v, q]] with v = (0, r),
//! and the lattice they generate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::linalg::Mat3;

type CMat3 = Mat3<f64>;
pub type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 𝟏, 𝐢, 𝐣, 𝐤 as 2×2 complex matrices.
pub fn units() -> [Mat2; 4] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    [[[o, z], [z, o]], [[z, o], [-o, z]], [[z, -i], [-i, z]], [[-i, z], [z, i]]]
}

/// Σ aₖ eₖ as a 2×2 matrix.
pub fn quat_matrix(a: [f64; 4]) -> Mat2 {
    let u = units();
    let mut m = [[c(0.0, 0.0); 2]; 2];
    for k in 0..4 {
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += u[k][i][j] * a[k];
            }
        }
    }
    m
}

/// Coefficients of a matrix in the real span of the units.
pub fn quat_coefficients(m: &Mat2) -> [f64; 4] {
    [m[0][0].re, m[0][1].re, -m[0][1].im, -m[0][0].im]
}

/// Hamilton product on coefficient vectors; ij = k in this basis.
pub fn qmul(a: [i64; 4], b: [i64; 4]) -> [i64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn qconj(a: [i64; 4]) -> [i64; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

/// (a₀𝟏 + a₁𝐢 + a₂𝐣 + a₃𝐤)v for v = (0, r).
pub fn translation(a: [f64; 4], r: f64) -> [Complex64; 2] {
    [c(a[1] * r, -a[2] * r), c(a[0] * r, a[3] * r)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuatWord {
    pub a: [i64; 4],
    /// A unit ±𝟏, ±𝐢, ±𝐣, ±𝐤 as a coefficient vector.
    pub q: [i64; 4],
}

impl QuatWord {
    pub const IDENTITY: QuatWord = QuatWord { a: [0; 4], q: [1, 0, 0, 0] };

    pub fn new(a: [i64; 4], q: [i64; 4]) -> Result<Self> {
        if q.iter().map(|v| v.abs()).sum::<i64>() != 1 {
            return Err(Error::NotBlockForm(format!("{q:?} is not a unit")));
        }
        Ok(Self { a, q })
    }

    pub fn even(&self) -> bool {
        self.a.iter().sum::<i64>() % 2 == 0
    }

    /// (a, q)(b, p) = (a + q b, q p).
    pub fn compose(&self, o: &QuatWord) -> QuatWord {
        let qa = qmul(self.q, o.a);
        QuatWord { a: std::array::from_fn(|k| self.a[k] + qa[k]), q: qmul(self.q, o.q) }
    }

    /// (a, q)⁻¹ = (−q⁻¹a, q⁻¹); units satisfy q⁻¹ = q̄.
    pub fn inverse(&self) -> QuatWord {
        let qi = qconj(self.q);
        let t = qmul(qi, self.a);
        QuatWord { a: t.map(|v| -v), q: qi }
    }

    pub fn to_matrix(&self, r: f64) -> CMat3 {
        let t = translation(self.a.map(|v| v as f64), r);
        let q = quat_matrix(self.q.map(|v| v as f64));
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        Mat3::from_rows([[o, z, z], [t[0], q[0][0], q[0][1]], [t[1], q[1][0], q[1][1]]])
    }
}

/// Recovers (a, q) from a matrix of block form; integers must be within 1e−7 before rounding
/// and the reassembled matrix must match to 1e−9 relative to its size.
pub fn quat_decompose(m: &CMat3, r: f64) -> Result<QuatWord> {
    const ROUND_TOL: f64 = 1e-7;
    let first = [m[(0, 0)] - 1.0, m[(0, 1)], m[(0, 2)]];
    if first.iter().any(|v| v.norm() > ROUND_TOL) {
        return Err(Error::NotBlockForm("first row is not (1, 0, 0)".into()));
    }
    let block: Mat2 = [[m[(1, 1)], m[(1, 2)]], [m[(2, 1)], m[(2, 2)]]];
    let qc = quat_coefficients(&block);
    let back = quat_matrix(qc);
    let off = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (back[i][j] - block[i][j]).norm()).fold(0.0, f64::max);
    if off > ROUND_TOL {
        return Err(Error::NotBlockForm("rotation block is not quaternionic".into()));
    }
    let t = [m[(1, 0)], m[(2, 0)]];
    let a = [t[1].re / r, t[0].re / r, -t[0].im / r, t[1].im / r];
    let round = |v: [f64; 4]| -> Result<[i64; 4]> {
        let mut out = [0i64; 4];
        for k in 0..4 {
            let n = v[k].round();
            if (v[k] - n).abs() > ROUND_TOL {
                return Err(Error::NotBlockForm(format!("coefficient {} is not an integer", v[k])));
            }
            out[k] = n as i64;
        }
        Ok(out)
    };
    let word = QuatWord::new(round(a)?, round(qc)?)?;
    let scale = m.max_abs().max(1.0);
    if (word.to_matrix(r) - *m).max_abs() > 1e-9 * scale {
        return Err(Error::NotBlockForm("reassembled matrix does not match".into()));
    }
    Ok(word)
}

/// Rank-4 lattice Λ = {2(Σ aₖ eₖ)v : Σ aₖ even} in ℂ² ≅ ℝ⁴.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeF4 {
    pub r: f64,
    /// Integer coefficient vectors of the basis.
    pub coefficients: [[i64; 4]; 4],
    /// Basis vectors as (Re z₁, Im z₁, Re z₂, Im z₂).
    pub basis: [[f64; 4]; 4],
    pub gram: [[f64; 4]; 4],
}

/// Even-sum (D₄) basis of the coefficient lattice.
pub const EVEN_BASIS: [[i64; 4]; 4] = [[1, 1, 0, 0], [1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1]];

pub fn to_real(t: [Complex64; 2]) -> [f64; 4] {
    [t[0].re, t[0].im, t[1].re, t[1].im]
}

/// Real coordinates of 2(Σ aₖ eₖ)v.
pub fn lattice_point(a: [i64; 4], r: f64) -> [f64; 4] {
    to_real(translation(a.map(|v| 2.0 * v as f64), r))
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn lattice_build(r: f64) -> Result<LatticeF4> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("lattice scale r = {r} must be positive")));
    }
    let basis = EVEN_BASIS.map(|a| lattice_point(a, r));
    let gram = std::array::from_fn(|i| std::array::from_fn(|j| dot(&basis[i], &basis[j])));
    Ok(LatticeF4 { r, coefficients: EVEN_BASIS, basis, gram })
}

impl LatticeF4 {
    /// Coefficient vectors with |aₖ| ≤ `bound`, even sum, nonzero, sorted by norm.
    pub fn enumerate(&self, bound: i64) -> Vec<([i64; 4], f64)> {
        let mut out = Vec::new();
        let range = -bound..=bound;
        for a0 in range.clone() {
            for a1 in range.clone() {
                for a2 in range.clone() {
                    for a3 in range.clone() {
                        let a = [a0, a1, a2, a3];
                        if a == [0; 4] || (a0 + a1 + a2 + a3) % 2 != 0 {
                            continue;
                        }
                        let p = lattice_point(a, self.r);
                        out.push((a, dot(&p, &p).sqrt()));
                    }
                }
            }
        }
        out.sort_by(|x, y| x.1.total_cmp(&y.1));
        out
    }

    /// Vectors of minimal norm among the enumerated ones.
    pub fn minimal_vectors(&self, bound: i64) -> Vec<[i64; 4]> {
        let all = self.enumerate(bound);
        let min = all[0].1;
        all.into_iter().take_while(|v| v.1 < min * (1.0 + 1e-12)).map(|v| v.0).collect()
    }

    /// Expresses a coefficient vector in the even basis; `None` if it is not in the lattice.
    pub fn basis_coordinates(&self, a: [i64; 4]) -> Option<[i64; 4]> {
        let s = a.iter().sum::<i64>();
        if s % 2 != 0 {
            return None;
        }
        // a = n0 b0 + n1 b1 + n2 b2 + n3 b3 with b as in EVEN_BASIS.
        let n3 = -a[3];
        let n2 = -(a[2] + a[3]);
        let n0 = (a[0] + a[1] + a[2] + a[3]) / 2;
        let n1 = a[0] - n0;
        let back: [i64; 4] = std::array::from_fn(|k| n0 * EVEN_BASIS[0][k] + n1 * EVEN_BASIS[1][k] + n2 * EVEN_BASIS[2][k] + n3 * EVEN_BASIS[3][k]);
        (back == a).then_some([n0, n1, n2, n3])
    }

    /// Nearest lattice point to a real vector (D₄ rounding in coefficient space).
    pub fn reduce(&self, x: [f64; 4]) -> [f64; 4] {
        // Coefficients of x/2 with respect to the units applied to v.
        let s = 2.0 * self.r;
        let a = [x[2] / s, x[0] / s, -x[1] / s, x[3] / s];
        let mut n = a.map(|v| v.round());
        if (n.iter().sum::<f64>() as i64) % 2 != 0 {
            let (k, _) = a.iter().enumerate().map(|(k, v)| (k, (v - n[k]).abs())).fold((0, -1.0), |m, e| if e.1 > m.1 { e } else { m });
            n[k] += if a[k] > n[k] { 1.0 } else { -1.0 };
        }
        let p = lattice_point(n.map(|v| v as i64), self.r);
        std::array::from_fn(|k| x[k] - p[k])
    }
}

/// All products of `len` factors drawn from {h_X^{±1}, h_Y^{±1}} as exact words.
pub fn words(hx: QuatWord, hy: QuatWord, len: usize) -> Vec<(Vec<usize>, QuatWord)> {
    let gens = [hx, hx.inverse(), hy, hy.inverse()];
    let mut out = vec![(Vec::new(), QuatWord::IDENTITY)];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * 4);
        for (idx, w) in &out {
            for (g, gw) in gens.iter().enumerate() {
                let mut i = idx.clone();
                i.push(g);
                next.push((i, w.compose(gw)));
            }
        }
        out = next;
    }
    out
}

/// h_Y⁻¹ h_X⁻¹ h_Y h_X.
pub fn commutator(hx: &QuatWord, hy: &QuatWord) -> QuatWord {
    hy.inverse().compose(&hx.inverse()).compose(hy).compose(hx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typeiii::holonomy::{block_h_x, block_h_y};

    fn mmul(a: &Mat2, b: &Mat2) -> Mat2 {
        std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
    }

    #[test]
    fn product_table_matches_matrices() {
        for x in 0..4 {
            for y in 0..4 {
                let mut a = [0i64; 4];
                let mut b = [0i64; 4];
                a[x] = 1;
                b[y] = 1;
                let p = qmul(a, b);
                let m = mmul(&quat_matrix(a.map(|v| v as f64)), &quat_matrix(b.map(|v| v as f64)));
                assert_eq!(quat_coefficients(&m).map(|v| v.round() as i64), p);
                let back = quat_matrix(p.map(|v| v as f64));
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((back[i][j] - m[i][j]).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn unit_images_are_orthogonal() {
        let r = 0.7;
        let imgs: Vec<[f64; 4]> = (0..4)
            .map(|k| {
                let mut a = [0.0; 4];
                a[k] = 1.0;
                to_real(translation(a, r))
            })
            .collect();
        for i in 0..4 {
            assert!((dot(&imgs[i], &imgs[i]).sqrt() - r).abs() < 1e-15);
            for j in i + 1..4 {
                assert!(dot(&imgs[i], &imgs[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn decompose_block_forms() {
        let r = 0.565201447;
        let hx = quat_decompose(&block_h_x(r), r).unwrap();
        assert_eq!(hx, QuatWord { a: [1, 1, 0, 0], q: [0, 1, 0, 0] });
        let hy = quat_decompose(&block_h_y(r), r).unwrap();
        assert_eq!(hy, QuatWord { a: [1, 0, 1, 0], q: [0, 0, 1, 0] });
        let h4 = quat_decompose(&block_h_x(r).powi(4), r).unwrap();
        assert_eq!(h4, QuatWord::IDENTITY);
        assert_eq!(hx.compose(&hx).compose(&hx).compose(&hx), QuatWord::IDENTITY);
        let mut bad = block_h_x(r);
        bad[(1, 0)] += 0.3;
        assert!(matches!(quat_decompose(&bad, r), Err(Error::NotBlockForm(_))));
    }

    #[test]
    fn exact_composition_matches_matrices() {
        let r = 0.73;
        let hx = quat_decompose(&block_h_x(r), r).unwrap();
        let hy = quat_decompose(&block_h_y(r), r).unwrap();
        let mats = [block_h_x(r), block_h_x(r).inverse().unwrap(), block_h_y(r), block_h_y(r).inverse().unwrap()];
        for (idx, w) in words(hx, hy, 3) {
            let m = idx.iter().fold(Mat3::identity(), |acc, &g| acc * mats[g]);
            let d = quat_decompose(&m, r).unwrap();
            assert_eq!(d, w, "{idx:?}");
            assert!(w.even());
        }
    }

    #[test]
    fn commutator_rotation_is_minus_one() {
        let r = 0.73;
        let hx = quat_decompose(&block_h_x(r), r).unwrap();
        let hy = quat_decompose(&block_h_y(r), r).unwrap();
        let k = commutator(&hx, &hy);
        assert_eq!(k.q, [-1, 0, 0, 0]);
        assert!(k.a != [0; 4] && k.even());
    }

    #[test]
    fn lattice_examples() {
        let l = lattice_build(0.6).unwrap();
        assert_eq!(l.minimal_vectors(3).len(), 24);
        // Gram matrix is 4r² times the integer D4 Gram matrix.
        for i in 0..4 {
            for j in 0..4 {
                let g: i64 = (0..4).map(|k| EVEN_BASIS[i][k] * EVEN_BASIS[j][k]).sum();
                assert!((l.gram[i][j] - 4.0 * 0.36 * g as f64).abs() < 1e-12);
            }
        }
        for (a, _) in l.enumerate(2) {
            let n = l.basis_coordinates(a).unwrap();
            let back: [i64; 4] = std::array::from_fn(|k| (0..4).map(|b| n[b] * EVEN_BASIS[b][k]).sum());
            assert_eq!(back, a);
        }
        assert!(l.basis_coordinates([1, 0, 0, 0]).is_none());
        assert!(lattice_build(0.0).is_err());
    }

    #[test]
    fn reduce_removes_lattice_vectors() {
        let l = lattice_build(0.5).unwrap();
        let small = [0.1, -0.05, 0.2, 0.03];
        let p = lattice_point([1, 2, -1, 0], 0.5);
        let x: [f64; 4] = std::array::from_fn(|k| small[k] + p[k]);
        let red = l.reduce(x);
        for k in 0..4 {
            assert!((red[k] - small[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_translations_in_lattice() {
        let r = 0.73;
        let hx = quat_decompose(&block_h_x(r), r).unwrap();
        let hy = quat_decompose(&block_h_y(r), r).unwrap();
        let l = lattice_build(r).unwrap();
        for (_, w) in words(hx, hy, 4) {
            if w.q == [1, 0, 0, 0] {
                assert!(l.basis_coordinates(w.a).is_some());
            }
        }
    }
}
