//! Carlson's symmetric elliptic integral of the first kind.

use super::{lit, Real};

/// R_F(x, y, z) by the duplication theorem.
///
/// Arguments must be non-negative with at most one of them zero.
pub fn carlson_rf<T: Real>(x: T, y: T, z: T) -> Option<T> {
    let zero = T::zero();
    if x < zero || y < zero || z < zero {
        return None;
    }
    let zeros = [x, y, z].iter().filter(|v| **v == zero).count();
    if zeros > 1 || !(x + y + z).is_finite() {
        return None;
    }
    let (x0, y0) = (x, y);
    let (mut x, mut y, mut z) = (x, y, z);
    let three: T = lit(3.0);
    let quarter: T = lit(0.25);
    let a0 = (x + y + z) / three;
    let mut a = a0;
    // Stopping threshold for relative error ~ eps.
    let q = (three * T::epsilon()).powf(lit(-1.0 / 6.0)) * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut pow4 = T::one();
    for _ in 0..100 {
        if q * pow4 < a.abs() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = (x + lam) * quarter;
        y = (y + lam) * quarter;
        z = (z + lam) * quarter;
        a = (a + lam) * quarter;
        pow4 = pow4 * quarter;
    }
    let xx = (a0 - x0) * pow4 / a;
    let yy = (a0 - y0) * pow4 / a;
    let zz = -(xx + yy);
    let e2 = xx * yy - zz * zz;
    let e3 = xx * yy * zz;
    let series = T::one() - e2 / lit(10.0) + e3 / lit(14.0) + e2 * e2 / lit(24.0) - lit::<T>(3.0) * e2 * e3 / lit(44.0);
    Some(series / a.sqrt())
}
