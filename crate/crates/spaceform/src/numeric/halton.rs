//! Halton low-discrepancy points.

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    acc
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// The `i`-th point of the `D`-dimensional Halton sequence, skipping `seed` leading points.
///
/// Index zero of the raw sequence (the origin) is never returned.
pub fn halton<const D: usize>(seed: u64, i: u64) -> [f64; D] {
    assert!(D <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
    let n = seed.wrapping_add(i).wrapping_add(1);
    let mut out = [0.0; D];
    for (k, o) in out.iter_mut().enumerate() {
        *o = radical_inverse(n, PRIMES[k]);
    }
    out
}
