//! Distance metrics and the scalar kernels behind them.
//!
//! All ordering in the crate is "smaller distance = closer". L2 distances are
//! squared Euclidean; inner-product and cosine similarities are negated so that
//! every candidate queue sorts ascending with a single comparator. Cosine
//! datasets are L2-normalized at ingest, after which cosine distance equals the
//! negated inner product.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L2,
    Ip,
    Cosine,
}

impl Metric {
    pub fn to_u8(self) -> u8 {
        match self {
            Metric::L2 => 0,
            Metric::Ip => 1,
            Metric::Cosine => 2,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Metric::L2),
            1 => Ok(Metric::Ip),
            2 => Ok(Metric::Cosine),
            _ => Err(Error::malformed(format!("unknown metric code {v}"))),
        }
    }

    /// Distance between two f32 vectors under this metric.
    #[inline]
    pub fn dist_f32(self, a: &[f32], b: &[f32]) -> f32 {
        match self {
            Metric::L2 => l2_sq_f32(a, b),
            // Cosine data is normalized at ingest, so both reduce to -dot.
            Metric::Ip | Metric::Cosine => 0.0 - dot_f32(a, b),
        }
    }

    /// Distance between an f32 query and a u8 row.
    #[inline]
    pub fn dist_f32_u8(self, q: &[f32], row: &[u8]) -> f32 {
        match self {
            Metric::L2 => l2_sq_f32_u8(q, row),
            Metric::Ip | Metric::Cosine => 0.0 - dot_f32_u8(q, row),
        }
    }
}

/// Total order on (distance, id) pairs; ties break toward the smaller id so
/// that every queue, oracle, and engine ranks candidates identically.
#[inline]
pub fn cmp_dist_id(da: f32, ia: u32, db: f32, ib: u32) -> Ordering {
    da.total_cmp(&db).then(ia.cmp(&ib))
}

macro_rules! lane_kernel {
    ($a:ident, $b:ident, $term:expr) => {{
        debug_assert_eq!($a.len(), $b.len());
        let n = $a.len();
        let chunks = n / 8;
        let mut acc = [0.0f32; 8];
        for c in 0..chunks {
            let pa = &$a[c * 8..c * 8 + 8];
            let pb = &$b[c * 8..c * 8 + 8];
            for l in 0..8 {
                let (x, y) = (pa[l], pb[l]);
                acc[l] += $term(x, y);
            }
        }
        for i in chunks * 8..n {
            let (x, y) = ($a[i], $b[i]);
            acc[0] += $term(x, y);
        }
        let s0 = acc[0] + acc[4];
        let s1 = acc[1] + acc[5];
        let s2 = acc[2] + acc[6];
        let s3 = acc[3] + acc[7];
        (s0 + s2) + (s1 + s3)
    }};
}

#[inline]
pub fn l2_sq_f32(a: &[f32], b: &[f32]) -> f32 {
    lane_kernel!(a, b, |x: f32, y: f32| {
        let d = x - y;
        d * d
    })
}

#[inline]
pub fn dot_f32(a: &[f32], b: &[f32]) -> f32 {
    lane_kernel!(a, b, |x: f32, y: f32| x * y)
}

#[inline]
pub fn l2_sq_f32_u8(q: &[f32], row: &[u8]) -> f32 {
    lane_kernel!(q, row, |x: f32, y: u8| {
        let d = x - y as f32;
        d * d
    })
}

#[inline]
pub fn dot_f32_u8(q: &[f32], row: &[u8]) -> f32 {
    lane_kernel!(q, row, |x: f32, y: u8| x * y as f32)
}

/// L2 norm of a vector.
pub fn norm_f32(a: &[f32]) -> f32 {
    dot_f32(a, a).sqrt()
}

/// Normalize a vector in place. Errors on zero (or denormal-tiny) norm since a
/// direction-less vector has no cosine similarity.
pub fn normalize_f32(a: &mut [f32]) -> Result<()> {
    let n = norm_f32(a);
    if !(n.is_finite() && n > f32::MIN_POSITIVE) {
        return Err(Error::malformed("cannot normalize zero-norm vector"));
    }
    let inv = 1.0 / n;
    for x in a.iter_mut() {
        *x *= inv;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_l2(a: &[f32], b: &[f32]) -> f32 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    fn naive_dot(a: &[f32], b: &[f32]) -> f32 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn kernels_match_naive() {
        let mut rng = 0x12345u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((rng >> 33) as f32 / u32::MAX as f32) * 2.0 - 0.5
        };
        for n in [1usize, 3, 7, 8, 15, 16, 33, 128] {
            let a: Vec<f32> = (0..n).map(|_| next()).collect();
            let b: Vec<f32> = (0..n).map(|_| next()).collect();
            let l2 = l2_sq_f32(&a, &b);
            let dp = dot_f32(&a, &b);
            assert!((l2 - naive_l2(&a, &b)).abs() <= 1e-4 * l2.abs().max(1.0));
            assert!((dp - naive_dot(&a, &b)).abs() <= 1e-4 * dp.abs().max(1.0));
        }
    }

    #[test]
    fn u8_kernels_match_f32_path() {
        let row: Vec<u8> = (0..37).map(|i| (i * 7 % 256) as u8).collect();
        let q: Vec<f32> = (0..37).map(|i| i as f32 * 0.25).collect();
        let row_f: Vec<f32> = row.iter().map(|&v| v as f32).collect();
        assert_eq!(l2_sq_f32_u8(&q, &row), l2_sq_f32(&q, &row_f));
        assert_eq!(dot_f32_u8(&q, &row), dot_f32(&q, &row_f));
    }

    #[test]
    fn tie_breaks_toward_smaller_id() {
        assert_eq!(cmp_dist_id(1.0, 3, 1.0, 7), Ordering::Less);
        assert_eq!(cmp_dist_id(1.0, 7, 1.0, 3), Ordering::Greater);
        assert_eq!(cmp_dist_id(0.5, 9, 1.0, 1), Ordering::Less);
    }

    #[test]
    fn ip_distance_has_no_negative_zero() {
        let a = [0.0f32, 1.0];
        let b = [1.0f32, 0.0];
        let d = Metric::Ip.dist_f32(&a, &b);
        assert_eq!(d.to_bits(), 0.0f32.to_bits());
    }

    #[test]
    fn normalize_rejects_zero() {
        let mut v = [0.0f32; 4];
        assert!(normalize_f32(&mut v).is_err());
        let mut v = [3.0f32, 4.0];
        normalize_f32(&mut v).unwrap();
        assert!((v[0] - 0.6).abs() < 1e-6 && (v[1] - 0.8).abs() < 1e-6);
    }
}
