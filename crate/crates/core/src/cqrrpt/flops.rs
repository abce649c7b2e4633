//! Arithmetic cost model of the full algorithm.

use crate::error::{Error, Result};

/// Six times the model's count excluding the sketching cost, as an exact
/// integer: `2mk² + mk(k+1) + 4dnk − 2k²(d+n) + 5k³/3 + k²/2 + k/6`.
pub fn flop_model_sixths(m: u64, n: u64, k: u64, d: u64) -> i128 {
    let (m, n, k, d) = (m as i128, n as i128, k as i128, d as i128);
    12 * m * k * k + 6 * m * k * (k + 1) + 24 * d * n * k - 12 * k * k * (d + n)
        + 10 * k * k * k
        + 3 * k * k
        + k
}

/// Flop count for sketch dimension `d`, rank `k` and sketching cost `c_sk`.
pub fn flop_model(m: usize, n: usize, k: usize, d: usize, c_sk: f64) -> Result<f64> {
    if k > d.min(n) {
        return Err(Error::InvalidArgument(format!(
            "flop model needs k <= min(d, n), got k={k}, d={d}, n={n}"
        )));
    }
    let sixths = flop_model_sixths(m as u64, n as u64, k as u64, d as u64);
    Ok(sixths as f64 / 6.0 + c_sk)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point() {
        let v = flop_model(1000, 100, 100, 125, 0.0).unwrap();
        assert!((v - 32_271_683.333_333_33).abs() < 1e-6);
        assert!((v / 3.227e7 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_rank_is_sketch_cost() {
        assert_eq!(flop_model(500, 40, 0, 50, 123.5).unwrap(), 123.5);
    }

    #[test]
    fn rank_above_bounds_rejected() {
        assert!(flop_model(10, 4, 5, 8, 0.0).is_err());
        assert!(flop_model(10, 8, 6, 5, 0.0).is_err());
    }
}
