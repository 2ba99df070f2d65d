//! Arbitrary-length DFT helpers.
//!
//! Every spectral identity in this crate is an expansion over the cyclic dual
//! group of `F_q^×`, whose order `q − 1` is an arbitrary composite number, so
//! the planner must handle any length (Bluestein/Rader behind a mixed-radix
//! fast path for smooth sizes). Plans are cached per length.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place forward transform: `out[j] = Σ_k buf[k]·e(−jk/n)`.
pub fn forward(buf: &mut [Complex64]) {
    if buf.len() > 1 {
        plan(buf.len(), false).process(buf);
    }
}

/// In-place unnormalized inverse transform: `out[j] = Σ_k buf[k]·e(+jk/n)`.
pub fn inverse_unnormalized(buf: &mut [Complex64]) {
    if buf.len() > 1 {
        plan(buf.len(), true).process(buf);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn naive(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| x[k] * Complex64::from_polar(1.0, sign * TAU * (j * k % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_awkward_lengths() {
        // 12 = smooth, 30 = 2·3·5, 96 = q−1 for q = 97, 106 = 2·53 (large prime factor)
        for n in [1usize, 2, 12, 30, 96, 106] {
            let x: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()))
                .collect();
            let mut fwd = x.clone();
            forward(&mut fwd);
            let mut inv = x.clone();
            inverse_unnormalized(&mut inv);
            let nf = naive(&x, -1.0);
            let ni = naive(&x, 1.0);
            for j in 0..n {
                assert!((fwd[j] - nf[j]).norm() < 1e-9 * n as f64, "fwd n={n} j={j}");
                assert!((inv[j] - ni[j]).norm() < 1e-9 * n as f64, "inv n={n} j={j}");
            }
        }
    }

    #[test]
    fn forward_then_inverse_is_identity_up_to_n() {
        let n = 9972; // q − 1 for q = 9973
        let x: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.1).cos()))
            .collect();
        let mut y = x.clone();
        forward(&mut y);
        inverse_unnormalized(&mut y);
        for k in (0..n).step_by(997) {
            assert!((y[k] / n as f64 - x[k]).norm() < 1e-9);
        }
    }
}
