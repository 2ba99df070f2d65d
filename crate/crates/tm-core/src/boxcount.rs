//! Counting solutions of monomial congruences `(l^a m^b n^c)^d ≡ 1 (mod q)`
//! in dyadic boxes, the sub-threshold vanishing region, lattice minima of
//! `Λ_ξ = {(x, y) : x − ξy ≡ 0 mod q}`, ratio scans against the
//! square-root-cancellation bound shape, and prime-averaged counts.

use crate::ffield::primes_in;
use num_bigint::BigUint;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

/// Default work budget (inner-loop iterations) guarding CLI misuse.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoxError {
    #[error("work budget exceeded ({0} iterations over budget {1})")]
    BudgetExceeded(u64, u64),
}

/// A dyadic box-count request: boxes are `(L,2L] × (M,2M] × (N,2N]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoxCountRequest {
    pub q: u64,
    pub a: u64,
    pub b: u64,
    /// Signed third exponent.
    pub c: i64,
    pub d: u64,
    pub l: u64,
    pub m: u64,
    pub n: u64,
}

fn pow_mod(mut base: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    base %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        e >>= 1;
    }
    acc
}

fn inv_mod(x: u64, q: u64) -> u64 {
    pow_mod(x, q - 2, q)
}

/// Signed-exponent power of a unit mod a prime `q`.
fn pow_signed(x: u64, e: i64, q: u64) -> u64 {
    let p = pow_mod(x, e.unsigned_abs(), q);
    if e < 0 {
        inv_mod(p, q)
    } else {
        p
    }
}

/// Exact integer test of `l^a m^b n^c = 1` (the excluded exact solutions).
fn is_exact_solution(l: u64, m: u64, n: u64, a: u64, b: u64, c: i64) -> bool {
    if c > 0 {
        l == 1 && m == 1 && n == 1
    } else {
        // l^a m^b = n^{|c|} over the integers
        BigUint::from(l).pow(a as u32) * BigUint::from(m).pow(b as u32)
            == BigUint::from(n).pow(c.unsigned_abs() as u32)
    }
}

/// Exact count over arbitrary half-open integer ranges, with the rational
/// solutions `l^a m^b n^c = 1` excluded. The congruence test costs one table
/// lookup per `(l, m)` pair: the `n` range is indexed by `n^{−cd} mod q`.
pub fn count_ranges(
    q: u64,
    a: u64,
    b: u64,
    c: i64,
    d: u64,
    l_range: (u64, u64),
    m_range: (u64, u64),
    n_range: (u64, u64),
    budget: u64,
) -> Result<u64, BoxError> {
    let span = |r: (u64, u64)| r.1.saturating_sub(r.0);
    let work = span(n_range) + span(l_range) * span(m_range).max(1) + span(m_range);
    if work > budget {
        return Err(BoxError::BudgetExceeded(work, budget));
    }

    let mut by_key: HashMap<u64, Vec<u64>> = HashMap::new();
    for n in n_range.0 + 1..=n_range.1 {
        if n % q == 0 {
            continue;
        }
        let key = pow_signed(n % q, -(c * d as i64), q);
        by_key.entry(key).or_default().push(n);
    }
    let mb: Vec<u64> = (m_range.0 + 1..=m_range.1)
        .map(|m| {
            if m % q == 0 {
                0
            } else {
                pow_mod(m % q, b * d, q)
            }
        })
        .collect();

    let mut count = 0u64;
    for l in l_range.0 + 1..=l_range.1 {
        if l % q == 0 {
            continue;
        }
        let la = pow_mod(l % q, a * d, q);
        for (i, &mbv) in mb.iter().enumerate() {
            if mbv == 0 {
                continue;
            }
            let key = la * mbv % q;
            if let Some(ns) = by_key.get(&key) {
                let m = m_range.0 + 1 + i as u64;
                for &n in ns {
                    if !is_exact_solution(l, m, n, a, b, c) {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// `N_{a,b,c,d}(L, M, N; q)` over the dyadic boxes `(L,2L]×(M,2M]×(N,2N]`.
pub fn count_box(req: &BoxCountRequest) -> Result<u64, BoxError> {
    count_box_with_budget(req, DEFAULT_BUDGET)
}

pub fn count_box_with_budget(req: &BoxCountRequest, budget: u64) -> Result<u64, BoxError> {
    count_ranges(
        req.q,
        req.a,
        req.b,
        req.c,
        req.d,
        (req.l, 2 * req.l),
        (req.m, 2 * req.m),
        (req.n, 2 * req.n),
        budget,
    )
}

/// The sub-threshold cutoff: every box with `LMN` at or below this value has
/// a zero count.
pub fn vanishing_threshold(q: u64, d: u64, max_exp: u64) -> f64 {
    (q as f64).powf(0.5 / (d * max_exp) as f64) / 6.0
}

/// Minimum of `|x| + |y|` over the nonzero points of
/// `Λ_ξ = {(x,y) : x ≡ ξ·y mod q}`, by Gauss (Lagrange) reduction of the
/// basis `{(ξ, 1), (q, 0)}` followed by local enumeration.
pub fn lattice_min(q: u64, xi: u64) -> u64 {
    assert!(xi % q != 0);
    let mut u = (xi as i64 % q as i64, 1i64);
    let mut v = (q as i64, 0i64);
    let norm2 = |w: (i64, i64)| w.0 * w.0 + w.1 * w.1;
    let dot = |x: (i64, i64), y: (i64, i64)| x.0 * y.0 + x.1 * y.1;
    loop {
        if norm2(u) > norm2(v) {
            std::mem::swap(&mut u, &mut v);
        }
        let mu = (dot(u, v) as f64 / norm2(u) as f64).round() as i64;
        let w = (v.0 - mu * u.0, v.1 - mu * u.1);
        if norm2(w) >= norm2(v) {
            break;
        }
        v = w;
    }
    let mut best = u64::MAX;
    for i in -2i64..=2 {
        for j in -2i64..=2 {
            if i == 0 && j == 0 {
                continue;
            }
            let x = i * u.0 + j * v.0;
            let y = i * u.1 + j * v.1;
            best = best.min((x.unsigned_abs()) + (y.unsigned_abs()));
        }
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub q: u64,
    pub a: u64,
    pub b: u64,
    pub c: i64,
    pub d: u64,
    pub l: u64,
    pub m: u64,
    pub n: u64,
    pub count: u64,
    /// `count / √(LMN)`.
    pub ratio: f64,
    /// `√(LMN)/q + (LMN)^{−η₀}`.
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub eta0: f64,
    pub rows: Vec<ScanRow>,
    /// `max_cells ratio/rhs`, the empirical `q^ε` factor.
    pub fitted_qeps: f64,
}

/// Scans the full dyadic grid `LMN ≤ q²` and compares each cell count with
/// the square-root-cancellation bound shape at the given `η₀`. Pure
/// measurement.
pub fn conjp_ratio_scan(
    q: u64,
    a: u64,
    b: u64,
    c: i64,
    d: u64,
    eta0: f64,
    budget: u64,
) -> Result<ScanReport, BoxError> {
    let mut rows = Vec::new();
    let mut fitted: f64 = 0.0;
    let qq = (q * q) as f64;
    let mut l = 1u64;
    while (l as f64) <= qq {
        let mut m = 1u64;
        while (l as f64) * (m as f64) <= qq {
            let mut n = 1u64;
            while (l as f64) * (m as f64) * (n as f64) <= qq {
                let req = BoxCountRequest { q, a, b, c, d, l, m, n };
                let count = count_box_with_budget(&req, budget)?;
                let lmn = (l as f64) * (m as f64) * (n as f64);
                let ratio = count as f64 / lmn.sqrt();
                let rhs = lmn.sqrt() / q as f64 + lmn.powf(-eta0);
                if rhs > 0.0 {
                    fitted = fitted.max(ratio / rhs);
                }
                rows.push(ScanRow { q, a, b, c, d, l, m, n, count, ratio, rhs });
                n *= 2;
            }
            m *= 2;
        }
        l *= 2;
    }
    Ok(ScanReport { eta0, rows, fitted_qeps: fitted })
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeAverageRow {
    pub q: u64,
    pub count: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeAverage {
    pub rows: Vec<PrimeAverageRow>,
    pub mean_ratio: f64,
    /// `mean·Q / (√(LMN)·log Q)`, the constant of the averaged bound.
    pub constant: f64,
    /// Verified: each counted triple gives a nonzero multiple of `q`.
    pub divisor_check_ok: bool,
}

/// Mean of `N/√(LMN)` over the primes `q ∈ [Q, 2Q)`, with the exact
/// divisor-argument companion check.
#[allow(clippy::too_many_arguments)]
pub fn average_over_primes(
    a: u64,
    b: u64,
    c: i64,
    d: u64,
    q_lo: u64,
    l: u64,
    m: u64,
    n: u64,
    budget: u64,
) -> Result<PrimeAverage, BoxError> {
    assert!(q_lo >= 3);
    let primes = primes_in(q_lo, 2 * q_lo);
    let lmn_sqrt = ((l * m * n) as f64).sqrt();
    let mut rows = Vec::with_capacity(primes.len());
    let mut ok = true;
    for &q in &primes {
        let req = BoxCountRequest { q, a, b, c, d, l, m, n };
        let count = count_box_with_budget(&req, budget)?;
        // companion: recount by exact integer arithmetic
        let mut exact = 0u64;
        for li in l + 1..=2 * l {
            for mi in m + 1..=2 * m {
                for ni in n + 1..=2 * n {
                    if li % q == 0 || mi % q == 0 || ni % q == 0 {
                        continue;
                    }
                    let lm = BigUint::from(li).pow(a as u32) * BigUint::from(mi).pow(b as u32);
                    let (x, y) = if c > 0 {
                        ((lm * BigUint::from(ni).pow(c as u32)).pow(d as u32), BigUint::from(1u32))
                    } else {
                        (lm.pow(d as u32), BigUint::from(ni).pow((c.unsigned_abs() * d) as u32))
                    };
                    if x != y && &x % q == &y % q {
                        exact += 1;
                    }
                }
            }
        }
        if exact != count {
            ok = false;
        }
        rows.push(PrimeAverageRow {
            q,
            count,
            ratio: count as f64 / lmn_sqrt,
        });
    }
    let mean = rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len().max(1) as f64;
    let qf = q_lo as f64;
    Ok(PrimeAverage {
        rows,
        mean_ratio: mean,
        constant: mean * qf / (lmn_sqrt * qf.ln()),
        divisor_check_ok: ok,
    })
}
