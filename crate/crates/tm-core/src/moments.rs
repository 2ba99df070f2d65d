//! Twisted cubic moments `M_{a,b,±c}(ξ; q)`: even/odd split, the
//! `d`-decomposition over roots of unity, the M₁ (congruence) and M₂
//! (trace-function) halves of the averaged approximate functional equation,
//! the Dirichlet-series main term `D_{a,b,−c}(s)`, convergence studies over
//! primes, and the non-vanishing count with its Hölder lower bound.

use crate::ffield::{primes_in, CharIndex, PrimeField};
use crate::special::{self, for_each_coprime_triple, v_interp, GammaProfile, LValueTable};
#[cfg(test)]
use crate::trace::k_table_spectral;
use crate::triples::{Sign, TripleSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MomentError {
    #[error("induced triple: c ∈ {{a, b}} gives a ζ(2s) pole at the center")]
    InducedTriple,
    #[error("prime budget exceeded: {0} > {1}")]
    BudgetExceeded(u64, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Per-prime state shared by the moment computations: the field plus the
/// full central L-value table.
pub struct MomentContext<'a> {
    pub field: &'a PrimeField,
    pub ltab: LValueTable,
}

impl<'a> MomentContext<'a> {
    pub fn new(field: &'a PrimeField) -> Self {
        MomentContext {
            field,
            ltab: LValueTable::build(field),
        }
    }

    fn n(&self) -> u64 {
        self.field.phi()
    }

    /// `ΠL(1/2, χ_t^{e_i})` by table lookup.
    fn l_product(&self, t: u64, exps: [i64; 3]) -> Complex64 {
        exps.iter().map(|&e| self.ltab.value(t as i64 * e)).product()
    }
}

/// `M(ξ; q) = (1/(q−1)) Σ_χ χ̄(ξ)·L(1/2,χ^{e0})L(1/2,χ^{e1})L(1/2,χ^{e2})`,
/// every character included (trivial powers through the ζ-branch values).
pub fn moment_direct(ctx: &MomentContext, exps: [i64; 3], xi: u64) -> Complex64 {
    let n = ctx.n();
    let mut acc = Complex64::new(0.0, 0.0);
    for t in 0..n {
        acc += ctx.field.chi(t, xi % ctx.field.q()).conj() * ctx.l_product(t, exps);
    }
    acc / n as f64
}

/// The even/odd parts `(M^e, M^o)`; `(M^e + M^o)/2 = M` exactly.
pub fn moment_even_odd(ctx: &MomentContext, exps: [i64; 3], xi: u64) -> (Complex64, Complex64) {
    let n = ctx.n();
    let mut even = Complex64::new(0.0, 0.0);
    let mut odd = Complex64::new(0.0, 0.0);
    for t in 0..n {
        let term = ctx.field.chi(t, xi % ctx.field.q()).conj() * ctx.l_product(t, exps);
        if t % 2 == 0 {
            even += term;
        } else {
            odd += term;
        }
    }
    (even * 2.0 / n as f64, odd * 2.0 / n as f64)
}

/// Residual of `M_{ad,bd,cd}(q) = Σ_{ξ ∈ μ_{d′}} M_{a,b,c}(ξ; q)` with
/// `d′ = gcd(d, q−1)`; an exact finite identity.
pub fn d_decomposition_check(ctx: &MomentContext, triple: TripleSpec, d: u64) -> f64 {
    let lhs = moment_direct(ctx, triple.scaled(d), 1);
    let mut rhs = Complex64::new(0.0, 0.0);
    for xi in ctx.field.mu_d(d) {
        rhs += moment_direct(ctx, triple.exponents(), xi);
    }
    (lhs - rhs).norm()
}

/// Exact-equality test `l^{e0} m^{e1} n^{e2} = 1` over the rationals.
fn is_exact_solution(lmn: [u64; 3], triple: TripleSpec) -> bool {
    match triple.sign {
        Sign::Plus => lmn == [1, 1, 1],
        Sign::Minus => {
            let pow = |x: u64, e: u64| (x as u128).checked_pow(e as u32);
            match (pow(lmn[0], triple.a).zip(pow(lmn[1], triple.b)), pow(lmn[2], triple.c)) {
                (Some((la, mb)), Some(nc)) => la.checked_mul(mb) == Some(nc),
                _ => {
                    use num_bigint::BigUint;
                    BigUint::from(lmn[0]).pow(triple.a as u32)
                        * BigUint::from(lmn[1]).pow(triple.b as u32)
                        == BigUint::from(lmn[2]).pow(triple.c as u32)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct M1Report {
    /// The congruence form `Σ_{l^a m^b n^c ≡ ξ} (lmn)^{−1/2} V_•(lmn/X)`.
    pub value: f64,
    /// Contribution of the exact rational solutions (nonzero only at ξ = 1).
    pub main_term: f64,
    pub error_term: f64,
    /// The character-average form, for the two-route comparison.
    pub char_avg: (f64, f64),
    pub two_form_residual: f64,
    pub x: f64,
}

/// `M₁^•(ξ; q)` at length `X`, computed by both the character-average and
/// the congruence route; returns the congruence form (a sum of positive
/// terms).
pub fn m1_sum(ctx: &MomentContext, triple: TripleSpec, xi: u64, x: f64, parity: Parity) -> M1Report {
    let field = ctx.field;
    let q = field.q();
    let xi = xi % q;
    let exps = triple.exponents();
    let interp = v_interp(GammaProfile::for_parity(parity == Parity::Even, exps));
    let cut = ((interp.y_cut * x).floor() as u64).max(1);

    let mut value = 0.0f64;
    let mut main = 0.0f64;
    let mut classes = vec![0.0f64; ctx.n() as usize];
    for_each_coprime_triple(field, exps, cut, |lmn, v, k| {
        let w = interp.eval(k as f64 / x) / (k as f64).sqrt();
        classes[(v - 1) as usize] += w;
        if v == xi {
            value += w;
            if is_exact_solution(lmn, triple) {
                main += w;
            }
        }
    });

    // character-average route: (1/(q−1)) Σ_χ Σ_v χ(v ξ̄) A[v]
    let xi_inv = field.inv(xi);
    let mut avg = Complex64::new(0.0, 0.0);
    for t in 0..ctx.n() {
        let mut s = Complex64::new(0.0, 0.0);
        for v in 1..q {
            let a = classes[(v - 1) as usize];
            if a != 0.0 {
                s += field.chi(t, field.mul(v, xi_inv)) * a;
            }
        }
        avg += s;
    }
    avg /= ctx.n() as f64;

    M1Report {
        value,
        main_term: main,
        error_term: value - main,
        char_avg: (avg.re, avg.im),
        two_form_residual: (avg - value).norm(),
        x,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct M2Report {
    /// The trace-function form
    /// `(ι_•/√q) Σ (lmn)^{−1/2} K_{a,b,±c}(ξ l^a m^b n^{±c}) V_•(lmn/Y)`.
    pub value: (f64, f64),
    /// The ε-factor character-average form.
    pub char_avg: (f64, f64),
    pub two_form_residual: f64,
    /// `|M₂|·√q/√Y`, the constant against the trivial bound `√Y/√q`.
    pub trivial_ratio: f64,
    pub y: f64,
}

/// `M₂^•(ξ; q)` at length `Y`, by both the Gauss-sum character average and
/// the `K_{a,b,±c}` trace-table route; returns the trace-function form.
pub fn m2_sum(ctx: &MomentContext, triple: TripleSpec, xi: u64, y: f64, parity: Parity) -> M2Report {
    let field = ctx.field;
    let q = field.q();
    let xi = xi % q;
    let exps = triple.exponents();
    let profile = GammaProfile::for_parity(parity == Parity::Even, exps);
    let interp = v_interp(profile);
    let iota = profile.iota();
    let cut = ((interp.y_cut * y).floor() as u64).max(1);

    let mut classes = vec![0.0f64; ctx.n() as usize];
    for_each_coprime_triple(field, exps, cut, |_, v, k| {
        classes[(v - 1) as usize] += interp.eval(k as f64 / y) / (k as f64).sqrt();
    });

    let table = k_table_spectral(field, triple.a, triple.b, exps[2]);
    let mut k_form = Complex64::new(0.0, 0.0);
    for v in 1..q {
        let a = classes[(v - 1) as usize];
        if a != 0.0 {
            k_form += a * table.value(field.mul(xi, v));
        }
    }
    k_form *= iota / (q as f64).sqrt();

    let mut avg = Complex64::new(0.0, 0.0);
    for t in 0..ctx.n() {
        let eps: Complex64 = exps
            .iter()
            .map(|&e| field.epsilon_factor(CharIndex(field.reduce_exp(t as i64 * e))))
            .product();
        let mut s = Complex64::new(0.0, 0.0);
        for v in 1..q {
            let a = classes[(v - 1) as usize];
            if a != 0.0 {
                s += field.chi(t, field.mul(xi, v)).conj() * a;
            }
        }
        avg += eps * s;
    }
    avg *= iota / ctx.n() as f64;

    M2Report {
        value: (k_form.re, k_form.im),
        char_avg: (avg.re, avg.im),
        two_form_residual: (avg - k_form).norm(),
        trivial_ratio: k_form.norm() * (q as f64).sqrt() / y.sqrt(),
        y,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AfeMomentReport {
    pub even_direct: f64,
    pub odd_direct: f64,
    pub four_term_even: f64,
    pub four_term_odd: f64,
    pub correction_even: f64,
    pub correction_odd: f64,
    pub residual_even: f64,
    pub residual_odd: f64,
    pub x: f64,
    pub y: f64,
}

/// Checks the averaged-AFE decompositions
/// `M^e(ξ) = M₁^e(ξ)+M₁^e(−ξ)+M₂^e(ξ)+M₂^e(−ξ) + corr^e` and
/// `M^o(ξ) = M₁^o(ξ)−M₁^o(−ξ)+M₂^o(ξ)−M₂^o(−ξ) + corr^o`,
/// where `corr^•` is the exactly-computed AFE defect of the ≤ a+b+c
/// non-generic characters of that parity.
pub fn afe_moment_check(ctx: &MomentContext, triple: TripleSpec, xi: u64, x: f64) -> AfeMomentReport {
    let field = ctx.field;
    let q = field.q();
    let xi = xi % q;
    let neg_xi = q - xi;
    let exps = triple.exponents();
    let y = (q as f64).powi(3) / x;

    let (even, odd) = moment_even_odd(ctx, exps, xi);

    let m1 = |xi, par| m1_sum(ctx, triple, xi, x, par).value;
    let m2 = |xi, par| {
        let r = m2_sum(ctx, triple, xi, y, par).value;
        Complex64::new(r.0, r.1)
    };
    let four_even = Complex64::new(m1(xi, Parity::Even) + m1(neg_xi, Parity::Even), 0.0)
        + m2(xi, Parity::Even)
        + m2(neg_xi, Parity::Even);
    let four_odd = Complex64::new(m1(xi, Parity::Odd) - m1(neg_xi, Parity::Odd), 0.0)
        + m2(xi, Parity::Odd)
        - m2(neg_xi, Parity::Odd);

    let n = ctx.n();
    let correction = |want_even: bool| {
        let profile = GammaProfile::for_parity(want_even, exps);
        let interp = v_interp(profile);
        let iota = profile.iota();
        let cut_x = ((interp.y_cut * x).floor() as u64).max(1);
        let cut_y = ((interp.y_cut * y).floor() as u64).max(1);
        let mut ax = vec![0.0f64; n as usize];
        let mut ay = vec![0.0f64; n as usize];
        for_each_coprime_triple(field, exps, cut_x, |_, v, k| {
            ax[(v - 1) as usize] += interp.eval(k as f64 / x) / (k as f64).sqrt();
        });
        for_each_coprime_triple(field, exps, cut_y, |_, v, k| {
            ay[(v - 1) as usize] += interp.eval(k as f64 / y) / (k as f64).sqrt();
        });
        let xi_inv = field.inv(xi);
        let mut corr = Complex64::new(0.0, 0.0);
        for t in 0..n {
            if (t % 2 == 0) != want_even {
                continue;
            }
            if exps.iter().all(|&e| (t as i64 * e).rem_euclid(n as i64) != 0) {
                continue; // generic characters have zero AFE defect
            }
            let lhs = field.chi(t, xi).conj() * ctx.l_product(t, exps);
            let eps: Complex64 = exps
                .iter()
                .map(|&e| field.epsilon_factor(CharIndex(field.reduce_exp(t as i64 * e))))
                .product();
            let mut sx = Complex64::new(0.0, 0.0);
            let mut sy = Complex64::new(0.0, 0.0);
            for v in 1..q {
                if ax[(v - 1) as usize] != 0.0 {
                    sx += field.chi(t, field.mul(v, xi_inv)) * ax[(v - 1) as usize];
                }
                if ay[(v - 1) as usize] != 0.0 {
                    sy += field.chi(t, field.mul(v, xi)).conj() * ay[(v - 1) as usize];
                }
            }
            corr += lhs - (sx + iota * eps * sy);
        }
        corr * 2.0 / n as f64
    };
    let corr_even = correction(true);
    let corr_odd = correction(false);

    AfeMomentReport {
        even_direct: even.re,
        odd_direct: odd.re,
        four_term_even: four_even.re,
        four_term_odd: four_odd.re,
        correction_even: corr_even.re,
        correction_odd: corr_odd.re,
        residual_even: (even - (four_even + corr_even)).norm(),
        residual_odd: (odd - (four_odd + corr_odd)).norm(),
        x,
        y,
    }
}

// ---------------------------------------------------------------------------
// Dirichlet-series main term
// ---------------------------------------------------------------------------

/// `c_{a,b,−c}(k)`: solutions `(α,β,γ) ≥ 0` of `α+β+γ = k`, `αa+βb = γc`.
pub fn dseries_coeff(a: u64, b: u64, c: u64, k: u64) -> u64 {
    let mut count = 0;
    for alpha in 0..=k {
        for beta in 0..=k - alpha {
            let gamma = k - alpha - beta;
            if alpha * a + beta * b == gamma * c {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Serialize)]
pub struct DirichletMainTerm {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub s: f64,
    pub value: f64,
    /// Rigorous bound on everything dropped (local tails, prime tail,
    /// log-coefficient tail).
    pub tail_bound: f64,
    pub coeff_prefix: Vec<u64>,
}

const DSERIES_K: usize = 80;
const DSERIES_J: usize = 60;
const DSERIES_SMALL_PRIMES: u64 = 97;

fn moebius(k: u64) -> i64 {
    let mut n = k;
    let mut mu = 1i64;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Prime zeta `P(x) = Σ_p p^{−x}` for real `x > 1`, via `Σ μ(k)/k·ln ζ(kx)`.
fn prime_zeta(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut k = 1u64;
    while (k as f64) * x <= 80.0 {
        let m = moebius(k);
        if m != 0 {
            acc += m as f64 / k as f64 * special::zeta(k as f64 * x).ln();
        }
        k += 1;
    }
    acc
}

/// `D_{a,b,−c}(s) = Σ_{l^a m^b = n^c} (lmn)^{−s}` with a rigorous tail
/// bound, for `c ∉ {a, b}` and `s > 1/3`.
///
/// Local Euler factors are expanded exactly for `p ≤ 97`; the rest of the
/// product is summed through the prime zeta function applied to the
/// log-series of the common local factor. The coefficient bound
/// `c(k) ≤ k+1` (one solution per γ, or per split when `a = b`) gives the
/// Cauchy bound `|d_j| ≤ 0.2877·3^j` used for the tail.
pub fn dseries_value(a: u64, b: u64, c: u64, s: f64, tol: f64) -> Result<DirichletMainTerm, MomentError> {
    if c == a || c == b {
        return Err(MomentError::InducedTriple);
    }
    assert!(s > 1.0 / 3.0, "series diverges for s <= 1/3");
    let coeffs: Vec<f64> = (0..=DSERIES_K).map(|k| dseries_coeff(a, b, c, k as u64) as f64).collect();
    debug_assert!(coeffs[1] == 0.0 && coeffs[2] == 0.0);

    // log coefficients: j·d_j = j·c_j − Σ_{i<j} i·d_i·c_{j−i}
    let mut d = vec![0.0f64; DSERIES_J + 1];
    for j in 1..=DSERIES_J {
        let mut acc = j as f64 * coeffs[j];
        for i in 1..j {
            acc -= i as f64 * d[i] * coeffs[j - i];
        }
        d[j] = acc / j as f64;
    }

    let mut log_d = 0.0f64;
    let mut err = 0.0f64;
    for p in primes_in(2, DSERIES_SMALL_PRIMES + 1) {
        let x = (p as f64).powf(-s);
        let mut local = 0.0;
        for (k, &ck) in coeffs.iter().enumerate() {
            if ck != 0.0 {
                local += ck * x.powi(k as i32);
            }
        }
        // Σ_{k>K} (k+1)² x^k = x^{K+1}[(K+2)²/(1−x) + (2K+5)x/(1−x)² + 2x²/(1−x)³]
        let m = (DSERIES_K + 1) as f64;
        let tail = x.powi(DSERIES_K as i32 + 1)
            * ((m + 1.0) * (m + 1.0) / (1.0 - x)
                + (2.0 * m + 3.0) * x / (1.0 - x).powi(2)
                + 2.0 * x * x / (1.0 - x).powi(3));
        log_d += local.ln();
        err += tail / (local - tail).max(0.5);
    }

    let p_small: Vec<f64> = primes_in(2, DSERIES_SMALL_PRIMES + 1)
        .iter()
        .map(|&p| p as f64)
        .collect();
    let prime_zeta_above = |x: f64| prime_zeta(x) - p_small.iter().map(|p| p.powf(-x)).sum::<f64>();
    for (j, &dj) in d.iter().enumerate().skip(3) {
        if dj != 0.0 {
            log_d += dj * prime_zeta_above(j as f64 * s);
        }
    }
    // j > J tail: |d_j| ≤ 0.2877·3^j and P_{>97}(x) ≤ 101^{−x}(1 + 101/(x−1))
    let rho = 3.0 * 101f64.powf(-s);
    debug_assert!(rho < 1.0);
    let xj = (DSERIES_J as f64 + 1.0) * s;
    err += 0.2877 * (1.0 + 101.0 / (xj - 1.0)) * rho.powi(DSERIES_J as i32 + 1) / (1.0 - rho);

    let value = log_d.exp();
    let tail_bound = value * (err.exp() - 1.0).max(err) + 1e-12 * value;
    assert!(
        tail_bound <= tol,
        "tail bound {tail_bound:e} exceeds requested tolerance {tol:e}"
    );
    Ok(DirichletMainTerm {
        a,
        b,
        c,
        s,
        value,
        tail_bound,
        coeff_prefix: (0..=16).map(|k| dseries_coeff(a, b, c, k)).collect(),
    })
}

/// The main-term constant `D_{a,b,±c}`: 1 for the positive sign, the value
/// of the Dirichlet series at `s = 1/2` for the negative sign.
pub fn main_term(triple: TripleSpec) -> Result<f64, MomentError> {
    match triple.sign {
        Sign::Plus => Ok(1.0),
        Sign::Minus => Ok(dseries_value(triple.a, triple.b, triple.c, 0.5, 1e-6)?.value),
    }
}

// ---------------------------------------------------------------------------
// convergence studies and non-vanishing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub q: u64,
    pub moment: f64,
    pub moment_imag: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub triple: TripleSpec,
    pub d: u64,
    pub target: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log q`.
    pub slope: f64,
    /// Mean error over primes in `[100, 200)` and `[1000, 2000)`.
    pub early_window_avg: f64,
    pub late_window_avg: f64,
}

pub const MAX_CONVERGENCE_PRIME: u64 = 2003;

/// Per-prime `M_{ad,bd,±cd}(q)` against the main-term constant. Primes are
/// processed in parallel and merged in sorted order.
pub fn convergence_study(
    triple: TripleSpec,
    d: u64,
    primes: &[u64],
    budget: u64,
) -> Result<ConvergenceStudy, MomentError> {
    if let Some(&q) = primes.iter().find(|&&q| q > budget) {
        return Err(MomentError::BudgetExceeded(q, budget));
    }
    let target = main_term(triple)?;
    let exps = triple.scaled(d);
    let mut rows: Vec<ConvergenceRow> = primes
        .par_iter()
        .map(|&q| {
            let field = PrimeField::build(q).expect("prime");
            let ctx = MomentContext::new(&field);
            let m = moment_direct(&ctx, exps, 1);
            ConvergenceRow {
                q,
                moment: m.re,
                moment_imag: m.im,
                error: (m.re - target).abs(),
            }
        })
        .collect();
    rows.sort_by_key(|r| r.q);

    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| ((r.q as f64).ln(), r.error.ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let window = |lo: u64, hi: u64| {
        let sel: Vec<f64> = rows
            .iter()
            .filter(|r| r.q >= lo && r.q < hi)
            .map(|r| r.error)
            .collect();
        if sel.is_empty() {
            f64::NAN
        } else {
            sel.iter().sum::<f64>() / sel.len() as f64
        }
    };
    Ok(ConvergenceStudy {
        triple,
        d,
        target,
        early_window_avg: window(100, 200),
        late_window_avg: window(1000, 2000),
        rows,
        slope,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Threshold below which a central value counts as vanishing (one order of
/// magnitude above the 1e−9 L-value accuracy).
pub const NONVANISHING_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct NonvanishReport {
    pub q: u64,
    /// Characters with all three `|L(1/2, χ^{e_i})| >` threshold.
    pub count: u64,
    /// Characters with some factor within an order of magnitude of the
    /// threshold; flagged, not silently classified.
    pub borderline: u64,
    pub fourth_moments: [f64; 3],
    /// `(q−1)·M⁴ / Π fourth_moments`, the Hölder implication.
    pub hoelder_bound: f64,
    /// `fourth_moment(χ) / (log q)⁴`.
    pub fitted_c4: f64,
}

pub fn nonvanishing_count(ctx: &MomentContext, exps: [i64; 3]) -> NonvanishReport {
    let n = ctx.n();
    let mut count = 0u64;
    let mut borderline = 0u64;
    for t in 0..n {
        let mags = exps.map(|e| ctx.ltab.value(t as i64 * e).norm());
        if mags.iter().all(|&m| m > NONVANISHING_THRESHOLD) {
            count += 1;
        }
        if mags.iter().any(|&m| (1e-9..=1e-7).contains(&m)) {
            borderline += 1;
        }
    }
    let f4 = [
        ctx.ltab.fourth_moment(exps[0]),
        ctx.ltab.fourth_moment(exps[1]),
        ctx.ltab.fourth_moment(exps[2]),
    ];
    let m = moment_direct(ctx, exps, 1).re.max(0.0);
    let logq = (ctx.field.q() as f64).ln();
    NonvanishReport {
        q: ctx.field.q(),
        count,
        borderline,
        fourth_moments: f4,
        hoelder_bound: n as f64 * m.powi(4) / (f4[0] * f4[1] * f4[2]),
        fitted_c4: ctx.ltab.fourth_moment(1) / logq.powi(4),
    }
}

// ---------------------------------------------------------------------------
// trivial-character trend (d₃-weighted sums)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// Quadratic fit of `T(X)/√X` against `log X`: `[c₀, c₁, c₂]`.
    pub coeffs: [f64; 3],
    pub leading_positive: bool,
    pub r_squared: f64,
}

/// `T(X) = Σ_k d₃(k)·k^{−1/2}·V_e(k/X)`, fitted as `√X·P(log X)` with `P`
/// quadratic; a soft trend check of the trivial-character contribution.
pub fn d3_weighted_trend(xs: &[f64]) -> TrendReport {
    let interp = v_interp(GammaProfile::EVEN);
    let max_cut = xs.iter().fold(0.0f64, |a, &x| a.max(x * interp.y_cut)) as usize + 2;
    let mut spf = vec![0u32; max_cut + 1];
    for i in 2..=max_cut {
        if spf[i] == 0 {
            let mut j = i;
            while j <= max_cut {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    let mut d3 = vec![0u32; max_cut + 1];
    if max_cut >= 1 {
        d3[1] = 1;
    }
    for k in 2..=max_cut {
        let p = spf[k] as usize;
        let mut e = 0u32;
        let mut m = k;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        d3[k] = d3[m] * ((e + 1) * (e + 2) / 2);
    }
    let values: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let cut = ((interp.y_cut * x).floor() as usize).min(max_cut);
            let mut acc = 0.0;
            for k in 1..=cut {
                acc += d3[k] as f64 / (k as f64).sqrt() * interp.eval(k as f64 / x);
            }
            acc
        })
        .collect();

    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(&values)
        .map(|(&x, &t)| (x.ln(), t / x.sqrt()))
        .collect();
    let coeffs = quad_fit(&pts);
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (coeffs[0] + coeffs[1] * p.0 + coeffs[2] * p.0 * p.0)).powi(2))
        .sum();
    TrendReport {
        xs: xs.to_vec(),
        values,
        coeffs,
        leading_positive: coeffs[2] > 0.0,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
    }
}

fn quad_fit(pts: &[(f64, f64)]) -> [f64; 3] {
    // normal equations for y = c0 + c1 x + c2 x²
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for &(x, y) in pts {
        let row = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * y;
        }
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for j in col..3 {
                a[row][j] -= f * a[col][j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut c = [0.0f64; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for j in col + 1..3 {
            acc -= a[col][j] * c[j];
        }
        c[col] = acc / a[col][col];
    }
    c
}

// ---------------------------------------------------------------------------
// consolidated per-(q, triple) report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub q: u64,
    pub triple: String,
    pub d: u64,
    pub xi: u64,
    pub x: f64,
    pub y: f64,
    pub m: (f64, f64),
    pub m_even: (f64, f64),
    pub m_odd: (f64, f64),
    pub m1_even: M1Report,
    pub m1_odd: M1Report,
    pub m2_even: M2Report,
    pub m2_odd: M2Report,
    /// `None` when the triple is induced (ζ(2s) pole).
    pub main_term: Option<f64>,
    pub reality_residual: f64,
    pub even_odd_identity_residual: f64,
    pub d_decomposition_residual: f64,
    pub afe: AfeMomentReport,
}

/// The full bundle behind the `moment` CLI command; `X = q^{2−δ}`.
pub fn moment_report(ctx: &MomentContext, triple: TripleSpec, d: u64, xi: u64, delta: f64) -> MomentReport {
    let q = ctx.field.q();
    let x = (q as f64).powf(2.0 - delta);
    let y = (q as f64).powi(3) / x;
    let exps = triple.exponents();
    let m = moment_direct(ctx, exps, xi);
    let (me, mo) = moment_even_odd(ctx, exps, xi);
    MomentReport {
        q,
        triple: triple.to_string(),
        d,
        xi,
        x,
        y,
        m: (m.re, m.im),
        m_even: (me.re, me.im),
        m_odd: (mo.re, mo.im),
        m1_even: m1_sum(ctx, triple, xi, x, Parity::Even),
        m1_odd: m1_sum(ctx, triple, xi, x, Parity::Odd),
        m2_even: m2_sum(ctx, triple, xi, y, Parity::Even),
        m2_odd: m2_sum(ctx, triple, xi, y, Parity::Odd),
        main_term: main_term(triple).ok(),
        reality_residual: m.im.abs().max(me.im.abs()).max(mo.im.abs()),
        even_odd_identity_residual: ((me + mo) / 2.0 - m).norm(),
        d_decomposition_residual: d_decomposition_check(ctx, triple, d),
        afe: afe_moment_check(ctx, triple, xi, x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx13() -> (PrimeField, f64) {
        (PrimeField::build(13).unwrap(), 13f64)
    }

    #[test]
    fn moment_is_real_and_splits() {
        let (f, _) = ctx13();
        let ctx = MomentContext::new(&f);
        for (exps, xi) in [([1i64, 1, 1], 1u64), ([1, 1, -3], 1), ([1, 1, 1], 2)] {
            let m = moment_direct(&ctx, exps, xi);
            assert!(m.im.abs() < 1e-9, "imag {:e}", m.im);
            let (e, o) = moment_even_odd(&ctx, exps, xi);
            assert!(e.im.abs() < 1e-9 && o.im.abs() < 1e-9);
            assert!(((e + o) / 2.0 - m).norm() < 1e-10);
        }
    }

    #[test]
    fn d_decomposition_is_exact() {
        let (f, _) = ctx13();
        let ctx = MomentContext::new(&f);
        assert!(d_decomposition_check(&ctx, TripleSpec::plus(1, 1, 1), 1) < 1e-9);
        assert!(d_decomposition_check(&ctx, TripleSpec::minus(1, 1, 3), 2) < 1e-9);
        assert!(d_decomposition_check(&ctx, TripleSpec::minus(1, 2, 5), 3) < 1e-9);
    }

    #[test]
    fn m1_two_forms_agree_and_are_nonnegative() {
        let (f, q) = ctx13();
        let ctx = MomentContext::new(&f);
        let x = q.powf(1.75);
        for xi in [1u64, 2, 12] {
            for par in [Parity::Even, Parity::Odd] {
                let r = m1_sum(&ctx, TripleSpec::plus(1, 1, 1), xi, x, par);
                assert!(r.two_form_residual < 1e-8, "xi={xi} res={:e}", r.two_form_residual);
                assert!(r.value >= 0.0 && r.error_term >= -1e-15);
                if xi == 1 {
                    // the main term is exactly V(1/X) (→ 1 as X → ∞; at this
                    // X the odd kernel is already close, the even one is not)
                    let v = v_interp(GammaProfile::for_parity(par == Parity::Even, [1, 1, 1]))
                        .eval(1.0 / x);
                    assert!((r.main_term - v).abs() < 1e-15, "main {}", r.main_term);
                    if par == Parity::Odd {
                        assert!((r.main_term - 1.0).abs() < 0.25, "main {}", r.main_term);
                    }
                } else {
                    assert_eq!(r.main_term, 0.0);
                }
            }
        }
        // sign −: the main term collects the exact solutions l^a m^b = n^c
        // (the smoothed partial sum sits strictly below D_{1,1,−3}(1/2))
        let r = m1_sum(&ctx, TripleSpec::minus(1, 1, 3), 1, x, Parity::Even);
        assert!(r.two_form_residual < 1e-8);
        let v1 = v_interp(GammaProfile::EVEN).eval(1.0 / x);
        assert!(r.main_term >= v1 && r.main_term < 5.929, "main {:?}", r.main_term);
    }

    #[test]
    fn m1_error_term_vanishes_below_threshold() {
        // tiny X: every box is sub-threshold, only exact solutions remain
        let (f, _) = ctx13();
        let ctx = MomentContext::new(&f);
        let r = m1_sum(&ctx, TripleSpec::plus(1, 1, 1), 1, 1.2, Parity::Even);
        assert_eq!(r.error_term, 0.0);
        // ξ not a small root of unity: the whole sum is exactly 0 once the
        // kernel cutoff leaves no integer in the congruence class
        let r = m1_sum(&ctx, TripleSpec::plus(1, 1, 1), 2, 0.3, Parity::Even);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn m2_two_forms_agree() {
        let (f, q) = ctx13();
        let ctx = MomentContext::new(&f);
        let y = q.powf(1.25);
        let r = m2_sum(&ctx, TripleSpec::plus(1, 1, 1), 1, y, Parity::Even);
        assert!(r.two_form_residual < 1e-8, "res={:e}", r.two_form_residual);
        assert!(r.trivial_ratio.is_finite());

        let f31 = PrimeField::build(31).unwrap();
        let ctx31 = MomentContext::new(&f31);
        let r = m2_sum(&ctx31, TripleSpec::minus(1, 4, 3), 1, 31f64.powf(1.25), Parity::Odd);
        assert!(r.two_form_residual < 1e-8, "res={:e}", r.two_form_residual);
    }

    #[test]
    fn afe_moment_decomposition_examples() {
        let (f, q) = ctx13();
        let ctx = MomentContext::new(&f);
        let rep = afe_moment_check(&ctx, TripleSpec::plus(1, 1, 1), 1, q.powf(1.5));
        assert!(rep.residual_even < 1e-5, "even {:e}", rep.residual_even);
        assert!(rep.residual_odd < 1e-5, "odd {:e}", rep.residual_odd);

        let rep = afe_moment_check(&ctx, TripleSpec::minus(1, 1, 3), 12, q.powf(1.75));
        assert!(rep.residual_even < 1e-5 && rep.residual_odd < 1e-5);
    }

    #[test]
    fn dseries_coeff_examples() {
        assert_eq!(dseries_coeff(1, 1, 3, 0), 1);
        for k in 1..=3 {
            assert_eq!(dseries_coeff(1, 1, 3, k), 0, "k={k}");
        }
        assert_eq!(dseries_coeff(1, 1, 3, 4), 4);
        assert_eq!(dseries_coeff(2, 3, 5, 0), 1);
    }

    #[test]
    fn dseries_value_examples() {
        for (a, b, c) in [(1u64, 1, 3), (1, 2, 3), (1, 4, 3), (2, 3, 1), (1, 2, 5)] {
            let d = dseries_value(a, b, c, 0.5, 1e-6).unwrap();
            assert!(d.value > 1.0, "({a},{b},{c}): {}", d.value);
            assert!(d.tail_bound < 1e-6);
        }
        assert_eq!(dseries_value(1, 2, 2, 0.5, 1e-6).unwrap_err(), MomentError::InducedTriple);
        assert_eq!(main_term(TripleSpec::plus(3, 4, 5)).unwrap(), 1.0);
    }

    #[test]
    fn dseries_matches_direct_summation() {
        // D_{1,1,−3}(1/2) = Σ_n d₂(n³)/n²; the direct partial sums (lmn ≤ 10⁶,
        // i.e. n ≤ 31) increase towards the Euler-product value from below
        let d = dseries_value(1, 1, 3, 0.5, 1e-6).unwrap().value;
        // 30-digit prime-zeta reference
        assert!((d - 5.928_073_989_092_494).abs() < 1e-8, "euler={d}");
        let partial = |cut: u64| {
            let mut acc = 0.0;
            for n in 1..=cut {
                let cube = n * n * n;
                acc += (1..=cube).filter(|l| cube % l == 0).count() as f64 / (n * n) as f64;
            }
            acc
        };
        let (half, full) = (partial(15), partial(31));
        assert!(half < full && full < d);
        assert!(d - full < d - half && d - full < 1.2, "direct={full} euler={d}");
    }

    #[test]
    fn convergence_study_smoke() {
        let primes = primes_in(101, 180);
        let study =
            convergence_study(TripleSpec::plus(1, 1, 1), 1, &primes, MAX_CONVERGENCE_PRIME).unwrap();
        assert_eq!(study.rows.len(), primes.len());
        assert_eq!(study.target, 1.0);
        for r in &study.rows {
            assert!(r.moment_imag.abs() < 1e-9);
            assert!(r.moment.is_finite());
        }
        assert!(matches!(
            convergence_study(TripleSpec::plus(1, 1, 1), 1, &[2011], 2003),
            Err(MomentError::BudgetExceeded(2011, 2003))
        ));
    }

    #[test]
    fn nonvanishing_count_is_consistent() {
        let f = PrimeField::build(101).unwrap();
        let ctx = MomentContext::new(&f);
        let rep = nonvanishing_count(&ctx, [1, 1, 1]);
        assert!(rep.count <= 100);
        assert!(rep.count as f64 >= rep.hoelder_bound - 1e-6, "{rep:?}");
        assert!(rep.fitted_c4.is_finite() && rep.fitted_c4 > 0.0);
    }

    #[test]
    fn d3_trend_has_positive_leading_coefficient() {
        let rep = d3_weighted_trend(&[1e3, 1e4, 1e5]);
        assert!(rep.leading_positive, "{:?}", rep.coeffs);
        assert!(rep.r_squared >= 0.999);
        for v in &rep.values {
            assert!(*v > 0.0);
        }
    }
}
