//! Monomial Kloosterman-like sums `K_{a,b,±c}(u; q)`, hypergeometric sums,
//! the Hasse–Davenport and hypergeometric-identification identities, closed
//! forms for induced and solvable exponent triples, and bilinear/trilinear
//! cancellation measurements.
//!
//! Two independent evaluation routes are kept side by side: a naive
//! fiber-sum route (`O(q²)`) and a spectral route through the discrete
//! Mellin transform (`O(q log q)`, two DFTs of length `q−1`). The exact
//! finite identity behind the spectral route is
//! `K(u) = (1/(q(q−1))) Σ_t χ_t(u)·G(χ̄_t^a)G(χ̄_t^b)G(χ̄_t^{±c})`.

use crate::dft;
use crate::ffield::{CharIndex, PrimeField};
use crate::triples::CharMultiset;
use num_complex::Complex64;
use num_integer::gcd;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("u must be invertible mod q")]
    UNotInvertible,
    #[error("{0} does not divide q−1 = {1}")]
    ADoesNotDivide(u64, u64),
    #[error("exponent {0} must divide q−1 = {1}")]
    DivisibilityViolated(u64, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Naive,
    Spectral,
}

/// Table of `K_{a,b,c}(u; q)` over `u ∈ F_q^×`, indexed by `u − 1`.
#[derive(Debug, Clone)]
pub struct TraceTable {
    pub q: u64,
    pub exponents: [i64; 3],
    pub method: Provenance,
    values: Vec<Complex64>,
}

impl TraceTable {
    #[inline]
    pub fn value(&self, u: u64) -> Complex64 {
        debug_assert!(u % self.q != 0);
        self.values[(u % self.q - 1) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max deviation from another table over the same field.
    pub fn max_deviation(&self, other: &TraceTable) -> f64 {
        assert_eq!(self.q, other.q);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Generic rank of the associated local system: `a+b+c` for the positive
/// sign, `max(a+b, c) − (a,c) − (b,c) + 1` for the negative sign.
pub fn rank(a: u64, b: u64, c_signed: i64) -> u64 {
    let c = c_signed.unsigned_abs();
    if c_signed > 0 {
        a + b + c
    } else {
        ((a + b).max(c) + 1).saturating_sub(gcd(a, c) + gcd(b, c))
    }
}

/// `S_e[w] = Σ_{z : z^e = w} e_q(z)`, the fiber sums of `z ↦ z^e`.
fn fiber_sum_table(field: &PrimeField, e: i64) -> Vec<Complex64> {
    let q = field.q();
    let er = field.reduce_exp(e);
    let mut table = vec![Complex64::new(0.0, 0.0); (q - 1) as usize];
    for z in 1..q {
        let w = field.pw(field.ind(z) * er % field.phi());
        table[(w - 1) as usize] += field.e_q(z);
    }
    table
}

/// Naive evaluation of `K_{a,b,c}(u; q) = (1/q)·Σ_{x^a y^b z^c = u} e_q(x+y+z)`
/// by a double loop over `(x, y)` with `z` recovered from the fibers of
/// `z ↦ z^c`.
pub fn k_sum_naive(field: &PrimeField, a: u64, b: u64, c: i64, u: u64) -> Result<Complex64, TraceError> {
    let q = field.q();
    if u % q == 0 {
        return Err(TraceError::UNotInvertible);
    }
    let u = u % q;
    let s_c = fiber_sum_table(field, c);
    let ia = field.reduce_exp(-(a as i64));
    let ib = field.reduce_exp(-(b as i64));
    let x_inv_a: Vec<u64> = (1..q).map(|x| field.pw(field.ind(x) * ia % field.phi())).collect();
    let y_inv_b: Vec<u64> = (1..q).map(|y| field.pw(field.ind(y) * ib % field.phi())).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 1..q {
        let ux = field.mul(u, x_inv_a[(x - 1) as usize]);
        let mut inner = Complex64::new(0.0, 0.0);
        for y in 1..q {
            let w = field.mul(ux, y_inv_b[(y - 1) as usize]);
            inner += s_c[(w - 1) as usize] * field.e_q(y);
        }
        acc += inner * field.e_q(x);
    }
    Ok(acc / q as f64)
}

/// Full naive trace table in `O(q²)` via the multiplicative convolution of
/// the fiber sums of `(x,y) ↦ x^a y^b` with those of `z ↦ z^c`.
pub fn k_table_naive(field: &PrimeField, a: u64, b: u64, c: i64) -> TraceTable {
    let q = field.q();
    let n = (q - 1) as usize;
    let s_c = fiber_sum_table(field, c);
    let ea = field.reduce_exp(a as i64);
    let eb = field.reduce_exp(b as i64);
    let mut t_ab = vec![Complex64::new(0.0, 0.0); n];
    let xa: Vec<u64> = (1..q).map(|x| field.pw(field.ind(x) * ea % field.phi())).collect();
    for x in 1..q {
        let xv = xa[(x - 1) as usize];
        let ex = field.e_q(x);
        for y in 1..q {
            let v = field.mul(xv, field.pw(field.ind(y) * eb % field.phi()));
            t_ab[(v - 1) as usize] += ex * field.e_q(y);
        }
    }
    let v_inv: Vec<u64> = (1..q).map(|v| field.inv(v)).collect();
    let values: Vec<Complex64> = (1..q)
        .map(|u| {
            let mut acc = Complex64::new(0.0, 0.0);
            for v in 1..q {
                let w = field.mul(u, v_inv[(v - 1) as usize]);
                acc += t_ab[(v - 1) as usize] * s_c[(w - 1) as usize];
            }
            acc / q as f64
        })
        .collect();
    TraceTable {
        q,
        exponents: [a as i64, b as i64, c],
        method: Provenance::Naive,
        values,
    }
}

/// Spectral trace table in `O(q log q)`: one inverse DFT of the Gauss-sum
/// products over all characters.
pub fn k_table_spectral(field: &PrimeField, a: u64, b: u64, c: i64) -> TraceTable {
    let q = field.q();
    let n = field.phi();
    let gauss = field.gauss_all();
    let ea = field.reduce_exp(a as i64);
    let eb = field.reduce_exp(b as i64);
    let ec = field.reduce_exp(c);
    let mut p: Vec<Complex64> = (0..n)
        .map(|t| {
            let ga = gauss[((n - t * ea % n) % n) as usize];
            let gb = gauss[((n - t * eb % n) % n) as usize];
            let gc = gauss[((n - t * ec % n) % n) as usize];
            ga * gb * gc
        })
        .collect();
    dft::inverse_unnormalized(&mut p);
    let scale = 1.0 / (q as f64 * n as f64);
    let mut values = vec![Complex64::new(0.0, 0.0); n as usize];
    for j in 0..n {
        values[(field.pw(j) - 1) as usize] = p[j as usize] * scale;
    }
    TraceTable {
        q,
        exponents: [a as i64, b as i64, c],
        method: Provenance::Spectral,
        values,
    }
}

/// The hypergeometric sum attached to `(ρ, θ)`: its Mellin transform is
/// `M(χ_t) = (−1)^{r+t} Π_i G(χ_t ρ_i) · Π_j conj(G(χ_t θ_j))`.
fn hyp_mellin(field: &PrimeField, rho: &CharMultiset, theta: &CharMultiset) -> Vec<Complex64> {
    let n = field.phi();
    assert_eq!(rho.group(), n);
    assert_eq!(theta.group(), n);
    let gauss = field.gauss_all();
    let sign = if (rho.len() + theta.len()) % 2 == 0 { 1.0 } else { -1.0 };
    (0..n)
        .map(|t| {
            let mut m = Complex64::new(sign, 0.0);
            for (s, mult) in rho.iter() {
                let g = gauss[((t + s) % n) as usize];
                for _ in 0..mult {
                    m *= g;
                }
            }
            for (s, mult) in theta.iter() {
                let g = gauss[((t + s) % n) as usize].conj();
                for _ in 0..mult {
                    m *= g;
                }
            }
            m
        })
        .collect()
}

/// Unnormalized hypergeometric sum for all `u ∈ F_q^×` (spectral route).
pub fn hyp_table(field: &PrimeField, rho: &CharMultiset, theta: &CharMultiset) -> Vec<Complex64> {
    let n = field.phi();
    let mut m = hyp_mellin(field, rho, theta);
    // Hyp(u) = (1/(q−1))·Σ_t χ̄_t(u)·M(t): forward DFT evaluated at ind(u).
    dft::forward(&mut m);
    let mut values = vec![Complex64::new(0.0, 0.0); n as usize];
    for j in 0..n {
        values[(field.pw(j) - 1) as usize] = m[j as usize] / n as f64;
    }
    values
}

/// Single-point hypergeometric sum with sign `(−1)^{r+t}`.
pub fn hyp_sum(field: &PrimeField, rho: &CharMultiset, theta: &CharMultiset, u: u64) -> Result<Complex64, TraceError> {
    if u % field.q() == 0 {
        return Err(TraceError::UNotInvertible);
    }
    Ok(hyp_table(field, rho, theta)[(u % field.q() - 1) as usize])
}

/// Direct evaluation of the hypergeometric sum by its defining
/// `(r+t−1)`-fold sum; exponential in the rank, intended for `r+t ≤ 4`.
pub fn hyp_sum_direct(
    field: &PrimeField,
    rho: &CharMultiset,
    theta: &CharMultiset,
    u: u64,
) -> Result<Complex64, TraceError> {
    let q = field.q();
    if u % q == 0 {
        return Err(TraceError::UNotInvertible);
    }
    let xs = rho.expanded();
    let ys = theta.expanded();
    let r = xs.len();
    let t = ys.len();
    assert!(r >= 1, "rho must be non-empty");
    // free variables: x_1..x_{r−1} and y_1..y_t; x_r is solved from the
    // constraint x_1···x_r = u·y_1···y_t.
    let free = r - 1 + t;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut assign = vec![1u64; free];
    loop {
        let mut prod_x = 1u64;
        let mut sum_arg = 0u64;
        let mut chi = Complex64::new(1.0, 0.0);
        for i in 0..r - 1 {
            let x = assign[i];
            prod_x = field.mul(prod_x, x);
            sum_arg = (sum_arg + x) % q;
            chi *= field.chi(xs[i], x);
        }
        let mut prod_y = 1u64;
        for j in 0..t {
            let y = assign[r - 1 + j];
            prod_y = field.mul(prod_y, y);
            sum_arg = (sum_arg + q - y % q) % q;
            chi *= field.chi(ys[j], y).conj();
        }
        let x_last = field.mul(field.mul(u, prod_y), field.inv(prod_x));
        sum_arg = (sum_arg + x_last) % q;
        chi *= field.chi(xs[r - 1], x_last);
        acc += chi * field.e_q(sum_arg);

        // odometer over (F_q^×)^free
        let mut k = 0;
        loop {
            if k == free {
                let sign = if (r + t) % 2 == 0 { 1.0 } else { -1.0 };
                return Ok(acc * sign);
            }
            assign[k] += 1;
            if assign[k] < q {
                break;
            }
            assign[k] = 1;
            k += 1;
        }
    }
}

/// `ε_a(ψ) = q^{−1/2} Π_{ρ^a = 1} ε(ψ, ρ)^{−1}` (requires `a | q−1`).
pub fn epsilon_a(field: &PrimeField, a: u64) -> Result<Complex64, TraceError> {
    let n = field.phi();
    if n % a != 0 {
        return Err(TraceError::ADoesNotDivide(a, n));
    }
    let mut acc = Complex64::new(1.0 / (field.q() as f64).sqrt(), 0.0);
    for k in 0..a {
        acc /= field.epsilon_factor(CharIndex(k * (n / a)));
    }
    Ok(acc)
}

/// Residual of the Hasse–Davenport relation
/// `−ε(ψ_a, χ^a) = ε_a(ψ)·Π_{ρ^a=1} ε(ψ, χρ)` at the character `χ_t`.
pub fn check_hasse_davenport(field: &PrimeField, a: u64, t: u64) -> Result<f64, TraceError> {
    let n = field.phi();
    if n % a != 0 {
        return Err(TraceError::ADoesNotDivide(a, n));
    }
    let sqrt_q = (field.q() as f64).sqrt();
    // ε(ψ_a, χ) = χ̄(a)·G(χ)/√q by the substitution x → x/a.
    let s = t * field.reduce_exp(a as i64) % n;
    let lhs = -(field.chi(s, a % field.q()).conj() * field.gauss_sum(CharIndex(s)) / sqrt_q);
    let mut rhs = epsilon_a(field, a)?;
    for k in 0..a {
        rhs *= field.epsilon_factor(CharIndex((t + k * (n / a)) % n));
    }
    Ok((lhs - rhs).norm())
}

/// Max Hasse–Davenport residual over every character of the field.
pub fn check_hasse_davenport_all(field: &PrimeField, a: u64) -> Result<f64, TraceError> {
    let mut worst: f64 = 0.0;
    for t in 0..field.phi() {
        worst = worst.max(check_hasse_davenport(field, a, t)?);
    }
    Ok(worst)
}

/// The full character multisets of the hypergeometric identification:
/// `(ρ[a] ⊔ ρ[b] ⊔ ρ[c], ∅)` for the positive sign and
/// `(ρ[a] ⊔ ρ[b], ρ[c])` for the negative sign.
pub fn full_multisets(
    field: &PrimeField,
    a: u64,
    b: u64,
    c: i64,
) -> Result<(CharMultiset, CharMultiset), TraceError> {
    let n = field.phi();
    let m = c.unsigned_abs();
    for e in [a, b, m] {
        if n % e != 0 {
            return Err(TraceError::DivisibilityViolated(e, n));
        }
    }
    let ra = CharMultiset::order_dividing(n, a);
    let rb = CharMultiset::order_dividing(n, b);
    let rc = CharMultiset::order_dividing(n, m);
    Ok(if c > 0 {
        (ra.union(&rb).union(&rc), CharMultiset::empty(n))
    } else {
        (ra.union(&rb), rc)
    })
}

/// The shift `f_+ = a^a b^b c^c` or `f_− = a^a b^b (−c)^{−c}` in `F_q^×`.
pub fn prop_shift(field: &PrimeField, a: u64, b: u64, c: i64) -> u64 {
    let q = field.q();
    let m = c.unsigned_abs();
    let fa = field.pow_unit(a % q, a as i64);
    let fb = field.pow_unit(b % q, b as i64);
    let fc = if c > 0 {
        field.pow_unit(m % q, m as i64)
    } else {
        field.pow_unit((q - m % q) % q, -(m as i64))
    };
    field.mul(field.mul(fa, fb), fc)
}

/// The constant relating `K_{a,b,±c}(f_± ·)` to the unnormalized
/// hypergeometric sum: `s_θ·(−1)^v·(ε_{a,b,c}/q)·q^{−(v−3)/2}` with
/// `v = a+b+|c|`, `ε_{a,b,c} = −ε_a ε_b ε_{|c|}` and
/// `s_θ = Π_{θ_j ∈ θ} θ_j(−1)` (so `s_θ = (−1)^{(q−1)/2}` for the negative
/// sign with `|c|` even, and `1` otherwise).
///
/// The `q^{−(v−3)/2}` factor restores the per-factor `|k|^{(rank−1)/2}`
/// normalization of the Kloosterman convolvees; both it and `s_θ` are pinned
/// by exact numerics over every admissible tuple.
fn prop_constant(
    field: &PrimeField,
    a: u64,
    b: u64,
    c: i64,
    theta: &CharMultiset,
) -> Result<Complex64, TraceError> {
    let m = c.unsigned_abs();
    let eps = -(epsilon_a(field, a)? * epsilon_a(field, b)? * epsilon_a(field, m)?);
    let v = a + b + m;
    let v_sign = if v % 2 == 0 { 1.0 } else { -1.0 };
    let theta_sign: f64 = theta
        .iter()
        .map(|(t, mult)| field.chi_minus_one(t).powi(mult as i32))
        .product();
    let scale = (field.q() as f64).powf(-((v as f64 - 3.0) / 2.0)) / field.q() as f64;
    Ok(eps * v_sign * theta_sign * scale)
}

/// Residual of the identification
/// `K_{a,b,±c}(f_± u) = s_θ·(−1)^v·(ε_{a,b,c}/q)·q^{−(v−3)/2}·Hyp_{a,b,±c}(u)`
/// at one `u`; see [`prop_constant`] for the pinned normalization. Uses the
/// naive route for `K` and the spectral route for `Hyp`.
pub fn check_prop_identity(field: &PrimeField, a: u64, b: u64, c: i64, u: u64) -> Result<f64, TraceError> {
    let (rho, theta) = full_multisets(field, a, b, c)?;
    let cst = prop_constant(field, a, b, c, &theta)?;
    let f = prop_shift(field, a, b, c);
    let k_val = k_sum_naive(field, a, b, c, field.mul(f, u % field.q()))?;
    let hyp = hyp_sum(field, &rho, &theta, u)?;
    Ok((k_val - hyp * cst).norm())
}

/// Max residual of the identification over every `u ∈ F_q^×`, evaluating
/// both sides spectrally.
pub fn check_prop_identity_all(field: &PrimeField, a: u64, b: u64, c: i64) -> Result<f64, TraceError> {
    let q = field.q();
    let (rho, theta) = full_multisets(field, a, b, c)?;
    let cst = prop_constant(field, a, b, c, &theta)?;
    let f = prop_shift(field, a, b, c);
    let k_tab = k_table_spectral(field, a, b, c);
    let hyp = hyp_table(field, &rho, &theta);
    let mut worst: f64 = 0.0;
    for u in 1..q {
        let lhs = k_tab.value(field.mul(f, u));
        let rhs = hyp[(u - 1) as usize] * cst;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct InducedClosedForm {
    /// The exact right-hand side `(1/q)·Σ_λ Σ_{x^a = uλ^c} ψ(x)(qδ_{λ=−1}−1)`.
    pub value: (f64, f64),
    /// The leading part `Σ_{x^a = u(−1)^c} ψ(x)`.
    pub leading: (f64, f64),
    pub residual_vs_naive: f64,
    pub leading_gap: f64,
}

/// Closed form of the Kummer-induced sum `K_{a,c,−c}(u; q)`.
pub fn induced_closed_form(field: &PrimeField, a: u64, c: u64, u: u64) -> Result<InducedClosedForm, TraceError> {
    let q = field.q();
    if u % q == 0 {
        return Err(TraceError::UNotInvertible);
    }
    let u = u % q;
    let s_a = fiber_sum_table(field, a as i64);
    let mut acc = Complex64::new(0.0, 0.0);
    for lam in 1..q {
        let w = field.mul(u, field.pow_unit(lam, c as i64));
        let delta = if lam == q - 1 { q as f64 } else { 0.0 };
        acc += s_a[(w - 1) as usize] * (delta - 1.0);
    }
    let value = acc / q as f64;
    let w_lead = field.mul(u, field.pow_unit(q - 1, c as i64));
    let leading = s_a[(w_lead - 1) as usize];
    let naive = k_sum_naive(field, a, c, -(c as i64), u)?;
    Ok(InducedClosedForm {
        value: (value.re, value.im),
        leading: (leading.re, leading.im),
        residual_vs_naive: (value - naive).norm(),
        leading_gap: (naive - leading).norm(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolvableClosedForm {
    /// Roots of `P_{k,u} = uX^k + (−1)^k (X+1)^{k−1}` in `F_q`.
    pub root_count: u64,
    /// `ν(P) − 1 + 1/q`.
    pub value: f64,
    pub residual_vs_naive: f64,
}

/// Closed form of the solvable sum `K_{1,k−1,−k}(u; q)` via root counting.
pub fn solvable_closed_form(field: &PrimeField, k: u64, u: u64) -> Result<SolvableClosedForm, TraceError> {
    assert!(k >= 2);
    let q = field.q();
    if u % q == 0 {
        return Err(TraceError::UNotInvertible);
    }
    let u = u % q;
    let mut roots = 0u64;
    let sign = if k % 2 == 0 { 1 } else { q - 1 };
    for x in 0..q {
        // u·x^k + (−1)^k (x+1)^{k−1} over F_q, with 0^e = 0 handled directly
        let xk = pow_mod(x, k, q);
        let x1 = pow_mod((x + 1) % q, k - 1, q);
        if (u * xk % q + sign * x1 % q) % q == 0 {
            roots += 1;
        }
    }
    let value = roots as f64 - 1.0 + 1.0 / q as f64;
    let naive = k_sum_naive(field, 1, k - 1, -(k as i64), u)?;
    Ok(SolvableClosedForm {
        root_count: roots,
        value,
        residual_vs_naive: (Complex64::new(value, 0.0) - naive).norm(),
    })
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct MultilinearReport {
    pub sum: (f64, f64),
    /// `Σ|coeff| products × max|K|`.
    pub trivial_bound: f64,
    pub ratio_to_trivial: f64,
    /// `|S| / (√(boxes)·√q)`, the square-root-cancellation yardstick.
    pub ratio_to_sqrt_target: f64,
    /// Set when a box reached a multiple of the modulus (skipped terms).
    pub box_exceeds_modulus: bool,
}

/// Bilinear form `B_{b,c}(α, β) = Σ_{m∼M, n∼N} α_m β_n K(m^b n^c)` over the
/// dyadic boxes `(M, 2M] × (N, 2N]`.
pub fn bilinear_sum(
    field: &PrimeField,
    table: &TraceTable,
    b: i64,
    c: i64,
    alpha: &[Complex64],
    beta: &[Complex64],
    m_anchor: u64,
    n_anchor: u64,
) -> MultilinearReport {
    assert_eq!(alpha.len() as u64, m_anchor);
    assert_eq!(beta.len() as u64, n_anchor);
    let q = field.q();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut skipped = false;
    for (i, &am) in alpha.iter().enumerate() {
        let m = m_anchor + 1 + i as u64;
        if m % q == 0 {
            skipped = true;
            continue;
        }
        let mb = field.pow_unit(m % q, b);
        for (j, &bn) in beta.iter().enumerate() {
            let n = n_anchor + 1 + j as u64;
            if n % q == 0 {
                skipped = true;
                continue;
            }
            let arg = field.mul(mb, field.pow_unit(n % q, c));
            sum += am * bn * table.value(arg);
        }
    }
    let l1: f64 = alpha.iter().map(|z| z.norm()).sum::<f64>() * beta.iter().map(|z| z.norm()).sum::<f64>();
    let trivial = l1 * table.max_abs();
    let boxes = (m_anchor * n_anchor) as f64;
    MultilinearReport {
        sum: (sum.re, sum.im),
        trivial_bound: trivial,
        ratio_to_trivial: if trivial > 0.0 { sum.norm() / trivial } else { 0.0 },
        ratio_to_sqrt_target: sum.norm() / (boxes.sqrt() * (q as f64).sqrt()),
        box_exceeds_modulus: skipped || 2 * m_anchor >= q || 2 * n_anchor >= q,
    }
}

/// Trilinear form `Σ_{l,m,n} α_l β_m γ_n K(ξ·l^a m^b n^c)` over dyadic boxes.
#[allow(clippy::too_many_arguments)]
pub fn trilinear_sum(
    field: &PrimeField,
    table: &TraceTable,
    exps: [i64; 3],
    alpha: &[Complex64],
    beta: &[Complex64],
    gamma: &[Complex64],
    anchors: [u64; 3],
    xi: u64,
) -> MultilinearReport {
    let q = field.q();
    let [l_anchor, m_anchor, n_anchor] = anchors;
    assert_eq!(alpha.len() as u64, l_anchor);
    assert_eq!(beta.len() as u64, m_anchor);
    assert_eq!(gamma.len() as u64, n_anchor);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut skipped = false;
    for (i, &al) in alpha.iter().enumerate() {
        let l = l_anchor + 1 + i as u64;
        if l % q == 0 {
            skipped = true;
            continue;
        }
        let la = field.mul(xi % q, field.pow_unit(l % q, exps[0]));
        for (j, &bm) in beta.iter().enumerate() {
            let m = m_anchor + 1 + j as u64;
            if m % q == 0 {
                skipped = true;
                continue;
            }
            let lm = field.mul(la, field.pow_unit(m % q, exps[1]));
            for (k, &cn) in gamma.iter().enumerate() {
                let n = n_anchor + 1 + k as u64;
                if n % q == 0 {
                    skipped = true;
                    continue;
                }
                let arg = field.mul(lm, field.pow_unit(n % q, exps[2]));
                sum += al * bm * cn * table.value(arg);
            }
        }
    }
    let l1 = alpha.iter().map(|z| z.norm()).sum::<f64>()
        * beta.iter().map(|z| z.norm()).sum::<f64>()
        * gamma.iter().map(|z| z.norm()).sum::<f64>();
    let trivial = l1 * table.max_abs();
    let boxes = (l_anchor * m_anchor * n_anchor) as f64;
    MultilinearReport {
        sum: (sum.re, sum.im),
        trivial_bound: trivial,
        ratio_to_trivial: if trivial > 0.0 { sum.norm() / trivial } else { 0.0 },
        ratio_to_sqrt_target: sum.norm() / (boxes.sqrt() * (q as f64).sqrt()),
        box_exceeds_modulus: skipped
            || 2 * l_anchor >= q
            || 2 * m_anchor >= q
            || 2 * n_anchor >= q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::PrimeField;
    use std::f64::consts::TAU;

    /// Independent oracle: honest triple loop over (x, y, z).
    fn k_oracle(field: &PrimeField, a: u64, b: u64, c: i64, u: u64) -> Complex64 {
        let q = field.q();
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 1..q {
            for y in 1..q {
                for z in 1..q {
                    let v = field.mul(
                        field.mul(field.pow_unit(x, a as i64), field.pow_unit(y, b as i64)),
                        field.pow_unit(z, c),
                    );
                    if v == u {
                        acc += field.e_q((x + y + z) % q);
                    }
                }
            }
        }
        acc / q as f64
    }

    #[test]
    fn k_sum_naive_frozen_q3() {
        // enumerate the 4 triples (1,1,1),(1,2,2),(2,1,2),(2,2,1)
        let f = PrimeField::build(3).unwrap();
        let expect = (Complex64::new(1.0, 0.0)
            + Complex64::from_polar(1.0, TAU * 2.0 / 3.0) * 3.0)
            / 3.0;
        let got = k_sum_naive(&f, 1, 1, 1, 1).unwrap();
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn k_sum_matches_triple_loop_oracle() {
        let f = PrimeField::build(7).unwrap();
        for (a, b, c, u) in [(1, 1, 1, 1u64), (1, 1, 1, 3), (2, 2, 2, 1), (1, 2, -3, 5)] {
            let got = k_sum_naive(&f, a, b, c, u).unwrap();
            let want = k_oracle(&f, a, b, c, u);
            assert!((got - want).norm() < 1e-10, "({a},{b},{c}) u={u}");
        }
        assert_eq!(k_sum_naive(&f, 1, 1, 1, 7).unwrap_err(), TraceError::UNotInvertible);
    }

    #[test]
    fn spectral_equals_naive() {
        let f = PrimeField::build(31).unwrap();
        let spec = k_table_spectral(&f, 1, 4, -3);
        let naive = k_table_naive(&f, 1, 4, -3);
        assert!(spec.max_deviation(&naive) < 1e-9);

        let f13 = PrimeField::build(13).unwrap();
        let spec = k_table_spectral(&f13, 1, 1, 1);
        let naive = k_table_naive(&f13, 1, 1, 1);
        assert!(spec.max_deviation(&naive) < 1e-9);
        // self-duality of Kl₃ in coordinates: conj(K(u)) = K(−u)
        for u in 1..13u64 {
            assert!((spec.value(u).conj() - spec.value(13 - u)).norm() < 1e-10);
        }
    }

    #[test]
    fn spectral_handles_exponents_beyond_group_order() {
        let f = PrimeField::build(13).unwrap();
        let spec = k_table_spectral(&f, 14, 2, -25);
        let naive = k_table_naive(&f, 14, 2, -25);
        assert!(spec.max_deviation(&naive) < 1e-9);
    }

    #[test]
    fn hyp_rank_one_is_minus_additive_character() {
        let f = PrimeField::build(7).unwrap();
        let rho = CharMultiset::order_dividing(f.phi(), 1);
        let theta = CharMultiset::empty(f.phi());
        for u in 1..7u64 {
            let got = hyp_sum(&f, &rho, &theta, u).unwrap();
            assert!((got + f.e_q(u)).norm() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn hyp_spectral_matches_direct() {
        let f = PrimeField::build(13).unwrap();
        // ρ[1,1] = {1, 1}: a 2-fold convolution
        let rho = CharMultiset::from_indices(f.phi(), [0, 0]);
        let theta = CharMultiset::empty(f.phi());
        let got = hyp_sum(&f, &rho, &theta, 1).unwrap();
        let want = hyp_sum_direct(&f, &rho, &theta, 1).unwrap();
        assert!((got - want).norm() < 1e-10);

        // reduced multisets of (1,4,3), which need 12 | q−1
        let (rho, theta) = crate::triples::char_multisets(&f, 1, 2, 3).unwrap();
        for u in [1u64, 5, 12] {
            let got = hyp_sum(&f, &rho, &theta, u).unwrap();
            let want = hyp_sum_direct(&f, &rho, &theta, u).unwrap();
            assert!((got - want).norm() < 1e-9, "u={u}");
        }
    }

    #[test]
    fn hasse_davenport_examples() {
        let f7 = PrimeField::build(7).unwrap();
        for t in 0..6 {
            assert!(check_hasse_davenport(&f7, 1, t).unwrap() < 1e-12);
        }
        let f13 = PrimeField::build(13).unwrap();
        assert!(check_hasse_davenport(&f13, 3, 1).unwrap() < 1e-10);
        assert!(check_hasse_davenport_all(&f13, 4).unwrap() < 1e-10);
        assert_eq!(
            check_hasse_davenport(&f13, 5, 0).unwrap_err(),
            TraceError::ADoesNotDivide(5, 12)
        );
    }

    #[test]
    fn epsilon_psi_a_substitution_is_exact() {
        // ε(ψ_a, χ) computed by direct summation vs χ̄(a)·G(χ)/√q
        let f = PrimeField::build(13).unwrap();
        let a = 3u64;
        for t in 0..12u64 {
            let direct: Complex64 = (1..13u64)
                .map(|x| f.chi(t, x) * f.e_q(a * x % 13))
                .sum::<Complex64>()
                / 13f64.sqrt();
            let formula = f.chi(t, a).conj() * f.gauss_sum(CharIndex(t)) / 13f64.sqrt();
            assert!((direct - formula).norm() < 1e-12);
        }
    }

    #[test]
    fn prop_identity_examples() {
        let f7 = PrimeField::build(7).unwrap();
        assert!(check_prop_identity(&f7, 1, 1, 1, 1).unwrap() < 1e-9);

        let f31 = PrimeField::build(31).unwrap();
        assert!(check_prop_identity(&f31, 1, 2, -5, 3).unwrap() < 1e-9);

        let f13 = PrimeField::build(13).unwrap();
        assert!(check_prop_identity(&f13, 1, 4, -3, 1).unwrap() < 1e-9);
        assert!(check_prop_identity_all(&f13, 1, 4, -3).unwrap() < 1e-9);
        assert_eq!(
            check_prop_identity(&f13, 1, 5, -3, 1).unwrap_err(),
            TraceError::DivisibilityViolated(5, 12)
        );
    }

    #[test]
    fn induced_closed_form_examples() {
        let f7 = PrimeField::build(7).unwrap();
        let r = induced_closed_form(&f7, 1, 1, 1).unwrap();
        // leading part Σ_{x = u·(−1)} ψ(x) = e_7(−1)
        let lead = f7.e_q(6);
        assert!((Complex64::new(r.leading.0, r.leading.1) - lead).norm() < 1e-12);
        assert!(r.residual_vs_naive < 1e-9);

        let f13 = PrimeField::build(13).unwrap();
        let r = induced_closed_form(&f13, 3, 2, 5).unwrap();
        assert!(r.residual_vs_naive < 1e-9);
        assert!(r.leading_gap <= 5.0 / 13f64.sqrt());
    }

    #[test]
    fn solvable_closed_form_examples() {
        let f7 = PrimeField::build(7).unwrap();
        let r = solvable_closed_form(&f7, 2, 1).unwrap();
        assert!(r.residual_vs_naive < 1e-9);
        assert_eq!(r.root_count, 2); // X²+X+1 has roots 2 and 4 mod 7

        let f13 = PrimeField::build(13).unwrap();
        assert!(solvable_closed_form(&f13, 3, 2).unwrap().residual_vs_naive < 1e-9);
        let r = solvable_closed_form(&f13, 4, 1).unwrap();
        assert!(r.root_count <= 4);
        assert!(r.residual_vs_naive < 1e-9);
    }

    #[test]
    fn bilinear_matches_direct_loop_and_trivial_bound() {
        let f = PrimeField::build(101).unwrap();
        let table = k_table_spectral(&f, 1, 1, 1);
        let ones = vec![Complex64::new(1.0, 0.0); 4];
        let rep = bilinear_sum(&f, &table, 1, 1, &ones, &ones, 4, 4);
        let mut direct = Complex64::new(0.0, 0.0);
        for m in 5..=8u64 {
            for n in 5..=8u64 {
                direct += k_sum_naive(&f, 1, 1, 1, m * n % 101).unwrap();
            }
        }
        assert!((Complex64::new(rep.sum.0, rep.sum.1) - direct).norm() < 1e-8);
        assert!(rep.sum.0.hypot(rep.sum.1) <= rep.trivial_bound + 1e-12);
        assert!(!rep.box_exceeds_modulus);
    }

    #[test]
    fn trilinear_matches_direct_loop() {
        let f = PrimeField::build(101).unwrap();
        let table = k_table_spectral(&f, 1, 1, 1);
        let ones = vec![Complex64::new(1.0, 0.0); 4];
        let rep = trilinear_sum(&f, &table, [1, 1, 1], &ones, &ones, &ones, [4, 4, 4], 1);
        let mut direct = Complex64::new(0.0, 0.0);
        for l in 5..=8u64 {
            for m in 5..=8u64 {
                for n in 5..=8u64 {
                    direct += table.value(l * m % 101 * n % 101);
                }
            }
        }
        assert!((Complex64::new(rep.sum.0, rep.sum.1) - direct).norm() < 1e-9);
    }

    #[test]
    fn sup_norm_holds_on_sample() {
        for q in [13u64, 61, 97] {
            let f = PrimeField::build(q).unwrap();
            for (a, b, c) in [(1u64, 1u64, 1i64), (1, 2, 3), (1, 2, -3), (2, 3, -5)] {
                let table = k_table_spectral(&f, a, b, c);
                let bound = rank(a, b, c) as f64 + 5.0 / (q as f64).sqrt();
                assert!(table.max_abs() <= bound, "q={q} ({a},{b},{c})");
            }
        }
    }
}
