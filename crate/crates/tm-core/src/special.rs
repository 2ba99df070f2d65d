//! Archimedean machinery: Γ-factor products, the smoothing kernels `V_η`,
//! Hurwitz-zeta central L-values, the functional equation of triple
//! L-products and the per-character approximate functional equation.
//!
//! `V_η(y) = (1/2πi)∫ γ_η(1/2+u)/γ_η(1/2)·y^{−u} du/u` is evaluated by
//! composite Gauss–Legendre quadrature on a vertical contour; for `y < 1`
//! the pole at `u = 0` is extracted first (`V = 1 + ∫` on `Re u = −0.4`),
//! which keeps the absolute accuracy uniform down to very small `y` where
//! the plain `Re u = σ > 0` contour loses `y^{−σ}` digits to cancellation.

use crate::dft;
use crate::ffield::{CharIndex, PrimeField};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::sync::{Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecialError {
    #[error("y must be positive")]
    NonPositiveY,
    #[error("the trivial character has no primitive L-value; use the zeta branch")]
    TrivialCharacter,
    #[error("character is non-generic for these exponents (some χ^e is trivial)")]
    NonGenericCharacter,
    #[error("X = {0} outside [q^1/2, q^5/2]")]
    XOutOfRange(f64),
}

// ---------------------------------------------------------------------------
// complex log-gamma (Lanczos, g = 7)
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for `Re z > 0` (one recurrence step below `Re z = 0.5`).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return ln_gamma(z + 1.0) - z.ln();
    }
    let zm = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (zm + i as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    0.5 * TAU.ln() + (zm + 0.5) * t.ln() - t + x.ln()
}

// ---------------------------------------------------------------------------
// Γ-profiles and the root number ι
// ---------------------------------------------------------------------------

/// Parity profile `η ∈ {±1}³` of the three Γ-factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GammaProfile {
    pub eta: [i8; 3],
}

impl GammaProfile {
    pub const EVEN: GammaProfile = GammaProfile { eta: [1, 1, 1] };

    /// Profile of an odd character twisted to exponents `e`: `η_i = (−1)^{e_i}`.
    pub fn odd_for_exponents(exps: [i64; 3]) -> Self {
        let sgn = |e: i64| if e.rem_euclid(2) == 0 { 1 } else { -1 };
        GammaProfile {
            eta: [sgn(exps[0]), sgn(exps[1]), sgn(exps[2])],
        }
    }

    pub fn for_parity(even: bool, exps: [i64; 3]) -> Self {
        if even {
            Self::EVEN
        } else {
            Self::odd_for_exponents(exps)
        }
    }

    /// Number of odd entries.
    pub fn nu(&self) -> usize {
        self.eta.iter().filter(|&&e| e == -1).count()
    }

    /// `ι_η = Π i^{(η_i−1)/2}`, i.e. `(−i)^ν`.
    pub fn iota(&self) -> Complex64 {
        match self.nu() {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        }
    }

    /// `ln γ_η(s) = Σ_i ln γ_{η_i}(s)` with `γ_+(s) = π^{−s/2}Γ(s/2)`,
    /// `γ_−(s) = γ_+(s+1)`.
    pub fn ln_gamma_factor(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &e in &self.eta {
            let shift = if e == 1 { 0.0 } else { 1.0 };
            let z = (s + shift) / 2.0;
            acc += ln_gamma(z) - z * PI.ln();
        }
        acc
    }
}

/// `ι` per the parity profile (table form).
pub fn iota(profile: GammaProfile) -> Complex64 {
    profile.iota()
}

// ---------------------------------------------------------------------------
// V_η evaluation
// ---------------------------------------------------------------------------

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // nodes/weights on [−1, 1] by Newton iteration on P_n
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..60 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Precomputed contour data: nodes `u_j` with the combined factor
/// `w_j·G(u_j)/u_j`, `G(u) = γ_η(1/2+u)/γ_η(1/2)`.
struct ContourNodes {
    nodes: Vec<(Complex64, Complex64)>,
}

impl ContourNodes {
    fn build(
        profile: GammaProfile,
        abscissa: f64,
        t_max: f64,
        panel_width: f64,
        per_panel: usize,
    ) -> Self {
        let base = gauss_legendre(per_panel);
        let ln_g_half = profile.ln_gamma_factor(Complex64::new(0.5, 0.0));
        let panels = (t_max / panel_width).ceil() as usize;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let lo = p as f64 * panel_width;
            let hi = (lo + panel_width).min(t_max);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for &(x, w) in &base {
                let t = mid + half * x;
                let u = Complex64::new(abscissa, t);
                let g = (profile.ln_gamma_factor(Complex64::new(0.5, 0.0) + u) - ln_g_half).exp();
                nodes.push((u, g / u * (w * half)));
            }
        }
        ContourNodes { nodes }
    }

    /// `(1/π)·Re Σ_j w_j G(u_j)/u_j·y^{−u_j}`: the `t ∈ [0, T]` half of the
    /// contour integral, doubled by conjugate symmetry.
    fn integrate(&self, y: f64) -> f64 {
        let ln_y = y.ln();
        let mut acc = 0.0;
        for &(u, wg) in &self.nodes {
            acc += (wg * (-u * ln_y).exp()).re;
        }
        acc / PI
    }
}

/// Contour evaluator for a fixed profile.
pub struct VEvaluator {
    pub profile: GammaProfile,
    /// Right abscissa, used for `y ≥ 1` (default 1.5).
    pub sigma: f64,
    /// Shifted abscissa in `(0, 1/2)` used after residue extraction for
    /// `y < 1`; kept at 0.25 so the Γ-factor pole at `u = −1/2` stays well
    /// inside the Bernstein ellipse of every quadrature panel.
    pub sigma_left: f64,
    pub t_max: f64,
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    pos: OnceLock<ContourNodes>,
    neg: OnceLock<ContourNodes>,
}

impl VEvaluator {
    pub fn new(profile: GammaProfile) -> Self {
        Self::with_params(profile, 1.5, 60.0, 0.4, 20)
    }

    pub fn with_params(
        profile: GammaProfile,
        sigma: f64,
        t_max: f64,
        panel_width: f64,
        nodes_per_panel: usize,
    ) -> Self {
        assert!(sigma > 0.0);
        VEvaluator {
            profile,
            sigma,
            sigma_left: 0.25,
            t_max,
            panel_width,
            nodes_per_panel,
            pos: OnceLock::new(),
            neg: OnceLock::new(),
        }
    }

    /// Doubled-resolution evaluator for oracle comparisons.
    pub fn refined(&self) -> Self {
        Self::with_params(
            self.profile,
            self.sigma,
            self.t_max * 1.5,
            self.panel_width / 2.0,
            self.nodes_per_panel,
        )
    }

    fn pos_nodes(&self) -> &ContourNodes {
        self.pos.get_or_init(|| {
            ContourNodes::build(self.profile, self.sigma, self.t_max, self.panel_width, self.nodes_per_panel)
        })
    }

    fn neg_nodes(&self) -> &ContourNodes {
        self.neg.get_or_init(|| {
            ContourNodes::build(self.profile, -self.sigma_left, self.t_max, self.panel_width, self.nodes_per_panel)
        })
    }

    /// `V_η(y)`; exactly real by conjugate symmetry of the contour.
    pub fn eval(&self, y: f64) -> Result<f64, SpecialError> {
        if !(y > 0.0) {
            return Err(SpecialError::NonPositiveY);
        }
        Ok(if y < 1.0 {
            1.0 + self.neg_nodes().integrate(y)
        } else {
            self.pos_nodes().integrate(y)
        })
    }

    /// Raw integral on `Re u = abscissa > 0` without residue extraction;
    /// exposes the σ-independence of the representation.
    pub fn eval_on_contour(&self, y: f64, abscissa: f64) -> Result<f64, SpecialError> {
        if !(y > 0.0) {
            return Err(SpecialError::NonPositiveY);
        }
        assert!(abscissa > 0.0);
        let nodes = ContourNodes::build(self.profile, abscissa, self.t_max, self.panel_width, self.nodes_per_panel);
        Ok(nodes.integrate(y))
    }
}

/// Truncation level under which the kernel is treated as zero.
pub const V_NEGLIGIBLE: f64 = 1e-13;

/// Chebyshev interpolant of `V_η` in `ln y` for bulk evaluation.
///
/// Domain `ln y ∈ [−16, ln y_cut]` where `y_cut` is where `V` first drops
/// below [`V_NEGLIGIBLE`]; beyond the cut the kernel is zero, below the
/// domain it falls back to direct quadrature.
pub struct VInterp {
    pub profile: GammaProfile,
    pub y_cut: f64,
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
    eval: VEvaluator,
}

impl VInterp {
    pub fn build(profile: GammaProfile) -> Self {
        let eval = VEvaluator::new(profile);
        let mut y = 1.0f64;
        while eval.eval(y).unwrap().abs() >= V_NEGLIGIBLE {
            y *= 1.2;
        }
        let y_cut = y * 1.2;
        let (lo, hi) = (-16.0f64, y_cut.ln());
        let n = 420usize;
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let x = (PI * (k as f64 + 0.5) / n as f64).cos();
                let ln_y = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x;
                eval.eval(ln_y.exp()).unwrap()
            })
            .collect();
        let mut coeffs = vec![0.0f64; n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &v) in vals.iter().enumerate() {
                acc += v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
            *c = acc * 2.0 / n as f64;
        }
        coeffs[0] /= 2.0;
        VInterp { profile, y_cut, lo, hi, coeffs, eval }
    }

    pub fn eval(&self, y: f64) -> f64 {
        debug_assert!(y > 0.0);
        if y >= self.y_cut {
            return 0.0;
        }
        let x = y.ln();
        if x < self.lo {
            return self.eval.eval(y).unwrap();
        }
        let u = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0f64, 0.0f64);
        for &c in self.coeffs.iter().rev() {
            let b0 = 2.0 * u * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        b1 - u * b2
    }
}

/// Process-wide interpolant cache, keyed by profile.
pub fn v_interp(profile: GammaProfile) -> &'static VInterp {
    static CACHE: OnceLock<Mutex<Vec<(GammaProfile, &'static VInterp)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(&(_, v)) = guard.iter().find(|(p, _)| *p == profile) {
        return v;
    }
    let v: &'static VInterp = Box::leak(Box::new(VInterp::build(profile)));
    guard.push((profile, v));
    v
}

// ---------------------------------------------------------------------------
// Hurwitz zeta and central L-values
// ---------------------------------------------------------------------------

const EM_SHIFT: usize = 50;
/// `B_{2j}` for `j = 1..8`.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta `ζ(s, x)` for `x ∈ (0, 1]` and `s ≠ 1`: Euler–Maclaurin
/// with shift `N = 50` and Bernoulli corrections through `B₁₆`.
pub fn hurwitz_zeta(s: Complex64, x: f64) -> Complex64 {
    debug_assert!(x > 0.0 && x <= 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..EM_SHIFT {
        acc += (-s * (n as f64 + x).ln()).exp();
    }
    let m = EM_SHIFT as f64 + x;
    let lnm = m.ln();
    acc += (-(s - 1.0) * lnm).exp() / (s - 1.0);
    acc += 0.5 * (-s * lnm).exp();
    let mut poch = s; // s(s+1)…(s+2j−2)
    let mut k = 1u32;
    for (j, &b2j) in BERNOULLI.iter().enumerate() {
        let need = 2 * (j as u32 + 1) - 1;
        while k < need {
            poch *= s + k as f64;
            k += 1;
        }
        let fact = factorial(2 * (j as u32 + 1));
        acc += b2j / fact * poch * (-(s + (2.0 * j as f64 + 1.0)) * lnm).exp();
    }
    acc
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `ζ(s)` for real `s ≠ 1` (via `ζ(s, 1)`).
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(Complex64::new(s, 0.0), 1.0).re
}

/// The zeta-branch value `L(1/2, χ₀) = ζ(1/2)(1 − q^{−1/2})`.
pub fn l_trivial_central(field: &PrimeField) -> Complex64 {
    Complex64::new(zeta(0.5) * (1.0 - 1.0 / (field.q() as f64).sqrt()), 0.0)
}

/// `L(1/2, χ_t) = q^{−1/2} Σ_a χ_t(a) ζ(1/2, a/q)` for nontrivial `χ_t`.
pub fn l_central(field: &PrimeField, t: CharIndex) -> Result<Complex64, SpecialError> {
    if t.0 % field.phi() == 0 {
        return Err(SpecialError::TrivialCharacter);
    }
    Ok(l_value(field, t.0, Complex64::new(0.5, 0.0)))
}

/// `L(s, χ_t)` by the same Hurwitz route, any `s ≠ 1`; at `t = 0` this is
/// the incomplete zeta `(1 − q^{−s})ζ(s)`.
pub fn l_value(field: &PrimeField, t: u64, s: Complex64) -> Complex64 {
    let q = field.q();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..q {
        acc += field.chi(t, a) * hurwitz_zeta(s, a as f64 / q as f64);
    }
    acc * (-s * (q as f64).ln()).exp()
}

/// All central values `L(1/2, χ_t)` at once: one Hurwitz-zeta sweep plus
/// one DFT of length `q−1`.
pub struct LValueTable {
    q: u64,
    vals: Vec<Complex64>,
}

impl LValueTable {
    pub fn build(field: &PrimeField) -> Self {
        let q = field.q();
        let n = field.phi();
        let s = Complex64::new(0.5, 0.0);
        let mut buf: Vec<Complex64> = (0..n)
            .map(|k| hurwitz_zeta(s, field.pw(k) as f64 / q as f64))
            .collect();
        dft::inverse_unnormalized(&mut buf);
        let scale = 1.0 / (q as f64).sqrt();
        for v in &mut buf {
            *v *= scale;
        }
        LValueTable { q, vals: buf }
    }

    /// `L(1/2, χ_t)` by index arithmetic, including the zeta branch at the
    /// trivial character.
    #[inline]
    pub fn value(&self, t: i64) -> Complex64 {
        let n = self.vals.len() as i64;
        self.vals[t.rem_euclid(n) as usize]
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `(1/(q−1))·Σ_t |L(1/2, χ_t^h)|⁴`.
    pub fn fourth_moment(&self, h: i64) -> f64 {
        let n = self.vals.len() as i64;
        let mut acc = 0.0;
        for t in 0..n {
            acc += self.value(t * h).norm_sqr().powi(2);
        }
        acc / n as f64
    }
}

// ---------------------------------------------------------------------------
// functional equation and AFE
// ---------------------------------------------------------------------------

/// Indices of `(χ^{e_0}, χ^{e_1}, χ^{e_2})`, requiring all nontrivial.
fn generic_indices(field: &PrimeField, t: u64, exps: [i64; 3]) -> Result<[u64; 3], SpecialError> {
    let n = field.phi();
    let mut out = [0u64; 3];
    for (i, &e) in exps.iter().enumerate() {
        let s = (t as i64 * e).rem_euclid(n as i64) as u64;
        if s == 0 {
            return Err(SpecialError::NonGenericCharacter);
        }
        out[i] = s;
    }
    Ok(out)
}

/// Residual of the completed-product functional equation
/// `γ_η(s)ΠL(s,χ^{e_i}) = ι_η·Πε(χ^{e_i})·q^{3(1/2−s)}·γ_η(1−s)ΠL(1−s,χ̄^{e_i})`
/// for a generic character. (The conductor power vanishes at `s = 1/2`.)
pub fn functional_equation_check(
    field: &PrimeField,
    t: u64,
    exps: [i64; 3],
    s: Complex64,
) -> Result<f64, SpecialError> {
    let idx = generic_indices(field, t, exps)?;
    let n = field.phi();
    let profile = GammaProfile::for_parity(t % 2 == 0, exps);
    let mut lhs = profile.ln_gamma_factor(s).exp();
    for &i in &idx {
        lhs *= l_value(field, i, s);
    }
    let mut rhs = profile.iota() * profile.ln_gamma_factor(Complex64::new(1.0, 0.0) - s).exp();
    rhs *= ((Complex64::new(0.5, 0.0) - s) * 3.0 * (field.q() as f64).ln()).exp();
    for &i in &idx {
        rhs *= field.epsilon_factor(CharIndex(i));
        rhs *= l_value(field, n - i, Complex64::new(1.0, 0.0) - s);
    }
    Ok((lhs - rhs).norm())
}

/// Enumerates `(l, m, n)` with `lmn ≤ cut` and `(lmn, q) = 1`, passing the
/// triple itself, the residue `v = l^{e0} m^{e1} n^{e2} mod q` and the
/// product `k = lmn`.
pub fn for_each_coprime_triple(
    field: &PrimeField,
    exps: [i64; 3],
    cut: u64,
    mut f: impl FnMut([u64; 3], u64, u64),
) {
    let q = field.q();
    let npow: Vec<u64> = (0..=cut)
        .map(|v| if v == 0 || v % q == 0 { 0 } else { field.pow_unit(v % q, exps[2]) })
        .collect();
    for l in 1..=cut {
        if l % q == 0 {
            continue;
        }
        let vl = field.pow_unit(l % q, exps[0]);
        let mut m = 1u64;
        while l * m <= cut {
            if m % q != 0 {
                let vlm = field.mul(vl, field.pow_unit(m % q, exps[1]));
                let n_max = cut / (l * m);
                let mut k = l * m;
                for n in 1..=n_max {
                    if npow[n as usize] != 0 {
                        f([l, m, n], field.mul(vlm, npow[n as usize]), k);
                    }
                    k += l * m;
                }
            }
            m += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AfeReport {
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    pub residual: f64,
    pub x: f64,
    pub y: f64,
    pub terms_x: u64,
    pub terms_y: u64,
}

/// Both sides of the per-character AFE at `X·Y = q³`: the L-product on the
/// left, the two smoothed `(l,m,n)`-sums (truncated where `V < 1e−13`) on
/// the right.
pub fn afe_check(field: &PrimeField, t: u64, exps: [i64; 3], x: f64) -> Result<AfeReport, SpecialError> {
    let q = field.q() as f64;
    if !(q.sqrt() <= x && x <= q.powf(2.5)) {
        return Err(SpecialError::XOutOfRange(x));
    }
    let idx = generic_indices(field, t, exps)?;
    let y = q.powi(3) / x;
    let profile = GammaProfile::for_parity(t % 2 == 0, exps);
    let interp = v_interp(profile);
    let mut lhs = Complex64::new(1.0, 0.0);
    for &i in &idx {
        lhs *= l_central(field, CharIndex(i))?;
    }

    let side = |scale: f64, conj: bool| {
        let cut = ((interp.y_cut * scale).floor() as u64).max(1);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut terms = 0u64;
        for_each_coprime_triple(field, exps, cut, |_, v, k| {
            let w = interp.eval(k as f64 / scale) / (k as f64).sqrt();
            let chi = field.chi(t, v);
            acc += w * if conj { chi.conj() } else { chi };
            terms += 1;
        });
        (acc, terms)
    };
    let (sx, terms_x) = side(x, false);
    let (sy, terms_y) = side(y, true);
    let mut eps = profile.iota();
    for &i in &idx {
        eps *= field.epsilon_factor(CharIndex(i));
    }
    let rhs = sx + eps * sy;
    Ok(AfeReport {
        lhs: (lhs.re, lhs.im),
        rhs: (rhs.re, rhs.im),
        residual: (lhs - rhs).norm(),
        x,
        y,
        terms_x,
        terms_y,
    })
}

/// AFE residuals for every generic character at once. The `(l,m,n)` sums
/// are grouped into residue-class tables and transformed by one DFT per
/// side and parity, so the cost is one enumeration plus `O(q log q)`.
pub fn afe_residuals_all(field: &PrimeField, exps: [i64; 3], x: f64) -> Result<Vec<(u64, f64)>, SpecialError> {
    let qf = field.q() as f64;
    if !(qf.sqrt() <= x && x <= qf.powf(2.5)) {
        return Err(SpecialError::XOutOfRange(x));
    }
    let n = field.phi();
    let y = qf.powi(3) / x;
    let even_i = v_interp(GammaProfile::EVEN);
    let odd_i = v_interp(GammaProfile::odd_for_exponents(exps));
    let ltab = LValueTable::build(field);

    let build = |scale: f64| {
        let cut = ((even_i.y_cut.max(odd_i.y_cut)) * scale).floor().max(1.0) as u64;
        let mut a_even = vec![0.0f64; n as usize];
        let mut a_odd = vec![0.0f64; n as usize];
        let mut w_even = vec![0.0f64; (cut + 1) as usize];
        let mut w_odd = vec![0.0f64; (cut + 1) as usize];
        for k in 1..=cut {
            let inv_sqrt = 1.0 / (k as f64).sqrt();
            w_even[k as usize] = even_i.eval(k as f64 / scale) * inv_sqrt;
            w_odd[k as usize] = odd_i.eval(k as f64 / scale) * inv_sqrt;
        }
        for_each_coprime_triple(field, exps, cut, |_, v, k| {
            a_even[(v - 1) as usize] += w_even[k as usize];
            a_odd[(v - 1) as usize] += w_odd[k as usize];
        });
        (a_even, a_odd)
    };
    let (ax_e, ax_o) = build(x);
    let (ay_e, ay_o) = build(y);

    // S(t) = Σ_v χ_t(v)·A[v] for all t at once
    let transform = |a: &[f64]| {
        let mut buf: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(a[(field.pw(j) - 1) as usize], 0.0))
            .collect();
        dft::inverse_unnormalized(&mut buf);
        buf
    };
    let sx_e = transform(&ax_e);
    let sx_o = transform(&ax_o);
    let sy_e = transform(&ay_e);
    let sy_o = transform(&ay_o);

    let iota_e = GammaProfile::EVEN.iota();
    let iota_o = GammaProfile::odd_for_exponents(exps).iota();
    let mut out = Vec::new();
    for t in 0..n {
        let idx = match generic_indices(field, t, exps) {
            Ok(i) => i,
            Err(_) => continue,
        };
        let mut lhs = Complex64::new(1.0, 0.0);
        let mut eps = if t % 2 == 0 { iota_e } else { iota_o };
        for &i in &idx {
            lhs *= ltab.value(i as i64);
            eps *= field.epsilon_factor(CharIndex(i));
        }
        let (sx, sy) = if t % 2 == 0 {
            (sx_e[t as usize], sy_e[((n - t) % n) as usize])
        } else {
            (sx_o[t as usize], sy_o[((n - t) % n) as usize])
        };
        out.push((t, (lhs - (sx + eps * sy)).norm()));
    }
    Ok(out)
}
