//! Exponent triples `(a, b, ±c)`: invariants, classification, exhaustive
//! enumeration of the finite exceptional lists, and the character multisets
//! `ρ_{a,b;c}`, `θ_{a,b;c}` attached to the negative-sign sums together with
//! their Kummer/Belyi induction flags.

use crate::ffield::PrimeField;
use num_integer::gcd;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TripleError {
    #[error("({0}, {1}, {2}) is not setwise coprime")]
    NotSetwiseCoprime(u64, u64, u64),
    #[error("exponent {0} does not divide q−1 = {1}")]
    DivisibilityViolated(u64, u64),
    #[error("cannot parse triple from {0:?} (expected \"a,b,c\" or \"a,b,-c\")")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// A triple of positive exponents with the sign carried by the third.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TripleSpec {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub sign: Sign,
}

impl TripleSpec {
    pub fn new(a: u64, b: u64, c: u64, sign: Sign) -> Self {
        assert!(a >= 1 && b >= 1 && c >= 1);
        TripleSpec { a, b, c, sign }
    }

    pub fn plus(a: u64, b: u64, c: u64) -> Self {
        Self::new(a, b, c, Sign::Plus)
    }

    pub fn minus(a: u64, b: u64, c: u64) -> Self {
        Self::new(a, b, c, Sign::Minus)
    }

    /// Signed exponent list `[a, b, ±c]`.
    pub fn exponents(&self) -> [i64; 3] {
        let c = match self.sign {
            Sign::Plus => self.c as i64,
            Sign::Minus => -(self.c as i64),
        };
        [self.a as i64, self.b as i64, c]
    }

    pub fn is_setwise_coprime(&self) -> bool {
        gcd(gcd(self.a, self.b), self.c) == 1
    }

    /// Scales all exponents by `d` (used by the `d`-decomposition).
    pub fn scaled(&self, d: u64) -> [i64; 3] {
        let [a, b, c] = self.exponents();
        [a * d as i64, b * d as i64, c * d as i64]
    }
}

impl fmt::Display for TripleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Plus => write!(f, "{},{},{}", self.a, self.b, self.c),
            Sign::Minus => write!(f, "{},{},-{}", self.a, self.b, self.c),
        }
    }
}

impl FromStr for TripleSpec {
    type Err = TripleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(TripleError::Parse(s.into()));
        }
        let a: u64 = parts[0].parse().map_err(|_| TripleError::Parse(s.into()))?;
        let b: u64 = parts[1].parse().map_err(|_| TripleError::Parse(s.into()))?;
        let c: i64 = parts[2].parse().map_err(|_| TripleError::Parse(s.into()))?;
        if a == 0 || b == 0 || c == 0 {
            return Err(TripleError::Parse(s.into()));
        }
        Ok(if c < 0 {
            TripleSpec::minus(a, b, (-c) as u64)
        } else {
            TripleSpec::plus(a, b, c as u64)
        })
    }
}

/// The rank data `r = a+b−(a,c)−(b,c)+1`, `t = c−(a,c)−(b,c)+1`,
/// `n = max(r,t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TripleInvariants {
    pub r: u64,
    pub t: u64,
    pub n: u64,
}

pub fn invariants(a: u64, b: u64, c: u64) -> Result<TripleInvariants, TripleError> {
    if gcd(gcd(a, b), c) != 1 {
        return Err(TripleError::NotSetwiseCoprime(a, b, c));
    }
    let ac = gcd(a, c) as i64;
    let bc = gcd(b, c) as i64;
    let r = a as i64 + b as i64 - ac - bc + 1;
    let t = c as i64 - ac - bc + 1;
    debug_assert!(r >= 1 && t >= 0);
    Ok(TripleInvariants {
        r: r as u64,
        t: t as u64,
        n: r.max(t) as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TripleClass {
    Galant,
    Oxozonic,
    Sulfatic,
    Induced,
    Solvable,
}

impl fmt::Display for TripleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TripleClass::Galant => "galant",
            TripleClass::Oxozonic => "oxozonic",
            TripleClass::Sulfatic => "sulfatic",
            TripleClass::Induced => "induced",
            TripleClass::Solvable => "solvable",
        };
        f.write_str(s)
    }
}

/// Classifies a setwise-coprime triple. Stable under the swap `a ↔ b`.
pub fn classify(spec: TripleSpec) -> Result<TripleClass, TripleError> {
    if !spec.is_setwise_coprime() {
        return Err(TripleError::NotSetwiseCoprime(spec.a, spec.b, spec.c));
    }
    let (lo, hi) = (spec.a.min(spec.b), spec.a.max(spec.b));
    let c = spec.c;
    Ok(match spec.sign {
        Sign::Plus => {
            if lo + hi + c == 4 {
                TripleClass::Oxozonic
            } else {
                TripleClass::Galant
            }
        }
        Sign::Minus => {
            if c == spec.a || c == spec.b {
                TripleClass::Induced
            } else if lo + hi == c && (2..=4).contains(&c) {
                TripleClass::Solvable
            } else if (lo, hi, c) == (1, 2, 5) {
                TripleClass::Sulfatic
            } else if matches!((lo, hi, c), (1, 4, 3) | (1, 6, 3) | (2, 3, 1)) {
                TripleClass::Oxozonic
            } else {
                TripleClass::Galant
            }
        }
    })
}

/// Optional filters for [`enumerate_n_equals`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EnumFilters {
    /// Keep only triples with `a + b + c` even.
    pub parity_even: bool,
    /// Constraint on `|r − t|` (which equals `|a + b − c|`).
    pub rt_gap: Option<RtGap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtGap {
    NonZero,
    Exact(u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyInfo {
    /// The family is `(n0, c, c)` for `c > n0` (or `c ≥ 1` when `n0 = 1`)
    /// coprime to `n0`.
    pub a: u64,
    pub constraint: String,
    /// Whether generic family members pass the requested filters.
    pub included: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Enumeration {
    pub n0: u64,
    /// Canonical `a ≤ b` sporadic solutions inside the proof bounds, sorted.
    pub sporadics: Vec<(u64, u64, u64)>,
    /// Solutions found only inside the +2 safety margin beyond the proof
    /// bounds; reported separately, never merged into `sporadics`.
    pub margin_hits: Vec<(u64, u64, u64)>,
    pub family: FamilyInfo,
}

/// Exhaustively lists the setwise-coprime triples with `n = n0`, separating
/// the infinite family `(n0, c, c)` from the sporadic solutions.
///
/// Search bounds are the ones that make the solution set provably finite
/// (`b ≤ max(n0+1, 2(n0−1))`, `c ≤ max(n0+2b−1, 5n0−3)`), each extended by a
/// +2 margin; margin hits are reported as findings.
pub fn enumerate_n_equals(n0: u64, filters: EnumFilters) -> Enumeration {
    assert!(n0 >= 1);
    let b_bound = (n0 + 1).max(2 * (n0 - 1));
    let keep = |a: u64, b: u64, c: u64, inv: TripleInvariants| -> bool {
        if filters.parity_even && (a + b + c) % 2 != 0 {
            return false;
        }
        match filters.rt_gap {
            Some(RtGap::NonZero) => inv.r != inv.t,
            Some(RtGap::Exact(g)) => inv.r.abs_diff(inv.t) == g,
            None => true,
        }
    };

    let mut sporadics = Vec::new();
    let mut margin_hits = Vec::new();
    for b in 1..=b_bound + 2 {
        let c_bound = (n0 + 2 * b - 1).max(5 * n0 - 3);
        for a in 1..=b {
            for c in 1..=c_bound + 2 {
                if gcd(gcd(a, b), c) != 1 {
                    continue;
                }
                // family pattern (n0, c, c), canonicalised
                if a == n0 && b == c && c >= n0 {
                    continue;
                }
                let inv = invariants(a, b, c).unwrap();
                if inv.n != n0 || !keep(a, b, c, inv) {
                    continue;
                }
                if b <= b_bound && c <= c_bound {
                    sporadics.push((a, b, c));
                } else {
                    margin_hits.push((a, b, c));
                }
            }
        }
    }
    sporadics.sort_unstable();
    margin_hits.sort_unstable();

    // A generic family member has r = n0, t = 0 and a+b+c = n0 + 2c.
    let fam_inv = TripleInvariants { r: n0, t: 0, n: n0 };
    let fam_c = if n0 == 1 { n0 + 2 } else { n0 + 1 }; // representative coprime c
    let included = keep(n0, fam_c, fam_c, fam_inv);
    Enumeration {
        n0,
        sporadics,
        margin_hits,
        family: FamilyInfo {
            a: n0,
            constraint: format!(
                "({n0}, c, c) for c {} {n0} with gcd(c, {n0}) = 1",
                if n0 == 1 { ">=" } else { ">" }
            ),
            included,
        },
    }
}

/// A multiset of character indices over a fixed cyclic dual group of order
/// `group`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharMultiset {
    group: u64,
    counts: BTreeMap<u64, u32>,
}

impl CharMultiset {
    pub fn empty(group: u64) -> Self {
        CharMultiset {
            group,
            counts: BTreeMap::new(),
        }
    }

    pub fn from_indices(group: u64, indices: impl IntoIterator<Item = u64>) -> Self {
        let mut m = Self::empty(group);
        for t in indices {
            m.insert(t);
        }
        m
    }

    /// The subgroup `ρ[a]` of characters of order dividing `a` (requires
    /// `a | group`).
    pub fn order_dividing(group: u64, a: u64) -> Self {
        debug_assert_eq!(group % a, 0);
        Self::from_indices(group, (0..a).map(|k| k * (group / a)))
    }

    pub fn group(&self) -> u64 {
        self.group
    }

    pub fn insert(&mut self, t: u64) {
        *self.counts.entry(t % self.group).or_insert(0) += 1;
    }

    pub fn len(&self) -> u64 {
        self.counts.values().map(|&m| m as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn multiplicity(&self, t: u64) -> u32 {
        self.counts.get(&(t % self.group)).copied().unwrap_or(0)
    }

    /// Iterates `(index, multiplicity)` in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.counts.iter().map(|(&t, &m)| (t, m))
    }

    /// Expands to a sorted list with multiplicity.
    pub fn expanded(&self) -> Vec<u64> {
        let mut v = Vec::new();
        for (t, m) in self.iter() {
            v.extend(std::iter::repeat(t).take(m as usize));
        }
        v
    }

    /// Disjoint union (multiplicities add).
    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.group, other.group);
        let mut out = self.clone();
        for (t, m) in other.iter() {
            *out.counts.entry(t).or_insert(0) += m;
        }
        out
    }

    /// Multiset intersection `⊓` (minimum multiplicity).
    pub fn intersect(&self, other: &Self) -> Self {
        assert_eq!(self.group, other.group);
        let mut out = Self::empty(self.group);
        for (t, m) in self.iter() {
            let k = m.min(other.multiplicity(t));
            if k > 0 {
                out.counts.insert(t, k);
            }
        }
        out
    }

    /// Removes `other` with multiplicity (saturating at zero).
    pub fn difference(&self, other: &Self) -> Self {
        assert_eq!(self.group, other.group);
        let mut out = Self::empty(self.group);
        for (t, m) in self.iter() {
            let k = m.saturating_sub(other.multiplicity(t));
            if k > 0 {
                out.counts.insert(t, k);
            }
        }
        out
    }

    /// η-translation: multiplies every element by the character of index
    /// `eta`.
    pub fn translate(&self, eta: u64) -> Self {
        let mut out = Self::empty(self.group);
        for (t, m) in self.iter() {
            *out.counts.entry((t + eta) % self.group).or_insert(0) += m;
        }
        out
    }
}

/// Builds `ρ_{a,b;c}` and `θ_{a,b;c}` over the fixed field.
///
/// `ρ = {1} ⊔ {ρ^a = 1, ρ^{(a,c)} ≠ 1} ⊔ {ρ^b = 1, ρ^{(b,c)} ≠ 1}` and
/// `θ = {ρ^c = 1, ρ^{(a,c)} ≠ 1, ρ^{(b,c)} ≠ 1}`; sizes are `r` and `t`.
pub fn char_multisets(
    field: &PrimeField,
    a: u64,
    b: u64,
    c: u64,
) -> Result<(CharMultiset, CharMultiset), TripleError> {
    if gcd(gcd(a, b), c) != 1 {
        return Err(TripleError::NotSetwiseCoprime(a, b, c));
    }
    let n = field.phi();
    for e in [a, b, c] {
        if n % e != 0 {
            return Err(TripleError::DivisibilityViolated(e, n));
        }
    }
    let kills = |t: u64, ord: u64| t % (n / ord) == 0; // ρ^ord = 1 at index t
    let mut rho = CharMultiset::empty(n);
    rho.insert(0);
    for t in (0..n).step_by((n / a) as usize) {
        if !kills(t, gcd(a, c)) {
            rho.insert(t);
        }
    }
    for t in (0..n).step_by((n / b) as usize) {
        if !kills(t, gcd(b, c)) {
            rho.insert(t);
        }
    }
    let mut theta = CharMultiset::empty(n);
    for t in (0..n).step_by((n / c) as usize) {
        if !kills(t, gcd(a, c)) && !kills(t, gcd(b, c)) {
            theta.insert(t);
        }
    }
    Ok((rho, theta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BelyiWitness {
    pub alpha: u64,
    pub beta: u64,
    pub d: u64,
    pub e: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InducedFlags {
    pub r: u64,
    pub t: u64,
    /// Divisors `d ≥ 2` of `r` (and of `t` when `t > 0`) whose order-`d`
    /// translation fixes both multisets.
    pub kummer_divisors: Vec<u64>,
    /// `r = 1`, `θ = ∅`: the rank-one case, itself a Kummer twist.
    pub rank_one: bool,
    pub belyi: Option<BelyiWitness>,
    pub kummer_induced: bool,
    pub belyi_induced: bool,
    pub primitive: bool,
}

/// Reports Kummer- and Belyi-induction of a pair of character multisets by
/// direct search over characters of the fixed dual group.
pub fn kummer_belyi_flags(rho: &CharMultiset, theta: &CharMultiset) -> InducedFlags {
    assert_eq!(rho.group(), theta.group());
    let group = rho.group();
    let r = rho.len();
    let t = theta.len();

    let mut kummer_divisors = Vec::new();
    for d in 2..=r.max(2) {
        if r % d != 0 || (t > 0 && t % d != 0) || group % d != 0 {
            continue;
        }
        let eta = group / d; // a character of exact order d
        if rho.translate(eta) == *rho && (theta.is_empty() || theta.translate(eta) == *theta) {
            kummer_divisors.push(d);
        }
    }
    let rank_one = r == 1 && t == 0;

    // Belyi search: ρ = roots_d(α) ⊔ roots_e(β), θ = roots_n(αβ), β ≠ 1.
    let mut belyi = None;
    let n = r.max(t);
    if r == t && r == n && n >= 2 && group % n == 0 {
        'outer: for d in 1..n {
            let e = n - d;
            if group % d != 0 || group % e != 0 {
                continue;
            }
            for alpha in (0..group).step_by(d as usize) {
                let roots_a = roots_of(group, d, alpha);
                for beta in (0..group).step_by(e as usize) {
                    if beta == 0 {
                        continue; // β ≠ 1
                    }
                    let cand = roots_a.union(&roots_of(group, e, beta));
                    if cand != *rho {
                        continue;
                    }
                    if roots_of(group, n, (alpha + beta) % group) == *theta {
                        belyi = Some(BelyiWitness { alpha, beta, d, e });
                        break 'outer;
                    }
                }
            }
        }
    }

    let kummer_induced = !kummer_divisors.is_empty() || rank_one;
    let belyi_induced = belyi.is_some();
    InducedFlags {
        r,
        t,
        primitive: !kummer_induced && !belyi_induced,
        kummer_divisors,
        rank_one,
        belyi,
        kummer_induced,
        belyi_induced,
    }
}

/// All solutions of `σ^d = α` in the dual group (empty if none); when
/// `d | group` and `d | α` there are exactly `d` of them.
fn roots_of(group: u64, d: u64, alpha: u64) -> CharMultiset {
    let g = gcd(d, group);
    if alpha % g != 0 {
        return CharMultiset::empty(group);
    }
    // σ·d ≡ α (mod group) ⟺ σ ≡ (α/g)·inv(d/g) (mod group/g)
    let m = group / g;
    let dg = d / g % m;
    let base = alpha / g % m * mod_inverse(dg, m) % m;
    CharMultiset::from_indices(group, (0..g).map(|k| (base + k * m) % group))
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (m as i64, (a % m) as i64);
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    debug_assert_eq!(r, 1, "not invertible");
    t.rem_euclid(m as i64) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn invariants_examples() {
        assert_eq!(
            invariants(1, 2, 5).unwrap(),
            TripleInvariants { r: 2, t: 4, n: 4 }
        );
        assert_eq!(
            invariants(1, 1, 2).unwrap(),
            TripleInvariants { r: 1, t: 1, n: 1 }
        );
        for c in 1..=12 {
            assert_eq!(invariants(1, c, c).unwrap().n, 1, "(1,{c},{c})");
        }
        assert_eq!(
            invariants(2, 4, 6).unwrap_err(),
            TripleError::NotSetwiseCoprime(2, 4, 6)
        );
    }

    #[test]
    fn classify_examples() {
        use TripleClass::*;
        assert_eq!(classify(TripleSpec::plus(1, 1, 2)).unwrap(), Oxozonic);
        assert_eq!(classify(TripleSpec::plus(2, 1, 1)).unwrap(), Oxozonic);
        assert_eq!(classify(TripleSpec::plus(1, 1, 1)).unwrap(), Galant);
        assert_eq!(classify(TripleSpec::minus(1, 2, 3)).unwrap(), Solvable);
        assert_eq!(classify(TripleSpec::minus(1, 2, 5)).unwrap(), Sulfatic);
        assert_eq!(classify(TripleSpec::minus(2, 3, 1)).unwrap(), Oxozonic);
        assert_eq!(classify(TripleSpec::minus(1, 4, 3)).unwrap(), Oxozonic);
        assert_eq!(classify(TripleSpec::minus(1, 6, 3)).unwrap(), Oxozonic);
        assert_eq!(classify(TripleSpec::minus(2, 3, 3)).unwrap(), Induced);
        assert_eq!(classify(TripleSpec::minus(3, 5, 7)).unwrap(), Galant);
        // a+b = c ≥ 5 is galant, not solvable
        assert_eq!(classify(TripleSpec::minus(1, 4, 5)).unwrap(), Galant);
        assert_eq!(classify(TripleSpec::minus(2, 3, 5)).unwrap(), Galant);
    }

    #[test]
    fn triple_parsing_roundtrip() {
        for s in ["1,2,-5", "1,1,1", "2,3,-1", "10,7,3"] {
            let t: TripleSpec = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
        assert!("1,2".parse::<TripleSpec>().is_err());
        assert!("1,0,3".parse::<TripleSpec>().is_err());
    }

    #[test]
    fn enumeration_reproduces_the_finite_lists() {
        // n = 1, no filters
        let e1 = enumerate_n_equals(1, EnumFilters::default());
        assert_eq!(e1.sporadics, vec![(1, 1, 2)]);
        assert!(e1.margin_hits.is_empty());

        // n = 2, a+b+c even
        let e2 = enumerate_n_equals(
            2,
            EnumFilters {
                parity_even: true,
                rt_gap: None,
            },
        );
        assert_eq!(e2.sporadics, vec![(1, 2, 1), (1, 2, 3)]);

        // n = 4, a+b+c even, r ≠ t
        let e4 = enumerate_n_equals(
            4,
            EnumFilters {
                parity_even: true,
                rt_gap: Some(RtGap::NonZero),
            },
        );
        assert_eq!(
            e4.sporadics,
            vec![(1, 2, 5), (1, 4, 1), (1, 4, 3), (1, 6, 3), (2, 3, 1), (3, 4, 3)]
        );
        assert!(e4.margin_hits.is_empty());
        assert!(e4.family.included);

        // n = 8 and n = 9 with |r − t| = 6
        let f = EnumFilters {
            parity_even: false,
            rt_gap: Some(RtGap::Exact(6)),
        };
        assert_eq!(
            enumerate_n_equals(8, f).sporadics,
            vec![(1, 2, 9), (1, 8, 3), (2, 7, 3), (4, 5, 3)]
        );
        assert_eq!(
            enumerate_n_equals(9, f).sporadics,
            vec![(1, 3, 10), (1, 9, 4), (3, 7, 4), (5, 5, 4)]
        );
        // the family has |r − t| = n0 ≠ 6 there
        assert!(!enumerate_n_equals(8, f).family.included);
    }

    #[test]
    fn char_multiset_sizes_match_invariants() {
        let f13 = PrimeField::build(13).unwrap();
        let (rho, theta) = char_multisets(&f13, 1, 2, 3).unwrap();
        assert_eq!(rho.len(), 2);
        assert_eq!(theta.len(), 2);

        let (rho, theta) = char_multisets(&f13, 1, 4, 3).unwrap();
        assert_eq!(rho.len(), 4);
        assert_eq!(theta.len(), 2);
        let inv = invariants(1, 4, 3).unwrap();
        assert_eq!((rho.len(), theta.len()), (inv.r, inv.t));

        assert_eq!(
            char_multisets(&f13, 1, 5, 3).unwrap_err(),
            TripleError::DivisibilityViolated(5, 12)
        );
    }

    #[test]
    fn a_plus_b_equals_c_multisets() {
        // (1,2,3) with a+b=c: ρ = ρ[1,2] ∖ {1}, θ = ρ[3] ∖ {1}
        let f7 = PrimeField::build(7).unwrap();
        let (rho, theta) = char_multisets(&f7, 1, 2, 3).unwrap();
        let n = f7.phi();
        let one = CharMultiset::from_indices(n, [0]);
        let r12 = CharMultiset::order_dividing(n, 1).union(&CharMultiset::order_dividing(n, 2));
        let r3 = CharMultiset::order_dividing(n, 3);
        assert_eq!(rho, r12.difference(&one));
        assert_eq!(theta, r3.difference(&one));
        // only the trivial character lies in the intersection ρ[1,2] ⊓ ρ[3]
        assert_eq!(r12.intersect(&r3), one);
    }

    #[test]
    fn kummer_flags_match_induced_classification() {
        // c = b case is Kummer-induced, generic pairs are primitive
        for q in [31u64, 61, 211] {
            let f = PrimeField::build(q).unwrap();
            for a in 1..=10u64 {
                for b in 1..=10u64 {
                    for c in 1..=10u64 {
                        if gcd(gcd(a, b), c) != 1 {
                            continue;
                        }
                        if f.phi() % a != 0 || f.phi() % b != 0 || f.phi() % c != 0 {
                            continue;
                        }
                        let (rho, theta) = char_multisets(&f, a, b, c).unwrap();
                        let flags = kummer_belyi_flags(&rho, &theta);
                        let induced = classify(TripleSpec::minus(a, b, c)).unwrap()
                            == TripleClass::Induced;
                        assert_eq!(
                            flags.kummer_induced, induced,
                            "q={q} ({a},{b},-{c}) flags={flags:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn belyi_flags_examples() {
        let f7 = PrimeField::build(7).unwrap();
        let (rho, theta) = char_multisets(&f7, 1, 2, 3).unwrap();
        let flags = kummer_belyi_flags(&rho, &theta);
        assert!(!flags.belyi_induced);

        let f13 = PrimeField::build(13).unwrap();
        let (rho, theta) = char_multisets(&f13, 1, 4, 3).unwrap();
        let flags = kummer_belyi_flags(&rho, &theta);
        assert!(flags.primitive, "{flags:?}");
    }

    proptest! {
        #[test]
        fn classify_total_and_swap_stable(a in 1u64..=50, b in 1u64..=50, c in 1u64..=50, neg in any::<bool>()) {
            prop_assume!(gcd(gcd(a, b), c) == 1);
            let sign = if neg { Sign::Minus } else { Sign::Plus };
            let x = classify(TripleSpec::new(a, b, c, sign)).unwrap();
            let y = classify(TripleSpec::new(b, a, c, sign)).unwrap();
            prop_assert_eq!(x, y);
        }

        #[test]
        fn invariants_n_at_least_one(a in 1u64..=40, b in 1u64..=40, c in 1u64..=40) {
            prop_assume!(gcd(gcd(a, b), c) == 1);
            let inv = invariants(a, b, c).unwrap();
            prop_assert!(inv.n >= 1);
            prop_assert_eq!(inv.n, inv.r.max(inv.t));
            // r − t = a + b − c
            prop_assert_eq!(inv.r as i64 - inv.t as i64, a as i64 + b as i64 - c as i64);
        }

        #[test]
        fn multiset_ops_are_consistent(xs in proptest::collection::vec(0u64..12, 0..8),
                                       ys in proptest::collection::vec(0u64..12, 0..8),
                                       eta in 0u64..12) {
            let a = CharMultiset::from_indices(12, xs);
            let b = CharMultiset::from_indices(12, ys);
            prop_assert_eq!(a.union(&b).len(), a.len() + b.len());
            let i = a.intersect(&b);
            prop_assert!(i.len() <= a.len().min(b.len()));
            prop_assert_eq!(a.translate(eta).len(), a.len());
            prop_assert_eq!(a.translate(eta).translate(12 - eta % 12), a.clone());
            prop_assert_eq!(a.difference(&i).len(), a.len() - i.len());
        }
    }
}
