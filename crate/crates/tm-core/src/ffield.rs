//! Prime fields `F_q`, discrete logarithm tables, multiplicative characters
//! and Gauss sums.
//!
//! A [`PrimeField`] fixes an odd prime `q` together with its smallest
//! primitive root `g`, a full discrete-log table `ind` (so `g^ind[x] = x`)
//! and the inverse power table. Characters are indexed by a residue
//! `t mod q−1` via `χ_t(g) = e(t/(q−1))`, which turns products and powers of
//! characters into index arithmetic. All tables are immutable after
//! construction and safe to share across threads.

use crate::dft;
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use thiserror::Error;

/// Magic bytes of the binary discrete-log cache format.
pub const CACHE_MAGIC: &[u8; 4] = b"TMQ1";

/// Largest admissible modulus; the dlog table must stay addressable.
pub const MAX_Q: u64 = 1 << 31;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too small (need q >= 3)")]
    TooSmall(u64),
    #[error("modulus {0} exceeds the 2^31 table limit")]
    Overflow(u64),
    #[error("argument divisible by q")]
    XDivisibleByQ,
    #[error("cache file invalid: {0}")]
    BadCache(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Index `t mod q−1` of the multiplicative character `χ_t` with
/// `χ_t(g) = e(t/(q−1))`. `t = 0` is the trivial character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CharIndex(pub u64);

/// An odd prime `q` with primitive root and dlog/power tables.
pub struct PrimeField {
    q: u64,
    g: u64,
    /// `ind[x−1]` is the discrete log of `x ∈ {1, …, q−1}` base `g`.
    ind: Vec<u32>,
    /// `pow[k] = g^k mod q` for `k ∈ {0, …, q−2}`.
    pow: Vec<u32>,
    eq_table: OnceLock<Vec<Complex64>>,
    char_roots: OnceLock<Vec<Complex64>>,
    gauss: OnceLock<Vec<Complex64>>,
}

impl std::fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PrimeField(q={}, g={})", self.q, self.g)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // Deterministic Miller–Rabin for n < 3.3·10^24 with the bases above.
    let d = (n - 1) >> (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        let mut e = d;
        while e != n - 1 {
            x = mul_mod_u128(x, x, n);
            e <<= 1;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u128(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u128(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u128(acc, b, m);
        }
        b = mul_mod_u128(b, b, m);
        e >>= 1;
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The quantity `d_q`: `(d, q−1)` if `d` is even, `2(d, q−1)` if `d` is odd.
pub fn dq(d: u64, q: u64) -> u64 {
    let g = num_integer::gcd(d, q - 1);
    if d % 2 == 0 {
        g
    } else {
        2 * g
    }
}

impl PrimeField {
    /// Builds the field for an odd prime `q`; deterministic (smallest
    /// primitive root is chosen).
    pub fn build(q: u64) -> Result<Self, FieldError> {
        if q < 3 {
            return Err(FieldError::TooSmall(q));
        }
        if q > MAX_Q {
            return Err(FieldError::Overflow(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        let g = smallest_primitive_root(q);
        Ok(Self::from_parts(q, g))
    }

    fn from_parts(q: u64, g: u64) -> Self {
        let n = (q - 1) as usize;
        let mut ind = vec![0u32; n];
        let mut pow = vec![0u32; n];
        let mut x = 1u64;
        for k in 0..n {
            pow[k] = x as u32;
            ind[(x - 1) as usize] = k as u32;
            x = x * g % q;
        }
        debug_assert_eq!(x, 1);
        PrimeField {
            q,
            g,
            ind,
            pow,
            eq_table: OnceLock::new(),
            char_roots: OnceLock::new(),
            gauss: OnceLock::new(),
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    /// Order of the unit group, `q − 1`.
    pub fn phi(&self) -> u64 {
        self.q - 1
    }

    /// Discrete log of `x ∈ {1, …, q−1}` base `g`.
    #[inline]
    pub fn ind(&self, x: u64) -> u64 {
        debug_assert!(x >= 1 && x < self.q);
        self.ind[(x - 1) as usize] as u64
    }

    /// `g^k mod q`, for any `k` (reduced mod `q−1`).
    #[inline]
    pub fn pw(&self, k: u64) -> u64 {
        self.pow[(k % self.phi()) as usize] as u64
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    #[inline]
    pub fn inv(&self, x: u64) -> u64 {
        debug_assert!(x % self.q != 0);
        let n = self.phi();
        self.pw(n - self.ind(x % self.q) % n)
    }

    /// Reduces a signed exponent into `{0, …, q−2}` (valid on units only).
    #[inline]
    pub fn reduce_exp(&self, e: i64) -> u64 {
        let n = self.phi() as i64;
        e.rem_euclid(n) as u64
    }

    /// `x^e mod q` for a unit `x` and signed exponent `e`.
    #[inline]
    pub fn pow_unit(&self, x: u64, e: i64) -> u64 {
        debug_assert!(x % self.q != 0);
        let k = self.ind(x % self.q) * self.reduce_exp(e) % self.phi();
        self.pw(k)
    }

    /// Additive character `e_q(x) = exp(2πi x / q)`.
    #[inline]
    pub fn e_q(&self, x: u64) -> Complex64 {
        let tab = self.eq_table.get_or_init(|| {
            (0..self.q)
                .map(|x| Complex64::from_polar(1.0, TAU * x as f64 / self.q as f64))
                .collect()
        });
        tab[(x % self.q) as usize]
    }

    /// `e(j/(q−1))`, the root of unity used by character evaluation.
    #[inline]
    pub fn char_root(&self, j: u64) -> Complex64 {
        let tab = self.char_roots.get_or_init(|| {
            let n = self.phi();
            (0..n)
                .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
                .collect()
        });
        tab[(j % self.phi()) as usize]
    }

    /// `χ_t(x) = e(t·ind(x)/(q−1))`; unit modulus. Errors when `q | x`.
    pub fn char_value(&self, t: CharIndex, x: u64) -> Result<Complex64, FieldError> {
        if x % self.q == 0 {
            return Err(FieldError::XDivisibleByQ);
        }
        Ok(self.chi(t.0, x % self.q))
    }

    /// Unchecked character evaluation on a unit.
    #[inline]
    pub fn chi(&self, t: u64, x: u64) -> Complex64 {
        self.char_root(t % self.phi() * self.ind(x) % self.phi())
    }

    /// `χ_t(−1) = (−1)^t`: `ind(−1) = (q−1)/2` for every primitive root.
    #[inline]
    pub fn chi_minus_one(&self, t: u64) -> f64 {
        if t % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `μ_d(F_q)`: all `ξ` with `ξ^gcd(d, q−1) = 1`, sorted; contains 1.
    pub fn mu_d(&self, d: u64) -> Vec<u64> {
        assert!(d >= 1);
        let e = num_integer::gcd(d, self.phi());
        let step = self.phi() / e;
        let mut xs: Vec<u64> = (0..e).map(|k| self.pw(k * step)).collect();
        xs.sort_unstable();
        xs
    }

    /// All `q − 1` Gauss sums `G(χ_t) = Σ_x χ_t(x)·e_q(x)` via one DFT of
    /// the sequence `e_q(g^k)` over `k`.
    pub fn gauss_all(&self) -> &[Complex64] {
        self.gauss.get_or_init(|| {
            let n = self.phi() as usize;
            let mut buf: Vec<Complex64> = (0..n).map(|k| self.e_q(self.pow[k] as u64)).collect();
            // G(χ_t) = Σ_k e(+tk/(q−1))·e_q(g^k)
            dft::inverse_unnormalized(&mut buf);
            buf
        })
    }

    /// Un-normalized Gauss sum `G(χ_t)`.
    pub fn gauss_sum(&self, t: CharIndex) -> Complex64 {
        self.gauss_all()[(t.0 % self.phi()) as usize]
    }

    /// Normalized Gauss sum `ε(χ_t) = G(χ_t)/√q`.
    pub fn epsilon_factor(&self, t: CharIndex) -> Complex64 {
        self.gauss_sum(t) / (self.q as f64).sqrt()
    }

    /// Writes the dlog cache (`TMQ1` | q | g | ind entries, little endian).
    pub fn write_cache(&self, dir: &Path) -> Result<PathBuf, FieldError> {
        std::fs::create_dir_all(dir).map_err(|e| FieldError::Io(e.to_string()))?;
        let path = dir.join(format!("{}.tmq", self.q));
        let mut buf = Vec::with_capacity(12 + self.ind.len() * 4);
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&(self.q as u32).to_le_bytes());
        buf.extend_from_slice(&(self.g as u32).to_le_bytes());
        for v in &self.ind {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut f = std::fs::File::create(&path).map_err(|e| FieldError::Io(e.to_string()))?;
        f.write_all(&buf).map_err(|e| FieldError::Io(e.to_string()))?;
        Ok(path)
    }

    /// Loads a cached field, fully validating the table against `g`.
    pub fn read_cache(q: u64, dir: &Path) -> Result<Option<Self>, FieldError> {
        let path = dir.join(format!("{q}.tmq"));
        if !path.exists() {
            return Ok(None);
        }
        let mut raw = Vec::new();
        std::fs::File::open(&path)
            .and_then(|mut f| f.read_to_end(&mut raw))
            .map_err(|e| FieldError::Io(e.to_string()))?;
        let n = (q - 1) as usize;
        if raw.len() != 12 + 4 * n || &raw[0..4] != CACHE_MAGIC {
            return Err(FieldError::BadCache("bad magic or length".into()));
        }
        let qq = u32::from_le_bytes(raw[4..8].try_into().unwrap()) as u64;
        let g = u32::from_le_bytes(raw[8..12].try_into().unwrap()) as u64;
        if qq != q {
            return Err(FieldError::BadCache("modulus mismatch".into()));
        }
        let mut ind = vec![0u32; n];
        for (i, chunk) in raw[12..].chunks_exact(4).enumerate() {
            ind[i] = u32::from_le_bytes(chunk.try_into().unwrap());
        }
        let field = PrimeField::from_parts(q, g);
        if field.ind != ind {
            return Err(FieldError::BadCache("dlog table mismatch".into()));
        }
        Ok(Some(field))
    }

    /// Builds the field, going through the cache directory when given.
    pub fn load_or_build(q: u64, cache_dir: Option<&Path>) -> Result<Self, FieldError> {
        if q < 3 {
            return Err(FieldError::TooSmall(q));
        }
        if q > MAX_Q {
            return Err(FieldError::Overflow(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        if let Some(dir) = cache_dir {
            if let Some(f) = Self::read_cache(q, dir)? {
                return Ok(f);
            }
            let f = Self::build(q)?;
            f.write_cache(dir)?;
            return Ok(f);
        }
        Self::build(q)
    }
}

fn smallest_primitive_root(q: u64) -> u64 {
    let factors = prime_factors(q - 1);
    'next: for g in 2..q {
        for &p in &factors {
            if pow_mod_u128(g, (q - 1) / p, q) == 1 {
                continue 'next;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root")
}

/// Convenience: primes in `[lo, hi)`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..hi).filter(|&n| is_prime(n)).collect()
}
