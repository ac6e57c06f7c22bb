//! Exact integer arithmetic: gcd/lcm, CRT, deterministic primality,
//! prime search in progressions and factorization at desk scale.
//!
//! Values that can outgrow a machine word (periods, CRT moduli) are
//! `BigUint`/`BigInt`. Points of ℤ are `i128`, elements of families are
//! `u64`; factorization runs on `u128` below [`FACTOR_CEILING`].

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Factorization and primality are deterministic below this bound: the
/// Miller–Rabin witness set {2, …, 41} is exact below 3.3·10²⁴.
pub const FACTOR_CEILING: u128 = 1 << 80;

/// Default scan ceiling for [`next_prime_in_ap`].
pub const PRIME_SEARCH_CEILING: u64 = 100_000_000;

const MR_BASES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_big<'a, I: IntoIterator<Item = &'a u64>>(values: I) -> BigUint {
    values
        .into_iter()
        .fold(BigUint::one(), |acc, &v| acc.lcm(&BigUint::from(v)))
}

/// `x mod m` for a signed point and a small modulus, in `[0, m)`.
pub fn rem_i128(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

/// `x mod m` for a signed point and an unbounded modulus.
pub fn rem_big(x: i128, m: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    BigInt::from(x).mod_floor(&m).to_biguint().expect("mod_floor is nonnegative")
}

/// A residue class `residue mod modulus`, `0 <= residue < modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Congruence {
    #[serde(with = "decimal")]
    pub modulus: BigUint,
    #[serde(with = "decimal")]
    pub residue: BigUint,
}

/// Big integers travel as decimal strings in reports and specs.
pub mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

impl Congruence {
    pub fn new(residue: impl Into<BigInt>, modulus: impl Into<BigUint>) -> Result<Self> {
        let modulus = modulus.into();
        if modulus.is_zero() {
            return Err(Error::precondition("congruence modulus must be positive"));
        }
        let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
        let residue = residue.into().mod_floor(&m).to_biguint().unwrap();
        Ok(Congruence { modulus, residue })
    }

    pub fn from_small(residue: i128, modulus: u64) -> Result<Self> {
        Congruence::new(residue, BigUint::from(modulus))
    }

    /// The whole of ℤ.
    pub fn trivial() -> Self {
        Congruence {
            modulus: BigUint::one(),
            residue: BigUint::zero(),
        }
    }

    pub fn contains(&self, x: i128) -> bool {
        rem_big(x, &self.modulus) == self.residue
    }

    pub fn residue_mod(&self, b: u64) -> u64 {
        (&self.residue % b).to_u64().unwrap()
    }

    /// Smallest-magnitude representative, preferring the nonnegative one on ties.
    pub fn centered(&self) -> BigInt {
        let r = BigInt::from_biguint(Sign::Plus, self.residue.clone());
        let m = BigInt::from_biguint(Sign::Plus, self.modulus.clone());
        if &r * 2 > m {
            r - m
        } else {
            r
        }
    }

    fn compatible_with(&self, other: &Congruence) -> bool {
        let g = self.modulus.gcd(&other.modulus);
        &self.residue % &g == &other.residue % &g
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus)
    }
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    (e.gcd, e.x, e.y)
}

fn merge(a: &Congruence, b: &Congruence) -> Option<Congruence> {
    let m1 = BigInt::from_biguint(Sign::Plus, a.modulus.clone());
    let m2 = BigInt::from_biguint(Sign::Plus, b.modulus.clone());
    let r1 = BigInt::from_biguint(Sign::Plus, a.residue.clone());
    let r2 = BigInt::from_biguint(Sign::Plus, b.residue.clone());
    let (g, p, _) = ext_gcd(&m1, &m2);
    let diff = &r2 - &r1;
    if !(&diff % &g).is_zero() {
        return None;
    }
    let lcm = &m1 / &g * &m2;
    // x = r1 + m1 * ((r2 - r1)/g * p mod m2/g)
    let m2g = &m2 / &g;
    let t = (&diff / &g * p).mod_floor(&m2g);
    let x = (r1 + &m1 * t).mod_floor(&lcm);
    Some(Congruence {
        modulus: lcm.to_biguint().unwrap(),
        residue: x.to_biguint().unwrap(),
    })
}

/// Solves a system of congruences with arbitrary (not necessarily coprime)
/// moduli. On failure the error names a pair that clashes.
pub fn crt_solve(congruences: &[Congruence]) -> Result<Congruence> {
    let (first, rest) = congruences
        .split_first()
        .ok_or_else(|| Error::precondition("crt_solve needs at least one congruence"))?;
    let mut acc = first.clone();
    for (j, c) in rest.iter().enumerate() {
        match merge(&acc, c) {
            Some(next) => acc = next,
            None => {
                let j = j + 1;
                // Pairwise compatibility is equivalent to joint solvability,
                // so some earlier member must clash with #j.
                let i = (0..j)
                    .find(|&i| !congruences[i].compatible_with(c))
                    .expect("joint failure implies a pairwise clash");
                return Err(Error::Incompatible {
                    first_index: i,
                    first: congruences[i].clone(),
                    second_index: j,
                    second: c.clone(),
                });
            }
        }
    }
    Ok(acc)
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    if a >= m - b {
        a - (m - b)
    } else {
        a + b
    }
}

/// `a * b mod m` without overflow for any `m < 2^127`.
pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    let (a, mut b) = (a % m, b % m);
    if m <= u64::MAX as u128 {
        return a * b % m;
    }
    let mut r = 0;
    let mut a = a;
    while b > 0 {
        if b & 1 == 1 {
            r = add_mod(r, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    r
}

pub fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality for `n < FACTOR_CEILING`.
pub fn is_prime(n: u128) -> Result<bool> {
    if n >= FACTOR_CEILING {
        return Err(Error::ceiling(n, FACTOR_CEILING));
    }
    Ok(is_prime_unchecked(n))
}

fn is_prime_unchecked(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d_shift = (n - 1).trailing_zeros();
    let d = (n - 1) >> d_shift;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..d_shift {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes.
pub fn primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Largest `r` with `r^e <= n`.
pub fn iroot(n: u128, e: u32) -> u128 {
    if e == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / e as f64) as u128;
    while r > 0 && r.checked_pow(e).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(e).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

/// Prime factorization `value = ∏ prime^exponent`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u128,
    pub factors: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn exponent_of(&self, p: u128) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn largest_prime(&self) -> Option<u128> {
        self.factors.last().map(|&(p, _)| p)
    }
}

const TRIAL_LIMIT: u128 = 1000;

pub fn factor(n: u128) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::precondition("factor(0) is undefined"));
    }
    if n >= FACTOR_CEILING {
        return Err(Error::ceiling(n, FACTOR_CEILING));
    }
    let mut primes: Vec<u128> = Vec::new();
    let mut rest = n;
    let mut p = 2;
    while p < TRIAL_LIMIT && p * p <= rest {
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        split_into(rest, &mut primes);
    }
    primes.sort_unstable();
    let mut factors: Vec<(u128, u32)> = Vec::new();
    for q in primes {
        match factors.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => factors.push((q, 1)),
        }
    }
    Ok(Factorization { value: n, factors })
}

fn split_into(n: u128, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    if is_prime_unchecked(n) {
        out.push(n);
        return;
    }
    let r = iroot(n, 2);
    if r * r == n {
        split_into(r, out);
        split_into(r, out);
        return;
    }
    let d = pollard_brent(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Brent's variant of Pollard rho; `n` odd composite, not a perfect square.
fn pollard_brent(n: u128) -> u128 {
    if n % 2 == 0 {
        return 2;
    }
    let f = |x: u128, c: u128| add_mod(mul_mod(x, x, n), c, n);
    for c in 1u128.. {
        let (mut y, m) = (2u128, 128u64);
        let (mut g, mut r, mut q) = (1u128, 1u64, 1u128);
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y, c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y, c);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys, c);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// Factorization of `|x|` for a signed point; `x = 0` is rejected.
pub fn factor_i128(x: i128) -> Result<Factorization> {
    factor(x.unsigned_abs())
}

/// Smallest prime `p > lower` with `p ≡ a (mod m)` and `gcd(p, avoid) = 1`.
pub fn next_prime_in_ap(a: i128, m: u64, lower: i128, avoid: &BigUint) -> Result<u64> {
    next_prime_in_ap_bounded(a, m, lower, avoid, PRIME_SEARCH_CEILING)
}

pub fn next_prime_in_ap_bounded(
    a: i128,
    m: u64,
    lower: i128,
    avoid: &BigUint,
    ceiling: u64,
) -> Result<u64> {
    if m == 0 {
        return Err(Error::precondition("progression modulus must be positive"));
    }
    if avoid.is_zero() {
        return Err(Error::precondition("avoid must be at least 1"));
    }
    let a = rem_i128(a, m);
    if a.gcd(&m) != 1 {
        return Err(Error::precondition(format!(
            "gcd({a}, {m}) != 1: the progression holds at most one prime"
        )));
    }
    let start = lower.max(1) + 1;
    // first p >= start with p ≡ a mod m
    let shift = (a as i128 - start).rem_euclid(m as i128);
    let mut p = start + shift;
    while p <= ceiling as i128 {
        let pu = p as u64;
        if is_prime_unchecked(pu as u128) && !(avoid % pu).is_zero() {
            return Ok(pu);
        }
        p += m as i128;
    }
    Err(Error::SearchExhausted {
        ceiling: ceiling.to_string(),
    })
}

/// A positive integer held as its prime factorization; used for periods
/// `lcm(S)` that quickly leave machine range.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredInt {
    factors: std::collections::BTreeMap<u64, u32>,
}

impl FactoredInt {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_u64(n: u64) -> Result<Self> {
        let f = factor(n as u128)?;
        Ok(FactoredInt {
            factors: f.factors.iter().map(|&(p, e)| (p as u64, e)).collect(),
        })
    }

    /// `lcm` of the given positive integers.
    pub fn lcm_of<'a, I: IntoIterator<Item = &'a u64>>(values: I) -> Result<Self> {
        let mut acc = FactoredInt::one();
        for &v in values {
            acc = acc.lcm(&FactoredInt::from_u64(v)?);
        }
        Ok(acc)
    }

    pub fn lcm(&self, other: &FactoredInt) -> FactoredInt {
        let mut factors = self.factors.clone();
        for (&p, &e) in &other.factors {
            let slot = factors.entry(p).or_insert(0);
            *slot = (*slot).max(e);
        }
        FactoredInt { factors }
    }

    pub fn value(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (&p, &e)| acc * BigUint::from(p).pow(e))
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.value().to_u64()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.keys().copied()
    }

    pub fn valuation(&self, p: u64) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// `gcd(b, self)`.
    pub fn gcd_with(&self, mut b: u64) -> u64 {
        let mut g = 1u64;
        for (&p, &e) in &self.factors {
            let mut k = 0;
            while k < e && b % p == 0 {
                b /= p;
                g *= p;
                k += 1;
            }
        }
        g
    }

    /// Whether `b` divides `self`.
    pub fn is_multiple_of(&self, b: u64) -> bool {
        self.gcd_with(b) == b
    }

    /// All divisors in increasing order, or `None` past `u64`.
    pub fn divisors(&self) -> Option<Vec<u64>> {
        self.to_u64()?;
        let mut out = vec![1u64];
        for (&p, &e) in &self.factors {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for &d in &out {
                let mut q = d;
                next.push(q);
                for _ in 0..e {
                    q *= p;
                    next.push(q);
                }
            }
            out = next;
        }
        out.sort_unstable();
        Some(out)
    }
}
