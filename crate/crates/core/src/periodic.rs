//! Periodic subsets of ℤ: finite sets of multiples `M_A`, unions of residue
//! classes, their exact densities, and 0/1 windows of indicator sequences.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, FactoredInt};
use crate::error::{Error, Result};
use crate::family::BFamily;

/// Periods up to this size may be materialized as residue bitmaps.
pub const SIEVE_LIMIT: u64 = 10_000_000;

/// Node budget of the exact density recursion before it falls back to a sieve.
pub const RECURSION_BUDGET: usize = 2_000_000;

/// Windows reaching beyond this are evaluated pointwise instead of sieved.
pub const WINDOW_SIEVE_LIMIT: u64 = 100_000_000;

pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Removes every divisor that is a multiple of another one; sorts.
pub fn primitivize(mut divisors: Vec<u64>) -> Vec<u64> {
    divisors.sort_unstable();
    divisors.dedup();
    let mut out: Vec<u64> = Vec::with_capacity(divisors.len());
    for d in divisors {
        if !out.iter().any(|&a| d % a == 0) {
            out.push(d);
        }
    }
    out
}

/// `M_A = ⋃_{a∈A} aℤ` for a finite A, stored by its primitive divisors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PeriodicSetRepr", into = "PeriodicSetRepr")]
pub struct PeriodicSet {
    divisors: Vec<u64>,
    period: FactoredInt,
}

#[derive(Serialize, Deserialize)]
struct PeriodicSetRepr {
    divisors: Vec<u64>,
    #[serde(default, skip_deserializing)]
    period: String,
}

impl TryFrom<PeriodicSetRepr> for PeriodicSet {
    type Error = Error;

    fn try_from(r: PeriodicSetRepr) -> Result<Self> {
        PeriodicSet::new(r.divisors)
    }
}

impl From<PeriodicSet> for PeriodicSetRepr {
    fn from(s: PeriodicSet) -> Self {
        PeriodicSetRepr {
            period: s.period.value().to_string(),
            divisors: s.divisors,
        }
    }
}

impl PeriodicSet {
    pub fn new(divisors: Vec<u64>) -> Result<Self> {
        if divisors.contains(&0) {
            return Err(Error::precondition("divisors must be positive"));
        }
        let divisors = primitivize(divisors);
        let period = FactoredInt::lcm_of(&divisors)?;
        Ok(PeriodicSet { divisors, period })
    }

    pub fn empty() -> Self {
        PeriodicSet {
            divisors: Vec::new(),
            period: FactoredInt::one(),
        }
    }

    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn period(&self) -> &FactoredInt {
        &self.period
    }

    pub fn contains(&self, n: i128) -> bool {
        self.divisors.iter().any(|&a| n.rem_euclid(a as i128) == 0)
    }

    pub fn is_everything(&self) -> bool {
        self.divisors.first() == Some(&1)
    }

    /// `M_A ∪ M_{A'}`.
    pub fn union(&self, other: &PeriodicSet) -> Result<PeriodicSet> {
        let mut all = self.divisors.clone();
        all.extend_from_slice(&other.divisors);
        PeriodicSet::new(all)
    }

    /// Whether `M_A ⊆ M_{A'}`: every divisor of A is a multiple of one of A'.
    pub fn is_subset_of(&self, other: &PeriodicSet) -> bool {
        self.divisors
            .iter()
            .all(|&a| other.divisors.iter().any(|&b| a % b == 0))
    }

    /// Exact natural density `d(M_A)`.
    pub fn density(&self) -> Result<BigRational> {
        let classes: Vec<Class> = self.divisors.iter().map(|&a| Class::new(0, a)).collect();
        union_density(&classes)
    }
}

/// `d(M ∖ M')`, computed as `d(M ∪ M') − d(M')`.
pub fn difference_density(m: &PeriodicSet, m_prime: &PeriodicSet) -> Result<BigRational> {
    Ok(m.union(m_prime)?.density()? - m_prime.density()?)
}

/// A residue class `residue + modulus·ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Class {
    pub residue: u64,
    pub modulus: u64,
}

impl Class {
    pub fn new(residue: i128, modulus: u64) -> Self {
        Class {
            residue: arith::rem_i128(residue, modulus),
            modulus,
        }
    }

    pub fn contains(&self, n: i128) -> bool {
        arith::rem_i128(n, self.modulus) == self.residue
    }

    /// Whether `self ⊆ other`.
    fn inside(&self, other: &Class) -> bool {
        self.modulus % other.modulus == 0 && self.residue % other.modulus == other.residue
    }
}

/// Drops classes contained in others.
fn reduce(classes: &[Class]) -> Vec<Class> {
    let mut sorted: Vec<Class> = classes.to_vec();
    sorted.sort_by_key(|c| (c.modulus, c.residue));
    sorted.dedup();
    let mut out: Vec<Class> = Vec::with_capacity(sorted.len());
    for c in sorted {
        if !out.iter().any(|o| c.inside(o)) {
            out.push(c);
        }
    }
    out
}

/// Splits classes into groups whose moduli share no prime across groups;
/// by CRT the groups are independent events.
fn components(classes: &[Class]) -> Vec<Vec<Class>> {
    let n = classes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if classes[i].modulus.gcd(&classes[j].modulus) > 1 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<Class>> = HashMap::new();
    for (i, c) in classes.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(*c);
    }
    let mut out: Vec<Vec<Class>> = groups.into_values().collect();
    out.sort();
    out
}

/// Exact density of a finite union of residue classes.
///
/// The recursion adds one class at a time:
/// `d(U ∪ (r+aℤ)) = d(U) + (1/a)·(1 − d(U restricted to r+aℤ))`,
/// where the restriction is again a union of classes (in the parameter of
/// `r + a·t`). Contained classes are dropped at every level and coprime
/// groups are multiplied, so only non-absorbed inclusion–exclusion terms
/// are ever visited.
pub fn union_density(classes: &[Class]) -> Result<BigRational> {
    let mut engine = DensityEngine::default();
    let d = engine.density(classes);
    match d {
        Some(d) => Ok(d),
        None => sieve_density(classes),
    }
}

#[derive(Default)]
struct DensityEngine {
    memo: HashMap<Vec<Class>, BigRational>,
    visited: usize,
}

impl DensityEngine {
    fn density(&mut self, classes: &[Class]) -> Option<BigRational> {
        let reduced = reduce(classes);
        if reduced.is_empty() {
            return Some(BigRational::zero());
        }
        if reduced[0].modulus == 1 {
            return Some(BigRational::one());
        }
        if reduced.len() == 1 {
            return Some(ratio(1, reduced[0].modulus));
        }
        if let Some(d) = self.memo.get(&reduced) {
            return Some(d.clone());
        }
        self.visited += 1;
        if self.visited > RECURSION_BUDGET {
            return None;
        }
        let groups = components(&reduced);
        let d = if groups.len() > 1 {
            let mut miss = BigRational::one();
            for g in &groups {
                miss *= BigRational::one() - self.density(g)?;
            }
            BigRational::one() - miss
        } else {
            // peel the class with the largest modulus
            let (last, rest) = reduced.split_last().unwrap();
            let base = self.density(rest)?;
            let restricted = restrict(rest, last);
            let inner = self.density(&restricted)?;
            base + (BigRational::one() - inner) * ratio(1, last.modulus)
        };
        self.memo.insert(reduced, d.clone());
        Some(d)
    }
}

/// Pulls `classes` back along `t ↦ r + a·t` for the class `r + aℤ`.
fn restrict(classes: &[Class], along: &Class) -> Vec<Class> {
    let (r, a) = (along.residue as i128, along.modulus as i128);
    classes
        .iter()
        .filter_map(|c| {
            let (s, b) = (c.residue as i128, c.modulus as i128);
            let g = a.gcd(&b);
            if (s - r).rem_euclid(g) != 0 {
                return None;
            }
            let m = b / g;
            if m == 1 {
                return Some(Class::new(0, 1));
            }
            // a·t ≡ s − r (mod b)  ⇔  (a/g)·t ≡ (s − r)/g (mod b/g)
            let inv = mod_inverse((a / g).rem_euclid(m), m);
            let t0 = ((s - r) / g).rem_euclid(m) * inv % m;
            Some(Class::new(t0, m as u64))
        })
        .collect()
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    let e = a.extended_gcd(&m);
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m)
}

fn sieve_density(classes: &[Class]) -> Result<BigRational> {
    let period = classes
        .iter()
        .try_fold(1u64, |acc, c| {
            let l = acc.lcm(&c.modulus);
            (l <= SIEVE_LIMIT).then_some(l)
        })
        .ok_or_else(|| Error::TermExplosion {
            width: classes.len(),
            period: arith::lcm_big(classes.iter().map(|c| &c.modulus)).to_string(),
        })?;
    let mut hit = vec![false; period as usize];
    for c in classes {
        let mut x = c.residue;
        while x < period {
            hit[x as usize] = true;
            x += c.modulus;
        }
    }
    let count = hit.iter().filter(|&&h| h).count() as u64;
    Ok(ratio(count, period))
}

/// A finite 0/1 word on the integer interval `[offset, offset + len)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub offset: i128,
    pub bits: Vec<bool>,
}

impl Block {
    pub fn new(offset: i128, bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::precondition("a block has at least one bit"));
        }
        Ok(Block { offset, bits })
    }

    pub fn from_fn(lo: i128, hi: i128, f: impl FnMut(i128) -> bool) -> Result<Self> {
        if lo > hi {
            return Err(Error::precondition(format!("empty range {lo}..{hi}")));
        }
        Ok(Block {
            offset: lo,
            bits: (lo..=hi).map(f).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn end(&self) -> i128 {
        self.offset + self.bits.len() as i128 - 1
    }

    pub fn get(&self, i: i128) -> Option<bool> {
        let k = i.checked_sub(self.offset)?;
        usize::try_from(k).ok().and_then(|k| self.bits.get(k).copied())
    }

    /// `self ≤ other` pointwise on the same window.
    pub fn le(&self, other: &Block) -> bool {
        self.offset == other.offset
            && self.bits.len() == other.bits.len()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Bits as a `0`/`1` string without offset.
    pub fn word(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Run-length text form: `offset=<int> runs=<bit>x<len>,<bit>x<len>,…`.
    pub fn to_rle(&self) -> String {
        let mut runs: Vec<String> = Vec::new();
        let mut iter = self.bits.iter().peekable();
        while let Some(&b) = iter.next() {
            let mut len = 1;
            while iter.peek() == Some(&&b) {
                iter.next();
                len += 1;
            }
            runs.push(format!("{}x{}", u8::from(b), len));
        }
        format!("offset={} runs={}", self.offset, runs.join(","))
    }

    pub fn from_rle(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed run-length block: {text:?}"));
        let (off, runs) = text.trim().split_once(' ').ok_or_else(bad)?;
        let offset: i128 = off
            .strip_prefix("offset=")
            .and_then(|s| s.parse().ok())
            .ok_or_else(bad)?;
        let runs = runs.trim().strip_prefix("runs=").ok_or_else(bad)?;
        let mut bits = Vec::new();
        for run in runs.split(',') {
            let (bit, len) = run.split_once('x').ok_or_else(bad)?;
            let bit = match bit {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            let len: usize = len.parse().map_err(|_| bad())?;
            if len == 0 {
                return Err(bad());
            }
            bits.extend(std::iter::repeat_n(bit, len));
        }
        Block::new(offset, bits)
    }

    /// `index,bit` rows under a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,bit\n");
        for (k, &b) in self.bits.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.offset + k as i128, u8::from(b)));
        }
        out
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<&str> = self.bits.iter().map(|&b| if b { "1" } else { "0" }).collect();
        f.write_str(&words.join(" "))
    }
}

/// The window `η[lo..=hi]` of the indicator of `F_B`.
pub fn indicator_window(family: &BFamily, lo: i128, hi: i128) -> Result<Block> {
    if lo > hi {
        return Err(Error::precondition(format!("empty range {lo}..{hi}")));
    }
    if (hi - lo) as u128 >= WINDOW_SIEVE_LIMIT as u128 {
        return Err(Error::ceiling(format!("window {lo}..{hi}"), WINDOW_SIEVE_LIMIT));
    }
    let reach = lo.unsigned_abs().max(hi.unsigned_abs());
    if reach <= WINDOW_SIEVE_LIMIT as u128 && (hi - lo) as u128 <= WINDOW_SIEVE_LIMIT as u128 {
        if let Ok(elements) = family.enumerate_upto(reach.max(1) as u64) {
            let mut block = sieve_window(&elements, lo, hi);
            // members beyond the reach still divide 0
            if lo <= 0 && hi >= 0 && !family.is_empty() {
                block.bits[(-lo) as usize] = false;
            }
            return Ok(block);
        }
    }
    let mut bits = Vec::with_capacity((hi - lo + 1) as usize);
    for n in lo..=hi {
        bits.push(!family.divides_member(n)?);
    }
    Block::new(lo, bits)
}

fn sieve_window(elements: &[u64], lo: i128, hi: i128) -> Block {
    let mut bits = vec![true; (hi - lo + 1) as usize];
    for &b in elements {
        let b = b as i128;
        let mut x = lo + (-lo).rem_euclid(b);
        while x <= hi {
            bits[(x - lo) as usize] = false;
            x += b;
        }
    }
    Block { offset: lo, bits }
}

/// The window of the indicator of `F_A = ℤ ∖ M_A`.
pub fn periodic_window(set: &PeriodicSet, lo: i128, hi: i128) -> Result<Block> {
    Block::from_fn(lo, hi, |n| !set.contains(n))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
