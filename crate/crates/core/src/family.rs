//! The input set B: explicit finite lists, scaled prime powers `n·p^e`
//! over a class of primes, and finite unions of those.
//!
//! Every query here is exact. Rule families answer structurally (through
//! factorizations), explicit lists by iteration.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{self, FactoredInt};
use crate::error::{Error, Result};

/// Largest prime a rule family will sieve up to when enumerating.
pub const ENUMERATION_CEILING: u64 = 200_000_000;

/// Cross-branch primitivity of unions is checked for elements up to this bound.
pub const PRIMITIVITY_DEPTH: u64 = 20_000;

pub const DEFAULT_AUDIT_DEPTH: usize = 25;

/// Primes `p` with `p ≡ residue (mod modulus)` and `gcd(p, forbidden) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeClass {
    #[serde(default)]
    pub residue: u64,
    #[serde(default = "one")]
    pub modulus: u64,
    #[serde(default = "one")]
    pub forbidden: u64,
}

fn one() -> u64 {
    1
}

impl PrimeClass {
    pub fn all() -> Self {
        PrimeClass {
            residue: 0,
            modulus: 1,
            forbidden: 1,
        }
    }

    pub fn odd() -> Self {
        PrimeClass {
            residue: 1,
            modulus: 2,
            forbidden: 1,
        }
    }

    /// Whether a prime `p` belongs to the class. `p` is assumed prime.
    pub fn allows(&self, p: u64) -> bool {
        p % self.modulus == self.residue % self.modulus && self.forbidden % p != 0
    }

    /// The least allowed prime strictly above `lower` and coprime to `avoid`.
    pub fn next_after(&self, lower: u64, avoid: &BigUint) -> Result<u64> {
        let avoid = avoid * self.forbidden;
        arith::next_prime_in_ap(self.residue as i128, self.modulus, lower as i128, &avoid)
    }

    fn validate(&self) -> Result<()> {
        if self.modulus == 0 || self.forbidden == 0 {
            return Err(Error::InvalidFamily(
                "prime class modulus and forbidden modulus must be positive".into(),
            ));
        }
        if self.residue.gcd(&self.modulus) != 1 && self.modulus != 1 {
            return Err(Error::InvalidFamily(format!(
                "residue {} mod {} holds at most one prime",
                self.residue, self.modulus
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    ExplicitFinite {
        elements: Vec<u64>,
    },
    /// `{scale · p^exponent : p prime in class}`.
    ScaledPrimes {
        scale: u64,
        #[serde(flatten)]
        primes: PrimeClass,
        exponent: u32,
    },
    FiniteUnion {
        branches: Vec<BFamily>,
    },
}

/// A primitive set B ⊆ ℕ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BFamily {
    #[serde(default)]
    pub label: String,
    #[serde(flatten)]
    pub kind: FamilyKind,
}

/// How far primitivity of a family has been established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Primitivity {
    Exact,
    ToDepth { depth: u64 },
}

/// A rule producing pairwise coprime `c_1 < c_2 < …` with `scale·c_j ∈ B`:
/// here `c_j = p_j^exponent` over the primes of a class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoprimeCertificate {
    pub scale: u64,
    pub primes: PrimeClass,
    pub exponent: u32,
    pub audit_depth: usize,
}

impl CoprimeCertificate {
    /// The first `count` generator terms `c_j`.
    pub fn terms(&self, count: usize) -> Result<Vec<u64>> {
        self.terms_coprime_to(count, &BigUint::from(1u8))
    }

    /// Generator terms whose prime is coprime to `avoid`, least first.
    pub fn terms_coprime_to(&self, count: usize, avoid: &BigUint) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(count);
        let mut p = 1;
        while out.len() < count {
            p = self.primes.next_after(p, avoid)?;
            out.push(checked_pow(p, self.exponent)?);
        }
        Ok(out)
    }

    fn audit(&self, family: &BFamily) -> Result<()> {
        let fail = |index, reason: String| Error::CertificateAuditFailure {
            scale: self.scale,
            index,
            reason,
        };
        let terms = self.terms(self.audit_depth)?;
        for (j, &c) in terms.iter().enumerate() {
            if c <= 1 {
                return Err(fail(j, format!("term {c} is not > 1")));
            }
            if let Some(i) = terms[..j].iter().position(|&d| d.gcd(&c) != 1) {
                return Err(fail(j, format!("term {c} shares a factor with term #{i}")));
            }
            let member = self
                .scale
                .checked_mul(c)
                .ok_or_else(|| fail(j, "scale·term overflows".into()))?;
            if !family.contains(member)? {
                return Err(fail(j, format!("{member} is not in the family")));
            }
        }
        Ok(())
    }
}

fn checked_pow(p: u64, e: u32) -> Result<u64> {
    p.checked_pow(e)
        .ok_or_else(|| Error::ceiling(format!("{p}^{e}"), u64::MAX))
}

impl BFamily {
    pub fn explicit(label: impl Into<String>, elements: Vec<u64>) -> Result<Self> {
        BFamily {
            label: label.into(),
            kind: FamilyKind::ExplicitFinite { elements },
        }
        .validated()
    }

    pub fn scaled_primes(
        label: impl Into<String>,
        scale: u64,
        primes: PrimeClass,
        exponent: u32,
    ) -> Result<Self> {
        BFamily {
            label: label.into(),
            kind: FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            },
        }
        .validated()
    }

    pub fn union(label: impl Into<String>, branches: Vec<BFamily>) -> Result<Self> {
        BFamily {
            label: label.into(),
            kind: FamilyKind::FiniteUnion { branches },
        }
        .validated()
    }

    /// Squares of all primes; `F_B` is the set of squarefree integers.
    pub fn squares_of_primes() -> Self {
        Self::scaled_primes("squares of primes", 1, PrimeClass::all(), 2).unwrap()
    }

    /// `{2p : p odd prime}`.
    pub fn twice_odd_primes() -> Self {
        Self::scaled_primes("2·odd primes", 2, PrimeClass::odd(), 1).unwrap()
    }

    /// Normalizes explicit lists (sorted, deduplicated) and checks primitivity.
    pub fn validated(mut self) -> Result<Self> {
        self.normalize_and_check()?;
        Ok(self)
    }

    fn normalize_and_check(&mut self) -> Result<()> {
        match &mut self.kind {
            FamilyKind::ExplicitFinite { elements } => {
                elements.sort_unstable();
                elements.dedup();
                if elements.first() == Some(&0) {
                    return Err(Error::InvalidFamily("0 is not a positive integer".into()));
                }
                if let Some((a, b)) = divisibility_pair(elements) {
                    return Err(Error::InvalidFamily(format!(
                        "not primitive: {a} divides {b}"
                    )));
                }
            }
            FamilyKind::ScaledPrimes {
                scale, exponent, primes, ..
            } => {
                if *scale == 0 || *exponent == 0 {
                    return Err(Error::InvalidFamily(
                        "scale and exponent must be positive".into(),
                    ));
                }
                primes.validate()?;
            }
            FamilyKind::FiniteUnion { branches } => {
                if branches.is_empty() {
                    return Err(Error::InvalidFamily("union needs at least one branch".into()));
                }
                for b in branches.iter_mut() {
                    b.normalize_and_check()?;
                }
            }
        }
        if let FamilyKind::FiniteUnion { .. } = self.kind {
            let elements = match self.finite_elements() {
                Some(all) => all,
                None => self.enumerate_upto(PRIMITIVITY_DEPTH)?,
            };
            for &x in &elements {
                for d in proper_divisors(x)? {
                    if self.contains(d)? {
                        return Err(Error::InvalidFamily(format!(
                            "not primitive: {d} divides {x}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn primitivity(&self) -> Primitivity {
        match &self.kind {
            FamilyKind::FiniteUnion { branches } if branches.len() > 1 && !self.is_finite() => {
                Primitivity::ToDepth {
                    depth: PRIMITIVITY_DEPTH,
                }
            }
            _ => Primitivity::Exact,
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.kind {
            FamilyKind::ExplicitFinite { .. } => true,
            FamilyKind::ScaledPrimes { .. } => false,
            FamilyKind::FiniteUnion { branches } => branches.iter().all(BFamily::is_finite),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.kind {
            FamilyKind::ExplicitFinite { elements } => elements.is_empty(),
            FamilyKind::ScaledPrimes { .. } => false,
            FamilyKind::FiniteUnion { branches } => branches.iter().all(BFamily::is_empty),
        }
    }

    /// All elements of a finite family, sorted.
    pub fn finite_elements(&self) -> Option<Vec<u64>> {
        if !self.is_finite() {
            return None;
        }
        let mut out = Vec::new();
        self.collect_finite(&mut out);
        out.sort_unstable();
        out.dedup();
        Some(out)
    }

    fn collect_finite(&self, out: &mut Vec<u64>) {
        match &self.kind {
            FamilyKind::ExplicitFinite { elements } => out.extend(elements),
            FamilyKind::ScaledPrimes { .. } => unreachable!("rule families are infinite"),
            FamilyKind::FiniteUnion { branches } => {
                branches.iter().for_each(|b| b.collect_finite(out))
            }
        }
    }

    /// Exact membership `x ∈ B`.
    pub fn contains(&self, x: u64) -> Result<bool> {
        Ok(match &self.kind {
            FamilyKind::ExplicitFinite { elements } => elements.binary_search(&x).is_ok(),
            FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            } => {
                if x == 0 || x % scale != 0 {
                    return Ok(false);
                }
                let q = (x / scale) as u128;
                let r = arith::iroot(q, *exponent);
                r.pow(*exponent) == q && arith::is_prime(r)? && primes.allows(r as u64)
            }
            FamilyKind::FiniteUnion { branches } => {
                for b in branches {
                    if b.contains(x)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// Whether some element of B divides `n`, i.e. `n ∈ M_B`.
    pub fn divides_member(&self, n: i128) -> Result<bool> {
        Ok(self.least_member_divisor(n)?.is_some())
    }

    /// The least `b ∈ B` dividing `n`.
    pub fn least_member_divisor(&self, n: i128) -> Result<Option<u64>> {
        if n == 0 {
            return Ok(self.least_element());
        }
        let abs = n.unsigned_abs();
        Ok(match &self.kind {
            FamilyKind::ExplicitFinite { elements } => elements
                .iter()
                .copied()
                .find(|&b| abs % b as u128 == 0),
            FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            } => {
                if abs % *scale as u128 != 0 {
                    return Ok(None);
                }
                let f = arith::factor(abs / *scale as u128)?;
                f.factors
                    .iter()
                    .find(|&&(p, e)| e >= *exponent && p <= u64::MAX as u128 && primes.allows(p as u64))
                    .and_then(|&(p, _)| (p as u64).checked_pow(*exponent))
                    .and_then(|c| c.checked_mul(*scale))
            }
            FamilyKind::FiniteUnion { branches } => {
                let mut best: Option<u64> = None;
                for b in branches {
                    if let Some(d) = b.least_member_divisor(n)? {
                        best = Some(best.map_or(d, |x| x.min(d)));
                    }
                }
                best
            }
        })
    }

    pub fn least_element(&self) -> Option<u64> {
        match &self.kind {
            FamilyKind::ExplicitFinite { elements } => elements.first().copied(),
            FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            } => {
                let p = primes.next_after(1, &BigUint::from(1u8)).ok()?;
                p.checked_pow(*exponent)?.checked_mul(*scale)
            }
            FamilyKind::FiniteUnion { branches } => {
                branches.iter().filter_map(BFamily::least_element).min()
            }
        }
    }

    /// Elements of B in `[1, bound]`, sorted.
    pub fn enumerate_upto(&self, bound: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        self.enumerate_into(bound, &mut out)?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn enumerate_into(&self, bound: u64, out: &mut Vec<u64>) -> Result<()> {
        match &self.kind {
            FamilyKind::ExplicitFinite { elements } => {
                out.extend(elements.iter().copied().take_while(|&b| b <= bound))
            }
            FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            } => {
                let top = arith::iroot((bound / scale) as u128, *exponent) as u64;
                if top > ENUMERATION_CEILING {
                    return Err(Error::EnumerationCeiling {
                        what: format!("primes up to {top}"),
                        ceiling: ENUMERATION_CEILING.to_string(),
                    });
                }
                for p in arith::primes_upto(top) {
                    if primes.allows(p) {
                        out.push(scale * p.pow(*exponent));
                    }
                }
            }
            FamilyKind::FiniteUnion { branches } => {
                for b in branches {
                    b.enumerate_into(bound, out)?;
                }
            }
        }
        Ok(())
    }

    /// `B^{(n)}`: the elements all of whose prime factors are at most `n`.
    pub fn spectrum_bounded(&self, n: u64) -> Result<Vec<u64>> {
        let primes: BTreeSet<u64> = arith::primes_upto(n).into_iter().collect();
        self.with_spectrum_in(&primes)
    }

    /// Elements whose prime factors all lie in `primes` (a finite set, so
    /// the answer is finite by primitivity).
    pub fn with_spectrum_in(&self, primes: &BTreeSet<u64>) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        self.spectrum_into(primes, &mut out)?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn spectrum_into(&self, allowed: &BTreeSet<u64>, out: &mut Vec<u64>) -> Result<()> {
        match &self.kind {
            FamilyKind::ExplicitFinite { elements } => {
                for &b in elements {
                    if arith::factor(b as u128)?
                        .primes()
                        .all(|p| allowed.contains(&(p as u64)))
                    {
                        out.push(b);
                    }
                }
            }
            FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            } => {
                let scale_ok = arith::factor(*scale as u128)?
                    .primes()
                    .all(|p| allowed.contains(&(p as u64)));
                if scale_ok {
                    for &p in allowed {
                        if primes.allows(p) {
                            let b = checked_pow(p, *exponent)?
                                .checked_mul(*scale)
                                .ok_or_else(|| Error::ceiling(format!("{scale}·{p}^{exponent}"), u64::MAX))?;
                            out.push(b);
                        }
                    }
                }
            }
            FamilyKind::FiniteUnion { branches } => {
                for b in branches {
                    b.spectrum_into(allowed, out)?;
                }
            }
        }
        Ok(())
    }

    /// `{gcd(b, L) : b ∈ B}`.
    pub fn gcd_image(&self, l: &FactoredInt) -> Result<BTreeSet<u64>> {
        let mut out = BTreeSet::new();
        self.gcd_image_into(l, &mut out)?;
        Ok(out)
    }

    fn gcd_image_into(&self, l: &FactoredInt, out: &mut BTreeSet<u64>) -> Result<()> {
        match &self.kind {
            FamilyKind::ExplicitFinite { elements } => {
                out.extend(elements.iter().map(|&b| l.gcd_with(b)));
            }
            FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            } => {
                // p ∤ L: gcd(n·p^e, L) = gcd(n, L), attained by infinitely many p
                out.insert(l.gcd_with(*scale));
                for q in l.primes().filter(|&q| primes.allows(q)) {
                    let b = checked_pow(q, *exponent)?.checked_mul(*scale);
                    let g = match b {
                        Some(b) => l.gcd_with(b),
                        // q^e·n beyond u64: the q-part of the gcd is capped by L anyway
                        None => l.gcd_with(*scale) * q.pow(l.valuation(q).min(*exponent)),
                    };
                    out.insert(g);
                }
            }
            FamilyKind::FiniteUnion { branches } => {
                for b in branches {
                    b.gcd_image_into(l, out)?;
                }
            }
        }
        Ok(())
    }

    /// `{b ∈ B : b | L}`.
    pub fn divisors_in(&self, l: &FactoredInt) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        self.divisors_into(l, &mut out)?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn divisors_into(&self, l: &FactoredInt, out: &mut Vec<u64>) -> Result<()> {
        match &self.kind {
            FamilyKind::ExplicitFinite { elements } => {
                out.extend(elements.iter().copied().filter(|&b| l.is_multiple_of(b)))
            }
            FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            } => {
                for q in l.primes().filter(|&q| primes.allows(q)) {
                    if let Some(b) = q.checked_pow(*exponent).and_then(|c| c.checked_mul(*scale)) {
                        if l.is_multiple_of(b) {
                            out.push(b);
                        }
                    }
                }
            }
            FamilyKind::FiniteUnion { branches } => {
                for b in branches {
                    b.divisors_into(l, out)?;
                }
            }
        }
        Ok(())
    }

    /// The declared coprime certificates, each audited to
    /// [`DEFAULT_AUDIT_DEPTH`] terms.
    pub fn coprime_certificates(&self) -> Result<Vec<CoprimeCertificate>> {
        self.coprime_certificates_to_depth(DEFAULT_AUDIT_DEPTH)
    }

    pub fn coprime_certificates_to_depth(&self, depth: usize) -> Result<Vec<CoprimeCertificate>> {
        let mut declared = Vec::new();
        self.declare_certificates(depth, &mut declared);
        let mut merged: Vec<CoprimeCertificate> = Vec::new();
        for c in declared {
            if !merged.iter().any(|m| m.scale == c.scale) {
                merged.push(c);
            }
        }
        merged.sort_by_key(|c| c.scale);
        for c in &merged {
            c.audit(self)?;
        }
        Ok(merged)
    }

    fn declare_certificates(&self, depth: usize, out: &mut Vec<CoprimeCertificate>) {
        match &self.kind {
            FamilyKind::ExplicitFinite { .. } => {}
            FamilyKind::ScaledPrimes {
                scale,
                primes,
                exponent,
            } => out.push(CoprimeCertificate {
                scale: *scale,
                primes: primes.clone(),
                exponent: *exponent,
                audit_depth: depth,
            }),
            FamilyKind::FiniteUnion { branches } => {
                branches.iter().for_each(|b| b.declare_certificates(depth, out))
            }
        }
    }

    /// Diagnostic only: greedily looks for `depth` pairwise coprime
    /// quotients `c > 1` with `scale·c ∈ B`, among elements up to `bound`.
    pub fn discover_coprime_family(
        &self,
        scale: u64,
        depth: usize,
        bound: u64,
    ) -> Result<Option<Vec<u64>>> {
        let mut chosen: Vec<u64> = Vec::new();
        for b in self.enumerate_upto(bound)? {
            if b % scale != 0 {
                continue;
            }
            let c = b / scale;
            if c > 1 && chosen.iter().all(|&d| d.gcd(&c) == 1) {
                chosen.push(c);
                if chosen.len() == depth {
                    return Ok(Some(chosen));
                }
            }
        }
        Ok(None)
    }
}

fn divisibility_pair(sorted: &[u64]) -> Option<(u64, u64)> {
    for (j, &b) in sorted.iter().enumerate() {
        if let Some(&a) = sorted[..j].iter().find(|&&a| b % a == 0) {
            return Some((a, b));
        }
    }
    None
}

fn proper_divisors(x: u64) -> Result<Vec<u64>> {
    let f = arith::factor(x as u128)?;
    let mut divs = vec![1u64];
    for &(p, e) in &f.factors {
        let p = p as u64;
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.retain(|&d| d != x);
    Ok(divs)
}
