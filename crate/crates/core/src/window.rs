//! Cylinder calculus on the odometer H: evaluation of the coding φ at
//! points and finite-support cylinders, the window W' and its boundary
//! measure along a filtration, Toeplitz certificates for `1_E`, and
//! bounds on the Mirsky measure of blocks.
//!
//! H itself is never built. A cylinder over a finite `S ⊂ B` is one residue
//! modulo `lcm(S)`, since the projection of H onto the `S` coordinates is
//! cyclic and generated by the diagonal.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Congruence, FactoredInt};
use crate::error::{Error, Result};
use crate::family::BFamily;
use crate::periodic::{self, Block, Class, PeriodicSet};
use crate::rational::{approx, RationalJson};
use crate::structure::{a_s, reciprocal_tail, Filtration, Structure};

/// Periods up to this size are handled by counting residues directly.
pub const DIRECT_COUNT_LIMIT: u64 = 2_000_000;

/// Largest number of zero positions expanded by inclusion–exclusion.
pub const MAX_ZERO_EXPANSION: usize = 12;

/// Translates checked on each side of a Toeplitz certificate.
pub const TRANSLATE_SAMPLE: i128 = 10;

/// `U_S(h)`: the points of H whose `S` coordinates agree with one residue
/// modulo `lcm(S)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    pub support: Vec<u64>,
    pub residue: Congruence,
}

impl Cylinder {
    pub fn new(family: &BFamily, support: Vec<u64>, residue: impl Into<BigInt>) -> Result<Self> {
        let mut support = support;
        support.sort_unstable();
        support.dedup();
        if support.is_empty() {
            return Err(Error::precondition("cylinder support must be nonempty"));
        }
        for &b in &support {
            if !family.contains(b)? {
                return Err(Error::precondition(format!("{b} is not in the family")));
            }
        }
        let l = FactoredInt::lcm_of(&support)?.value();
        Ok(Cylinder {
            residue: Congruence::new(residue, l)?,
            support,
        })
    }

    /// `U_S(Δ(n))`.
    pub fn of_point(family: &BFamily, support: Vec<u64>, n: i128) -> Result<Self> {
        Cylinder::new(family, support, n)
    }

    pub fn lcm(&self) -> &BigUint {
        &self.residue.modulus
    }

    /// `h_b`, when the cylinder determines it (`b | lcm(S)`).
    pub fn coordinate(&self, b: u64) -> Option<u64> {
        (self.lcm() % b).is_zero().then(|| self.residue.residue_mod(b))
    }

    /// `h_b mod gcd(b, lcm(S))`: the part of coordinate `b` the cylinder fixes.
    pub fn partial_coordinate(&self, b: u64) -> (u64, u64) {
        let g = (self.lcm() % b)
            .to_u64()
            .map(|r| arith::gcd_u64(b, r))
            .unwrap_or(b);
        let g = if g == 0 { b } else { g };
        (self.residue.residue_mod(g), g)
    }

    /// The least nonnegative integer `n` with `Δ(n) ∈ U_S(h)`.
    pub fn representative(&self) -> Option<i128> {
        self.residue.residue.to_i128()
    }

    /// Refines to `S ∪ extra` with a residue modulo the new lcm, which must
    /// agree with this one modulo `lcm(S)`.
    pub fn refine(&self, family: &BFamily, extra: &[u64], residue: impl Into<BigInt>) -> Result<Self> {
        let mut support = self.support.clone();
        support.extend_from_slice(extra);
        let refined = Cylinder::new(family, support, residue)?;
        if &refined.residue.residue % self.lcm() != self.residue.residue {
            return Err(Error::precondition(format!(
                "residue {} does not refine {}",
                refined.residue, self.residue
            )));
        }
        Ok(refined)
    }

    pub fn is_subcylinder_of(&self, other: &Cylinder) -> bool {
        (self.lcm() % other.lcm()).is_zero()
            && &self.residue.residue % other.lcm() == other.residue.residue
    }
}

/// Where a coding is evaluated: an orbit point `Δ(m)` or a cylinder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anchor {
    Point { n: i128 },
    Cylinder { cylinder: Cylinder },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Zero,
    One,
    Unknown,
}

impl Tri {
    fn symbol(self) -> char {
        match self {
            Tri::Zero => '0',
            Tri::One => '1',
            Tri::Unknown => '?',
        }
    }
}

impl From<bool> for Tri {
    fn from(b: bool) -> Self {
        if b {
            Tri::One
        } else {
            Tri::Zero
        }
    }
}

/// A word over `{0, 1, ?}` on `[offset, offset + len)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriBlock {
    pub offset: i128,
    pub values: Vec<Tri>,
}

impl TriBlock {
    pub fn get(&self, i: i128) -> Option<Tri> {
        let k = i - self.offset;
        (0..self.values.len() as i128)
            .contains(&k)
            .then(|| self.values[k as usize])
    }

    pub fn positions(&self) -> impl Iterator<Item = (i128, Tri)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| (self.offset + k as i128, v))
    }

    /// Whether `self` only resolves unknowns of `coarser` and never
    /// contradicts its resolved values.
    pub fn refines(&self, coarser: &TriBlock) -> bool {
        coarser.positions().all(|(i, v)| {
            v == Tri::Unknown || self.get(i).is_none_or(|w| w == v)
        })
    }

    /// Whether a 0/1 block is consistent with every resolved value.
    pub fn admits(&self, block: &Block) -> bool {
        self.positions().all(|(i, v)| match (v, block.get(i)) {
            (Tri::Unknown, _) | (_, None) => true,
            (Tri::Zero, Some(b)) => !b,
            (Tri::One, Some(b)) => b,
        })
    }

    pub fn word(&self) -> String {
        self.values.iter().map(|v| v.symbol()).collect()
    }
}

impl fmt::Display for TriBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.symbol().to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

fn radius_bounds(radius: u64) -> (i128, i128) {
    (-(radius as i128), radius as i128)
}

/// `φ(h)` on `[−N, N]`.
///
/// At a point `Δ(m)` the values are exact. On a cylinder `U_S(h)` with
/// residue `r` a position `i` is Zero when `r + i` is a multiple of some
/// `b ∈ B` dividing `lcm(S)` (that coordinate is fixed and hits 0), One when
/// `r + i ∈ F_{A_S}` (no coordinate can reach 0 anywhere on the cylinder),
/// and Unknown otherwise. `truncation` must be at least `max(S)`; members
/// up to it are all examined because the divisor scan is exhaustive.
pub fn phi_eval(family: &BFamily, anchor: &Anchor, radius: u64, truncation: u64) -> Result<TriBlock> {
    let (lo, hi) = radius_bounds(radius);
    match anchor {
        Anchor::Point { n } => {
            let block = periodic::indicator_window(family, n + lo, n + hi)?;
            Ok(TriBlock {
                offset: lo,
                values: block.bits.iter().map(|&b| Tri::from(b)).collect(),
            })
        }
        Anchor::Cylinder { cylinder } => {
            if cylinder.support.last().is_some_and(|&m| m > truncation) {
                return Err(Error::precondition(format!(
                    "truncation {truncation} is below max(S)"
                )));
            }
            let l = FactoredInt::lcm_of(&cylinder.support)?;
            let visible = family.divisors_in(&l)?;
            let a = a_s(family, &cylinder.support)?;
            let values = (lo..=hi)
                .map(|i| {
                    let hit = |d: u64| (cylinder.residue.residue_mod(d) as i128 + i).rem_euclid(d as i128) == 0;
                    if visible.iter().any(|&d| hit(d)) {
                        Tri::Zero
                    } else if !a.elements().iter().any(|&d| hit(d)) {
                        Tri::One
                    } else {
                        Tri::Unknown
                    }
                })
                .collect();
            Ok(TriBlock { offset: lo, values })
        }
    }
}

/// `φ_{W'}(Δ(m)) = σ^m 1_E` on `[−N, N]`.
pub fn phi_lower(structure: &Structure, m: i128, radius: u64) -> Result<Block> {
    let (lo, hi) = radius_bounds(radius);
    Block::from_fn(lo, hi, |i| structure.e_member(m + i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowRelation {
    /// `U_S(Δ(n)) ⊆ int(W')`.
    InsideIntW,
    /// `U_S(Δ(n))` meets `W'` without lying in its interior.
    MeetsWPrime,
    /// `U_S(Δ(n)) ∩ W' = ∅`.
    MissesWPrime,
}

pub fn cylinder_vs_window(structure: &Structure, n: i128, s: &[u64]) -> Result<WindowRelation> {
    let a = a_s(&structure.family, s)?;
    let restricted = structure.m_bstar_restricted(s)?;
    let inside = !a.multiples.contains(n);
    let meets = !restricted.contains(n);
    debug_assert!(!inside || meets);
    Ok(if inside {
        WindowRelation::InsideIntW
    } else if meets {
        WindowRelation::MeetsWPrime
    } else {
        WindowRelation::MissesWPrime
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTerm {
    pub support: Vec<u64>,
    pub lcm: BigUint,
    /// `d(M_{A_S} ∖ M_{B*|S})`.
    pub term: BigRational,
    /// `d(ℤ ∖ M_{B*|S})`, nonincreasing towards `m_H(W')`.
    pub w_prime: BigRational,
    /// `d(ℤ ∖ M_{A_S})`, nondecreasing towards `m_H(int W')`.
    pub interior: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    pub terms: Vec<BoundaryTerm>,
    pub min: BigRational,
    pub max: BigRational,
    pub terms_nonincreasing: bool,
    pub w_prime_nonincreasing: bool,
    pub interior_nondecreasing: bool,
    /// `term = w_prime − interior` for every entry.
    pub identity_holds: bool,
}

impl BoundaryReport {
    pub fn monotone(&self) -> bool {
        self.terms_nonincreasing && self.w_prime_nonincreasing && self.interior_nondecreasing
    }

    pub fn last(&self) -> &BoundaryTerm {
        self.terms.last().expect("filtrations are nonempty")
    }
}

fn nonincreasing(xs: &[&BigRational]) -> bool {
    xs.windows(2).all(|w| w[0] >= w[1])
}

pub fn boundary_measure_filtration(structure: &Structure, filtration: &Filtration) -> Result<BoundaryReport> {
    if filtration.is_empty() {
        return Err(Error::precondition("empty filtration"));
    }
    let mut terms = Vec::with_capacity(filtration.len());
    for s in filtration.sets() {
        let a = a_s(&structure.family, s)?;
        let restricted = structure.m_bstar_restricted(s)?;
        let d_a = a.multiples.density()?;
        let d_r = restricted.density()?;
        terms.push(BoundaryTerm {
            support: s.clone(),
            lcm: a.lcm.value(),
            term: periodic::difference_density(&a.multiples, &restricted)?,
            w_prime: BigRational::one() - d_r,
            interior: BigRational::one() - d_a,
        });
    }
    let t: Vec<&BigRational> = terms.iter().map(|x| &x.term).collect();
    let w: Vec<&BigRational> = terms.iter().map(|x| &x.w_prime).collect();
    let mut int: Vec<&BigRational> = terms.iter().map(|x| &x.interior).collect();
    let min = t.iter().min().map(|&x| x.clone()).unwrap();
    let max = t.iter().max().map(|&x| x.clone()).unwrap();
    let terms_nonincreasing = nonincreasing(&t);
    let w_prime_nonincreasing = nonincreasing(&w);
    int.reverse();
    let interior_nondecreasing = nonincreasing(&int);
    let identity_holds = terms.iter().all(|x| x.term == &x.w_prime - &x.interior);
    Ok(BoundaryReport {
        terms,
        min,
        max,
        terms_nonincreasing,
        w_prime_nonincreasing,
        interior_nondecreasing,
        identity_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTermJson {
    pub support: Vec<u64>,
    pub lcm: String,
    pub term: RationalJson,
    pub term_approx: f64,
    pub w_prime: RationalJson,
    pub w_prime_approx: f64,
    pub interior: RationalJson,
    pub interior_approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReportJson {
    pub terms: Vec<BoundaryTermJson>,
    pub min: RationalJson,
    pub max: RationalJson,
    pub terms_nonincreasing: bool,
    pub w_prime_nonincreasing: bool,
    pub interior_nondecreasing: bool,
    pub identity_holds: bool,
}

impl From<&BoundaryReport> for BoundaryReportJson {
    fn from(r: &BoundaryReport) -> Self {
        BoundaryReportJson {
            terms: r
                .terms
                .iter()
                .map(|t| BoundaryTermJson {
                    support: t.support.clone(),
                    lcm: t.lcm.to_string(),
                    term: (&t.term).into(),
                    term_approx: approx(&t.term),
                    w_prime: (&t.w_prime).into(),
                    w_prime_approx: approx(&t.w_prime),
                    interior: (&t.interior).into(),
                    interior_approx: approx(&t.interior),
                })
                .collect(),
            min: (&r.min).into(),
            max: (&r.max).into(),
            terms_nonincreasing: r.terms_nonincreasing,
            w_prime_nonincreasing: r.w_prime_nonincreasing,
            interior_nondecreasing: r.interior_nondecreasing,
            identity_holds: r.identity_holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regularity {
    /// The filtration term at `index` is at most the tolerance; `exact`
    /// when that term is 0, which certifies regularity outright.
    Regular {
        index: usize,
        term: BigRational,
        exact: bool,
    },
    /// No term reached the tolerance. Irregularity is never claimed.
    Undetermined { last: BigRational },
}

impl Regularity {
    pub fn label(&self) -> &'static str {
        match self {
            Regularity::Regular { .. } => "Regular",
            Regularity::Undetermined { .. } => "Undetermined",
        }
    }
}

pub fn regularity_verdict(report: &BoundaryReport, tolerance: &BigRational) -> Result<Regularity> {
    if tolerance < &BigRational::zero() {
        return Err(Error::precondition("tolerance must be nonnegative"));
    }
    Ok(match report.terms.iter().position(|t| &t.term <= tolerance) {
        Some(index) => {
            let term = report.terms[index].term.clone();
            Regularity::Regular {
                index,
                exact: term.is_zero(),
                term,
            }
        }
        None => Regularity::Undetermined {
            last: report.last().term.clone(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToeplitzKind {
    /// `i ∈ F_{A_S}` for the filtration set `S`; `F_{A_S} ⊆ E`.
    OnePeriod { support: Vec<u64> },
    /// `b* | i` for `b* ∈ B*`.
    ZeroPeriod { b_star: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzCertificate {
    pub position: i128,
    pub value: bool,
    pub period: u64,
    pub kind: ToeplitzKind,
    pub verified_translates: usize,
}

/// Finds a period along which `1_E` is constant through position `i`.
/// One-positions report the least divisor `d` of `lcm(S)` with
/// `i + dℤ ⊆ E`; zero-positions report the least `b* ∈ B*` dividing `i`.
pub fn toeplitz_certify(structure: &Structure, filtration: &Filtration, i: i128) -> Result<ToeplitzCertificate> {
    let value = structure.e_member(i);
    let exhausted = || Error::SearchExhausted {
        ceiling: format!("filtration of depth {}", filtration.len()),
    };
    let (period, kind) = if value {
        let j = structure
            .stabilization_witness(i, filtration)?
            .ok_or_else(exhausted)?;
        let support = filtration.sets()[j].clone();
        let l = FactoredInt::lcm_of(&support)?;
        let divisors = l.divisors().ok_or_else(exhausted)?;
        let stars = structure.b_star_elements();
        let period = divisors
            .into_iter()
            .find(|&d| {
                stars
                    .iter()
                    .all(|&b| i.rem_euclid(arith::gcd_u64(d, b) as i128) != 0)
            })
            .ok_or_else(exhausted)?;
        (period, ToeplitzKind::OnePeriod { support })
    } else {
        let b = structure.b_star_divisor(i).ok_or_else(exhausted)?;
        (b, ToeplitzKind::ZeroPeriod { b_star: b })
    };
    let mut verified = 0;
    for t in -TRANSLATE_SAMPLE..=TRANSLATE_SAMPLE {
        if t == 0 {
            continue;
        }
        if structure.e_member(i + t * period as i128) != value {
            return Err(Error::precondition(format!(
                "translate {t}·{period} of position {i} breaks the certificate"
            )));
        }
        verified += 1;
    }
    Ok(ToeplitzCertificate {
        position: i,
        value,
        period,
        kind,
        verified_translates: verified,
    })
}

/// Bounds on `ν_η[w] = m_H{h : φ(h) = w on the window of w}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MirskyBounds {
    pub lower: BigRational,
    pub upper: BigRational,
    /// Frequency of `k mod lcm(S)` whose `S`-visible zeros are exactly the
    /// zeros of `w`.
    pub cylinder_exact: BigRational,
    /// Frequency of `k mod lcm(S)` leaving the ones of `w` unhit by `S`.
    pub ones_free: BigRational,
    /// Upper bound on `Σ_{b ∈ B ∖ S} 1/b`, when finite.
    pub tail: Option<BigRational>,
}

/// Brackets the Mirsky measure of a block using the members `S`:
/// `lower = max(0, exact_S − #ones · tail)` and
/// `upper = min(ones_free_S, exact_S + #zeros · tail)`, where `tail` bounds
/// `Σ_{b ∈ B ∖ S} 1/b` (each such `b` hits a fixed position with Haar
/// probability `1/b`). A divergent tail leaves `lower = 0` and
/// `upper = ones_free_S`.
pub fn mirsky_block_bounds(family: &BFamily, w: &Block, s: &[u64]) -> Result<MirskyBounds> {
    let mut s = s.to_vec();
    s.sort_unstable();
    s.dedup();
    for &b in &s {
        if !family.contains(b)? {
            return Err(Error::precondition(format!("{b} is not in the family")));
        }
    }
    if w.is_empty() {
        let one = BigRational::one();
        return Ok(MirskyBounds {
            lower: one.clone(),
            upper: one.clone(),
            cylinder_exact: one.clone(),
            ones_free: one,
            tail: Some(BigRational::zero()),
        });
    }
    let ones: Vec<i128> = (w.offset..=w.end()).filter(|&i| w.get(i) == Some(true)).collect();
    let zeros: Vec<i128> = (w.offset..=w.end()).filter(|&i| w.get(i) == Some(false)).collect();
    let l = FactoredInt::lcm_of(&s)?;
    let (cylinder_exact, ones_free) = match l.to_u64().filter(|&l| l <= DIRECT_COUNT_LIMIT) {
        Some(period) => count_residues(&s, period, &ones, &zeros),
        None => expand_residues(&s, &ones, &zeros)?,
    };
    let cutoff = s
        .last()
        .copied()
        .unwrap_or(1)
        .max(1000)
        .saturating_mul(10_000)
        .min(100_000_000);
    let tail = reciprocal_tail(family, 0, cutoff, &s)?.total();
    let (lower, upper) = match &tail {
        Some(t) => {
            let lower = &cylinder_exact - t * BigInt::from(ones.len());
            let upper = &cylinder_exact + t * BigInt::from(zeros.len());
            (
                lower.max(BigRational::zero()),
                upper.min(ones_free.clone()),
            )
        }
        None => (BigRational::zero(), ones_free.clone()),
    };
    Ok(MirskyBounds {
        lower,
        upper,
        cylinder_exact,
        ones_free,
        tail,
    })
}

fn count_residues(s: &[u64], period: u64, ones: &[i128], zeros: &[i128]) -> (BigRational, BigRational) {
    let mut hit = vec![false; period as usize];
    for &b in s {
        for x in (0..period).step_by(b as usize) {
            hit[x as usize] = true;
        }
    }
    let at = |k: u64, i: i128| hit[(k as i128 + i).rem_euclid(period as i128) as usize];
    let (mut exact, mut free) = (0u64, 0u64);
    for k in 0..period {
        if ones.iter().all(|&i| !at(k, i)) {
            free += 1;
            if zeros.iter().all(|&i| at(k, i)) {
                exact += 1;
            }
        }
    }
    (periodic::ratio(exact, period), periodic::ratio(free, period))
}

/// Density of `k` with every position in `positions` unhit by `S`.
fn avoid_density(s: &[u64], positions: &[i128]) -> Result<BigRational> {
    let classes: Vec<Class> = positions
        .iter()
        .flat_map(|&i| s.iter().map(move |&b| Class::new(-i, b)))
        .collect();
    Ok(BigRational::one() - periodic::union_density(&classes)?)
}

fn expand_residues(s: &[u64], ones: &[i128], zeros: &[i128]) -> Result<(BigRational, BigRational)> {
    if zeros.len() > MAX_ZERO_EXPANSION {
        return Err(Error::TermExplosion {
            width: zeros.len(),
            period: FactoredInt::lcm_of(s)?.value().to_string(),
        });
    }
    let free = avoid_density(s, ones)?;
    let mut exact = BigRational::zero();
    for mask in 0u32..(1 << zeros.len()) {
        let mut positions = ones.to_vec();
        positions.extend(
            zeros
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, &i)| i),
        );
        let d = avoid_density(s, &positions)?;
        if mask.count_ones() % 2 == 0 {
            exact += d;
        } else {
            exact -= d;
        }
    }
    Ok((exact, free))
}

/// The periodic set whose indicator is `1_E` restricted to `B*`.
pub fn e_skeleton(structure: &Structure) -> Result<PeriodicSet> {
    PeriodicSet::new(structure.b_star_elements().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::ratio;

    fn f(elems: &[u64]) -> BFamily {
        BFamily::explicit("t", elems.to_vec()).unwrap()
    }

    fn point(n: i128) -> Anchor {
        Anchor::Point { n }
    }

    #[test]
    fn phi_eval_examples() {
        let two = f(&[2]);
        assert_eq!(phi_eval(&two, &point(0), 2, 2).unwrap().to_string(), "0 1 0 1 0");
        let sq = BFamily::squares_of_primes();
        assert_eq!(phi_eval(&sq, &point(49), 1, 49).unwrap().to_string(), "0 0 0");
        let twop = BFamily::twice_odd_primes();
        let cyl = Cylinder::new(&twop, vec![6], 1).unwrap();
        let t = phi_eval(&twop, &Anchor::Cylinder { cylinder: cyl.clone() }, 1, 6).unwrap();
        // residue 1 mod 6: position −1 is hit by 6; 1 is odd so never hit;
        // 2 is even, and whether some 2p hits it is not visible from S
        assert_eq!(t.word(), "01?");
        assert!(phi_eval(&twop, &Anchor::Cylinder { cylinder: cyl }, 1, 5).is_err());
    }

    #[test]
    fn refinement_never_flips() {
        let twop = BFamily::twice_odd_primes();
        let supports = [vec![6], vec![6, 10], vec![6, 10, 14], vec![6, 10, 14, 22]];
        for n in -60i128..60 {
            let mut prev: Option<TriBlock> = None;
            for s in &supports {
                let cyl = Cylinder::of_point(&twop, s.clone(), n).unwrap();
                let t = phi_eval(&twop, &Anchor::Cylinder { cylinder: cyl }, 4, 100).unwrap();
                if let Some(p) = &prev {
                    assert!(t.refines(p), "n={n} {p} -> {t}");
                }
                let exact = periodic::indicator_window(&twop, n - 4, n + 4).unwrap();
                assert!(t.admits(&Block::new(-4, exact.bits).unwrap()));
                prev = Some(t);
            }
        }
    }

    #[test]
    fn cylinder_refinement_checks_compatibility() {
        let twop = BFamily::twice_odd_primes();
        let c = Cylinder::new(&twop, vec![6], 1).unwrap();
        assert_eq!(c.coordinate(6), Some(1));
        assert_eq!(c.coordinate(10), None);
        assert_eq!(c.partial_coordinate(10), (1, 2));
        let r = c.refine(&twop, &[10], 7).unwrap();
        assert!(r.is_subcylinder_of(&c));
        assert!(c.refine(&twop, &[10], 8).is_err());
    }

    #[test]
    fn phi_lower_examples() {
        let twop = Structure::compute(&BFamily::twice_odd_primes()).unwrap();
        assert_eq!(phi_lower(&twop, 0, 2).unwrap().to_string(), "0 1 0 1 0");
        let sq = Structure::compute(&BFamily::squares_of_primes()).unwrap();
        assert_eq!(phi_lower(&sq, 0, 2).unwrap().to_string(), "0 0 0 0 0");
        let fam = f(&[6, 10, 15]);
        let fin = Structure::compute(&fam).unwrap();
        for m in -100..100 {
            let lower = phi_lower(&fin, m, 3).unwrap();
            let eval = periodic::indicator_window(&fam, m - 3, m + 3).unwrap();
            assert_eq!(lower.bits, eval.bits);
        }
    }

    #[test]
    fn semicontinuity_sandwich() {
        let mixed = BFamily::union("mixed", vec![BFamily::twice_odd_primes(), f(&[15, 35])]).unwrap();
        for fam in [BFamily::squares_of_primes(), BFamily::twice_odd_primes(), mixed, f(&[6, 10, 15])] {
            let st = Structure::compute(&fam).unwrap();
            let lower = phi_lower(&st, 0, 1000).unwrap();
            let upper = periodic::indicator_window(&fam, -1000, 1000).unwrap();
            assert!(lower.le(&Block::new(-1000, upper.bits).unwrap()), "{}", fam.label);
        }
    }

    #[test]
    fn window_relation_examples() {
        let twop = Structure::compute(&BFamily::twice_odd_primes()).unwrap();
        assert_eq!(cylinder_vs_window(&twop, 1, &[6, 10]).unwrap(), WindowRelation::InsideIntW);
        assert_eq!(cylinder_vs_window(&twop, 2, &[6, 10]).unwrap(), WindowRelation::MissesWPrime);
        let sq = Structure::compute(&BFamily::squares_of_primes()).unwrap();
        assert_eq!(cylinder_vs_window(&sq, 1, &[4, 9]).unwrap(), WindowRelation::MissesWPrime);
        let fin = Structure::compute(&f(&[6, 10, 15])).unwrap();
        for n in -40..40 {
            let r = cylinder_vs_window(&fin, n, &[6, 10, 15]).unwrap();
            assert_ne!(r, WindowRelation::MeetsWPrime);
        }
    }

    #[test]
    fn boundary_examples() {
        let fam = BFamily::twice_odd_primes();
        let st = Structure::compute(&fam).unwrap();
        let filt = Filtration::new(&fam, vec![vec![6], vec![6, 10]]).unwrap();
        let r = boundary_measure_filtration(&st, &filt).unwrap();
        // M_{A_S} = evens = M_{B*|S} already at S = {6}
        assert_eq!(r.terms[0].term, BigRational::zero());
        assert_eq!(r.last().term, BigRational::zero());
        assert!(r.monotone() && r.identity_holds);
        assert_eq!(r.terms[0].w_prime, ratio(1, 2));

        let fin = f(&[6, 10, 15]);
        let st = Structure::compute(&fin).unwrap();
        let r = boundary_measure_filtration(&st, &Filtration::standard(&fin).unwrap()).unwrap();
        assert_eq!(r.last().term, BigRational::zero());
        assert!(r.monotone());

        let sq = BFamily::squares_of_primes();
        let st = Structure::compute(&sq).unwrap();
        let r = boundary_measure_filtration(&st, &Filtration::standard(&sq).unwrap()).unwrap();
        assert!(r.terms.iter().all(|t| t.term.is_zero()));
        assert_eq!(regularity_verdict(&r, &BigRational::zero()).unwrap().label(), "Regular");
    }

    #[test]
    fn boundary_term_by_brute_force() {
        // one-period sieve of M_{A_S} ∖ M_{B*|S}
        let mixed = BFamily::union("mixed", vec![BFamily::twice_odd_primes(), f(&[15, 35])]).unwrap();
        let st = Structure::compute(&mixed).unwrap();
        let filt = Filtration::new(&mixed, vec![vec![6], vec![6, 15], vec![6, 10, 15, 35]]).unwrap();
        let r = boundary_measure_filtration(&st, &filt).unwrap();
        for (t, s) in r.terms.iter().zip(filt.sets()) {
            let l = t.lcm.to_u64().unwrap();
            let a = a_s(&mixed, s).unwrap();
            let restricted = st.m_bstar_restricted(s).unwrap();
            let count = (0..l as i128)
                .filter(|&n| a.multiples.contains(n) && !restricted.contains(n))
                .count() as u64;
            assert_eq!(t.term, ratio(count, l), "{s:?}");
        }
        assert!(r.monotone() && r.identity_holds);
    }

    #[test]
    fn regularity_never_claims_irregular() {
        let fin = f(&[6, 10, 15]);
        let st = Structure::compute(&fin).unwrap();
        let filt = Filtration::new(&fin, vec![vec![6]]).unwrap();
        let r = boundary_measure_filtration(&st, &filt).unwrap();
        // A_{{6}} = {2, 3, 6}, B*|{6} = {6}: term = d(M_{2,3}) − 1/6 = 1/2
        assert_eq!(r.terms[0].term, ratio(1, 2));
        assert_eq!(
            regularity_verdict(&r, &ratio(1, 10)).unwrap(),
            Regularity::Undetermined { last: ratio(1, 2) }
        );
        assert!(matches!(
            regularity_verdict(&r, &ratio(1, 2)).unwrap(),
            Regularity::Regular { exact: false, .. }
        ));
    }

    #[test]
    fn toeplitz_examples() {
        let fam = BFamily::twice_odd_primes();
        let st = Structure::compute(&fam).unwrap();
        let filt = Filtration::standard(&fam).unwrap();
        let c = toeplitz_certify(&st, &filt, 3).unwrap();
        assert!(c.value && c.period == 2 && c.verified_translates >= 20);
        assert!(matches!(c.kind, ToeplitzKind::OnePeriod { .. }));
        let c = toeplitz_certify(&st, &filt, 4).unwrap();
        assert_eq!((c.value, c.period), (false, 2));
        assert_eq!(c.kind, ToeplitzKind::ZeroPeriod { b_star: 2 });

        let sq = BFamily::squares_of_primes();
        let st = Structure::compute(&sq).unwrap();
        let c = toeplitz_certify(&st, &Filtration::standard(&sq).unwrap(), 10).unwrap();
        assert_eq!(c.kind, ToeplitzKind::ZeroPeriod { b_star: 1 });
        assert_eq!(c.period, 1);
    }

    #[test]
    fn toeplitz_periods_hold_on_long_ranges() {
        let mixed = BFamily::union("mixed", vec![BFamily::twice_odd_primes(), f(&[15, 35])]).unwrap();
        let st = Structure::compute(&mixed).unwrap();
        let filt = Filtration::standard(&mixed).unwrap();
        for i in -200i128..=200 {
            let c = toeplitz_certify(&st, &filt, i).unwrap();
            for t in -300i128..=300 {
                assert_eq!(st.e_member(i + t * c.period as i128), c.value, "i={i}");
            }
        }
    }

    #[test]
    fn mirsky_examples() {
        let two = f(&[2]);
        let w = Block::new(0, vec![true]).unwrap();
        let m = mirsky_block_bounds(&two, &w, &[2]).unwrap();
        assert_eq!((m.lower.clone(), m.upper.clone()), (ratio(1, 2), ratio(1, 2)));

        let sq = BFamily::squares_of_primes();
        let m = mirsky_block_bounds(&sq, &w, &[4, 9, 25, 49]).unwrap();
        assert_eq!(m.upper, ratio(3, 4) * ratio(8, 9) * ratio(24, 25) * ratio(48, 49));
        assert!(m.lower <= m.upper);

        let empty = Block { offset: 0, bits: vec![] };
        let m = mirsky_block_bounds(&sq, &empty, &[4]).unwrap();
        assert_eq!((m.lower, m.upper), (BigRational::one(), BigRational::one()));

        let twop = BFamily::twice_odd_primes();
        let m = mirsky_block_bounds(&twop, &w, &[6, 10]).unwrap();
        assert_eq!(m.lower, BigRational::zero());
        assert!(m.tail.is_none());
    }

    #[test]
    fn mirsky_finite_is_exact_frequency() {
        let fam = f(&[6, 10, 15]);
        let eta = periodic::indicator_window(&fam, 0, 30 + 5).unwrap();
        for mask in 0u32..32 {
            let bits: Vec<bool> = (0..5).map(|j| mask >> j & 1 == 1).collect();
            let w = Block::new(-2, bits.clone()).unwrap();
            let m = mirsky_block_bounds(&fam, &w, &[6, 10, 15]).unwrap();
            let freq = (0..30usize).filter(|&k| eta.bits[k..k + 5] == bits[..]).count() as u64;
            assert_eq!(m.lower, ratio(freq, 30));
            assert_eq!(m.upper, ratio(freq, 30));
        }
    }

    #[test]
    fn mirsky_expansion_matches_direct_count() {
        let fam = f(&[4, 9, 25]);
        let s = [4, 9, 25];
        for mask in 0u32..16 {
            let bits: Vec<bool> = (0..4).map(|j| mask >> j & 1 == 1).collect();
            let ones: Vec<i128> = (0..4).filter(|&j| bits[j as usize]).collect();
            let zeros: Vec<i128> = (0..4).filter(|&j| !bits[j as usize]).collect();
            let direct = count_residues(&s, 900, &ones, &zeros);
            let expanded = expand_residues(&s, &ones, &zeros).unwrap();
            assert_eq!(direct, expanded);
        }
        let _ = fam;
    }
}
