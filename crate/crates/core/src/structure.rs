//! The structural pipeline of a family: `A_S`, `A_∞`, `B₀`, `B*`, the set
//! `E = F_{B*}`, `M_{B*|S}`, and the finite-data diagnostics (proximality,
//! tautness at a truncation, tail bounds, Davenport–Erdős approximants).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::FactoredInt;
use crate::error::{Error, Result};
use crate::family::{BFamily, CoprimeCertificate, FamilyKind};
use crate::periodic::{self, PeriodicSet};
use crate::rational::RationalJson;

/// Thresholds of the standard filtration `S_j = B ∩ [1, t_j]`.
pub const STANDARD_THRESHOLDS: [u64; 5] = [10, 30, 100, 300, 1000];

/// A strictly increasing chain of finite subsets of B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filtration {
    chain: Vec<Vec<u64>>,
}

impl Filtration {
    pub fn new(family: &BFamily, chain: Vec<Vec<u64>>) -> Result<Self> {
        let mut normalized: Vec<Vec<u64>> = Vec::with_capacity(chain.len());
        for mut s in chain {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::precondition("filtration sets must be nonempty"));
            }
            for &b in &s {
                if !family.contains(b)? {
                    return Err(Error::precondition(format!("{b} is not in the family")));
                }
            }
            if let Some(prev) = normalized.last() {
                let prev_set: BTreeSet<&u64> = prev.iter().collect();
                let cur: BTreeSet<&u64> = s.iter().collect();
                if !(prev_set.is_subset(&cur) && prev_set.len() < cur.len()) {
                    return Err(Error::precondition(
                        "filtration must be strictly increasing",
                    ));
                }
            }
            normalized.push(s);
        }
        Ok(Filtration { chain: normalized })
    }

    /// `S_j = B ∩ [1, t]` for `t` in `thresholds`, dropping repeats and
    /// stopping once `lcm(S_j)` passes the sieve limit (the first nonempty
    /// set is always kept). A finite family whose elements are all reached
    /// ends at B itself.
    pub fn from_thresholds(family: &BFamily, thresholds: &[u64]) -> Result<Self> {
        let mut chain: Vec<Vec<u64>> = Vec::new();
        for &t in thresholds {
            let s = family.enumerate_upto(t)?;
            if s.is_empty() || chain.last().is_some_and(|p| p.len() == s.len()) {
                continue;
            }
            let over = FactoredInt::lcm_of(&s)?
                .to_u64()
                .is_none_or(|l| l > periodic::SIEVE_LIMIT);
            if over && !chain.is_empty() {
                break;
            }
            chain.push(s);
        }
        if chain.is_empty() {
            if let Some(b) = family.least_element() {
                chain.push(vec![b]);
            }
        }
        Filtration::new(family, chain)
    }

    pub fn standard(family: &BFamily) -> Result<Self> {
        Self::from_thresholds(family, &STANDARD_THRESHOLDS)
    }

    pub fn sets(&self) -> &[Vec<u64>] {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }
}

/// `A_S` for a finite `S ⊂ B`, primitivized, with `M_{A_S}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ASet {
    pub support: Vec<u64>,
    pub lcm: FactoredInt,
    pub multiples: PeriodicSet,
}

impl ASet {
    pub fn elements(&self) -> &[u64] {
        self.multiples.divisors()
    }
}

pub fn a_s(family: &BFamily, s: &[u64]) -> Result<ASet> {
    if s.is_empty() {
        return Err(Error::precondition("S must be nonempty"));
    }
    for &b in s {
        if !family.contains(b)? {
            return Err(Error::precondition(format!("{b} is not in the family")));
        }
    }
    let lcm = FactoredInt::lcm_of(s)?;
    let image = family.gcd_image(&lcm)?;
    Ok(ASet {
        support: s.to_vec(),
        multiples: PeriodicSet::new(image.into_iter().collect())?,
        lcm,
    })
}

/// An element of `A_∞` with the audited certificate that puts it there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedScale {
    pub value: u64,
    pub certificate: CoprimeCertificate,
}

/// `A_∞`, read off the declared coprime certificates.
pub fn a_infinity(family: &BFamily) -> Result<Vec<CertifiedScale>> {
    Ok(family
        .coprime_certificates()?
        .into_iter()
        .map(|c| CertifiedScale {
            value: c.scale,
            certificate: c,
        })
        .collect())
}

/// Everything the pipeline derives from a family.
#[derive(Debug, Clone)]
pub struct Structure {
    pub family: BFamily,
    pub a_inf: Vec<CertifiedScale>,
    pub prim_a_inf: Vec<u64>,
    /// `B₀ = B ∖ M_{A_∞}`; finite for every catalog family, since each rule
    /// branch contributes its own scale to `A_∞`.
    pub b_zero: Vec<u64>,
    pub b_star: BFamily,
    b_star_elements: Vec<u64>,
}

impl Structure {
    pub fn compute(family: &BFamily) -> Result<Self> {
        let a_inf = a_infinity(family)?;
        let values: Vec<u64> = a_inf.iter().map(|c| c.value).collect();
        let prim_a_inf = periodic::primitivize(values.clone());
        let b_zero = b_zero_of(family, &values)?;
        let mut star = b_zero.clone();
        star.extend_from_slice(&prim_a_inf);
        let b_star = BFamily::explicit(format!("{}*", family.label), star)
            .map_err(|e| Error::InvalidFamily(format!("B* is not primitive: {e}")))?;
        let b_star_elements = b_star.finite_elements().unwrap_or_default();
        Ok(Structure {
            family: family.clone(),
            a_inf,
            prim_a_inf,
            b_zero,
            b_star,
            b_star_elements,
        })
    }

    pub fn a_inf_values(&self) -> Vec<u64> {
        self.a_inf.iter().map(|c| c.value).collect()
    }

    pub fn b_star_elements(&self) -> &[u64] {
        &self.b_star_elements
    }

    /// `n ∈ E = F_{B*}`.
    pub fn e_member(&self, n: i128) -> bool {
        !self
            .b_star_elements
            .iter()
            .any(|&b| n.rem_euclid(b as i128) == 0)
    }

    /// The least `b* ∈ B*` dividing `n`, if any.
    pub fn b_star_divisor(&self, n: i128) -> Option<u64> {
        self.b_star_elements
            .iter()
            .copied()
            .find(|&b| n.rem_euclid(b as i128) == 0)
    }

    pub fn proximal(&self) -> bool {
        self.prim_a_inf.first() == Some(&1)
    }

    /// `M_{B*|S}`: multiples of the elements of `B*` dividing `lcm(S)`.
    pub fn m_bstar_restricted(&self, s: &[u64]) -> Result<PeriodicSet> {
        let l = FactoredInt::lcm_of(s)?;
        PeriodicSet::new(self.b_star.divisors_in(&l)?)
    }

    pub fn certificate_for(&self, scale: u64) -> Option<&CoprimeCertificate> {
        self.a_inf
            .iter()
            .find(|c| c.value == scale)
            .map(|c| &c.certificate)
    }

    /// For `a ∈ A_∞` and finite `S ⊂ B`, exhibits `S' ⊇ S` with
    /// `a ∈ A_{S'} ∖ S'`, following the certificate: add `a·c` with `c`
    /// coprime to `lcm(S)`, then `gcd(a·c', lcm(S')) = a` for any later
    /// certificate term `c'` coprime to `lcm(S')`.
    pub fn a_inf_spot_check(&self, a: u64, s: &[u64]) -> Result<AInfSpotCheck> {
        let cert = self
            .certificate_for(a)
            .ok_or(Error::CertificateMissing { scale: a })?;
        let l = FactoredInt::lcm_of(s)?;
        let c = cert.terms_coprime_to(1, &l.value())?[0];
        let added = a * c;
        let mut s_prime = s.to_vec();
        s_prime.push(added);
        s_prime.sort_unstable();
        s_prime.dedup();
        let l_prime = FactoredInt::lcm_of(&s_prime)?;
        let c2 = cert.terms_coprime_to(1, &l_prime.value())?[0];
        let witness = a * c2;
        let holds = self.family.contains(added)?
            && self.family.contains(witness)?
            && l_prime.gcd_with(witness) == a
            && !s_prime.contains(&a);
        Ok(AInfSpotCheck {
            scale: a,
            extended: s_prime,
            witness,
            holds,
        })
    }

    /// Index of the first filtration set `S` with `n ∈ F_{A_S}`, i.e. a
    /// finite certificate that `Δ(n)` lies in the interior of the window.
    pub fn stabilization_witness(&self, n: i128, filtration: &Filtration) -> Result<Option<usize>> {
        for (j, s) in filtration.sets().iter().enumerate() {
            if !a_s(&self.family, s)?.multiples.contains(n) {
                return Ok(Some(j));
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AInfSpotCheck {
    pub scale: u64,
    pub extended: Vec<u64>,
    pub witness: u64,
    pub holds: bool,
}

fn b_zero_of(family: &BFamily, a_inf: &[u64]) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    collect_b_zero(family, a_inf, &mut out)?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn collect_b_zero(family: &BFamily, a_inf: &[u64], out: &mut Vec<u64>) -> Result<()> {
    match &family.kind {
        FamilyKind::ExplicitFinite { elements } => out.extend(
            elements
                .iter()
                .copied()
                .filter(|&b| !a_inf.iter().any(|&a| b % a == 0)),
        ),
        FamilyKind::ScaledPrimes { scale, .. } => {
            if !a_inf.iter().any(|&a| scale % a == 0) {
                return Err(Error::InvalidFamily(format!(
                    "rule branch with scale {scale} has no certified scale dividing it"
                )));
            }
        }
        FamilyKind::FiniteUnion { branches } => {
            for b in branches {
                collect_b_zero(b, a_inf, out)?;
            }
        }
    }
    Ok(())
}

pub fn b_star(family: &BFamily) -> Result<BFamily> {
    Ok(Structure::compute(family)?.b_star)
}

pub fn e_member(family: &BFamily, n: i128) -> Result<bool> {
    Ok(Structure::compute(family)?.e_member(n))
}

pub fn m_bstar_restricted(family: &BFamily, s: &[u64]) -> Result<PeriodicSet> {
    Structure::compute(family)?.m_bstar_restricted(s)
}

pub fn proximal(family: &BFamily) -> Result<bool> {
    Ok(Structure::compute(family)?.proximal())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TautVerdict {
    pub truncation: u64,
    pub taut: bool,
    /// Elements whose removal does not lower the density of the truncation.
    pub violating: Vec<u64>,
    /// True when the truncation is all of B, so the verdict is unconditional.
    pub exact: bool,
}

/// Tautness of `B_K = B ∩ [1, K]`: `d(M_{B_K ∖ {b}}) < d(M_{B_K})` for each `b`.
pub fn taut_to_depth(family: &BFamily, k: u64) -> Result<TautVerdict> {
    let bk = family.enumerate_upto(k)?;
    let full = PeriodicSet::new(bk.clone())?.density()?;
    let mut violating = Vec::new();
    for (i, &b) in bk.iter().enumerate() {
        let mut rest = bk.clone();
        rest.remove(i);
        if PeriodicSet::new(rest)?.density()? >= full {
            violating.push(b);
        }
    }
    let exact = family
        .finite_elements()
        .is_some_and(|all| all.last().is_none_or(|&m| m <= k));
    Ok(TautVerdict {
        truncation: k,
        taut: violating.is_empty(),
        violating,
        exact,
    })
}

/// Denominator of the outward rounding used for long reciprocal sums.
const ROUNDING_BITS: u32 = 64;

/// An upper bound on `Σ_{b ∈ B, b > above, b ∉ exclude} 1/b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalTail {
    pub above: u64,
    pub cutoff: u64,
    /// `Σ 1/b` over the enumerated members in `(above, cutoff]`, each term
    /// rounded up to a multiple of `2^-64`.
    pub enumerated: BigRational,
    /// Analytic bound for members beyond `cutoff`; `None` when the tail
    /// series diverges (exponent 1).
    pub analytic: Option<BigRational>,
}

impl ReciprocalTail {
    pub fn total(&self) -> Option<BigRational> {
        self.analytic.as_ref().map(|a| a + &self.enumerated)
    }
}

pub fn reciprocal_tail(
    family: &BFamily,
    above: u64,
    cutoff: u64,
    exclude: &[u64],
) -> Result<ReciprocalTail> {
    let cutoff = cutoff.max(above);
    let analytic = analytic_tail(family, cutoff)?;
    let scale = BigInt::one() << ROUNDING_BITS;
    let mut acc = BigInt::zero();
    // a divergent tail makes the finite part irrelevant
    let members = match analytic {
        Some(_) => family.enumerate_upto(cutoff)?,
        None => Vec::new(),
    };
    for b in members {
        if b > above && exclude.binary_search(&b).is_err() {
            // ceil(2^64 / b)
            acc += (&scale + BigInt::from(b - 1)) / BigInt::from(b);
        }
    }
    Ok(ReciprocalTail {
        above,
        cutoff,
        enumerated: BigRational::new(acc, scale),
        analytic,
    })
}

/// Bound on `Σ_{b ∈ B, b > cutoff} 1/b` from `Σ_{m > X} m^{-e} ≤ 1/((e−1)X^{e−1})`.
fn analytic_tail(family: &BFamily, cutoff: u64) -> Result<Option<BigRational>> {
    Ok(match &family.kind {
        FamilyKind::ExplicitFinite { elements } => {
            let beyond: BigRational = elements
                .iter()
                .filter(|&&b| b > cutoff)
                .map(|&b| periodic::ratio(1, b))
                .sum();
            Some(beyond)
        }
        FamilyKind::ScaledPrimes { scale, exponent, .. } => {
            if *exponent < 2 {
                None
            } else {
                let x = crate::arith::iroot((cutoff / scale) as u128, *exponent).max(1);
                let den = BigInt::from(*scale)
                    * BigInt::from(exponent - 1)
                    * num_traits::pow(BigInt::from(x), (*exponent - 1) as usize);
                Some(BigRational::new(BigInt::one(), den))
            }
        }
        FamilyKind::FiniteUnion { branches } => {
            let mut sum = BigRational::zero();
            for b in branches {
                match analytic_tail(b, cutoff)? {
                    Some(t) => sum += t,
                    None => return Ok(None),
                }
            }
            Some(sum)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    /// The tail above K is empty.
    Empty,
    /// A finite upper bound on the upper density of the tail multiples.
    Bounded,
    /// The reciprocal series diverges; no conclusion.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LightTailsBound {
    pub k: u64,
    pub tail: ReciprocalTail,
    pub bound: Option<BigRational>,
    pub verdict: TailVerdict,
}

/// Upper bound on `d̄(M_{{b ∈ B : b > K}}) ≤ Σ_{b > K} 1/b`.
pub fn light_tails_bound(family: &BFamily, k: u64) -> Result<LightTailsBound> {
    let cutoff = k.saturating_mul(10_000).min(100_000_000).max(k);
    let tail = reciprocal_tail(family, k, cutoff, &[])?;
    let bound = tail.total();
    let verdict = match &bound {
        None => TailVerdict::Inconclusive,
        Some(b) if b.is_zero() => TailVerdict::Empty,
        Some(_) => TailVerdict::Bounded,
    };
    Ok(LightTailsBound {
        k,
        tail,
        bound,
        verdict,
    })
}

/// `d(M_{S_j})` along a filtration; nondecreasing, approaching `δ(M_B)` from below.
pub fn davenport_erdos_delta(filtration: &Filtration) -> Result<Vec<BigRational>> {
    filtration
        .sets()
        .iter()
        .map(|s| PeriodicSet::new(s.clone())?.density())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TautJson {
    pub truncation: u64,
    pub taut: bool,
    pub violating: Vec<u64>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightTailsJson {
    pub k: u64,
    pub cutoff: u64,
    pub bound: Option<RationalJson>,
    pub bound_approx: Option<f64>,
    pub verdict: TailVerdict,
}

impl From<&LightTailsBound> for LightTailsJson {
    fn from(l: &LightTailsBound) -> Self {
        LightTailsJson {
            k: l.k,
            cutoff: l.tail.cutoff,
            bound: l.bound.as_ref().map(RationalJson::from),
            bound_approx: l.bound.as_ref().map(crate::rational::approx),
            verdict: l.verdict.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::PrimeClass;
    use crate::periodic::ratio;

    fn f(elems: &[u64]) -> BFamily {
        BFamily::explicit("t", elems.to_vec()).unwrap()
    }

    fn mixed() -> BFamily {
        BFamily::union("mixed", vec![BFamily::twice_odd_primes(), f(&[15, 35])]).unwrap()
    }

    fn two_scales() -> BFamily {
        let threes = BFamily::scaled_primes(
            "3p",
            3,
            PrimeClass {
                residue: 0,
                modulus: 1,
                forbidden: 6,
            },
            1,
        )
        .unwrap();
        BFamily::union("2p ∪ 3p", vec![BFamily::twice_odd_primes(), threes]).unwrap()
    }

    #[test]
    fn a_s_examples() {
        let twop = BFamily::twice_odd_primes();
        assert_eq!(a_s(&twop, &[6, 10]).unwrap().elements(), &[2]);
        let sq = BFamily::squares_of_primes();
        let a = a_s(&sq, &[4, 9]).unwrap();
        assert_eq!(a.elements(), &[1]);
        assert!(a.multiples.is_everything());
        let fin = f(&[6, 10, 15]);
        assert_eq!(a_s(&fin, &[6, 10, 15]).unwrap().elements(), &[6, 10, 15]);
        assert!(a_s(&fin, &[7]).is_err());
        assert!(a_s(&fin, &[]).is_err());
    }

    #[test]
    fn pipeline_examples() {
        let sq = Structure::compute(&BFamily::squares_of_primes()).unwrap();
        assert_eq!(sq.a_inf_values(), vec![1]);
        assert_eq!(sq.b_star_elements(), &[1]);
        assert!(sq.b_zero.is_empty());
        assert!(sq.proximal());
        assert!((-50..50).all(|n| !sq.e_member(n)));

        let twop = Structure::compute(&BFamily::twice_odd_primes()).unwrap();
        assert_eq!(twop.a_inf_values(), vec![2]);
        assert_eq!(twop.b_star_elements(), &[2]);
        assert!(!twop.proximal());
        assert!(twop.e_member(7) && !twop.e_member(4));

        let fin = Structure::compute(&f(&[6, 10, 15])).unwrap();
        assert!(fin.a_inf.is_empty());
        assert_eq!(fin.b_star_elements(), &[6, 10, 15]);
        assert!(!fin.proximal());

        let m = Structure::compute(&mixed()).unwrap();
        assert_eq!(m.b_zero, vec![15, 35]);
        assert_eq!(m.b_star_elements(), &[2, 15, 35]);

        let t = Structure::compute(&two_scales()).unwrap();
        assert_eq!(t.a_inf_values(), vec![2, 3]);
        assert_eq!(t.b_star_elements(), &[2, 3]);
    }

    #[test]
    fn restricted_star_examples() {
        let twop = Structure::compute(&BFamily::twice_odd_primes()).unwrap();
        assert_eq!(twop.m_bstar_restricted(&[6, 10]).unwrap().divisors(), &[2]);
        let fin = Structure::compute(&f(&[6, 10, 15])).unwrap();
        assert_eq!(fin.m_bstar_restricted(&[6]).unwrap().divisors(), &[6]);
        let sq = Structure::compute(&BFamily::squares_of_primes()).unwrap();
        assert_eq!(sq.m_bstar_restricted(&[4, 9]).unwrap().divisors(), &[1]);
    }

    #[test]
    fn a_inf_spot_checks_hold() {
        for fam in [BFamily::squares_of_primes(), BFamily::twice_odd_primes(), mixed(), two_scales()] {
            let st = Structure::compute(&fam).unwrap();
            let filt = Filtration::standard(&fam).unwrap();
            for a in st.a_inf_values() {
                for s in filt.sets() {
                    let check = st.a_inf_spot_check(a, s).unwrap();
                    assert!(check.holds, "{} a={a} {:?}", fam.label, check);
                    assert!(check.extended.len() > s.len());
                }
            }
        }
    }

    #[test]
    fn standard_filtrations() {
        let sq = Filtration::standard(&BFamily::squares_of_primes()).unwrap();
        assert_eq!(sq.sets(), &[vec![4, 9], vec![4, 9, 25], vec![4, 9, 25, 49]]);
        let twop = Filtration::standard(&BFamily::twice_odd_primes()).unwrap();
        assert_eq!(twop.sets(), &[vec![6, 10], vec![6, 10, 14, 22, 26]]);
        let fin = Filtration::standard(&f(&[6, 10, 15])).unwrap();
        assert_eq!(fin.sets(), &[vec![6, 10], vec![6, 10, 15]]);
        let far = Filtration::standard(&f(&[5000, 7001])).unwrap();
        assert_eq!(far.sets(), &[vec![5000]]);
        assert!(Filtration::new(&fin.clone().sets().iter().fold(f(&[6, 10, 15]), |a, _| a), vec![vec![6, 10], vec![6, 10]]).is_err());
    }

    #[test]
    fn taut_examples() {
        let v = taut_to_depth(&f(&[6, 10, 15]), 15).unwrap();
        assert!(v.taut && v.exact);
        let without_15 = PeriodicSet::new(vec![6, 10]).unwrap().density().unwrap();
        assert_eq!(without_15, ratio(7, 30));
        assert!(taut_to_depth(&f(&[2]), 2).unwrap().taut);
        let t = taut_to_depth(&BFamily::twice_odd_primes(), 30).unwrap();
        assert!(t.taut && !t.exact);
    }

    #[test]
    fn light_tails_examples() {
        let sq = light_tails_bound(&BFamily::squares_of_primes(), 100).unwrap();
        let b = crate::rational::approx(sq.bound.as_ref().unwrap());
        // Σ_{p ≥ 11} p^-2 ≈ 0.03067
        assert!(b > 0.0306 && b < 0.032, "{b}");
        assert_eq!(sq.verdict, TailVerdict::Bounded);
        let fin = light_tails_bound(&f(&[6, 10, 15]), 15).unwrap();
        assert_eq!(fin.bound, Some(BigRational::zero()));
        assert_eq!(fin.verdict, TailVerdict::Empty);
        let twop = light_tails_bound(&BFamily::twice_odd_primes(), 100).unwrap();
        assert_eq!(twop.verdict, TailVerdict::Inconclusive);
        assert!(twop.bound.is_none());
    }

    #[test]
    fn davenport_erdos_examples() {
        let sq = BFamily::squares_of_primes();
        let filt = Filtration::new(&sq, vec![vec![4], vec![4, 9], vec![4, 9, 25]]).unwrap();
        let d = davenport_erdos_delta(&filt).unwrap();
        assert_eq!(d[0], ratio(1, 4));
        assert_eq!(d[1], ratio(1, 3));
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        let fin = f(&[6, 10, 15]);
        let d = davenport_erdos_delta(&Filtration::standard(&fin).unwrap()).unwrap();
        assert_eq!(d.last().unwrap(), &ratio(4, 15));
        let single = Filtration::new(&fin, vec![vec![10]]).unwrap();
        assert_eq!(davenport_erdos_delta(&single).unwrap(), vec![ratio(1, 10)]);
    }

    #[test]
    fn e_matches_free_of_b_and_a_inf() {
        for fam in [BFamily::squares_of_primes(), BFamily::twice_odd_primes(), mixed(), two_scales(), f(&[6, 10, 15])] {
            let st = Structure::compute(&fam).unwrap();
            let a_inf = st.a_inf_values();
            for n in -2000i128..=2000 {
                let rhs = !fam.divides_member(n).unwrap()
                    && !a_inf.iter().any(|&a| n % a as i128 == 0);
                assert_eq!(st.e_member(n), rhs, "{} n={n}", fam.label);
            }
        }
    }

    #[test]
    fn stabilization_witnesses_exist() {
        for fam in [BFamily::twice_odd_primes(), mixed(), two_scales(), f(&[6, 10, 15])] {
            let st = Structure::compute(&fam).unwrap();
            let filt = Filtration::standard(&fam).unwrap();
            for n in -1000i128..=1000 {
                if st.e_member(n) {
                    assert!(st.stabilization_witness(n, &filt).unwrap().is_some(), "{} n={n}", fam.label);
                }
            }
        }
    }

    #[test]
    fn restricted_inclusions() {
        // M_{B*|S} ⊆ M_{B*} ⊆ M_{A_{S'}}
        for fam in [BFamily::twice_odd_primes(), mixed(), two_scales(), BFamily::squares_of_primes()] {
            let st = Structure::compute(&fam).unwrap();
            let star = PeriodicSet::new(st.b_star_elements().to_vec()).unwrap();
            let filt = Filtration::standard(&fam).unwrap();
            for s in filt.sets() {
                let restricted = st.m_bstar_restricted(s).unwrap();
                assert!(restricted.is_subset_of(&star));
                for s2 in filt.sets() {
                    let a = a_s(&fam, s2).unwrap();
                    assert!(star.is_subset_of(&a.multiples), "{} {:?}", fam.label, s2);
                }
                for n in -10_000i128..=10_000 {
                    if restricted.contains(n) {
                        assert!(star.contains(n));
                    }
                }
            }
        }
    }

    #[test]
    fn b_star_has_no_coprime_families() {
        for fam in [BFamily::squares_of_primes(), BFamily::twice_odd_primes(), mixed(), two_scales()] {
            let st = Structure::compute(&fam).unwrap();
            for scale in 1..=20 {
                assert!(st
                    .b_star
                    .discover_coprime_family(scale, 10, 10_000)
                    .unwrap()
                    .is_none());
            }
        }
    }
}
