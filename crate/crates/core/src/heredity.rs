//! Realizing blocks below `φ(h)`: avoidance sets `H_b^N`, the CRT steps
//! that keep a cylinder while clearing or forcing positions, the witness
//! constructor, block languages of `X_η` and `X_φ`, and the hereditary
//! audit.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::{self, crt_solve, Congruence, FactoredInt};
use crate::error::{Error, Result};
use crate::family::BFamily;
use crate::periodic::{self, Block};
use crate::structure::{a_s, Structure};
use crate::window::{Anchor, Cylinder};

/// Members of the search class tried before falling back to a cylinder.
pub const WITNESS_SCAN_LIMIT: u64 = 1_000_000;

/// Members of the tail family given explicit residues by `clear_tail`.
pub const DEFAULT_TAIL_AUDIT: u64 = 10_000;

/// Longest block handled by the language and audit routines.
pub const MAX_BLOCK_LEN: u64 = 25;

/// `h_b + i ≢ 0 (mod b)` for all `|i| ≤ radius`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidanceConstraint {
    pub divisor: u64,
    pub radius: u64,
}

impl AvoidanceConstraint {
    pub fn satisfiable(&self) -> bool {
        self.divisor > 2 * self.radius + 1
    }

    pub fn holds(&self, residue: u64) -> bool {
        let r = residue % self.divisor;
        r > self.radius && r < self.divisor - self.radius
    }
}

/// Residues `r mod b` with `r + i ≢ 0` for `|i| ≤ radius`: the interval
/// `[radius + 1, b − radius − 1]`.
pub fn avoidance_residues(b: u64, radius: u64) -> Vec<u64> {
    if b <= 2 * radius + 1 {
        return Vec::new();
    }
    (radius + 1..b - radius).collect()
}

fn nonzero_window(x: &BigUint, p: u64, radius: u64) -> bool {
    AvoidanceConstraint { divisor: p, radius }.holds((x % p).to_u64().unwrap())
}

/// One inductive step for `U_A(Δ(k)) ∩ H_S^N ≠ ∅`: for a prime
/// `p > 2N + 1` coprime to `lcm(A)`, keeps the anchor, keeps the residues
/// already chosen for `S₀ = {b ∈ S : p ∤ b}`, and puts `m ≡ N + 1 (mod p)`,
/// which clears every `b ∈ S` divisible by `p` on `[−N, N]`.
pub fn extend_avoidance(
    anchor: &Congruence,
    targets: &[u64],
    s0: &[Congruence],
    radius: u64,
    p: u64,
) -> Result<Congruence> {
    if !arith::is_prime(p as u128)? {
        return Err(Error::precondition(format!("{p} is not prime")));
    }
    if p <= 2 * radius + 1 {
        return Err(Error::precondition(format!("{p} ≤ 2N + 1 = {}", 2 * radius + 1)));
    }
    if (&anchor.modulus % p) == BigUint::from(0u8) {
        return Err(Error::precondition(format!("{p} divides the anchor modulus")));
    }
    if !targets.iter().any(|&b| b % p == 0) {
        return Err(Error::precondition(format!("no target is divisible by {p}")));
    }
    for c in s0 {
        if (&c.modulus % p) == BigUint::from(0u8) {
            return Err(Error::precondition(format!(
                "S₀ residue {c} has a modulus divisible by {p}"
            )));
        }
    }
    let mut system = vec![anchor.clone()];
    system.extend_from_slice(s0);
    system.push(Congruence::from_small(radius as i128 + 1, p)?);
    let m = crt_solve(&system)?;
    debug_assert!(targets
        .iter()
        .filter(|&&b| b % p == 0)
        .all(|_| nonzero_window(&m.residue, p, radius)));
    Ok(m)
}

/// An explicit residue for one audited member of the tail family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditedAvoidance {
    pub divisor: u64,
    /// A prime factor `p > n` of the divisor, coprime to `lcm(A)`.
    pub prime: u64,
    pub residue: u64,
}

/// The constraints `h_b + i ≢ 0` for `b ∈ C(A, n)`, the members of B with a
/// prime factor `p > n` coprime to `lcm(A)`. Every member up to `audited_to`
/// gets a residue compatible with the anchor; the whole family is jointly
/// satisfiable on the cylinder by compactness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailClearance {
    pub n: u64,
    pub radius: u64,
    pub audited_to: u64,
    pub audited: Vec<AuditedAvoidance>,
}

impl TailClearance {
    pub fn constraints(&self) -> Vec<AvoidanceConstraint> {
        self.audited
            .iter()
            .map(|a| AvoidanceConstraint {
                divisor: a.divisor,
                radius: self.radius,
            })
            .collect()
    }
}

pub fn clear_tail(
    family: &BFamily,
    a: &[u64],
    anchor: &Congruence,
    n: u64,
    radius: u64,
    audited_to: u64,
) -> Result<TailClearance> {
    if n < 2 * radius + 1 {
        return Err(Error::precondition(format!("n = {n} < 2N + 1")));
    }
    let a_set: BTreeSet<u64> = a.iter().copied().collect();
    if let Some(b) = family.spectrum_bounded(n)?.into_iter().find(|b| !a_set.contains(b)) {
        return Err(Error::precondition(format!("{b} ∈ B^({n}) is missing from A")));
    }
    let l = FactoredInt::lcm_of(a)?;
    if !(&anchor.modulus % l.value()).to_u64().is_some_and(|r| r == 0) {
        return Err(Error::precondition("anchor modulus is not a multiple of lcm(A)"));
    }
    let mut audited = Vec::new();
    for b in family.enumerate_upto(audited_to)? {
        let fac = arith::factor(b as u128)?;
        let Some(p) = fac
            .primes()
            .map(|p| p as u64)
            .filter(|&p| p > n && !l.is_multiple_of(p))
            .max()
        else {
            continue;
        };
        let g = l.gcd_with(b);
        let base = anchor.residue_mod(g);
        let constraint = AvoidanceConstraint { divisor: b, radius };
        // g is invertible mod p, so 2N + 2 steps reach a class clear of [−N, N]
        let residue = (0..=2 * radius + 1)
            .map(|t| (base + t * g) % b)
            .find(|&r| constraint.holds(r))
            .ok_or_else(|| Error::precondition(format!("no avoiding residue for {b}")))?;
        audited.push(AuditedAvoidance {
            divisor: b,
            prime: p,
            residue,
        });
    }
    Ok(TailClearance {
        n,
        radius,
        audited_to,
        audited,
    })
}

/// One forced zero: `b = b* · d` divides `m + position`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipRecord {
    pub position: i128,
    /// The element of `prim A_∞` dividing `n + position`.
    pub b_star: u64,
    /// Certificate term, coprime to everything chosen before it.
    pub d: u64,
    pub b: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub what: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessKind {
    Integer { m: i128 },
    Cylinder {
        cylinder: Cylinder,
        exceptions: Vec<AvoidanceConstraint>,
        verified_to: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    /// The block to realize, on `[−N, N]`.
    pub target: Block,
    /// `n mod lcm(S)`, preserved by the witness.
    pub anchor: Congruence,
    pub support: Vec<u64>,
    /// The least odd `n ≥ 2N + 1` with `S ⊆ B^{(n)}`.
    pub n: u64,
    /// Positions already 0 at the anchor with the least member hitting them.
    pub zero_positions: Vec<(i128, u64)>,
    pub flips: Vec<FlipRecord>,
    /// The class produced by the construction.
    pub construction: Congruence,
    pub tail: TailClearance,
    pub scanned: u64,
    pub search_exhausted: bool,
    pub transcript: Vec<Check>,
}

impl Witness {
    pub fn integer(&self) -> Option<i128> {
        match self.kind {
            WitnessKind::Integer { m } => Some(m),
            WitnessKind::Cylinder { .. } => None,
        }
    }

    pub fn transcript_holds(&self) -> bool {
        self.transcript.iter().all(|c| c.holds)
    }
}

/// Independent check of an integer witness: `η` on `m + [−N, N]` equals the
/// target and `m` lies in the anchor class.
pub fn verify_integer_witness(family: &BFamily, w: &Witness) -> Result<bool> {
    let Some(m) = w.integer() else {
        return Ok(false);
    };
    for i in w.target.offset..=w.target.end() {
        if family.divides_member(m + i)? == w.target.get(i).unwrap() {
            return Ok(false);
        }
    }
    Ok(w.anchor.contains(m))
}

fn resolve_anchor(anchor: &Anchor, s: &[u64]) -> Result<(i128, Vec<u64>)> {
    let mut support = s.to_vec();
    let n = match anchor {
        Anchor::Point { n } => *n,
        Anchor::Cylinder { cylinder } => {
            support.extend_from_slice(&cylinder.support);
            cylinder
                .representative()
                .ok_or_else(|| Error::ceiling(&cylinder.residue.residue, i128::MAX))?
        }
    };
    support.sort_unstable();
    support.dedup();
    Ok((n, support))
}

fn least_odd_cover(s: &[u64], radius: u64) -> Result<u64> {
    let mut n = 2 * radius + 1;
    for &b in s {
        if let Some(p) = arith::factor(b as u128)?.largest_prime() {
            n = n.max(p as u64);
        }
    }
    Ok(if n % 2 == 0 { n + 1 } else { n })
}

fn big_product(values: impl IntoIterator<Item = u64>) -> BigUint {
    values
        .into_iter()
        .fold(BigUint::one(), |acc, v| acc * BigUint::from(v))
}

/// Realizes `φ(h)` on `[−N, N]` with the positions in `flips` turned to 0,
/// inside `U_S(h)`.
///
/// A cylinder anchor is replaced by its least nonnegative representative
/// `Δ(r)`, with its support added to `S`. Each flip position `i` needs
/// `φ(h)_i = 1` and `1_E(n + i) = 0`; then `n + i` is a multiple of some
/// `b* ∈ prim A_∞`, and the certificate of `b*` supplies `d` with
/// `b* · d ∈ B` prime to every earlier choice. The class
/// `x ≡ 0 (mod β₁)`, `x ≡ −(n + i) (mod b* · d)` keeps the anchor and the
/// zeros already present while hitting exactly the flip positions; the
/// search then looks for an integer in the coarse class
/// (anchor, forced zeros) with exactly the target pattern.
pub fn construct_witness(
    structure: &Structure,
    anchor: &Anchor,
    radius: u64,
    flips: &[i128],
    s: &[u64],
) -> Result<Witness> {
    construct_witness_with(structure, anchor, radius, flips, s, WITNESS_SCAN_LIMIT, DEFAULT_TAIL_AUDIT)
}

pub fn construct_witness_with(
    structure: &Structure,
    anchor: &Anchor,
    radius: u64,
    flips: &[i128],
    s: &[u64],
    scan_limit: u64,
    tail_audit: u64,
) -> Result<Witness> {
    let family = &structure.family;
    let (n0, support) = resolve_anchor(anchor, s)?;
    for &b in &support {
        if !family.contains(b)? {
            return Err(Error::precondition(format!("{b} is not in the family")));
        }
    }
    let r = radius as i128;
    let mut flips: Vec<i128> = flips.to_vec();
    flips.sort_unstable();
    flips.dedup();
    let position = |i: i128| i64::try_from(i).unwrap_or(i64::MAX);
    for &i in &flips {
        if i.abs() > r {
            return Err(Error::FlipNotAllowed {
                position: position(i),
                reason: format!("outside [−{radius}, {radius}]"),
            });
        }
        if family.divides_member(n0 + i)? {
            return Err(Error::FlipNotAllowed {
                position: position(i),
                reason: "φ(h) is already 0 there".into(),
            });
        }
        if structure.e_member(n0 + i) {
            return Err(Error::FlipNotAllowed {
                position: position(i),
                reason: "φ_{W'}(h) is 1 there".into(),
            });
        }
    }
    let mut transcript = Vec::new();
    let lcm_s = FactoredInt::lcm_of(&support)?.value();
    let anchor_class = Congruence::new(n0, lcm_s.clone())?;

    // Step 1: B₁ = B^{(n)} together with the least member hitting each zero.
    let n = least_odd_cover(&support, radius)?;
    let mut b1: BTreeSet<u64> = family.spectrum_bounded(n)?.into_iter().collect();
    let mut zero_positions = Vec::new();
    for i in -r..=r {
        if let Some(b) = family.least_member_divisor(n0 + i)? {
            zero_positions.push((i, b));
            b1.insert(b);
        }
    }
    let b1: Vec<u64> = b1.into_iter().collect();
    let beta1 = FactoredInt::lcm_of(&b1)?.value();
    transcript.push(Check {
        what: format!("S ⊆ B^({n}) with n = {n} ≥ 2N + 1 = {}", 2 * radius + 1),
        holds: support.iter().all(|b| b1.contains(b)),
    });

    // Step 2: choose b_i = b*_i · d_i for each flip.
    let stars: Vec<u64> = flips
        .iter()
        .map(|&i| {
            structure
                .prim_a_inf
                .iter()
                .copied()
                .find(|&a| (n0 + i).rem_euclid(a as i128) == 0)
                .ok_or_else(|| Error::FlipNotAllowed {
                    position: position(i),
                    reason: "no element of prim A_∞ divides it".into(),
                })
        })
        .collect::<Result<_>>()?;
    let mut avoid = &beta1 * big_product(stars.iter().copied());
    let mut records: Vec<FlipRecord> = Vec::with_capacity(flips.len());
    for (&i, &star) in flips.iter().zip(&stars) {
        let cert = structure
            .certificate_for(star)
            .ok_or(Error::CertificateMissing { scale: star })?;
        let p = cert.primes.next_after(n, &avoid)?;
        let d = p
            .checked_pow(cert.exponent)
            .ok_or_else(|| Error::ceiling(format!("{p}^{}", cert.exponent), u64::MAX))?;
        let b = star
            .checked_mul(d)
            .ok_or_else(|| Error::ceiling(format!("{star}·{d}"), u64::MAX))?;
        transcript.push(Check {
            what: format!("b = {star}·{d} = {b} ∈ B for position {i}"),
            holds: family.contains(b)?,
        });
        avoid *= BigUint::from(p);
        records.push(FlipRecord {
            position: i,
            b_star: star,
            d,
            b,
        });
    }
    for (k, f) in records.iter().enumerate() {
        let g = beta1.gcd(&BigUint::from(f.b));
        transcript.push(Check {
            what: format!("gcd(b_{}, β₁) = {g} divides n + {}", f.position, f.position),
            holds: (BigInt::from(n0 + f.position) % BigInt::from(g.clone())) == BigInt::from(0),
        });
        for e in &records[k + 1..] {
            let g = arith::gcd_u64(f.b, e.b);
            transcript.push(Check {
                what: format!("gcd(b_{}, b_{}) = {g} divides {} − {}", f.position, e.position, e.position, f.position),
                holds: (e.position - f.position).rem_euclid(g as i128) == 0,
            });
        }
    }
    let mut system = vec![Congruence::new(0, beta1.clone())?];
    for f in &records {
        system.push(Congruence::from_small(-(n0 + f.position), f.b)?);
    }
    let x = crt_solve(&system)?;
    let x0 = x.centered();
    let construction = Congruence::new(BigInt::from(n0) + &x0, x.modulus.clone())?;
    let start = (BigInt::from(n0) + x0)
        .to_i128()
        .ok_or_else(|| Error::ceiling(&construction.residue, i128::MAX))?;
    for f in &records {
        let unique = (-r..=r).all(|k| ((start + k).rem_euclid(f.b as i128) == 0) == (k == f.position));
        transcript.push(Check {
            what: format!("b_{} = {} hits only position {} on the window", f.position, f.b, f.position),
            holds: unique,
        });
    }
    for &(i, b) in &zero_positions {
        transcript.push(Check {
            what: format!("position {i} stays a multiple of {b}"),
            holds: (start + i).rem_euclid(b as i128) == 0,
        });
    }
    transcript.push(Check {
        what: format!("construction {construction} lies in the anchor class {anchor_class}"),
        holds: anchor_class.contains(start),
    });

    // Step 3: the tail of B that could still hit the window.
    let mut a: Vec<u64> = b1.clone();
    a.extend(records.iter().map(|f| f.b));
    a.sort_unstable();
    a.dedup();
    let tail = clear_tail(family, &a, &construction, n, radius, tail_audit)?;

    let target = Block::from_fn(-r, r, |i| {
        !flips.contains(&i) && !zero_positions.iter().any(|&(j, _)| j == i)
    })?;

    // The coarse search class: anchor, flips, and the zeros already present.
    let mut coarse = vec![anchor_class.clone()];
    coarse.extend(records.iter().map(|f| Congruence::from_small(-f.position, f.b).unwrap()));
    coarse.extend(zero_positions.iter().map(|&(i, b)| Congruence::from_small(-i, b).unwrap()));
    let coarse = crt_solve(&coarse)?;
    let step = coarse
        .modulus
        .to_i128()
        .ok_or_else(|| Error::ceiling(&coarse.modulus, i128::MAX))?;
    let matches = |m: i128| -> Result<bool> {
        for i in -r..=r {
            if family.divides_member(m + i)? == target.get(i).unwrap() {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut found = None;
    let mut scanned = 0u64;
    let mut t: i128 = 0;
    while scanned < scan_limit {
        // 0, 1, −1, 2, −2, ...
        let offset = if t > 0 { t } else { -t };
        let sign_t = if scanned % 2 == 1 { offset } else { -offset };
        let candidate = step
            .checked_mul(sign_t)
            .and_then(|d| start.checked_add(d));
        scanned += 1;
        if scanned % 2 == 1 {
            t += 1;
        }
        let Some(m) = candidate else { break };
        if m.unsigned_abs() > arith::FACTOR_CEILING / 2 {
            break;
        }
        if matches(m)? {
            found = Some(m);
            break;
        }
    }
    let (kind, search_exhausted) = match found {
        Some(m) => {
            transcript.push(Check {
                what: format!("η on {m} + [−{radius}, {radius}] equals the target"),
                holds: true,
            });
            (WitnessKind::Integer { m }, false)
        }
        None => {
            let cylinder = Cylinder::new(family, a.clone(), BigInt::from(start))?;
            (
                WitnessKind::Cylinder {
                    cylinder,
                    exceptions: tail.constraints(),
                    verified_to: tail_audit,
                },
                true,
            )
        }
    };
    Ok(Witness {
        kind,
        target,
        anchor: anchor_class,
        support,
        n,
        zero_positions,
        flips: records,
        construction,
        tail,
        scanned,
        search_exhausted,
        transcript,
    })
}

/// Witnesses for the windows `[−N, N]`, `N = 1..=max_radius`, of a target
/// `x` with `φ_{W'}(Δ(n)) ≤ x ≤ φ(Δ(n))`, each protecting `B^{(2N+1)}`.
pub fn approximate_point(structure: &Structure, n: i128, x: &Block, max_radius: u64) -> Result<Vec<Witness>> {
    let r = max_radius as i128;
    if x.offset > -r || x.end() < r {
        return Err(Error::precondition(format!("target must cover [−{r}, {r}]")));
    }
    let family = &structure.family;
    let mut out = Vec::with_capacity(max_radius as usize);
    for radius in 1..=max_radius {
        let rr = radius as i128;
        let mut flips = Vec::new();
        for i in -rr..=rr {
            let xi = x.get(i).unwrap();
            let upper = !family.divides_member(n + i)?;
            let lower = structure.e_member(n + i);
            if (lower && !xi) || (xi && !upper) {
                return Err(Error::precondition(format!(
                    "target leaves [φ_W'(h), φ(h)] at position {i}"
                )));
            }
            if upper && !xi {
                flips.push(i);
            }
        }
        let s = family.spectrum_bounded(2 * radius + 1)?;
        out.push(construct_witness(structure, &Anchor::Point { n }, radius, &flips, &s)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LanguageMode {
    /// Factors of `η` on `[−range, range]`.
    EtaEmpirical { range: u64 },
    /// Blocks allowed on some cylinder `U_S(Δ(k))`.
    PhiCylinder { support: Vec<u64> },
}

fn mask_word(mask: u32, len: u32) -> String {
    (0..len).map(|j| if mask >> j & 1 == 1 { '1' } else { '0' }).collect()
}

fn word_mask(word: &str) -> u32 {
    word.bytes()
        .enumerate()
        .fold(0, |acc, (j, c)| if c == b'1' { acc | 1 << j } else { acc })
}

fn check_length(radius: u64) -> Result<u32> {
    let len = 2 * radius + 1;
    if len > MAX_BLOCK_LEN {
        return Err(Error::precondition(format!("block length {len} exceeds {MAX_BLOCK_LEN}")));
    }
    Ok(len as u32)
}

/// Factors of `η` of length `2N + 1` centred in `[−range, range]`, keyed by
/// bit mask (bit `j` is position `j − N`), with the first centre seen.
pub fn eta_factors(family: &BFamily, radius: u64, range: u64) -> Result<BTreeMap<u32, i128>> {
    let len = check_length(radius)?;
    let lo = -(range as i128);
    let eta = periodic::indicator_window(family, lo, range as i128)?;
    let mut out = BTreeMap::new();
    if eta.len() < len as usize {
        return Ok(out);
    }
    let full = if len == 32 { u32::MAX } else { (1u32 << len) - 1 };
    let mut mask = 0u32;
    for (k, &bit) in eta.bits.iter().enumerate() {
        mask = (mask >> 1) | ((bit as u32) << (len - 1));
        if k + 1 >= len as usize {
            let centre = lo + k as i128 - radius as i128;
            out.entry(mask & full).or_insert(centre);
        }
    }
    Ok(out)
}

/// Blocks of length `2N + 1` compatible with some residue `k mod lcm(S)`:
/// `k + i` a multiple of a member dividing `lcm(S)` forces 0, `k + i` in
/// `F_{A_S}` forces 1, everything else is free.
pub fn phi_cylinder_language(family: &BFamily, radius: u64, support: &[u64]) -> Result<BTreeSet<u32>> {
    let len = check_length(radius)?;
    let l = FactoredInt::lcm_of(support)?;
    let period = l
        .to_u64()
        .filter(|&p| p <= periodic::SIEVE_LIMIT)
        .ok_or_else(|| Error::TermExplosion {
            width: support.len(),
            period: l.value().to_string(),
        })?;
    let sieve = |divisors: &[u64]| {
        let mut hit = vec![false; period as usize];
        for &d in divisors {
            for x in (0..period).step_by(d as usize) {
                hit[x as usize] = true;
            }
        }
        hit
    };
    let zero = sieve(&family.divisors_in(&l)?);
    let a = a_s(family, support)?;
    let in_a = sieve(a.elements());
    let mut patterns: HashSet<(u32, u32)> = HashSet::new();
    for k in 0..period as i128 {
        let (mut zeros, mut ones) = (0u32, 0u32);
        for j in 0..len {
            let idx = (k + j as i128 - radius as i128).rem_euclid(period as i128) as usize;
            if zero[idx] {
                zeros |= 1 << j;
            } else if !in_a[idx] {
                ones |= 1 << j;
            }
        }
        patterns.insert((zeros, ones));
    }
    let mut out = BTreeSet::new();
    for (zeros, ones) in patterns {
        let free = !(zeros | ones) & ((1u32 << len) - 1);
        // enumerate subsets of the free positions
        let mut sub = free;
        loop {
            out.insert(ones | sub);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    Ok(out)
}

/// Words of length `2N + 1` (positions `−N..=N`, left to right).
pub fn block_language(family: &BFamily, radius: u64, mode: &LanguageMode) -> Result<BTreeSet<String>> {
    let len = check_length(radius)?;
    let masks: Vec<u32> = match mode {
        LanguageMode::EtaEmpirical { range } => eta_factors(family, radius, *range)?.into_keys().collect(),
        LanguageMode::PhiCylinder { support } => {
            phi_cylinder_language(family, radius, support)?.into_iter().collect()
        }
    };
    Ok(masks.into_iter().map(|m| mask_word(m, len)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HereditaryReport {
    pub radius: u64,
    pub range: u64,
    pub max_range: u64,
    /// Distinct factors of `η` on `[−range, range]`.
    pub factors: usize,
    /// Distinct blocks below some factor.
    pub sub_blocks: usize,
    pub confirmed: usize,
    pub witness_realized: usize,
    pub unresolved: Vec<String>,
    pub verdict: String,
}

/// Checks, block by block, whether `X_η` looks hereditary at length
/// `2N + 1`: every block below a factor of `η` is found further out in `η`
/// (escalating the range tenfold up to `max_range`) or realized by
/// `construct_witness`. Evidence only for infinite B.
pub fn hereditary_audit(structure: &Structure, radius: u64, range: u64, max_range: u64) -> Result<HereditaryReport> {
    let len = check_length(radius)?;
    let family = &structure.family;
    let base = eta_factors(family, radius, range)?;
    let mut below: BTreeSet<u32> = BTreeSet::new();
    for &w in base.keys() {
        let mut sub = w;
        loop {
            below.insert(sub);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & w;
        }
    }
    let mut languages = vec![(range, base.clone())];
    let mut next = range.saturating_mul(10);
    while next <= max_range && next > range {
        languages.push((next, BTreeMap::new()));
        next = next.saturating_mul(10);
    }
    let mut computed = 1;
    let s = family.spectrum_bounded(2 * radius + 1)?;
    let (mut confirmed, mut realized) = (0, 0);
    let mut unresolved = Vec::new();
    'blocks: for &w in &below {
        for (k, (r, lang)) in languages.iter_mut().enumerate() {
            if k >= computed {
                *lang = eta_factors(family, radius, *r)?;
                computed = k + 1;
            }
            if lang.contains_key(&w) {
                confirmed += 1;
                continue 'blocks;
            }
        }
        // the closest factor above w, first occurrence
        let (&above, &centre) = base
            .iter()
            .filter(|(&u, _)| u & w == w)
            .min_by_key(|(&u, _)| (u ^ w).count_ones())
            .expect("w lies below some factor");
        let flips: Vec<i128> = (0..len)
            .filter(|&j| (above ^ w) >> j & 1 == 1)
            .map(|j| j as i128 - radius as i128)
            .collect();
        match construct_witness(structure, &Anchor::Point { n: centre }, radius, &flips, &s) {
            Ok(wit) if wit.integer().is_some() && verify_integer_witness(family, &wit)? => realized += 1,
            _ => unresolved.push(mask_word(w, len)),
        }
    }
    let reached = languages.last().map_or(range, |(r, _)| *r);
    let verdict = if unresolved.is_empty() {
        format!("confirmed at scale (N = {radius}, R = {reached})")
    } else {
        format!("{} blocks unresolved at scale (N = {radius}, R = {reached})", unresolved.len())
    };
    Ok(HereditaryReport {
        radius,
        range,
        max_range: reached,
        factors: base.len(),
        sub_blocks: below.len(),
        confirmed,
        witness_realized: realized,
        unresolved,
        verdict,
    })
}

/// Parses a `0`/`1` word into its bit mask (bit `j` = character `j`).
pub fn parse_word(word: &str) -> Result<u32> {
    if word.len() > MAX_BLOCK_LEN as usize || !word.bytes().all(|c| c == b'0' || c == b'1') {
        return Err(Error::Parse(format!("not a 0/1 word of length ≤ {MAX_BLOCK_LEN}: {word:?}")));
    }
    Ok(word_mask(word))
}
