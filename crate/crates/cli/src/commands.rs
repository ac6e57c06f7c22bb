use bfree::family::BFamily;
use bfree::heredity::{self, LanguageMode};
use bfree::periodic::{self, Block};
use bfree::rational::{approx, parse_rational, RationalJson};
use bfree::structure::{self, Filtration, LightTailsJson, Structure};
use bfree::window::{self, Anchor, BoundaryReport, BoundaryReportJson, Regularity};
use bfree::{arith, family};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::spec::{family_hash, load_family};
use crate::{BlockMode, CliError, Common, Format, Output};

fn parse_range(text: &str) -> Result<(i128, i128), CliError> {
    let bad = || CliError::Usage(format!("expected an inclusive range lo..hi, got {text:?}"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: i128 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i128 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn ceilings() -> Value {
    json!({
        "factor": arith::FACTOR_CEILING.to_string(),
        "prime_search": arith::PRIME_SEARCH_CEILING,
        "enumeration": family::ENUMERATION_CEILING,
        "primitivity_depth": family::PRIMITIVITY_DEPTH,
        "certificate_audit_depth": family::DEFAULT_AUDIT_DEPTH,
        "sieve": periodic::SIEVE_LIMIT,
        "recursion_budget": periodic::RECURSION_BUDGET,
        "window_sieve": periodic::WINDOW_SIEVE_LIMIT,
        "witness_scan": heredity::WITNESS_SCAN_LIMIT,
    })
}

fn envelope(command: &str, family: &BFamily, common: &Common, result: Value) -> Value {
    json!({
        "tool": "bfree",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "family": { "label": family.label, "hash": family_hash(family) },
        "seed": common.seed,
        "ceilings": ceilings(),
        "result": result,
    })
}

fn json_output(value: &Value, code: u8) -> Output {
    Output {
        body: format!("{}\n", serde_json::to_string_pretty(value).expect("reports serialize")),
        code,
    }
}

fn rational(r: &BigRational) -> Value {
    json!({ "exact": RationalJson::from(r), "approx": approx(r) })
}

fn filtration_of(family: &BFamily, thresholds: Option<Vec<u64>>) -> Result<Filtration, CliError> {
    Ok(match thresholds {
        Some(t) if !t.is_empty() => Filtration::from_thresholds(family, &t)?,
        _ => Filtration::standard(family)?,
    })
}

fn regularity_json(r: &Regularity) -> Value {
    match r {
        Regularity::Regular { index, term, exact } => json!({
            "verdict": "Regular",
            "index": index,
            "term": rational(term),
            "exact": exact,
        }),
        Regularity::Undetermined { last } => json!({
            "verdict": "Undetermined",
            "last": rational(last),
        }),
    }
}

fn boundary_csv(report: &BoundaryReport) -> String {
    let mut out = String::from("index,size,lcm,term,w_prime,interior\n");
    for (j, t) in report.terms.iter().enumerate() {
        out.push_str(&format!(
            "{j},{},{},{},{},{}\n",
            t.support.len(),
            t.lcm,
            t.term,
            t.w_prime,
            t.interior
        ));
    }
    out
}

pub fn eta(common: &Common, range: &str) -> Result<Output, CliError> {
    let family = load_family(&common.family)?;
    let (lo, hi) = parse_range(range)?;
    let block = periodic::indicator_window(&family, lo, hi)?;
    Ok(match common.format.unwrap_or(Format::Text) {
        Format::Text => Output {
            body: format!("{block}\n"),
            code: 0,
        },
        Format::Csv => Output {
            body: block.to_csv(),
            code: 0,
        },
        Format::Json => json_output(
            &envelope(
                "eta",
                &family,
                common,
                json!({ "offset": block.offset, "word": block.word(), "rle": block.to_rle() }),
            ),
            0,
        ),
    })
}

pub fn structure(
    common: &Common,
    thresholds: Option<Vec<u64>>,
    tolerance: &str,
    truncation: u64,
) -> Result<Output, CliError> {
    let family = load_family(&common.family)?;
    let tolerance = parse_rational(tolerance).map_err(|e| CliError::Usage(e.to_string()))?;
    let st = Structure::compute(&family)?;
    let filt = filtration_of(&family, thresholds)?;
    let boundary = window::boundary_measure_filtration(&st, &filt)?;
    let regularity = window::regularity_verdict(&boundary, &tolerance)?;
    if common.format == Some(Format::Csv) {
        return Ok(Output {
            body: boundary_csv(&boundary),
            code: 0,
        });
    }
    let delta = structure::davenport_erdos_delta(&filt)?;
    let taut = structure::taut_to_depth(&family, truncation)?;
    let tails = structure::light_tails_bound(&family, truncation)?;
    let result = json!({
        "label": family.label,
        "primitivity": family.primitivity(),
        "a_inf": st.a_inf_values(),
        "certificates": st.a_inf.iter().map(|c| &c.certificate).collect::<Vec<_>>(),
        "prim_a_inf": st.prim_a_inf,
        "b_zero": st.b_zero,
        "b_star": st.b_star_elements(),
        "proximal": st.proximal(),
        "filtration": filt.sets(),
        "davenport_erdos": delta.iter().map(rational).collect::<Vec<_>>(),
        "boundary": BoundaryReportJson::from(&boundary),
        "regularity": regularity.label(),
        "regularity_detail": regularity_json(&regularity),
        "taut": taut,
        "light_tails": LightTailsJson::from(&tails),
    });
    Ok(json_output(&envelope("structure", &family, common, result), 0))
}

pub fn toeplitz(common: &Common, positions: &str, thresholds: Option<Vec<u64>>) -> Result<Output, CliError> {
    let family = load_family(&common.family)?;
    let (lo, hi) = parse_range(positions)?;
    let st = Structure::compute(&family)?;
    let filt = filtration_of(&family, thresholds)?;
    let mut certificates = Vec::new();
    let mut exhausted = Vec::new();
    for i in lo..=hi {
        match window::toeplitz_certify(&st, &filt, i) {
            Ok(c) => certificates.push(c),
            Err(e @ bfree::Error::SearchExhausted { .. }) => exhausted.push(json!({ "position": i, "error": e.to_string() })),
            Err(e) => return Err(e.into()),
        }
    }
    let code = if exhausted.is_empty() { 0 } else { 1 };
    if common.format == Some(Format::Csv) {
        let mut out = String::from("position,value,period,kind,detail\n");
        for c in &certificates {
            let (kind, detail) = match &c.kind {
                window::ToeplitzKind::OnePeriod { support } => (
                    "one_period",
                    support.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
                ),
                window::ToeplitzKind::ZeroPeriod { b_star } => ("zero_period", b_star.to_string()),
            };
            out.push_str(&format!("{},{},{},{kind},{detail}\n", c.position, u8::from(c.value), c.period));
        }
        return Ok(Output { body: out, code });
    }
    let result = json!({
        "filtration": filt.sets(),
        "certificates": certificates,
        "search_exhausted": exhausted,
    });
    Ok(json_output(&envelope("toeplitz", &family, common, result), code))
}

pub fn measure(
    common: &Common,
    thresholds: Option<Vec<u64>>,
    tolerance: &str,
    block: Option<&str>,
    offset: i64,
) -> Result<Output, CliError> {
    let family = load_family(&common.family)?;
    let tolerance = parse_rational(tolerance).map_err(|e| CliError::Usage(e.to_string()))?;
    let st = Structure::compute(&family)?;
    let filt = filtration_of(&family, thresholds)?;
    let boundary = window::boundary_measure_filtration(&st, &filt)?;
    let regularity = window::regularity_verdict(&boundary, &tolerance)?;
    if common.format == Some(Format::Csv) {
        return Ok(Output {
            body: boundary_csv(&boundary),
            code: 0,
        });
    }
    let mirsky = match block {
        None => Value::Null,
        Some(word) => {
            let mask = heredity::parse_word(word).map_err(|e| CliError::Usage(e.to_string()))?;
            let bits: Vec<bool> = (0..word.len()).map(|j| mask >> j & 1 == 1).collect();
            let w = Block::new(offset as i128, bits).map_err(|e| CliError::Usage(e.to_string()))?;
            let s = filt.sets().last().expect("filtrations are nonempty");
            let m = window::mirsky_block_bounds(&family, &w, s)?;
            json!({
                "block": word,
                "offset": offset,
                "support": s,
                "lower": rational(&m.lower),
                "upper": rational(&m.upper),
                "cylinder_exact": rational(&m.cylinder_exact),
                "ones_free": rational(&m.ones_free),
                "tail": m.tail.as_ref().map(rational),
            })
        }
    };
    let result = json!({
        "filtration": filt.sets(),
        "boundary": BoundaryReportJson::from(&boundary),
        "regularity": regularity.label(),
        "regularity_detail": regularity_json(&regularity),
        "mirsky": mirsky,
    });
    Ok(json_output(&envelope("measure", &family, common, result), 0))
}

pub fn witness(
    common: &Common,
    anchor: i64,
    radius: u64,
    flips: &[i64],
    support: &[u64],
    scan_limit: u64,
    tail_audit: u64,
) -> Result<Output, CliError> {
    let family = load_family(&common.family)?;
    if scan_limit == 0 {
        return Err(CliError::Usage("--scan-limit must be positive".into()));
    }
    let st = Structure::compute(&family)?;
    let flips: Vec<i128> = flips.iter().map(|&i| i as i128).collect();
    let w = heredity::construct_witness_with(
        &st,
        &Anchor::Point { n: anchor as i128 },
        radius,
        &flips,
        support,
        scan_limit,
        tail_audit,
    )?;
    let verified = heredity::verify_integer_witness(&family, &w)?;
    let code = if w.search_exhausted { 1 } else { 0 };
    let result = json!({
        "witness": w,
        "pattern": w.target.word(),
        "verified": verified,
        "transcript_holds": w.transcript_holds(),
    });
    Ok(json_output(&envelope("witness", &family, common, result), code))
}

pub fn blocks(common: &Common, radius: u64, mode: BlockMode, range: u64, support: &[u64]) -> Result<Output, CliError> {
    let family = load_family(&common.family)?;
    let support = if support.is_empty() {
        Filtration::standard(&family)?
            .sets()
            .last()
            .cloned()
            .ok_or_else(|| CliError::Usage("the family is empty".into()))?
    } else {
        support.to_vec()
    };
    let eta = match mode {
        BlockMode::Phi => None,
        _ => Some(heredity::block_language(&family, radius, &LanguageMode::EtaEmpirical { range })?),
    };
    let phi = match mode {
        BlockMode::Eta => None,
        _ => Some(heredity::block_language(
            &family,
            radius,
            &LanguageMode::PhiCylinder {
                support: support.clone(),
            },
        )?),
    };
    if common.format == Some(Format::Csv) {
        let mut out = String::from("mode,word\n");
        for (name, set) in [("eta", &eta), ("phi", &phi)] {
            for w in set.iter().flatten() {
                out.push_str(&format!("{name},{w}\n"));
            }
        }
        return Ok(Output { body: out, code: 0 });
    }
    let (identical, eta_within_phi) = match (&eta, &phi) {
        (Some(a), Some(b)) => (Some(a == b), Some(a.is_subset(b))),
        _ => (None, None),
    };
    let result = json!({
        "radius": radius,
        "range": range,
        "support": support,
        "eta": eta,
        "phi": phi,
        "identical": identical,
        "eta_within_phi": eta_within_phi,
    });
    Ok(json_output(&envelope("blocks", &family, common, result), 0))
}

pub fn diagnose(
    common: &Common,
    truncation: u64,
    samples: usize,
    audit_radius: Option<u64>,
    audit_range: u64,
    audit_max_range: u64,
) -> Result<Output, CliError> {
    let family = load_family(&common.family)?;
    let certificates = match family.coprime_certificates() {
        Ok(c) => json!({ "audited": true, "certificates": c }),
        Err(e) => json!({ "audited": false, "error": e.to_string() }),
    };
    let st = Structure::compute(&family)?;
    let taut = structure::taut_to_depth(&family, truncation)?;
    let tails = structure::light_tails_bound(&family, truncation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let pool = family.enumerate_upto(100)?;
    let mut spot_checks = Vec::new();
    if !pool.is_empty() {
        for _ in 0..samples {
            let mut s = pool.clone();
            s.shuffle(&mut rng);
            s.truncate(rng.gen_range(1..=pool.len().min(4)));
            s.sort_unstable();
            for a in st.a_inf_values() {
                spot_checks.push(st.a_inf_spot_check(a, &s)?);
            }
        }
    }
    let audit = match audit_radius {
        Some(r) => serde_json::to_value(heredity::hereditary_audit(&st, r, audit_range, audit_max_range)?)
            .expect("reports serialize"),
        None => Value::Null,
    };
    let result = json!({
        "primitivity": family.primitivity(),
        "coprime_certificates": certificates,
        "taut": taut,
        "light_tails": LightTailsJson::from(&tails),
        "a_inf_spot_checks": spot_checks,
        "hereditary_audit": audit,
    });
    Ok(json_output(&envelope("diagnose", &family, common, result), 0))
}
