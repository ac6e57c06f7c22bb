use bfree::family::{BFamily, PrimeClass};
use bfree::heredity::{construct_witness, verify_integer_witness, WitnessKind};
use bfree::periodic::{indicator_window, Block};
use bfree::structure::Structure;
use bfree::window::{mirsky_block_bounds, phi_eval, phi_lower, Anchor, Cylinder};
use num_rational::BigRational;
use proptest::prelude::*;

fn catalog() -> Vec<BFamily> {
    vec![
        BFamily::explicit("b2", vec![2]).unwrap(),
        BFamily::explicit("finite", vec![6, 10, 15]).unwrap(),
        BFamily::explicit("4 6 9", vec![4, 6, 9]).unwrap(),
        BFamily::squares_of_primes(),
        BFamily::twice_odd_primes(),
        BFamily::scaled_primes("3p", 3, PrimeClass { residue: 0, modulus: 1, forbidden: 6 }, 1).unwrap(),
    ]
}

fn eta(b: &[u64], n: i64) -> bool {
    !b.iter().any(|&d| n.rem_euclid(d as i64) == 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn points_refine_their_cylinders(k in 0usize..6, n in -5000i128..5000, cut in 1usize..5, radius in 0u64..6) {
        let family = &catalog()[k];
        let members = family.enumerate_upto(60).unwrap();
        let s: Vec<u64> = members.iter().copied().take(cut).collect();
        let cyl = Cylinder::of_point(family, s.clone(), n).unwrap();
        let coarse = phi_eval(family, &Anchor::Cylinder { cylinder: cyl }, radius, 60).unwrap();
        let point = phi_eval(family, &Anchor::Point { n }, radius, 60).unwrap();
        prop_assert!(point.refines(&coarse), "{} vs {}", point, coarse);
        let window = indicator_window(family, n - radius as i128, n + radius as i128).unwrap();
        let shifted = Block { offset: -(radius as i128), bits: window.bits };
        prop_assert!(coarse.admits(&shifted));
    }

    #[test]
    fn lower_toeplitz_sits_below_eta(k in 0usize..6, m in -5000i128..5000, radius in 0u64..8) {
        let family = &catalog()[k];
        let st = Structure::compute(family).unwrap();
        let lower = phi_lower(&st, m, radius).unwrap();
        let window = indicator_window(family, m - radius as i128, m + radius as i128).unwrap();
        let eta = Block { offset: -(radius as i128), bits: window.bits };
        prop_assert!(lower.le(&eta));
    }

    #[test]
    fn mirsky_bracket_contains_the_block_frequency(
        k in 0usize..3,
        word in proptest::collection::vec(any::<bool>(), 1..6),
    ) {
        let family = &catalog()[k];
        let b = family.finite_elements().unwrap();
        let period: i64 = b.iter().fold(1u64, |l, &x| num_integer::lcm(l, x)) as i64;
        let w = Block::new(0, word.clone()).unwrap();
        let m = mirsky_block_bounds(family, &w, &b).unwrap();
        prop_assert!(m.lower <= m.upper);
        let hits = (0..period)
            .filter(|&c| word.iter().enumerate().all(|(j, &x)| eta(&b, c + j as i64) == x))
            .count();
        let freq = BigRational::new((hits as i64).into(), period.into());
        prop_assert!(m.lower <= freq && freq <= m.upper, "{} {} {}", m.lower, freq, m.upper);
    }

    #[test]
    fn squarefree_witnesses_realize_their_targets(anchor in 0i128..2000, mask in 0u8..8) {
        let st = Structure::compute(&BFamily::squares_of_primes()).unwrap();
        let flips: Vec<i128> = (0..3).filter(|j| mask >> j & 1 == 1).map(|j| j - 1).collect();
        let w = match construct_witness(&st, &Anchor::Point { n: anchor }, 1, &flips, &[]) {
            Err(bfree::Error::FlipNotAllowed { position, .. }) => {
                // only positions where the anchor is already 0 are refused
                let n = anchor + position as i128;
                prop_assert!(n == 0 || (2..).take_while(|d: &i128| d * d <= n.abs()).any(|d| n % (d * d) == 0));
                return Ok(());
            }
            other => other.unwrap(),
        };
        prop_assert!(w.transcript_holds());
        if let WitnessKind::Integer { m } = w.kind {
            prop_assert!(verify_integer_witness(&st.family, &w).unwrap());
            for (j, &bit) in w.target.bits.iter().enumerate() {
                let n = m + j as i128 - 1;
                let sqf = n != 0 && (2..).take_while(|d: &i128| d * d <= n.abs()).all(|d| n % (d * d) != 0);
                prop_assert_eq!(sqf, bit);
            }
            for &i in &flips {
                prop_assert!(!w.target.get(i).unwrap());
            }
        }
    }
}
