use magchain::floquet::{bands_bloch_oracle, bands_nondegenerate, periodic_spectrum, SpectralKind};
use magchain::jacobi::{eigenvalues, truncate};
use magchain::profile::{evaluate_period, evaluate_profile, FieldProfile};
use magchain::sets::hausdorff;
use magchain::spectrum::{assemble, discrete_spectrum, farey, golden_convergents};
use magchain::Scalar;
use proptest::prelude::*;

fn linear(p: i64, q: i64, t: Scalar) -> FieldProfile {
    FieldProfile::linear(Scalar::ratio(p, q), t)
}

// Reference values from an independent Bloch-sweep computation in double precision.
#[test]
fn golden_measures_at_generic_phase() {
    let expected = [3.014968, 1.079861, 0.571485, 0.050255, 0.189834, 0.098768];
    let theta = Scalar::ratio(123, 1000);
    for ((p, q), want) in golden_convergents(6).into_iter().zip(expected) {
        let got = discrete_spectrum(&linear(p, q, theta)).unwrap().0.measure();
        assert!((got - want).abs() < 1e-5, "{p}/{q}: {got} vs {want}");
    }
}

#[test]
fn oracle_agreement_up_to_q21() {
    let theta = Scalar::ratio(31, 100);
    for (p, q) in farey(21).into_iter().filter(|&(_, q)| q >= 9).step_by(7) {
        let w = evaluate_period(&linear(p, q, theta)).unwrap();
        let a = bands_nondegenerate(&w).unwrap();
        let b = bands_bloch_oracle(&w, 4001).unwrap();
        assert!(hausdorff(&a.intervals, &b.intervals) < 1e-6, "{p}/{q}");
    }
}

#[test]
fn truncations_fill_every_band() {
    // Dirichlet sections leave at most a few eigenvalues per band behind.
    let prof = linear(2, 5, Scalar::ratio(1, 7));
    let bands = bands_nondegenerate(&evaluate_period(&prof).unwrap()).unwrap();
    let w = evaluate_profile(&prof, 0, 999).unwrap();
    let eigs = eigenvalues(&truncate(&w, 0, 999).unwrap());
    for b in &bands.intervals {
        let inside = eigs.iter().filter(|e| b.contains(**e)).count();
        assert!(inside as f64 >= 1000.0 * 0.2 - 3.0, "{b:?}: {inside}");
    }
}

#[test]
fn graph_spectrum_is_symmetric_part_by_part() {
    let g = assemble(&linear(1, 4, Scalar::ratio(1, 9)), 0.7, 3).unwrap();
    let w = evaluate_period(&linear(1, 4, Scalar::ratio(1, 9))).unwrap();
    let s = periodic_spectrum(&w).unwrap();
    for (a, b) in s.intervals.iter().zip(s.intervals.iter().rev()) {
        assert!((a.lo + b.hi).abs() < 1e-9 && (a.hi + b.lo).abs() < 1e-9);
    }
    assert_eq!(g.kind(), SpectralKind::AbsolutelyContinuous);
}

#[test]
fn gamma_zero_covers_half_line_when_spectrum_is_full() {
    let g = assemble(&linear(0, 1, Scalar::integer(0)), 0.0, 4).unwrap();
    assert!(g.gaps.iter().all(|gap| gap.touching));
    for z in [0.0, 0.5, 1.0, 3.3, 9.0, 15.9] {
        assert!(g.contains(z, 1e-12), "{z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dichotomy_matches_exact_zero_test(p in 0i64..9, q in 1i64..9, num in -40i64..40, den in 1i64..20) {
        let prof = linear(p, q, Scalar::ratio(num, den));
        let w = evaluate_period(&prof).unwrap();
        let s = periodic_spectrum(&w).unwrap();
        let has_zero = !w.period_zero_offsets().unwrap().is_empty();
        prop_assert_eq!(s.kind == SpectralKind::PurePoint, has_zero);
        let r = w.period_values().unwrap().len();
        prop_assert!(s.len() <= r);
    }

    #[test]
    fn parts_stay_inside_their_branch(p in 1i64..6, num in 0i64..50, gamma in -6.0f64..6.0) {
        let prof = linear(p, 7, Scalar::ratio(num, 50));
        let g = assemble(&prof, gamma, 2).unwrap();
        for part in &g.parts {
            let width = part.branch.len();
            prop_assert!(part.measure() <= width + 1e-9);
            prop_assert!(part.hull().lo >= part.branch.lo - 1e-9 && part.hull().hi <= part.branch.hi + 1e-9);
        }
    }
}
