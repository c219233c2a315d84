use chromatomo::analysis::{efficiency, loss, ExperimentConfig};
use chromatomo::measurement::{
    check_povm, fuzzy_povm, ideal_projectors, Apparatus, PlateAngles, ProtocolSetting, POVM_TOL,
};
use chromatomo::optics::{spectral_grid, wrap_plate_angle, SpectralGrid};
use chromatomo::quantum::{fidelity_pure, haar_random_state, StateVector};
use chromatomo::tomography::{pure_probabilities, sample_counts};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn apparatus() -> Apparatus {
    Apparatus::quartz(5, 5, 0.65, 0.325).unwrap()
}

fn angles() -> impl Strategy<Value = PlateAngles> {
    (-PI..PI, -PI..PI).prop_map(|(hwp, qwp)| PlateAngles { hwp, qwp })
}

fn two_qubit_setting(a: PlateAngles, b: PlateAngles) -> ProtocolSetting {
    ProtocolSetting { label: "random".into(), signal: a, idler: Some(b) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fuzzy_operators_form_a_povm(a in angles(), b in angles(), width_nm in 0.0f64..40.0, points in 1usize..48) {
        let grid = if width_nm == 0.0 || points == 1 {
            SpectralGrid::monochromatic(0.65, 0.325)
        } else {
            spectral_grid(0.65, width_nm * 1e-3, 0.325, points).unwrap()
        };
        let app = apparatus();
        let s = two_qubit_setting(a, b);
        check_povm(&fuzzy_povm(&s, &app, &grid, 4).unwrap(), POVM_TOL).unwrap();
        let single = ProtocolSetting { idler: None, ..s };
        check_povm(&fuzzy_povm(&single, &app, &grid, 2).unwrap(), POVM_TOL).unwrap();
    }

    #[test]
    fn monochromatic_fuzzy_is_ideal(a in angles(), b in angles()) {
        let app = apparatus();
        let s = two_qubit_setting(a, b);
        let ideal = ideal_projectors(&s, &app, 4).unwrap();
        let fuzzy = fuzzy_povm(&s, &app, &SpectralGrid::monochromatic(0.65, 0.325), 4).unwrap();
        for (x, y) in ideal.iter().zip(&fuzzy) {
            prop_assert!(x.operator.frobenius_distance(&y.operator) < 1e-12);
        }
    }

    #[test]
    fn midpoint_grid_converges_quadratically(a in angles(), width_nm in 5.0f64..40.0) {
        let app = apparatus();
        let s = ProtocolSetting { label: "r".into(), signal: a, idler: None };
        let at = |n| fuzzy_povm(&s, &app, &spectral_grid(0.65, width_nm * 1e-3, 0.325, n).unwrap(), 2).unwrap();
        let (g32, g64, g128) = (at(32), at(64), at(128));
        let coarse = g32[0].operator.frobenius_distance(&g64[0].operator);
        let fine = g64[0].operator.frobenius_distance(&g128[0].operator);
        if coarse > 1e-9 {
            let ratio = coarse / fine;
            prop_assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn plate_angles_wrap_into_one_period(x in -50.0f64..50.0) {
        let w = wrap_plate_angle(x);
        prop_assert!(w > -PI / 2.0 && w <= PI / 2.0);
        let k = ((x - w) / PI).round();
        prop_assert!((x - w - k * PI).abs() < 1e-9);
    }

    #[test]
    fn probabilities_are_distributions(seed in any::<u64>(), a in angles(), b in angles(), width_nm in 0.0f64..40.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = haar_random_state(4, &mut rng).unwrap();
        let grid = if width_nm < 1.0 { SpectralGrid::monochromatic(0.65, 0.325) } else {
            spectral_grid(0.65, width_nm * 1e-3, 0.325, 16).unwrap()
        };
        let ops = fuzzy_povm(&two_qubit_setting(a, b), &apparatus(), &grid, 4).unwrap();
        let p = pure_probabilities(&psi, &ops).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let counts = sample_counts(&p, 1000, &mut rng).unwrap();
        prop_assert_eq!(counts.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn fidelity_ignores_global_phase(seed in any::<u64>(), phase in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (haar_random_state(4, &mut rng).unwrap(), haar_random_state(4, &mut rng).unwrap());
        let f = fidelity_pure(&a, &b).unwrap();
        prop_assert!((f - fidelity_pure(&b, &a).unwrap()).abs() < 1e-14);
        prop_assert!((f - fidelity_pure(&a.with_global_phase(phase), &b).unwrap()).abs() < 1e-14);
        prop_assert!((fidelity_pure(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn efficiency_times_loss_is_s_minus_one(xs in prop::collection::vec(1e-9f64..1e-4, 1..50), n_tot in 1u64..10_000_000) {
        let (l, _) = loss(n_tot, &xs).unwrap();
        let e = efficiency(l / n_tot as f64, 4, n_tot).unwrap();
        prop_assert!((e * l - 3.0).abs() < 1e-12 * 3.0);
    }
}

#[test]
fn dim_two_prediction_matches_monte_carlo() {
    use chromatomo::analysis::run_campaign;
    use chromatomo::measurement::{OperatorModel, Symmetry};
    let c = ExperimentConfig {
        dim: 2,
        symmetry: Symmetry::Octahedron,
        n_tot: 100_000,
        n_exp: 1000,
        reconstruction_model: OperatorModel::Standard,
        data_model: OperatorModel::Standard,
        ..Default::default()
    };
    let r = run_campaign(&c).unwrap();
    let rel = r.summary.loss / r.summary.predicted_loss - 1.0;
    assert!(rel.abs() < 0.05, "empirical {} vs predicted {}", r.summary.loss, r.summary.predicted_loss);
}

#[test]
fn haar_states_have_uniform_mean_populations() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 20_000;
    let mut mean = [0.0; 4];
    for _ in 0..n {
        let psi: StateVector = haar_random_state(4, &mut rng).unwrap();
        for (m, c) in mean.iter_mut().zip(psi.amplitudes()) {
            *m += c.norm_sqr() / n as f64;
        }
    }
    for m in mean {
        assert!((m - 0.25).abs() < 0.005);
    }
}
