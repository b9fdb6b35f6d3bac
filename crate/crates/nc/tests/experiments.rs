mod common;

use nc::experiments::*;
use nc_core::imaging::random_scene;
use nc_core::{Seed, C64};

fn problem() -> Problem {
    Problem::new(common::small_config(), None, Seed(11)).unwrap()
}

#[test]
fn default_grids() {
    let g = default_c0_grid();
    assert_eq!(g.len(), 14);
    assert_eq!((g[0], g[13]), (0.2, 1.5));
    assert!(g.contains(&0.8));
    assert_eq!(default_m_values(), (1..=20).collect::<Vec<_>>());
    let s = default_snr_values();
    assert_eq!((s[0], *s.last().unwrap()), (0.25, 8.0));
    assert!(s.windows(2).all(|w| (w[1] / w[0] - 2f64.sqrt()).abs() < 1e-12));
}

#[test]
fn problem_uses_formula_block_count() {
    let p = problem();
    assert_eq!(p.collector().num_blocks(), 8);
    assert_eq!(p.collector().n(), 64);
    let sized = Problem::new(common::small_config(), Some(640), Seed(11)).unwrap();
    assert_eq!(sized.collector().num_columns(), 640);
    assert!(Problem::new(common::small_config(), Some(100), Seed(11)).is_err());
}

#[test]
fn calibration_with_huge_weight_is_phantom_free() {
    let cal = calibrate_c0(&problem(), &[100.0], 3, Seed(1)).unwrap();
    assert_eq!(cal.phantom_rate, vec![0.0]);
    assert_eq!(cal.chosen_c0, Some(100.0));
    assert!(cal.diagnostic.is_none());
}

#[test]
fn calibration_without_weight_finds_phantoms() {
    let cal = calibrate_c0(&problem(), &[0.0], 5, Seed(1)).unwrap();
    assert_eq!(cal.tau, vec![0.0]);
    assert!(cal.phantom_rate[0] >= 0.8, "{:?}", cal.phantom_rate);
    assert_eq!(cal.chosen_c0, None);
    assert!(cal.diagnostic.is_some());
}

#[test]
fn calibration_picks_first_clean_value() {
    let p = problem();
    let grid = [0.0, 0.8, 100.0];
    let cal = calibrate_c0(&p, &grid, 4, Seed(2)).unwrap();
    let first_clean = cal.phantom_rate.iter().position(|&r| r == 0.0).unwrap();
    assert_eq!(cal.chosen_c0, Some(grid[first_clean]));
    assert_eq!(cal, calibrate_c0(&p, &grid, 4, Seed(2)).unwrap());
}

#[test]
fn calibration_preconditions() {
    let p = problem();
    assert!(calibrate_c0(&p, &[], 1, Seed(0)).is_err());
    assert!(calibrate_c0(&p, &[1.0, 0.5], 1, Seed(0)).is_err());
    assert!(calibrate_c0(&p, &[-1.0], 1, Seed(0)).is_err());
    assert!(calibrate_c0(&p, &[1.0], 0, Seed(0)).is_err());
}

#[test]
fn noiseless_comparison_agrees_on_support() {
    let p = problem();
    let scene = random_scene(p.config(), 3, DEFAULT_AMPLITUDES, Seed(21)).unwrap();
    let truth = scene.support();
    let cmp = run_comparison(&p, scene, f64::INFINITY, Seed(22), DEFAULT_C0).unwrap();
    for r in [&cmp.no_collector, &cmp.tau_one, &cmp.calibrated] {
        assert!(r.converged);
        assert_eq!(r.support, truth);
    }
    let rho = cmp.truth();
    let debiased = cmp.debiased.as_ref().unwrap();
    assert!(relative_error(debiased, &rho) <= 1e-10);
    assert!(relative_error(&cmp.calibrated.rho_tau, &rho) <= 1e-3);
}

#[test]
fn comparison_shares_one_data_realization() {
    let p = problem();
    let scene = random_scene(p.config(), 2, DEFAULT_AMPLITUDES, Seed(23)).unwrap();
    let cmp = run_comparison(&p, scene.clone(), 1.0, Seed(24), DEFAULT_C0).unwrap();
    assert_eq!(cmp.trial, p.trial_for_scene(scene, 1.0, Seed(24)).unwrap());
    assert!(!cmp.no_collector.has_collector());
    assert!((cmp.tau_one.tau - 1.0).abs() < 1e-15);
    assert!((cmp.calibrated.tau - 0.8 * (64f64).ln().sqrt()).abs() < 1e-12);
}

#[test]
fn trials_are_deterministic_and_scaled() {
    let p = problem();
    let t = p.trial(4, 2.0, Seed(8)).unwrap();
    assert_eq!(t, p.trial(4, 2.0, Seed(8)).unwrap());
    let ratio = nc_core::vector::norm2(&t.b0) / nc_core::vector::norm2(&t.noise);
    assert!((ratio - 2.0).abs() < 1e-12);

    let pure = p.trial(0, 1.0, Seed(8)).unwrap();
    assert!((nc_core::vector::norm2(&pure.b) - 1.0).abs() < 1e-12);
    assert_eq!(pure.scene.sparsity(), 0);
}

#[test]
fn single_trial_phase_diagram_is_binary() {
    let p = problem();
    let pd = phase_diagram(&p, &[1, 6], &[0.25, f64::INFINITY], 1, Seed(4), DEFAULT_C0).unwrap();
    assert_eq!(pd.success.len(), 2);
    assert!(pd.success.iter().all(|row| row.len() == 2));
    assert!(pd.success.iter().flatten().all(|&x| x == 0.0 || x == 1.0));
    // a single noiseless source is always found
    assert_eq!(pd.success[0][1], 1.0);
    for (s, c) in pd.success.iter().flatten().zip(pd.no_false_discovery.iter().flatten()) {
        assert!(s <= c);
    }
}

#[test]
fn phase_diagram_is_deterministic() {
    let p = problem();
    let a = phase_diagram(&p, &[2, 4], &[1.0, 4.0], 2, Seed(9), DEFAULT_C0).unwrap();
    let b = phase_diagram(&p, &[2, 4], &[1.0, 4.0], 2, Seed(9), DEFAULT_C0).unwrap();
    assert_eq!(a, b);
    assert!(a.success.iter().flatten().all(|x| [0.0, 0.5, 1.0].contains(x)));
}

#[test]
fn phase_diagram_preconditions() {
    let p = problem();
    assert!(phase_diagram(&p, &[], &[1.0], 1, Seed(0), DEFAULT_C0).is_err());
    assert!(phase_diagram(&p, &[1], &[], 1, Seed(0), DEFAULT_C0).is_err());
    assert!(phase_diagram(&p, &[1], &[1.0], 0, Seed(0), DEFAULT_C0).is_err());
    assert!(phase_diagram(&p, &[1], &[0.0], 1, Seed(0), DEFAULT_C0).is_err());
    assert!(phase_diagram(&p, &[82], &[1.0], 1, Seed(0), DEFAULT_C0).is_err());
}

#[test]
fn render_image_examples() {
    let config = common::small_config();
    let zero = render_image(&[C64::new(0.0, 0.0); 81], &config).unwrap();
    assert!(zero.iter().flatten().all(|&x| x == 0.0));

    let scene = random_scene(&config, 5, DEFAULT_AMPLITUDES, Seed(1)).unwrap();
    let image = render_image(&scene.to_dense(81).unwrap(), &config).unwrap();
    for (&k, a) in scene.positions.iter().zip(&scene.amplitudes) {
        let (i, j) = config.grid_coords(k);
        assert_eq!(image[i][j], a.norm());
    }
    assert_eq!(image.iter().flatten().filter(|x| **x != 0.0).count(), 5);

    assert!(render_image(&[C64::new(0.0, 0.0); 80], &config).is_err());
}

#[test]
fn support_match_counts() {
    let sm = SupportMatch::new(&[1, 4, 9], &[1, 2, 4]);
    assert_eq!((sm.false_discoveries, sm.missed), (1, 1));
    assert!(!sm.exact());
    assert!(SupportMatch::new(&[], &[]).exact());
}
