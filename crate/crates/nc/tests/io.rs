mod common;

use std::fs;

use nc::experiments::{self, PhaseDiagram, Problem};
use nc::io::*;
use nc_core::{ImagingConfig, NoiseCollector, Seed, SolverConfig, SourceScene, C64};

#[test]
fn config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("config.json");
    let config = common::small_config();
    write_config(&p, &config).unwrap();
    assert_eq!(read_config(&p).unwrap(), config);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    let mut keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "aperture",
            "bandwidth",
            "central_frequency",
            "num_frequencies",
            "num_receivers",
            "pixels_cross",
            "pixels_range",
            "range",
            "seed",
            "wave_speed",
            "window_depth",
            "window_width"
        ]
    );
}

fn config_error(json: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("config.json");
    fs::write(&p, json).unwrap();
    read_config(&p).unwrap_err().to_string()
}

fn default_json() -> serde_json::Value {
    serde_json::to_value(ImagingConfig::default()).unwrap()
}

#[test]
fn config_errors_name_the_field() {
    let mut v = default_json();
    v["aperture"] = "wide".into();
    assert!(config_error(&v.to_string()).contains("aperture"));

    let mut v = default_json();
    v.as_object_mut().unwrap().remove("pixels_range");
    assert!(config_error(&v.to_string()).contains("pixels_range"));

    let mut v = default_json();
    v["colour"] = 3.into();
    assert!(config_error(&v.to_string()).contains("colour"));

    let mut v = default_json();
    v["wave_speed"] = (-1.0).into();
    assert!(config_error(&v.to_string()).contains("wave_speed"));

    assert!(!config_error("{ not json").is_empty());
}

#[test]
fn vector_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("v.csv");
    let v = nc_core::random::sample_complex_gaussian(50, Seed(1)).unwrap();
    write_vector_csv(&p, &v).unwrap();
    assert_eq!(read_vector_csv(&p).unwrap(), v);
    assert!(fs::read_to_string(&p).unwrap().starts_with("index,re,im\n0,"));
}

#[test]
fn scene_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("scene.csv");
    let scene = SourceScene::new(vec![4, 70], vec![C64::new(0.5, -0.25), C64::new(0.0, 1.0)]).unwrap();
    write_scene_csv(&p, &scene).unwrap();
    assert_eq!(read_scene_csv(&p).unwrap(), scene);
    assert!(fs::read_to_string(&p).unwrap().starts_with("grid_index,re,im\n4,0.5,-0.25\n"));
}

#[test]
fn collector_file_matches_rebuild() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nc.csv");
    let nc = NoiseCollector::with_blocks(25, 3, Seed(99)).unwrap();
    write_collector(&p, &nc).unwrap();

    let text = fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,blocks,seed,beta"));
    assert!(lines.next().unwrap().starts_with("25,3,99,"));
    assert_eq!(lines.next(), Some("re,im"));
    assert_eq!(lines.count(), 75);

    let back = read_collector(&p).unwrap();
    let rebuilt = NoiseCollector::with_blocks(back.n(), back.num_blocks(), back.seed()).unwrap();
    assert_eq!(back.generators(), nc.generators());
    assert_eq!(rebuilt.generators(), back.generators());
    assert_eq!(back.spectra(), nc.spectra());
    assert_eq!(back.beta(), nc.beta());
}

#[test]
fn collector_file_rejects_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nc.csv");
    write_collector(&p, &NoiseCollector::with_blocks(4, 2, Seed(1)).unwrap()).unwrap();
    let text = fs::read_to_string(&p).unwrap();
    let cut: Vec<_> = text.lines().take(6).collect();
    fs::write(&p, cut.join("\n")).unwrap();
    assert!(read_collector(&p).is_err());
}

#[test]
fn recovery_result_files() {
    let dir = tempfile::tempdir().unwrap();
    let problem = Problem::new(common::small_config(), None, Seed(5)).unwrap();
    let trial = problem.trial(2, f64::INFINITY, Seed(6)).unwrap();
    let r = problem.solver(SolverConfig::default(), true).unwrap().solve(&trial.b).unwrap();
    let written = write_result(dir.path(), &r).unwrap();
    let names: Vec<_> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
        .collect();
    assert_eq!(names, ["result.json", "rho.csv", "eta.csv", "debiased.csv"]);

    let summary: ResultSummary = read_json(&dir.path().join("result.json")).unwrap();
    assert_eq!(summary, ResultSummary::from(&r));
    assert_eq!(read_vector_csv(&dir.path().join("rho.csv")).unwrap(), r.rho_tau);
    assert_eq!(read_vector_csv(&dir.path().join("eta.csv")).unwrap(), r.eta_tau);
}

#[test]
fn phase_diagram_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("pd.csv");
    let pd = PhaseDiagram {
        m_values: vec![2, 4],
        snr_values: vec![0.5, 8.0],
        success: vec![vec![0.4, 1.0], vec![0.0, 0.8]],
        no_false_discovery: vec![vec![1.0; 2]; 2],
        trials_per_cell: 5,
        seed: Seed(1),
        c0: 0.8,
        nonconverged: vec![],
    };
    write_phase_diagram_csv(&p, &pd).unwrap();
    assert_eq!(fs::read_to_string(&p).unwrap(), "M,0.5,8\n2,0.4,1\n4,0,0.8\n");
    let (m, snr, success) = read_phase_diagram_csv(&p).unwrap();
    assert_eq!((m, snr, success), (pd.m_values, pd.snr_values, pd.success));
}

#[test]
fn image_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("image.csv");
    let config = common::small_config();
    let mut rho = vec![C64::new(0.0, 0.0); 81];
    rho[2 * 9 + 7] = C64::new(0.0, -2.0);
    let image = experiments::render_image(&rho, &config).unwrap();
    write_image_csv(&p, &image).unwrap();
    let back = read_image_csv(&p).unwrap();
    assert_eq!(back.len(), 9);
    assert!(back.iter().all(|row| row.len() == 9));
    assert_eq!(back[2][7], 2.0);
    assert_eq!(back.iter().flatten().filter(|x| **x != 0.0).count(), 1);
}
