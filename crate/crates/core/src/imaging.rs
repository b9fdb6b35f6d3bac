//! Passive array imaging of point sources.
//!
//! A linear array of `N` receivers sits on the cross-range axis at range 0;
//! the image window is a `pixels_cross × pixels_range` grid centered at range
//! `L`. Propagation uses the homogeneous 3-D Green's function
//! `G(x, y; ω) = exp(iω|x − y|/c) / (4π|x − y|)` evaluated in that plane.
//!
//! Grid index `k = i_cross · pixels_range + i_range`. Data are stacked
//! frequency-major: entry `r + N·l` holds receiver `r` at frequency `l`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::math;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::random::{sample_unit_sphere, uniform_phase, Seed};
use crate::vector::{self, C64, ZERO};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ImagingConfig {
    pub num_receivers: usize,
    /// Array aperture (m).
    pub aperture: f64,
    /// Distance from the array to the window center (m).
    pub range: f64,
    /// Hz.
    pub central_frequency: f64,
    /// Hz.
    pub bandwidth: f64,
    pub num_frequencies: usize,
    /// m/s.
    pub wave_speed: f64,
    /// Cross-range extent of the window (m).
    pub window_width: f64,
    /// Range extent of the window (m).
    pub window_depth: f64,
    pub pixels_cross: usize,
    pub pixels_range: usize,
    pub seed: Seed,
}

impl Default for ImagingConfig {
    /// 60 GHz microwave setup: 25 receivers over 50 cm, 25 frequencies over
    /// 20 GHz, a 20 cm × 60 cm window at 50 cm sampled every 5 mm × 15 mm.
    fn default() -> Self {
        Self {
            num_receivers: 25,
            aperture: 0.5,
            range: 0.5,
            central_frequency: 60e9,
            bandwidth: 20e9,
            num_frequencies: 25,
            wave_speed: 3e8,
            window_width: 0.2,
            window_depth: 0.6,
            pixels_cross: 41,
            pixels_range: 41,
            seed: Seed(0),
        }
    }
}

impl ImagingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("aperture", self.aperture),
            ("range", self.range),
            ("central_frequency", self.central_frequency),
            ("wave_speed", self.wave_speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite")));
            }
        }
        let non_negative = [
            ("bandwidth", self.bandwidth),
            ("window_width", self.window_width),
            ("window_depth", self.window_depth),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be non-negative and finite")));
            }
        }
        let counts = [
            ("num_receivers", self.num_receivers),
            ("num_frequencies", self.num_frequencies),
            ("pixels_cross", self.pixels_cross),
            ("pixels_range", self.pixels_range),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if self.data_dim() < 2 {
            return Err(Error::invalid("num_receivers * num_frequencies must be at least 2"));
        }
        if self.bandwidth / 2.0 >= self.central_frequency {
            return Err(Error::invalid("bandwidth must be below twice the central frequency"));
        }
        Ok(())
    }

    /// `K`, the number of grid points.
    pub fn num_unknowns(&self) -> usize {
        self.pixels_cross * self.pixels_range
    }

    /// `n = N S`.
    pub fn data_dim(&self) -> usize {
        self.num_receivers * self.num_frequencies
    }

    /// Receiver cross-range coordinates, equally spaced across the aperture.
    pub fn receivers(&self) -> Vec<[f64; 2]> {
        spread(self.num_receivers, self.aperture, 0.0)
            .into_iter()
            .map(|x| [x, 0.0])
            .collect()
    }

    /// Frequencies in Hz, equally spaced over `[f0 − B/2, f0 + B/2]`.
    pub fn frequencies(&self) -> Vec<f64> {
        spread(self.num_frequencies, self.bandwidth, self.central_frequency)
    }

    /// `(i_cross, i_range)` of grid index `k`.
    pub fn grid_coords(&self, k: usize) -> (usize, usize) {
        (k / self.pixels_range, k % self.pixels_range)
    }

    /// Position `[cross, range]` of grid index `k` in meters.
    pub fn grid_point(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.grid_coords(k);
        [
            offset(i, self.pixels_cross, self.window_width, 0.0),
            offset(j, self.pixels_range, self.window_depth, self.range),
        ]
    }

    fn check_grid_index(&self, k: usize) -> Result<()> {
        if k >= self.num_unknowns() {
            return Err(Error::invalid(format!(
                "grid index {k} out of range 0..{}",
                self.num_unknowns()
            )));
        }
        Ok(())
    }
}

fn offset(i: usize, count: usize, extent: f64, center: f64) -> f64 {
    if count == 1 {
        center
    } else {
        center - extent / 2.0 + extent * i as f64 / (count - 1) as f64
    }
}

fn spread(count: usize, extent: f64, center: f64) -> Vec<f64> {
    (0..count).map(|i| offset(i, count, extent, center)).collect()
}

/// `exp(iωr/c) / (4πr)`.
pub fn green(r: f64, omega: f64, wave_speed: f64) -> C64 {
    math::cis(omega * r / wave_speed) / (4.0 * PI * r)
}

fn distance(x: [f64; 2], y: [f64; 2]) -> f64 {
    math::hypot(x[0] - y[0], x[1] - y[1])
}

/// Single-frequency Green's vector `g(y_k; ω_l)` over all receivers.
pub fn green_vector(config: &ImagingConfig, grid_point: usize, freq_index: usize) -> Result<Vec<C64>> {
    config.check_grid_index(grid_point)?;
    let freqs = config.frequencies();
    let f = *freqs
        .get(freq_index)
        .ok_or_else(|| Error::invalid(format!("frequency index {freq_index} out of range")))?;
    let y = config.grid_point(grid_point);
    let omega = 2.0 * PI * f;
    config
        .receivers()
        .into_iter()
        .map(|x| {
            let r = distance(x, y);
            if r == 0.0 {
                Err(Error::InvalidGeometry(format!(
                    "grid point {grid_point} coincides with a receiver"
                )))
            } else {
                Ok(green(r, omega, config.wave_speed))
            }
        })
        .collect()
}

/// Measurement matrix and the column norms it had before normalization.
pub fn build_measurement_matrix_with_norms(config: &ImagingConfig) -> Result<(DenseMatrix, Vec<f64>)> {
    config.validate()?;
    let n = config.data_dim();
    let k_total = config.num_unknowns();
    let receivers = config.receivers();
    let omegas: Vec<f64> = config.frequencies().iter().map(|f| 2.0 * PI * f).collect();
    let mut a = DenseMatrix::zeros(n, k_total)?;
    let mut dists = alloc::vec![0.0; receivers.len()];
    for k in 0..k_total {
        let y = config.grid_point(k);
        for (d, x) in dists.iter_mut().zip(&receivers) {
            *d = distance(*x, y);
            if *d == 0.0 {
                return Err(Error::InvalidGeometry(format!("grid point {k} coincides with a receiver")));
            }
        }
        let col = a.column_mut(k);
        for (l, &omega) in omegas.iter().enumerate() {
            for (r, &d) in dists.iter().enumerate() {
                col[r + receivers.len() * l] = green(d, omega, config.wave_speed);
            }
        }
    }
    let norms = a.normalize_columns()?;
    Ok((a, norms))
}

/// `n × K` matrix of unit-norm multi-frequency Green's vectors.
pub fn build_measurement_matrix(config: &ImagingConfig) -> Result<DenseMatrix> {
    build_measurement_matrix_with_norms(config).map(|(a, _)| a)
}

/// Point sources on grid nodes, amplitudes in normalized-column coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceScene {
    pub positions: Vec<usize>,
    pub amplitudes: Vec<C64>,
}

impl SourceScene {
    pub fn new(positions: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        Error::check_len("scene amplitudes", positions.len(), amplitudes.len())?;
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("scene positions must be distinct"));
        }
        if amplitudes.iter().any(|a| *a == ZERO || !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::invalid("scene amplitudes must be nonzero and finite"));
        }
        Ok(Self {
            positions,
            amplitudes,
        })
    }

    /// `M`.
    pub fn sparsity(&self) -> usize {
        self.positions.len()
    }

    /// Sorted support.
    pub fn support(&self) -> Vec<usize> {
        let mut s = self.positions.clone();
        s.sort_unstable();
        s
    }

    /// Length-`K` source vector `ρ`.
    pub fn to_dense(&self, k_total: usize) -> Result<Vec<C64>> {
        let mut rho = vector::zeros(k_total);
        for (&p, &a) in self.positions.iter().zip(&self.amplitudes) {
            if p >= k_total {
                return Err(Error::invalid(format!("scene position {p} out of range 0..{k_total}")));
            }
            rho[p] = a;
        }
        Ok(rho)
    }
}

/// `M` distinct uniform grid nodes with magnitudes uniform in `amp_range` and
/// uniform phases.
pub fn random_scene(config: &ImagingConfig, m: usize, amp_range: [f64; 2], seed: Seed) -> Result<SourceScene> {
    let k_total = config.num_unknowns();
    if m > k_total {
        return Err(Error::invalid(format!("sparsity {m} exceeds grid size {k_total}")));
    }
    let [lo, hi] = amp_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::invalid("amplitude range must satisfy 0 < lo <= hi"));
    }
    let mut rng = seed.rng();
    let positions = rand::seq::index::sample(&mut rng, k_total, m).into_vec();
    let amplitudes = (0..m)
        .map(|_| {
            let mag = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            uniform_phase(&mut rng) * mag
        })
        .collect();
    SourceScene::new(positions, amplitudes)
}

/// Noiseless data `b₀ = A ρ`.
pub fn synthesize_data(a: &DenseMatrix, scene: &SourceScene) -> Result<Vec<C64>> {
    let rho = scene.to_dense(a.cols())?;
    a.matvec(&rho)
}

/// Noise of prescribed ℓ2 norm, uniformly distributed in direction.
pub fn noise_vector(n: usize, norm: f64, seed: Seed) -> Result<Vec<C64>> {
    if !(norm >= 0.0 && norm.is_finite()) {
        return Err(Error::invalid("noise norm must be finite and non-negative"));
    }
    let mut e = sample_unit_sphere(n, seed)?;
    vector::scale(&mut e, norm);
    Ok(e)
}

/// Adds noise with `‖b₀‖₂ / ‖e‖₂ = snr`. An infinite `snr` adds nothing.
/// Returns `(b, e)`.
pub fn add_noise(b0: &[C64], snr: f64, seed: Seed) -> Result<(Vec<C64>, Vec<C64>)> {
    if !(snr > 0.0) {
        return Err(Error::invalid("snr must be positive"));
    }
    if snr.is_infinite() {
        return Ok((b0.to_vec(), vector::zeros(b0.len())));
    }
    let signal = vector::norm2(b0);
    if signal == 0.0 {
        return Err(Error::invalid("finite snr needs a nonzero signal; use noise_vector for pure noise"));
    }
    let e = noise_vector(b0.len(), signal / snr, seed)?;
    let b = b0.iter().zip(&e).map(|(x, y)| x + y).collect();
    Ok((b, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ImagingConfig {
        ImagingConfig {
            num_receivers: 5,
            num_frequencies: 3,
            pixels_cross: 4,
            pixels_range: 3,
            ..ImagingConfig::default()
        }
    }

    #[test]
    fn default_dimensions() {
        let cfg = ImagingConfig::default();
        assert_eq!(cfg.num_unknowns(), 1681);
        assert_eq!(cfg.data_dim(), 625);
        let f = cfg.frequencies();
        assert_eq!(f.len(), 25);
        assert!((f[0] - 50e9).abs() < 1.0 && (f[24] - 70e9).abs() < 1.0);
        let p = cfg.grid_point(1);
        let q = cfg.grid_point(cfg.pixels_range);
        assert!((p[1] - cfg.grid_point(0)[1] - 0.015).abs() < 1e-12);
        assert!((q[0] - cfg.grid_point(0)[0] - 0.005).abs() < 1e-12);
        let center = cfg.grid_point(cfg.num_unknowns() / 2);
        assert!(center[0].abs() < 1e-12 && (center[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn green_modulus_and_phase() {
        let g = green(0.5, 2.0 * PI * 60e9, 3e8);
        assert!((g.norm() - 1.0 / (4.0 * PI * 0.5)).abs() < 1e-15);
        assert!((g.norm() - 0.159_15).abs() < 1e-5);
        // ωr/c = 2π·60e9·0.5/3e8 = 200π ≡ 0 (mod 2π)
        assert!((g.arg()).abs() < 1e-9);
    }

    #[test]
    fn green_vector_phase_matches_hand_value() {
        let cfg = ImagingConfig::default();
        let k = 0;
        let y = cfg.grid_point(k);
        let x = cfg.receivers()[3];
        let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        let f = cfg.frequencies()[7];
        let expect = (2.0 * PI * f * r / cfg.wave_speed).rem_euclid(2.0 * PI);
        let g = green_vector(&cfg, k, 7).unwrap()[3];
        let got = g.arg().rem_euclid(2.0 * PI);
        let diff = (got - expect).abs();
        assert!(diff.min(2.0 * PI - diff) < 1e-6, "{got} vs {expect}");
        assert!((g.norm() - 1.0 / (4.0 * PI * r)).abs() < 1e-12);
    }

    #[test]
    fn coincident_point_rejected() {
        let cfg = ImagingConfig {
            num_receivers: 1,
            num_frequencies: 2,
            range: 0.5,
            window_depth: 1.0,
            pixels_cross: 1,
            pixels_range: 3,
            ..ImagingConfig::default()
        };
        // grid range coordinates 0.0, 0.5, 1.0; receiver at the origin
        assert!(matches!(green_vector(&cfg, 0, 0), Err(Error::InvalidGeometry(_))));
        assert!(matches!(build_measurement_matrix(&cfg), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn columns_are_unit_and_stacked_by_frequency() {
        let cfg = small();
        let (a, norms) = build_measurement_matrix_with_norms(&cfg).unwrap();
        assert_eq!((a.rows(), a.cols()), (15, 12));
        a.check_column_normalized(1e-12).unwrap();
        let k = 5;
        for l in 0..cfg.num_frequencies {
            let g = green_vector(&cfg, k, l).unwrap();
            for r in 0..cfg.num_receivers {
                let want = g[r] / norms[k];
                assert!((a.get(r + cfg.num_receivers * l, k) - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn scaling_covariance_of_phases() {
        let cfg = small();
        let scaled = ImagingConfig {
            aperture: cfg.aperture * 2.0,
            range: cfg.range * 2.0,
            window_width: cfg.window_width * 2.0,
            window_depth: cfg.window_depth * 2.0,
            central_frequency: cfg.central_frequency / 2.0,
            bandwidth: cfg.bandwidth / 2.0,
            ..cfg.clone()
        };
        let a = build_measurement_matrix(&cfg).unwrap();
        let b = build_measurement_matrix(&scaled).unwrap();
        // amplitudes scale uniformly per column and cancel under normalization
        for (x, y) in a.as_col_major().iter().zip(b.as_col_major()) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn scene_validation_and_synthesis() {
        let cfg = small();
        let a = build_measurement_matrix(&cfg).unwrap();
        let one = SourceScene::new(alloc::vec![4], alloc::vec![C64::new(1.0, 0.0)]).unwrap();
        let b0 = synthesize_data(&a, &one).unwrap();
        assert_eq!(b0.as_slice(), a.column(4));
        assert!((vector::norm2(&b0) - 1.0).abs() < 1e-12);
        assert!(synthesize_data(&a, &SourceScene::default()).unwrap().iter().all(|v| *v == ZERO));
        assert!(SourceScene::new(alloc::vec![1, 1], alloc::vec![C64::new(1.0, 0.0); 2]).is_err());
        assert!(SourceScene::new(alloc::vec![1], alloc::vec![ZERO]).is_err());
        let far = SourceScene::new(alloc::vec![99], alloc::vec![C64::new(1.0, 0.0)]).unwrap();
        assert!(synthesize_data(&a, &far).is_err());
    }

    #[test]
    fn random_scenes() {
        let cfg = small();
        assert_eq!(random_scene(&cfg, 0, [0.5, 1.0], Seed(1)).unwrap().sparsity(), 0);
        let full = random_scene(&cfg, 12, [0.5, 1.0], Seed(1)).unwrap();
        assert_eq!(full.support(), (0..12).collect::<Vec<_>>());
        assert!(random_scene(&cfg, 13, [0.5, 1.0], Seed(1)).is_err());
        let s = random_scene(&cfg, 5, [0.5, 1.0], Seed(3)).unwrap();
        assert_eq!(s, random_scene(&cfg, 5, [0.5, 1.0], Seed(3)).unwrap());
        for a in &s.amplitudes {
            assert!(a.norm() >= 0.5 - 1e-12 && a.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn noise_scaling() {
        let b0: Vec<C64> = (0..20).map(|i| C64::new(i as f64, 1.0)).collect();
        let (b, e) = add_noise(&b0, 1.0, Seed(1)).unwrap();
        assert!((vector::norm2(&e) - vector::norm2(&b0)).abs() <= 1e-12 * vector::norm2(&b0));
        for i in 0..20 {
            assert_eq!(b[i], b0[i] + e[i]);
        }
        let (b_inf, e_inf) = add_noise(&b0, f64::INFINITY, Seed(1)).unwrap();
        assert_eq!(b_inf, b0);
        assert!(e_inf.iter().all(|v| *v == ZERO));
        let (_, e2) = add_noise(&b0, 1.0, Seed(2)).unwrap();
        assert_ne!(e, e2);
        assert!((vector::norm2(&e) - vector::norm2(&e2)).abs() < 1e-12);
        assert!(add_noise(&b0, 0.0, Seed(1)).is_err());
        assert!(add_noise(&b0, -1.0, Seed(1)).is_err());
        assert!(add_noise(&vector::zeros(4), 1.0, Seed(1)).is_err());
    }
}
