//! Flat-fading wiretap channel, AWGN injection, pseudo-inverse equalization
//! and the reciprocal channel-probing model behind secret generation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::WaveformConfig;
use crate::error::{Error, Result};
use crate::message;
use crate::signal::ComplexSignal;

/// Draws a circularly symmetric complex Gaussian with total variance `var`.
#[inline]
pub fn complex_normal<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var * 0.5).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Flat-fading channel matrix, constant over one pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: Vec<Complex64>,
    /// Receive antennas (rows).
    pub n: usize,
    /// Transmit antennas (columns).
    pub m: usize,
    /// Pulse the matrix belongs to.
    pub pulse: usize,
}

impl ChannelMatrix {
    pub fn from_entries(entries: Vec<Complex64>, n: usize, m: usize, pulse: usize) -> Self {
        assert_eq!(entries.len(), n * m);
        Self { entries, n, m, pulse }
    }

    pub fn identity(n: usize, pulse: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { entries, n, m: n, pulse }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.m + j]
    }
}

/// Draws an `N x M` matrix of i.i.d. CN(0,1) entries for pulse `l`.
pub fn draw_channel<R: Rng>(cfg: &WaveformConfig, l: usize, rng: &mut R) -> ChannelMatrix {
    let entries = (0..cfg.n * cfg.m)
        .map(|_| complex_normal(rng, 1.0))
        .collect();
    ChannelMatrix::from_entries(entries, cfg.n, cfg.m, l)
}

/// Applies the channel and adds white noise: `r = H x + w` per sample, with
/// `w ~ CN(0, noise_var)` on every receive antenna.
pub fn transmit<R: Rng>(
    x: &ComplexSignal,
    h: &ChannelMatrix,
    noise_var: f64,
    rng: &mut R,
) -> Result<ComplexSignal> {
    if h.m != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "channel expects {} transmit antennas, signal has {}",
            h.m,
            x.rows()
        )));
    }
    let mut out = ComplexSignal::zeros(h.n, x.cols(), x.f_s, x.t0);
    for i in 0..h.n {
        let row = out.row_mut(i);
        for j in 0..h.m {
            let gain = h.get(i, j);
            for (dst, &src) in row.iter_mut().zip(x.row(j)) {
                *dst += gain * src;
            }
        }
        if noise_var > 0.0 {
            for dst in row.iter_mut() {
                *dst += complex_normal(rng, noise_var);
            }
        }
    }
    Ok(out)
}

/// Noise-only observation of the same shape a received pulse would have.
pub fn noise_only<R: Rng>(
    n: usize,
    cols: usize,
    f_s: f64,
    t0: f64,
    noise_var: f64,
    rng: &mut R,
) -> ComplexSignal {
    let mut out = ComplexSignal::zeros(n, cols, f_s, t0);
    if noise_var > 0.0 {
        for v in out.iter_mut() {
            *v = complex_normal(rng, noise_var);
        }
    }
    out
}

/// Pseudo-inverse of the channel: `(H^H H)^{-1} H^H`, as an `M x N` matrix.
pub fn pseudo_inverse(h: &ChannelMatrix) -> Result<Vec<Complex64>> {
    let mat = DMatrix::from_fn(h.n, h.m, |i, j| h.get(i, j));
    let svd = mat.svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    if !(max_sv > 0.0) || min_sv / max_sv < 1e-10 {
        return Err(Error::IllConditioned);
    }
    let pinv = svd
        .pseudo_inverse(max_sv * 1e-13)
        .map_err(|_| Error::IllConditioned)?;
    Ok(pinv.iter().cloned().collect::<Vec<_>>())
}

/// Zero-forcing equalization: applies the channel pseudo-inverse to every
/// sample column, recovering the transmitted vector up to noise.
pub fn equalize(r: &ComplexSignal, h: &ChannelMatrix) -> Result<ComplexSignal> {
    if h.n != r.rows() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} receive antennas, signal has {}",
            h.n,
            r.rows()
        )));
    }
    // nalgebra stores column-major: pinv[(i, j)] = pinv_flat[j * m + i].
    let pinv = pseudo_inverse(h)?;
    let mut out = ComplexSignal::zeros(h.m, r.cols(), r.f_s, r.t0);
    for i in 0..h.m {
        let row = out.row_mut(i);
        for j in 0..h.n {
            let gain = pinv[j * h.m + i];
            for (dst, &src) in row.iter_mut().zip(r.row(j)) {
                *dst += gain * src;
            }
        }
    }
    Ok(out)
}

/// Adds white complex Gaussian noise of total variance `var` in place.
pub fn add_awgn<R: Rng>(signal: &mut ComplexSignal, var: f64, rng: &mut R) {
    if var > 0.0 {
        for v in signal.iter_mut() {
            *v += complex_normal(rng, var);
        }
    }
}

/// Per-sample noise variance realizing a target Eb/N0.
///
/// `E_s` is the mean per-sample transmit energy summed over the array, so
/// `E_s / bits_per_sample` is the transmitted energy per information bit.
/// BER experiments apply this variance at the equalized-symbol level, which
/// keeps the curves comparable across schemes and antenna counts.
pub fn noise_var_for_ebn0(cfg: &WaveformConfig, ebn0_db: f64) -> Result<f64> {
    let per_antenna_power = if cfg.scheme.embeds_amplitude() {
        cfg.mean_ask_power()
    } else {
        1.0
    };
    let e_s = cfg.m as f64 * per_antenna_power;
    let bits_per_sample =
        message::bits_per_pulse(cfg)? as f64 / cfg.samples_per_pulse() as f64;
    Ok((e_s / bits_per_sample) * 10f64.powf(-ebn0_db / 10.0))
}

/// Correlated channel-impulse-response observations of the three parties.
#[derive(Debug, Clone)]
pub struct CIRSampleSet {
    pub alice: Vec<Complex64>,
    pub bob: Vec<Complex64>,
    pub eve: Vec<Complex64>,
    pub snr_db: f64,
}

/// Bi-directional probing model: Alice and Bob observe a shared latent
/// coefficient through independent measurement noise, Eve observes an
/// independent channel.
pub fn probe_cir<R: Rng>(len: usize, snr_db: f64, rng: &mut R) -> CIRSampleSet {
    let noise_var = 10f64.powf(-snr_db / 10.0);
    let mut alice = Vec::with_capacity(len);
    let mut bob = Vec::with_capacity(len);
    let mut eve = Vec::with_capacity(len);
    for _ in 0..len {
        let latent = complex_normal(rng, 1.0);
        alice.push(latent + complex_normal(rng, noise_var));
        bob.push(latent + complex_normal(rng, noise_var));
        eve.push(complex_normal(rng, 1.0));
    }
    CIRSampleSet { alice, bob, eve, snr_db }
}

impl CIRSampleSet {
    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    /// CSV dump (`index,re_a,im_a,re_b,im_b,re_e,im_e`) for inspection.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re_a,im_a,re_b,im_b,re_e,im_e\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                i,
                self.alice[i].re,
                self.alice[i].im,
                self.bob[i].re,
                self.bob[i].im,
                self.eve[i].re,
                self.eve[i].im
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn corr(a: &[Complex64], b: &[Complex64]) -> f64 {
        let n = a.len() as f64;
        let ma: Complex64 = a.iter().sum::<Complex64>() / n;
        let mb: Complex64 = b.iter().sum::<Complex64>() / n;
        let cov: Complex64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - ma) * (y - mb).conj())
            .sum::<Complex64>()
            / n;
        let va: f64 = a.iter().map(|x| (x - ma).norm_sqr()).sum::<f64>() / n;
        let vb: f64 = b.iter().map(|y| (y - mb).norm_sqr()).sum::<f64>() / n;
        cov.norm() / (va * vb).sqrt()
    }

    #[test]
    fn channel_draws_are_deterministic_per_seed() {
        let cfg = WaveformConfig::default_config();
        let a = draw_channel(&cfg, 0, &mut stream_rng(9, [0, 0, 0]));
        let b = draw_channel(&cfg, 0, &mut stream_rng(9, [0, 0, 0]));
        assert_eq!(a, b);
        let c = draw_channel(&cfg, 0, &mut stream_rng(10, [0, 0, 0]));
        assert_ne!(a, c);
    }

    #[test]
    fn channel_gain_has_unit_mean_square() {
        let mut raw = crate::config::RawConfig::defaults();
        raw.set("M", "1").unwrap();
        raw.set("N", "1").unwrap();
        let cfg = crate::config::validate_config(&raw).unwrap();
        let mut rng = stream_rng(11, [0, 0, 0]);
        let mean: f64 = (0..100_000)
            .map(|l| draw_channel(&cfg, l, &mut rng).get(0, 0).norm_sqr())
            .sum::<f64>()
            / 1e5;
        assert!((mean - 1.0).abs() < 0.02, "mean |h|^2 = {mean}");
    }

    #[test]
    fn noiseless_identity_channel_is_transparent() {
        let cfg = WaveformConfig::default_config();
        let mut x = ComplexSignal::zeros(cfg.n, 16, cfg.f_s, 0.0);
        for (i, v) in x.iter_mut().enumerate() {
            *v = Complex64::new(i as f64, -(i as f64));
        }
        let h = ChannelMatrix::identity(cfg.n, 0);
        let r = transmit(&x, &h, 0.0, &mut stream_rng(0, [0; 3])).unwrap();
        assert_eq!(r, x);
        let xhat = equalize(&r, &h).unwrap();
        for (a, b) in xhat.iter().zip(x.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn injected_noise_variance_matches() {
        let x = ComplexSignal::zeros(1, 100_000, 1.0, 0.0);
        let h = ChannelMatrix::identity(1, 0);
        let r = transmit(&x, &h, 1.0, &mut stream_rng(13, [0; 3])).unwrap();
        let var = r.energy() / 1e5;
        assert!((var - 1.0).abs() < 0.02, "empirical variance {var}");
    }

    #[test]
    fn noiseless_equalization_round_trips() {
        let cfg = WaveformConfig::default_config();
        let mut x = ComplexSignal::zeros(cfg.m, 64, cfg.f_s, 0.0);
        let mut rng = stream_rng(14, [0; 3]);
        for v in x.iter_mut() {
            *v = complex_normal(&mut rng, 1.0);
        }
        let h = draw_channel(&cfg, 0, &mut rng);
        let r = transmit(&x, &h, 0.0, &mut rng).unwrap();
        let xhat = equalize(&r, &h).unwrap();
        let num: f64 = xhat
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!((num / x.energy()).sqrt() < 1e-9);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let cfg = WaveformConfig::default_config();
        let mut rng = stream_rng(21, [0; 3]);
        let h = draw_channel(&cfg, 0, &mut rng);
        let wrong_tx = ComplexSignal::zeros(cfg.m + 1, 8, cfg.f_s, 0.0);
        assert!(matches!(
            transmit(&wrong_tx, &h, 0.0, &mut rng),
            Err(Error::DimensionMismatch(_))
        ));
        let wrong_rx = ComplexSignal::zeros(cfg.n + 1, 8, cfg.f_s, 0.0);
        assert!(matches!(
            equalize(&wrong_rx, &h),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rank_deficient_channel_is_rejected() {
        let cfg = WaveformConfig::default_config();
        let mut rng = stream_rng(15, [0; 3]);
        let mut h = draw_channel(&cfg, 0, &mut rng);
        // Duplicate one column.
        for i in 0..h.n {
            let v = h.get(i, 0);
            h.entries[i * h.m + 1] = v;
        }
        let r = ComplexSignal::zeros(h.n, 8, cfg.f_s, 0.0);
        assert!(matches!(equalize(&r, &h), Err(Error::IllConditioned)));
    }

    #[test]
    fn probing_is_reciprocal_without_noise() {
        let set = probe_cir(64, f64::INFINITY, &mut stream_rng(16, [0; 3]));
        for (a, b) in set.alice.iter().zip(&set.bob) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn probing_correlation_matches_analytic_value() {
        let set = probe_cir(100_000, 10.0, &mut stream_rng(17, [0; 3]));
        let rho = corr(&set.alice, &set.bob);
        let expected = 1.0 / 1.1;
        assert!((rho - expected).abs() < 0.01, "corr {rho} vs {expected}");
    }

    #[test]
    fn eve_observations_are_uncorrelated() {
        let set = probe_cir(10_000, 20.0, &mut stream_rng(20, [0; 3]));
        let rho = corr(&set.alice, &set.eve);
        assert!(rho < 0.02, "eve correlation {rho}");
    }

    #[test]
    fn post_equalization_snr_is_calibrated() {
        // Identity channel, known per-sample signal power, 10 dB target.
        let n = 10_000;
        let mut x = ComplexSignal::zeros(4, n, 1.0, 0.0);
        for v in x.iter_mut() {
            *v = Complex64::new(1.0, 0.0);
        }
        let signal_power = 1.0;
        let target_db = 10.0;
        let noise_var = signal_power / 10f64.powf(target_db / 10.0);
        let h = ChannelMatrix::identity(4, 0);
        let r = transmit(&x, &h, noise_var, &mut stream_rng(19, [0; 3])).unwrap();
        let xhat = equalize(&r, &h).unwrap();
        let noise_power: f64 = xhat
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / (4 * n) as f64;
        let measured_db = 10.0 * (signal_power / noise_power).log10();
        assert!(
            (measured_db - target_db).abs() < 0.5,
            "measured {measured_db} dB"
        );
    }
}
