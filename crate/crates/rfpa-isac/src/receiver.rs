//! Receiver chain: matched-filter bank for amplitude/phase symbols, the
//! single-atom sparse detector for hop codes, and the combined pulse decoder.
//!
//! Hop detection treats each equalized antenna stream as 1-sparse in the
//! chip-length Fourier basis: the strongest DFT bin identifies the hop after
//! the secret carrier offset is removed. Amplitude and phase symbols are
//! read from the antenna-summed stream through the matched-filter bank built
//! from the detected (or pre-shared) codes.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::codes;
use crate::config::WaveformConfig;
use crate::error::Result;
use crate::message::{self, ChipMessage, PulseMessage};
use crate::secrets::SecretSequences;
use crate::signal::ComplexSignal;
use crate::waveform::{chip_frequency, sample_phase};

/// Per-chip detector diagnostics.
#[derive(Debug, Clone)]
pub struct ChipDetection {
    /// Detected hop code per antenna (after clamping into `[0, K)`).
    pub c_hat: Vec<usize>,
    /// Matched-filter outputs per antenna.
    pub gamma: Vec<Complex64>,
    /// Winning DFT peak magnitude per antenna.
    pub peak_magnitudes: Vec<f64>,
    /// A detected frequency fell outside the hop grid and was clamped.
    pub out_of_band: bool,
}

/// Matched-filters chip `q` of an equalized pulse against the reference
/// waveforms for code vector `code`, returning one complex symbol per
/// antenna. A clean chip with amplitude `a` and phase `w` yields `a*e^{iw}`.
pub fn matched_filter_chip(
    x_hat: &ComplexSignal,
    cfg: &WaveformConfig,
    secrets: &SecretSequences,
    l: usize,
    q: usize,
    code: &[usize],
) -> Vec<Complex64> {
    let spc = cfg.samples_per_chip();
    let f_offset = secrets.f_offset(l, cfg);
    let t_offset = secrets.t_offset(l, cfg);
    // Antenna-summed stream over the chip window.
    let mut summed = vec![Complex64::new(0.0, 0.0); spc];
    for m in 0..x_hat.rows() {
        let row = &x_hat.row(m)[q * spc..(q + 1) * spc];
        for (acc, &v) in summed.iter_mut().zip(row) {
            *acc += v;
        }
    }
    let norm = 1.0 / spc as f64;
    code.iter()
        .map(|&hop| {
            let freq = chip_frequency(cfg, f_offset, hop);
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, &v) in summed.iter().enumerate() {
                let phase = sample_phase(cfg, freq, t_offset, q * spc + n);
                acc += v * Complex64::from_polar(1.0, -phase);
            }
            acc * norm
        })
        .collect()
}

/// Index of the nearest PSK constellation point to `angle`, ties resolved
/// toward the lower index.
pub fn nearest_psk_index(angle: f64, cfg: &WaveformConfig) -> usize {
    let mut best = 0usize;
    let mut best_dist = f64::INFINITY;
    for j in 0..cfg.j_psk {
        let mut d = (angle - cfg.psk_phase(j)) % std::f64::consts::TAU;
        if d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        if d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        let d = d.abs();
        if d < best_dist {
            best_dist = d;
            best = j;
        }
    }
    best
}

/// Index of the nearest ASK level to `magnitude`, ties toward lower index.
pub fn nearest_ask_index(magnitude: f64, cfg: &WaveformConfig) -> usize {
    let mut best = 0usize;
    let mut best_dist = f64::INFINITY;
    for j in 0..cfg.j_ask {
        let d = (magnitude - cfg.ask_level(j)).abs();
        if d < best_dist {
            best_dist = d;
            best = j;
        }
    }
    best
}

/// Maps matched-filter outputs to constellation indices:
/// the amplitude estimate is `|gamma|`, the phase estimate `arg(gamma)`.
pub fn demap_symbols(gamma: &[Complex64], cfg: &WaveformConfig) -> (Vec<usize>, Vec<usize>) {
    let amp_idx = gamma
        .iter()
        .map(|g| nearest_ask_index(g.norm(), cfg))
        .collect();
    let psk_idx = gamma
        .iter()
        .map(|g| nearest_psk_index(g.arg(), cfg))
        .collect();
    (amp_idx, psk_idx)
}

/// Raw single-atom detection for one chip: per antenna, the strongest DFT
/// bin converted to a hop index. Returns the clamped hops, the winning
/// magnitudes, the per-antenna hop-grid magnitudes and an out-of-band flag.
pub fn omp_detect_hops(
    x_hat: &ComplexSignal,
    cfg: &WaveformConfig,
    secrets: &SecretSequences,
    l: usize,
    q: usize,
) -> (Vec<usize>, Vec<f64>, Vec<Vec<f64>>, bool) {
    let spc = cfg.samples_per_chip();
    let f_offset = secrets.f_offset(l, cfg);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(spc);
    let mut c_hat = Vec::with_capacity(x_hat.rows());
    let mut peaks = Vec::with_capacity(x_hat.rows());
    let mut grid_mags = Vec::with_capacity(x_hat.rows());
    let mut out_of_band = false;
    let bin_hz = cfg.f_s / spc as f64;
    for m in 0..x_hat.rows() {
        let mut buf: Vec<Complex64> = x_hat.row(m)[q * spc..(q + 1) * spc].to_vec();
        fft.process(&mut buf);
        let (best_bin, best_mag) = buf
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |(bi, bm), (i, v)| {
                let mag = v.norm();
                if mag > bm {
                    (i, mag)
                } else {
                    (bi, bm)
                }
            });
        let freq = best_bin as f64 * bin_hz;
        let hop = ((freq - f_offset) / cfg.delta_f).round();
        let clamped = hop.clamp(0.0, (cfg.k - 1) as f64) as usize;
        if hop < 0.0 || hop > (cfg.k - 1) as f64 {
            out_of_band = true;
        }
        // Magnitudes on the hop grid, used to resolve duplicate detections.
        let mags: Vec<f64> = (0..cfg.k)
            .map(|kk| {
                let f = chip_frequency(cfg, f_offset, kk);
                let bin = ((f / bin_hz).round() as usize) % spc;
                buf[bin].norm()
            })
            .collect();
        c_hat.push(clamped);
        peaks.push(best_mag);
        grid_mags.push(mags);
    }
    (c_hat, peaks, grid_mags, out_of_band)
}

/// Enforces distinct hops across antennas. Antennas keep their raw
/// detection when possible; conflicting antennas (processed in descending
/// peak order) move to their strongest unused hop.
fn resolve_duplicates(
    c_hat: &[usize],
    peaks: &[f64],
    grid_mags: &[Vec<f64>],
    k: usize,
) -> Vec<usize> {
    let m = c_hat.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| peaks[b].partial_cmp(&peaks[a]).unwrap().then(a.cmp(&b)));
    let mut used = vec![false; k];
    let mut resolved = vec![usize::MAX; m];
    for &ant in &order {
        let want = c_hat[ant];
        let hop = if !used[want] {
            want
        } else {
            (0..k)
                .filter(|&kk| !used[kk])
                .max_by(|&a, &b| {
                    grid_mags[ant][a]
                        .partial_cmp(&grid_mags[ant][b])
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .expect("M <= K leaves a free hop")
        };
        used[hop] = true;
        resolved[ant] = hop;
    }
    resolved
}

/// Decoded pulse: recovered bits plus per-chip diagnostics.
#[derive(Debug, Clone)]
pub struct DecodedPulse {
    pub bits: Vec<u8>,
    pub detections: Vec<ChipDetection>,
}

/// Debug CSV of per-chip detections
/// (`chip,antenna,c_hat,gamma_re,gamma_im,peak,out_of_band`).
pub fn detections_csv(detections: &[ChipDetection]) -> String {
    let mut out = String::from("chip,antenna,c_hat,gamma_re,gamma_im,peak,out_of_band\n");
    for (q, det) in detections.iter().enumerate() {
        for m in 0..det.c_hat.len() {
            let peak = det.peak_magnitudes.get(m).copied().unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{q},{m},{},{},{},{},{}\n",
                det.c_hat[m], det.gamma[m].re, det.gamma[m].im, peak, det.out_of_band
            ));
        }
    }
    out
}

/// Full receiver for one pulse: equalize, detect hop codes (or take the
/// pre-shared ones), matched-filter, demap, and reassemble the bit string.
///
/// Detection anomalies never raise errors here; they surface as bit errors.
pub fn decode_pulse(
    r: &ComplexSignal,
    h: &crate::channel::ChannelMatrix,
    cfg: &WaveformConfig,
    secrets: &SecretSequences,
    l: usize,
) -> Result<DecodedPulse> {
    let x_hat = crate::channel::equalize(r, h)?;
    decode_equalized(&x_hat, cfg, secrets, l)
}

/// Decoder stage after equalization; split out so tests can feed a clean
/// transmit signal directly.
pub fn decode_equalized(
    x_hat: &ComplexSignal,
    cfg: &WaveformConfig,
    secrets: &SecretSequences,
    l: usize,
) -> Result<DecodedPulse> {
    let m_fact = codes::factorial(cfg.m)?;
    let sim_bits = message::sim_bits_per_chip(cfg)?;
    let sim_cap = (1u128 << sim_bits) - 1;
    let mut chips = Vec::with_capacity(cfg.q);
    let mut detections = Vec::with_capacity(cfg.q);
    for q in 0..cfg.q {
        let (code, gamma, peaks, oob) = if cfg.scheme.embeds_codes() {
            let (raw, peaks, grid_mags, oob) = omp_detect_hops(x_hat, cfg, secrets, l, q);
            let code = resolve_duplicates(&raw, &peaks, &grid_mags, cfg.k);
            let gamma = matched_filter_chip(x_hat, cfg, secrets, l, q, &code);
            (code, gamma, peaks, oob)
        } else {
            let code = message::preshared_code(cfg, q);
            let gamma = matched_filter_chip(x_hat, cfg, secrets, l, q, &code);
            (code, gamma, Vec::new(), false)
        };

        let (s_index, p_index) = if cfg.scheme.embeds_codes() {
            let (s, p) = codes::decompose_code(&code, cfg)?;
            // Indices beyond the encodable range are clamped; the error
            // shows up as bit errors, not an exception.
            if s * m_fact + p > sim_cap {
                let combined = sim_cap;
                (combined / m_fact, combined % m_fact)
            } else {
                (s, p)
            }
        } else {
            codes::decompose_code(&code, cfg)?
        };

        let (amp_idx, psk_idx) = demap_symbols(&gamma, cfg);
        detections.push(ChipDetection {
            c_hat: code.clone(),
            gamma: gamma.clone(),
            peak_magnitudes: peaks,
            out_of_band: oob,
        });
        chips.push(ChipMessage {
            amp_idx,
            psk_idx,
            code,
            s_index,
            p_index,
        });
    }
    let msg = PulseMessage { chips };
    let bits = message::decode_message(&msg, cfg)?;
    Ok(DecodedPulse { bits, detections })
}
