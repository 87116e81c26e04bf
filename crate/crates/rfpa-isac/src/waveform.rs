//! Synthesis of sampled and analytically evaluable agile FH pulses.
//!
//! A pulse consists of `Q` rectangular chips. During chip `q` of pulse `l`,
//! antenna `m` transmits
//!
//! ```text
//! a * exp(i*Omega) * exp(i*2*pi*(f_l + c*delta_f)*(t - l*T_p - T_l))
//! ```
//!
//! where `f_l` and `T_l` come from the shared agility secrets. The chip
//! exponential is referenced to the agile pulse start; setting
//! `legacy_eq6_timebase` references it to the PRI boundary instead.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::config::WaveformConfig;
use crate::message::PulseMessage;
use crate::secrets::SecretSequences;
use crate::signal::ComplexSignal;

/// Phase of the chip exponential at offset `s` samples into the active
/// segment of a pulse with agility offsets `(f_offset, t_offset)`.
#[inline]
pub fn sample_phase(
    cfg: &WaveformConfig,
    freq: f64,
    t_offset: f64,
    sample_in_pulse: usize,
) -> f64 {
    let t_rel = sample_in_pulse as f64 / cfg.f_s;
    if cfg.legacy_eq6_timebase {
        TAU * freq * (t_rel + t_offset)
    } else {
        TAU * freq * t_rel
    }
}

/// Baseband frequency of antenna `m` during chip `q`.
#[inline]
pub fn chip_frequency(cfg: &WaveformConfig, f_offset: f64, hop: usize) -> f64 {
    f_offset + hop as f64 * cfg.delta_f
}

/// Samples the active segment of pulse `l`.
///
/// Returns `M x (tau * f_s)` samples starting at `t0 = l*T_p + T_l`; the
/// inter-pulse guard is not materialized.
pub fn generate_pulse(
    cfg: &WaveformConfig,
    msg: &PulseMessage,
    secrets: &SecretSequences,
    l: usize,
) -> ComplexSignal {
    assert_eq!(msg.chips.len(), cfg.q, "message must carry Q chips");
    assert!(l < secrets.len(), "pulse index outside the coding period");
    let spc = cfg.samples_per_chip();
    let t_offset = secrets.t_offset(l, cfg);
    let f_offset = secrets.f_offset(l, cfg);
    let t0 = l as f64 * cfg.t_p + t_offset;
    let mut out = ComplexSignal::zeros(cfg.m, cfg.samples_per_pulse(), cfg.f_s, t0);
    for m in 0..cfg.m {
        let row = out.row_mut(m);
        for (q, chip) in msg.chips.iter().enumerate() {
            let amp = chip.amplitude(m, cfg);
            let sym_phase = chip.phase(m, cfg);
            let freq = chip_frequency(cfg, f_offset, chip.code[m]);
            for n in 0..spc {
                let s = q * spc + n;
                let phase = sym_phase + sample_phase(cfg, freq, t_offset, s);
                row[s] = Complex64::from_polar(amp, phase);
            }
        }
    }
    out
}

/// Samples a full coding period of `L * T_p` seconds, guard intervals
/// included as zeros.
pub fn generate_period(
    cfg: &WaveformConfig,
    msgs: &[PulseMessage],
    secrets: &SecretSequences,
) -> ComplexSignal {
    assert_eq!(msgs.len(), secrets.len());
    let period_samples = (cfg.l as f64 * cfg.t_p * cfg.f_s).round() as usize;
    let mut out = ComplexSignal::zeros(cfg.m, period_samples, cfg.f_s, 0.0);
    for (l, msg) in msgs.iter().enumerate() {
        let pulse = generate_pulse(cfg, msg, secrets, l);
        let start = (pulse.t0 * cfg.f_s).round() as usize;
        for m in 0..cfg.m {
            let dst = out.row_mut(m);
            for (n, &v) in pulse.row(m).iter().enumerate() {
                dst[start + n] = v;
            }
        }
    }
    out
}

/// One rectangular chip of an analytically evaluable signal.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticChip {
    /// Absolute start time in seconds (inclusive).
    pub start: f64,
    /// Absolute stop time in seconds (exclusive).
    pub stop: f64,
    pub amp: f64,
    /// Constant symbol phase in radians.
    pub phase: f64,
    /// Baseband frequency in Hz.
    pub freq: f64,
    /// Time the chip exponential is referenced to.
    pub phase_ref: f64,
}

impl AnalyticChip {
    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.amp, self.phase + TAU * self.freq * (t - self.phase_ref))
    }
}

/// Single-antenna waveform described as a sorted list of disjoint chips,
/// exactly evaluable at any time instant.
#[derive(Debug, Clone)]
pub struct AnalyticSignal {
    chips: Vec<AnalyticChip>,
    pub f_s: f64,
}

impl AnalyticSignal {
    /// Builds the antenna-`m` waveform over the whole coding period.
    pub fn new(
        cfg: &WaveformConfig,
        msgs: &[PulseMessage],
        secrets: &SecretSequences,
        m: usize,
    ) -> Self {
        assert_eq!(msgs.len(), secrets.len());
        let mut chips = Vec::with_capacity(msgs.len() * cfg.q);
        for (l, msg) in msgs.iter().enumerate() {
            let t_offset = secrets.t_offset(l, cfg);
            let f_offset = secrets.f_offset(l, cfg);
            let t0 = l as f64 * cfg.t_p + t_offset;
            let phase_ref = if cfg.legacy_eq6_timebase {
                l as f64 * cfg.t_p
            } else {
                t0
            };
            for (q, chip) in msg.chips.iter().enumerate() {
                chips.push(AnalyticChip {
                    start: t0 + q as f64 * cfg.delta_t,
                    stop: t0 + (q + 1) as f64 * cfg.delta_t,
                    amp: chip.amplitude(m, cfg),
                    phase: chip.phase(m, cfg),
                    freq: chip_frequency(cfg, f_offset, chip.code[m]),
                    phase_ref,
                });
            }
        }
        Self { chips, f_s: cfg.f_s }
    }

    /// Value at absolute time `t`; zero outside every chip window.
    pub fn eval(&self, t: f64) -> Complex64 {
        let idx = self.chips.partition_point(|c| c.stop <= t);
        match self.chips.get(idx) {
            Some(c) if c.start <= t => c.eval(t),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// All chip boundary times, sorted.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.chips.len() + 1);
        for c in &self.chips {
            out.push(c.start);
            out.push(c.stop);
        }
        out.dedup();
        out
    }

    /// Maximal intervals on which the signal is non-zero.
    pub fn support(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for c in &self.chips {
            match out.last_mut() {
                Some(last) if (c.start - last.1).abs() < 1e-18 => last.1 = c.stop,
                _ => out.push((c.start, c.stop)),
            }
        }
        out
    }

    pub fn chips(&self) -> &[AnalyticChip] {
        &self.chips
    }
}
