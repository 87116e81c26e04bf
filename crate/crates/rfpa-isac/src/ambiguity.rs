//! MIMO ambiguity function of agile FH waveforms.
//!
//! The closed form integrates each pair of overlapping chip windows
//! analytically: with overlap limits `a1`/`b1` inside a chip of duration
//! `dt`, the chip-pair contribution is `e^{b2} (e^{a2 b1} - e^{a2 a1}) / a2`
//! with purely imaginary exponent slopes, replaced by its analytic limit
//! when the frequency mismatch vanishes. The numeric oracle integrates the
//! same correlation by midpoint quadrature on analytically regenerated
//! signal values and shares none of that algebra.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::config::{Scheme, WaveformConfig};
use crate::error::{Error, Result};
use crate::message::{self, PulseMessage};
use crate::rng::{stream_rng, tag};
use crate::secrets::SecretSequences;
use crate::waveform::AnalyticSignal;

#[inline]
fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Delay-Doppler-angle point at which the ambiguity function is evaluated.
#[derive(Debug, Clone, Copy)]
pub struct AFQuery {
    /// Delay in seconds.
    pub tau: f64,
    /// Doppler shift in Hz.
    pub nu: f64,
    /// Normalized spatial frequency of the probed target.
    pub f: f64,
    /// Normalized spatial frequency assumed by the filter.
    pub f_prime: f64,
    /// Array phase scale (half-wavelength spacing convention).
    pub gamma_arr: f64,
}

impl AFQuery {
    pub fn delay_doppler(tau: f64, nu: f64) -> Self {
        Self {
            tau,
            nu,
            f: 0.0,
            f_prime: 0.0,
            gamma_arr: 0.5,
        }
    }
}

/// Relative frequency-mismatch threshold below which the degenerate
/// integral branch is used.
const DEGENERATE_SLOPE_THRESHOLD: f64 = 1e-6;

/// One analytically integrated chip-pair overlap.
///
/// `w` is the imaginary slope of the exponent (rad/s), `phase` the constant
/// exponent phase, `[a1, b1]` the overlap interval.
#[inline]
fn integral_term(w: f64, phase: f64, a1: f64, b1: f64, dt: f64) -> Complex64 {
    if (w * dt).abs() < DEGENERATE_SLOPE_THRESHOLD {
        cis(phase + w * a1) * (b1 - a1)
    } else {
        (cis(phase + w * b1) - cis(phase + w * a1)) / Complex64::new(0.0, w)
    }
}

/// Per-pulse waveform description laid out for the ambiguity sums.
struct WaveTable {
    /// `amp * e^{i*Omega}` indexed `[l][q][m]`.
    sym: Vec<Complex64>,
    /// Chip baseband frequency indexed `[l][q][m]`.
    freq: Vec<f64>,
    /// Absolute pulse start times `t_l`.
    t_start: Vec<f64>,
    /// Extra timebase phase per pulse (zero unless the legacy reference is
    /// active): the chip exponential gains `e^{i 2 pi F T_l}`.
    t_extra: Vec<f64>,
    q: usize,
    m: usize,
}

impl WaveTable {
    fn new(cfg: &WaveformConfig, msgs: &[PulseMessage], secrets: &SecretSequences) -> Self {
        assert_eq!(msgs.len(), secrets.len());
        let (l_n, q_n, m_n) = (msgs.len(), cfg.q, cfg.m);
        let mut sym = Vec::with_capacity(l_n * q_n * m_n);
        let mut freq = Vec::with_capacity(l_n * q_n * m_n);
        let mut t_start = Vec::with_capacity(l_n);
        let mut t_extra = Vec::with_capacity(l_n);
        for (l, msg) in msgs.iter().enumerate() {
            let f_offset = secrets.f_offset(l, cfg);
            let t_offset = secrets.t_offset(l, cfg);
            t_start.push(l as f64 * cfg.t_p + t_offset);
            t_extra.push(if cfg.legacy_eq6_timebase { t_offset } else { 0.0 });
            for chip in &msg.chips {
                for m in 0..m_n {
                    sym.push(Complex64::from_polar(
                        chip.amplitude(m, cfg),
                        chip.phase(m, cfg),
                    ));
                    freq.push(crate::waveform::chip_frequency(cfg, f_offset, chip.code[m]));
                }
            }
        }
        Self {
            sym,
            freq,
            t_start,
            t_extra,
            q: q_n,
            m: m_n,
        }
    }

    #[inline]
    fn idx(&self, l: usize, q: usize, m: usize) -> usize {
        (l * self.q + q) * self.m + m
    }
}

/// Evaluates the ambiguity sum for a set of weighted antenna pairs.
fn af_pairs_sum(
    cfg: &WaveformConfig,
    table: &WaveTable,
    pairs: &[(usize, usize, Complex64)],
    tau: f64,
    nu: f64,
) -> Complex64 {
    let dt = cfg.delta_t;
    let q_n = table.q;
    let l_n = table.t_start.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..l_n {
        let t_l = table.t_start[l];
        for lp in 0..l_n {
            let t_lp = table.t_start[lp];
            // Window offset between the two pulses at this delay.
            let d = t_lp - t_l - tau;
            if d.abs() >= q_n as f64 * dt {
                continue;
            }
            let g_center = (-d / dt).floor() as i64;
            for q in 0..q_n {
                for g in (g_center - 1)..=(g_center + 1) {
                    let qp = q as i64 + g;
                    if qp < 0 || qp >= q_n as i64 {
                        continue;
                    }
                    let qp = qp as usize;
                    let shift = (qp as f64 - q as f64) * dt + d;
                    let a1 = shift.max(0.0);
                    let b1 = (shift + dt).min(dt);
                    if b1 <= a1 {
                        continue;
                    }
                    let t_chip = q as f64 * dt;
                    for &(m, mp, weight) in pairs {
                        let fm = table.freq[table.idx(l, q, m)];
                        let fmp = table.freq[table.idx(lp, qp, mp)];
                        let sym = table.sym[table.idx(l, q, m)]
                            * table.sym[table.idx(lp, qp, mp)].conj();
                        let w = TAU * (fm - fmp + nu);
                        let phase = TAU
                            * (fm * t_chip - fmp * (t_chip + t_l - t_lp + tau)
                                + nu * (t_chip + t_l)
                                + fm * table.t_extra[l]
                                - fmp * table.t_extra[lp]);
                        acc += weight * sym * integral_term(w, phase, a1, b1, dt);
                    }
                }
            }
        }
    }
    acc
}

/// Closed-form cross ambiguity between antennas `m` and `m_prime`.
pub fn cross_af_closed(
    cfg: &WaveformConfig,
    msgs: &[PulseMessage],
    secrets: &SecretSequences,
    m: usize,
    m_prime: usize,
    tau: f64,
    nu: f64,
) -> Complex64 {
    let table = WaveTable::new(cfg, msgs, secrets);
    af_pairs_sum(
        cfg,
        &table,
        &[(m, m_prime, Complex64::new(1.0, 0.0))],
        tau,
        nu,
    )
}

/// Closed-form MIMO ambiguity function: cross terms combined with the
/// spatial steering phases.
pub fn mimo_af(
    cfg: &WaveformConfig,
    msgs: &[PulseMessage],
    secrets: &SecretSequences,
    query: &AFQuery,
) -> Complex64 {
    let table = WaveTable::new(cfg, msgs, secrets);
    mimo_af_with_table(cfg, &table, query)
}

fn mimo_af_with_table(cfg: &WaveformConfig, table: &WaveTable, query: &AFQuery) -> Complex64 {
    let mut pairs = Vec::with_capacity(cfg.m * cfg.m);
    for m in 0..cfg.m {
        for mp in 0..cfg.m {
            let w = cis(TAU * (query.f * m as f64 - query.f_prime * mp as f64) * query.gamma_arr);
            pairs.push((m, mp, w));
        }
    }
    af_pairs_sum(cfg, table, &pairs, query.tau, query.nu)
}

/// Direct quadrature evaluation of the cross ambiguity integral between two
/// analytically described antenna signals.
///
/// Integration runs midpoint sums at `f_s * oversample` resolution on the
/// piecewise-smooth segments of the integrand; signal values are regenerated
/// from the chip description, never interpolated.
pub fn af_numeric_oracle(
    x_m: &AnalyticSignal,
    x_mp: &AnalyticSignal,
    tau: f64,
    nu: f64,
    oversample: usize,
) -> Result<Complex64> {
    if x_m.f_s != x_mp.f_s {
        return Err(Error::SampleRateMismatch(x_m.f_s, x_mp.f_s));
    }
    assert!(oversample >= 1);
    let segments = integration_segments(x_m, x_mp, tau);
    let step_target = 1.0 / (x_m.f_s * oversample as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for (s0, s1) in segments {
        let mid = 0.5 * (s0 + s1);
        let (Some(ca), Some(cb)) = (x_m.chip_at(mid), x_mp.chip_at(mid + tau)) else {
            continue;
        };
        let n_sub = (((s1 - s0) / step_target).ceil() as usize).max(1);
        let h = (s1 - s0) / n_sub as f64;
        let mut seg = Complex64::new(0.0, 0.0);
        for j in 0..n_sub {
            let t = s0 + (j as f64 + 0.5) * h;
            seg += ca.eval(t) * cb.eval(t + tau).conj() * cis(TAU * nu * t);
        }
        acc += seg * h;
    }
    Ok(acc)
}

/// MIMO counterpart of the quadrature oracle: steering-weighted antenna sums
/// correlated on the same segment structure.
pub fn mimo_af_oracle(
    cfg: &WaveformConfig,
    msgs: &[PulseMessage],
    secrets: &SecretSequences,
    query: &AFQuery,
    oversample: usize,
) -> Result<Complex64> {
    let signals: Vec<AnalyticSignal> = (0..cfg.m)
        .map(|m| AnalyticSignal::new(cfg, msgs, secrets, m))
        .collect();
    let sp: Vec<Complex64> = (0..cfg.m)
        .map(|m| cis(TAU * query.f * m as f64 * query.gamma_arr))
        .collect();
    let spp: Vec<Complex64> = (0..cfg.m)
        .map(|m| cis(TAU * query.f_prime * m as f64 * query.gamma_arr))
        .collect();
    let segments = integration_segments(&signals[0], &signals[0], query.tau);
    let step_target = 1.0 / (cfg.f_s * oversample as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for (s0, s1) in segments {
        let mid = 0.5 * (s0 + s1);
        let direct: Vec<_> = signals.iter().map(|s| s.chip_at(mid)).collect();
        let shifted: Vec<_> = signals.iter().map(|s| s.chip_at(mid + query.tau)).collect();
        if direct[0].is_none() || shifted[0].is_none() {
            continue;
        }
        let n_sub = (((s1 - s0) / step_target).ceil() as usize).max(1);
        let h = (s1 - s0) / n_sub as f64;
        let mut seg = Complex64::new(0.0, 0.0);
        for j in 0..n_sub {
            let t = s0 + (j as f64 + 0.5) * h;
            let mut u = Complex64::new(0.0, 0.0);
            let mut v = Complex64::new(0.0, 0.0);
            for m in 0..cfg.m {
                u += sp[m] * direct[m].unwrap().eval(t);
                v += spp[m] * shifted[m].unwrap().eval(t + query.tau);
            }
            seg += u * v.conj() * cis(TAU * query.nu * t);
        }
        acc += seg * h;
    }
    Ok(acc)
}

/// Piecewise-smooth segments of `t -> x(t) * conj(x'(t + tau))`: between
/// consecutive chip boundaries of either factor both chip memberships are
/// constant.
fn integration_segments(a: &AnalyticSignal, b: &AnalyticSignal, tau: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = a.boundaries();
    cuts.extend(b.boundaries().iter().map(|t| t - tau));
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect()
}

impl AnalyticSignal {
    /// Chip covering time `t`, if any.
    pub fn chip_at(&self, t: f64) -> Option<&crate::waveform::AnalyticChip> {
        let idx = self.chips().partition_point(|c| c.stop <= t);
        self.chips().get(idx).filter(|c| c.start <= t)
    }
}

/// Uniform axis of an ambiguity grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn fixed(value: f64) -> Self {
        Self {
            start: value,
            stop: value,
            count: 1,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.start
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Which one-dimensional cut of the delay-Doppler plane to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutKind {
    /// Delay axis at zero Doppler.
    ZeroDoppler,
    /// Doppler axis at zero delay.
    ZeroDelay,
}

/// Magnitude grid of the ambiguity function along one cut.
#[derive(Debug, Clone)]
pub struct AFGrid {
    pub delay_axis: AxisSpec,
    pub doppler_axis: AxisSpec,
    /// Peak-normalized magnitudes in dB, one per grid point.
    pub values_db: Vec<f64>,
    pub peak_normalized: bool,
    /// Monte Carlo draws averaged per point.
    pub draws: usize,
}

impl AFGrid {
    /// Values of the swept axis.
    pub fn axis_values(&self) -> Vec<f64> {
        if self.delay_axis.count > 1 {
            self.delay_axis.values()
        } else {
            self.doppler_axis.values()
        }
    }
}

const DB_FLOOR: f64 = -300.0;

fn to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (20.0 * ratio.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Monte Carlo expectation of `|mimo_af|` along a cut, peak-normalized to
/// 0 dB at the delay-Doppler origin.
///
/// Each draw uses independent random messages and secrets; `draws = 1`
/// yields a single-realization cut.
pub fn af_cut(
    cfg: &WaveformConfig,
    scheme: Scheme,
    cut: CutKind,
    axis: AxisSpec,
    draws: usize,
    seed: u64,
) -> Result<AFGrid> {
    assert!(draws >= 1);
    let mut cfg = cfg.clone();
    cfg.scheme = scheme;
    // Per-draw realizations, reproducible independently of scheduling.
    let mut tables = Vec::with_capacity(draws);
    for d in 0..draws {
        let mut msg_rng = stream_rng(seed, [tag::AF_DRAW, d as u64, 0]);
        let msgs: Vec<PulseMessage> = (0..cfg.l)
            .map(|_| message::random_message(&cfg, &mut msg_rng))
            .collect::<Result<_>>()?;
        let mut sec_rng = stream_rng(seed, [tag::AF_DRAW, d as u64, 1]);
        let secrets = SecretSequences::random(&cfg, &mut sec_rng);
        tables.push(WaveTable::new(&cfg, &msgs, &secrets));
    }

    let queries: Vec<AFQuery> = axis
        .values()
        .iter()
        .map(|&v| match cut {
            CutKind::ZeroDoppler => AFQuery::delay_doppler(v, 0.0),
            CutKind::ZeroDelay => AFQuery::delay_doppler(0.0, v),
        })
        .collect();

    let origin = AFQuery::delay_doppler(0.0, 0.0);
    let mean_origin: f64 = tables
        .iter()
        .map(|t| mimo_af_with_table(&cfg, t, &origin).norm())
        .sum::<f64>()
        / draws as f64;

    let means: Vec<f64> = queries
        .par_iter()
        .map(|q| {
            tables
                .iter()
                .map(|t| mimo_af_with_table(&cfg, t, q).norm())
                .sum::<f64>()
                / draws as f64
        })
        .collect();

    let values_db = means.iter().map(|&v| to_db(v / mean_origin)).collect();
    let (delay_axis, doppler_axis) = match cut {
        CutKind::ZeroDoppler => (axis, AxisSpec::fixed(0.0)),
        CutKind::ZeroDelay => (AxisSpec::fixed(0.0), axis),
    };
    Ok(AFGrid {
        delay_axis,
        doppler_axis,
        values_db,
        peak_normalized: true,
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, RawConfig};

    fn small_cfg(m: usize, l: usize) -> WaveformConfig {
        let mut raw = RawConfig::defaults();
        raw.set("M", &m.to_string()).unwrap();
        raw.set("N", &m.to_string()).unwrap();
        raw.set("L", &l.to_string()).unwrap();
        validate_config(&raw).unwrap()
    }

    fn draw(cfg: &WaveformConfig, seed: u64) -> (Vec<PulseMessage>, SecretSequences) {
        let msgs = (0..cfg.l)
            .map(|l| {
                message::random_message(cfg, &mut stream_rng(seed, [40, l as u64, 0])).unwrap()
            })
            .collect();
        let secrets = SecretSequences::random(cfg, &mut stream_rng(seed, [41, 0, 0]));
        (msgs, secrets)
    }

    #[test]
    fn af_at_origin_equals_signal_energy() {
        let cfg = small_cfg(1, 1);
        let (msgs, secrets) = draw(&cfg, 1);
        let v = cross_af_closed(&cfg, &msgs, &secrets, 0, 0, 0.0, 0.0);
        let energy = cfg.q as f64 * cfg.delta_t;
        assert!((v.re - energy).abs() < 1e-12 * energy.max(1.0));
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn af_vanishes_beyond_the_pulse_support() {
        let cfg = small_cfg(1, 1);
        let (msgs, secrets) = draw(&cfg, 2);
        let v = cross_af_closed(&cfg, &msgs, &secrets, 0, 0, cfg.t_p, 0.0);
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_antenna_mimo_reduces_to_cross() {
        let cfg = small_cfg(1, 2);
        let (msgs, secrets) = draw(&cfg, 3);
        let q = AFQuery::delay_doppler(0.4e-6, 2.0e5);
        let a = mimo_af(&cfg, &msgs, &secrets, &q);
        let b = cross_af_closed(&cfg, &msgs, &secrets, 0, 0, q.tau, q.nu);
        assert!((a - b).norm() < 1e-12 * b.norm().max(1e-12));
    }

    #[test]
    fn zero_spatial_frequencies_sum_cross_terms() {
        let cfg = small_cfg(3, 2);
        let (msgs, secrets) = draw(&cfg, 4);
        let q = AFQuery::delay_doppler(0.17e-6, -3.1e5);
        let direct = mimo_af(&cfg, &msgs, &secrets, &q);
        let mut summed = Complex64::new(0.0, 0.0);
        for m in 0..cfg.m {
            for mp in 0..cfg.m {
                summed += cross_af_closed(&cfg, &msgs, &secrets, m, mp, q.tau, q.nu);
            }
        }
        assert!((direct - summed).norm() <= 1e-9 * summed.norm().max(1e-12));
    }

    #[test]
    fn conjugate_symmetry_holds() {
        let cfg = small_cfg(3, 2);
        let (msgs, secrets) = draw(&cfg, 5);
        let mut rng = stream_rng(6, [0; 3]);
        use rand::Rng;
        for _ in 0..100 {
            let tau = rng.gen_range(-2.0..2.0) * cfg.t_p;
            let nu = rng.gen_range(-1.0..1.0) * 5e5;
            let f = rng.gen_range(-0.5..0.5);
            let fp = rng.gen_range(-0.5..0.5);
            let fwd = mimo_af(
                &cfg,
                &msgs,
                &secrets,
                &AFQuery { tau, nu, f, f_prime: fp, gamma_arr: 0.5 },
            );
            let rev = mimo_af(
                &cfg,
                &msgs,
                &secrets,
                &AFQuery {
                    tau: -tau,
                    nu: -nu,
                    f: fp,
                    f_prime: f,
                    gamma_arr: 0.5,
                },
            );
            let scale = fwd.norm().max(rev.norm());
            if scale > 1e-15 {
                assert!((fwd.norm() - rev.norm()).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn degenerate_branch_is_continuous() {
        // Just above the threshold the two branches agree; far below it the
        // closed form routes to the limit branch exactly.
        let dt = 0.2e-6;
        let (a1, b1) = (0.03e-6, 0.17e-6);
        let phase = 0.7;
        let w_above = 1.01 * DEGENERATE_SLOPE_THRESHOLD / dt;
        let ratio = (cis(phase + w_above * b1) - cis(phase + w_above * a1))
            / Complex64::new(0.0, w_above);
        let limit = cis(phase + w_above * a1) * (b1 - a1);
        assert!((ratio - limit).norm() <= 1e-6 * limit.norm());

        let w_tiny = 1e-12 / dt;
        let term = integral_term(w_tiny, phase, a1, b1, dt);
        let explicit_limit = cis(phase + w_tiny * a1) * (b1 - a1);
        assert!((term - explicit_limit).norm() <= 1e-9 * explicit_limit.norm());
    }

    #[test]
    fn amplitude_scaling_is_quadratic() {
        let mut raw = RawConfig::defaults();
        raw.set("scheme", "AMP").unwrap();
        raw.set("M", "2").unwrap();
        raw.set("N", "2").unwrap();
        raw.set("L", "2").unwrap();
        let cfg = validate_config(&raw).unwrap();
        raw.set("ask_step", "1.0").unwrap(); // doubles every level
        let cfg2 = validate_config(&raw).unwrap();
        let (msgs, secrets) = draw(&cfg, 7);
        let q = AFQuery::delay_doppler(0.3e-6, 1.5e5);
        let a = mimo_af(&cfg, &msgs, &secrets, &q).norm();
        let b = mimo_af(&cfg2, &msgs, &secrets, &q).norm();
        assert!((b - 4.0 * a).abs() <= 1e-9 * b.max(1e-12));
    }

    #[test]
    fn oracle_recovers_energy_and_orthogonality() {
        let cfg = small_cfg(2, 1);
        let secrets = SecretSequences::zeroed(&cfg);
        let bits = vec![0u8; message::bits_per_pulse(&cfg).unwrap()];
        let mut msg = message::encode_message(&bits, &cfg).unwrap();
        for chip in &mut msg.chips {
            chip.code = vec![2, 3];
        }
        let msgs = vec![msg];
        let x0 = AnalyticSignal::new(&cfg, &msgs, &secrets, 0);
        let x1 = AnalyticSignal::new(&cfg, &msgs, &secrets, 1);
        // Self-correlation of a single chip's worth restricted by tau=0.
        let self_corr = af_numeric_oracle(&x0, &x0, 0.0, 0.0, 16).unwrap();
        let energy = cfg.q as f64 * cfg.delta_t;
        assert!((self_corr.re - energy).abs() < 1e-6 * energy);
        // Orthogonal hops on the two antennas.
        let cross = af_numeric_oracle(&x0, &x1, 0.0, 0.0, 16).unwrap();
        assert!(cross.norm() < 1e-6 * cfg.delta_t);
    }

    #[test]
    fn closed_form_matches_oracle_on_random_pair() {
        let cfg = small_cfg(4, 2);
        let (msgs, secrets) = draw(&cfg, 8);
        let (tau, nu) = (0.15e-6, 4.0e5);
        let closed = cross_af_closed(&cfg, &msgs, &secrets, 1, 2, tau, nu);
        let x1 = AnalyticSignal::new(&cfg, &msgs, &secrets, 1);
        let x2 = AnalyticSignal::new(&cfg, &msgs, &secrets, 2);
        let oracle = af_numeric_oracle(&x1, &x2, tau, nu, 64).unwrap();
        let denom = closed.norm().max(1e-15);
        assert!(
            (closed - oracle).norm() / denom <= 1e-3,
            "closed {closed} oracle {oracle}"
        );
    }

    #[test]
    fn hybrid_closed_form_matches_oracle_at_defaults() {
        let mut raw = RawConfig::defaults();
        raw.set("scheme", "HYB").unwrap();
        raw.set("L", "2").unwrap();
        let cfg = validate_config(&raw).unwrap();
        let (msgs, secrets) = draw(&cfg, 9);
        let q = AFQuery::delay_doppler(0.3e-6, 1.5e5);
        let closed = mimo_af(&cfg, &msgs, &secrets, &q);
        let oracle = mimo_af_oracle(&cfg, &msgs, &secrets, &q, 64).unwrap();
        assert!(
            (closed - oracle).norm() / closed.norm() <= 1e-3,
            "closed {closed} oracle {oracle}"
        );
    }

    #[test]
    fn sample_rate_mismatch_is_detected() {
        let cfg = small_cfg(1, 1);
        let (msgs, secrets) = draw(&cfg, 10);
        let a = AnalyticSignal::new(&cfg, &msgs, &secrets, 0);
        let mut b = a.clone();
        b.f_s *= 2.0;
        assert!(matches!(
            af_numeric_oracle(&a, &b, 0.0, 0.0, 4),
            Err(Error::SampleRateMismatch(_, _))
        ));
    }

    #[test]
    fn origin_only_grid_normalizes_to_zero_db() {
        let cfg = small_cfg(2, 2);
        for scheme in Scheme::ALL {
            let grid = af_cut(
                &cfg,
                scheme,
                CutKind::ZeroDoppler,
                AxisSpec::fixed(0.0),
                2,
                33,
            )
            .unwrap();
            assert_eq!(grid.values_db.len(), 1);
            assert!(grid.values_db[0].abs() < 1e-9);
        }
    }

    #[test]
    fn origin_is_the_global_maximum() {
        // |AF| at the origin bounds every delay-Doppler point when probe and
        // filter share the spatial frequency.
        let cfg = small_cfg(3, 2);
        let (msgs, secrets) = draw(&cfg, 13);
        let origin = mimo_af(&cfg, &msgs, &secrets, &AFQuery::delay_doppler(0.0, 0.0)).norm();
        let mut rng = stream_rng(14, [0; 3]);
        use rand::Rng;
        for _ in 0..200 {
            let q = AFQuery {
                tau: rng.gen_range(-2.0..2.0) * cfg.t_p,
                nu: rng.gen_range(-1.0..1.0) * 1e6,
                f: rng.gen_range(-0.5..0.5),
                f_prime: 0.0,
                gamma_arr: 0.5,
            };
            let q = AFQuery { f_prime: q.f, ..q };
            let v = mimo_af(&cfg, &msgs, &secrets, &q).norm();
            assert!(v <= origin * (1.0 + 1e-9), "|AF|={v} above origin {origin}");
        }
    }

    #[test]
    fn cut_values_never_exceed_the_origin() {
        let cfg = small_cfg(2, 2);
        let axis = AxisSpec { start: -1.5 * cfg.t_p, stop: 1.5 * cfg.t_p, count: 61 };
        let grid = af_cut(&cfg, Scheme::Hyb, CutKind::ZeroDoppler, axis, 3, 21).unwrap();
        for &v in &grid.values_db {
            assert!(v <= 1e-9);
        }
    }

    #[test]
    fn agility_off_equals_explicit_zero_offsets() {
        // With unit agility alphabets the random secrets are forced to zero,
        // reproducing the plain FH pulse train.
        let mut raw = RawConfig::defaults();
        raw.set("Phi_T", "1").unwrap();
        raw.set("Phi_f", "1").unwrap();
        raw.set("M", "2").unwrap();
        raw.set("N", "2").unwrap();
        raw.set("L", "2").unwrap();
        let cfg = validate_config(&raw).unwrap();
        let (msgs, _) = draw(&cfg, 11);
        let forced = SecretSequences::random(&cfg, &mut stream_rng(12, [0; 3]));
        assert_eq!(forced, SecretSequences::zeroed(&cfg));
        let q = AFQuery::delay_doppler(cfg.t_p, 0.0);
        let a = mimo_af(&cfg, &msgs, &forced, &q);
        let b = mimo_af(&cfg, &msgs, &SecretSequences::zeroed(&cfg), &q);
        assert_eq!(a, b);
    }
}
