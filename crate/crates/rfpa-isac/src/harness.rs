//! Batch experiment engine: achievable-rate tables, BER/BDR/entropy Monte
//! Carlo sweeps, the secret-mismatch ambiguity degradation study, and the
//! CSV output behind all of them.

use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::ambiguity::AFGrid;
use crate::channel::{self, draw_channel, noise_var_for_ebn0, transmit};
use crate::config::{Scheme, WaveformConfig};
use crate::crkg::{self, FcmParams};
use crate::error::{Error, Result};
use crate::message::{self, bits_per_pulse};
use crate::receiver;
use crate::rng::{stream_rng, tag};
use crate::secrets::SecretSequences;
use crate::waveform::generate_pulse;

/// Kind of sweep an [`ExperimentSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Bit error rate vs Eb/N0 for Bob and a secret-guessing Eve.
    Ber,
}

/// Declarative description of one Monte Carlo sweep.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub cfg: WaveformConfig,
    /// Sweep axis values, finite and ascending.
    pub axis: Vec<f64>,
    /// Independent trials (pulse round-trips) per axis point.
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::DomainError("trials must be at least 1".into()));
        }
        if self.axis.is_empty() {
            return Err(Error::DomainError("sweep axis is empty".into()));
        }
        if self.axis.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainError("sweep axis contains non-finite values".into()));
        }
        if self.axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DomainError("sweep axis must be strictly ascending".into()));
        }
        Ok(())
    }
}

/// Sweep result: one row per axis point, named metric columns, metadata for
/// the CSV header.
#[derive(Debug, Clone)]
pub struct CurveResult {
    pub kind: String,
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    pub cfg_digest: String,
    pub seed: u64,
}

impl CurveResult {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Renders the CSV: `#`-prefixed metadata, a header row, one row per
    /// sweep point.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# kind = {}\n", self.kind));
        out.push_str(&format!("# config_digest = {}\n", self.cfg_digest));
        out.push_str(&format!("# seed = {}\n", self.seed));
        out.push_str(&self.axis_name.to_string());
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, &x) in self.axis.iter().enumerate() {
            out.push_str(&format!("{x}"));
            for (_, col) in &self.columns {
                out.push_str(&format!(",{}", col[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Writes `content` to `path`, refusing to overwrite unless `force`.
pub fn write_output(path: &Path, content: &str, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::IoFailure(std::io::Error::new(
            std::io::ErrorKind::AlreadyExists,
            format!("{} exists; pass --force to overwrite", path.display()),
        )));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

fn binomial_big(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::from(1u32);
    let k = k.min(n - k);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

fn factorial_big(n: usize) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    acc
}

/// Distinct code vectors selecting and ordering `M` of `K` hops, computed
/// with exact integer arithmetic.
pub fn sim_message_count(k: usize, m: usize) -> BigUint {
    binomial_big(k, m) * factorial_big(m)
}

/// Achievable bit rate in bits per second of `scheme` under `cfg`, with `m`
/// transmit antennas.
pub fn achievable_rate_m(cfg: &WaveformConfig, scheme: Scheme, m: usize) -> f64 {
    let prf = cfg.prf();
    let q = cfg.q as f64;
    let sim_bits = || {
        let count = sim_message_count(cfg.k, m);
        (count.bits() - 1) as f64
    };
    match scheme {
        Scheme::Ph => prf * q * m as f64 * (cfg.j_psk as f64).log2(),
        Scheme::Amp => prf * q * m as f64 * (cfg.j_ask as f64).log2(),
        Scheme::Sim => prf * q * sim_bits(),
        Scheme::Hyb => {
            let ask_psk = ((cfg.j_ask * cfg.j_psk) as f64).log2().floor();
            prf * q * (sim_bits() + m as f64 * ask_psk)
        }
    }
}

/// Achievable bit rate of `scheme` at the configured antenna count.
pub fn achievable_rate(cfg: &WaveformConfig, scheme: Scheme) -> f64 {
    achievable_rate_m(cfg, scheme, cfg.m)
}

/// Rate table over `M in [1, K]` for all four schemes.
pub fn rate_table(cfg: &WaveformConfig, seed: u64) -> CurveResult {
    let ms: Vec<f64> = (1..=cfg.k).map(|m| m as f64).collect();
    let columns = Scheme::ALL
        .iter()
        .map(|&scheme| {
            let name = format!("R_{}", scheme.name().to_lowercase());
            let vals = (1..=cfg.k)
                .map(|m| achievable_rate_m(cfg, scheme, m))
                .collect();
            (name, vals)
        })
        .collect();
    CurveResult {
        kind: "rate".into(),
        axis_name: "M".into(),
        axis: ms,
        columns,
        cfg_digest: cfg.digest(),
        seed,
    }
}

struct TrialOutcome {
    bob_errors: u64,
    eve_errors: u64,
    bits: u64,
}

/// One pulse round-trip at a given noise level: Bob decodes with the true
/// secrets and his channel, Eve with her own channel and freshly guessed
/// secrets. With a wrong pulse-timing guess Eve's observation window
/// contains only noise.
///
/// The Eb/N0 noise enters at the equalized-symbol level: the channel is
/// applied and inverted, then white noise of the configured variance is
/// added to the recovered streams.
fn ber_trial(
    cfg: &WaveformConfig,
    noise_var: f64,
    seed: u64,
    point: u64,
    trial: u64,
) -> TrialOutcome {
    let bits = message::random_bits(
        bits_per_pulse(cfg).expect("validated config"),
        &mut stream_rng(seed, [tag::MESSAGE, point, trial]),
    );
    let msg = message::encode_message(&bits, cfg).expect("budget-sized bit string");
    let secrets = SecretSequences::random(cfg, &mut stream_rng(seed, [tag::SECRETS, point, trial]));
    let pulse = generate_pulse(cfg, &msg, &secrets, 0);

    let count_errors = |decoded: &[u8]| -> u64 {
        decoded
            .iter()
            .zip(&bits)
            .filter(|(a, b)| a != b)
            .count() as u64
    };
    let equalized_observation =
        |h: &channel::ChannelMatrix, rng: &mut rand_chacha::ChaCha8Rng| {
            let r = transmit(&pulse, h, 0.0, rng).expect("matching dimensions");
            channel::equalize(&r, h)
        };

    let h = draw_channel(cfg, 0, &mut stream_rng(seed, [tag::CHANNEL, point, trial]));
    let mut bob_noise = stream_rng(seed, [tag::NOISE, point, trial]);
    let bob_errors = match equalized_observation(&h, &mut bob_noise) {
        Ok(mut x_hat) => {
            channel::add_awgn(&mut x_hat, noise_var, &mut bob_noise);
            match receiver::decode_equalized(&x_hat, cfg, &secrets, 0) {
                Ok(d) => count_errors(&d.bits),
                Err(_) => count_errors(&vec![0u8; bits.len()]),
            }
        }
        Err(_) => count_errors(&vec![0u8; bits.len()]),
    };

    let guess = SecretSequences::random(cfg, &mut stream_rng(seed, [tag::EVE_GUESS, point, trial]));
    let h_e = draw_channel(cfg, 0, &mut stream_rng(seed, [tag::EVE_CHANNEL, point, trial]));
    let mut eve_noise = stream_rng(seed, [tag::EVE_NOISE, point, trial]);
    // Timing offsets are pulse-width multiples, so a wrong guess leaves
    // Eve's observation window fully outside the pulse.
    let x_hat_eve = if guess.gamma_t[0] == secrets.gamma_t[0] {
        equalized_observation(&h_e, &mut eve_noise).map(|mut x_hat| {
            channel::add_awgn(&mut x_hat, noise_var, &mut eve_noise);
            x_hat
        })
    } else {
        Ok(channel::noise_only(
            cfg.m,
            cfg.samples_per_pulse(),
            cfg.f_s,
            pulse.t0,
            noise_var,
            &mut eve_noise,
        ))
    };
    let eve_errors = match x_hat_eve {
        Ok(x_hat) => match receiver::decode_equalized(&x_hat, cfg, &guess, 0) {
            Ok(d) => count_errors(&d.bits),
            Err(_) => count_errors(&vec![0u8; bits.len()]),
        },
        Err(_) => count_errors(&vec![0u8; bits.len()]),
    };

    TrialOutcome {
        bob_errors,
        eve_errors,
        bits: bits.len() as u64,
    }
}

/// Runs a BER sweep: per axis point, `trials` independent pulse round-trips
/// for Bob and Eve, with binomial standard errors.
pub fn run_ber_sweep(spec: &ExperimentSpec) -> Result<CurveResult> {
    if spec.kind != ExperimentKind::Ber {
        return Err(Error::DomainError("spec kind is not BER".into()));
    }
    spec.validate()?;
    let mut cfg = spec.cfg.clone();
    cfg.l = 1; // independent single-pulse trials
    let mut bob = Vec::with_capacity(spec.axis.len());
    let mut bob_se = Vec::with_capacity(spec.axis.len());
    let mut eve = Vec::with_capacity(spec.axis.len());
    let mut eve_se = Vec::with_capacity(spec.axis.len());
    for (p, &ebn0_db) in spec.axis.iter().enumerate() {
        let noise_var = noise_var_for_ebn0(&cfg, ebn0_db)?;
        let outcomes: Vec<TrialOutcome> = (0..spec.trials as u64)
            .into_par_iter()
            .map(|t| ber_trial(&cfg, noise_var, spec.seed, p as u64, t))
            .collect();
        let total_bits: u64 = outcomes.iter().map(|o| o.bits).sum();
        let bob_err: u64 = outcomes.iter().map(|o| o.bob_errors).sum();
        let eve_err: u64 = outcomes.iter().map(|o| o.eve_errors).sum();
        let n = total_bits as f64;
        let pb = bob_err as f64 / n;
        let pe = eve_err as f64 / n;
        bob.push(pb);
        bob_se.push((pb * (1.0 - pb) / n).sqrt());
        eve.push(pe);
        eve_se.push((pe * (1.0 - pe) / n).sqrt());
    }
    Ok(CurveResult {
        kind: format!("ber_{}", cfg.scheme.name().to_lowercase()),
        axis_name: "ebn0_db".into(),
        axis: spec.axis.clone(),
        columns: vec![
            ("ber_bob".into(), bob),
            ("ber_bob_stderr".into(), bob_se),
            ("ber_eve".into(), eve),
            ("ber_eve_stderr".into(), eve_se),
        ],
        cfg_digest: cfg.digest(),
        seed: spec.seed,
    })
}

/// Inner product of two sampled pulses, scaled to integral units.
fn pulse_inner(a: &crate::signal::ComplexSignal, b: &crate::signal::ComplexSignal) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..a.rows() {
        for (&x, &y) in a.row(m).iter().zip(b.row(m)) {
            acc += x * y.conj();
        }
    }
    acc / a.f_s
}

/// Degradation of a matched filter built with guessed secrets: the ratio of
/// the mismatched zero-lag correlation peak to the true matched peak,
/// averaged over random draws. Equals one when there is nothing to guess.
pub fn eve_mismatch_af(cfg: &WaveformConfig, draws: usize, seed: u64) -> Result<f64> {
    if draws < 1 {
        return Err(Error::DomainError("draws must be at least 1".into()));
    }
    let ratios: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|d| {
            let msgs: Vec<_> = (0..cfg.l)
                .map(|l| {
                    message::random_message(
                        cfg,
                        &mut stream_rng(seed, [tag::MESSAGE, d, l as u64]),
                    )
                    .expect("validated config")
                })
                .collect();
            let truth =
                SecretSequences::random(cfg, &mut stream_rng(seed, [tag::SECRETS, d, 0]));
            let guess =
                SecretSequences::random(cfg, &mut stream_rng(seed, [tag::EVE_GUESS, d, 0]));
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = 0.0;
            for l in 0..cfg.l {
                let true_pulse = generate_pulse(cfg, &msgs[l], &truth, l);
                den += pulse_inner(&true_pulse, &true_pulse).re;
                // Pulse-width offsets either coincide or leave the windows
                // disjoint, so mismatched guesses contribute nothing.
                if guess.gamma_t[l] == truth.gamma_t[l] {
                    let guess_pulse = generate_pulse(cfg, &msgs[l], &guess, l);
                    num += pulse_inner(&true_pulse, &guess_pulse);
                }
            }
            num.norm() / den
        })
        .collect();
    Ok(ratios.iter().sum::<f64>() / draws as f64)
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Binary-symmetric secrecy-rate estimate from the two link BERs, clamped
/// at zero.
pub fn secrecy_rate_estimate(ber_bob: f64, ber_eve: f64) -> Result<f64> {
    for (name, p) in [("ber_bob", ber_bob), ("ber_eve", ber_eve)] {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::DomainError(format!("{name} = {p} outside [0, 0.5]")));
        }
    }
    Ok((binary_entropy(ber_eve) - binary_entropy(ber_bob)).max(0.0))
}

/// One row of the secret-generation sweep.
#[derive(Debug, Clone)]
pub struct CrkgRow {
    pub snr_db: f64,
    pub phi: usize,
    pub bdr: f64,
    pub entropy_bits: f64,
}

/// Secret-generation sweep: for every probing SNR the pipeline runs once
/// per alphabet, reporting bit disagreement between Alice and Bob and the
/// entropy of Alice's sequence.
pub fn run_crkg_sweep(
    len: usize,
    phi_t: usize,
    phi_f: usize,
    snrs_db: &[f64],
    params: &FcmParams,
    seed: u64,
) -> Result<Vec<CrkgRow>> {
    let mut rows = Vec::new();
    for (i, &snr_db) in snrs_db.iter().enumerate() {
        let point_seed = seed ^ ((i as u64) << 32);
        let out = crkg::probe_and_generate(len, snr_db, phi_t, phi_f, params, point_seed)?;
        rows.push(CrkgRow {
            snr_db,
            phi: phi_t,
            bdr: crkg::symbol_bdr(&out.alice.gamma_t, &out.bob.gamma_t, phi_t.max(2))?,
            entropy_bits: crkg::sequence_entropy_bits(&out.alice.gamma_t, phi_t),
        });
        if phi_f != phi_t {
            rows.push(CrkgRow {
                snr_db,
                phi: phi_f,
                bdr: crkg::symbol_bdr(&out.alice.gamma_f, &out.bob.gamma_f, phi_f.max(2))?,
                entropy_bits: crkg::sequence_entropy_bits(&out.alice.gamma_f, phi_f),
            });
        }
    }
    Ok(rows)
}

/// CSV for the secret-generation sweep.
pub fn crkg_csv(rows: &[CrkgRow], cfg_digest: &str, seed: u64) -> String {
    let mut out = String::new();
    out.push_str("# kind = crkg\n");
    out.push_str(&format!("# config_digest = {cfg_digest}\n"));
    out.push_str(&format!("# seed = {seed}\n"));
    out.push_str("snr_db,phi,bdr,entropy_bits\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.snr_db, r.phi, r.bdr, r.entropy_bits
        ));
    }
    out
}

/// CSV for one ambiguity cut (`axis_value,af_db`).
pub fn af_csv(grid: &AFGrid, cfg: &WaveformConfig, seed: u64) -> String {
    let mut out = String::new();
    out.push_str("# kind = af_cut\n");
    out.push_str(&format!("# config_digest = {}\n", cfg.digest()));
    out.push_str(&format!("# seed = {seed}\n"));
    out.push_str(&format!("# draws = {}\n", grid.draws));
    out.push_str("axis_value,af_db\n");
    for (x, v) in grid.axis_values().iter().zip(&grid.values_db) {
        out.push_str(&format!("{x},{v}\n"));
    }
    out
}

/// Sidecar metadata for an ambiguity cut, as a small JSON document.
pub fn af_meta_json(grid: &AFGrid, cfg: &WaveformConfig, cut_name: &str, seed: u64) -> String {
    let axis = if grid.delay_axis.count > 1 {
        &grid.delay_axis
    } else {
        &grid.doppler_axis
    };
    format!(
        "{{\n  \"cut\": \"{cut_name}\",\n  \"axis\": {{\"start\": {}, \"stop\": {}, \"count\": {}}},\n  \"draws\": {},\n  \"peak_normalized\": {},\n  \"config_digest\": \"{}\",\n  \"seed\": {}\n}}\n",
        axis.start,
        axis.stop,
        axis.count,
        grid.draws,
        grid.peak_normalized,
        cfg.digest(),
        seed
    )
}
