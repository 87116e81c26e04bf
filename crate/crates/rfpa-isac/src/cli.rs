//! Command-line front end: `rate`, `ber`, `af`, `crkg` and `selftest`
//! subcommands over the experiment engine.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::ambiguity::{af_cut, AxisSpec, CutKind};
use crate::config::{validate_config, RawConfig, Scheme, WaveformConfig};
use crate::error::{Error, Result};
use crate::harness::{
    self, af_csv, af_meta_json, crkg_csv, run_ber_sweep, run_crkg_sweep, write_output,
    ExperimentKind, ExperimentSpec,
};

/// Seed fallback environment variable.
pub const SEED_ENV: &str = "RFPA_ISAC_SEED";

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Ph,
    Amp,
    Sim,
    Hyb,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Ph => Scheme::Ph,
            SchemeArg::Amp => Scheme::Amp,
            SchemeArg::Sim => Scheme::Sim,
            SchemeArg::Hyb => Scheme::Hyb,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CutArg {
    ZeroDoppler,
    ZeroDelay,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AgilityArg {
    On,
    Off,
}

/// Parsed command-line invocation.
#[derive(Debug, Parser)]
#[command(
    name = "rfpa-isac",
    version,
    about = "Secure frequency-hopping ISAC waveform simulations"
)]
pub struct CliInvocation {
    /// Parameter file (`key = value` lines); builtin defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Config overrides, e.g. `--set M=4` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Master RNG seed; falls back to $RFPA_ISAC_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Achievable-rate table over the antenna count.
    Rate,
    /// BER vs Eb/N0 Monte Carlo sweep for Bob and a secret-guessing Eve.
    Ber {
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Eb/N0 axis in dB: a single value or `start:step:stop`.
        #[arg(long, default_value = "0:4:20")]
        ebn0: String,
        /// Pulse round-trips per axis point; defaults to enough pulses for
        /// 1e5 bits per point.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Ambiguity-function cut, Monte Carlo averaged over draws.
    Af {
        #[arg(long, value_enum, default_value = "zero-doppler")]
        cut: CutArg,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Independent message/secret realizations to average.
        #[arg(long, default_value_t = 64)]
        draws: usize,
        /// `off` disables both agility alphabets (plain FH baseline).
        #[arg(long, value_enum, default_value = "on")]
        agility: AgilityArg,
        /// Cut axis as `start:step:stop` (seconds or Hz); sensible default
        /// ranges are derived from the config when omitted.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Secret generation: BDR and entropy vs probing SNR.
    Crkg {
        /// Probing samples per coding period.
        #[arg(long, default_value_t = 1024)]
        length: usize,
        #[arg(long = "phi-t")]
        phi_t: Option<usize>,
        #[arg(long = "phi-f")]
        phi_f: Option<usize>,
        /// Probing SNR axis in dB: single value or `start:step:stop`.
        #[arg(long = "snr-probe", default_value = "0:10:30")]
        snr_probe: String,
        /// Label-canonicalization scale parameter.
        #[arg(long, default_value_t = 2.0)]
        z: f64,
        /// Also dump the clustered sample scatter of the first SNR point.
        #[arg(long)]
        scatter: bool,
        /// Also dump the raw probing samples of the first SNR point.
        #[arg(long = "dump-probe")]
        dump_probe: bool,
    },
    /// Fast invariant checks over every module.
    Selftest,
}

/// Parses a numeric sweep: either one value or inclusive `start:step:stop`.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::BadFlag(format!("sweep `{text}`: {msg}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:stop"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("not a number")))
            .collect::<Result<_>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + step * i as f64).collect())
    } else {
        Ok(vec![text
            .trim()
            .parse::<f64>()
            .map_err(|_| bad("not a number"))?])
    }
}

fn resolve_seed(inv: &CliInvocation) -> Result<u64> {
    if let Some(s) = inv.seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| Error::BadFlag(format!("{SEED_ENV}=`{v}` is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn resolve_config(inv: &CliInvocation, scheme: Option<SchemeArg>) -> Result<WaveformConfig> {
    let mut raw = match &inv.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::defaults(),
    };
    for item in &inv.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::BadFlag(format!("override `{item}` is not KEY=VALUE")))?;
        raw.set(key.trim(), value.trim())?;
    }
    if let Some(s) = scheme {
        raw.set("scheme", Scheme::from(s).name())?;
    }
    let cfg = validate_config(&raw)?;
    // The timing alphabet is capped at T_p/tau - 1; when that bound is not
    // itself a power of two the cap cannot be met with equality.
    let phi_t_bound = (cfg.t_p / cfg.tau - 1.0).round() as usize;
    if phi_t_bound == 0 || phi_t_bound & (phi_t_bound - 1) != 0 {
        eprintln!(
            "note: T_p/tau - 1 = {phi_t_bound} is not a power of two; Phi_T = {} uses part of the timing range",
            cfg.phi_t
        );
    }
    Ok(cfg)
}

fn run_command(inv: &CliInvocation) -> Result<()> {
    let seed = resolve_seed(inv)?;
    match &inv.command {
        Command::Rate => {
            let cfg = resolve_config(inv, None)?;
            let table = harness::rate_table(&cfg, seed);
            let path = inv.out.join("rate.csv");
            write_output(&path, &table.to_csv(), inv.force)?;
            println!("wrote {}", path.display());
        }
        Command::Ber { scheme, ebn0, trials } => {
            let cfg = resolve_config(inv, *scheme)?;
            let trials = match trials {
                Some(t) => *t,
                None => 100_000usize.div_ceil(crate::message::bits_per_pulse(&cfg)?),
            };
            let spec = ExperimentSpec {
                kind: ExperimentKind::Ber,
                cfg: cfg.clone(),
                axis: parse_sweep(ebn0)?,
                trials,
                seed,
            };
            let curve = run_ber_sweep(&spec)?;
            let path = inv
                .out
                .join(format!("ber_{}.csv", cfg.scheme.name().to_lowercase()));
            write_output(&path, &curve.to_csv(), inv.force)?;
            println!("wrote {}", path.display());
        }
        Command::Af {
            cut,
            scheme,
            draws,
            agility,
            grid,
        } => {
            let mut cfg = resolve_config(inv, *scheme)?;
            if matches!(agility, AgilityArg::Off) {
                cfg.phi_t = 1;
                cfg.phi_f = 1;
            }
            let kind = match cut {
                CutArg::ZeroDoppler => CutKind::ZeroDoppler,
                CutArg::ZeroDelay => CutKind::ZeroDelay,
            };
            let axis = match grid {
                Some(text) => {
                    let values = parse_sweep(text)?;
                    AxisSpec {
                        start: values[0],
                        stop: *values.last().unwrap(),
                        count: values.len(),
                    }
                }
                None => default_axis(&cfg, kind),
            };
            let grid_out = af_cut(&cfg, cfg.scheme, kind, axis, *draws, seed)?;
            let cut_name = match kind {
                CutKind::ZeroDoppler => "zero-doppler",
                CutKind::ZeroDelay => "zero-delay",
            };
            let agility_name = match agility {
                AgilityArg::On => "on",
                AgilityArg::Off => "off",
            };
            let stem = format!("af_{cut_name}_agility_{agility_name}");
            let csv_path = inv.out.join(format!("{stem}.csv"));
            write_output(&csv_path, &af_csv(&grid_out, &cfg, seed), inv.force)?;
            let meta_path = inv.out.join(format!("{stem}.meta.json"));
            write_output(
                &meta_path,
                &af_meta_json(&grid_out, &cfg, cut_name, seed),
                inv.force,
            )?;
            println!("wrote {}", csv_path.display());
        }
        Command::Crkg {
            length,
            phi_t,
            phi_f,
            snr_probe,
            z,
            scatter,
            dump_probe,
        } => {
            let cfg = resolve_config(inv, None)?;
            let phi_t = phi_t.unwrap_or(cfg.phi_t);
            let phi_f = phi_f.unwrap_or(cfg.phi_f);
            for (name, phi) in [("phi-t", phi_t), ("phi-f", phi_f)] {
                if phi < 2 || !phi.is_power_of_two() {
                    return Err(Error::BadFlag(format!(
                        "--{name} must be a power of two >= 2"
                    )));
                }
                if !length.is_multiple_of(phi) {
                    return Err(Error::BadFlag(format!(
                        "--length {length} is not a multiple of --{name} {phi}"
                    )));
                }
            }
            let snrs = parse_sweep(snr_probe)?;
            let params = crate::crkg::FcmParams {
                z: *z,
                ..Default::default()
            };
            let rows = run_crkg_sweep(*length, phi_t, phi_f, &snrs, &params, seed)?;
            let path = inv.out.join("crkg.csv");
            write_output(&path, &crkg_csv(&rows, &cfg.digest(), seed), inv.force)?;
            println!("wrote {}", path.display());

            if *scatter || *dump_probe {
                let meta = format!(
                    "# config_digest = {}\n# seed = {seed}\n# snr_db = {}\n",
                    cfg.digest(),
                    snrs[0]
                );
                let mut rng = crate::rng::stream_rng(seed, [crate::rng::tag::PROBE, 0, 0]);
                let probe = crate::channel::probe_cir(*length, snrs[0], &mut rng);
                if *dump_probe {
                    let p = inv.out.join("probe.csv");
                    write_output(&p, &format!("{meta}{}", probe.to_csv()), inv.force)?;
                    println!("wrote {}", p.display());
                }
                if *scatter {
                    let alice = crate::crkg::party_sequence(
                        &probe.alice,
                        phi_t,
                        &params,
                        None,
                        seed,
                    )?;
                    let bob =
                        crate::crkg::party_sequence(&probe.bob, phi_t, &params, None, seed)?;
                    let mut text = format!("{meta}re,im,label_alice,label_bob\n");
                    for i in 0..probe.len() {
                        text.push_str(&format!(
                            "{},{},{},{}\n",
                            probe.alice[i].re, probe.alice[i].im, alice[i], bob[i]
                        ));
                    }
                    let p = inv.out.join("crkg_scatter.csv");
                    write_output(&p, &text, inv.force)?;
                    println!("wrote {}", p.display());
                }
            }
        }
        Command::Selftest => {
            let failures = run_selftest();
            if failures > 0 {
                return Err(Error::DomainError(format!(
                    "selftest: {failures} module(s) failed"
                )));
            }
        }
    }
    Ok(())
}

fn default_axis(cfg: &WaveformConfig, cut: CutKind) -> AxisSpec {
    match cut {
        CutKind::ZeroDoppler => {
            // Cover the first two PRI ambiguity lobes at half-chip steps.
            let span = 2.2 * cfg.t_p;
            let step = cfg.delta_t / 2.0;
            let count = (2.0 * span / step).round() as usize + 1;
            AxisSpec { start: -span, stop: span, count }
        }
        CutKind::ZeroDelay => {
            let span = 5e5;
            AxisSpec { start: -span, stop: span, count: 401 }
        }
    }
}

/// Runs the invocation, mapping errors to the documented exit codes
/// (0 success, 2 configuration, 3 runtime).
pub fn run(inv: &CliInvocation) -> i32 {
    let body = || run_command(inv);
    let result = match inv.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build();
            match pool {
                Ok(pool) => pool.install(body),
                Err(e) => Err(Error::BadFlag(format!("--workers: {e}"))),
            }
        }
        None => body(),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rfpa-isac: error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let inv = CliInvocation::parse();
    run(&inv)
}

/// Fast invariant suite; prints one PASS/FAIL line per module and returns
/// the failure count.
pub fn run_selftest() -> usize {
    use num_complex::Complex64;

    type Check = (&'static str, fn() -> std::result::Result<(), String>);

    fn sigmodel() -> std::result::Result<(), String> {
        let cfg = WaveformConfig::default_config();
        if cfg.q != 10 || cfg.samples_per_chip() != 80 {
            return Err("default derivation".into());
        }
        let mut raw = RawConfig::defaults();
        raw.set("delta_t", "0.3e-6").unwrap();
        if validate_config(&raw).is_ok() {
            return Err("chip duration constraint not enforced".into());
        }
        let s = crate::codes::rank_subset(&[0, 3, 4, 5], 6).map_err(|e| e.to_string())?;
        let p = crate::codes::rank_permutation(&[3, 1, 0, 2]).map_err(|e| e.to_string())?;
        let mut raw = RawConfig::defaults();
        raw.set("K", "6").unwrap();
        raw.set("M", "4").unwrap();
        raw.set("N", "4").unwrap();
        let cfg6 = validate_config(&raw).unwrap();
        if crate::codes::compose_code(s, p, &cfg6).map_err(|e| e.to_string())? != [5, 3, 0, 4] {
            return Err("selection/permutation example".into());
        }
        let secrets = crate::secrets::SecretSequences::zeroed(&cfg);
        let msg = crate::message::encode_message(
            &vec![0u8; crate::message::bits_per_pulse(&cfg).unwrap()],
            &cfg,
        )
        .unwrap();
        let pulse = crate::waveform::generate_pulse(&cfg, &msg, &secrets, 0);
        let expected = (cfg.m * cfg.samples_per_pulse()) as f64;
        if (pulse.energy() - expected).abs() > 1e-6 * expected {
            return Err("unit pulse energy".into());
        }
        Ok(())
    }

    fn ambiguity() -> std::result::Result<(), String> {
        let mut raw = RawConfig::defaults();
        raw.set("M", "1").unwrap();
        raw.set("N", "1").unwrap();
        raw.set("L", "1").unwrap();
        let cfg = validate_config(&raw).unwrap();
        let secrets = crate::secrets::SecretSequences::zeroed(&cfg);
        let msg = crate::message::encode_message(
            &vec![0u8; crate::message::bits_per_pulse(&cfg).unwrap()],
            &cfg,
        )
        .unwrap();
        let msgs = vec![msg];
        let origin = crate::ambiguity::cross_af_closed(&cfg, &msgs, &secrets, 0, 0, 0.0, 0.0);
        let energy = cfg.q as f64 * cfg.delta_t;
        if (origin.re - energy).abs() > 1e-9 * energy {
            return Err("origin energy identity".into());
        }
        let far = crate::ambiguity::cross_af_closed(&cfg, &msgs, &secrets, 0, 0, cfg.t_p, 0.0);
        if far.norm() != 0.0 {
            return Err("disjoint support".into());
        }
        Ok(())
    }

    fn channel() -> std::result::Result<(), String> {
        let cfg = WaveformConfig::default_config();
        let mut rng = crate::rng::stream_rng(1, [0; 3]);
        let h = crate::channel::draw_channel(&cfg, 0, &mut rng);
        let mut x = crate::signal::ComplexSignal::zeros(cfg.m, 32, cfg.f_s, 0.0);
        for v in x.iter_mut() {
            *v = crate::channel::complex_normal(&mut rng, 1.0);
        }
        let r = crate::channel::transmit(&x, &h, 0.0, &mut rng).map_err(|e| e.to_string())?;
        let xhat = crate::channel::equalize(&r, &h).map_err(|e| e.to_string())?;
        let err: f64 = xhat
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if err / x.energy().sqrt() > 1e-9 {
            return Err("noiseless equalization round trip".into());
        }
        Ok(())
    }

    fn receiver() -> std::result::Result<(), String> {
        for scheme in Scheme::ALL {
            let mut cfg = WaveformConfig::default_config();
            cfg.scheme = scheme;
            let mut rng = crate::rng::stream_rng(2, [0; 3]);
            let secrets = crate::secrets::SecretSequences::random(&cfg, &mut rng);
            let bits = crate::message::random_bits(
                crate::message::bits_per_pulse(&cfg).unwrap(),
                &mut rng,
            );
            let msg = crate::message::encode_message(&bits, &cfg).unwrap();
            let pulse = crate::waveform::generate_pulse(&cfg, &msg, &secrets, 0);
            let h = crate::channel::draw_channel(&cfg, 0, &mut rng);
            let r = crate::channel::transmit(&pulse, &h, 0.0, &mut rng).unwrap();
            let decoded = crate::receiver::decode_pulse(&r, &h, &cfg, &secrets, 0)
                .map_err(|e| e.to_string())?;
            if decoded.bits != bits {
                return Err(format!("noiseless round trip ({})", scheme.name()));
            }
        }
        Ok(())
    }

    fn crkg() -> std::result::Result<(), String> {
        let mut rng = crate::rng::stream_rng(3, [0; 3]);
        let samples: Vec<Complex64> = (0..64)
            .map(|_| crate::channel::complex_normal(&mut rng, 1.0))
            .collect();
        let state = crate::crkg::fcm_cluster(&samples, 4, &Default::default(), 1)
            .map_err(|e| e.to_string())?;
        let assign =
            crate::crkg::equalize_cluster_sizes(&state, 4).map_err(|e| e.to_string())?;
        if assign.counts != vec![16; 4] {
            return Err("equal-size clustering".into());
        }
        if assign.entropy_bits() != 2.0 {
            return Err("maximum entropy".into());
        }
        if crate::crkg::symbol_bdr(&[0, 1], &[1, 0], 2).unwrap() != 1.0 {
            return Err("bdr on complementary symbols".into());
        }
        Ok(())
    }

    fn harness_checks() -> std::result::Result<(), String> {
        let cfg = WaveformConfig::default_config();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b;
        if !close(harness::achievable_rate(&cfg, Scheme::Ph), 16e6) {
            return Err("phase rate".into());
        }
        if !close(harness::achievable_rate_m(&cfg, Scheme::Sim, 5), 14e6) {
            return Err("index rate".into());
        }
        if !close(harness::achievable_rate(&cfg, Scheme::Hyb), 44e6) {
            return Err("hybrid rate".into());
        }
        if harness::secrecy_rate_estimate(0.0, 0.5).unwrap() != 1.0 {
            return Err("secrecy estimate".into());
        }
        Ok(())
    }

    let checks: [Check; 6] = [
        ("sigmodel", sigmodel),
        ("ambiguity", ambiguity),
        ("channel", channel),
        ("receiver", receiver),
        ("crkg", crkg),
        ("harness", harness_checks),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("{name}: PASS"),
            Err(msg) => {
                println!("{name}: FAIL ({msg})");
                failures += 1;
            }
        }
    }
    failures
}
