//! C ABI for the simulation library.
//!
//! Conventions: opaque handles own Rust values and are released with their
//! `_free` function; every fallible call returns an [`RfpaStatus`] and
//! writes results through out-pointers; the most recent error message is
//! kept per thread and can be fetched with [`rfpa_last_error_message`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use rfpa_isac::ambiguity::{mimo_af, AFQuery};
use rfpa_isac::config::{validate_config, RawConfig, Scheme, WaveformConfig};
use rfpa_isac::crkg::{self, FcmParams};
use rfpa_isac::harness;
use rfpa_isac::message;
use rfpa_isac::rng::stream_rng;
use rfpa_isac::secrets::SecretSequences;
use rfpa_isac::waveform::generate_pulse;

/// Result status of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfpaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    RuntimeError = 4,
    BufferTooSmall = 5,
}

/// Information embedding scheme selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfpaScheme {
    Ph = 0,
    Amp = 1,
    Sim = 2,
    Hyb = 3,
}

impl From<RfpaScheme> for Scheme {
    fn from(s: RfpaScheme) -> Scheme {
        match s {
            RfpaScheme::Ph => Scheme::Ph,
            RfpaScheme::Amp => Scheme::Amp,
            RfpaScheme::Sim => Scheme::Sim,
            RfpaScheme::Hyb => Scheme::Hyb,
        }
    }
}

/// Opaque validated waveform configuration.
pub struct RfpaConfig(WaveformConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: RfpaStatus, msg: &str) -> RfpaStatus {
    set_error(msg);
    status
}

/// Copies the most recent error message of this thread into `buf` (NUL
/// terminated, truncated to `len`); returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn rfpa_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rfpa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds the built-in default configuration.
#[no_mangle]
pub extern "C" fn rfpa_config_default() -> *mut RfpaConfig {
    Box::into_raw(Box::new(RfpaConfig(WaveformConfig::default_config())))
}

/// Parses and validates a configuration from `key = value` text.
#[no_mangle]
pub unsafe extern "C" fn rfpa_config_parse(
    text: *const c_char,
    out: *mut *mut RfpaConfig,
) -> RfpaStatus {
    if text.is_null() || out.is_null() {
        return fail(RfpaStatus::NullArgument, "null pointer argument");
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return fail(RfpaStatus::InvalidUtf8, "config text is not UTF-8");
    };
    let parsed = RawConfig::parse(text).and_then(|raw| validate_config(&raw));
    match parsed {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(RfpaConfig(cfg)));
            RfpaStatus::Ok
        }
        Err(e) => fail(RfpaStatus::ConfigError, &e.to_string()),
    }
}

/// Releases a configuration handle.
#[no_mangle]
pub unsafe extern "C" fn rfpa_config_free(cfg: *mut RfpaConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Samples in the active segment of one pulse (per antenna).
#[no_mangle]
pub unsafe extern "C" fn rfpa_config_samples_per_pulse(cfg: *const RfpaConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.samples_per_pulse())
}

/// Transmit antenna count.
#[no_mangle]
pub unsafe extern "C" fn rfpa_config_antennas(cfg: *const RfpaConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.m)
}

/// Short hex digest of the resolved configuration.
#[no_mangle]
pub unsafe extern "C" fn rfpa_config_digest(
    cfg: *const RfpaConfig,
    buf: *mut c_char,
    len: usize,
) -> RfpaStatus {
    let Some(cfg) = cfg.as_ref() else {
        return fail(RfpaStatus::NullArgument, "null config");
    };
    let digest = cfg.0.digest();
    if buf.is_null() || len <= digest.len() {
        return fail(RfpaStatus::BufferTooSmall, "digest buffer too small");
    }
    ptr::copy_nonoverlapping(digest.as_ptr() as *const c_char, buf, digest.len());
    *buf.add(digest.len()) = 0;
    RfpaStatus::Ok
}

/// Achievable bit rate in bits per second for a scheme under `cfg`.
#[no_mangle]
pub unsafe extern "C" fn rfpa_achievable_rate(
    cfg: *const RfpaConfig,
    scheme: RfpaScheme,
    out_rate: *mut f64,
) -> RfpaStatus {
    let (Some(cfg), false) = (cfg.as_ref(), out_rate.is_null()) else {
        return fail(RfpaStatus::NullArgument, "null pointer argument");
    };
    *out_rate = harness::achievable_rate(&cfg.0, scheme.into());
    RfpaStatus::Ok
}

/// Synthesizes one pulse with a random message and random secrets derived
/// from `seed`, writing interleaved I/Q samples row by row (antenna-major).
///
/// `out` must hold `2 * antennas * samples_per_pulse` doubles; `written`
/// receives the number of doubles stored.
#[no_mangle]
pub unsafe extern "C" fn rfpa_generate_pulse(
    cfg: *const RfpaConfig,
    seed: u64,
    pulse_index: usize,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> RfpaStatus {
    let Some(cfg) = cfg.as_ref() else {
        return fail(RfpaStatus::NullArgument, "null config");
    };
    if out.is_null() {
        return fail(RfpaStatus::NullArgument, "null output buffer");
    }
    let cfg = &cfg.0;
    if pulse_index >= cfg.l {
        return fail(RfpaStatus::RuntimeError, "pulse index outside the coding period");
    }
    let needed = 2 * cfg.m * cfg.samples_per_pulse();
    if out_len < needed {
        return fail(RfpaStatus::BufferTooSmall, "output buffer too small");
    }
    let secrets = SecretSequences::random(cfg, &mut stream_rng(seed, [100, 0, 0]));
    let msg = match message::random_message(cfg, &mut stream_rng(seed, [101, pulse_index as u64, 0]))
    {
        Ok(m) => m,
        Err(e) => return fail(RfpaStatus::RuntimeError, &e.to_string()),
    };
    let pulse = generate_pulse(cfg, &msg, &secrets, pulse_index);
    let mut cursor = out;
    for m in 0..pulse.rows() {
        for v in pulse.row(m) {
            *cursor = v.re;
            cursor = cursor.add(1);
            *cursor = v.im;
            cursor = cursor.add(1);
        }
    }
    if !written.is_null() {
        *written = needed;
    }
    RfpaStatus::Ok
}

/// Closed-form MIMO ambiguity function at `(tau, nu)` for a random
/// realization derived from `seed` (zero spatial frequencies).
#[no_mangle]
pub unsafe extern "C" fn rfpa_mimo_af(
    cfg: *const RfpaConfig,
    seed: u64,
    tau: f64,
    nu: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RfpaStatus {
    let Some(cfg) = cfg.as_ref() else {
        return fail(RfpaStatus::NullArgument, "null config");
    };
    if out_re.is_null() || out_im.is_null() {
        return fail(RfpaStatus::NullArgument, "null output pointer");
    }
    let cfg = &cfg.0;
    let secrets = SecretSequences::random(cfg, &mut stream_rng(seed, [102, 0, 0]));
    let msgs: Result<Vec<_>, _> = (0..cfg.l)
        .map(|l| message::random_message(cfg, &mut stream_rng(seed, [103, l as u64, 0])))
        .collect();
    let msgs = match msgs {
        Ok(m) => m,
        Err(e) => return fail(RfpaStatus::RuntimeError, &e.to_string()),
    };
    let value = mimo_af(cfg, &msgs, &secrets, &AFQuery::delay_doppler(tau, nu));
    *out_re = value.re;
    *out_im = value.im;
    RfpaStatus::Ok
}

/// One BER sweep point: Bob's and Eve's bit error rates over `trials` pulse
/// round-trips at the given Eb/N0.
#[no_mangle]
pub unsafe extern "C" fn rfpa_ber_point(
    cfg: *const RfpaConfig,
    scheme: RfpaScheme,
    ebn0_db: f64,
    trials: usize,
    seed: u64,
    out_ber_bob: *mut f64,
    out_ber_eve: *mut f64,
) -> RfpaStatus {
    let Some(cfg) = cfg.as_ref() else {
        return fail(RfpaStatus::NullArgument, "null config");
    };
    if out_ber_bob.is_null() || out_ber_eve.is_null() {
        return fail(RfpaStatus::NullArgument, "null output pointer");
    }
    let mut cfg = cfg.0.clone();
    cfg.scheme = scheme.into();
    let spec = harness::ExperimentSpec {
        kind: harness::ExperimentKind::Ber,
        cfg,
        axis: vec![ebn0_db],
        trials,
        seed,
    };
    match harness::run_ber_sweep(&spec) {
        Ok(curve) => {
            *out_ber_bob = curve.column("ber_bob").unwrap()[0];
            *out_ber_eve = curve.column("ber_eve").unwrap()[0];
            RfpaStatus::Ok
        }
        Err(e) => fail(RfpaStatus::RuntimeError, &e.to_string()),
    }
}

/// Secret-generation quality at one probing SNR: bit disagreement rate
/// between Alice and Bob and the entropy of Alice's sequence, for `phi`
/// quantization levels over `length` probing samples.
#[no_mangle]
pub unsafe extern "C" fn rfpa_crkg_point(
    length: usize,
    phi: usize,
    snr_db: f64,
    seed: u64,
    out_bdr: *mut f64,
    out_entropy_bits: *mut f64,
) -> RfpaStatus {
    if out_bdr.is_null() || out_entropy_bits.is_null() {
        return fail(RfpaStatus::NullArgument, "null output pointer");
    }
    if phi < 2 || !phi.is_power_of_two() || length == 0 || !length.is_multiple_of(phi) {
        return fail(
            RfpaStatus::ConfigError,
            "phi must be a power of two >= 2 dividing length",
        );
    }
    match crkg::probe_and_generate(length, snr_db, phi, phi, &FcmParams::default(), seed) {
        Ok(out) => {
            match crkg::symbol_bdr(&out.alice.gamma_t, &out.bob.gamma_t, phi) {
                Ok(b) => *out_bdr = b,
                Err(e) => return fail(RfpaStatus::RuntimeError, &e.to_string()),
            }
            *out_entropy_bits = crkg::sequence_entropy_bits(&out.alice.gamma_t, phi);
            RfpaStatus::Ok
        }
        Err(e) => fail(RfpaStatus::RuntimeError, &e.to_string()),
    }
}

/// Binary-symmetric secrecy-rate estimate from two link BERs.
#[no_mangle]
pub unsafe extern "C" fn rfpa_secrecy_rate(
    ber_bob: f64,
    ber_eve: f64,
    out_rate: *mut f64,
) -> RfpaStatus {
    if out_rate.is_null() {
        return fail(RfpaStatus::NullArgument, "null output pointer");
    }
    match harness::secrecy_rate_estimate(ber_bob, ber_eve) {
        Ok(v) => {
            *out_rate = v;
            RfpaStatus::Ok
        }
        Err(e) => fail(RfpaStatus::RuntimeError, &e.to_string()),
    }
}
