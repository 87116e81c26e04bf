//! Radar/communication parameter set, its validation rules and the flat
//! `key = value` config-file format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Information embedding scheme carried by the waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Phase embedding: PSK symbols on every chip, pre-shared hop codes.
    Ph,
    /// Amplitude embedding: ASK symbols on every chip, pre-shared hop codes.
    Amp,
    /// Spatial index modulation: data in the hop selection/permutation only.
    Sim,
    /// Hybrid: index/spatial modulation plus ASK and PSK on every chip.
    Hyb,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Ph, Scheme::Amp, Scheme::Sim, Scheme::Hyb];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Ph => "PH",
            Scheme::Amp => "AMP",
            Scheme::Sim => "SIM",
            Scheme::Hyb => "HYB",
        }
    }

    /// True when the hop codes carry data and must be detected blindly.
    pub fn embeds_codes(&self) -> bool {
        matches!(self, Scheme::Sim | Scheme::Hyb)
    }

    /// True when ASK amplitudes carry data.
    pub fn embeds_amplitude(&self) -> bool {
        matches!(self, Scheme::Amp | Scheme::Hyb)
    }

    /// True when PSK phases carry data.
    pub fn embeds_phase(&self) -> bool {
        matches!(self, Scheme::Ph | Scheme::Hyb)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PH" => Ok(Scheme::Ph),
            "AMP" => Ok(Scheme::Amp),
            "SIM" => Ok(Scheme::Sim),
            "HYB" => Ok(Scheme::Hyb),
            other => Err(Error::BadConfig(format!(
                "unknown scheme `{other}` (expected PH, AMP, SIM or HYB)"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Validated waveform parameter set.
///
/// Construct through [`validate_config`]; every instance satisfies the hop
/// orthogonality and agility range constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformConfig {
    /// Available frequency hops.
    pub k: usize,
    /// Sub-pulses (chips) per pulse.
    pub q: usize,
    /// Transmit antennas.
    pub m: usize,
    /// Receive antennas.
    pub n: usize,
    /// Pulses per coding period.
    pub l: usize,
    /// Hop spacing in Hz.
    pub delta_f: f64,
    /// Chip duration in seconds, equal to `1/delta_f`.
    pub delta_t: f64,
    /// Pulse repetition interval in seconds.
    pub t_p: f64,
    /// Pulse width in seconds, equal to `q * delta_t`.
    pub tau: f64,
    /// Sample rate in Hz.
    pub f_s: f64,
    /// Allocated bandwidth in Hz.
    pub bw: f64,
    /// ASK constellation size.
    pub j_ask: usize,
    /// PSK constellation size.
    pub j_psk: usize,
    /// ASK amplitude step.
    pub ask_step: f64,
    /// PRI agility alphabet size.
    pub phi_t: usize,
    /// Frequency agility alphabet size.
    pub phi_f: usize,
    /// Embedding scheme.
    pub scheme: Scheme,
    /// Reference the chip exponential to the PRI start instead of the agile
    /// pulse start (reproduces the legacy fixed-timebase signal form).
    pub legacy_eq6_timebase: bool,
}

impl WaveformConfig {
    /// Built-in default parameter set (PH scheme, four pulses per period).
    pub fn default_config() -> Self {
        validate_config(&RawConfig::defaults()).expect("builtin defaults validate")
    }

    /// Integer number of samples in one chip.
    pub fn samples_per_chip(&self) -> usize {
        (self.f_s * self.delta_t).round() as usize
    }

    /// Samples in the active (pulse-width) segment of one pulse.
    pub fn samples_per_pulse(&self) -> usize {
        self.q * self.samples_per_chip()
    }

    /// Pulse repetition frequency in Hz.
    pub fn prf(&self) -> f64 {
        1.0 / self.t_p
    }

    /// PRI agility step: pulse start offsets are multiples of the pulse width.
    pub fn t_step(&self) -> f64 {
        self.tau
    }

    /// Frequency agility step: carrier offsets are multiples of `k * delta_f`.
    pub fn f_step(&self) -> f64 {
        self.k as f64 * self.delta_f
    }

    /// ASK constellation point for index `j` in `[0, j_ask)`.
    pub fn ask_level(&self, j: usize) -> f64 {
        (2 * j + 1) as f64 * self.ask_step
    }

    /// PSK constellation phase for index `j` in `[0, j_psk)`.
    pub fn psk_phase(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.j_psk as f64
    }

    /// Bits per ASK symbol.
    pub fn ask_bits(&self) -> usize {
        self.j_ask.trailing_zeros() as usize
    }

    /// Bits per PSK symbol.
    pub fn psk_bits(&self) -> usize {
        self.j_psk.trailing_zeros() as usize
    }

    /// Mean squared amplitude over the ASK constellation.
    pub fn mean_ask_power(&self) -> f64 {
        (0..self.j_ask).map(|j| self.ask_level(j).powi(2)).sum::<f64>() / self.j_ask as f64
    }

    /// Canonical `key = value` rendering of the resolved configuration.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let mut push = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        push("K", self.k.to_string());
        push("Q", self.q.to_string());
        push("M", self.m.to_string());
        push("N", self.n.to_string());
        push("L", self.l.to_string());
        push("delta_f", format!("{:e}", self.delta_f));
        push("delta_t", format!("{:e}", self.delta_t));
        push("T_p", format!("{:e}", self.t_p));
        push("tau", format!("{:e}", self.tau));
        push("f_s", format!("{:e}", self.f_s));
        push("BW", format!("{:e}", self.bw));
        push("J_ask", self.j_ask.to_string());
        push("J_psk", self.j_psk.to_string());
        push("ask_step", format!("{:e}", self.ask_step));
        push("Phi_T", self.phi_t.to_string());
        push("Phi_f", self.phi_f.to_string());
        push("scheme", self.scheme.name().to_string());
        push("legacy_eq6_timebase", self.legacy_eq6_timebase.to_string());
        s
    }

    /// Short hex digest of the resolved configuration, embedded in output
    /// headers so result files identify the parameters that produced them.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_config_text().as_bytes());
        let mut out = String::with_capacity(16);
        for b in &hash[..8] {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

/// Unvalidated `key = value` parameter record.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

const KNOWN_KEYS: [&str; 18] = [
    "K", "Q", "M", "N", "L", "delta_f", "delta_t", "T_p", "tau", "f_s", "BW", "J_ask", "J_psk",
    "ask_step", "Phi_T", "Phi_f", "scheme", "legacy_eq6_timebase",
];

impl RawConfig {
    /// Built-in defaults. `L` is kept small so ambiguity-function
    /// evaluation stays desk-scale; secret-generation runs take their own
    /// sequence length.
    pub fn defaults() -> Self {
        let text = "\
K = 10
M = 8
N = 8
L = 4
delta_f = 5e6
delta_t = 0.2e-6
T_p = 10e-6
tau = 2e-6
f_s = 400e6
BW = 200e6
J_ask = 2
J_psk = 4
Phi_T = 4
Phi_f = 4
scheme = PH
";
        Self::parse(text).expect("builtin defaults parse")
    }

    /// Parses the flat config format: one `key = value` per line, `#` starts
    /// a comment, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::BadConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::BadConfig(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override on top of the current record.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::BadFlag(format!("unknown config key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::BadConfig(format!("missing key `{key}`")))?;
        raw.parse::<f64>()
            .map_err(|_| Error::BadConfig(format!("key `{key}`: `{raw}` is not a number")))
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let v = self.f64(key)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::BadConfig(format!(
                "key `{key}` must be a non-negative integer"
            )));
        }
        Ok(v as usize)
    }

    fn usize_or(&self, key: &str, fallback: usize) -> Result<usize> {
        if self.get(key).is_some() {
            self.usize(key)
        } else {
            Ok(fallback)
        }
    }
}

fn is_power_of_two(v: usize) -> bool {
    v >= 1 && v & (v - 1) == 0
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Validates a raw parameter record into a [`WaveformConfig`].
///
/// `Q` may be omitted, in which case it is derived as `tau / delta_t`, and
/// `ask_step` defaults to `1/J_ask` so the ASK constellation mean sits in
/// `(0, 1]`.
pub fn validate_config(raw: &RawConfig) -> Result<WaveformConfig> {
    let fail = |name: &str| Err(Error::ConstraintViolation(name.to_string()));

    let k = raw.usize("K")?;
    let m = raw.usize("M")?;
    let n = raw.usize("N")?;
    let l = raw.usize("L")?;
    let delta_f = raw.f64("delta_f")?;
    let delta_t = raw.f64("delta_t")?;
    let t_p = raw.f64("T_p")?;
    let tau = raw.f64("tau")?;
    let f_s = raw.f64("f_s")?;
    let bw = raw.f64("BW")?;
    let j_ask = raw.usize("J_ask")?;
    let j_psk = raw.usize("J_psk")?;
    let phi_t = raw.usize("Phi_T")?;
    let phi_f = raw.usize("Phi_f")?;
    let scheme: Scheme = raw.get("scheme").unwrap_or("PH").parse()?;
    let legacy_eq6_timebase = match raw.get("legacy_eq6_timebase") {
        None => false,
        Some("true") | Some("1") => true,
        Some("false") | Some("0") => false,
        Some(other) => {
            return Err(Error::BadConfig(format!(
                "legacy_eq6_timebase: `{other}` is not a boolean"
            )))
        }
    };

    for (name, v) in [
        ("K", k),
        ("M", m),
        ("N", n),
        ("L", l),
        ("J_ask", j_ask),
        ("J_psk", j_psk),
        ("Phi_T", phi_t),
        ("Phi_f", phi_f),
    ] {
        if v == 0 {
            return Err(Error::ConstraintViolation(format!("{name} > 0")));
        }
    }
    for (name, v) in [
        ("delta_f", delta_f),
        ("delta_t", delta_t),
        ("T_p", t_p),
        ("tau", tau),
        ("f_s", f_s),
        ("BW", bw),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::ConstraintViolation(format!("{name} > 0")));
        }
    }

    let q = raw.usize_or("Q", (tau / delta_t).round() as usize)?;
    if q == 0 {
        return Err(Error::ConstraintViolation("Q > 0".into()));
    }

    if !close(delta_t, 1.0 / delta_f) {
        return fail("delta_t = 1/delta_f");
    }
    if k as f64 * delta_f > bw * (1.0 + 1e-12) {
        return fail("K*delta_f <= BW");
    }
    if !close(tau, q as f64 * delta_t) {
        return fail("tau = Q*delta_t");
    }
    let spc = f_s * delta_t;
    if spc < 1.0 || (spc - spc.round()).abs() > 1e-6 {
        return fail("f_s*delta_t is a positive integer");
    }
    if m > k {
        return fail("M <= K");
    }
    if n < m {
        return fail("N >= M");
    }
    if tau > t_p {
        return fail("tau <= T_p");
    }
    if (phi_t as f64) > t_p / tau - 1.0 + 1e-9 {
        return fail("Phi_T <= T_p/tau - 1");
    }
    if (phi_f as f64) > bw / (k as f64 * delta_f) + 1e-9 {
        return fail("Phi_f <= BW/(K*delta_f)");
    }
    if !is_power_of_two(phi_t) {
        return fail("Phi_T is a power of two");
    }
    if !is_power_of_two(phi_f) {
        return fail("Phi_f is a power of two");
    }
    // Gray-coded bit maps need whole bits per symbol.
    if !is_power_of_two(j_ask) {
        return fail("J_ask is a power of two");
    }
    if !is_power_of_two(j_psk) {
        return fail("J_psk is a power of two");
    }

    let ask_step = if raw.get("ask_step").is_some() {
        let v = raw.f64("ask_step")?;
        if !(v > 0.0 && v.is_finite()) {
            return fail("ask_step > 0");
        }
        v
    } else {
        1.0 / j_ask as f64
    };

    Ok(WaveformConfig {
        k,
        q,
        m,
        n,
        l,
        delta_f,
        delta_t,
        t_p,
        tau,
        f_s,
        bw,
        j_ask,
        j_psk,
        ask_step,
        phi_t,
        phi_f,
        scheme,
        legacy_eq6_timebase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_defaults_validate_with_ten_chips() {
        let cfg = WaveformConfig::default_config();
        assert_eq!(cfg.k, 10);
        assert_eq!(cfg.q, 10);
        assert_eq!(cfg.m, 8);
        assert_eq!(cfg.samples_per_chip(), 80);
        assert_eq!(cfg.samples_per_pulse(), 800);
        assert_eq!(cfg.phi_t, 4);
        assert_eq!(cfg.phi_f, 4);
        assert!((cfg.prf() - 1e5).abs() < 1e-6);
    }

    #[test]
    fn chip_duration_must_match_hop_spacing() {
        let mut raw = RawConfig::defaults();
        raw.set("delta_t", "0.3e-6").unwrap();
        match validate_config(&raw) {
            Err(Error::ConstraintViolation(name)) => assert_eq!(name, "delta_t = 1/delta_f"),
            other => panic!("expected constraint violation, got {other:?}"),
        }
    }

    #[test]
    fn antennas_cannot_exceed_hops() {
        let mut raw = RawConfig::defaults();
        raw.set("M", "11").unwrap();
        raw.set("N", "11").unwrap();
        match validate_config(&raw) {
            Err(Error::ConstraintViolation(name)) => assert_eq!(name, "M <= K"),
            other => panic!("expected constraint violation, got {other:?}"),
        }
    }

    #[test]
    fn agility_alphabets_must_be_powers_of_two() {
        let mut raw = RawConfig::defaults();
        raw.set("Phi_T", "3").unwrap();
        assert!(matches!(
            validate_config(&raw),
            Err(Error::ConstraintViolation(_))
        ));
    }

    #[test]
    fn each_violation_names_its_constraint() {
        let cases = [
            ("K", "50", "K*delta_f <= BW"),
            ("tau", "1.9e-6", "tau = Q*delta_t"),
            ("f_s", "401e6", "f_s*delta_t is a positive integer"),
            ("N", "4", "N >= M"),
            ("Phi_T", "8", "Phi_T <= T_p/tau - 1"),
            ("Phi_f", "8", "Phi_f <= BW/(K*delta_f)"),
            ("J_psk", "3", "J_psk is a power of two"),
        ];
        for (key, value, expected) in cases {
            let mut raw = RawConfig::defaults();
            raw.set(key, value).unwrap();
            match validate_config(&raw) {
                Err(Error::ConstraintViolation(name)) => {
                    assert_eq!(name, expected, "override {key}={value}")
                }
                other => panic!("{key}={value}: expected violation, got {other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_overrides_parse() {
        let raw = RawConfig::parse("K = 10 # hops\n\n# comment line\nM = 4\n").unwrap();
        assert_eq!(raw.get("K"), Some("10"));
        assert_eq!(raw.get("M"), Some("4"));
        assert!(RawConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn digest_tracks_parameter_changes() {
        let a = WaveformConfig::default_config();
        let mut raw = RawConfig::defaults();
        raw.set("M", "4").unwrap();
        let b = validate_config(&raw).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), WaveformConfig::default_config().digest());
    }
}
