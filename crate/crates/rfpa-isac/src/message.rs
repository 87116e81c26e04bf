//! Bit-level message encoding for the four embedding schemes.
//!
//! Bit layout per chip, MSB first: the spatial/index bits (when the scheme
//! embeds codes), then per antenna the ASK bits followed by the PSK bits
//! (when embedded). ASK and PSK symbols are Gray-coded over their
//! constellation index; the combined code index `s * M! + p` is unranked
//! into a subset and a permutation.

use rand::Rng;

use crate::codes;
use crate::config::{Scheme, WaveformConfig};
use crate::error::{Error, Result};

/// Binary-reflected Gray code of an index.
pub fn gray_encode(index: usize) -> usize {
    index ^ (index >> 1)
}

/// Inverse of [`gray_encode`].
pub fn gray_decode(mut value: usize) -> usize {
    let mut index = value;
    while value > 0 {
        value >>= 1;
        index ^= value;
    }
    index
}

/// Per-chip symbol content: constellation indices plus the hop-code factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipMessage {
    /// ASK constellation index per antenna.
    pub amp_idx: Vec<usize>,
    /// PSK constellation index per antenna.
    pub psk_idx: Vec<usize>,
    /// Hop code per antenna, always `compose_code(s_index, p_index)`.
    pub code: Vec<usize>,
    /// Lexicographic rank of the selected hop subset.
    pub s_index: u128,
    /// Factorial-base rank of the antenna permutation.
    pub p_index: u128,
}

impl ChipMessage {
    /// Transmit amplitude of antenna `m`: the embedded ASK level, or exactly
    /// one for the schemes that keep amplitudes fixed.
    pub fn amplitude(&self, m: usize, cfg: &WaveformConfig) -> f64 {
        if cfg.scheme.embeds_amplitude() {
            cfg.ask_level(self.amp_idx[m])
        } else {
            1.0
        }
    }

    pub fn phase(&self, m: usize, cfg: &WaveformConfig) -> f64 {
        cfg.psk_phase(self.psk_idx[m])
    }
}

/// Message carried by one pulse: `Q` chips of symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PulseMessage {
    pub chips: Vec<ChipMessage>,
}

/// Number of index/spatial bits per chip: `floor(log2(C(K,M) * M!))`.
pub fn sim_bits_per_chip(cfg: &WaveformConfig) -> Result<usize> {
    let count = codes::code_count(cfg.k, cfg.m)?;
    Ok(127 - count.leading_zeros() as usize)
}

/// Per-chip bit budget of the configured scheme.
pub fn bits_per_chip(cfg: &WaveformConfig) -> Result<usize> {
    Ok(match cfg.scheme {
        Scheme::Ph => cfg.m * cfg.psk_bits(),
        Scheme::Amp => cfg.m * cfg.ask_bits(),
        Scheme::Sim => sim_bits_per_chip(cfg)?,
        Scheme::Hyb => sim_bits_per_chip(cfg)? + cfg.m * (cfg.ask_bits() + cfg.psk_bits()),
    })
}

/// Per-pulse bit budget of the configured scheme.
pub fn bits_per_pulse(cfg: &WaveformConfig) -> Result<usize> {
    Ok(cfg.q * bits_per_chip(cfg)?)
}

/// Pre-shared hop code for the schemes that do not embed data in the codes:
/// antenna `m` uses hop `(m + q) mod K` during chip `q`.
pub fn preshared_code(cfg: &WaveformConfig, q: usize) -> Vec<usize> {
    (0..cfg.m).map(|m| (m + q) % cfg.k).collect()
}

fn take_bits(bits: &[u8], cursor: &mut usize, n: usize) -> u128 {
    let mut v: u128 = 0;
    for _ in 0..n {
        v = (v << 1) | bits[*cursor] as u128;
        *cursor += 1;
    }
    v
}

fn push_bits(out: &mut Vec<u8>, value: u128, n: usize) {
    for i in (0..n).rev() {
        out.push(((value >> i) & 1) as u8);
    }
}

/// Maps a bit string of exactly [`bits_per_pulse`] bits onto a pulse message.
pub fn encode_message(bits: &[u8], cfg: &WaveformConfig) -> Result<PulseMessage> {
    let budget = bits_per_pulse(cfg)?;
    if bits.len() != budget {
        return Err(Error::LengthMismatch {
            expected: budget,
            got: bits.len(),
        });
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::DomainError(format!("bit value {b} is not 0/1")));
    }

    let m_fact = codes::factorial(cfg.m)?;
    let mut cursor = 0usize;
    let mut chips = Vec::with_capacity(cfg.q);
    for q in 0..cfg.q {
        let (s_index, p_index, code) = if cfg.scheme.embeds_codes() {
            let combined = take_bits(bits, &mut cursor, sim_bits_per_chip(cfg)?);
            if combined >= codes::code_count(cfg.k, cfg.m)? {
                return Err(Error::IndexOverflow(combined));
            }
            let s = combined / m_fact;
            let p = combined % m_fact;
            let code = codes::compose_code(s, p, cfg)?;
            (s, p, code)
        } else {
            let code = preshared_code(cfg, q);
            let (s, p) = codes::decompose_code(&code, cfg)?;
            (s, p, code)
        };

        let mut amp_idx = vec![0usize; cfg.m];
        let mut psk_idx = vec![0usize; cfg.m];
        for m in 0..cfg.m {
            if cfg.scheme.embeds_amplitude() {
                let v = take_bits(bits, &mut cursor, cfg.ask_bits()) as usize;
                amp_idx[m] = gray_decode(v);
            }
            if cfg.scheme.embeds_phase() {
                let v = take_bits(bits, &mut cursor, cfg.psk_bits()) as usize;
                psk_idx[m] = gray_decode(v);
            } else {
                psk_idx[m] = 0;
            }
        }
        chips.push(ChipMessage {
            amp_idx,
            psk_idx,
            code,
            s_index,
            p_index,
        });
    }
    debug_assert_eq!(cursor, bits.len());
    Ok(PulseMessage { chips })
}

/// Inverse of [`encode_message`].
pub fn decode_message(msg: &PulseMessage, cfg: &WaveformConfig) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(bits_per_pulse(cfg)?);
    let m_fact = codes::factorial(cfg.m)?;
    for chip in &msg.chips {
        if cfg.scheme.embeds_codes() {
            let combined = chip.s_index * m_fact + chip.p_index;
            push_bits(&mut out, combined, sim_bits_per_chip(cfg)?);
        }
        for m in 0..cfg.m {
            if cfg.scheme.embeds_amplitude() {
                push_bits(&mut out, gray_encode(chip.amp_idx[m]) as u128, cfg.ask_bits());
            }
            if cfg.scheme.embeds_phase() {
                push_bits(&mut out, gray_encode(chip.psk_idx[m]) as u128, cfg.psk_bits());
            }
        }
    }
    Ok(out)
}

/// Draws a uniformly random message for the configured scheme.
pub fn random_message<R: Rng>(cfg: &WaveformConfig, rng: &mut R) -> Result<PulseMessage> {
    let bits = random_bits(bits_per_pulse(cfg)?, rng);
    encode_message(&bits, cfg)
}

/// Draws `n` independent uniform bits.
pub fn random_bits<R: Rng>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..2u8)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, RawConfig};

    fn cfg_with(scheme: &str, k: usize, m: usize) -> WaveformConfig {
        let mut raw = RawConfig::defaults();
        raw.set("scheme", scheme).unwrap();
        raw.set("K", &k.to_string()).unwrap();
        raw.set("M", &m.to_string()).unwrap();
        raw.set("N", &m.to_string()).unwrap();
        validate_config(&raw).unwrap()
    }

    #[test]
    fn non_embedding_schemes_fix_amplitude_and_phase() {
        let cfg = cfg_with("PH", 10, 8);
        let bits = random_bits(bits_per_pulse(&cfg).unwrap(), &mut crate::rng::stream_rng(1, [0; 3]));
        let msg = encode_message(&bits, &cfg).unwrap();
        assert_eq!(msg.chips[0].amplitude(0, &cfg), 1.0);
        let cfg = cfg_with("SIM", 10, 8);
        let bits = random_bits(bits_per_pulse(&cfg).unwrap(), &mut crate::rng::stream_rng(1, [0; 3]));
        let msg = encode_message(&bits, &cfg).unwrap();
        assert_eq!(msg.chips[0].amplitude(0, &cfg), 1.0);
        assert_eq!(msg.chips[0].phase(0, &cfg), 0.0);
    }

    #[test]
    fn all_zero_bits_select_first_psk_point() {
        let cfg = cfg_with("PH", 10, 8);
        let bits = vec![0u8; bits_per_pulse(&cfg).unwrap()];
        let msg = encode_message(&bits, &cfg).unwrap();
        for chip in &msg.chips {
            assert!(chip.psk_idx.iter().all(|&j| j == 0));
        }
    }

    #[test]
    fn budgets_match_rate_formulas_at_defaults() {
        assert_eq!(bits_per_pulse(&cfg_with("PH", 10, 8)).unwrap(), 160);
        assert_eq!(bits_per_pulse(&cfg_with("AMP", 10, 8)).unwrap(), 80);
        assert_eq!(bits_per_chip(&cfg_with("SIM", 10, 5)).unwrap(), 14);
        assert_eq!(bits_per_chip(&cfg_with("HYB", 10, 8)).unwrap(), 44);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let cfg = cfg_with("PH", 10, 8);
        assert!(matches!(
            encode_message(&[0, 1, 0], &cfg),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn exhaustive_sim_indices_are_bijective() {
        // All 2^14 encodable indices for K=10, M=5 map to distinct
        // (subset, permutation) pairs and re-rank to the same index.
        let cfg = cfg_with("SIM", 10, 5);
        let budget = sim_bits_per_chip(&cfg).unwrap();
        assert_eq!(budget, 14);
        let m_fact = codes::factorial(cfg.m).unwrap();
        let mut seen = std::collections::HashSet::new();
        for combined in 0u128..(1 << budget) {
            let s = combined / m_fact;
            let p = combined % m_fact;
            let code = codes::compose_code(s, p, &cfg).unwrap();
            assert!(seen.insert(code.clone()));
            let (s2, p2) = codes::decompose_code(&code, &cfg).unwrap();
            assert_eq!(s2 * m_fact + p2, combined);
        }
    }

    #[test]
    fn gray_code_is_involutive_and_adjacent() {
        for v in 0..64 {
            assert_eq!(gray_decode(gray_encode(v)), v);
        }
        for v in 0..63 {
            let diff = gray_encode(v) ^ gray_encode(v + 1);
            assert_eq!(diff.count_ones(), 1);
        }
    }

    #[test]
    fn round_trip_all_schemes() {
        for scheme in ["PH", "AMP", "SIM", "HYB"] {
            let cfg = cfg_with(scheme, 10, 8);
            let mut rng = crate::rng::stream_rng(3, [0, 0, 0]);
            for _ in 0..20 {
                let bits = random_bits(bits_per_pulse(&cfg).unwrap(), &mut rng);
                let msg = encode_message(&bits, &cfg).unwrap();
                assert_eq!(decode_message(&msg, &cfg).unwrap(), bits, "{scheme}");
            }
        }
    }
}
