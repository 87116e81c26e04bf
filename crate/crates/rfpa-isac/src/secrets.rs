//! Shared agility secrets: the integer sequences that drive per-pulse PRI
//! and carrier-frequency agility.

use rand::Rng;

use crate::config::WaveformConfig;
use crate::error::{Error, Result};

/// Length-`L` secret sequences over the agility alphabets.
///
/// Pulse `l` starts `tau * gamma_t[l]` after its PRI boundary and is shifted
/// in frequency by `K * delta_f * gamma_f[l]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretSequences {
    pub gamma_t: Vec<u32>,
    pub gamma_f: Vec<u32>,
    /// PRI agility alphabet size the sequence was drawn from.
    pub phi_t: usize,
    /// Frequency agility alphabet size the sequence was drawn from.
    pub phi_f: usize,
}

impl SecretSequences {
    /// Uniformly random secrets for `cfg.l` pulses.
    pub fn random<R: Rng>(cfg: &WaveformConfig, rng: &mut R) -> Self {
        let gamma_t = (0..cfg.l)
            .map(|_| rng.gen_range(0..cfg.phi_t as u32))
            .collect();
        let gamma_f = (0..cfg.l)
            .map(|_| rng.gen_range(0..cfg.phi_f as u32))
            .collect();
        Self {
            gamma_t,
            gamma_f,
            phi_t: cfg.phi_t,
            phi_f: cfg.phi_f,
        }
    }

    /// Agility disabled: both sequences all zero (plain FH pulse train).
    pub fn zeroed(cfg: &WaveformConfig) -> Self {
        Self {
            gamma_t: vec![0; cfg.l],
            gamma_f: vec![0; cfg.l],
            phi_t: cfg.phi_t,
            phi_f: cfg.phi_f,
        }
    }

    /// Builds from explicit symbol sequences, checking ranges against `cfg`.
    pub fn from_symbols(
        gamma_t: Vec<u32>,
        gamma_f: Vec<u32>,
        cfg: &WaveformConfig,
    ) -> Result<Self> {
        let s = Self {
            gamma_t,
            gamma_f,
            phi_t: cfg.phi_t,
            phi_f: cfg.phi_f,
        };
        s.validate(cfg)?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.gamma_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma_t.is_empty()
    }

    /// Pulse start offset within the PRI, in seconds.
    pub fn t_offset(&self, l: usize, cfg: &WaveformConfig) -> f64 {
        cfg.t_step() * self.gamma_t[l] as f64
    }

    /// Carrier frequency offset of pulse `l`, in Hz.
    pub fn f_offset(&self, l: usize, cfg: &WaveformConfig) -> f64 {
        cfg.f_step() * self.gamma_f[l] as f64
    }

    /// Checks the symbol ranges and the derived offsets against `cfg`.
    pub fn validate(&self, cfg: &WaveformConfig) -> Result<()> {
        if self.gamma_t.len() != self.gamma_f.len() {
            return Err(Error::DimensionMismatch(format!(
                "gamma_t has {} symbols, gamma_f has {}",
                self.gamma_t.len(),
                self.gamma_f.len()
            )));
        }
        for (l, &g) in self.gamma_t.iter().enumerate() {
            if g as usize >= cfg.phi_t {
                return Err(Error::ConstraintViolation(format!(
                    "gamma_t[{l}] outside [0, Phi_T)"
                )));
            }
            if self.t_offset(l, cfg) > cfg.t_p - cfg.tau + 1e-15 {
                return Err(Error::ConstraintViolation(format!(
                    "T_{l} exceeds T_p - tau"
                )));
            }
        }
        for (l, &g) in self.gamma_f.iter().enumerate() {
            if g as usize >= cfg.phi_f {
                return Err(Error::ConstraintViolation(format!(
                    "gamma_f[{l}] outside [0, Phi_f)"
                )));
            }
            if self.f_offset(l, cfg) + cfg.k as f64 * cfg.delta_f > cfg.bw * (1.0 + 1e-12) {
                return Err(Error::ConstraintViolation(format!(
                    "f_{l} + K*delta_f exceeds BW"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::WaveformConfig;
    use crate::rng::stream_rng;

    #[test]
    fn random_secrets_respect_ranges() {
        let cfg = WaveformConfig::default_config();
        let mut rng = stream_rng(5, [0, 0, 0]);
        for _ in 0..100 {
            let s = SecretSequences::random(&cfg, &mut rng);
            s.validate(&cfg).unwrap();
        }
    }

    #[test]
    fn out_of_alphabet_symbols_are_rejected() {
        let cfg = WaveformConfig::default_config();
        let bad = SecretSequences {
            gamma_t: vec![4; cfg.l],
            gamma_f: vec![0; cfg.l],
            phi_t: cfg.phi_t,
            phi_f: cfg.phi_f,
        };
        assert!(bad.validate(&cfg).is_err());
    }

    #[test]
    fn offsets_are_step_multiples() {
        let cfg = WaveformConfig::default_config();
        let s = SecretSequences::from_symbols(vec![3, 0, 1, 2], vec![1, 3, 0, 2], &cfg).unwrap();
        assert_eq!(s.t_offset(0, &cfg), 3.0 * cfg.tau);
        assert_eq!(s.f_offset(1, &cfg), 3.0 * cfg.k as f64 * cfg.delta_f);
    }
}
