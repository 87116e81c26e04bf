//! Sampled complex-baseband signal container.

use num_complex::Complex64;

/// Uniformly sampled multi-antenna baseband segment.
///
/// Row `m` holds the samples of antenna `m`; sample `n` of a row sits at
/// time `t0 + n / f_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    rows: usize,
    cols: usize,
    /// Sample rate in Hz.
    pub f_s: f64,
    /// Absolute start time of the segment in seconds.
    pub t0: f64,
}

impl ComplexSignal {
    pub fn zeros(rows: usize, cols: usize, f_s: f64, t0: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); rows * cols],
            rows,
            cols,
            f_s,
            t0,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.samples[m * self.cols..(m + 1) * self.cols]
    }

    pub fn row_mut(&mut self, m: usize) -> &mut [Complex64] {
        &mut self.samples[m * self.cols..(m + 1) * self.cols]
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.samples[m * self.cols + n]
    }

    pub fn set(&mut self, m: usize, n: usize, v: Complex64) {
        self.samples[m * self.cols + n] = v;
    }

    /// Sum of squared magnitudes over all antennas and samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Mean per-sample power summed across antennas.
    pub fn mean_array_power(&self) -> f64 {
        if self.cols == 0 {
            0.0
        } else {
            self.energy() / self.cols as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.samples.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Complex64> {
        self.samples.iter_mut()
    }
}
