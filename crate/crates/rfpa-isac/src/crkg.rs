//! Channel-reciprocity secret generation.
//!
//! Each party quantizes its probing samples through a three-phase vector
//! quantizer: soft fuzzy clustering, greedy equalization of the cluster
//! sizes (every cluster ends up with exactly `L / Phi` members, which forces
//! maximum symbol entropy), and a communication-free canonical labeling of
//! the cluster centers so that Alice's and Bob's independently computed
//! labels coincide with high probability.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::channel::CIRSampleSet;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, tag};
use crate::secrets::SecretSequences;

/// Tuning knobs of the quantization pipeline.
#[derive(Debug, Clone)]
pub struct FcmParams {
    /// Fuzziness exponent, greater than one.
    pub fuzziness: f64,
    /// Convergence threshold on the Frobenius norm of the membership delta.
    pub eps: f64,
    pub max_iter: usize,
    /// Scale divisor of the label-canonicalization closeness thresholds.
    pub z: f64,
    /// Let every party start from the same initial centers (as if exchanged
    /// out of band) instead of deriving them from its own samples.
    pub shared_init: bool,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            fuzziness: 2.0,
            eps: 1e-5,
            max_iter: 300,
            z: 2.0,
            shared_init: false,
        }
    }
}

/// Converged fuzzy-clustering state.
#[derive(Debug, Clone)]
pub struct FcmState {
    pub centers: Vec<Complex64>,
    /// Row-major `L x Phi` membership matrix; every row sums to one.
    pub memberships: Vec<f64>,
    pub phi: usize,
    pub fuzziness: f64,
    pub iterations: usize,
}

impl FcmState {
    pub fn membership(&self, l: usize, phi: usize) -> f64 {
        self.memberships[l * self.phi + phi]
    }
}

/// Hard assignment with equalized cluster sizes.
#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub counts: Vec<usize>,
}

impl ClusterAssignment {
    /// Shannon entropy of the label histogram in bits.
    pub fn entropy_bits(&self) -> f64 {
        let total: usize = self.counts.iter().sum();
        if total == 0 {
            return 0.0;
        }
        -self
            .counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total as f64;
                p * p.log2()
            })
            .sum::<f64>()
    }
}

fn memberships_from_centers(
    samples: &[Complex64],
    centers: &[Complex64],
    fuzziness: f64,
) -> Vec<f64> {
    let phi = centers.len();
    let p = 2.0 / (fuzziness - 1.0);
    let mut memb = vec![0.0; samples.len() * phi];
    for (l, &s) in samples.iter().enumerate() {
        let row = &mut memb[l * phi..(l + 1) * phi];
        let mut coincident = None;
        for (j, &c) in centers.iter().enumerate() {
            if (s - c).norm_sqr() == 0.0 {
                coincident = Some(j);
                break;
            }
        }
        if let Some(j) = coincident {
            row[j] = 1.0;
            continue;
        }
        let mut total = 0.0;
        for (j, &c) in centers.iter().enumerate() {
            let d2 = (s - c).norm_sqr();
            let w = if (fuzziness - 2.0).abs() < 1e-12 {
                1.0 / d2
            } else {
                d2.powf(-p / 2.0)
            };
            row[j] = w;
            total += w;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    memb
}

fn centers_from_memberships(
    samples: &[Complex64],
    memb: &[f64],
    centers: &mut [Complex64],
    fuzziness: f64,
) {
    let phi = centers.len();
    for (j, center) in centers.iter_mut().enumerate() {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (l, &s) in samples.iter().enumerate() {
            let w = memb[l * phi + j].powf(fuzziness);
            num += s * w;
            den += w;
        }
        if den > 0.0 {
            *center = num / den;
        }
    }
}

/// Deterministic farthest-point center initialization: the start sample is
/// chosen from the seed, each further center is the sample farthest from
/// everything chosen so far.
fn init_centers(samples: &[Complex64], phi: usize, seed: u64) -> Result<Vec<Complex64>> {
    let start = (seed % samples.len() as u64) as usize;
    let mut centers = vec![samples[start]];
    while centers.len() < phi {
        let (best, dist) = samples
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let d = centers
                    .iter()
                    .map(|&c| (s - c).norm_sqr())
                    .fold(f64::INFINITY, f64::min);
                (i, d)
            })
            .fold((0usize, -1.0), |(bi, bd), (i, d)| {
                if d > bd {
                    (i, d)
                } else {
                    (bi, bd)
                }
            });
        if dist <= 0.0 {
            return Err(Error::DegenerateData(
                "not enough distinct samples for the requested cluster count".into(),
            ));
        }
        centers.push(samples[best]);
    }
    Ok(centers)
}

/// Phase I: iterates membership and center updates until the membership
/// matrix stabilizes.
pub fn fcm_cluster(
    samples: &[Complex64],
    phi: usize,
    params: &FcmParams,
    seed: u64,
) -> Result<FcmState> {
    fcm_cluster_with_init(samples, phi, params, None, seed)
}

/// Same as [`fcm_cluster`] with explicit initial centers.
pub fn fcm_cluster_with_init(
    samples: &[Complex64],
    phi: usize,
    params: &FcmParams,
    init: Option<&[Complex64]>,
    seed: u64,
) -> Result<FcmState> {
    if phi < 2 {
        return Err(Error::DomainError("cluster count must be at least 2".into()));
    }
    if samples.len() < phi {
        return Err(Error::DomainError(format!(
            "{} samples cannot fill {} clusters",
            samples.len(),
            phi
        )));
    }
    if !(params.fuzziness > 1.0) {
        return Err(Error::DomainError("fuzziness must exceed 1".into()));
    }
    if !(params.eps > 0.0) {
        return Err(Error::DomainError("eps must be positive".into()));
    }
    let mut centers = match init {
        Some(c) => {
            assert_eq!(c.len(), phi);
            c.to_vec()
        }
        None => init_centers(samples, phi, seed)?,
    };
    let mut memb = memberships_from_centers(samples, &centers, params.fuzziness);
    let mut iterations = 0usize;
    loop {
        centers_from_memberships(samples, &memb, &mut centers, params.fuzziness);
        let next = memberships_from_centers(samples, &centers, params.fuzziness);
        iterations += 1;
        let delta: f64 = memb
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        memb = next;
        if delta <= params.eps || iterations >= params.max_iter {
            break;
        }
    }
    Ok(FcmState {
        centers,
        memberships: memb,
        phi,
        fuzziness: params.fuzziness,
        iterations,
    })
}

#[derive(PartialEq)]
struct HeapEntry {
    membership: f64,
    sample: usize,
    cluster: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max membership first; ties resolved toward the lowest sample and
        // cluster index for determinism.
        self.membership
            .total_cmp(&other.membership)
            .then_with(|| other.sample.cmp(&self.sample))
            .then_with(|| other.cluster.cmp(&self.cluster))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Phase II: greedy equal-size assignment.
///
/// Repeatedly takes the globally strongest remaining membership; the sample
/// joins that cluster if it still has room (which strikes the sample's whole
/// membership row), otherwise only that entry is struck. Every cluster ends
/// with exactly `L / Phi` members.
pub fn equalize_cluster_sizes(state: &FcmState, phi: usize) -> Result<ClusterAssignment> {
    assert_eq!(phi, state.phi);
    let l_n = state.memberships.len() / phi;
    if !l_n.is_multiple_of(phi) {
        return Err(Error::DomainError(format!(
            "{l_n} samples do not split into {phi} equal clusters"
        )));
    }
    let target = l_n / phi;
    let mut heap = BinaryHeap::with_capacity(l_n * phi);
    for l in 0..l_n {
        for j in 0..phi {
            heap.push(HeapEntry {
                membership: state.membership(l, j),
                sample: l,
                cluster: j,
            });
        }
    }
    let mut labels = vec![usize::MAX; l_n];
    let mut counts = vec![0usize; phi];
    let mut assigned = 0usize;
    while assigned < l_n {
        let entry = heap.pop().expect("an unassigned sample always has a live entry");
        if labels[entry.sample] != usize::MAX || counts[entry.cluster] == target {
            continue;
        }
        labels[entry.sample] = entry.cluster;
        counts[entry.cluster] += 1;
        assigned += 1;
    }
    Ok(ClusterAssignment { labels, counts })
}

/// Hard cluster means after equalization; these feed the labeling phase.
pub fn hard_centers(
    samples: &[Complex64],
    assign: &ClusterAssignment,
    phi: usize,
) -> Vec<Complex64> {
    let mut sums = vec![Complex64::new(0.0, 0.0); phi];
    for (l, &s) in samples.iter().enumerate() {
        sums[assign.labels[l]] += s;
    }
    sums.iter()
        .zip(&assign.counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { s })
        .collect()
}

/// Phase III: communication-free canonical numbering of cluster centers.
///
/// Coordinates are standardized, centers start in ascending-x order, and
/// adjacent pairs that are close in x are reordered by descending-to-
/// ascending y (or by `x + y` when close in both coordinates) until a full
/// pass changes nothing. Returns one label per center and whether the passes
/// converged within the cap.
pub fn canonical_label(centers: &[Complex64], z: f64) -> (Vec<usize>, bool) {
    let phi = centers.len();
    if phi <= 1 {
        return (vec![0; phi], true);
    }
    let xs: Vec<f64> = centers.iter().map(|c| c.re).collect();
    let ys: Vec<f64> = centers.iter().map(|c| c.im).collect();
    let standardize = |v: &[f64]| -> Vec<f64> {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        v.iter().map(|x| (x - mean) / sd).collect()
    };
    let xs = standardize(&xs);
    let ys = standardize(&ys);

    // Spread of the pairwise signed differences sets the closeness scale.
    let diff_sd = |v: &[f64]| -> f64 {
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = v[i] - v[j];
                acc += d * d;
            }
        }
        (acc / (n * n) as f64).sqrt()
    };
    let t_x = diff_sd(&xs) / z;
    let t_y = diff_sd(&ys) / z;

    let mut order: Vec<usize> = (0..phi).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));

    let mut converged = false;
    for _ in 0..10 * phi {
        let mut changed = false;
        for pos in 0..phi - 1 {
            let (i, j) = (order[pos], order[pos + 1]);
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            if dx.abs() >= t_x {
                continue;
            }
            if dy >= t_y {
                order.swap(pos, pos + 1);
                changed = true;
            } else if dy.abs() < t_y && xs[i] + ys[i] > xs[j] + ys[j] {
                order.swap(pos, pos + 1);
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }

    let mut labels = vec![0usize; phi];
    for (pos, &center) in order.iter().enumerate() {
        labels[center] = pos;
    }
    (labels, converged)
}

/// Full per-party pipeline: cluster, equalize sizes, canonicalize labels,
/// and emit the secret symbol sequence.
pub fn party_sequence(
    samples: &[Complex64],
    phi: usize,
    params: &FcmParams,
    init: Option<&[Complex64]>,
    seed: u64,
) -> Result<Vec<u32>> {
    if !samples.len().is_multiple_of(phi) {
        return Err(Error::DomainError(format!(
            "sequence length {} is not a multiple of {phi}",
            samples.len()
        )));
    }
    let state = fcm_cluster_with_init(samples, phi, params, init, seed)?;
    let assign = equalize_cluster_sizes(&state, phi)?;
    let centers = hard_centers(samples, &assign, phi);
    let (relabel, _converged) = canonical_label(&centers, params.z);
    Ok(assign
        .labels
        .iter()
        .map(|&c| relabel[c] as u32)
        .collect())
}

/// Secret sequences generated by the three parties from two independent
/// probing rounds (one per agility alphabet).
#[derive(Debug, Clone)]
pub struct GeneratedSecrets {
    pub alice: SecretSequences,
    pub bob: SecretSequences,
    pub eve: SecretSequences,
}

/// Runs the pipeline for every party: `probe_t` quantized with `phi_t`
/// yields the PRI-agility secrets, `probe_f` with `phi_f` the frequency-
/// agility secrets. With `perfect_reconciliation` Bob adopts Alice's
/// sequences after generation.
pub fn generate_secrets(
    probe_t: &CIRSampleSet,
    probe_f: &CIRSampleSet,
    phi_t: usize,
    phi_f: usize,
    params: &FcmParams,
    seed: u64,
    perfect_reconciliation: bool,
) -> Result<GeneratedSecrets> {
    if probe_t.len() != probe_f.len() {
        return Err(Error::DimensionMismatch(format!(
            "probing sets have lengths {} and {}",
            probe_t.len(),
            probe_f.len()
        )));
    }
    let shared_init_t = params
        .shared_init
        .then(|| init_centers(&probe_t.alice, phi_t, seed))
        .transpose()?;
    let shared_init_f = params
        .shared_init
        .then(|| init_centers(&probe_f.alice, phi_f, seed))
        .transpose()?;

    let run = |samples_t: &[Complex64], samples_f: &[Complex64]| -> Result<SecretSequences> {
        Ok(SecretSequences {
            gamma_t: party_sequence(samples_t, phi_t, params, shared_init_t.as_deref(), seed)?,
            gamma_f: party_sequence(samples_f, phi_f, params, shared_init_f.as_deref(), seed)?,
            phi_t,
            phi_f,
        })
    };
    let alice = run(&probe_t.alice, &probe_f.alice)?;
    let bob = if perfect_reconciliation {
        alice.clone()
    } else {
        run(&probe_t.bob, &probe_f.bob)?
    };
    let eve = run(&probe_t.eve, &probe_f.eve)?;
    Ok(GeneratedSecrets { alice, bob, eve })
}

/// Shannon entropy in bits of a symbol sequence over `[0, phi)`.
pub fn sequence_entropy_bits(labels: &[u32], phi: usize) -> f64 {
    let mut counts = vec![0usize; phi];
    for &l in labels {
        counts[l as usize] += 1;
    }
    ClusterAssignment {
        labels: Vec::new(),
        counts,
    }
    .entropy_bits()
}

/// Scalar-quantizer baseline: independent nearest-level rounding into `phi`
/// uniform bins spanning the sample range.
pub fn scalar_quantize(values: &[f64], phi: usize) -> Vec<u32> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / phi as f64;
    values
        .iter()
        .map(|&v| {
            if width <= 0.0 {
                0
            } else {
                (((v - min) / width) as usize).min(phi - 1) as u32
            }
        })
        .collect()
}

/// Bitwise disagreement rate between two symbol sequences over `[0, phi)`,
/// counted on their `log2(phi)`-bit representations.
pub fn symbol_bdr(a: &[u32], b: &[u32], phi: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "sequence lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    assert!(phi.is_power_of_two() && phi >= 2);
    let bits = phi.trailing_zeros() as usize;
    if a.is_empty() {
        return Ok(0.0);
    }
    let diff: usize = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x ^ y).count_ones() as usize)
        .sum();
    Ok(diff as f64 / (a.len() * bits) as f64)
}

/// Disagreement rate across both secret sequences of two parties.
pub fn bdr(a: &SecretSequences, b: &SecretSequences) -> Result<f64> {
    if a.phi_t != b.phi_t || a.phi_f != b.phi_f {
        return Err(Error::DimensionMismatch(
            "sequences use different alphabets".into(),
        ));
    }
    let bits_t = (a.phi_t.trailing_zeros() as usize).max(1);
    let bits_f = (a.phi_f.trailing_zeros() as usize).max(1);
    let r_t = symbol_bdr(&a.gamma_t, &b.gamma_t, a.phi_t.max(2))?;
    let r_f = symbol_bdr(&a.gamma_f, &b.gamma_f, a.phi_f.max(2))?;
    let total_bits = (a.gamma_t.len() * bits_t + a.gamma_f.len() * bits_f) as f64;
    Ok((r_t * (a.gamma_t.len() * bits_t) as f64 + r_f * (a.gamma_f.len() * bits_f) as f64)
        / total_bits)
}

/// Convenience: probing sets plus generated secrets for one experiment
/// point, seeded deterministically.
pub fn probe_and_generate(
    len: usize,
    snr_db: f64,
    phi_t: usize,
    phi_f: usize,
    params: &FcmParams,
    seed: u64,
) -> Result<GeneratedSecrets> {
    let mut rng_t = stream_rng(seed, [tag::PROBE, 0, 0]);
    let probe_t = crate::channel::probe_cir(len, snr_db, &mut rng_t);
    let mut rng_f = stream_rng(seed, [tag::PROBE, 1, 0]);
    let probe_f = crate::channel::probe_cir(len, snr_db, &mut rng_f);
    generate_secrets(&probe_t, &probe_f, phi_t, phi_f, params, seed, false)
}
