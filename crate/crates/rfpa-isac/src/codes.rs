//! Hop-code algebra: ranking and unranking of the selection (which M of the
//! K hops) and permutation (which antenna gets which hop) components of a
//! code vector.
//!
//! A code vector `c` assigns antenna `m` the hop `c[m]`, all entries
//! distinct. It factors uniquely into the lexicographic rank of its sorted
//! hop subset and the factorial-base rank of the permutation that maps
//! sorted-subset positions onto antennas.

use crate::config::WaveformConfig;
use crate::error::{Error, Result};

/// Binomial coefficient as `u128`, erroring on overflow.
pub fn binomial(n: usize, k: usize) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Overflow(format!("C({n},{k})")))?;
        acc /= (i + 1) as u128;
    }
    Ok(acc)
}

/// Factorial as `u128`, erroring on overflow.
pub fn factorial(n: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for i in 2..=n {
        acc = acc
            .checked_mul(i as u128)
            .ok_or_else(|| Error::Overflow(format!("{n}!")))?;
    }
    Ok(acc)
}

/// Number of distinct code vectors: `C(K, M) * M!`.
pub fn code_count(k: usize, m: usize) -> Result<u128> {
    binomial(k, m)?
        .checked_mul(factorial(m)?)
        .ok_or_else(|| Error::Overflow(format!("C({k},{m})*{m}!")))
}

/// Sorted `m`-subset of `[0, k)` with lexicographic rank `rank`.
pub fn unrank_subset(rank: u128, k: usize, m: usize) -> Result<Vec<usize>> {
    if rank >= binomial(k, m)? {
        return Err(Error::IndexOverflow(rank));
    }
    let mut subset = Vec::with_capacity(m);
    let mut rank = rank;
    let mut next = 0usize;
    for remaining in (1..=m).rev() {
        // Smallest value v such that the subsets starting below v are exhausted.
        let mut v = next;
        loop {
            let block = binomial(k - v - 1, remaining - 1)?;
            if rank < block {
                break;
            }
            rank -= block;
            v += 1;
        }
        subset.push(v);
        next = v + 1;
    }
    Ok(subset)
}

/// Lexicographic rank of a sorted `m`-subset of `[0, k)`.
pub fn rank_subset(subset: &[usize], k: usize) -> Result<u128> {
    let m = subset.len();
    let mut rank: u128 = 0;
    let mut prev = 0usize;
    for (i, &v) in subset.iter().enumerate() {
        for u in prev..v {
            rank += binomial(k - u - 1, m - i - 1)?;
        }
        prev = v + 1;
    }
    Ok(rank)
}

/// Permutation of `[0, m)` with factorial-base rank `rank`.
pub fn unrank_permutation(rank: u128, m: usize) -> Result<Vec<usize>> {
    if rank >= factorial(m)? {
        return Err(Error::IndexOverflow(rank));
    }
    let mut digits = vec![0u128; m];
    let mut rank = rank;
    for i in (0..m).rev() {
        let base = (m - i) as u128;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<usize> = (0..m).collect();
    Ok(digits
        .into_iter()
        .map(|d| pool.remove(d as usize))
        .collect())
}

/// Factorial-base rank of a permutation of `[0, m)`.
pub fn rank_permutation(perm: &[usize]) -> Result<u128> {
    let m = perm.len();
    let mut rank: u128 = 0;
    let mut pool: Vec<usize> = (0..m).collect();
    for &p in perm {
        let pos = pool
            .iter()
            .position(|&v| v == p)
            .ok_or(Error::DuplicateHop)?;
        rank = rank * (pool.len() as u128) + pos as u128;
        pool.remove(pos);
    }
    Ok(rank)
}

/// Builds the code vector for `(selection rank, permutation rank)`:
/// antenna `m` gets the `perm[m]`-th element of the sorted selected subset.
pub fn compose_code(s_index: u128, p_index: u128, cfg: &WaveformConfig) -> Result<Vec<usize>> {
    let subset = unrank_subset(s_index, cfg.k, cfg.m)?;
    let perm = unrank_permutation(p_index, cfg.m)?;
    Ok(perm.into_iter().map(|p| subset[p]).collect())
}

/// Inverse of [`compose_code`]: recovers `(selection rank, permutation rank)`
/// from a code vector with distinct entries.
pub fn decompose_code(code: &[usize], cfg: &WaveformConfig) -> Result<(u128, u128)> {
    if code.len() != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "code vector has {} entries, expected {}",
            code.len(),
            cfg.m
        )));
    }
    let mut subset = code.to_vec();
    subset.sort_unstable();
    if subset.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateHop);
    }
    if subset.iter().any(|&v| v >= cfg.k) {
        return Err(Error::DomainError(format!(
            "hop index outside [0, {})",
            cfg.k
        )));
    }
    let s_index = rank_subset(&subset, cfg.k)?;
    let perm: Vec<usize> = code
        .iter()
        .map(|&c| subset.iter().position(|&v| v == c).unwrap())
        .collect();
    let p_index = rank_permutation(&perm)?;
    Ok((s_index, p_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, RawConfig};

    fn cfg(k: usize, m: usize) -> WaveformConfig {
        let mut raw = RawConfig::defaults();
        raw.set("K", &k.to_string()).unwrap();
        raw.set("M", &m.to_string()).unwrap();
        raw.set("N", &m.to_string()).unwrap();
        validate_config(&raw).unwrap()
    }

    #[test]
    fn worked_selection_permutation_example() {
        // Selecting hops {0,3,4,5} out of six and rearranging them as
        // (4th, 2nd, 1st, 3rd) yields the code vector [5,3,0,4].
        let cfg = cfg(6, 4);
        let s = rank_subset(&[0, 3, 4, 5], 6).unwrap();
        let p = rank_permutation(&[3, 1, 0, 2]).unwrap();
        assert_eq!(compose_code(s, p, &cfg).unwrap(), vec![5, 3, 0, 4]);
        assert_eq!(decompose_code(&[5, 3, 0, 4], &cfg).unwrap(), (s, p));
    }

    #[test]
    fn zero_indices_give_identity_assignment() {
        let cfg = cfg(10, 3);
        assert_eq!(compose_code(0, 0, &cfg).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn duplicate_entries_are_rejected() {
        let cfg = cfg(10, 3);
        assert!(matches!(
            decompose_code(&[1, 1, 2], &cfg),
            Err(Error::DuplicateHop)
        ));
    }

    #[test]
    fn subset_ranks_are_bijective_for_small_sizes() {
        for (k, m) in [(6, 4), (10, 5), (5, 1), (4, 4)] {
            let count = binomial(k, m).unwrap();
            for rank in 0..count {
                let subset = unrank_subset(rank, k, m).unwrap();
                assert!(subset.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(rank_subset(&subset, k).unwrap(), rank);
            }
        }
    }

    #[test]
    fn permutation_ranks_are_bijective_for_small_sizes() {
        for m in 1..=5 {
            let count = factorial(m).unwrap();
            let mut seen = std::collections::HashSet::new();
            for rank in 0..count {
                let perm = unrank_permutation(rank, m).unwrap();
                assert!(seen.insert(perm.clone()));
                assert_eq!(rank_permutation(&perm).unwrap(), rank);
            }
        }
    }

    #[test]
    fn random_code_round_trip() {
        use rand::Rng;
        let cfg = cfg(10, 8);
        let mut rng = crate::rng::stream_rng(11, [0, 0, 0]);
        for _ in 0..1000 {
            let mut pool: Vec<usize> = (0..cfg.k).collect();
            let mut code = Vec::with_capacity(cfg.m);
            for _ in 0..cfg.m {
                let i = rng.gen_range(0..pool.len());
                code.push(pool.remove(i));
            }
            let (s, p) = decompose_code(&code, &cfg).unwrap();
            assert_eq!(compose_code(s, p, &cfg).unwrap(), code);
        }
    }
}
