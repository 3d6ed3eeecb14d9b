//! Binomials, lexicographic subset ranking, permutation unranking, and
//! seeded random streams. Set indices and elements are 1-based.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `C(x, y)`, defined as 0 when `x < 0`, `y < 0` or `x < y`.
/// Saturates at `u128::MAX` if the value does not fit.
pub fn binom(x: i64, y: i64) -> u128 {
    if x < 0 || y < 0 || x < y {
        return 0;
    }
    let y = y.min(x - y) as u128;
    let x = x as u128;
    let mut acc: u128 = 1;
    for i in 0..y {
        // acc * (x - i) is divisible by (i + 1) because acc = C(x, i)
        match acc.checked_mul(x - i) {
            Some(v) => acc = v / (i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

fn pow2(e: usize) -> u128 {
    1u128 << e
}

/// The `j`-th subset of `[a]` in the lexicographic order where a set comes
/// before its extensions: for `a = 3` the order is
/// `{}, {1}, {1,2}, {1,2,3}, {1,3}, {2}, {2,3}, {3}`.
pub fn pow_unrank(a: usize, j: u128) -> Result<Vec<usize>> {
    if a > 126 {
        return Err(Error::InvalidParams(format!("ground set of size {a} too large")));
    }
    if j == 0 || j > pow2(a) {
        return Err(Error::OutOfRange {
            what: "Pow index",
            index: j,
            max: pow2(a),
        });
    }
    let mut rem = j - 1;
    let mut out = Vec::new();
    let mut last = 0;
    while rem > 0 {
        rem -= 1;
        let mut e = last + 1;
        while rem >= pow2(a - e) {
            rem -= pow2(a - e);
            e += 1;
        }
        out.push(e);
        last = e;
    }
    Ok(out)
}

/// Inverse of [`pow_unrank`]. `set` must be strictly increasing within `[a]`.
pub fn pow_rank(a: usize, set: &[usize]) -> Result<u128> {
    check_subset(a, set)?;
    let mut rank: u128 = 1;
    let mut last = 0;
    for &e in set {
        rank += 1;
        for x in last + 1..e {
            rank += pow2(a - x);
        }
        last = e;
    }
    Ok(rank)
}

fn check_subset(a: usize, set: &[usize]) -> Result<()> {
    let mut prev = 0;
    for &e in set {
        if e <= prev || e > a {
            return Err(Error::InvalidParams(format!(
                "{set:?} is not a strictly increasing subset of [{a}]"
            )));
        }
        prev = e;
    }
    Ok(())
}

/// The `j`-th `t`-subset of `[u]` in lexicographic order.
pub fn ksubset_unrank(u: usize, t: usize, j: u128) -> Result<Vec<usize>> {
    let total = binom(u as i64, t as i64);
    if j == 0 || j > total {
        return Err(Error::OutOfRange {
            what: "subset index",
            index: j,
            max: total,
        });
    }
    let mut rem = j - 1;
    let mut out = Vec::with_capacity(t);
    let mut e = 1;
    for slot in 0..t {
        loop {
            let left = (t - slot - 1) as i64;
            let with_e = binom((u - e) as i64, left);
            if rem < with_e {
                break;
            }
            rem -= with_e;
            e += 1;
        }
        out.push(e);
        e += 1;
    }
    Ok(out)
}

/// Inverse of [`ksubset_unrank`].
pub fn ksubset_rank(u: usize, set: &[usize]) -> Result<u128> {
    check_subset(u, set)?;
    let t = set.len();
    let mut rank: u128 = 1;
    let mut start = 1;
    for (slot, &e) in set.iter().enumerate() {
        let left = (t - slot - 1) as i64;
        for x in start..e {
            rank += binom((u - x) as i64, left);
        }
        start = e + 1;
    }
    Ok(rank)
}

/// All `t`-subsets of `[u]` in lexicographic order.
pub fn ksubsets(u: usize, t: usize) -> KSubsets {
    KSubsets {
        u,
        next: (t <= u).then(|| (1..=t).collect()),
    }
}

pub struct KSubsets {
    u: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for KSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let t = cur.len();
        let mut succ = cur.clone();
        if let Some(i) = (0..t).rev().find(|&i| succ[i] < self.u - (t - 1 - i)) {
            succ[i] += 1;
            for j in i + 1..t {
                succ[j] = succ[j - 1] + 1;
            }
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// All subsets of `[a]` in [`pow_unrank`] order.
pub fn pow_sets(a: usize) -> Vec<Vec<usize>> {
    (1..=pow2(a)).map(|j| pow_unrank(a, j).unwrap()).collect()
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, x| acc.saturating_mul(x))
}

/// The `idx`-th permutation of `[0, n)` in lexicographic order (0-based values).
pub fn nth_permutation(n: usize, mut idx: u128) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let pick = (idx / f) as usize;
        idx %= f;
        out.push(pool.remove(pick));
    }
    out
}

/// A uniformly random permutation of `[n]` (1-based values).
pub fn sample_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (1..=n).collect();
    p.shuffle(rng);
    p
}

/// A reproducible random stream identified by `(seed, stream)`. The
/// underlying generator is ChaCha8 whose 64-bit stream id is `stream` and
/// whose block counter starts at zero, so streams never overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// A derived stream, distinct for distinct `(self.stream, label)`.
    pub fn child(&self, label: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(label.wrapping_add(0x5851_f42d))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn binom_convention() {
        assert_eq!(binom(5, 2), 10);
        assert_eq!(binom(45, 22), 4_116_715_363_800);
        assert_eq!(binom(-1, 0), 0);
        assert_eq!(binom(3, -1), 0);
        assert_eq!(binom(2, 3), 0);
        assert_eq!(binom(0, 0), 1);
        assert_eq!(binom(400, 200), u128::MAX);
    }

    #[test]
    fn pow_order_for_three() {
        let expect: Vec<Vec<usize>> = vec![
            vec![],
            vec![1],
            vec![1, 2],
            vec![1, 2, 3],
            vec![1, 3],
            vec![2],
            vec![2, 3],
            vec![3],
        ];
        assert_eq!(pow_sets(3), expect);
        assert_eq!(pow_unrank(3, 1).unwrap(), Vec::<usize>::new());
        assert_eq!(pow_unrank(3, 4).unwrap(), vec![1, 2, 3]);
        assert!(pow_unrank(3, 9).is_err());
        assert!(pow_unrank(3, 0).is_err());
    }

    #[test]
    fn pow_matches_sorted_sequences() {
        // lexicographic comparison of sorted sequences gives the same order
        for a in 0..=8 {
            let mut all: Vec<Vec<usize>> = (0u32..1 << a)
                .map(|mask| (1..=a).filter(|&e| mask >> (e - 1) & 1 == 1).collect())
                .collect();
            all.sort();
            assert_eq!(pow_sets(a), all);
        }
    }

    #[test]
    fn pow_round_trip() {
        for a in 0..=16 {
            for j in 1..=(1u128 << a) {
                assert_eq!(pow_rank(a, &pow_unrank(a, j).unwrap()).unwrap(), j);
            }
        }
    }

    #[test]
    fn ksubset_examples() {
        assert_eq!(ksubset_unrank(4, 2, 1).unwrap(), vec![1, 2]);
        assert_eq!(ksubset_unrank(4, 2, 6).unwrap(), vec![3, 4]);
        assert!(ksubset_unrank(4, 2, 7).is_err());
        let all: Vec<_> = ksubsets(6, 3).collect();
        assert_eq!(all.len(), 20);
        for (i, s) in all.iter().enumerate() {
            assert_eq!(ksubset_unrank(6, 3, i as u128 + 1).unwrap(), *s);
            assert_eq!(ksubset_rank(6, s).unwrap(), i as u128 + 1);
        }
    }

    #[test]
    fn ksubset_round_trip() {
        for u in 0..=12 {
            for t in 0..=u {
                let listed: Vec<_> = ksubsets(u, t).collect();
                assert_eq!(listed.len() as u128, binom(u as i64, t as i64));
                let mut sorted = listed.clone();
                sorted.sort();
                assert_eq!(listed, sorted);
                for (i, s) in listed.iter().enumerate() {
                    let j = i as u128 + 1;
                    assert_eq!(ksubset_rank(u, s).unwrap(), j);
                    assert_eq!(&ksubset_unrank(u, t, j).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn nth_permutation_lexicographic() {
        let perms: Vec<_> = (0..24).map(|i| nth_permutation(4, i)).collect();
        let mut sorted = perms.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(perms, sorted);
        assert_eq!(perms[0], vec![0, 1, 2, 3]);
        assert_eq!(perms[23], vec![3, 2, 1, 0]);
    }

    #[test]
    fn permutation_sampling() {
        let s = RngStream::new(9, 0);
        assert_eq!(sample_permutation(1, &mut s.rng()), vec![1]);
        assert_eq!(
            sample_permutation(10, &mut s.rng()),
            sample_permutation(10, &mut s.rng())
        );

        let trials = 100_000u32;
        let mut rng = RngStream::new(11, 3).rng();
        let mut counts: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
        for _ in 0..trials {
            *counts.entry(sample_permutation(4, &mut rng)).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let p = 1.0 / 24.0;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        let mut chi2 = 0.0;
        for &c in counts.values() {
            assert!((c as f64 - mean).abs() <= 5.0 * sigma, "count {c}");
            chi2 += (c as f64 - mean).powi(2) / mean;
        }
        // 23 degrees of freedom; 0.999 quantile is about 49.7
        assert!(chi2 < 49.7, "chi2 = {chi2}");
    }

    #[test]
    fn streams_are_distinct() {
        let base = RngStream::new(1, 0);
        let a: u64 = base.child(1).rng().gen();
        let b: u64 = base.child(2).rng().gen();
        let c: u64 = RngStream::new(2, 0).child(1).rng().gen();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, base.child(1).rng().gen::<u64>());
    }
}
