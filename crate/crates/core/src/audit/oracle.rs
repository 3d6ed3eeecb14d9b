use std::collections::{BTreeMap, BTreeSet};

use crate::combinatorics::{binom, factorial, nth_permutation};
use crate::error::{Error, Result};
use crate::model::{DemandMatrix, SystemParams};
use crate::schemes::{DeliveryRandomness, Scheme, SchemeKind};
use crate::Rational;

/// How a single file's share of the view is observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerFileView {
    /// The piece carried in each message, in message order.
    Ordered,
    /// The set of the file's pieces appearing anywhere in the packet.
    Unordered,
}

impl PerFileView {
    pub fn for_kind(kind: SchemeKind) -> Self {
        match kind {
            SchemeKind::MdsCorner => PerFileView::Unordered,
            _ => PerFileView::Ordered,
        }
    }
}

/// Closed-form probability of one file's view given the user's cache:
/// `(1 / (2^{K-1})!)^2` for the MDS scheme at `t = 0`, and
/// `1 / C(2K-1, K-1)` for the corner scheme.
pub fn per_file_probability_oracle(kind: SchemeKind, params: &SystemParams, t: Option<usize>) -> Result<Rational> {
    let k = params.users;
    match (kind, t) {
        (SchemeKind::Mds, Some(0)) => {
            let f = factorial(1 << (k - 1)) as i128;
            Ok(Rational::new(1, f * f))
        }
        (SchemeKind::MdsCorner, _) => {
            let c = binom(2 * k as i64 - 1, k as i64 - 1) as i128;
            Ok(Rational::new(1, c))
        }
        _ => Err(Error::Unsupported(format!(
            "no closed-form per-file probability for {kind} at t = {t:?}"
        ))),
    }
}

/// Enumerates every label map of `file` consistent with a fixed cache of
/// `user` (cached labels onto pieces `0..c`, the rest onto `c..n`) and
/// returns the distinct probabilities of the resulting per-file views.
pub fn enumerate_per_file_probabilities(
    scheme: &dyn Scheme,
    user: usize,
    demands: &DemandMatrix,
    file: usize,
    view: PerFileView,
) -> Result<BTreeSet<Rational>> {
    if !scheme.randomness_shape().is_empty() {
        return Err(Error::Unsupported("per-file enumeration needs a deterministic delivery".into()));
    }
    let n = scheme.label_count();
    let (cached, uncached): (Vec<usize>, Vec<usize>) = (0..n).partition(|&l| scheme.cached_by(user, l));
    let c = cached.len();
    let plan = scheme.plan(demands, &DeliveryRandomness::default())?;
    let identity: Vec<usize> = (0..n).collect();

    let mut counts: BTreeMap<Vec<(usize, usize)>, u64> = BTreeMap::new();
    let mut total = 0u64;
    for a in 0..factorial(c) {
        let on_cached = nth_permutation(c, a);
        for b in 0..factorial(n - c) {
            let on_uncached = nth_permutation(n - c, b);
            let mut map = identity.clone();
            for (r, &l) in cached.iter().enumerate() {
                map[l] = on_cached[r];
            }
            for (r, &l) in uncached.iter().enumerate() {
                map[l] = c + on_uncached[r];
            }
            let mut seen: Vec<(usize, usize)> = Vec::new();
            for (m, msg) in plan.iter().enumerate() {
                for &(f, l) in &msg.entries {
                    if f == file {
                        seen.push((m, map[l]));
                    }
                }
            }
            if view == PerFileView::Unordered {
                let mut pieces: Vec<(usize, usize)> = seen.into_iter().map(|(_, p)| (0, p)).collect();
                pieces.sort_unstable();
                pieces.dedup();
                seen = pieces;
            }
            *counts.entry(seen).or_default() += 1;
            total += 1;
        }
    }
    Ok(counts
        .values()
        .map(|&n| Rational::new(n as i128, total as i128))
        .collect())
}
