use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rayon::prelude::*;

use super::canonical::{canonical_view, raw_view, ViewKey};
use super::{disjoint, pair_report, rational_string, total_variation, AuditMode, AuditReport, Distribution};
use crate::combinatorics::{factorial, nth_permutation};
use crate::error::{Error, Result};
use crate::model::{enumerate_others, validate_vector, DemandMatrix, PieceRef, SystemParams};
use crate::schemes::{cached_pieces, resolve_plan, DeliveryRandomness, Man, Scheme};
use crate::Rational;

/// Default bound on elementary events enumerated by one exact audit.
pub const DEFAULT_EVENT_CAP: u128 = 100_000_000;

fn too_large(count: u128, cap: u128) -> Error {
    Error::EnumerationTooLarge {
        what: "elementary events",
        count,
        cap,
        hint: "use the sampling audit",
    }
}

fn check_user(scheme: &dyn Scheme, user: usize, d_k: &[usize]) -> Result<()> {
    let params = scheme.params();
    if user == 0 || user > params.users {
        return Err(Error::OutOfRange {
            what: "user",
            index: user as u128,
            max: params.users as u128,
        });
    }
    validate_vector(params, d_k)
}

/// The user's cached labels and the rest, in label order.
fn split_labels(scheme: &dyn Scheme, user: usize) -> (Vec<usize>, Vec<usize>) {
    (0..scheme.label_count()).partition(|&l| scheme.cached_by(user, l))
}

/// Distribution of the canonical view of `user` under `demands`, with the
/// user's cache fixed to pieces `0..c` of every file.
///
/// Only the `c!` assignments of cached labels to those pieces are
/// enumerated per file; uncached labels take pieces `c..n` in label order.
/// Any other assignment of the uncached labels differs by a renaming of
/// uncached pieces, which the canonical view does not see, so every
/// canonical view keeps its exact probability. Fixing the cache itself is
/// without loss of generality because the label maps are uniform, so every
/// cache realization is a renaming of this one.
pub fn canonical_distribution(scheme: &dyn Scheme, user: usize, demands: &DemandMatrix) -> Result<Distribution> {
    let files = scheme.params().files;
    let (cached_labels, uncached_labels) = split_labels(scheme, user);
    let c = cached_labels.len();
    let arrangements: Vec<Vec<usize>> = (0..factorial(c)).map(|i| nth_permutation(c, i)).collect();
    let per_file = arrangements.len() as u128;
    let placements = (0..files).try_fold(1u128, |acc, _| acc.checked_mul(per_file)).ok_or_else(|| too_large(u128::MAX, DEFAULT_EVENT_CAP))?;
    let shape = scheme.randomness_shape();
    let realizations = DeliveryRandomness::count(&shape);

    let cache: BTreeSet<PieceRef> = (1..=files)
        .flat_map(|i| (0..c).map(move |p| PieceRef::new(i, p)))
        .collect();
    let mut maps = vec![vec![0usize; scheme.label_count()]; files];
    for map in maps.iter_mut() {
        for (s, &l) in uncached_labels.iter().enumerate() {
            map[l] = c + s;
        }
    }

    let mut dist = Distribution::default();
    for r in 0..realizations {
        let randomness = DeliveryRandomness::nth(&shape, r);
        let plan = scheme.plan(demands, &randomness)?;
        for mut idx in 0..placements {
            for map in maps.iter_mut() {
                let arrangement = &arrangements[(idx % per_file) as usize];
                idx /= per_file;
                for (rank, &l) in cached_labels.iter().enumerate() {
                    map[l] = arrangement[rank];
                }
            }
            let metas = resolve_plan(scheme, &plan, &maps)?;
            dist.add(canonical_view(&cache, &metas));
        }
    }
    Ok(dist)
}

/// Enumerates every label map (all of them if the placement is secret,
/// only the identity otherwise) and every delivery realization, grouping
/// raw views by the user's raw cache metadata.
pub fn raw_distributions(
    scheme: &dyn Scheme,
    user: usize,
    demands: &DemandMatrix,
    key: fn(&BTreeSet<PieceRef>, &[crate::model::MessageMeta]) -> ViewKey,
) -> Result<BTreeMap<Vec<PieceRef>, Distribution>> {
    let files = scheme.params().files;
    let n = scheme.label_count();
    let all: Vec<Vec<usize>> = if scheme.private_placement() {
        (0..factorial(n)).map(|i| nth_permutation(n, i)).collect()
    } else {
        vec![(0..n).collect()]
    };
    let per_file = all.len() as u128;
    let placements = (0..files).fold(1u128, |acc, _| acc.saturating_mul(per_file));
    let shape = scheme.randomness_shape();
    let realizations = DeliveryRandomness::count(&shape);

    let mut out: BTreeMap<Vec<PieceRef>, Distribution> = BTreeMap::new();
    for r in 0..realizations {
        let randomness = DeliveryRandomness::nth(&shape, r);
        let plan = scheme.plan(demands, &randomness)?;
        for mut idx in 0..placements {
            let maps: Vec<Vec<usize>> = (0..files)
                .map(|_| {
                    let m = all[(idx % per_file) as usize].clone();
                    idx /= per_file;
                    m
                })
                .collect();
            let cache = cached_pieces(scheme, user, &maps);
            let metas = resolve_plan(scheme, &plan, &maps)?;
            let view = key(&cache, &metas);
            out.entry(cache.into_iter().collect()).or_default().add(view);
        }
    }
    Ok(out)
}

fn raw_key(_cache: &BTreeSet<PieceRef>, metas: &[crate::model::MessageMeta]) -> ViewKey {
    raw_view(metas)
}

/// Exact audit of `user` with demand `d_k` against every demand of the
/// other users. Private placements use the canonical reduction; identity
/// placements are enumerated raw with the cache realization explicit.
pub fn audit_exact(scheme: &dyn Scheme, user: usize, d_k: &[usize], cap: u128) -> Result<AuditReport> {
    check_user(scheme, user, d_k)?;
    let params = scheme.params();
    let others = enumerate_others(params, user, d_k, cap)?;
    let n = scheme.label_count();
    let c = split_labels(scheme, user).0.len();
    let per_file = if scheme.private_placement() { factorial(c) } else { 1 };
    let placements = (0..params.files).fold(1u128, |acc, _| acc.saturating_mul(per_file));
    let per_matrix = placements.saturating_mul(DeliveryRandomness::count(&scheme.randomness_shape()));
    let events = per_matrix.saturating_mul(others.len() as u128);
    if events > cap || n > 20 {
        return Err(too_large(events, cap));
    }

    let (pairs, support) = if scheme.private_placement() {
        let dists = others
            .par_iter()
            .map(|d| canonical_distribution(scheme, user, d))
            .collect::<Result<Vec<_>>>()?;
        let support = union_support(dists.iter());
        let mut pairs = Vec::new();
        for a in 0..dists.len() {
            for b in a + 1..dists.len() {
                pairs.push(pair_report(
                    others[a].to_string(),
                    others[b].to_string(),
                    total_variation(&dists[a], &dists[b]),
                    disjoint(&dists[a], &dists[b]),
                ));
            }
        }
        (pairs, support)
    } else {
        let grouped = others
            .par_iter()
            .map(|d| raw_distributions(scheme, user, d, raw_key))
            .collect::<Result<Vec<_>>>()?;
        let support = grouped.iter().map(|g| union_support(g.values())).max().unwrap_or(0);
        let mut pairs = Vec::new();
        for a in 0..grouped.len() {
            for b in a + 1..grouped.len() {
                let mut worst = Rational::zero();
                let mut all_disjoint = true;
                for (z, da) in &grouped[a] {
                    let db = &grouped[b][z];
                    worst = worst.max(total_variation(da, db));
                    all_disjoint &= disjoint(da, db);
                }
                pairs.push(pair_report(others[a].to_string(), others[b].to_string(), worst, all_disjoint));
            }
        }
        (pairs, support)
    };

    let max = pairs
        .iter()
        .map(|p| super::parse_rational(&p.tv_exact))
        .max()
        .unwrap_or_else(Rational::zero);
    Ok(AuditReport {
        mode: AuditMode::Exact,
        scheme: scheme.kind().to_string(),
        user,
        d_k: d_k.to_vec(),
        max_tv: num_traits::ToPrimitive::to_f64(&max).unwrap_or(f64::NAN),
        max_tv_exact: rational_string(max),
        pairs,
        events_per_matrix: per_matrix,
        support,
        threshold: 0.0,
        pass: max.is_zero(),
    })
}

fn union_support<'a>(dists: impl Iterator<Item = &'a Distribution>) -> usize {
    let mut keys: BTreeSet<&ViewKey> = BTreeSet::new();
    for d in dists {
        keys.extend(d.counts.keys());
    }
    keys.len()
}

/// Exact audit of the classical scheme at `t'`, with or without the secret
/// label permutation, over every demand of user 1. Returns the report with
/// the largest distance.
pub fn leakage_demo_man(params: &SystemParams, t_prime: usize, precoding: bool, cap: u128) -> Result<AuditReport> {
    let man = Man::new(*params, t_prime, precoding)?;
    let mut worst: Option<AuditReport> = None;
    for d in crate::model::all_demand_vectors(params) {
        let report = audit_exact(&man, 1, &d, cap)?;
        if worst.as_ref().is_none_or(|w| report.max_tv_rational() > w.max_tv_rational()) {
            worst = Some(report);
        }
    }
    Ok(worst.expect("at least one demand vector"))
}
