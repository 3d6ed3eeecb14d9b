use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::canonical::{view_signature, ViewKey};
use super::{disjoint, pair_report, rational_string, total_variation, AuditMode, AuditReport, Distribution};
use crate::combinatorics::RngStream;
use crate::error::{Error, Result};
use crate::model::{enumerate_others, validate_vector};
use crate::schemes::{cached_pieces, resolve_plan, sample_label_maps, DeliveryRandomness, Scheme};
use crate::Rational;

/// Stream id reserved for audit sampling.
const AUDIT_STREAM: u64 = 0x4155_4449;

#[derive(Clone, Copy, Debug)]
pub struct SampleConfig {
    /// Independent placement and delivery runs per demand matrix.
    pub samples: usize,
    /// Pass threshold; defaults to `3 * sqrt(support / samples)`.
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub demand_cap: u128,
}

impl SampleConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        SampleConfig {
            samples,
            epsilon: None,
            seed,
            demand_cap: crate::model::DEFAULT_DEMAND_CAP,
        }
    }
}

/// Sampled audit on the view signature: for every demand of the other
/// users, draws independent label maps and delivery randomness and compares
/// the empirical signature distributions pairwise.
pub fn audit_sampled(scheme: &dyn Scheme, user: usize, d_k: &[usize], config: &SampleConfig) -> Result<AuditReport> {
    let params = scheme.params();
    if user == 0 || user > params.users {
        return Err(Error::OutOfRange {
            what: "user",
            index: user as u128,
            max: params.users as u128,
        });
    }
    validate_vector(params, d_k)?;
    if config.samples < 1000 {
        return Err(Error::InvalidParams(format!(
            "sampled audits need at least 1000 samples, got {}",
            config.samples
        )));
    }
    let others = enumerate_others(params, user, d_k, config.demand_cap)?;
    let shape = scheme.randomness_shape();
    let root = RngStream::new(config.seed, AUDIT_STREAM).child(user as u64);

    let dists = others
        .par_iter()
        .enumerate()
        .map(|(j, d)| {
            let mut rng = root.child(j as u64).rng();
            let mut dist = Distribution::default();
            for _ in 0..config.samples {
                let maps = sample_label_maps(scheme, &mut rng);
                let randomness = DeliveryRandomness::sample(&shape, &mut rng);
                let plan = scheme.plan(d, &randomness)?;
                let metas = resolve_plan(scheme, &plan, &maps)?;
                let cache = cached_pieces(scheme, user, &maps);
                dist.add(view_signature(&cache, &metas));
            }
            Ok(dist)
        })
        .collect::<Result<Vec<_>>>()?;

    let support = {
        let mut keys: BTreeSet<&ViewKey> = BTreeSet::new();
        for d in &dists {
            keys.extend(d.counts.keys());
        }
        keys.len()
    };
    let threshold = config
        .epsilon
        .unwrap_or_else(|| 3.0 * (support as f64 / config.samples as f64).sqrt());

    let mut pairs = Vec::new();
    let mut max = Rational::from_integer(0);
    for a in 0..dists.len() {
        for b in a + 1..dists.len() {
            let tv = total_variation(&dists[a], &dists[b]);
            max = max.max(tv);
            pairs.push(pair_report(
                others[a].to_string(),
                others[b].to_string(),
                tv,
                disjoint(&dists[a], &dists[b]),
            ));
        }
    }
    let max_f = max.to_f64().unwrap_or(f64::NAN);
    Ok(AuditReport {
        mode: AuditMode::Sampled,
        scheme: scheme.kind().to_string(),
        user,
        d_k: d_k.to_vec(),
        max_tv: max_f,
        max_tv_exact: rational_string(max),
        pairs,
        events_per_matrix: config.samples as u128,
        support,
        threshold,
        pass: max_f <= threshold,
    })
}
