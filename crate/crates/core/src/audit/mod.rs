//! Privacy auditing: compares the distribution of one user's view across
//! all demands of the other users, with the user's own cache and demand
//! held fixed.
//!
//! Views are compared on metadata only. Payload symbols are a fixed linear
//! function of the named pieces and of a library that is independent of the
//! demands and of all scheme randomness, so they add no demand information
//! beyond the metadata.

mod canonical;
mod exact;
mod oracle;
mod sampled;

use std::collections::HashMap;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::Rational;

pub use canonical::{canonical_view, raw_view, view_signature, ViewKey};
pub use exact::{
    audit_exact, canonical_distribution, leakage_demo_man, raw_distributions, DEFAULT_EVENT_CAP,
};
pub use oracle::{enumerate_per_file_probabilities, per_file_probability_oracle, PerFileView};
pub use sampled::{audit_sampled, SampleConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    Exact,
    Sampled,
}

/// Counts of views; all outcomes are equally likely elementary events.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Distribution {
    pub counts: HashMap<ViewKey, u64>,
    pub total: u64,
}

impl Distribution {
    pub fn add(&mut self, key: ViewKey) {
        *self.counts.entry(key).or_default() += 1;
        self.total += 1;
    }

    pub fn probability(&self, key: &ViewKey) -> Rational {
        let c = self.counts.get(key).copied().unwrap_or(0);
        Rational::new(c as i128, self.total as i128)
    }

    pub fn support(&self) -> usize {
        self.counts.len()
    }
}

/// Total-variation distance, exact.
pub fn total_variation(a: &Distribution, b: &Distribution) -> Rational {
    if a.total == 0 || b.total == 0 {
        return Rational::zero();
    }
    let (ta, tb) = (a.total as i128, b.total as i128);
    let mut sum: i128 = 0;
    for (k, &ca) in &a.counts {
        let cb = b.counts.get(k).copied().unwrap_or(0) as i128;
        sum += (ca as i128 * tb - cb * ta).abs();
    }
    for (k, &cb) in &b.counts {
        if !a.counts.contains_key(k) {
            sum += cb as i128 * ta;
        }
    }
    Rational::new(sum, 2 * ta * tb)
}

pub fn disjoint(a: &Distribution, b: &Distribution) -> bool {
    let (small, large) = if a.counts.len() <= b.counts.len() { (a, b) } else { (b, a) };
    small.counts.keys().all(|k| !large.counts.contains_key(k))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    pub tv: f64,
    pub tv_exact: String,
    pub disjoint_support: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub mode: AuditMode,
    pub scheme: String,
    pub user: usize,
    pub d_k: Vec<usize>,
    pub max_tv: f64,
    pub max_tv_exact: String,
    pub pairs: Vec<PairReport>,
    /// Elementary events per demand matrix (exact) or samples per matrix (sampled).
    pub events_per_matrix: u128,
    pub support: usize,
    pub threshold: f64,
    pub pass: bool,
}

impl AuditReport {
    pub fn max_tv_rational(&self) -> Rational {
        parse_rational(&self.max_tv_exact)
    }
}

pub(crate) fn rational_string(r: Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rational(s: &str) -> Rational {
    match s.split_once('/') {
        Some((n, d)) => Rational::new(n.parse().unwrap_or(0), d.parse().unwrap_or(1)),
        None => Rational::from_integer(s.parse().unwrap_or(0)),
    }
}

pub(crate) fn pair_report(a: String, b: String, tv: Rational, disjoint_support: bool) -> PairReport {
    PairReport {
        a,
        b,
        tv: tv.to_f64().unwrap_or(f64::NAN),
        tv_exact: rational_string(tv),
        disjoint_support,
    }
}
