//! Placement and delivery constructions behind one interface.
//!
//! A scheme describes, per file, a set of labels (one per coded piece), which
//! users cache which label, and for every demand matrix the list of messages
//! as `(file, label)` entries. [`SchemeInstance`] binds a scheme to a field,
//! an MDS code and a piece size, and turns labels into secret piece indices.

mod baseline;
mod corner;
mod instance;
mod man;
mod mds;
mod virtual_user;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{factorial, nth_permutation};
use crate::error::{Error, Result};
use crate::model::{DemandMatrix, MessageMeta, PieceRef, SystemParams};
use crate::Rational;

pub use baseline::Baseline;
pub use corner::Corner;
pub use instance::{PlacementResult, SchemeInstance, ServerState};
pub use man::Man;
pub use mds::{mds_code_dimension, MdsScheme};
pub use virtual_user::{assign_virtual_demands, subpacketization_cap, VirtualUser, DEFAULT_SUBPACK_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    Baseline,
    Man,
    VirtualUser,
    Mds,
    MdsCorner,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Baseline,
        SchemeKind::Man,
        SchemeKind::VirtualUser,
        SchemeKind::Mds,
        SchemeKind::MdsCorner,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::Baseline => "baseline",
            SchemeKind::Man => "man",
            SchemeKind::VirtualUser => "virtual-user",
            SchemeKind::Mds => "mds",
            SchemeKind::MdsCorner => "mds-corner",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidParams(format!(
                    "unknown scheme {s:?}; expected baseline | man | virtual-user | mds | mds-corner"
                ))
            })
    }
}

/// One message before labels are resolved to pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessagePlan {
    pub rows: usize,
    /// `(file, label)` pairs in coefficient-column order; files are 1-based.
    pub entries: Vec<(usize, usize)>,
}

/// Server-side delivery randomness: a list of permutations of `[0, n)`.
/// Each scheme fixes how many there are and their sizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DeliveryRandomness {
    pub perms: Vec<Vec<usize>>,
}

impl DeliveryRandomness {
    pub fn identity(shape: &[usize]) -> Self {
        DeliveryRandomness {
            perms: shape.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        DeliveryRandomness {
            perms: shape
                .iter()
                .map(|&n| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.shuffle(rng);
                    p
                })
                .collect(),
        }
    }

    /// Number of distinct realizations for `shape` (saturating).
    pub fn count(shape: &[usize]) -> u128 {
        shape
            .iter()
            .fold(1u128, |acc, &n| acc.saturating_mul(factorial(n)))
    }

    /// The `idx`-th realization in mixed-radix order, last permutation fastest.
    pub fn nth(shape: &[usize], mut idx: u128) -> Self {
        let mut perms = vec![Vec::new(); shape.len()];
        for (slot, &n) in shape.iter().enumerate().rev() {
            let f = factorial(n);
            perms[slot] = nth_permutation(n, idx % f);
            idx /= f;
        }
        DeliveryRandomness { perms }
    }
}

/// A placement and delivery construction for fixed system parameters.
pub trait Scheme: Send + Sync + fmt::Debug {
    fn kind(&self) -> SchemeKind;

    fn params(&self) -> &SystemParams;

    /// The integer corner parameter (`t` or `t'`), if the scheme has one.
    fn corner_parameter(&self) -> Option<usize>;

    /// Number of labels per file; equals the number of coded pieces.
    fn label_count(&self) -> usize;

    /// Number of data pieces per file (the MDS dimension).
    fn data_pieces(&self) -> usize;

    /// Human-readable label, e.g. `{1,2}`.
    fn label_name(&self, label: usize) -> String;

    /// Whether real user `user` (1-based) caches the piece under `label` (0-based).
    fn cached_by(&self, user: usize, label: usize) -> bool;

    /// Memory per user in files, closed form.
    fn memory(&self) -> Rational;

    /// Delivery load in files, closed form.
    fn load(&self) -> Rational;

    /// `(rows, columns)` of the coefficient matrix shared by all messages.
    fn message_shape(&self) -> (usize, usize);

    /// Sizes of the permutations making up the delivery randomness.
    fn randomness_shape(&self) -> Vec<usize> {
        Vec::new()
    }

    fn plan(&self, demands: &DemandMatrix, randomness: &DeliveryRandomness) -> Result<Vec<MessagePlan>>;

    /// Whether labels are assigned to pieces by a secret uniform permutation.
    fn private_placement(&self) -> bool {
        true
    }
}

/// Scheme selection with its operating point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeSpec {
    Baseline { memory: Rational },
    Man { t_prime: usize, precoding: bool },
    VirtualUser { t: usize, shuffle_members: bool, shuffle_messages: bool },
    Mds { t: usize },
    MdsCorner,
}

impl SchemeSpec {
    pub fn virtual_user(t: usize) -> Self {
        SchemeSpec::VirtualUser {
            t,
            shuffle_members: true,
            shuffle_messages: true,
        }
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeSpec::Baseline { .. } => SchemeKind::Baseline,
            SchemeSpec::Man { .. } => SchemeKind::Man,
            SchemeSpec::VirtualUser { .. } => SchemeKind::VirtualUser,
            SchemeSpec::Mds { .. } => SchemeKind::Mds,
            SchemeSpec::MdsCorner => SchemeKind::MdsCorner,
        }
    }

    pub fn build(&self, params: &SystemParams) -> Result<Arc<dyn Scheme>> {
        Ok(match *self {
            SchemeSpec::Baseline { memory } => Arc::new(Baseline::new(*params, memory)?),
            SchemeSpec::Man { t_prime, precoding } => Arc::new(Man::new(*params, t_prime, precoding)?),
            SchemeSpec::VirtualUser {
                t,
                shuffle_members,
                shuffle_messages,
            } => Arc::new(VirtualUser::new(*params, t, shuffle_members, shuffle_messages)?),
            SchemeSpec::Mds { t } => Arc::new(MdsScheme::new(*params, t)?),
            SchemeSpec::MdsCorner => Arc::new(Corner::new(*params)?),
        })
    }
}

/// Pieces user `user` caches when file `i` stores label `l` as piece `maps[i-1][l]`.
pub fn cached_pieces(scheme: &dyn Scheme, user: usize, maps: &[Vec<usize>]) -> BTreeSet<PieceRef> {
    let mut out = BTreeSet::new();
    for (i, map) in maps.iter().enumerate() {
        for (label, &piece) in map.iter().enumerate() {
            if scheme.cached_by(user, label) {
                out.insert(PieceRef::new(i + 1, piece));
            }
        }
    }
    out
}

/// Replaces labels by pieces, checking every message against the scheme's shape.
pub fn resolve_plan(scheme: &dyn Scheme, plan: &[MessagePlan], maps: &[Vec<usize>]) -> Result<Vec<MessageMeta>> {
    let (rows, cols) = scheme.message_shape();
    plan.iter()
        .map(|MessagePlan { rows: r, entries }| {
            if *r != rows || entries.len() != cols {
                return Err(Error::InvalidParams(format!(
                    "message shape {r}x{} differs from the scheme's {rows}x{cols}",
                    entries.len()
                )));
            }
            Ok(MessageMeta {
                rows,
                pieces: entries
                    .iter()
                    .map(|&(file, label)| PieceRef::new(file, maps[file - 1][label]))
                    .collect(),
            })
        })
        .collect()
}

/// Label-to-piece maps: uniform and independent per file when the scheme
/// hides its placement, the identity otherwise.
pub fn sample_label_maps<R: Rng + ?Sized>(scheme: &dyn Scheme, rng: &mut R) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    let n = scheme.label_count();
    (0..scheme.params().files)
        .map(|_| {
            let mut map: Vec<usize> = (0..n).collect();
            if scheme.private_placement() {
                map.shuffle(rng);
            }
            map
        })
        .collect()
}

pub(crate) fn format_set(set: &[usize]) -> String {
    let inner: Vec<String> = set.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}
