use super::{format_set, DeliveryRandomness, MessagePlan, Scheme, SchemeKind};
use crate::combinatorics::{binom, pow_rank, pow_sets};
use crate::error::{Error, Result};
use crate::model::{DemandMatrix, SystemParams};
use crate::Rational;

/// Largest user count whose `2^K` labels fit in GF(2^16).
const MAX_USERS: usize = 16;

/// `2^{K-1} + sum_{j=t}^{K-1} C(K-1, j)`: data pieces per file at corner `t`.
pub fn mds_code_dimension(users: usize, t: usize) -> usize {
    let k = users as i64;
    let tail: u128 = (t as i64..k).map(|j| binom(k - 1, j)).sum();
    (1usize << (users - 1)) + tail as usize
}

/// The MDS-based private scheme at corner `t` in `0..K`. Pieces are labelled
/// by all subsets of `[K]` (power-set order); user `k` caches labels
/// containing `k`. For every `S` with `|S| > t`, message `X_S` mixes, for each
/// file `i`, the piece labelled `S xor Q_i` where `Q_i` are the requesters of `i`.
#[derive(Clone, Debug)]
pub struct MdsScheme {
    params: SystemParams,
    t: usize,
    code_k: usize,
    sets: Vec<Vec<usize>>,
    masks: Vec<u32>,
}

fn mask(set: &[usize]) -> u32 {
    set.iter().fold(0, |m, &u| m | 1 << (u - 1))
}

impl MdsScheme {
    pub fn new(params: SystemParams, t: usize) -> Result<Self> {
        let k = params.users;
        if k > MAX_USERS {
            return Err(Error::InvalidParams(format!(
                "the MDS scheme supports at most {MAX_USERS} users"
            )));
        }
        if t > k {
            return Err(Error::InvalidParams(format!("t must lie in 0..={k}")));
        }
        let sets = pow_sets(k);
        let masks = sets.iter().map(|s| mask(s)).collect();
        Ok(MdsScheme {
            params,
            t,
            code_k: mds_code_dimension(k, t),
            sets,
            masks,
        })
    }

    pub fn label_set(&self, label: usize) -> &[usize] {
        &self.sets[label]
    }

    /// Transmitted sets `S`, ordered by size and then lexicographically.
    pub fn message_sets(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = self
            .sets
            .iter()
            .filter(|s| s.len() > self.t)
            .cloned()
            .collect();
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        sets
    }
}

impl Scheme for MdsScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Mds
    }

    fn params(&self) -> &SystemParams {
        &self.params
    }

    fn corner_parameter(&self) -> Option<usize> {
        Some(self.t)
    }

    fn label_count(&self) -> usize {
        self.sets.len()
    }

    fn data_pieces(&self) -> usize {
        self.code_k
    }

    fn label_name(&self, label: usize) -> String {
        format_set(&self.sets[label])
    }

    fn cached_by(&self, user: usize, label: usize) -> bool {
        self.masks[label] >> (user - 1) & 1 == 1
    }

    fn memory(&self) -> Rational {
        let half = 1i128 << (self.params.users - 1);
        Rational::new(half * self.params.files as i128, self.code_k as i128)
    }

    fn load(&self) -> Rational {
        let k = self.params.users as i64;
        let low: u128 = (0..=self.t as i64).map(|j| binom(k, j)).sum();
        let sent = (1i128 << k) - low as i128;
        Rational::new(self.params.demands_per_user as i128 * sent, self.code_k as i128)
    }

    fn message_shape(&self) -> (usize, usize) {
        (self.params.demands_per_user, self.params.files)
    }

    fn plan(&self, demands: &DemandMatrix, _r: &DeliveryRandomness) -> Result<Vec<MessagePlan>> {
        let k = self.params.users;
        let requesters: Vec<u32> = (1..=self.params.files)
            .map(|i| mask(&demands.requesters(i)))
            .collect();
        self.message_sets()
            .iter()
            .map(|s| {
                let sm = mask(s);
                let entries = requesters
                    .iter()
                    .enumerate()
                    .map(|(i, &q)| {
                        let diff = sm ^ q;
                        let set: Vec<usize> = (1..=k).filter(|u| diff >> (u - 1) & 1 == 1).collect();
                        pow_rank(k, &set).map(|r| (i + 1, r as usize - 1))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(MessagePlan {
                    rows: self.params.demands_per_user,
                    entries,
                })
            })
            .collect()
    }
}
