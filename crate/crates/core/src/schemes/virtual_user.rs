use std::collections::BTreeMap;

use super::{format_set, DeliveryRandomness, MessagePlan, Scheme, SchemeKind};
use crate::combinatorics::{binom, ksubset_rank, ksubset_unrank, ksubsets};
use crate::error::{Error, Result};
use crate::model::{all_demand_vectors, DemandMatrix, DemandVector, SystemParams};
use crate::Rational;

pub const DEFAULT_SUBPACK_CAP: u128 = 1_000_000;

/// The sub-packetization cap, overridable through `PCL_SUBPACK_CAP`.
pub fn subpacketization_cap() -> u128 {
    std::env::var("PCL_SUBPACK_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SUBPACK_CAP)
}

/// Demands of all `U = C(N,L) K` effective users. The first `K` are the real
/// users; the remaining slots are filled vector by vector, in lexicographic
/// order, with `K - n_j` copies of the `j`-th demand vector where `n_j` real
/// users already request it.
pub fn assign_virtual_demands(params: &SystemParams, demands: &DemandMatrix) -> Vec<DemandVector> {
    let mut held: BTreeMap<&[usize], usize> = BTreeMap::new();
    for d in demands.rows() {
        *held.entry(d.as_slice()).or_default() += 1;
    }
    let mut out: Vec<DemandVector> = demands.rows().to_vec();
    for v in all_demand_vectors(params) {
        let n = held.get(v.as_slice()).copied().unwrap_or(0);
        for _ in n..params.users {
            out.push(v.clone());
        }
    }
    out
}

/// The virtual-user scheme at corner `t` in `1..=U`: the classical scheme for
/// `U` effective users with pieces labelled by `t`-subsets of `[U]`, each
/// message mixing `L(t+1)` pieces through an `L`-row coefficient matrix.
///
/// `shuffle_members` draws a fresh order of the members of each message;
/// `shuffle_messages` draws the global message order.
#[derive(Clone, Debug)]
pub struct VirtualUser {
    params: SystemParams,
    t: usize,
    effective: usize,
    labels: usize,
    messages: usize,
    shuffle_members: bool,
    shuffle_messages: bool,
}

impl VirtualUser {
    pub fn new(
        params: SystemParams,
        t: usize,
        shuffle_members: bool,
        shuffle_messages: bool,
    ) -> Result<Self> {
        let effective = params
            .demand_vectors()
            .checked_mul(params.users as u128)
            .filter(|&u| u <= u32::MAX as u128)
            .ok_or_else(|| Error::InvalidParams("too many effective users".into()))?
            as usize;
        if t == 0 || t > effective {
            return Err(Error::InvalidParams(format!(
                "t must lie in 1..={effective}, got {t}"
            )));
        }
        let cap = subpacketization_cap();
        let labels = binom(effective as i64, t as i64);
        if labels > cap {
            return Err(Error::SubpacketizationTooLarge { count: labels, cap });
        }
        let messages = binom(effective as i64, t as i64 + 1);
        if messages > cap.saturating_mul(effective as u128) {
            return Err(Error::SubpacketizationTooLarge { count: messages, cap });
        }
        Ok(VirtualUser {
            params,
            t,
            effective,
            labels: labels as usize,
            messages: messages as usize,
            shuffle_members,
            shuffle_messages,
        })
    }

    pub fn effective_users(&self) -> usize {
        self.effective
    }

    pub fn label_set(&self, label: usize) -> Vec<usize> {
        ksubset_unrank(self.effective, self.t, label as u128 + 1).expect("label in range")
    }
}

impl Scheme for VirtualUser {
    fn kind(&self) -> SchemeKind {
        SchemeKind::VirtualUser
    }

    fn params(&self) -> &SystemParams {
        &self.params
    }

    fn corner_parameter(&self) -> Option<usize> {
        Some(self.t)
    }

    fn label_count(&self) -> usize {
        self.labels
    }

    fn data_pieces(&self) -> usize {
        self.labels
    }

    fn label_name(&self, label: usize) -> String {
        format_set(&self.label_set(label))
    }

    fn cached_by(&self, user: usize, label: usize) -> bool {
        self.label_set(label).contains(&user)
    }

    fn memory(&self) -> Rational {
        Rational::new(
            (self.t * self.params.files) as i128,
            self.effective as i128,
        )
    }

    fn load(&self) -> Rational {
        Rational::new(
            (self.params.demands_per_user * (self.effective - self.t)) as i128,
            self.t as i128 + 1,
        )
    }

    fn message_shape(&self) -> (usize, usize) {
        let l = self.params.demands_per_user;
        (l, l * (self.t + 1))
    }

    fn randomness_shape(&self) -> Vec<usize> {
        let mut shape = Vec::new();
        if self.messages == 0 {
            return shape;
        }
        if self.shuffle_messages {
            shape.push(self.messages);
        }
        if self.shuffle_members {
            shape.extend(std::iter::repeat_n(self.t + 1, self.messages));
        }
        shape
    }

    fn plan(&self, demands: &DemandMatrix, randomness: &DeliveryRandomness) -> Result<Vec<MessagePlan>> {
        let shape = self.randomness_shape();
        if randomness.perms.len() != shape.len()
            || randomness.perms.iter().zip(&shape).any(|(p, &n)| p.len() != n)
        {
            return Err(Error::InvalidParams("delivery randomness has the wrong shape".into()));
        }
        let effective = assign_virtual_demands(&self.params, demands);
        let member_offset = usize::from(self.shuffle_messages);
        let l = self.params.demands_per_user;
        let mut lex = Vec::with_capacity(self.messages);
        for (m, set) in ksubsets(self.effective, self.t + 1).enumerate() {
            let members: Vec<usize> = if self.shuffle_members {
                randomness.perms[member_offset + m].iter().map(|&x| set[x]).collect()
            } else {
                set.clone()
            };
            let mut entries = Vec::with_capacity(l * (self.t + 1));
            for &u in &members {
                let rest: Vec<usize> = set.iter().copied().filter(|&x| x != u).collect();
                let label = ksubset_rank(self.effective, &rest)? as usize - 1;
                entries.extend(effective[u - 1].iter().map(|&file| (file, label)));
            }
            lex.push(MessagePlan { rows: l, entries });
        }
        if !self.shuffle_messages || lex.is_empty() {
            return Ok(lex);
        }
        let mut slots: Vec<Option<MessagePlan>> = lex.into_iter().map(Some).collect();
        Ok(randomness.perms[0]
            .iter()
            .map(|&q| slots[q].take().expect("q is a permutation"))
            .collect())
    }
}
