use super::{format_set, DeliveryRandomness, MessagePlan, Scheme, SchemeKind};
use crate::combinatorics::{binom, ksubset_rank, ksubset_unrank, ksubsets};
use crate::error::{Error, Result};
use crate::model::{DemandMatrix, SystemParams};
use crate::Rational;

/// The classical non-private scheme with integer corner `t'`: pieces are
/// labelled by `t'`-subsets of users, and round `l` sends, for every
/// `(t'+1)`-subset `S`, the XOR of `F[d_{k,l}, S \ {k}]` over `k` in `S`.
///
/// With `precoding` the labels are mapped to pieces by a secret permutation,
/// which hides piece identities but not the message compositions.
#[derive(Clone, Debug)]
pub struct Man {
    params: SystemParams,
    t_prime: usize,
    precoding: bool,
    labels: usize,
}

impl Man {
    pub fn new(params: SystemParams, t_prime: usize, precoding: bool) -> Result<Self> {
        if t_prime > params.users {
            return Err(Error::InvalidParams(format!(
                "t' must lie in 0..={}, got {t_prime}",
                params.users
            )));
        }
        Ok(Man {
            params,
            t_prime,
            precoding,
            labels: binom(params.users as i64, t_prime as i64) as usize,
        })
    }

    fn label_set(&self, label: usize) -> Vec<usize> {
        ksubset_unrank(self.params.users, self.t_prime, label as u128 + 1).expect("label in range")
    }
}

impl Scheme for Man {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Man
    }

    fn params(&self) -> &SystemParams {
        &self.params
    }

    fn corner_parameter(&self) -> Option<usize> {
        Some(self.t_prime)
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
            (self.params.files * self.t_prime) as i128,
            self.params.users as i128,
        )
    }

    fn load(&self) -> Rational {
        let k = self.params.users as i128;
        let t = self.t_prime as i128;
        Rational::new(self.params.demands_per_user as i128 * (k - t), t + 1)
    }

    fn message_shape(&self) -> (usize, usize) {
        (1, self.t_prime + 1)
    }

    fn plan(&self, demands: &DemandMatrix, _r: &DeliveryRandomness) -> Result<Vec<MessagePlan>> {
        let k = self.params.users;
        let mut out = Vec::new();
        for round in 0..self.params.demands_per_user {
            for set in ksubsets(k, self.t_prime + 1) {
                let entries = set
                    .iter()
                    .map(|&user| {
                        let rest: Vec<usize> = set.iter().copied().filter(|&u| u != user).collect();
                        let label = ksubset_rank(k, &rest).map(|r| r as usize - 1);
                        label.map(|l| (demands.user(user)[round], l))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.push(MessagePlan { rows: 1, entries });
            }
        }
        Ok(out)
    }

    fn private_placement(&self) -> bool {
        self.precoding
    }
}
