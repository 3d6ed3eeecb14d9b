use super::{DeliveryRandomness, MessagePlan, Scheme, SchemeKind};
use crate::error::{Error, Result};
use crate::model::{DemandMatrix, SystemParams};
use crate::Rational;

/// The high-memory private scheme: `2K` pieces per file, labelled
/// `[K]\{k}` (label `k-1`) and `([K], q)` (label `K+q-1`). User `k` caches
/// all but `[K]\{k}`. A single message of `L` rows mixes `KN` pieces; column
/// `(i-1)K + k` carries `[K]\{k}` if user `k` wants file `i`, else `([K], k)`.
#[derive(Clone, Debug)]
pub struct Corner {
    params: SystemParams,
}

impl Corner {
    pub fn new(params: SystemParams) -> Result<Self> {
        if params.users < 2 {
            return Err(Error::InvalidParams("the corner scheme needs at least two users".into()));
        }
        Ok(Corner { params })
    }
}

impl Scheme for Corner {
    fn kind(&self) -> SchemeKind {
        SchemeKind::MdsCorner
    }

    fn params(&self) -> &SystemParams {
        &self.params
    }

    fn corner_parameter(&self) -> Option<usize> {
        None
    }

    fn label_count(&self) -> usize {
        2 * self.params.users
    }

    fn data_pieces(&self) -> usize {
        2 * self.params.users
    }

    fn label_name(&self, label: usize) -> String {
        let k = self.params.users;
        if label < k {
            format!("[{k}]\\{{{}}}", label + 1)
        } else {
            format!("[{k}],{}", label - k + 1)
        }
    }

    fn cached_by(&self, user: usize, label: usize) -> bool {
        label >= self.params.users || label + 1 != user
    }

    fn memory(&self) -> Rational {
        let k = self.params.users as i128;
        Rational::new((2 * k - 1) * self.params.files as i128, 2 * k)
    }

    fn load(&self) -> Rational {
        Rational::new(
            self.params.demands_per_user as i128,
            2 * self.params.users as i128,
        )
    }

    fn message_shape(&self) -> (usize, usize) {
        (self.params.demands_per_user, self.params.users * self.params.files)
    }

    fn plan(&self, demands: &DemandMatrix, _r: &DeliveryRandomness) -> Result<Vec<MessagePlan>> {
        let k = self.params.users;
        let mut entries = Vec::with_capacity(k * self.params.files);
        for i in 1..=self.params.files {
            for user in 1..=k {
                let label = if demands.user(user).contains(&i) {
                    user - 1
                } else {
                    k + user - 1
                };
                entries.push((i, label));
            }
        }
        Ok(vec![MessagePlan {
            rows: self.params.demands_per_user,
            entries,
        }])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_demand_uses_missing_pieces() {
        let p = SystemParams::new(3, 3, 1).unwrap();
        let c = Corner::new(p).unwrap();
        let d = DemandMatrix::new(&p, vec![vec![2], vec![2], vec![2]]).unwrap();
        let plan = c.plan(&d, &DeliveryRandomness::default()).unwrap();
        let file2: Vec<usize> = plan[0].entries.iter().filter(|e| e.0 == 2).map(|e| e.1).collect();
        assert_eq!(file2, vec![0, 1, 2]);
        assert_eq!(c.label_name(0), "[3]\\{1}");
        assert_eq!(c.label_name(4), "[3],2");
        assert_eq!(c.load(), Rational::new(1, 6));
        assert!(Corner::new(SystemParams::new(1, 2, 1).unwrap()).is_err());
    }
}
