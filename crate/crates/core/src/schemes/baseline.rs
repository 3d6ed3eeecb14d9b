use num_traits::Zero;

use super::{DeliveryRandomness, MessagePlan, Scheme, SchemeKind};
use crate::error::{Error, Result};
use crate::model::{DemandMatrix, SystemParams};
use crate::Rational;

/// Every user caches the same `M/N` fraction of every file; delivery
/// broadcasts the rest of the whole library, so the load is `N - M` for any
/// demand.
#[derive(Clone, Debug)]
pub struct Baseline {
    params: SystemParams,
    memory: Rational,
    /// Each file splits into `pieces` parts of which the first `cached` are stored.
    pieces: usize,
    cached: usize,
}

impl Baseline {
    pub fn new(params: SystemParams, memory: Rational) -> Result<Self> {
        let n = Rational::from_integer(params.files as i128);
        if memory < Rational::zero() || memory > n {
            return Err(Error::InvalidParams(format!(
                "memory {memory} outside [0, {}]",
                params.files
            )));
        }
        let fraction = memory / n;
        Ok(Baseline {
            params,
            memory,
            pieces: *fraction.denom() as usize,
            cached: *fraction.numer() as usize,
        })
    }
}

impl Scheme for Baseline {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Baseline
    }

    fn params(&self) -> &SystemParams {
        &self.params
    }

    fn corner_parameter(&self) -> Option<usize> {
        None
    }

    fn label_count(&self) -> usize {
        self.pieces
    }

    fn data_pieces(&self) -> usize {
        self.pieces
    }

    fn label_name(&self, label: usize) -> String {
        format!("part {}", label + 1)
    }

    fn cached_by(&self, _user: usize, label: usize) -> bool {
        label < self.cached
    }

    fn memory(&self) -> Rational {
        self.memory
    }

    fn load(&self) -> Rational {
        Rational::from_integer(self.params.files as i128) - self.memory
    }

    fn message_shape(&self) -> (usize, usize) {
        (1, 1)
    }

    fn plan(&self, _demands: &DemandMatrix, _r: &DeliveryRandomness) -> Result<Vec<MessagePlan>> {
        Ok((1..=self.params.files)
            .flat_map(|i| {
                (self.cached..self.pieces).map(move |j| MessagePlan {
                    rows: 1,
                    entries: vec![(i, j)],
                })
            })
            .collect())
    }

    fn private_placement(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn load_is_n_minus_m() {
        let p = SystemParams::new(3, 6, 2).unwrap();
        let b = Baseline::new(p, Rational::from_integer(3)).unwrap();
        assert_eq!(b.load(), Rational::from_integer(3));
        assert_eq!((b.label_count(), b.cached), (2, 1));
        let full = Baseline::new(p, Rational::from_integer(6)).unwrap();
        assert_eq!(full.load(), Rational::zero());
        let empty = Baseline::new(p, Rational::zero()).unwrap();
        assert_eq!(empty.load(), Rational::from_integer(6));
        assert_eq!(empty.label_count(), 1);
        assert!(Baseline::new(p, Rational::new(13, 2)).is_err());
        assert!(Baseline::new(p, -Rational::one()).is_err());
    }
}
