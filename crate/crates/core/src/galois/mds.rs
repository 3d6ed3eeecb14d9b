//! Systematic MDS erasure code: generator `[I_k; C]` with `C` an
//! `(n - k) x k` Cauchy block. Positions are 0-based.

use std::collections::BTreeSet;

use super::field::{Field, Symbol};
use super::matrix::{cauchy, CoeffMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdsCode {
    n: usize,
    k: usize,
    generator: CoeffMatrix,
}

impl MdsCode {
    pub fn new(n: usize, k: usize, field: &'static Field) -> Result<Self> {
        if k == 0 || n < k {
            return Err(Error::InvalidParams(format!(
                "MDS code needs 1 <= k <= n, got ({n},{k})"
            )));
        }
        let parity = cauchy(n - k, k, field)?;
        let mut generator = CoeffMatrix::zeros(field, n, k);
        for i in 0..k {
            generator.set(i, i, 1);
        }
        for r in 0..n - k {
            for c in 0..k {
                generator.set(k + r, c, parity.get(r, c));
            }
        }
        Ok(MdsCode { n, k, generator })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> &'static Field {
        self.generator.field()
    }

    pub fn generator(&self) -> &CoeffMatrix {
        &self.generator
    }

    pub fn encode(&self, stripe: &[Symbol]) -> Result<Vec<Symbol>> {
        let blocks: Vec<Vec<Symbol>> = stripe.iter().map(|&s| vec![s]).collect();
        Ok(self.encode_blocks(&blocks)?.into_iter().map(|b| b[0]).collect())
    }

    pub fn decode(&self, symbols: &[(usize, Symbol)]) -> Result<Vec<Symbol>> {
        let blocks: Vec<(usize, Vec<Symbol>)> =
            symbols.iter().map(|&(p, s)| (p, vec![s])).collect();
        Ok(self.decode_blocks(&blocks)?.into_iter().map(|b| b[0]).collect())
    }

    /// Encodes `k` equal-length data blocks into `n` coded blocks, symbol by symbol.
    pub fn encode_blocks(&self, data: &[Vec<Symbol>]) -> Result<Vec<Vec<Symbol>>> {
        if data.len() != self.k {
            return Err(Error::InvalidParams(format!(
                "expected {} data blocks, got {}",
                self.k,
                data.len()
            )));
        }
        let len = data[0].len();
        if data.iter().any(|b| b.len() != len) {
            return Err(Error::InvalidParams("data blocks differ in length".into()));
        }
        let f = self.field();
        if data.iter().flatten().any(|&s| !f.contains(s)) {
            return Err(Error::InvalidParams(format!("symbol outside {f:?}")));
        }
        let refs: Vec<&[Symbol]> = data.iter().map(Vec::as_slice).collect();
        let mut out = data.to_vec();
        for r in self.k..self.n {
            out.push(self.generator.combine_row(r, &refs));
        }
        Ok(out)
    }

    /// Reconstructs the data blocks from exactly `k` coded blocks at distinct positions.
    pub fn decode_blocks(&self, coded: &[(usize, Vec<Symbol>)]) -> Result<Vec<Vec<Symbol>>> {
        let mut seen = BTreeSet::new();
        for &(p, _) in coded {
            if p >= self.n {
                return Err(Error::OutOfRange {
                    what: "coded position",
                    index: p as u128,
                    max: self.n as u128 - 1,
                });
            }
            if !seen.insert(p) {
                return Err(Error::DuplicatePosition(p));
            }
        }
        if coded.len() < self.k {
            return Err(Error::Unrecoverable {
                have: coded.len(),
                need: self.k,
            });
        }
        let chosen = &coded[..self.k];
        let positions: Vec<usize> = chosen.iter().map(|(p, _)| *p).collect();
        if positions.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(chosen.iter().map(|(_, b)| b.clone()).collect());
        }
        let inv = self.generator.select_rows(&positions).inverse()?;
        let refs: Vec<&[Symbol]> = chosen.iter().map(|(_, b)| b.as_slice()).collect();
        Ok((0..self.k).map(|r| inv.combine_row(r, &refs)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_stripe(rng: &mut ChaCha8Rng, k: usize) -> Vec<Symbol> {
        (0..k).map(|_| rng.gen_range(0..256) as Symbol).collect()
    }

    #[test]
    fn four_three_code_erase_last() {
        let code = MdsCode::new(4, 3, Field::gf256()).unwrap();
        let data = vec![17, 0, 250];
        let coded = code.encode(&data).unwrap();
        assert_eq!(&coded[..3], &data[..]);
        let got = code
            .decode(&[(0, coded[0]), (1, coded[1]), (2, coded[2])])
            .unwrap();
        assert_eq!(got, data);
    }

    #[test]
    fn n_equals_k_is_identity() {
        let code = MdsCode::new(8, 8, Field::gf256()).unwrap();
        let data: Vec<Symbol> = (1..=8).collect();
        assert_eq!(code.encode(&data).unwrap(), data);
    }

    #[test]
    fn eight_seven_every_erasure() {
        let code = MdsCode::new(8, 7, Field::gf256()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let data = random_stripe(&mut rng, 7);
            let coded = code.encode(&data).unwrap();
            for erased in 0..8 {
                let kept: Vec<_> = (0..8)
                    .filter(|&p| p != erased)
                    .map(|p| (p, coded[p]))
                    .collect();
                assert_eq!(code.decode(&kept).unwrap(), data);
            }
        }
    }

    #[test]
    fn round_trip_every_k_subset() {
        let f = Field::gf256();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, k) in [(4, 3), (8, 5), (8, 7), (6, 2)] {
            let code = MdsCode::new(n, k, f).unwrap();
            for _ in 0..1000 {
                let data = random_stripe(&mut rng, k);
                let coded = code.encode(&data).unwrap();
                for pos in (0..n).combinations(k) {
                    let kept: Vec<_> = pos.iter().map(|&p| (p, coded[p])).collect();
                    assert_eq!(code.decode(&kept).unwrap(), data);
                }
            }
        }
    }

    #[test]
    fn decode_errors() {
        let code = MdsCode::new(4, 3, Field::gf256()).unwrap();
        assert_eq!(
            code.decode(&[(0, 1), (1, 2)]).unwrap_err(),
            Error::Unrecoverable { have: 2, need: 3 }
        );
        assert_eq!(
            code.decode(&[(0, 1), (0, 1), (2, 3)]).unwrap_err(),
            Error::DuplicatePosition(0)
        );
        assert!(code.decode(&[(0, 1), (1, 1), (9, 3)]).is_err());
    }

    #[test]
    fn wide_code_needs_gf65536() {
        assert!(MdsCode::new(300, 200, Field::gf256()).is_err());
        let code = MdsCode::new(300, 200, Field::gf65536()).unwrap();
        let data: Vec<Symbol> = (0..200).map(|i| (i * 331) as Symbol).collect();
        let coded = code.encode(&data).unwrap();
        let kept: Vec<_> = (100..300).map(|p| (p, coded[p])).collect();
        assert_eq!(code.decode(&kept).unwrap(), data);
    }
}
