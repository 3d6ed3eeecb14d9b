use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::SystemParams;
use crate::combinatorics::{ksubset_rank, ksubset_unrank, ksubsets};
use crate::error::{Error, Result};

pub const DEFAULT_DEMAND_CAP: u128 = 1_000_000;

/// One user's request: `L` strictly increasing 1-based file indices.
pub type DemandVector = Vec<usize>;

/// The demands of all `K` users. Row `k - 1` holds user `k`'s vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DemandMatrix {
    demands: Vec<DemandVector>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DemandJson {
    Wrapped { demands: Vec<Vec<usize>> },
    Bare(Vec<Vec<usize>>),
}

impl DemandMatrix {
    pub fn new(params: &SystemParams, demands: Vec<DemandVector>) -> Result<Self> {
        if demands.len() != params.users {
            return Err(Error::InvalidDemand(format!(
                "expected {} demand vectors, got {}",
                params.users,
                demands.len()
            )));
        }
        for (k, d) in demands.iter().enumerate() {
            validate_vector(params, d).map_err(|e| match e {
                Error::InvalidDemand(msg) => Error::InvalidDemand(format!("user {}: {msg}", k + 1)),
                other => other,
            })?;
        }
        Ok(DemandMatrix { demands })
    }

    /// Parses `{"demands": [[1,2],[3,4]]}` or a bare `[[1,2],[3,4]]`.
    pub fn from_json(params: &SystemParams, text: &str) -> Result<Self> {
        let parsed: DemandJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidDemand(format!("malformed demand JSON: {e}")))?;
        let rows = match parsed {
            DemandJson::Wrapped { demands } => demands,
            DemandJson::Bare(rows) => rows,
        };
        Self::new(params, rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("demand matrix serializes")
    }

    pub fn random<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> Self {
        let count = params.demand_vectors();
        let demands = (0..params.users)
            .map(|_| {
                let j = rng.gen_range(1..=count);
                ksubset_unrank(params.files, params.demands_per_user, j).expect("index in range")
            })
            .collect();
        DemandMatrix { demands }
    }

    pub fn users(&self) -> usize {
        self.demands.len()
    }

    /// Demand vector of user `k` (1-based).
    pub fn user(&self, k: usize) -> &[usize] {
        &self.demands[k - 1]
    }

    pub fn rows(&self) -> &[DemandVector] {
        &self.demands
    }

    /// Users requesting file `i`, in increasing order.
    pub fn requesters(&self, file: usize) -> Vec<usize> {
        self.demands
            .iter()
            .enumerate()
            .filter(|(_, d)| d.contains(&file))
            .map(|(k, _)| k + 1)
            .collect()
    }

    /// The matrix with user `k`'s row replaced.
    pub fn with_user(&self, k: usize, d: DemandVector) -> Self {
        let mut demands = self.demands.clone();
        demands[k - 1] = d;
        DemandMatrix { demands }
    }
}

impl std::fmt::Display for DemandMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<String> = self
            .demands
            .iter()
            .map(|d| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "[{}]", rows.join(";"))
    }
}

pub fn validate_vector(params: &SystemParams, d: &[usize]) -> Result<()> {
    if d.len() != params.demands_per_user {
        return Err(Error::InvalidDemand(format!(
            "expected {} files, got {}",
            params.demands_per_user,
            d.len()
        )));
    }
    let mut prev = 0;
    for &i in d {
        if i == 0 || i > params.files {
            return Err(Error::InvalidDemand(format!(
                "file index {i} outside 1..={}",
                params.files
            )));
        }
        if i <= prev {
            return Err(Error::InvalidDemand(format!(
                "file indices must strictly increase: {d:?}"
            )));
        }
        prev = i;
    }
    Ok(())
}

/// Index of a demand vector among all `C(N, L)` vectors in lexicographic order (1-based).
pub fn demand_vector_index(params: &SystemParams, d: &[usize]) -> Result<u128> {
    validate_vector(params, d)?;
    ksubset_rank(params.files, d)
}

/// All demand vectors in lexicographic order.
pub fn all_demand_vectors(params: &SystemParams) -> Vec<DemandVector> {
    ksubsets(params.files, params.demands_per_user).collect()
}

/// Every demand matrix exactly once. User 1's vector is the most significant
/// digit and each digit runs over the vectors in lexicographic order.
pub fn enumerate_demand_matrices(params: &SystemParams, cap: u128) -> Result<Vec<DemandMatrix>> {
    let count = params.demand_matrices();
    if count > cap {
        return Err(Error::EnumerationTooLarge {
            what: "demand matrices",
            count,
            cap,
            hint: "use random demands or the sampling audit",
        });
    }
    let vectors = all_demand_vectors(params);
    let base = vectors.len();
    let mut digits = vec![0usize; params.users];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        out.push(DemandMatrix {
            demands: digits.iter().map(|&j| vectors[j].clone()).collect(),
        });
        let mut pos = params.users;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < base {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// All demand matrices in which user `k` requests `d_k`, in the same order.
pub fn enumerate_others(
    params: &SystemParams,
    k: usize,
    d_k: &[usize],
    cap: u128,
) -> Result<Vec<DemandMatrix>> {
    validate_vector(params, d_k)?;
    let reduced = SystemParams {
        users: params.users - 1,
        ..*params
    };
    let count = if reduced.users == 0 { 1 } else { reduced.demand_matrices() };
    if count > cap {
        return Err(Error::EnumerationTooLarge {
            what: "demand matrices",
            count,
            cap,
            hint: "use the sampling audit",
        });
    }
    if reduced.users == 0 {
        return Ok(vec![DemandMatrix {
            demands: vec![d_k.to_vec()],
        }]);
    }
    Ok(enumerate_demand_matrices(&reduced, cap)?
        .into_iter()
        .map(|m| {
            let mut demands = m.demands;
            demands.insert(k - 1, d_k.to_vec());
            DemandMatrix { demands }
        })
        .collect())
}
