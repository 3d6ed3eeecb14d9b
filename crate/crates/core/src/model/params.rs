use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;
use crate::error::{Error, Result};

/// Shape of a shared-link caching system: `users` cache-equipped users, a
/// library of `files` files, and `demands_per_user` distinct files requested
/// by every user. Memory is a property of the scheme operating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemParams {
    pub users: usize,
    pub files: usize,
    pub demands_per_user: usize,
}

impl SystemParams {
    pub fn new(users: usize, files: usize, demands_per_user: usize) -> Result<Self> {
        if users == 0 {
            return Err(Error::InvalidParams("at least one user is required".into()));
        }
        if files == 0 {
            return Err(Error::InvalidParams("at least one file is required".into()));
        }
        if demands_per_user == 0 || demands_per_user > files {
            return Err(Error::InvalidParams(format!(
                "demands per user must lie in 1..={files}, got {demands_per_user}"
            )));
        }
        Ok(SystemParams {
            users,
            files,
            demands_per_user,
        })
    }

    /// Number of distinct demand vectors, `C(N, L)`.
    pub fn demand_vectors(&self) -> u128 {
        binom(self.files as i64, self.demands_per_user as i64)
    }

    /// Number of demand matrices, `C(N, L)^K` (saturating).
    pub fn demand_matrices(&self) -> u128 {
        let per_user = self.demand_vectors();
        (0..self.users).fold(1u128, |acc, _| acc.saturating_mul(per_user))
    }
}

impl std::fmt::Display for SystemParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "K={} N={} L={}",
            self.users, self.files, self.demands_per_user
        )
    }
}
