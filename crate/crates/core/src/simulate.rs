//! Placement, delivery and decoding of one demand matrix, with every
//! reconstruction checked against the library.

use serde::Serialize;

use crate::decoder::{decode_user, DecodeReport};
use crate::error::Result;
use crate::model::{DeliveryPacket, DemandMatrix, FileLibrary};
use crate::schemes::{DeliveryRandomness, PlacementResult, SchemeInstance};
use crate::Rational;

#[derive(Clone, Debug, Serialize)]
pub struct UserOutcome {
    pub user: usize,
    pub decoded: bool,
    pub bit_exact: bool,
    pub report: DecodeReport,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub packet: DeliveryPacket,
    pub load: Rational,
    pub users: Vec<UserOutcome>,
}

impl Simulation {
    pub fn all_ok(&self) -> bool {
        self.users.iter().all(|u| u.decoded && u.bit_exact)
    }
}

pub fn simulate_demand(
    instance: &SchemeInstance,
    library: &FileLibrary,
    placement: &PlacementResult,
    demands: &DemandMatrix,
    randomness: &DeliveryRandomness,
) -> Result<Simulation> {
    let packet = instance.deliver_with(placement, demands, randomness)?;
    let users = (1..=instance.params().users)
        .map(|k| {
            let report = decode_user(k, placement.cache(k), demands.user(k), &packet)?;
            let bit_exact = report
                .files
                .iter()
                .all(|f| f.data.as_deref() == Some(library.file(f.file)));
            Ok(UserOutcome {
                user: k,
                decoded: report.success(),
                bit_exact,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Simulation {
        load: packet.load(),
        packet,
        users,
    })
}
