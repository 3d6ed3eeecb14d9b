use std::collections::BTreeSet;

use serde::Serialize;

use super::cache::{CacheState, PieceRef};
use super::packet::{DeliveryPacket, MessageMeta};
use crate::galois::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ViewEntry {
    pub file: usize,
    pub cached: bool,
    pub piece: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ViewMessage {
    pub coefficients: Vec<Vec<Symbol>>,
    pub entries: Vec<ViewEntry>,
}

/// Everything user `user` knows about the delivery, apart from symbol values:
/// its own demand, its cache metadata, and each message's composition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct UserView {
    pub user: usize,
    pub demand: Vec<usize>,
    pub cached: BTreeSet<PieceRef>,
    pub messages: Vec<ViewMessage>,
}

impl UserView {
    /// Builds the view from metadata alone. Coefficients are passed per message.
    pub fn from_metadata(
        user: usize,
        demand: &[usize],
        cached: BTreeSet<PieceRef>,
        messages: &[MessageMeta],
        coefficients: impl Fn(usize) -> Vec<Vec<Symbol>>,
    ) -> Self {
        let messages = messages
            .iter()
            .enumerate()
            .map(|(m, meta)| ViewMessage {
                coefficients: coefficients(m),
                entries: meta
                    .pieces
                    .iter()
                    .map(|p| ViewEntry {
                        file: p.file,
                        cached: cached.contains(p),
                        piece: p.piece,
                    })
                    .collect(),
            })
            .collect();
        UserView {
            user,
            demand: demand.to_vec(),
            cached,
            messages,
        }
    }
}

pub fn build_user_view(
    user: usize,
    cache: &CacheState,
    demand: &[usize],
    packet: &DeliveryPacket,
) -> UserView {
    let cached: BTreeSet<PieceRef> = cache.metadata().copied().collect();
    let meta = packet.metadata();
    UserView::from_metadata(user, demand, cached, &meta, |m| {
        packet.messages[m].coefficients.to_rows()
    })
}
