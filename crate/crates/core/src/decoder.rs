//! Per-user recovery of requested files from a cache and a delivery packet.
//!
//! The decoder only sees what a user sees: its cache (metadata and content),
//! its own demand, and the packet. A message is consumed when every piece it
//! mixes that the user does not yet hold belongs to a wanted file and the
//! number of such pieces is at most the number of combinations it carries.
//! Consumed messages are solved for their unknown pieces; this repeats until
//! no message makes progress. Each wanted file is then MDS-decoded from any
//! `k` pieces it now holds.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::galois::{solve, CoeffMatrix, Field, MdsCode, Symbol};
use crate::model::{CacheState, DeliveryPacket, PieceRef};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileOutcome {
    pub file: usize,
    pub success: bool,
    pub pieces_needed: usize,
    pub pieces_from_cache: usize,
    pub pieces_from_delivery: usize,
    pub symbols_from_cache: usize,
    pub symbols_from_delivery: usize,
    #[serde(skip)]
    pub data: Option<Vec<Symbol>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeReport {
    pub user: usize,
    pub files: Vec<FileOutcome>,
    pub messages_consumed: usize,
}

impl DecodeReport {
    pub fn success(&self) -> bool {
        self.files.iter().all(|f| f.success)
    }

    pub fn file(&self, i: usize) -> Option<&FileOutcome> {
        self.files.iter().find(|f| f.file == i)
    }

    /// The first failed file as an error.
    pub fn into_result(self) -> Result<DecodeReport> {
        if let Some(f) = self.files.iter().find(|f| !f.success) {
            return Err(Error::DecodeFailure {
                user: self.user,
                file: f.file,
                have: f.pieces_from_cache + f.pieces_from_delivery,
                need: f.pieces_needed,
            });
        }
        Ok(self)
    }
}

/// Decodes user `user`'s demanded files.
pub fn decode_user(
    user: usize,
    cache: &CacheState,
    demand: &[usize],
    packet: &DeliveryPacket,
) -> Result<DecodeReport> {
    decode_files(user, cache, demand, packet)
}

/// Decodes an arbitrary set of target files for user `user`.
pub fn decode_files(
    user: usize,
    cache: &CacheState,
    targets: &[usize],
    packet: &DeliveryPacket,
) -> Result<DecodeReport> {
    let header = packet.header;
    let field = Field::with_bits(header.field_bits)?;
    let code = MdsCode::new(header.code_n, header.code_k, field)?;
    let wanted: BTreeSet<usize> = targets.iter().copied().collect();

    let mut known: BTreeMap<PieceRef, Vec<Symbol>> = cache
        .entries
        .iter()
        .filter(|(r, _)| wanted.contains(&r.file))
        .map(|(r, v)| (*r, v.clone()))
        .collect();
    let mut delivered: BTreeSet<PieceRef> = BTreeSet::new();
    let mut consumed = vec![false; packet.messages.len()];

    loop {
        let mut progress = false;
        for (m, msg) in packet.messages.iter().enumerate() {
            if consumed[m] {
                continue;
            }
            let unknown: Vec<PieceRef> = msg
                .pieces
                .iter()
                .filter(|r| !known.contains_key(r) && !cache.contains(r))
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if unknown.is_empty() {
                consumed[m] = true;
                continue;
            }
            if unknown.len() > msg.coefficients.rows() || unknown.iter().any(|r| !wanted.contains(&r.file)) {
                continue;
            }
            let solved = solve_message(field, cache, &known, msg.coefficients.clone(), &msg.pieces, &msg.payload, &unknown)?;
            for (r, value) in unknown.into_iter().zip(solved) {
                known.insert(r, value);
                delivered.insert(r);
            }
            consumed[m] = true;
            progress = true;
        }
        if !progress {
            break;
        }
    }

    let files = targets
        .iter()
        .map(|&i| {
            let have: Vec<(usize, Vec<Symbol>)> = known
                .range(PieceRef::new(i, 0)..PieceRef::new(i + 1, 0))
                .map(|(r, v)| (r.piece, v.clone()))
                .collect();
            let from_delivery = have
                .iter()
                .filter(|(p, _)| delivered.contains(&PieceRef::new(i, *p)))
                .count();
            let from_cache = have.len() - from_delivery;
            let data = if have.len() >= code.k() {
                Some(code.decode_blocks(&have[..code.k()])?.concat())
            } else {
                None
            };
            Ok(FileOutcome {
                file: i,
                success: data.is_some(),
                pieces_needed: code.k(),
                pieces_from_cache: from_cache,
                pieces_from_delivery: from_delivery,
                symbols_from_cache: from_cache * header.piece_len,
                symbols_from_delivery: from_delivery * header.piece_len,
                data,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DecodeReport {
        user,
        files,
        messages_consumed: consumed.iter().filter(|&&c| c).count(),
    })
}

fn solve_message(
    field: &'static Field,
    cache: &CacheState,
    known: &BTreeMap<PieceRef, Vec<Symbol>>,
    coefficients: CoeffMatrix,
    pieces: &[PieceRef],
    payload: &[Vec<Symbol>],
    unknown: &[PieceRef],
) -> Result<Vec<Vec<Symbol>>> {
    let rows = coefficients.rows();
    let mut rhs: Vec<Vec<Symbol>> = payload.to_vec();
    let mut reduced = CoeffMatrix::zeros(field, rows, unknown.len());
    for (c, r) in pieces.iter().enumerate() {
        if let Some(u) = unknown.iter().position(|x| x == r) {
            for row in 0..rows {
                let v = reduced.get(row, u) ^ coefficients.get(row, c);
                reduced.set(row, u, v);
            }
        } else {
            let value = known
                .get(r)
                .map(Vec::as_slice)
                .or_else(|| cache.get(r))
                .expect("piece is known");
            for (row, acc) in rhs.iter_mut().enumerate() {
                field.mul_acc(acc, value, coefficients.get(row, c));
            }
        }
    }
    solve(&reduced, rhs)
}
