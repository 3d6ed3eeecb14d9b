use serde::Serialize;

use super::cache::PieceRef;
use crate::galois::{CoeffMatrix, Symbol};
use crate::Rational;

/// Parameters a user needs to interpret the packet: the field, the per-file
/// code, and the piece and file sizes in symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PacketHeader {
    pub field_bits: u32,
    pub code_n: usize,
    pub code_k: usize,
    pub piece_len: usize,
    pub file_len: usize,
}

/// Composition of one message: how many combinations it carries and which
/// pieces, in column order, it mixes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MessageMeta {
    pub rows: usize,
    pub pieces: Vec<PieceRef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub coefficients: CoeffMatrix,
    pub pieces: Vec<PieceRef>,
    /// One row per coefficient row; row `r` is `sum_c coefficients[r][c] * pieces[c]`.
    pub payload: Vec<Vec<Symbol>>,
}

impl Message {
    pub fn meta(&self) -> MessageMeta {
        MessageMeta {
            rows: self.coefficients.rows(),
            pieces: self.pieces.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeliveryPacket {
    pub header: PacketHeader,
    pub messages: Vec<Message>,
}

impl DeliveryPacket {
    pub fn payload_rows(&self) -> usize {
        self.messages.iter().map(|m| m.payload.len()).sum()
    }

    pub fn payload_symbols(&self) -> usize {
        self.messages
            .iter()
            .flat_map(|m| m.payload.iter())
            .map(Vec::len)
            .sum()
    }

    /// Payload symbols over file length, exact.
    pub fn load(&self) -> Rational {
        Rational::new(self.payload_symbols() as i128, self.header.file_len as i128)
    }

    /// Metadata size in symbols: one (file, piece) pair per combined piece
    /// plus the coefficient entries. Not part of the load.
    pub fn metadata_symbols(&self) -> usize {
        self.messages
            .iter()
            .map(|m| 2 * m.pieces.len() + m.coefficients.rows() * m.coefficients.cols())
            .sum()
    }

    pub fn metadata_exceeds_payload(&self) -> bool {
        self.metadata_symbols() > self.payload_symbols()
    }

    pub fn metadata(&self) -> Vec<MessageMeta> {
        self.messages.iter().map(Message::meta).collect()
    }
}
