use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::galois::Symbol;

/// Names one coded piece: file `file` (1-based), coded piece `piece`
/// (0-based position in the file's codeword). Labels never appear here; the
/// label-to-piece map is server state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PieceRef {
    pub file: usize,
    pub piece: usize,
}

impl PieceRef {
    pub fn new(file: usize, piece: usize) -> Self {
        PieceRef { file, piece }
    }
}

/// A user's cache: its metadata is the key set, its content the values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheState {
    pub user: usize,
    pub entries: BTreeMap<PieceRef, Vec<Symbol>>,
}

impl CacheState {
    pub fn new(user: usize) -> Self {
        CacheState {
            user,
            entries: BTreeMap::new(),
        }
    }

    pub fn metadata(&self) -> impl Iterator<Item = &PieceRef> {
        self.entries.keys()
    }

    pub fn contains(&self, piece: &PieceRef) -> bool {
        self.entries.contains_key(piece)
    }

    pub fn get(&self, piece: &PieceRef) -> Option<&[Symbol]> {
        self.entries.get(piece).map(Vec::as_slice)
    }

    pub fn symbol_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn pieces_of(&self, file: usize) -> impl Iterator<Item = &PieceRef> {
        self.entries.keys().filter(move |p| p.file == file)
    }
}
