use rand::Rng;

use crate::combinatorics::RngStream;
use crate::galois::{Field, Symbol};

/// Stream id reserved for library generation.
const LIBRARY_STREAM: u64 = 0x4c49_4252;

/// The `N` files, each `file_len` uniformly random field symbols. File `i`
/// is drawn from its own stream so files are mutually independent and any
/// single file can be regenerated from the seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileLibrary {
    field: &'static Field,
    seed: u64,
    files: Vec<Vec<Symbol>>,
}

impl FileLibrary {
    pub fn generate(files: usize, file_len: usize, field: &'static Field, seed: u64) -> Self {
        let root = RngStream::new(seed, LIBRARY_STREAM);
        let max = (field.order() - 1) as u32;
        let files = (1..=files)
            .map(|i| {
                let mut rng = root.child(i as u64).rng();
                (0..file_len).map(|_| rng.gen_range(0..=max) as Symbol).collect()
            })
            .collect();
        FileLibrary { field, seed, files }
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn file_len(&self) -> usize {
        self.files.first().map_or(0, Vec::len)
    }

    /// File `i` (1-based).
    pub fn file(&self, i: usize) -> &[Symbol] {
        &self.files[i - 1]
    }
}
