use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use super::{cached_pieces, resolve_plan, sample_label_maps, DeliveryRandomness, Scheme, SchemeSpec};
use crate::error::{Error, Result};
use crate::galois::{make_coeff_matrix, CoeffMatrix, Field, MdsCode, Symbol};
use crate::model::{
    CacheState, DeliveryPacket, DemandMatrix, FileLibrary, Message, MessageMeta, PacketHeader,
    PieceRef, SystemParams,
};
use crate::Rational;

/// Secret server state after placement: for each file, the label-to-piece
/// map and the coded pieces.
#[derive(Clone, Debug)]
pub struct ServerState {
    /// `label_to_piece[i - 1][label]` is the coded piece stored under `label` of file `i`.
    pub label_to_piece: Vec<Vec<usize>>,
    coded: Vec<Vec<Vec<Symbol>>>,
}

impl ServerState {
    pub fn piece(&self, r: PieceRef) -> &[Symbol] {
        &self.coded[r.file - 1][r.piece]
    }
}

#[derive(Clone, Debug)]
pub struct PlacementResult {
    /// `caches[k - 1]` belongs to user `k`.
    pub caches: Vec<CacheState>,
    pub server: ServerState,
}

impl PlacementResult {
    pub fn cache(&self, user: usize) -> &CacheState {
        &self.caches[user - 1]
    }
}

/// A scheme bound to a field, a per-file MDS code, a shared coefficient
/// matrix and a piece size. File size is `data_pieces * piece_len` symbols.
#[derive(Clone, Debug)]
pub struct SchemeInstance {
    scheme: Arc<dyn Scheme>,
    code: MdsCode,
    coefficients: CoeffMatrix,
    piece_len: usize,
}

impl SchemeInstance {
    /// Uses the smallest field large enough for the code and the coefficient matrix.
    pub fn new(scheme: Arc<dyn Scheme>, piece_len: usize) -> Result<Self> {
        let (rows, cols) = scheme.message_shape();
        let field = Field::smallest_with((rows + cols).max(scheme.label_count()))?;
        Self::with_field(scheme, piece_len, field)
    }

    pub fn with_field(scheme: Arc<dyn Scheme>, piece_len: usize, field: &'static Field) -> Result<Self> {
        if piece_len == 0 {
            return Err(Error::InvalidParams("piece length must be positive".into()));
        }
        let code = MdsCode::new(scheme.label_count(), scheme.data_pieces(), field)?;
        let (rows, cols) = scheme.message_shape();
        let coefficients = make_coeff_matrix(rows, cols, field)?;
        Ok(SchemeInstance {
            scheme,
            code,
            coefficients,
            piece_len,
        })
    }

    pub fn build(params: &SystemParams, spec: &SchemeSpec, piece_len: usize) -> Result<Self> {
        Self::new(spec.build(params)?, piece_len)
    }

    pub fn scheme(&self) -> &dyn Scheme {
        self.scheme.as_ref()
    }

    pub fn params(&self) -> &SystemParams {
        self.scheme.params()
    }

    pub fn field(&self) -> &'static Field {
        self.code.field()
    }

    pub fn code(&self) -> &MdsCode {
        &self.code
    }

    pub fn coefficients(&self) -> &CoeffMatrix {
        &self.coefficients
    }

    pub fn piece_len(&self) -> usize {
        self.piece_len
    }

    pub fn file_len(&self) -> usize {
        self.code.k() * self.piece_len
    }

    /// Number of coded pieces per file.
    pub fn subpacketization(&self) -> usize {
        self.code.n()
    }

    pub fn memory(&self) -> Rational {
        self.scheme.memory()
    }

    pub fn header(&self) -> PacketHeader {
        PacketHeader {
            field_bits: self.field().bits(),
            code_n: self.code.n(),
            code_k: self.code.k(),
            piece_len: self.piece_len,
            file_len: self.file_len(),
        }
    }

    pub fn library(&self, seed: u64) -> FileLibrary {
        FileLibrary::generate(self.params().files, self.file_len(), self.field(), seed)
    }

    pub fn sample_label_maps<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<usize>> {
        sample_label_maps(self.scheme(), rng)
    }

    pub fn sample_randomness<R: Rng + ?Sized>(&self, rng: &mut R) -> DeliveryRandomness {
        DeliveryRandomness::sample(&self.scheme.randomness_shape(), rng)
    }

    fn check_label_maps(&self, maps: &[Vec<usize>]) -> Result<()> {
        let n = self.scheme.label_count();
        if maps.len() != self.params().files {
            return Err(Error::InvalidParams("one label map per file is required".into()));
        }
        for m in maps {
            let distinct: BTreeSet<_> = m.iter().collect();
            if m.len() != n || distinct.len() != n || m.iter().any(|&x| x >= n) {
                return Err(Error::InvalidParams(format!(
                    "label map must be a permutation of 0..{n}"
                )));
            }
        }
        Ok(())
    }

    /// Pieces user `user` caches under the given label maps.
    pub fn cached_pieces(&self, user: usize, maps: &[Vec<usize>]) -> BTreeSet<PieceRef> {
        cached_pieces(self.scheme(), user, maps)
    }

    pub fn place(&self, library: &FileLibrary, label_to_piece: Vec<Vec<usize>>) -> Result<PlacementResult> {
        self.check_label_maps(&label_to_piece)?;
        if library.field() != self.field() || library.file_len() != self.file_len() {
            return Err(Error::InvalidParams(format!(
                "library must hold {}-symbol files over {:?}",
                self.file_len(),
                self.field()
            )));
        }
        let coded = (1..=self.params().files)
            .map(|i| {
                let data: Vec<Vec<Symbol>> = library
                    .file(i)
                    .chunks(self.piece_len)
                    .map(<[Symbol]>::to_vec)
                    .collect();
                self.code.encode_blocks(&data)
            })
            .collect::<Result<Vec<_>>>()?;
        let server = ServerState {
            label_to_piece,
            coded,
        };
        let caches = (1..=self.params().users)
            .map(|user| {
                let mut cache = CacheState::new(user);
                for r in self.cached_pieces(user, &server.label_to_piece) {
                    cache.entries.insert(r, server.piece(r).to_vec());
                }
                cache
            })
            .collect();
        Ok(PlacementResult { caches, server })
    }

    pub fn place_random<R: Rng + ?Sized>(&self, library: &FileLibrary, rng: &mut R) -> Result<PlacementResult> {
        let maps = self.sample_label_maps(rng);
        self.place(library, maps)
    }

    /// Message compositions with labels resolved through `label_to_piece`.
    pub fn metadata(
        &self,
        label_to_piece: &[Vec<usize>],
        demands: &DemandMatrix,
        randomness: &DeliveryRandomness,
    ) -> Result<Vec<MessageMeta>> {
        if demands.users() != self.params().users {
            return Err(Error::InvalidDemand("demand matrix has the wrong number of users".into()));
        }
        let plan = self.scheme.plan(demands, randomness)?;
        resolve_plan(self.scheme(), &plan, label_to_piece)
    }

    pub fn deliver_with(
        &self,
        placement: &PlacementResult,
        demands: &DemandMatrix,
        randomness: &DeliveryRandomness,
    ) -> Result<DeliveryPacket> {
        let server = &placement.server;
        let messages = self
            .metadata(&server.label_to_piece, demands, randomness)?
            .into_iter()
            .map(|meta| {
                let blocks: Vec<&[Symbol]> = meta.pieces.iter().map(|&r| server.piece(r)).collect();
                let payload = (0..self.coefficients.rows())
                    .map(|r| self.coefficients.combine_row(r, &blocks))
                    .collect();
                Message {
                    coefficients: self.coefficients.clone(),
                    pieces: meta.pieces,
                    payload,
                }
            })
            .collect();
        Ok(DeliveryPacket {
            header: self.header(),
            messages,
        })
    }

    pub fn deliver<R: Rng + ?Sized>(
        &self,
        placement: &PlacementResult,
        demands: &DemandMatrix,
        rng: &mut R,
    ) -> Result<DeliveryPacket> {
        let randomness = self.sample_randomness(rng);
        self.deliver_with(placement, demands, &randomness)
    }
}
