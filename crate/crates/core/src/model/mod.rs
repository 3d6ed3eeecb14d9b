//! The shared-link system model: parameters, demands, the file library,
//! user caches, delivery packets, and per-user views.

mod cache;
mod demand;
mod library;
mod packet;
mod params;
mod view;

pub use cache::{CacheState, PieceRef};
pub use demand::{
    all_demand_vectors, demand_vector_index, enumerate_demand_matrices, enumerate_others,
    validate_vector, DemandMatrix, DemandVector, DEFAULT_DEMAND_CAP,
};
pub use library::FileLibrary;
pub use packet::{DeliveryPacket, Message, MessageMeta, PacketHeader};
pub use params::SystemParams;
pub use view::{build_user_view, UserView, ViewEntry, ViewMessage};
