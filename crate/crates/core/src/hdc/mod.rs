//! Single-model hyperdimensional computing: encoding, prototypes, inference,
//! retraining and sub-model gather/scatter.

mod encoder;
mod model;
mod submodel;
mod vector;

pub use encoder::{EncoderParams, EncoderShape};
pub use model::{
    init_prototypes, mean_of, retrain_pass, retrain_pass_in_order, Prediction, PrototypeModel,
};
pub use submodel::{restrict, restrict_samples, scatter, IndexSet, SubModel};
pub use vector::{cosine_distance, normalize_l2};
