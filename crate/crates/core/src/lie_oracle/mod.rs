//! Matrix-model ground truth: brackets, Killing form, Iwasawa data,
//! Levi-Civita connection, curvature and geodesics of `AN = G/K`.

pub mod connection;
pub mod decomposition;
pub mod geodesic;
pub mod model;
pub mod models;

use std::sync::{Arc, OnceLock};

use crate::error::Result;

pub use connection::{ad_star, levi_civita, metric_adjoint, Connection};
pub use decomposition::{root_space_decomposition, AdaptedModel, MetricAN, RootSpace, Slot, TAU_EIG};
pub use model::{LieModel, TAU_ALG};
pub use models::{build_model, ModelId};

/// Build and decompose a shipped model; cached per process.
pub fn adapted(id: ModelId) -> Result<Arc<AdaptedModel>> {
    static CACHE: [OnceLock<Arc<AdaptedModel>>; 4] = [const { OnceLock::new() }; 4];
    let slot = &CACHE[ModelId::ALL.iter().position(|m| *m == id).expect("every id is listed")];
    if let Some(m) = slot.get() {
        return Ok(m.clone());
    }
    let m = Arc::new(root_space_decomposition(build_model(id)?)?);
    Ok(slot.get_or_init(|| m).clone())
}
