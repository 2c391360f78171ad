//! Decide, certify and quantify LOSR nonclassicality of bipartite
//! no-signaling resources by compiling Choi-matrix membership conditions
//! into conic programs.

pub mod basis;
pub mod compiler;
pub mod hermitian;
pub mod monotones;
pub mod resource;
pub mod solver;

pub use hermitian::{kron, partial_trace, permutation_unitary, real_embedding, CMatrix, TensorShape, C64};
pub use compiler::{
    auto_free_model, classical_party_free_model, hierarchy_free_model, ns_free_model, ppt_free_model, CompileError,
    FreeSetModel, ModelKind,
};
pub use monotones::{
    absolute_robustness, absolute_robustness_variant, generalized_robustness, membership_test, nonlocal_weight,
    Exactness, MembershipVerdict, MonotoneError, MonotoneName, MonotoneResult,
};
pub use resource::{ChoiResource, ResourceError, ResourceSpec, SystemKind, SystemSpec};
