//! Finite-size analysis of Poissonian power-law random graphs.
//!
//! Node `i` (1-based rank) carries capacity `λ_i = (N/i)^α` and every
//! unordered pair `{i, j}` receives a Poisson number of links with mean
//! `λ_i λ_j / L_N`. On top of that model the crate computes the nested layer
//! hierarchy `U_0 ⊆ U_1 ⊆ ...`, the analytical lower bounds on how many nodes
//! sit next to a core node with an ascending path to the top node, the
//! optimal core parameters `(x, l)`, and the Monte-Carlo measurements used to
//! validate those bounds on sampled graphs.
//!
//! All logarithms are natural logarithms.

pub mod bounds;
pub mod error;
pub mod figures;
pub mod graphgen;
pub mod graphops;
pub mod layers;
pub mod model;
pub mod sim;

pub use bounds::{
    asymptotic_density, optimize, p_zero, s_objective, stationary_x, BoundConfig, BoundReport,
    CoreCountBounds, GridSpec, LayerLinkBound, Optimum,
};
pub use error::{Error, Result};
pub use graphgen::{sample_graph, GenMethod, GenSpec, MultiGraph};
pub use graphops::{Components, DistanceSummary, LayerUplink};
pub use layers::{build_layers, k_star, LayerStructure};
pub use model::{CommunicationRangeFlag, LFamily, ModelParams, RangeThresholds};
pub use sim::{Aggregate, AggregateRow, SimConfig, SimReport};
