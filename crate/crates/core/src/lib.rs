//! Balanced probability measures on finite connected graphs and the
//! embeddings into `l1(R^m)` they induce.
//!
//! The greedy remote-vertex procedure repeatedly appends the vertex that
//! maximizes the sum of distances to the vertices chosen so far. Its
//! empirical measures converge towards balanced measures: measures whose
//! support vertices all attain the maximal transport cost
//! `T(w) = sum_u d(w, u) mu(u)`. A balanced measure on `m` vertices gives
//! a 1-Lipschitz map into `l1(R^m)` whose support images lie on a
//! hyperplane and are, on average, well separated.

pub mod embedding;
pub mod error;
pub mod exact;
pub mod generators;
pub mod graph;
pub mod greedy;
pub mod io;
pub mod measure;
pub mod pipeline;

pub use error::{Error, Result};
pub use graph::{all_pairs_distances, boundary, isoperimetric_report, BoundarySet, DistanceMatrix, Graph};
pub use greedy::{GreedyState, RunConfig, TieBreak};
pub use measure::{is_balanced, BalanceReport, VertexMeasure};
