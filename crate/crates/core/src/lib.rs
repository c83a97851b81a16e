//! Graph filters for denoising time-varying sensor-network signals.
//!
//! - [`graph`]: sensor graphs, k-NN construction, binary selection matrices
//! - [`khop`]: K-hop and attenuated K-hop spatial selections
//! - [`product`]: temporal bands, strong product and node-selecting graphs
//! - [`filters`]: mean and median filters, sequential and batch
//! - [`harness`]: CSV ingestion, noise injection, SNR sweeps
//! - [`cli`]: the `tvfilter` command-line front end

pub mod cli;
pub mod error;
pub mod filters;
pub mod graph;
pub mod harness;
pub mod khop;
pub mod product;

pub use error::{Error, Result};
pub use filters::{
    apply_filter, mean_filter_batch, mean_filter_sequential, median_filter, neighborhood,
    FilterConfig, FilterKind, Filtered, NeighborhoodSet, PowerBase, SelectionGraph, SequentialPlan,
    TimeVertexSignal,
};
pub use graph::{
    build_knn_graph, degree_vector, logical_adjacency, Adjacency, Graph, SelectionKind,
    SelectionMatrix, Weighting,
};
pub use khop::{khop_attenuated, khop_unweighted, KHopParams};
pub use product::{
    line_graph_adjacency, node_selecting_graph, strong_product, temporal_adjacency, TemporalParams,
};
