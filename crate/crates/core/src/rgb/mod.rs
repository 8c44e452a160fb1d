//! Recursive graph bisection over the document/component graph.

mod bisect;
mod graph;
mod permutation;

pub use bisect::{
    bisection_cost, move_gains, rgb_reorder, rgb_reorder_traced, BisectionConfig, LevelTrace, RgbTrace, Side,
};
pub use graph::{build_graph, BipartiteGraph};
pub use permutation::{apply_permutation, Permutation, PERMUTATION_MAGIC};
