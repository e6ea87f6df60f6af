//! Biaffine arc/label scoring with single-root arborescence decoding.

mod model;
mod mst;

pub use model::{BiaffineParser, GraphConfig, FAMILY};
pub use mst::{brute_force_arborescence, decode_single_root_mst, is_single_rooted_tree, DecodeError, ScoreMatrix};
