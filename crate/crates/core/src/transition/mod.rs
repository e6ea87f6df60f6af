//! Arc-standard and arc-eager transition-based parsing.



pub use system::{
    apply_transition, feature_token_indices, is_finished, legal_transitions, static_oracle, ParserState,
    SystemKind, Transition, TransitionError, TransitionKind,
};
mod model;
mod system;

pub use model::{parse_with_scorer, OutputSpace, TransitionConfig, TransitionParser, FAMILY};
