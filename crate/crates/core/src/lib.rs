pub mod benchmark;
pub mod config;
pub mod conllu;
pub mod eval;
pub mod features;
pub mod graph_parser;
pub mod neural;
pub mod parser;
pub mod synthetic;
pub mod tagger;
pub mod tools;
pub mod training;
pub mod transition;
