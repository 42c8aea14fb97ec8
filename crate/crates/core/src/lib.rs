//! Two-dimensional bounded model checking of counting properties on Petri
//! nets: λ bounds the run length, κ the tokens per place.

pub mod cli;
pub mod encode;
pub mod engine;
pub mod logic;
pub mod models;
pub mod net;
pub mod oracle;
pub mod pnml;
pub mod report;
pub mod smt;
pub mod solver;
pub mod trace;
