//! Timeline-typed hardware description toolchain.

pub mod ast;
pub mod diag;
pub mod driver;
pub mod event;
pub mod fuzz;
pub mod log;
pub mod low;
pub mod netlist;
pub mod parser;
pub mod pretty;
pub mod prims;
pub mod resolve;
pub mod sim;
pub mod span;
pub mod typeck;
