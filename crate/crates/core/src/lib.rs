//! Distribution of graph states over a star network by subgraph
//! complementation, with exact and heuristic solvers, schedule compilers,
//! a stabilizer oracle and a Pauli-frame noise simulator.

pub mod cli;
pub mod error;
pub mod gf2_linalg;
pub mod graph_state;
pub mod noise_mc;
pub mod parallel;
pub mod protocol;
pub mod sc_solver;
pub mod stabilizer_oracle;

pub use error::{Error, Result};
pub use graph_state::{Basis, GraphFamily, LabeledGraph};
