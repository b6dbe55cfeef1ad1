//! Maximum flow by repeated reverse-BFS arc sorting and global pushing,
//! together with independent oracles, worst-case instance families, DIMACS
//! I/O and a claim-verification harness.
//!
//! ```
//! use sortflow::{generators::gen_two_iteration, engine::{run, RunLimits}};
//!
//! let net = gen_two_iteration().build().unwrap();
//! let (_, report) = run(&net, RunLimits::for_network(&net)).unwrap();
//! assert_eq!((report.flow_value, report.iterations), (2, 2));
//! ```

pub mod dimacs;
pub mod engine;
pub mod generators;
pub mod harness;
pub mod network;
pub mod oracle;
pub mod restore;

pub use engine::{bfss, push, run, RunLimits, RunReport};
pub use generators::Instance;
pub use network::{FlowState, Network};
