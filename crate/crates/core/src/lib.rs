//! Lattice QCD performance-engineering toolkit.
//!
//! * [`su3`]: single-precision SU(3) kernels with exact flop accounting
//! * [`lattice`]: 4-D periodic geometry, even-odd ordering, site-major and
//!   field-major storage
//! * [`membench`]: kernel microbenchmarks under controlled access patterns,
//!   a stream-copy probe, and an SMP contention experiment
//! * [`solver`]: naive staggered D-slash and even-odd conjugate gradient
//! * [`model`]: analytic cluster model for halo exchange, global sums,
//!   injected latency and heterogeneous nodes

pub mod error;
pub mod lattice;
pub mod membench;
pub mod model;
pub mod solver;
pub mod su3;

pub use error::{Error, Result};
pub use lattice::{Hop, LatticeFields, LatticeGeometry, LayoutPolicy, LayoutTag, Parity, SiteIndex};
pub use membench::{AccessPattern, Kernel, MachineProfile, PerfSample, Timing};
pub use model::{ClusterConfig, Decomposition, LinkProfile, NodeProfile};
pub use solver::{FermionField, GaugeField, SolveReport, StaggeredPhases};
pub use su3::{Complex32, FlopCount, Su3Matrix, Su3Vector};
