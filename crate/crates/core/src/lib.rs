//! Exact heat-trace invariants of the magnetic Dirichlet-to-Neumann map.

pub mod exact;
pub mod jet;
pub mod geometry;
pub mod symbol;
pub mod dtn;
pub mod heat;
pub mod invariants;
pub mod verify;
pub mod spectra;
