//! Relativistic diffusion on the orthonormal frame bundle of a Lorentzian manifold.

pub mod geometry;
pub mod diffusion;
pub mod fiber_analysis;
pub mod frame_bundle;
pub mod montecarlo;
pub mod jet;
