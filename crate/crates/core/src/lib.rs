//! Numerical toolkit for minimal surfaces: discrete geometry, Weierstrass
//! representations, graph flows, density estimates, multivalued graph
//! decomposition, annular gradient estimates, harmonic polynomial spectra and
//! Ricci-flow width bounds.

pub mod annulus;
pub mod geomcore;
pub mod io;
pub mod graphflow;
pub mod monotonicity;
pub mod multigraph;
pub mod numerics;
pub mod ricciwidth;
pub mod spectra;
pub mod suite;
pub mod weierstrass;
