//! Differential invariants of the projective action on families of plane
//! curves and on second-order ODEs.

pub mod catalog;
pub mod cli;
pub mod equiv;
pub mod expr;
pub mod inv_pi;
pub mod inv_pitilde;
pub mod jets;
pub mod linalg;
pub mod numeric;
pub mod reduction;
pub mod sl3;
pub mod verify;
