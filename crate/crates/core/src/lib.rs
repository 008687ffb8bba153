//! Exact computations of mirror algebras from scattering data: truncated series,
//! wall-crossing, broken lines, theta functions and their structure constants, spines,
//! and the Stanley–Reisner central fibre.

pub mod arith;
pub mod geometry;
pub mod interface;
pub mod scattering;
pub mod series;
pub mod spines;
pub mod theta;
pub mod vertex;
