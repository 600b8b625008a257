//! Exact symbolic verification of pseudo-boson structures for the two-mode
//! harmonic oscillator and the D2 Calogero model.

pub mod calogero;
pub mod config;
pub mod dsl;
pub mod funcspace;
pub mod gaussint;
pub mod kernel;
pub mod opalg;
pub mod qho;
pub mod report;
pub mod scalar;
pub mod suite;
