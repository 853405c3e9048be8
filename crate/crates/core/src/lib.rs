//! Simulation toolkit for a nanomechanical resonator coupled to two
//! parametrically coupled microwave cavities driven by a two-mode squeezed
//! bath.
//!
//! The crate has four layers:
//!
//! * [`fock`] — truncated bosonic operators and states on composite spaces;
//! * [`design`] — closed-form Bogoliubov-frame design calculator and sweeps;
//! * [`model`] — Hamiltonian/dissipator assembly for the lab, exact
//!   Bogoliubov, effective RWA and reduced blockade frames;
//! * [`engine`] — Liouvillian construction, adaptive time evolution, steady
//!   states, correlation functions and excitation spectra.
//!
//! [`experiments`] wires those into reproducible, config-driven runs behind
//! the `sqem` command-line tool.
//!
//! Conventions fixed across the crate: frequencies in units of the
//! mechanical frequency `omega_m = 1`; mode order (cavity/Bogoliubov 1,
//! cavity/Bogoliubov 2, mechanics); column-stacking vectorization of density
//! matrices.

pub mod design;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod model;
pub mod sparse;

pub use error::{Result, SqemError};
