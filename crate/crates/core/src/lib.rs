//! Simulation and error budgeting for quantum communication with
//! quantum-dot electron spins.
//!
//! The crate covers the full chain from single-node physics to network
//! performance:
//!
//! - [`dynamics`]: Schrödinger and Lindblad evolution for small Hilbert spaces.
//! - [`dot`]: level scheme, photon energies, tuning sensitivity, dipole
//!   coupling and spectral addressing of a node.
//! - [`photon`]: two-photon Bell analysis, efficiency chain and heralded
//!   link statistics.
//! - [`gate`]: Raman single-qubit error and the adiabatic dipole-dipole
//!   controlled-phase gate.
//! - [`phonon`]: deformation-potential spectral density and the
//!   phonon-assisted addressing error.
//! - [`readout`]: cycling-fluorescence readout Monte Carlo.
//! - [`repeater`]: nested entanglement swapping over a repeater chain.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dot;
pub mod dynamics;
pub mod error;
pub mod gate;
pub mod phonon;
pub mod photon;
pub mod quadrature;
pub mod readout;
pub mod repeater;
pub mod seed;
pub mod units;

pub use dot::{DotConfig, MaterialConstants, NodePlan};
pub use dynamics::{
    accumulated_phase, evolve_lindblad, evolve_schrodinger, DensityMatrix, QuantumState,
    TimeDependentHamiltonian, Trajectory,
};
pub use error::{Error, Result};
pub use gate::{GateReport, PulsedDrive, RamanConfig};
pub use phonon::{EnvelopeWavefunction, PhononModel};
pub use photon::{BellOutcome, LinkBudget};
pub use readout::{ReadoutConfig, ReadoutReport};
pub use repeater::{ChainConfig, WernerPair};
