//! Hybrid quantum-classical option-critic agents.
//!
//! Any of the four option-critic components (feature extractor, option-value
//! head, termination head, intra-option policies) can be a simulated
//! variational circuit. The crate contains the exact statevector simulator
//! with adjoint gradients ([`qsim`]), the re-uploading circuit layer
//! ([`vqc`]), the classical layers and optimizer ([`diffnet`]), CartPole and
//! Acrobot ([`envs`]), the network assembly ([`agent`]), the training loop
//! ([`trainer`]) and the experiment harness ([`expkit`]).

pub mod agent;
pub mod diffnet;
pub mod envs;
pub mod error;
pub mod expkit;
pub mod qsim;
pub mod rng;
pub mod trainer;
pub mod vqc;

pub use error::{Error, Result};
