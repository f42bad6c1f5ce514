//! Simulation and analysis library for 1-D quantum position verification (QPV).
//!
//! A QPV round places two verifiers at the ends of a line segment and a prover
//! at its midpoint. The verifiers launch challenge items (single-qubit states
//! and classical bit strings) towards the midpoint at a common time and accept
//! only if the expected answer returns from both directions within the
//! light-cone deadline. This crate provides:
//!
//! - [`qstate`]: a factored statevector engine for the few-qubit states the
//!   protocols manipulate (gates, basis measurements, Bell measurements,
//!   entangled-pair allocation).
//! - [`simnet`]: 1-D geometry, light-speed message scheduling and deadline
//!   verdicts.
//! - [`protocols`]: the six verification protocols, their honest provers and
//!   acceptance predicates, and the shared classical random oracle.
//! - [`adversaries`]: the entanglement-assisted attack strategies, written as
//!   event handlers that respect the network's causality rules.
//! - [`scenario`]: wiring of protocol + attack + geometry into runnable rounds.
//! - [`analysis`]: exact acceptance probabilities by exhaustive branch
//!   enumeration, Monte Carlo estimation with Wilson intervals, and parameter
//!   sweeps.
//!
//! Everything stochastic draws from an explicit [`rng::RandomSource`], so a
//! round can be sampled (Monte Carlo) or enumerated over every discrete
//! branch (exact mode) with the same code path.
//!
//! # Example
//!
//! Exact acceptance probability of the single-pair teleport attack on the
//! one-qubit protocol (the adversaries win every round):
//!
//! ```
//! use qpv_core::adversaries::AttackKind;
//! use qpv_core::analysis::exact_success;
//! use qpv_core::protocols::ProtocolKind;
//! use qpv_core::scenario::ScenarioConfig;
//!
//! let config = ScenarioConfig::new(ProtocolKind::P1)
//!     .with_attack(AttackKind::P1Teleport1Epr)
//!     .with_seed(7);
//! let result = exact_success(&config).unwrap();
//! assert!((result.probability - 1.0).abs() < 1e-12);
//! assert_eq!(result.branch_count, 16);
//! ```

pub mod adversaries;
pub mod analysis;
pub mod bits;
pub mod protocols;
pub mod qstate;
pub mod rng;
pub mod scenario;
pub mod simnet;

pub use analysis::{Estimate, ExactResult};
pub use protocols::{Challenge, OracleTable, ProtocolKind};
pub use qstate::{BellOutcome, Cluster, Engine, Gate1Q, QubitId};
pub use rng::{RandomSource, RngStream};
pub use scenario::{Mode, ScenarioConfig};
pub use simnet::{Payload, PartyName, RoundTranscript, Verdict};
