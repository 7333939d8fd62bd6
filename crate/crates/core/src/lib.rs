//! Self-stabilizing gossip protocols in the PULL model with messages of at
//! most four bits.
//!
//! Every protocol implements [`Protocol`]: a pure per-agent update that reads
//! the visible parts of η agents sampled uniformly with replacement. The
//! [`Engine`] runs synchronous rounds over a [`Population`] under PULL or
//! BIT sampling with counter-based random streams, so runs replay exactly.
//!
//! - [`consensus`]: 3-majority binary consensus.
//! - [`clocks`]: Syn-Simple, the three-bit hierarchy [`clocks::SynIntermediate`]
//!   and [`clocks::SynClock`] for arbitrary moduli.
//! - [`reducer`]: the message-reduction compiler [`Emulated`].
//! - [`compose`]: clocked protocols run next to a clock.
//! - [`dissemination`]: the clocked baselines, Phase-Spread and the
//!   three-bit [`dissemination::SynPhaseSpread`].

pub mod bits;
pub mod clocks;
pub mod compose;
pub mod consensus;
pub mod dissemination;
pub mod engine;
mod error;
pub mod protocol;
pub mod reducer;
pub mod rng;

pub use bits::{bitwise_majority, maj3, BitString};
pub use engine::{
    adversarial_init, run_until, AgentState, ByzantineStrategy, ConvergenceResult, Engine, ExecutionOrder,
    InitStrategy, Population, Roster, RoundMetrics, RunOptions, SamplingMode,
};
pub use error::{Error, Result};
pub use protocol::{Clocked, InitValue, Protocol, Role};
pub use reducer::Emulated;
