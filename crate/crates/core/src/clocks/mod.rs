//! Clock synchronization protocols.

mod ell;
pub mod nested;
mod syn_clock;
mod syn_intermediate;
mod syn_simple;

pub use ell::{ell_sequence, shrink, EllSequence};
pub use syn_clock::{compose_clock, display_index, syn_clock_protocol, t_prime, SynClock, SynClock3, SynClockMemory};
pub use syn_intermediate::{Slots, SynIntermediate, SynIntermediateMemory, MAX_LEVELS};
pub use syn_simple::{syn_simple_update, SynSimple};
