//! Bit and majority-bit dissemination.

mod baselines;
mod phase_spread;
mod schedule;

pub use baselines::{
    baseline_period, certainty_round, subphase_sensitive_round, CertaintyMemory, CertaintyProtocol,
    SubphaseProtocol,
};
pub use phase_spread::{certify, parity_display, PhaseSpread, PhaseSpreadMemory};
pub use schedule::{phase_schedule, PhaseKind, PhaseSchedule};

use crate::clocks::{syn_clock_protocol, SynClock3};
use crate::compose::Compose;
use crate::error::Result;
use crate::reducer::Emulated;

/// Phase-Spread next to the three-bit clock, reduced to three bits.
pub type SynPhaseSpread = Emulated<Compose<SynClock3, PhaseSpread>>;

/// `gamma` drives the clock, `gamma_phase` the dissemination schedule.
pub fn syn_phase_spread_protocol(n: usize, gamma: f64, gamma_phase: f64) -> Result<SynPhaseSpread> {
    let schedule = phase_schedule(n, gamma_phase)?;
    let clock = syn_clock_protocol(schedule.period(), n, gamma)?;
    Emulated::new(Compose::new(clock, PhaseSpread::new(schedule))?)
}
