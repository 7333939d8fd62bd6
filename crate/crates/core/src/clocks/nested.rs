//! The clock hierarchy built by stacking the message reducer on Syn-Simple.
//!
//! Started from a state where every level sits at a phase boundary, each
//! stack shows exactly the same messages as [`super::SynIntermediate`] for
//! the matching T, which makes it a cross-check of both implementations.

use super::SynIntermediate;
use super::SynSimple;
use crate::error::{invalid, Result};
use crate::protocol::{InitValue, Protocol, Role};
use crate::reducer::{EmulMemory, Emulated};

/// τ = 2.
pub type Nested2 = Emulated<SynSimple>;
/// τ = 3.
pub type Nested3 = Emulated<Nested2>;
/// τ = 4.
pub type Nested4 = Emulated<Nested3>;

fn check_tau(t: u64, tau: usize) -> Result<()> {
    let got = SynIntermediate::new(t)?.tau();
    if got != tau {
        return Err(invalid("T", "matching tau", format!("T={t} has tau={got}, not {tau}")));
    }
    Ok(())
}

pub fn nested2(t: u64) -> Result<Nested2> {
    check_tau(t, 2)?;
    Emulated::new(SynSimple::new(t)?)
}

pub fn nested3(t: u64) -> Result<Nested3> {
    check_tau(t, 3)?;
    Emulated::new(Emulated::new(SynSimple::new(t)?)?)
}

pub fn nested4(t: u64) -> Result<Nested4> {
    check_tau(t, 4)?;
    Emulated::new(Emulated::new(Emulated::new(SynSimple::new(t)?)?)?)
}

/// Wraps an inner memory at a phase boundary with phase clock `clock`.
pub fn boundary_memory<P: Protocol>(
    emulated: &Emulated<P>,
    inner: P::Memory,
    clock: u64,
) -> Result<EmulMemory<P::Memory>> {
    if clock >= emulated.slowdown() {
        return Err(invalid("clock", "clock < phase modulus", format!("got {clock}")));
    }
    let mut rng = crate::rng::agent_rng(0, 0, 0, 0);
    let mut mem = emulated.init_memory(InitValue::Value(0), Role::PLAIN, &mut rng)?;
    mem.private_message = emulated.inner().visible(&inner);
    mem.inner = inner;
    mem.clock = clock;
    Ok(mem)
}
