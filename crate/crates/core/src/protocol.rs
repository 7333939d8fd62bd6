//! The protocol contract shared by the engine, the reducer and composition.

use std::fmt::Debug;

use crate::bits::BitString;
use crate::error::Result;
use crate::rng::AgentRng;

/// Fixed per-agent annotations. Agents know their role; it is never corrupted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Role {
    pub is_source: bool,
    /// Only meaningful for sources.
    pub input_bit: bool,
}

impl Role {
    pub const PLAIN: Role = Role { is_source: false, input_bit: false };

    pub fn source(input_bit: bool) -> Self {
        Role { is_source: true, input_bit }
    }
}

/// How the adversary sets one agent's private memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitValue {
    /// Every field drawn uniformly from its domain.
    Random,
    /// A deterministic state keyed by a value in `[0, init_domain)`.
    /// For clocks the value is the clock reading, for opinions the bit.
    Value(u64),
}

/// A protocol in the PULL(η, ℓ) model.
///
/// `update` must be a pure function of its arguments. The engine hands each
/// agent the visible parts of `eta()` sampled agents from the previous round.
pub trait Protocol: Send + Sync {
    type Memory: Clone + Debug + PartialEq + Send + Sync;

    fn name(&self) -> String;

    /// Pulls per round.
    fn eta(&self) -> usize;

    /// Visible bits per agent.
    fn ell(&self) -> u32;

    fn bitwise_independent(&self) -> bool;

    /// Size of the value domain accepted by [`InitValue::Value`].
    fn init_domain(&self) -> u64;

    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<Self::Memory>;

    /// The ℓ-bit visible part of a memory.
    fn visible(&self, memory: &Self::Memory) -> BitString;

    fn update(
        &self,
        memory: &Self::Memory,
        role: Role,
        observed: &[BitString],
        rng: &mut AgentRng,
    ) -> Self::Memory;

    fn output_bit(&self, _memory: &Self::Memory) -> Option<bool> {
        None
    }

    /// Decoded output clock, in `[0, clock_modulus)`.
    fn output_clock(&self, _memory: &Self::Memory) -> Option<u64> {
        None
    }

    fn clock_modulus(&self) -> Option<u64> {
        None
    }

    /// Whether the agent currently relays an opinion (dissemination only).
    fn speaking(&self, _memory: &Self::Memory) -> Option<bool> {
        None
    }
}

/// A protocol that is driven by an external clock modulo `period()`.
///
/// It becomes a [`Protocol`] once paired with a clock, either an oracle one
/// ([`crate::compose::OracleClock`]) or a clock protocol
/// ([`crate::compose::Compose`]).
pub trait Clocked: Send + Sync {
    type Memory: Clone + Debug + PartialEq + Send + Sync;

    fn name(&self) -> String;
    fn eta(&self) -> usize;
    fn ell(&self) -> u32;
    fn bitwise_independent(&self) -> bool;
    fn period(&self) -> u64;
    fn init_domain(&self) -> u64;
    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<Self::Memory>;

    /// Visible part while the shared clock reads `clock`.
    fn visible(&self, memory: &Self::Memory, clock: u64) -> BitString;

    /// One round; `clock` is the reading at the start of the round.
    fn update(
        &self,
        memory: &Self::Memory,
        role: Role,
        observed: &[BitString],
        clock: u64,
        rng: &mut AgentRng,
    ) -> Self::Memory;

    fn output_bit(&self, memory: &Self::Memory) -> Option<bool>;

    fn speaking(&self, _memory: &Self::Memory) -> Option<bool> {
        None
    }
}
