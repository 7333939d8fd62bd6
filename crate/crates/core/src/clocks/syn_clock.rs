//! Clock synchronization for an arbitrary modulus T.
//!
//! A small power-of-two clock C' runs on [`SynIntermediate`] (three bits);
//! a fourth bit slowly agrees on a counter Q, one bit per display window of
//! ⌈γ log₂ n⌉ rounds. Q advances each time C' wraps, and the output clock
//! is `(C' + Q·T') mod T`.

use rand::Rng;

use super::syn_intermediate::{SynIntermediate, SynIntermediateMemory};
use crate::bits::{maj3, mask, BitString};
use crate::engine::ceil_log2;
use crate::error::{invalid, Result};
use crate::protocol::{InitValue, Protocol, Role};
use crate::reducer::Emulated;
use crate::rng::AgentRng;

/// `(c_small + q·t_small) mod t`.
pub fn compose_clock(c_small: u64, q: u64, t_small: u64, t: u64) -> u64 {
    match q.checked_mul(t_small).and_then(|x| x.checked_add(c_small)) {
        Some(x) => x % t,
        None => ((u128::from(c_small) + u128::from(q) * u128::from(t_small)) % u128::from(t)) as u64,
    }
}

/// Smallest power of two strictly greater than
/// `log₂T·(γ·log₂n + γ·max(1, log₂log₂T))`.
pub fn t_prime(t: u64, n: usize, gamma: f64) -> Result<u64> {
    if t < 2 {
        return Err(invalid("T", "T >= 2", format!("got {t}")));
    }
    if n < 2 {
        return Err(invalid("n", "n >= 2", format!("got {n}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "gamma > 0", format!("got {gamma}")));
    }
    let log_t = (t as f64).log2();
    let loglog = log_t.log2().max(1.0);
    let bound = log_t * (gamma * (n as f64).log2() + gamma * loglog);
    let mut p = 1u64;
    while (p as f64) <= bound {
        p = p.checked_mul(2).ok_or_else(|| invalid("gamma", "T' < 2^64", format!("bound {bound}")))?;
    }
    Ok(p)
}

/// Which bit of Q is on display when the small clock reads `c_small`.
pub fn display_index(c_small: u64, window: u64, q_bits: u32) -> u32 {
    ((c_small / window) % u64::from(q_bits)) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynClockMemory {
    pub inner: SynIntermediateMemory,
    /// Raw Q register of `q_bits` bits; its value is read modulo T.
    pub q: u64,
}

/// The four-bit clock protocol. [`syn_clock_protocol`] wraps it down to
/// three bits.
#[derive(Debug, Clone, PartialEq)]
pub struct SynClock {
    modulus: u64,
    n: usize,
    gamma: f64,
    t_small: u64,
    window: u64,
    q_bits: u32,
    inner: SynIntermediate,
}

impl SynClock {
    /// `t ≥ 2`, any value. T' is [`t_prime`], raised to at least 8 so the
    /// small clock has three-bit messages and to at least one display
    /// window per bit of Q.
    pub fn new(t: u64, n: usize, gamma: f64) -> Result<Self> {
        let window = (gamma * (n as f64).log2()).ceil().max(1.0) as u64;
        let q_bits = ceil_log2(t).max(1);
        let mut t_small = t_prime(t, n, gamma)?.max(8);
        while t_small < window * u64::from(q_bits) {
            t_small *= 2;
        }
        let inner = SynIntermediate::new(t_small)?;
        Ok(Self { modulus: t, n, gamma, t_small, window, q_bits, inner })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// T', the modulus of C'.
    pub fn t_small(&self) -> u64 {
        self.t_small
    }

    /// ⌈γ log₂ n⌉.
    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn q_bits(&self) -> u32 {
        self.q_bits
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn intermediate(&self) -> &SynIntermediate {
        &self.inner
    }

    /// C'.
    #[inline]
    pub fn small_clock(&self, mem: &SynClockMemory) -> u64 {
        self.inner.fine_clock_low(&mem.inner, self.t_small.trailing_zeros())
    }

    /// Q reduced modulo T.
    pub fn counter(&self, mem: &SynClockMemory) -> u64 {
        mem.q % self.modulus
    }
}

impl Protocol for SynClock {
    type Memory = SynClockMemory;

    fn name(&self) -> String {
        format!("syn-clock4(T={})", self.modulus)
    }

    fn eta(&self) -> usize {
        2
    }

    fn ell(&self) -> u32 {
        4
    }

    fn bitwise_independent(&self) -> bool {
        true
    }

    fn init_domain(&self) -> u64 {
        self.modulus
    }

    /// `Value(v)` yields output clock `v`.
    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<SynClockMemory> {
        match value {
            InitValue::Value(v) => {
                if v >= self.modulus {
                    return Err(invalid("init", "value < T", format!("got {v}")));
                }
                let inner = self.inner.init_memory(InitValue::Value(v % self.t_small), role, rng)?;
                Ok(SynClockMemory { inner, q: (v / self.t_small) % self.modulus })
            }
            InitValue::Random => {
                let inner = self.inner.init_memory(InitValue::Random, role, rng)?;
                Ok(SynClockMemory { inner, q: rng.gen::<u64>() & mask(self.q_bits) })
            }
        }
    }

    fn visible(&self, memory: &SynClockMemory) -> BitString {
        let j = display_index(self.small_clock(memory), self.window, self.q_bits);
        let bit = (memory.q >> j) & 1;
        BitString::truncating(4, self.inner.visible(&memory.inner).value() | (bit << 3))
    }

    fn update(&self, memory: &SynClockMemory, _role: Role, observed: &[BitString], _rng: &mut AgentRng) -> SynClockMemory {
        let (o1, o2) = (observed[0].value(), observed[1].value());
        let j = display_index(self.small_clock(memory), self.window, self.q_bits);
        let own = (memory.q >> j) & 1 == 1;
        let bit = maj3(own, o1 & 8 != 0, o2 & 8 != 0);
        let mut q = (memory.q & !(1 << j)) | (u64::from(bit) << j);
        let inner = self.inner.step(&memory.inner, o1 & 7, o2 & 7);
        let next = SynClockMemory { inner, q };
        if self.small_clock(&next) == 0 {
            q = (q % self.modulus + 1) % self.modulus;
        }
        SynClockMemory { inner, q }
    }

    fn output_clock(&self, memory: &SynClockMemory) -> Option<u64> {
        Some(compose_clock(self.small_clock(memory), self.counter(memory), self.t_small, self.modulus))
    }

    fn clock_modulus(&self) -> Option<u64> {
        Some(self.modulus)
    }
}

/// The three-bit clock protocol: [`SynClock`] behind the message reducer.
pub type SynClock3 = Emulated<SynClock>;

pub fn syn_clock_protocol(t: u64, n: usize, gamma: f64) -> Result<SynClock3> {
    Emulated::new(SynClock::new(t, n, gamma)?)
}
