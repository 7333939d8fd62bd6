//! Synchronous round execution under PULL or BIT sampling.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::protocol::{InitValue, Protocol, Role};
use crate::rng::{agent_rng, AgentRng, STREAM_BYZANTINE, STREAM_INIT, STREAM_UPDATE};

/// Pull counts served from stack buffers.
const FAST_ETA: usize = 4;

/// Round index used to key initialization streams.
const INIT_ROUND: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Each pulled message is the full visible part of one sampled agent.
    #[default]
    Pull,
    /// Bit `i` of message `j` comes from its own independently sampled agent.
    Bit,
}

/// Order in which agents are processed inside a round. Results never depend
/// on it; the knob exists so that this can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionOrder {
    #[default]
    Sequential,
    /// Agents visited in a seeded random order.
    Permuted(u64),
    /// Agents split across this many scoped threads.
    Parallel(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByzantineStrategy {
    /// Every visible bit shows the given value.
    FixedBit(bool),
    /// Uniform random bits, redrawn every round.
    Random,
    /// Per bit position, the complement of the honest majority.
    WorstOpinion,
}

/// Chooses whom an agent pulls from.
///
/// `out` has length η in PULL mode and η·ℓ in BIT mode; in BIT mode index
/// `j·ℓ + i` is the source of bit `i` of message `j`. The same `rng` is then
/// handed to the protocol update.
pub trait Sampler: Send + Sync {
    fn targets(&self, round: u64, agent: usize, n: usize, rng: &mut AgentRng, out: &mut [usize]);
}

/// Independent uniform draws with replacement, self included.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformSampler;

impl Sampler for UniformSampler {
    #[inline]
    fn targets(&self, _round: u64, _agent: usize, n: usize, rng: &mut AgentRng, out: &mut [usize]) {
        for slot in out.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState<M> {
    pub visible: BitString,
    pub memory: M,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population<M> {
    agents: Vec<AgentState<M>>,
    byzantine: Vec<bool>,
    round: u64,
    b_maj: Option<bool>,
}

impl<M> Population<M> {
    /// Wraps agent states. `byzantine` must have one flag per agent.
    pub fn new(agents: Vec<AgentState<M>>, byzantine: Vec<bool>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidPopulation("n must be at least 1".into()));
        }
        if byzantine.len() != agents.len() {
            return Err(Error::InvalidPopulation(format!(
                "{} byzantine flags for {} agents",
                byzantine.len(),
                agents.len()
            )));
        }
        let b_maj = majority_input(agents.iter().map(|a| a.role));
        Ok(Self { agents, byzantine, round: 0, b_maj })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentState<M>] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [AgentState<M>] {
        &mut self.agents
    }

    pub fn is_byzantine(&self, agent: usize) -> bool {
        self.byzantine[agent]
    }

    pub fn byzantine_count(&self) -> usize {
        self.byzantine.iter().filter(|&&b| b).count()
    }

    /// Agents that are not Byzantine.
    pub fn honest(&self) -> impl Iterator<Item = &AgentState<M>> {
        self.agents.iter().zip(&self.byzantine).filter(|(_, &b)| !b).map(|(a, _)| a)
    }

    /// Rounds executed so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Majority input bit among sources, frozen at construction. `None` when
    /// there are no sources or the two camps tie.
    pub fn b_maj(&self) -> Option<bool> {
        self.b_maj
    }

    /// Sources holding input 1 and input 0.
    pub fn source_counts(&self) -> (usize, usize) {
        source_counts(self.agents.iter().map(|a| a.role))
    }
}

fn source_counts(roles: impl Iterator<Item = Role>) -> (usize, usize) {
    roles.filter(|r| r.is_source).fold((0, 0), |(k1, k0), r| {
        if r.input_bit {
            (k1 + 1, k0)
        } else {
            (k1, k0 + 1)
        }
    })
}

fn majority_input(roles: impl Iterator<Item = Role>) -> Option<bool> {
    let (k1, k0) = source_counts(roles);
    match k1.cmp(&k0) {
        std::cmp::Ordering::Greater => Some(true),
        std::cmp::Ordering::Less => Some(false),
        std::cmp::Ordering::Equal => None,
    }
}

/// Default cap on Byzantine agents, ⌊n^0.4⌋.
pub fn default_byzantine_cap(n: usize) -> usize {
    let mut cap = (n as f64).powf(0.4).floor() as usize;
    // Guard against floating error at exact powers.
    while ((cap + 1) as f64).powf(2.5) <= n as f64 {
        cap += 1;
    }
    while cap > 0 && (cap as f64).powf(2.5) > n as f64 {
        cap -= 1;
    }
    cap
}

/// Adversarial initial configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitStrategy {
    /// Every agent's memory drawn uniformly.
    UniformRandom,
    AllEqual(u64),
    /// First ⌊n/2⌋ agents get value 0, the rest get `domain/2`.
    HalfSplit,
    /// Agent `i` gets value `⌊i·domain/n⌋`.
    MaxSpreadClocks,
    /// One value per agent.
    Custom(Vec<u64>),
}

/// Who is a source and who is Byzantine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Roster {
    pub n: usize,
    /// Sources with input 1.
    pub k1: usize,
    /// Sources with input 0.
    pub k0: usize,
    pub byzantine: usize,
    /// Defaults to [`default_byzantine_cap`].
    pub byzantine_cap: Option<usize>,
}

impl Roster {
    pub fn plain(n: usize) -> Self {
        Roster { n, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidPopulation("n must be at least 1".into()));
        }
        let cap = self.byzantine_cap.unwrap_or_else(|| default_byzantine_cap(self.n));
        if self.byzantine > cap {
            return Err(Error::InvalidPopulation(format!(
                "{} byzantine agents exceed the cap {cap}",
                self.byzantine
            )));
        }
        if self.k1 + self.k0 + self.byzantine > self.n {
            return Err(Error::InvalidPopulation(format!(
                "{} sources and {} byzantine agents do not fit in n={}",
                self.k1 + self.k0,
                self.byzantine,
                self.n
            )));
        }
        Ok(())
    }
}

/// Builds a population whose memories are set by `strategy`.
///
/// Source and Byzantine positions are a seeded shuffle; Byzantine agents are
/// never sources.
pub fn adversarial_init<P: Protocol>(
    protocol: &P,
    roster: &Roster,
    strategy: &InitStrategy,
    seed: u64,
) -> Result<Population<P::Memory>> {
    roster.validate()?;
    let n = roster.n;
    let domain = protocol.init_domain();
    let values: Vec<InitValue> = match strategy {
        InitStrategy::UniformRandom => vec![InitValue::Random; n],
        InitStrategy::AllEqual(v) => {
            if *v >= domain {
                return Err(Error::InitOutOfDomain { agent: 0, value: *v, domain });
            }
            vec![InitValue::Value(*v); n]
        }
        InitStrategy::HalfSplit => (0..n)
            .map(|i| InitValue::Value(if i < n / 2 { 0 } else { domain / 2 }))
            .collect(),
        InitStrategy::MaxSpreadClocks => (0..n)
            .map(|i| InitValue::Value(((i as u128 * domain as u128) / n as u128) as u64))
            .collect(),
        InitStrategy::Custom(vals) => {
            if vals.len() != n {
                return Err(Error::InvalidPopulation(format!(
                    "custom init has {} values for n={n}",
                    vals.len()
                )));
            }
            if let Some((agent, &value)) = vals.iter().enumerate().find(|(_, &v)| v >= domain) {
                return Err(Error::InitOutOfDomain { agent, value, domain });
            }
            vals.iter().map(|&v| InitValue::Value(v)).collect()
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut agent_rng(seed, INIT_ROUND, n, STREAM_INIT));
    let mut roles = vec![Role::PLAIN; n];
    let mut byzantine = vec![false; n];
    for (rank, &agent) in order.iter().enumerate() {
        if rank < roster.k1 {
            roles[agent] = Role::source(true);
        } else if rank < roster.k1 + roster.k0 {
            roles[agent] = Role::source(false);
        } else if rank < roster.k1 + roster.k0 + roster.byzantine {
            byzantine[agent] = true;
        }
    }

    let agents = values
        .into_iter()
        .zip(roles)
        .enumerate()
        .map(|(u, (value, role))| {
            let mut rng = agent_rng(seed, INIT_ROUND, u, STREAM_INIT);
            let memory = protocol.init_memory(value, role, &mut rng)?;
            let visible = protocol.visible(&memory);
            Ok(AgentState { visible, memory, role })
        })
        .collect::<Result<Vec<_>>>()?;
    Population::new(agents, byzantine)
}

/// Runs rounds of one protocol.
pub struct Engine<P> {
    protocol: P,
    seed: u64,
    mode: SamplingMode,
    order: ExecutionOrder,
    byzantine: ByzantineStrategy,
    sampler: Box<dyn Sampler>,
}

impl<P: fmt::Debug> fmt::Debug for Engine<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("protocol", &self.protocol)
            .field("seed", &self.seed)
            .field("mode", &self.mode)
            .field("order", &self.order)
            .field("byzantine", &self.byzantine)
            .finish_non_exhaustive()
    }
}

impl<P: Protocol> Engine<P> {
    pub fn new(protocol: P, seed: u64) -> Self {
        Self {
            protocol,
            seed,
            mode: SamplingMode::Pull,
            order: ExecutionOrder::Sequential,
            byzantine: ByzantineStrategy::FixedBit(false),
            sampler: Box::new(UniformSampler),
        }
    }

    /// Fails for BIT mode on a protocol that is not bitwise independent.
    pub fn with_mode(mut self, mode: SamplingMode) -> Result<Self> {
        if mode == SamplingMode::Bit && !self.protocol.bitwise_independent() {
            return Err(Error::NotBitwiseIndependent(self.protocol.name()));
        }
        self.mode = mode;
        Ok(self)
    }

    pub fn with_order(mut self, order: ExecutionOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_byzantine(mut self, strategy: ByzantineStrategy) -> Self {
        self.byzantine = strategy;
        self
    }

    pub fn with_sampler(mut self, sampler: impl Sampler + 'static) -> Self {
        self.sampler = Box::new(sampler);
        self
    }

    pub fn protocol(&self) -> &P {
        &self.protocol
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    /// Runs `rounds` rounds.
    pub fn run(&self, pop: &mut Population<P::Memory>, rounds: u64) {
        for _ in 0..rounds {
            self.step(pop);
        }
    }

    /// One synchronous round. Every agent reads the displays of the previous
    /// round; none observes a same-round write.
    pub fn step(&self, pop: &mut Population<P::Memory>) {
        let n = pop.n();
        let round = pop.round;
        let mut display: Vec<BitString> = pop.agents.iter().map(|a| a.visible).collect();
        if pop.byzantine.iter().any(|&b| b) {
            self.byzantine_overlay(round, &pop.byzantine, &mut display);
        }
        let next: Vec<AgentState<P::Memory>> = match self.order {
            ExecutionOrder::Sequential => {
                (0..n).map(|u| self.next_state(pop, &display, round, u)).collect()
            }
            ExecutionOrder::Permuted(key) => {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut agent_rng(key, round, n, STREAM_INIT));
                let mut slots: Vec<Option<AgentState<P::Memory>>> = vec![None; n];
                for u in order {
                    slots[u] = Some(self.next_state(pop, &display, round, u));
                }
                slots.into_iter().map(|s| s.expect("every agent visited")).collect()
            }
            ExecutionOrder::Parallel(threads) => {
                let threads = threads.clamp(1, n);
                let chunk = n.div_ceil(threads);
                let snapshot = &*pop;
                let display = &display;
                std::thread::scope(|scope| {
                    let handles: Vec<_> = (0..n)
                        .step_by(chunk)
                        .map(|start| {
                            scope.spawn(move || {
                                (start..(start + chunk).min(n))
                                    .map(|u| self.next_state(snapshot, display, round, u))
                                    .collect::<Vec<_>>()
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .flat_map(|h| h.join().expect("worker panicked"))
                        .collect()
                })
            }
        };
        pop.agents = next;
        pop.round += 1;
    }

    fn next_state(
        &self,
        pop: &Population<P::Memory>,
        display: &[BitString],
        round: u64,
        u: usize,
    ) -> AgentState<P::Memory> {
        let agent = &pop.agents[u];
        if pop.byzantine[u] {
            return AgentState { visible: display[u], memory: agent.memory.clone(), role: agent.role };
        }
        let n = pop.n();
        let eta = self.protocol.eta();
        let ell = self.protocol.ell();
        let mut rng = agent_rng(self.seed, round, u, STREAM_UPDATE);
        let mut targets = [0usize; FAST_ETA];
        let mut observed = [BitString::truncating(1, 0); FAST_ETA];
        let mut spill: Vec<BitString> = Vec::new();
        let observed: &[BitString] = match self.mode {
            SamplingMode::Pull if eta <= FAST_ETA => {
                self.sampler.targets(round, u, n, &mut rng, &mut targets[..eta]);
                for (slot, &t) in observed.iter_mut().zip(&targets[..eta]) {
                    *slot = display[t];
                }
                &observed[..eta]
            }
            SamplingMode::Pull => {
                let mut targets = vec![0; eta];
                self.sampler.targets(round, u, n, &mut rng, &mut targets);
                spill.extend(targets.iter().map(|&t| display[t]));
                &spill
            }
            SamplingMode::Bit => {
                let width = ell as usize;
                let mut targets = vec![0; eta * width];
                self.sampler.targets(round, u, n, &mut rng, &mut targets);
                spill.extend(targets.chunks(width).map(|chunk| {
                    let bits = chunk
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (i, &t)| acc | (display[t].value() & (1 << i)));
                    BitString::truncating(ell, bits)
                }));
                &spill
            }
        };
        let memory = self.protocol.update(&agent.memory, agent.role, observed, &mut rng);
        let visible = self.protocol.visible(&memory);
        assert_eq!(
            visible.width(),
            ell,
            "{} wrote a {}-bit visible part, budget is {ell}",
            self.protocol.name(),
            visible.width()
        );
        AgentState { visible, memory, role: agent.role }
    }

    fn byzantine_overlay(&self, round: u64, byzantine: &[bool], display: &mut [BitString]) {
        let ell = self.protocol.ell();
        let worst = if self.byzantine == ByzantineStrategy::WorstOpinion {
            let mut ones = vec![0usize; ell as usize];
            let mut honest = 0usize;
            for (d, _) in display.iter().zip(byzantine).filter(|(_, &b)| !b) {
                honest += 1;
                for (i, count) in ones.iter_mut().enumerate() {
                    *count += d.bit(i as u32) as usize;
                }
            }
            let majority = ones
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &c)| acc | (u64::from(2 * c > honest) << i));
            Some(BitString::truncating(ell, !majority))
        } else {
            None
        };
        for (u, slot) in display.iter_mut().enumerate().filter(|(u, _)| byzantine[*u]) {
            *slot = match self.byzantine {
                ByzantineStrategy::FixedBit(b) => {
                    BitString::truncating(ell, if b { u64::MAX } else { 0 })
                }
                ByzantineStrategy::Random => {
                    let mut rng = agent_rng(self.seed, round, u, STREAM_BYZANTINE);
                    BitString::truncating(ell, rng.gen())
                }
                ByzantineStrategy::WorstOpinion => worst.expect("computed above"),
            };
        }
    }
}

/// Options for [`run_until`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Latest round at which legality may first hold.
    pub max_rounds: u64,
    /// Further rounds legality must persist.
    pub hold_window: u64,
    pub record_trace: bool,
}

/// Default hold window, 10·⌈log₂ n⌉.
pub fn default_hold_window(n: usize) -> u64 {
    10 * u64::from(ceil_log2(n as u64))
}

/// ⌈log₂ x⌉, with `ceil_log2(1) = 0`.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x > 0, "log of zero");
    64 - (x - 1).leading_zeros()
}

/// Summary of one round, for traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundMetrics {
    pub round: u64,
    /// Share of honest agents whose output matches `b_maj` when it is
    /// defined, otherwise the share holding the most common output.
    pub agreement_fraction: f64,
    pub legal: bool,
    pub speakers: Option<usize>,
    /// Shannon entropy in bits of the honest output clocks.
    pub clock_entropy: Option<f64>,
}

pub fn round_metrics<P: Protocol>(protocol: &P, pop: &Population<P::Memory>, legal: bool) -> RoundMetrics {
    let honest: Vec<&AgentState<P::Memory>> = pop.honest().collect();
    let total = honest.len().max(1) as f64;
    let bits: Vec<bool> = honest.iter().filter_map(|a| protocol.output_bit(&a.memory)).collect();
    let mut clocks: Vec<u64> = honest.iter().filter_map(|a| protocol.output_clock(&a.memory)).collect();
    clocks.sort_unstable();
    let runs = run_lengths(&clocks);
    let agreement_fraction = if !bits.is_empty() {
        let ones = bits.iter().filter(|&&b| b).count();
        let matching = match pop.b_maj {
            Some(true) => ones,
            Some(false) => bits.len() - ones,
            None => ones.max(bits.len() - ones),
        };
        matching as f64 / total
    } else {
        runs.iter().copied().max().unwrap_or(0) as f64 / total
    };
    let clock_entropy = (!clocks.is_empty()).then(|| {
        let m = clocks.len() as f64;
        runs.iter()
            .map(|&c| {
                let p = c as f64 / m;
                -p * p.log2()
            })
            .sum::<f64>()
            + 0.0 // turns -0.0 into 0.0
    });
    let speakers = {
        let flags: Vec<bool> = honest.iter().filter_map(|a| protocol.speaking(&a.memory)).collect();
        (!flags.is_empty()).then(|| flags.iter().filter(|&&s| s).count())
    };
    RoundMetrics { round: pop.round, agreement_fraction, legal, speakers, clock_entropy }
}

fn run_lengths(sorted: &[u64]) -> Vec<usize> {
    sorted.chunk_by(|a, b| a == b).map(<[u64]>::len).collect()
}

/// Outcome of [`run_until`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub converged: bool,
    /// First round (relative to the start) of the legal streak that held.
    pub t_converge: Option<u64>,
    /// Length of the verified streak beyond its first round.
    pub held_for: u64,
    pub rounds_run: u64,
    pub trace: Vec<RoundMetrics>,
}

/// Steps until some round `t ≤ max_rounds` is legal and stays legal for
/// `hold_window` further rounds. Round 0 is the starting configuration.
pub fn run_until<P, F>(
    engine: &Engine<P>,
    pop: &mut Population<P::Memory>,
    mut legal: F,
    opts: RunOptions,
) -> ConvergenceResult
where
    P: Protocol,
    F: FnMut(&P, &Population<P::Memory>) -> bool,
{
    let protocol = engine.protocol();
    let mut trace = Vec::new();
    let mut streak: Option<u64> = None;
    let mut t = 0u64;
    loop {
        let ok = legal(protocol, pop);
        if opts.record_trace {
            let mut m = round_metrics(protocol, pop, ok);
            m.round = t;
            trace.push(m);
        }
        if ok {
            let start = *streak.get_or_insert(t);
            if t - start >= opts.hold_window {
                return ConvergenceResult {
                    converged: true,
                    t_converge: Some(start),
                    held_for: t - start,
                    rounds_run: t,
                    trace,
                };
            }
        } else {
            streak = None;
        }
        if streak.is_none() && t >= opts.max_rounds {
            return ConvergenceResult {
                converged: false,
                t_converge: None,
                held_for: 0,
                rounds_run: t,
                trace,
            };
        }
        engine.step(pop);
        t += 1;
    }
}
