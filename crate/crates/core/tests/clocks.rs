use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use tinypull_core::clocks::nested::{boundary_memory, nested2, nested3, nested4};
use tinypull_core::clocks::{
    ell_sequence, syn_clock_protocol, syn_simple_update, t_prime, EllSequence, SynClock, SynIntermediate, SynSimple,
};
use tinypull_core::dissemination::syn_phase_spread_protocol;
use tinypull_core::rng::AgentRng;
use tinypull_core::{
    adversarial_init, AgentState, BitString, Engine, InitStrategy, Population, Protocol, Role, Roster,
};

/// Steps a population started from one shared value and checks after every
/// round that honest clock-carrying state is identical and the output clock
/// moved by one.
fn assert_closure<P, F>(p: &P, roster: Roster, value: u64, rounds: u64, same: F)
where
    P: Protocol + Clone,
    F: Fn(&P::Memory, &P::Memory) -> bool,
{
    let modulus = p.clock_modulus().unwrap();
    let mut pop = adversarial_init(p, &roster, &InitStrategy::AllEqual(value), 1).unwrap();
    let engine = Engine::new(p.clone(), 1);
    let mut expected = p.output_clock(&pop.agents()[0].memory).unwrap();
    for r in 0..rounds {
        engine.step(&mut pop);
        expected = (expected + 1) % modulus;
        let first = &pop.agents()[0].memory;
        for a in pop.agents() {
            assert!(same(first, &a.memory), "{} diverged at round {r}", p.name());
            assert_eq!(p.output_clock(&a.memory), Some(expected), "{} at round {r}", p.name());
        }
    }
}

#[test]
fn syn_simple_closure() {
    let p = SynSimple::new(16).unwrap();
    assert_closure(&p, Roster::plain(100), 11, 3 * 16, |a, b| a == b);
}

#[test]
fn syn_intermediate_closure() {
    for t in [16, 256] {
        let p = SynIntermediate::new(t).unwrap();
        let rounds = 3 * t * p.super_phase();
        assert_closure(&p, Roster::plain(100), 5, rounds, |a, b| a == b);
    }
}

#[test]
fn syn_clock_closure() {
    let p4 = SynClock::new(10, 100, 8.0).unwrap();
    let tp = t_prime(10, 100, 8.0).unwrap();
    assert_closure(&p4, Roster::plain(100), 7, 3 * 10 * tp, |a, b| a == b);
    let p3 = syn_clock_protocol(10, 100, 8.0).unwrap();
    assert_closure(&p3, Roster::plain(100), 7, 3 * 10 * p3.slowdown(), |a, b| a == b);
}

#[test]
fn emulated_phase_spread_closure() {
    let p = syn_phase_spread_protocol(100, 8.0, 20.0).unwrap();
    let period = p.clock_modulus().unwrap();
    let roster = Roster { n: 100, k1: 7, k0: 3, ..Default::default() };
    // Clock parts match; sources differ from the rest only in their role.
    assert_closure(&p, roster, 1, 3 * period * p.slowdown(), |a, b| a.clock == b.clock && a.inner.clock == b.inner.clock);
}

#[test]
fn syn_intermediate_top_level_advances_once_per_super_phase() {
    let p = SynIntermediate::new(16).unwrap();
    let mut pop = adversarial_init(&p, &Roster::plain(50), &InitStrategy::AllEqual(0), 2).unwrap();
    let engine = Engine::new(p.clone(), 2);
    for r in 1..=3 * 16 * p.super_phase() {
        engine.step(&mut pop);
        let c1 = pop.agents()[0].memory.clocks()[0];
        assert_eq!(c1, (r / p.super_phase()) % 16);
        assert_eq!(pop.agents()[0].memory.clocks()[1], r % 4);
    }
}

#[test]
fn syn_clock_counter_steps_when_the_small_clock_wraps() {
    let p = SynClock::new(10, 100, 8.0).unwrap();
    let mut pop = adversarial_init(&p, &Roster::plain(30), &InitStrategy::AllEqual(0), 3).unwrap();
    let engine = Engine::new(p.clone(), 3);
    let mut q = p.counter(&pop.agents()[0].memory);
    for _ in 0..3 * p.t_small() {
        engine.step(&mut pop);
        let m = &pop.agents()[0].memory;
        if p.small_clock(m) == 0 {
            q = (q + 1) % 10;
        }
        assert_eq!(p.counter(m), q);
    }
}

#[test]
fn syn_simple_update_examples() {
    let b = |v| BitString::from_value(3, v).unwrap();
    assert_eq!(syn_simple_update(b(3), [b(5), b(1)]).unwrap(), b(2));
    assert_eq!(syn_simple_update(b(7), [b(7), b(7)]).unwrap(), b(0));
    assert!(SynSimple::new(10).is_err());
}

/// Bit 0 of the incrementing run equals bit 0 of the frozen run on even
/// rounds and its complement on odd rounds.
#[test]
fn increment_only_flips_bit_zero_parity() {
    let (n, t) = (256, 16);
    for seed in 0..20 {
        let live = SynSimple::new(t).unwrap();
        let frozen = SynSimple::frozen(t).unwrap();
        let mut a = adversarial_init(&live, &Roster::plain(n), &InitStrategy::UniformRandom, seed).unwrap();
        let mut b = adversarial_init(&frozen, &Roster::plain(n), &InitStrategy::UniformRandom, seed).unwrap();
        assert_eq!(a, b);
        let (ea, eb) = (Engine::new(live, seed), Engine::new(frozen, seed));
        for r in 1..=500u64 {
            ea.step(&mut a);
            eb.step(&mut b);
            for (x, y) in a.agents().iter().zip(b.agents()) {
                assert_eq!(x.memory & 1, (y.memory & 1) ^ (r & 1), "seed {seed} round {r}");
            }
        }
    }
}

#[test]
fn ell_sequence_examples() {
    assert_eq!(ell_sequence(8).unwrap().lengths(), &[3]);
    assert_eq!(ell_sequence(16).unwrap().lengths(), &[4, 3]);
    let big = EllSequence::for_log2(128).unwrap();
    assert_eq!(big.lengths(), &[128, 8, 4, 3]);
    assert_eq!(big.tau(), 4);
}

/// Iterates ⌈log₂ x⌉ + 1 with a float log as an independent check.
fn oracle_sequence(log2_t: u32) -> Vec<u32> {
    let mut seq = vec![log2_t];
    while *seq.last().unwrap() > 3 {
        let x = *seq.last().unwrap() as f64;
        seq.push(x.log2().ceil() as u32 + 1);
    }
    seq
}

#[test]
fn ell_sequences_stay_within_four_levels() {
    for k in 1..=64 {
        let seq = EllSequence::for_log2(k).unwrap();
        assert_eq!(seq.lengths(), oracle_sequence(k).as_slice(), "k={k}");
        assert!(seq.tau() <= 4, "k={k}");
        assert!(seq.lengths().windows(2).all(|w| w[0] > w[1]));
        if k >= 3 {
            assert_eq!(*seq.lengths().last().unwrap(), 3);
        }
    }
}

fn population<P: Protocol>(p: &P, memories: Vec<P::Memory>) -> Population<P::Memory> {
    let n = memories.len();
    let agents = memories
        .into_iter()
        .map(|memory| AgentState { visible: p.visible(&memory), memory, role: Role::PLAIN })
        .collect();
    Population::new(agents, vec![false; n]).unwrap()
}

/// Runs the direct hierarchy and a nested reducer stack side by side and
/// requires identical visible parts every round.
fn assert_same_messages<Q: Protocol + Clone>(
    si: &SynIntermediate,
    nested: &Q,
    to_nested: impl Fn(&[u64]) -> Q::Memory,
    seed: u64,
    rounds: u64,
) {
    let n = 64;
    let mut rng = AgentRng::seed_from_u64(seed);
    let clocks: Vec<Vec<u64>> = (0..n)
        .map(|_| (0..si.tau()).map(|k| rng.gen_range(0..si.level_modulus(k))).collect())
        .collect();
    let mut direct = population(si, clocks.iter().map(|c| si.memory_from_clocks(c).unwrap()).collect());
    let mut stacked = population(nested, clocks.iter().map(|c| to_nested(c)).collect());
    let (ed, es) = (Engine::new(si.clone(), seed), Engine::new(nested.clone(), seed));
    for r in 0..rounds {
        for (a, b) in direct.agents().iter().zip(stacked.agents()) {
            assert_eq!(a.visible, b.visible, "T={} round {r}", si.modulus());
        }
        ed.step(&mut direct);
        es.step(&mut stacked);
    }
}

#[test]
fn nested_stacks_match_the_direct_hierarchy() {
    let si = SynIntermediate::new(16).unwrap();
    let n2 = nested2(16).unwrap();
    let wrap2 = |c: &[u64]| boundary_memory(&n2, c[0], c[1]).unwrap();
    assert_same_messages(&si, &n2, wrap2, 1, 3 * 16 * si.super_phase());

    let si = SynIntermediate::new(256).unwrap();
    let n3 = nested3(256).unwrap();
    let wrap3 = |c: &[u64]| {
        let inner = boundary_memory(n3.inner(), c[0], c[1]).unwrap();
        boundary_memory(&n3, inner, c[2]).unwrap()
    };
    assert_same_messages(&si, &n3, wrap3, 2, 2 * si.super_phase() * 8);

    let si = SynIntermediate::new(1 << 16).unwrap();
    let n4 = nested4(1 << 16).unwrap();
    let wrap4 = |c: &[u64]| {
        let l1 = boundary_memory(n4.inner().inner(), c[0], c[1]).unwrap();
        let l2 = boundary_memory(n4.inner(), l1, c[2]).unwrap();
        boundary_memory(&n4, l2, c[3]).unwrap()
    };
    assert_same_messages(&si, &n4, wrap4, 3, 4 * si.super_phase());
    assert!(nested3(16).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nesting_matches_from_any_clocks(seed: u64) {
        let si = SynIntermediate::new(16).unwrap();
        let n2 = nested2(16).unwrap();
        assert_same_messages(&si, &n2, |c| boundary_memory(&n2, c[0], c[1]).unwrap(), seed, 40);
    }

    #[test]
    fn syn_simple_ignores_pull_order(t_bits in 1u32..=16, own: u64, a: u64, b: u64) {
        let s = |v| BitString::truncating(t_bits, v);
        prop_assert_eq!(
            syn_simple_update(s(own), [s(a), s(b)]).unwrap(),
            syn_simple_update(s(own), [s(b), s(a)]).unwrap()
        );
    }

    #[test]
    fn value_init_reads_back(v in 0u64..10) {
        let p3 = syn_clock_protocol(10, 100, 8.0).unwrap();
        let pop = adversarial_init(&p3, &Roster::plain(4), &InitStrategy::AllEqual(v), 0).unwrap();
        prop_assert_eq!(p3.output_clock(&pop.agents()[0].memory), Some(v));
    }

    #[test]
    fn t_prime_is_monotone(t in 2u64..5000, n in 2usize..100_000, g in 1.0f64..20.0) {
        let base = t_prime(t, n, g).unwrap();
        prop_assert!(t_prime(t + 1, n, g).unwrap() >= base);
        prop_assert!(t_prime(t, n + 1, g).unwrap() >= base);
        prop_assert!(t_prime(t, n, g + 0.5).unwrap() >= base);
    }
}
