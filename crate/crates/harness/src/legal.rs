//! Legal-configuration predicates over the honest agents.
//!
//! Anything else can be passed to [`crate::run_trial_with`] as a closure.

use tinypull_core::{Population, Protocol};

use crate::config::LegalKind;

/// Every honest agent shows the same decoded output clock.
pub fn clocks_equal<P: Protocol>(protocol: &P, pop: &Population<P::Memory>) -> bool {
    let mut clocks = pop.honest().map(|a| protocol.output_clock(&a.memory));
    match clocks.next() {
        Some(Some(first)) => clocks.all(|c| c == Some(first)),
        Some(None) => false,
        None => true,
    }
}

/// Every honest agent outputs `b_maj`, frozen when the population was built.
pub fn outputs_equal<P: Protocol>(protocol: &P, pop: &Population<P::Memory>) -> bool {
    match pop.b_maj() {
        Some(b) => pop.honest().all(|a| protocol.output_bit(&a.memory) == Some(b)),
        None => false,
    }
}

/// Every honest agent outputs the same bit.
pub fn agreement<P: Protocol>(protocol: &P, pop: &Population<P::Memory>) -> bool {
    let mut bits = pop.honest().map(|a| protocol.output_bit(&a.memory));
    match bits.next() {
        Some(Some(first)) => bits.all(|b| b == Some(first)),
        Some(None) => false,
        None => true,
    }
}

impl LegalKind {
    pub fn evaluate<P: Protocol>(self, protocol: &P, pop: &Population<P::Memory>) -> bool {
        match self {
            LegalKind::ClocksEqual => clocks_equal(protocol, pop),
            LegalKind::OutputsEqual => outputs_equal(protocol, pop),
            LegalKind::Agreement => agreement(protocol, pop),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tinypull_core::clocks::SynSimple;
    use tinypull_core::consensus::MajConsensus;
    use tinypull_core::{adversarial_init, InitStrategy, Roster};

    #[test]
    fn clocks_equal_tracks_the_init() {
        let p = SynSimple::new(16).unwrap();
        let pop = adversarial_init(&p, &Roster::plain(50), &InitStrategy::AllEqual(3), 1).unwrap();
        assert!(clocks_equal(&p, &pop));
        let pop = adversarial_init(&p, &Roster::plain(50), &InitStrategy::HalfSplit, 1).unwrap();
        assert!(!clocks_equal(&p, &pop));
    }

    #[test]
    fn outputs_equal_uses_source_majority() {
        let roster = Roster { n: 20, k1: 3, k0: 1, ..Default::default() };
        let ones = adversarial_init(&MajConsensus, &roster, &InitStrategy::AllEqual(1), 1).unwrap();
        assert!(outputs_equal(&MajConsensus, &ones));
        assert!(agreement(&MajConsensus, &ones));
        let zeros = adversarial_init(&MajConsensus, &roster, &InitStrategy::AllEqual(0), 1).unwrap();
        assert!(!outputs_equal(&MajConsensus, &zeros));
        assert!(agreement(&MajConsensus, &zeros));
        let none = adversarial_init(&MajConsensus, &Roster::plain(20), &InitStrategy::AllEqual(0), 1).unwrap();
        assert!(!outputs_equal(&MajConsensus, &none));
    }
}
