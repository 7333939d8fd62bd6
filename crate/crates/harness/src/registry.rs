//! Protocols reachable by name from a config.

use tinypull_core::clocks::{syn_clock_protocol, SynClock, SynIntermediate, SynSimple};
use tinypull_core::compose::OracleClock;
use tinypull_core::consensus::MajConsensus;
use tinypull_core::dissemination::{
    baseline_period, phase_schedule, syn_phase_spread_protocol, CertaintyProtocol, PhaseSpread, SubphaseProtocol,
};
use tinypull_core::{Emulated, Protocol, Result};

use crate::config::{ExperimentConfig, LegalKind, DEFAULT_BASELINE_GAMMA, DEFAULT_GAMMA, DEFAULT_GAMMA_PHASE};
use crate::error::Violation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    MajConsensus,
    SynSimple,
    EmulSynSimple,
    SynIntermediate,
    SynClock4,
    SynClock,
    Certainty,
    Subphase,
    PhaseSpread,
    SynPhaseSpread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    T,
    Gamma,
    GammaPhase,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 10] = [
        Self::MajConsensus,
        Self::SynSimple,
        Self::EmulSynSimple,
        Self::SynIntermediate,
        Self::SynClock4,
        Self::SynClock,
        Self::Certainty,
        Self::Subphase,
        Self::PhaseSpread,
        Self::SynPhaseSpread,
    ];

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::MajConsensus => "maj-consensus",
            Self::SynSimple => "syn-simple",
            Self::EmulSynSimple => "emul-syn-simple",
            Self::SynIntermediate => "syn-intermediate",
            Self::SynClock4 => "syn-clock4",
            Self::SynClock => "syn-clock",
            Self::Certainty => "certainty",
            Self::Subphase => "subphase",
            Self::PhaseSpread => "phase-spread",
            Self::SynPhaseSpread => "syn-phase-spread",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::MajConsensus => "3-majority binary consensus, 1 bit",
            Self::SynSimple => "per-bit majority clock, T a power of two, log2(T) bits",
            Self::EmulSynSimple => "syn-simple behind the message reducer",
            Self::SynIntermediate => "hierarchical clock, T a power of two, 3 bits",
            Self::SynClock4 => "clock for any T >= 2, 4 bits",
            Self::SynClock => "clock for any T >= 2, 3 bits",
            Self::Certainty => "(output, certainty) dissemination on a shared clock, 2 bits",
            Self::Subphase => "subphase-sensitive dissemination on a shared clock, 1 bit",
            Self::PhaseSpread => "majority-bit dissemination on a shared clock, 1 bit",
            Self::SynPhaseSpread => "self-stabilizing majority-bit dissemination, 3 bits",
        }
    }

    fn params(self) -> (&'static [Param], &'static [Param]) {
        use Param::*;
        // (required, optional)
        match self {
            Self::MajConsensus => (&[], &[]),
            Self::SynSimple | Self::EmulSynSimple | Self::SynIntermediate => (&[T], &[]),
            Self::SynClock4 | Self::SynClock => (&[T], &[Gamma]),
            Self::Certainty | Self::Subphase => (&[], &[T, Gamma]),
            Self::PhaseSpread => (&[], &[GammaPhase]),
            Self::SynPhaseSpread => (&[], &[Gamma, GammaPhase]),
        }
    }

    /// Config keys this protocol reads, required ones first.
    pub fn param_names(self) -> Vec<String> {
        let (req, opt) = self.params();
        req.iter()
            .map(|p| param_key(*p).to_string())
            .chain(opt.iter().map(|p| format!("[{}]", param_key(*p))))
            .collect()
    }

    pub fn has_clock(self) -> bool {
        self != Self::MajConsensus
    }

    pub fn has_output_bit(self) -> bool {
        matches!(
            self,
            Self::MajConsensus | Self::Certainty | Self::Subphase | Self::PhaseSpread | Self::SynPhaseSpread
        )
    }

    pub fn default_legal(self) -> LegalKind {
        match self {
            Self::MajConsensus => LegalKind::Agreement,
            Self::Certainty | Self::Subphase | Self::PhaseSpread | Self::SynPhaseSpread => LegalKind::OutputsEqual,
            _ => LegalKind::ClocksEqual,
        }
    }

    pub(crate) fn check_params(self, cfg: &ExperimentConfig, v: &mut Vec<Violation>) {
        let (req, opt) = self.params();
        for p in [Param::T, Param::Gamma, Param::GammaPhase] {
            let given = match p {
                Param::T => cfg.t.is_some(),
                Param::Gamma => cfg.gamma.is_some(),
                Param::GammaPhase => cfg.gamma_phase.is_some(),
            };
            if req.contains(&p) && !given {
                v.push(Violation::new(param_key(p), format!("required by {}", self.name()), "missing"));
            }
            if given && !req.contains(&p) && !opt.contains(&p) {
                v.push(Violation::new(param_key(p), format!("not used by {}", self.name()), "a value"));
            }
        }
        if let Some(t) = cfg.t {
            let pow2 = matches!(self, Self::SynSimple | Self::EmulSynSimple | Self::SynIntermediate);
            if pow2 && !(t >= 2 && t.is_power_of_two()) {
                v.push(Violation::new("T", "T power of two, T >= 2", t));
            }
            if matches!(self, Self::Subphase) && t % 2 != 0 {
                v.push(Violation::new("T", "T even", t));
            }
            if t < 2 {
                v.push(Violation::new("T", "T >= 2", t));
            }
        }
    }

    /// Builds the protocol once and discards it.
    pub(crate) fn build_check(self, cfg: &ExperimentConfig) -> Result<()> {
        struct Discard;
        impl ProtocolVisitor for Discard {
            type Output = ();
            fn visit<P: Protocol + Clone + 'static>(self, _: P) {}
        }
        dispatch(self, cfg, Discard)
    }
}

fn param_key(p: Param) -> &'static str {
    match p {
        Param::T => "T",
        Param::Gamma => "gamma",
        Param::GammaPhase => "gamma_phase",
    }
}

/// Receives the concrete protocol a config names.
pub trait ProtocolVisitor {
    type Output;
    fn visit<P: Protocol + Clone + 'static>(self, protocol: P) -> Self::Output;
}

/// Builds the protocol for `kind` from `cfg` and hands it to `visitor`.
pub fn dispatch<V: ProtocolVisitor>(kind: ProtocolKind, cfg: &ExperimentConfig, visitor: V) -> Result<V::Output> {
    let n = cfg.n;
    let t = cfg.t.unwrap_or(0);
    let gamma = cfg.gamma.unwrap_or(DEFAULT_GAMMA);
    let gamma_phase = cfg.gamma_phase.unwrap_or(DEFAULT_GAMMA_PHASE);
    let baseline_t = || match cfg.t {
        Some(t) => Ok(t),
        None => baseline_period(n, cfg.gamma.unwrap_or(DEFAULT_BASELINE_GAMMA)),
    };
    Ok(match kind {
        ProtocolKind::MajConsensus => visitor.visit(MajConsensus),
        ProtocolKind::SynSimple => visitor.visit(SynSimple::new(t)?),
        ProtocolKind::EmulSynSimple => visitor.visit(Emulated::new(SynSimple::new(t)?)?),
        ProtocolKind::SynIntermediate => visitor.visit(SynIntermediate::new(t)?),
        ProtocolKind::SynClock4 => visitor.visit(SynClock::new(t, n, gamma)?),
        ProtocolKind::SynClock => visitor.visit(syn_clock_protocol(t, n, gamma)?),
        ProtocolKind::Certainty => visitor.visit(OracleClock::new(CertaintyProtocol::new(baseline_t()?)?, 0)?),
        ProtocolKind::Subphase => visitor.visit(OracleClock::new(SubphaseProtocol::new(baseline_t()?)?, 0)?),
        ProtocolKind::PhaseSpread => {
            visitor.visit(OracleClock::new(PhaseSpread::new(phase_schedule(n, gamma_phase)?), 0)?)
        }
        ProtocolKind::SynPhaseSpread => visitor.visit(syn_phase_spread_protocol(n, gamma, gamma_phase)?),
    })
}
