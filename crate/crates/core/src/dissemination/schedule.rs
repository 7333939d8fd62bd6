use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Boosting,
    /// 1-based index.
    Spreading(u32),
    Polling,
}

/// Boosting, ⌈2 log₂ n⌉ spreading phases, then polling, over one period of
/// the shared clock. Boosting and spreading are doubled so that each step
/// gets both parities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSchedule {
    pub boosting_len: u64,
    pub spreading_count: u32,
    pub spreading_len: u64,
    pub polling_len: u64,
}

pub fn phase_schedule(n: usize, gamma_phase: f64) -> Result<PhaseSchedule> {
    if n < 2 {
        return Err(invalid("n", "n >= 2", format!("got {n}")));
    }
    if !(gamma_phase >= 1.0 && gamma_phase.is_finite()) {
        return Err(invalid("gamma_phase", "gamma_phase >= 1", format!("got {gamma_phase}")));
    }
    let log_n = (n as f64).log2();
    let long = (gamma_phase * log_n).ceil() as u64;
    Ok(PhaseSchedule {
        boosting_len: 2 * long,
        spreading_count: (2.0 * log_n).ceil() as u32,
        spreading_len: (2.0 * gamma_phase).ceil() as u64,
        polling_len: long,
    })
}

impl PhaseSchedule {
    pub fn period(&self) -> u64 {
        self.boosting_len + u64::from(self.spreading_count) * self.spreading_len + self.polling_len
    }

    fn polling_start(&self) -> u64 {
        self.period() - self.polling_len
    }

    /// Phase containing `clock`, taken modulo the period.
    pub fn kind(&self, clock: u64) -> PhaseKind {
        let c = clock % self.period();
        if c < self.boosting_len {
            PhaseKind::Boosting
        } else if c < self.polling_start() {
            PhaseKind::Spreading(((c - self.boosting_len) / self.spreading_len) as u32 + 1)
        } else {
            PhaseKind::Polling
        }
    }

    /// Whether `clock` is the last round of its phase.
    pub fn is_phase_end(&self, clock: u64) -> bool {
        let c = clock % self.period();
        self.kind(c) != self.kind(c + 1) || c + 1 == self.period()
    }

    /// First clock reading of the last spreading phase.
    pub fn last_spreading_start(&self) -> u64 {
        self.polling_start() - self.spreading_len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_schedule() {
        let s = phase_schedule(1024, 20.0).unwrap();
        assert_eq!((s.boosting_len, s.spreading_count, s.spreading_len, s.polling_len), (400, 20, 40, 200));
        assert_eq!(s.period(), 1400);
        assert_eq!(phase_schedule(1000, 20.0).unwrap().period(), 1400);
    }

    #[test]
    fn boundaries() {
        let s = phase_schedule(1024, 20.0).unwrap();
        assert_eq!(s.kind(0), PhaseKind::Boosting);
        assert_eq!(s.kind(399), PhaseKind::Boosting);
        assert_eq!(s.kind(400), PhaseKind::Spreading(1));
        assert_eq!(s.kind(1199), PhaseKind::Spreading(20));
        assert_eq!(s.kind(1200), PhaseKind::Polling);
        assert_eq!(s.kind(1399), PhaseKind::Polling);
        assert!(s.is_phase_end(399) && s.is_phase_end(439) && s.is_phase_end(1399));
        assert!(!s.is_phase_end(400));
        assert_eq!(s.last_spreading_start(), 1160);
    }

    #[test]
    fn two_agents() {
        let s = phase_schedule(2, 1.0).unwrap();
        assert_eq!(s.spreading_count, 2);
        assert_eq!(s.period(), 2 + 2 * 2 + 1);
    }
}
