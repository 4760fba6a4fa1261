//! Batch runs over many PINs: exhaustive encode/replay checks and leakage
//! reports for whole PIN populations.

use crate::attack::{self, AttackError, LeakageReport, ObserverChannel};
use crate::codec::{DigitMapping, Pin};
use crate::exec::{self, Execution};
use crate::session::{self, Feedback, SessionConfig};

/// Why a PIN failed the round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTripFailure {
    pub pin: Pin,
    pub decoded: Pin,
    pub accepted_events: usize,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundTripSummary {
    pub checked: u64,
    pub failures: Vec<RoundTripFailure>,
}

impl RoundTripSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Encodes and replays one PIN; `None` when it decodes to itself with one
/// acceptance per digit and a final completion.
pub fn check_round_trip(pin: &Pin, config: &SessionConfig) -> Option<RoundTripFailure> {
    let trace = session::encode_pin(pin.digits(), config.mapping());
    let replayed = session::replay(&trace, config).expect("encoded traces are ordered");
    let accepted_events = replayed.accepted_count();
    let completed = matches!(
        replayed.log.last().map(|r| r.feedback),
        Some(Feedback::Completed)
    ) && replayed.session.is_complete();
    let decoded = replayed.session.pin();
    if decoded == *pin && accepted_events == pin.len() && completed {
        None
    } else {
        Some(RoundTripFailure {
            pin: pin.clone(),
            decoded,
            accepted_events,
            completed,
        })
    }
}

/// Checks every PIN of `config.limit()` digits, split by two-digit prefix.
pub fn round_trip_sweep(config: &SessionConfig, exec: Execution) -> RoundTripSummary {
    let len = config.limit();
    let prefix_len = len.min(2);
    let chunk = 10u64.pow((len - prefix_len) as u32);
    let failures: Vec<Vec<RoundTripFailure>> =
        exec::map_indices(exec, 10u64.pow(prefix_len as u32), |c| {
            (c * chunk..(c + 1) * chunk)
                .filter_map(|i| check_round_trip(&Pin::from_index(i, len), config))
                .collect()
        });
    RoundTripSummary {
        checked: 10u64.pow(len as u32),
        failures: failures.into_iter().flatten().collect(),
    }
}

/// Leakage reports for the clean entry of each PIN, in input order.
pub fn leakage_sweep(
    pins: &[Pin],
    channels: &[ObserverChannel],
    mapping: &DigitMapping,
    seed: u64,
    exec: Execution,
) -> Result<Vec<LeakageReport>, AttackError> {
    exec::map_items(exec, pins, |pin| {
        let trace = session::encode_pin(pin.digits(), mapping);
        attack::leakage_report(&trace, channels, mapping, pin.len(), seed)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{BrailleVector, MappingEntry};

    #[test]
    fn short_sweeps_pass() {
        for len in 1..=3 {
            let s = round_trip_sweep(&SessionConfig::new(len).unwrap(), Execution::default());
            assert_eq!(s.checked, 10u64.pow(len as u32));
            assert!(s.passed(), "{:?}", s.failures.first());
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let pins: Vec<Pin> = ["0000", "1234", "9999", "7070"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let m = DigitMapping::canonical();
        let a = leakage_sweep(&pins, &ObserverChannel::ALL, &m, 3, Execution::Sequential).unwrap();
        let b = leakage_sweep(&pins, &ObserverChannel::ALL, &m, 3, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alternative_mapping_round_trips() {
        // Every digit shifted to the next canonical vector.
        let canon = DigitMapping::canonical();
        let entries: Vec<MappingEntry> = canon
            .entries()
            .map(|e| MappingEntry {
                vector: canon
                    .vector(crate::codec::Digit::new((u32::from(e.digit) + 1) % 10).unwrap()),
                digit: e.digit,
            })
            .collect();
        let shifted = DigitMapping::from_entries(entries).unwrap();
        assert_ne!(
            shifted.vector(crate::codec::Digit::new(0).unwrap()),
            BrailleVector::from_bits(0b011100).unwrap()
        );
        let cfg = SessionConfig::new(2).unwrap().with_mapping(shifted);
        assert!(round_trip_sweep(&cfg, Execution::Sequential).passed());
    }
}
