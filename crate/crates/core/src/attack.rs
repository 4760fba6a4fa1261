//! What an eavesdropper learns from a PIN entry.
//!
//! Each [`ObserverChannel`] reduces a key trace to what one kind of attacker
//! perceives. [`recover_candidates`] turns an observation back into the set
//! of PINs consistent with it, and [`leakage_report`] summarises every
//! requested channel as a candidate count and a uniform-prior guessing
//! entropy.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{BrailleVector, Digit, DigitMapping, Pin};
use crate::exec::{self, Execution};
use crate::session::{self, Feedback, Key, KeyEvent, SessionConfig, SessionError};

/// Report samples at most this many candidates per channel.
pub const SAMPLE_LIMIT: usize = 10;

/// Longest PIN the brute-force enumerator accepts.
pub const BRUTE_FORCE_MAX_LEN: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttackError {
    #[error("{channel} channel cannot analyse this trace: {reason}")]
    UnsupportedTrace {
        channel: ObserverChannel,
        reason: String,
    },
    #[error("trace is not a completed entry: {accepted} of {limit} digits accepted")]
    IncompleteEntry { accepted: usize, limit: usize },
    #[error("guessing entropy needs at least one candidate, got {0}")]
    EmptyCandidateSet(u64),
    #[error("brute force is limited to PINs of at most {BRUTE_FORCE_MAX_LEN} digits, got {0}")]
    BruteForceTooLong(usize),
    #[error("unknown observer channel {0:?}; expected key-identity, press-count, dot-count or updown-unordered")]
    UnknownChannel(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObserverChannel {
    /// Every key and its order, as a keylogger records them.
    #[serde(rename = "key-identity")]
    KeyIdentity,
    /// Only how many keys were pressed.
    #[serde(rename = "press-count")]
    PressCountOnly,
    /// Number of Up presses in each six-press pattern.
    #[serde(rename = "dot-count")]
    DotCountPerDigit,
    /// Up and Down tallies per pattern, order lost.
    #[serde(rename = "updown-unordered")]
    UpDownUnordered,
}

impl ObserverChannel {
    pub const ALL: [ObserverChannel; 4] = [
        ObserverChannel::KeyIdentity,
        ObserverChannel::PressCountOnly,
        ObserverChannel::DotCountPerDigit,
        ObserverChannel::UpDownUnordered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObserverChannel::KeyIdentity => "key-identity",
            ObserverChannel::PressCountOnly => "press-count",
            ObserverChannel::DotCountPerDigit => "dot-count",
            ObserverChannel::UpDownUnordered => "updown-unordered",
        }
    }

    /// Channels recovered from per-digit classes rather than by replay.
    /// These only understand clean entries.
    pub fn is_class_based(self) -> bool {
        self != ObserverChannel::KeyIdentity
    }
}

impl fmt::Display for ObserverChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObserverChannel {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObserverChannel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| AttackError::UnknownChannel(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    KeyIdentity(Vec<KeyEvent>),
    PressCount(usize),
    DotCounts(Vec<u8>),
    /// `(ups, downs)` per pattern.
    UpDownCounts(Vec<(u8, u8)>),
}

impl Observation {
    pub fn channel(&self) -> ObserverChannel {
        match self {
            Observation::KeyIdentity(_) => ObserverChannel::KeyIdentity,
            Observation::PressCount(_) => ObserverChannel::PressCountOnly,
            Observation::DotCounts(_) => ObserverChannel::DotCountPerDigit,
            Observation::UpDownCounts(_) => ObserverChannel::UpDownUnordered,
        }
    }

    /// Equality as the attacker sees it. Key identity compares the key
    /// sequence only; timing is not part of the model.
    pub fn matches(&self, other: &Observation) -> bool {
        match (self, other) {
            (Observation::KeyIdentity(a), Observation::KeyIdentity(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.key == y.key)
            }
            _ => self == other,
        }
    }
}

/// Reduces a trace to what `channel` perceives.
///
/// Pattern-based channels split the Up/Down presses into consecutive groups
/// of six, which is where the session closes patterns. Keys other than
/// Up/Down/Right are skipped. A Right press or a trailing partial pattern
/// cannot be represented and is rejected.
pub fn observe(trace: &[KeyEvent], channel: ObserverChannel) -> Result<Observation, AttackError> {
    match channel {
        ObserverChannel::KeyIdentity => Ok(Observation::KeyIdentity(trace.to_vec())),
        ObserverChannel::PressCountOnly => Ok(Observation::PressCount(trace.len())),
        ObserverChannel::DotCountPerDigit => Ok(Observation::DotCounts(
            patterns(trace, channel)?
                .into_iter()
                .map(|(u, _)| u)
                .collect(),
        )),
        ObserverChannel::UpDownUnordered => {
            Ok(Observation::UpDownCounts(patterns(trace, channel)?))
        }
    }
}

fn patterns(trace: &[KeyEvent], channel: ObserverChannel) -> Result<Vec<(u8, u8)>, AttackError> {
    let mut out = Vec::with_capacity(trace.len() / BrailleVector::LEN);
    let (mut ups, mut downs) = (0u8, 0u8);
    for e in trace {
        match e.key {
            Key::Up => ups += 1,
            Key::Down => downs += 1,
            Key::Right => {
                return Err(AttackError::UnsupportedTrace {
                    channel,
                    reason: "trace contains a Right (clear) press".into(),
                })
            }
            Key::Other(_) => continue,
        }
        if usize::from(ups + downs) == BrailleVector::LEN {
            out.push((ups, downs));
            ups = 0;
            downs = 0;
        }
    }
    if ups + downs != 0 {
        return Err(AttackError::UnsupportedTrace {
            channel,
            reason: format!("trace ends inside a pattern ({} of 6 presses)", ups + downs),
        });
    }
    Ok(out)
}

/// A set of equal-length PINs, either listed or as a product of per-position
/// digit classes. Iteration order is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    len: usize,
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Listed(Vec<Pin>),
    Product(Vec<Vec<Digit>>),
}

impl CandidateSet {
    pub fn empty(len: usize) -> Self {
        Self {
            len,
            repr: Repr::Listed(Vec::new()),
        }
    }

    /// `pins` must all have length `len`.
    pub fn listed(len: usize, mut pins: Vec<Pin>) -> Self {
        debug_assert!(pins.iter().all(|p| p.len() == len));
        pins.sort();
        pins.dedup();
        Self {
            len,
            repr: Repr::Listed(pins),
        }
    }

    /// Cartesian product; an empty class makes the set empty.
    pub fn product(mut classes: Vec<Vec<Digit>>) -> Self {
        let len = classes.len();
        if classes.iter().any(Vec::is_empty) {
            return Self::empty(len);
        }
        for c in &mut classes {
            c.sort();
            c.dedup();
        }
        Self {
            len,
            repr: Repr::Product(classes),
        }
    }

    pub fn pin_length(&self) -> usize {
        self.len
    }

    pub fn count(&self) -> u64 {
        match &self.repr {
            Repr::Listed(p) => p.len() as u64,
            Repr::Product(classes) => classes.iter().map(|c| c.len() as u64).product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn contains(&self, pin: &Pin) -> bool {
        if pin.len() != self.len {
            return false;
        }
        match &self.repr {
            Repr::Listed(p) => p.binary_search(pin).is_ok(),
            Repr::Product(classes) => classes
                .iter()
                .zip(pin.digits())
                .all(|(c, d)| c.binary_search(d).is_ok()),
        }
    }

    /// The `index`-th candidate in lexicographic order.
    pub fn nth(&self, index: u64) -> Option<Pin> {
        if index >= self.count() {
            return None;
        }
        match &self.repr {
            Repr::Listed(p) => p.get(index as usize).cloned(),
            Repr::Product(classes) => {
                let mut rest = index;
                let mut digits = vec![Digit::new(0).expect("0 is a digit"); self.len];
                for (slot, class) in digits.iter_mut().zip(classes).rev() {
                    let radix = class.len() as u64;
                    *slot = class[(rest % radix) as usize];
                    rest /= radix;
                }
                Some(Pin::new(digits))
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Pin> + '_ {
        (0..self.count()).map(|i| self.nth(i).expect("index below count"))
    }

    /// Up to `n` distinct candidates, in lexicographic order. Sets of at most
    /// `n` are returned whole; larger ones are sampled with a seeded
    /// generator.
    pub fn sample(&self, n: usize, rng: &mut impl rand::Rng) -> Vec<Pin> {
        let count = self.count();
        if count <= n as u64 {
            return self.iter().collect();
        }
        let len = usize::try_from(count).unwrap_or(usize::MAX);
        let mut picked: Vec<usize> = rand::seq::index::sample(rng, len, n).into_vec();
        picked.sort_unstable();
        picked
            .into_iter()
            .filter_map(|i| self.nth(i as u64))
            .collect()
    }
}

fn all_digits() -> Vec<Digit> {
    Digit::all().collect()
}

/// PINs of length `pin_length` whose entry is consistent with `obs`.
///
/// Key identity is decoded by replaying the public state machine, so clears,
/// invalid patterns and ignored keys are handled exactly. The other channels
/// are per-position products of weight classes of `mapping`.
pub fn recover_candidates(
    obs: &Observation,
    mapping: &DigitMapping,
    pin_length: usize,
) -> Result<CandidateSet, AttackError> {
    let config = SessionConfig::new(pin_length)?.with_mapping(*mapping);
    let set = match obs {
        Observation::KeyIdentity(trace) => {
            let r = session::replay(trace, &config)?;
            if r.session.is_complete() {
                CandidateSet::listed(pin_length, vec![r.session.pin()])
            } else {
                CandidateSet::empty(pin_length)
            }
        }
        Observation::PressCount(n) => {
            if *n == pin_length * BrailleVector::LEN {
                CandidateSet::product(vec![all_digits(); pin_length])
            } else {
                CandidateSet::empty(pin_length)
            }
        }
        Observation::DotCounts(weights) => {
            if weights.len() != pin_length {
                CandidateSet::empty(pin_length)
            } else {
                CandidateSet::product(
                    weights
                        .iter()
                        .map(|&w| mapping.digits_with_weight(u32::from(w)))
                        .collect(),
                )
            }
        }
        Observation::UpDownCounts(pairs) => {
            let well_formed = pairs
                .iter()
                .all(|&(u, d)| usize::from(u + d) == BrailleVector::LEN);
            if pairs.len() != pin_length || !well_formed {
                CandidateSet::empty(pin_length)
            } else {
                CandidateSet::product(
                    pairs
                        .iter()
                        .map(|&(u, _)| mapping.digits_with_weight(u32::from(u)))
                        .collect(),
                )
            }
        }
    };
    Ok(set)
}

/// Enumerates every PIN of `pin_length` digits, encodes it, and keeps those
/// whose observation matches `obs`. Work is split by two-digit prefix.
///
/// This is the definition of consistency taken literally: only clean
/// encodings are considered, so a key-identity observation containing
/// clears or ignored keys matches nothing here.
pub fn brute_force_candidates(
    obs: &Observation,
    mapping: &DigitMapping,
    pin_length: usize,
    exec: Execution,
) -> Result<CandidateSet, AttackError> {
    if pin_length > BRUTE_FORCE_MAX_LEN {
        return Err(AttackError::BruteForceTooLong(pin_length));
    }
    let channel = obs.channel();
    let prefix_len = pin_length.min(2);
    let chunks = 10u64.pow(prefix_len as u32);
    let chunk_size = 10u64.pow((pin_length - prefix_len) as u32);
    let found: Vec<Vec<Pin>> = exec::map_indices(exec, chunks, |chunk| {
        (chunk * chunk_size..(chunk + 1) * chunk_size)
            .map(|i| Pin::from_index(i, pin_length))
            .filter(|pin| {
                let trace = session::encode_pin(pin.digits(), mapping);
                observe(&trace, channel)
                    .map(|o| o.matches(obs))
                    .unwrap_or(false)
            })
            .collect()
    });
    Ok(CandidateSet::listed(
        pin_length,
        found.into_iter().flatten().collect(),
    ))
}

/// log2 of the number of equally likely candidates.
pub fn guessing_entropy(count: u64) -> Result<f64, AttackError> {
    if count < 1 {
        return Err(AttackError::EmptyCandidateSet(count));
    }
    Ok((count as f64).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelLeakage {
    pub kind: ObserverChannel,
    pub candidate_count: u64,
    pub entropy_bits: f64,
    pub recovered_exactly: bool,
    pub sample_candidates: Vec<Pin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub pin_length: usize,
    pub channels: Vec<ChannelLeakage>,
}

impl LeakageReport {
    pub fn channel(&self, kind: ObserverChannel) -> Option<&ChannelLeakage> {
        self.channels.iter().find(|c| c.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Analyses a completed `pin_length`-digit entry under each channel.
///
/// Duplicate channels are reported once. Sample candidates are drawn from a
/// ChaCha generator seeded with `seed`, so the report is a pure function of
/// its arguments.
pub fn leakage_report(
    trace: &[KeyEvent],
    channels: &[ObserverChannel],
    mapping: &DigitMapping,
    pin_length: usize,
    seed: u64,
) -> Result<LeakageReport, AttackError> {
    let config = SessionConfig::new(pin_length)?.with_mapping(*mapping);
    let replayed = session::replay(trace, &config)?;
    if !replayed.session.is_complete() {
        return Err(AttackError::IncompleteEntry {
            accepted: replayed.session.digits().len(),
            limit: pin_length,
        });
    }
    let disturbance = replayed.log.iter().find_map(|r| match r.feedback {
        Feedback::InvalidPattern { .. } => Some("trace contains an invalid pattern".to_owned()),
        Feedback::Cleared => Some("trace contains a Right (clear) press".to_owned()),
        _ => None,
    });
    let presses = trace
        .iter()
        .filter(|e| matches!(e.key, Key::Up | Key::Down))
        .count();
    let unclean = disturbance.or_else(|| {
        let expected = pin_length * BrailleVector::LEN;
        (presses != expected || presses != trace.len()).then(|| {
            format!(
                "expected exactly {expected} Up/Down presses and nothing else, found {} events",
                trace.len()
            )
        })
    });

    let mut seen = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(channels.len());
    for &channel in channels {
        if seen.contains(&channel) {
            continue;
        }
        seen.push(channel);
        if channel.is_class_based() {
            if let Some(reason) = &unclean {
                return Err(AttackError::UnsupportedTrace {
                    channel,
                    reason: reason.clone(),
                });
            }
        }
        let obs = observe(trace, channel)?;
        let set = recover_candidates(&obs, mapping, pin_length)?;
        let candidate_count = set.count();
        out.push(ChannelLeakage {
            kind: channel,
            candidate_count,
            entropy_bits: guessing_entropy(candidate_count)?,
            recovered_exactly: candidate_count == 1,
            sample_candidates: set.sample(SAMPLE_LIMIT, &mut rng),
        });
    }
    Ok(LeakageReport {
        pin_length,
        channels: out,
    })
}
