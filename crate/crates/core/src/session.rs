//! Arrow-key PIN entry.
//!
//! Up appends a raised dot, Down an empty one. Every sixth symbol closes a
//! pattern, which is looked up in the [`DigitMapping`]; a hit accepts a digit
//! and a miss plays the error tone. Right clears everything entered so far.
//! All other keys are ignored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{BrailleVector, Digit, DigitMapping, Pin};

/// Upper bound on digits per PIN.
pub const MAX_LIMIT: usize = 16;
pub const DEFAULT_LIMIT: usize = 4;

/// Spacing of the synthetic timestamps produced by [`encode_pin`].
pub const KEY_INTERVAL_MS: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("PIN limit must be within 1..={MAX_LIMIT}, got {0}")]
    InvalidLimit(usize),
    #[error("tone table: {0}")]
    InvalidToneTable(String),
    #[error("event {index} has timestamp {t_ms} ms, earlier than the previous {previous} ms")]
    OutOfOrder {
        index: usize,
        previous: u64,
        t_ms: u64,
    },
    #[error("unknown key {0:?}; expected Up, Down, Right or Other:<code>")]
    UnknownKey(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Key {
    Up,
    Down,
    Right,
    Other(String),
}

impl Key {
    /// Lenient form used for host key names: anything that is not a wire
    /// form becomes `Other` carrying the raw name.
    pub fn from_host(name: &str) -> Key {
        name.parse().unwrap_or_else(|_| Key::Other(name.to_owned()))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Up => f.write_str("Up"),
            Key::Down => f.write_str("Down"),
            Key::Right => f.write_str("Right"),
            Key::Other(code) => write!(f, "Other:{code}"),
        }
    }
}

impl FromStr for Key {
    type Err = SessionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Up" => Ok(Key::Up),
            "Down" => Ok(Key::Down),
            "Right" => Ok(Key::Right),
            _ => match s.strip_prefix("Other:") {
                Some(code) => Ok(Key::Other(code.to_owned())),
                None => Err(SessionError::UnknownKey(s.to_owned())),
            },
        }
    }
}

impl TryFrom<String> for Key {
    type Error = SessionError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Key> for String {
    fn from(k: Key) -> Self {
        k.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyEvent {
    pub key: Key,
    pub t_ms: u64,
}

impl KeyEvent {
    pub fn new(key: Key, t_ms: u64) -> Self {
        Self { key, t_ms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub freq_hz: f64,
    pub dur_ms: u32,
}

/// One tone per digit plus the invalid-pattern tone; all frequencies distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneTable {
    digits: [Tone; 10],
    error: Tone,
}

impl ToneTable {
    pub fn new(digits: [Tone; 10], error: Tone) -> Result<Self, SessionError> {
        let freqs: Vec<f64> = digits.iter().chain([&error]).map(|t| t.freq_hz).collect();
        if let Some(bad) = freqs.iter().find(|f| !f.is_finite() || **f <= 0.0) {
            return Err(SessionError::InvalidToneTable(format!(
                "frequency {bad} is not positive"
            )));
        }
        for (i, a) in freqs.iter().enumerate() {
            if freqs[i + 1..].contains(a) {
                return Err(SessionError::InvalidToneTable(format!(
                    "frequency {a} Hz used twice"
                )));
            }
        }
        Ok(Self { digits, error })
    }

    pub fn digit(&self, d: Digit) -> Tone {
        self.digits[usize::from(d.value())]
    }

    pub fn error(&self) -> Tone {
        self.error
    }
}

impl Default for ToneTable {
    fn default() -> Self {
        default_tone_table()
    }
}

/// Semitone ladder from A4: digit `d` plays 440 * 2^(d/12) Hz for 150 ms.
/// The error tone is A3 for 300 ms.
pub fn default_tone_table() -> ToneTable {
    let digits = std::array::from_fn(|d| Tone {
        freq_hz: 440.0 * (d as f64 / 12.0).exp2(),
        dur_ms: 150,
    });
    ToneTable::new(
        digits,
        Tone {
            freq_hz: 220.0,
            dur_ms: 300,
        },
    )
    .expect("ladder is distinct")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    limit: usize,
    mapping: DigitMapping,
    tones: ToneTable,
}

impl SessionConfig {
    pub fn new(limit: usize) -> Result<Self, SessionError> {
        if !(1..=MAX_LIMIT).contains(&limit) {
            return Err(SessionError::InvalidLimit(limit));
        }
        Ok(Self {
            limit,
            mapping: DigitMapping::canonical(),
            tones: ToneTable::default(),
        })
    }

    pub fn with_mapping(mut self, mapping: DigitMapping) -> Self {
        self.mapping = mapping;
        self
    }

    pub fn with_tones(mut self, tones: ToneTable) -> Self {
        self.tones = tones;
        self
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn mapping(&self) -> &DigitMapping {
        &self.mapping
    }

    pub fn tones(&self) -> &ToneTable {
        &self.tones
    }
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self::new(DEFAULT_LIMIT).expect("default limit is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    InProgress,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feedback {
    DigitAccepted { digit: Digit, tone: Tone },
    InvalidPattern { tone: Tone },
    Cleared,
    Completed,
    Ignored,
}

impl Feedback {
    pub fn tone(&self) -> Option<Tone> {
        match self {
            Feedback::DigitAccepted { tone, .. } | Feedback::InvalidPattern { tone } => Some(*tone),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinSession {
    config: SessionConfig,
    pattern: u8,
    pattern_len: u8,
    digits: Vec<Digit>,
    status: Status,
}

impl PinSession {
    pub fn new(config: SessionConfig) -> Self {
        let digits = Vec::with_capacity(config.limit);
        Self {
            config,
            pattern: 0,
            pattern_len: 0,
            digits,
            status: Status::InProgress,
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    pub fn pin(&self) -> Pin {
        Pin::new(self.digits.clone())
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_complete(&self) -> bool {
        self.status == Status::Complete
    }

    /// Symbols of the pattern in progress, 0..=5 of them.
    pub fn buffer_len(&self) -> usize {
        usize::from(self.pattern_len)
    }

    pub fn buffer(&self) -> String {
        (0..self.pattern_len)
            .rev()
            .map(|i| if self.pattern >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Applies one key press. Returns one feedback event, or two when the
    /// press accepts the final digit (`DigitAccepted` then `Completed`).
    pub fn handle_key(&mut self, event: &KeyEvent) -> Vec<Feedback> {
        if self.is_complete() {
            return vec![Feedback::Ignored];
        }
        let bit = match event.key {
            Key::Up => 1,
            Key::Down => 0,
            Key::Right => {
                self.reset_pattern();
                self.digits.clear();
                return vec![Feedback::Cleared];
            }
            Key::Other(_) => return vec![Feedback::Ignored],
        };
        self.pattern = self.pattern << 1 | bit;
        self.pattern_len += 1;
        if usize::from(self.pattern_len) < BrailleVector::LEN {
            return vec![Feedback::Ignored];
        }

        let vector = BrailleVector::from_bits(self.pattern).expect("six symbols");
        self.reset_pattern();
        match self.config.mapping.lookup(vector) {
            Some(digit) => {
                self.digits.push(digit);
                let accepted = Feedback::DigitAccepted {
                    digit,
                    tone: self.config.tones.digit(digit),
                };
                if self.digits.len() == self.config.limit {
                    self.status = Status::Complete;
                    vec![accepted, Feedback::Completed]
                } else {
                    vec![accepted]
                }
            }
            None => vec![Feedback::InvalidPattern {
                tone: self.config.tones.error(),
            }],
        }
    }

    fn reset_pattern(&mut self) {
        self.pattern = 0;
        self.pattern_len = 0;
    }
}

pub fn new_session(config: SessionConfig) -> PinSession {
    PinSession::new(config)
}

/// Key presses that enter `pin`: six per digit, Up for a raised dot and
/// Down for an empty one, stamped `0, 100, 200, ...` ms.
pub fn encode_pin(pin: &[Digit], mapping: &DigitMapping) -> Vec<KeyEvent> {
    pin.iter()
        .flat_map(|&d| {
            let v = mapping.vector(d);
            (0..BrailleVector::LEN).map(move |i| if v.bit(i) { Key::Up } else { Key::Down })
        })
        .enumerate()
        .map(|(i, key)| KeyEvent::new(key, i as u64 * KEY_INTERVAL_MS))
        .collect()
}

/// A feedback event tagged with the key event that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub index: usize,
    pub t_ms: u64,
    #[serde(flatten)]
    pub feedback: Feedback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub session: PinSession,
    pub log: Vec<FeedbackRecord>,
}

impl Replay {
    pub fn accepted_count(&self) -> usize {
        self.log
            .iter()
            .filter(|r| matches!(r.feedback, Feedback::DigitAccepted { .. }))
            .count()
    }
}

/// Folds `trace` through a fresh session. Timestamps must not decrease.
pub fn replay(trace: &[KeyEvent], config: &SessionConfig) -> Result<Replay, SessionError> {
    check_order(trace)?;
    let mut session = PinSession::new(config.clone());
    let mut log = Vec::with_capacity(trace.len() + 1);
    for (index, event) in trace.iter().enumerate() {
        for feedback in session.handle_key(event) {
            log.push(FeedbackRecord {
                index,
                t_ms: event.t_ms,
                feedback,
            });
        }
    }
    Ok(Replay { session, log })
}

pub fn check_order(trace: &[KeyEvent]) -> Result<(), SessionError> {
    for (index, pair) in trace.windows(2).enumerate() {
        if pair[1].t_ms < pair[0].t_ms {
            return Err(SessionError::OutOfOrder {
                index: index + 1,
                previous: pair[0].t_ms,
                t_ms: pair[1].t_ms,
            });
        }
    }
    Ok(())
}
