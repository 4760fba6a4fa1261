//! Braille-cell PIN entry over arrow keys.
//!
//! Each digit is entered as its six-dot braille cell, read row by row: Up
//! for a raised dot, Down for an empty one, Right to clear. The crate holds
//! the codec, the entry state machine, a JSON bridge for host UIs, and an
//! attack lab that measures what keyloggers and shoulder surfers learn.

pub mod attack;
pub mod bridge;
pub mod cli;
pub mod codec;
pub mod exec;
pub mod session;
pub mod sweep;
pub mod trace;

pub use attack::{
    brute_force_candidates, guessing_entropy, leakage_report, observe, recover_candidates,
    AttackError, CandidateSet, ChannelLeakage, LeakageReport, Observation, ObserverChannel,
};
pub use bridge::{Bridge, BridgeMessageIn, BridgeMessageOut};
pub use codec::{
    canonical_mapping, digit_to_vector, matrix_to_vector, vector_to_digit, vector_to_matrix,
    BrailleVector, CodecError, Digit, DigitMapping, DotMatrix, MappingEntry, Pin,
};
pub use exec::Execution;
pub use session::{
    default_tone_table, encode_pin, new_session, replay, Feedback, FeedbackRecord, Key, KeyEvent,
    PinSession, Replay, SessionConfig, SessionError, Status, Tone, ToneTable,
};
