//! JSON message boundary for host UIs.
//!
//! Hosts send key, reset and configure messages and get feedback, state and
//! error messages back. Every message carries `"v": 1`. State messages carry
//! only the number of digits entered; a digit value leaves the bridge only
//! inside a `digit_accepted` feedback message.
//!
//! ```text
//! in:  {"v":1,"type":"key","key":"Up","t_ms":0}
//!      {"v":1,"type":"reset"}
//!      {"v":1,"type":"configure","limit_L":4}
//! out: {"v":1,"type":"feedback","kind":"digit_accepted","digit":1,"tone":{"freq_hz":466.16..,"dur_ms":150}}
//!      {"v":1,"type":"state","digits_entered":1,"complete":false}
//!      {"v":1,"type":"error","code":"malformed","detail":"..."}
//! ```

use serde::{Deserialize, Serialize};

use crate::session::{Feedback, Key, KeyEvent, PinSession, SessionConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BridgeMessageIn {
    /// `key` is a host key name; anything other than Up/Down/Right (or an
    /// explicit `Other:<code>`) is treated as an ignored key.
    Key {
        key: String,
        t_ms: u64,
    },
    Reset,
    Configure {
        #[serde(rename = "limit_L")]
        limit: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BridgeMessageOut {
    Feedback(Feedback),
    State {
        digits_entered: usize,
        complete: bool,
    },
    Error {
        code: ErrorCode,
        detail: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    UnsupportedVersion,
    InvalidConfig,
    OutOfOrder,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    v: u32,
    #[serde(flatten)]
    body: T,
}

/// One session behind the message boundary. Messages are handled strictly
/// in the order they are dispatched.
#[derive(Debug, Clone)]
pub struct Bridge {
    session: PinSession,
    last_t_ms: Option<u64>,
}

impl Bridge {
    pub fn new(config: SessionConfig) -> Self {
        Self {
            session: PinSession::new(config),
            last_t_ms: None,
        }
    }

    pub fn session(&self) -> &PinSession {
        &self.session
    }

    fn state(&self) -> BridgeMessageOut {
        BridgeMessageOut::State {
            digits_entered: self.session.digits().len(),
            complete: self.session.is_complete(),
        }
    }

    fn restart(&mut self, config: SessionConfig) -> Vec<BridgeMessageOut> {
        self.session = PinSession::new(config);
        self.last_t_ms = None;
        vec![self.state()]
    }

    /// Key messages yield their feedback, then a state message if the digit
    /// count or completion changed. Reset and configure yield a state
    /// message. A rejected message leaves the session untouched.
    pub fn dispatch(&mut self, msg: &BridgeMessageIn) -> Vec<BridgeMessageOut> {
        match msg {
            BridgeMessageIn::Key { key, t_ms } => {
                if let Some(prev) = self.last_t_ms.filter(|p| t_ms < p) {
                    return vec![error(
                        ErrorCode::OutOfOrder,
                        format!("t_ms {t_ms} is earlier than the previous {prev}"),
                    )];
                }
                self.last_t_ms = Some(*t_ms);
                let before = (self.session.digits().len(), self.session.is_complete());
                let event = KeyEvent::new(Key::from_host(key), *t_ms);
                let mut out: Vec<BridgeMessageOut> = self
                    .session
                    .handle_key(&event)
                    .into_iter()
                    .map(BridgeMessageOut::Feedback)
                    .collect();
                if before != (self.session.digits().len(), self.session.is_complete()) {
                    out.push(self.state());
                }
                out
            }
            BridgeMessageIn::Reset => {
                let config = self.session.config().clone();
                self.restart(config)
            }
            BridgeMessageIn::Configure { limit } => match SessionConfig::new(*limit) {
                Ok(fresh) => {
                    let current = self.session.config();
                    let config = fresh
                        .with_mapping(*current.mapping())
                        .with_tones(current.tones().clone());
                    self.restart(config)
                }
                Err(e) => vec![error(ErrorCode::InvalidConfig, e.to_string())],
            },
        }
    }

    /// Parses one JSON message, dispatches it and serializes the replies.
    pub fn dispatch_json(&mut self, text: &str) -> Vec<String> {
        let replies = match parse_message(text) {
            Ok(msg) => self.dispatch(&msg),
            Err(reply) => vec![reply],
        };
        replies.iter().map(encode_message).collect()
    }
}

fn error(code: ErrorCode, detail: String) -> BridgeMessageOut {
    BridgeMessageOut::Error { code, detail }
}

/// Parses an inbound message, or returns the error reply for it.
pub fn parse_message(text: &str) -> Result<BridgeMessageIn, BridgeMessageOut> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| error(ErrorCode::Malformed, e.to_string()))?;
    match value.get("v").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(error(
                ErrorCode::UnsupportedVersion,
                format!("schema version {v}"),
            ))
        }
        None => {
            return Err(error(
                ErrorCode::Malformed,
                "missing schema version \"v\"".into(),
            ))
        }
    }
    serde_json::from_value::<Envelope<BridgeMessageIn>>(value)
        .map(|e| e.body)
        .map_err(|e| error(ErrorCode::Malformed, e.to_string()))
}

pub fn encode_message(msg: &BridgeMessageOut) -> String {
    serde_json::to_string(&Envelope {
        v: SCHEMA_VERSION,
        body: msg,
    })
    .expect("message serializes")
}
