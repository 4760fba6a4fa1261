//! Line-delimited key traces: one `{"key": ..., "t_ms": ...}` object per line.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::session::KeyEvent;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace: {0}")]
    Io(#[from] io::Error),
    #[error("malformed trace record at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Parses a trace. Blank lines are skipped; line numbers in errors are 1-based.
pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<KeyEvent>, TraceError> {
    let mut events = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| TraceError::Malformed {
            line: n + 1,
            reason: e.to_string(),
        })?;
        events.push(event);
    }
    Ok(events)
}

pub fn write_trace<W: Write>(mut writer: W, events: &[KeyEvent]) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut writer, e)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn trace_to_string(events: &[KeyEvent]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, events).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::Key;

    #[test]
    fn record_format() {
        let events = vec![
            KeyEvent::new(Key::Up, 0),
            KeyEvent::new(Key::Other("KEY_LEFT".into()), 40),
            KeyEvent::new(Key::Right, 90),
        ];
        let text = trace_to_string(&events);
        assert_eq!(
            text,
            "{\"key\":\"Up\",\"t_ms\":0}\n{\"key\":\"Other:KEY_LEFT\",\"t_ms\":40}\n{\"key\":\"Right\",\"t_ms\":90}\n"
        );
        assert_eq!(read_trace(text.as_bytes()).unwrap(), events);
    }

    #[test]
    fn malformed_lines_are_located() {
        let text = "{\"key\":\"Up\",\"t_ms\":0}\n\n{\"key\":\"Sideways\",\"t_ms\":1}\n";
        match read_trace(text.as_bytes()) {
            Err(TraceError::Malformed { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("Sideways"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_trace("{\"key\":\"Up\",\"t_ms\":-1}".as_bytes()),
            Err(TraceError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            read_trace("{\"key\":\"Up\",\"t_ms\":1,\"extra\":2}".as_bytes()),
            Err(TraceError::Malformed { line: 1, .. })
        ));
    }
}
