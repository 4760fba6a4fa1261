//! `braille-pin` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::attack::{self, LeakageReport, ObserverChannel};
use crate::codec::{DigitMapping, DotMatrix, Pin};
use crate::session::{self, Feedback, SessionConfig, DEFAULT_LIMIT, MAX_LIMIT};
use crate::trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "braille-pin",
    version,
    about = "Braille-cell PIN entry over arrow keys"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// PIN digits to encode
    #[arg(long, global = true)]
    pub pin: Option<String>,

    /// Trace file (`-` for stdin/stdout)
    #[arg(long, global = true)]
    pub trace: Option<PathBuf>,

    /// Observer channel to analyse; repeatable, defaults to all
    #[arg(long = "channel", global = true, value_parser = parse_channel)]
    pub channels: Vec<ObserverChannel>,

    /// Digits per PIN
    #[arg(long, global = true, default_value_t = DEFAULT_LIMIT)]
    pub limit: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    /// Seed for sampling example candidates
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write the key trace that enters --pin
    Encode,
    /// Decode a trace and print the accepted digits and feedback log
    Replay,
    /// Report what each observer channel learns from a trace
    Attack,
    /// Print the braille vector to digit table
    Mapping,
    /// Print the feedback tone table
    Tones,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
}

fn parse_channel(s: &str) -> Result<ObserverChannel, String> {
    s.parse().map_err(|e: attack::AttackError| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, input, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

fn execute(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Encode => encode(cli, out),
        Command::Replay => replay(cli, input, out),
        Command::Attack => attack(cli, input, out),
        Command::Mapping => mapping(cli, out),
        Command::Tones => tones(cli, out),
    }
}

fn config(cli: &Cli) -> Result<SessionConfig, Failure> {
    SessionConfig::new(cli.limit).map_err(|e| Failure::Usage(e.to_string()))
}

fn load_trace(cli: &Cli, input: &mut dyn BufRead) -> Result<Vec<session::KeyEvent>, Failure> {
    let path = cli
        .trace
        .as_deref()
        .ok_or_else(|| Failure::Usage("--trace <path> is required".into()))?;
    let parsed = if path == Path::new("-") {
        trace::read_trace(input)
    } else {
        let file = File::open(path)
            .map_err(|e| Failure::Data(format!("cannot read trace {}: {e}", path.display())))?;
        trace::read_trace(BufReader::new(file))
    };
    let events = parsed.map_err(|e| match e {
        trace::TraceError::Io(io) => {
            Failure::Data(format!("cannot read trace {}: {io}", path.display()))
        }
        malformed => Failure::Data(format!("{}: {malformed}", path.display())),
    })?;
    session::check_order(&events).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(events)
}

fn json_line(out: &mut dyn Write, value: &impl serde::Serialize) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}

fn encode(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    let raw = cli
        .pin
        .as_deref()
        .ok_or_else(|| Failure::Usage("--pin <digits> is required".into()))?;
    let pin: Pin = raw
        .parse()
        .map_err(|e| Failure::Data(format!("invalid --pin: {e}")))?;
    if pin.len() > MAX_LIMIT {
        return Err(Failure::Data(format!(
            "invalid --pin: at most {MAX_LIMIT} digits, got {}",
            pin.len()
        )));
    }
    let events = session::encode_pin(pin.digits(), &DigitMapping::canonical());
    match cli.trace.as_deref() {
        Some(path) if path != Path::new("-") => {
            let file = File::create(path).map_err(|e| {
                Failure::Data(format!("cannot write trace {}: {e}", path.display()))
            })?;
            trace::write_trace(io::BufWriter::new(file), &events)?;
            if cli.format == Format::Human {
                writeln!(
                    out,
                    "wrote {} key events to {}",
                    events.len(),
                    path.display()
                )?;
            }
        }
        _ => trace::write_trace(&mut *out, &events)?,
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct ReplaySummary {
    digits: String,
    complete: bool,
    events: usize,
}

fn replay(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> CmdResult {
    let cfg = config(cli)?;
    let events = load_trace(cli, input)?;
    let r = session::replay(&events, &cfg).map_err(|e| Failure::Data(e.to_string()))?;
    let digits = r.session.pin().to_string();
    match cli.format {
        Format::Structured => {
            for rec in &r.log {
                json_line(out, rec)?;
            }
            json_line(
                out,
                &ReplaySummary {
                    digits,
                    complete: r.session.is_complete(),
                    events: events.len(),
                },
            )?;
        }
        Format::Human => {
            writeln!(out, "{digits}")?;
            let status = if r.session.is_complete() {
                "complete"
            } else {
                "in progress"
            };
            writeln!(
                out,
                "status: {status} ({} of {} digits, {} events)",
                r.session.digits().len(),
                cfg.limit(),
                events.len()
            )?;
            for rec in r.log.iter().filter(|rec| rec.feedback != Feedback::Ignored) {
                let what = match rec.feedback {
                    Feedback::DigitAccepted { digit, tone } => {
                        format!(
                            "digit {digit} accepted, tone {:.2} Hz for {} ms",
                            tone.freq_hz, tone.dur_ms
                        )
                    }
                    Feedback::InvalidPattern { tone } => {
                        format!(
                            "invalid pattern, tone {:.2} Hz for {} ms",
                            tone.freq_hz, tone.dur_ms
                        )
                    }
                    Feedback::Cleared => "cleared".into(),
                    Feedback::Completed => "completed".into(),
                    Feedback::Ignored => unreachable!(),
                };
                writeln!(out, "  #{:<3} {:>7} ms  {what}", rec.index, rec.t_ms)?;
            }
        }
    }
    Ok(())
}

fn attack(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> CmdResult {
    let cfg = config(cli)?;
    let events = load_trace(cli, input)?;
    let channels: Vec<ObserverChannel> = if cli.channels.is_empty() {
        ObserverChannel::ALL.to_vec()
    } else {
        cli.channels.clone()
    };
    let report = attack::leakage_report(&events, &channels, cfg.mapping(), cfg.limit(), cli.seed)
        .map_err(|e| Failure::Data(e.to_string()))?;
    match cli.format {
        Format::Structured => json_line(out, &report)?,
        Format::Human => write_report(out, &report)?,
    }
    Ok(())
}

fn write_report(out: &mut dyn Write, report: &LeakageReport) -> io::Result<()> {
    writeln!(out, "PIN length {}", report.pin_length)?;
    writeln!(
        out,
        "{:<18} {:>12} {:>10}  {:<9} samples",
        "channel", "candidates", "bits", "recovered"
    )?;
    for c in &report.channels {
        let samples: Vec<String> = c.sample_candidates.iter().map(Pin::to_string).collect();
        writeln!(
            out,
            "{:<18} {:>12} {:>10.4}  {:<9} {}",
            c.kind.name(),
            c.candidate_count,
            c.entropy_bits,
            if c.recovered_exactly { "yes" } else { "no" },
            samples.join(" ")
        )?;
    }
    Ok(())
}

fn mapping(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    let m = DigitMapping::canonical();
    match cli.format {
        Format::Structured => {
            for e in m.entries() {
                json_line(out, &e)?;
            }
        }
        Format::Human => {
            writeln!(out, "digit  vector  dots")?;
            for e in m.entries() {
                let dots: Vec<String> = DotMatrix::from(e.vector)
                    .dots()
                    .iter()
                    .map(u8::to_string)
                    .collect();
                writeln!(out, "{:<6} {}  {}", e.digit, e.vector, dots.join(","))?;
            }
        }
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct ToneRecord {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    digit: Option<crate::codec::Digit>,
    freq_hz: f64,
    dur_ms: u32,
}

fn tones(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    let table = session::default_tone_table();
    let records = crate::codec::Digit::all()
        .map(|d| {
            let t = table.digit(d);
            ToneRecord {
                kind: "digit",
                digit: Some(d),
                freq_hz: t.freq_hz,
                dur_ms: t.dur_ms,
            }
        })
        .chain(std::iter::once(ToneRecord {
            kind: "error",
            digit: None,
            freq_hz: table.error().freq_hz,
            dur_ms: table.error().dur_ms,
        }));
    match cli.format {
        Format::Structured => {
            for r in records {
                json_line(out, &r)?;
            }
        }
        Format::Human => {
            writeln!(out, "tone    freq_hz  dur_ms")?;
            for r in records {
                let label = r
                    .digit
                    .map_or_else(|| "error".to_owned(), |d| d.to_string());
                writeln!(out, "{label:<6} {:>8.2}  {:>6}", r.freq_hz, r.dur_ms)?;
            }
        }
    }
    Ok(())
}
