//! Canonical text encoding of tag streams.
//!
//! ```text
//! side=environment
//! clock=shared-generator
//! clock_offset_s=0
//! clock_drift=0
//! clock_jitter_s=0
//! window_convention=full-width
//! time_ps,channel,eom_bit,qrng_bit,scanner_step
//! 1000275000,4,0,0,-
//! ```
//!
//! `-` marks an absent annotation. Times must be nondecreasing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::stream::{Channel, ClockModel, Discipline, Side, TimeTag, TimeTagStream};
use crate::error::{Error, Result};

pub const RECORD_HEADER: &str = "time_ps,channel,eom_bit,qrng_bit,scanner_step";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn encode_stream<W: Write>(stream: &TimeTagStream, mut w: W) -> std::io::Result<()> {
    let clock = stream.clock();
    writeln!(w, "side={}", stream.side().as_str())?;
    writeln!(w, "clock={}", clock.discipline.name())?;
    writeln!(w, "clock_offset_s={}", clock.offset_s)?;
    writeln!(w, "clock_drift={}", clock.drift)?;
    writeln!(w, "clock_jitter_s={}", clock.jitter_sigma_s)?;
    if let Discipline::Gps { wander_sigma_s } = clock.discipline {
        writeln!(w, "clock_wander_s={wander_sigma_s}")?;
    }
    writeln!(w, "window_convention=full-width")?;
    writeln!(w, "{RECORD_HEADER}")?;
    for t in stream.tags() {
        writeln!(
            w,
            "{},{},{},{},{}",
            t.time_ps,
            t.channel.number(),
            opt(t.eom_bit),
            opt(t.qrng_bit),
            opt(t.scanner_step)
        )?;
    }
    w.flush()
}

pub fn write_stream(stream: &TimeTagStream, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    encode_stream(stream, BufWriter::new(file)).map_err(io_err(path))
}

pub fn encode_to_string(stream: &TimeTagStream) -> String {
    let mut buf = Vec::new();
    encode_stream(stream, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_opt<T: std::str::FromStr>(field: &str, line: usize, name: &str) -> Result<Option<T>> {
    if field == "-" {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Parse { line, message: format!("bad {name} {field:?}") })
}

fn parse_f64(value: &str, line: usize, key: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("bad value for {key}: {value:?}") })
}

pub fn decode_stream<R: BufRead>(reader: R) -> Result<TimeTagStream> {
    let mut side = None;
    let mut discipline = None;
    let mut clock = ClockModel::default();
    let mut wander = None;
    let mut in_records = false;
    let mut tags: Vec<TimeTag> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let n = idx + 1;
        let line = line.map_err(|e| Error::Parse { line: n, message: e.to_string() })?;
        if line.is_empty() {
            continue;
        }
        if !in_records {
            if line == RECORD_HEADER {
                in_records = true;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: n, message: format!("expected key=value, got {line:?}") })?;
            match key {
                "side" => {
                    side = Some(match value {
                        "system" => Side::System,
                        "environment" => Side::Environment,
                        _ => return Err(Error::Parse { line: n, message: format!("unknown side {value:?}") }),
                    })
                }
                "clock" => discipline = Some(value.to_string()),
                "clock_offset_s" => clock.offset_s = parse_f64(value, n, key)?,
                "clock_drift" => clock.drift = parse_f64(value, n, key)?,
                "clock_jitter_s" => clock.jitter_sigma_s = parse_f64(value, n, key)?,
                "clock_wander_s" => wander = Some(parse_f64(value, n, key)?),
                "window_convention" if value == "full-width" => {}
                _ => return Err(Error::Parse { line: n, message: format!("unexpected header {line:?}") }),
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse { line: n, message: format!("expected 5 fields, got {}", fields.len()) });
        }
        let time_ps: u64 = fields[0]
            .parse()
            .map_err(|_| Error::Parse { line: n, message: format!("bad time {:?}", fields[0]) })?;
        let channel = fields[1]
            .parse::<u8>()
            .ok()
            .and_then(Channel::from_number)
            .ok_or_else(|| Error::Parse { line: n, message: format!("bad channel {:?}", fields[1]) })?;
        if let Some(prev) = tags.last() {
            if time_ps < prev.time_ps {
                return Err(Error::Parse { line: n, message: format!("time {time_ps} before previous {}", prev.time_ps) });
            }
        }
        tags.push(TimeTag {
            time_ps,
            channel,
            eom_bit: parse_opt(fields[2], n, "eom_bit")?,
            qrng_bit: parse_opt(fields[3], n, "qrng_bit")?,
            scanner_step: parse_opt(fields[4], n, "scanner_step")?,
        });
    }
    let side = side.ok_or(Error::Parse { line: 1, message: "missing side= header".into() })?;
    clock.discipline = match discipline.as_deref() {
        Some("shared-generator") => Discipline::SharedGenerator,
        Some("gps") => Discipline::Gps { wander_sigma_s: wander.unwrap_or(0.0) },
        other => return Err(Error::Parse { line: 1, message: format!("bad or missing clock header {other:?}") }),
    };
    TimeTagStream::new(side, clock, tags).map_err(|e| Error::Parse { line: 0, message: e.to_string() })
}

pub fn read_stream(path: impl AsRef<Path>) -> Result<TimeTagStream> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    decode_stream(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TimeTagStream {
        let clock = ClockModel { offset_s: 1.5e-7, drift: 1e-9, jitter_sigma_s: 2e-11, discipline: Discipline::Gps { wander_sigma_s: 1e-9 } };
        let tags = vec![
            TimeTag::environment(100, Channel::Det3, Some(1), 1),
            TimeTag::environment(100, Channel::Det4, None, 0),
            TimeTag::bare(250, Channel::Det4),
        ];
        TimeTagStream::new(Side::Environment, clock, tags).unwrap()
    }

    #[test]
    fn round_trip() {
        let s = sample();
        let text = encode_to_string(&s);
        let back = decode_stream(text.as_bytes()).unwrap();
        assert_eq!(back, s);
        assert_eq!(encode_to_string(&back), text);
    }

    #[test]
    fn out_of_order_reports_line() {
        let text = "side=system\nclock=shared-generator\nwindow_convention=full-width\ntime_ps,channel,eom_bit,qrng_bit,scanner_step\n10,1,-,-,0\n5,2,-,-,0\n";
        match decode_stream(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_record_reports_line() {
        let text = "side=system\nclock=shared-generator\ntime_ps,channel,eom_bit,qrng_bit,scanner_step\n10,7,-,-,0\n";
        assert!(matches!(decode_stream(text.as_bytes()), Err(Error::Parse { line: 4, .. })));
        let text = "side=system\nclock=shared-generator\ntime_ps,channel,eom_bit,qrng_bit,scanner_step\n10,1,-,-\n";
        assert!(matches!(decode_stream(text.as_bytes()), Err(Error::Parse { line: 4, .. })));
    }
}
