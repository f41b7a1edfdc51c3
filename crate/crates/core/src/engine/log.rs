//! Line-oriented event log.
//!
//! Each line is `time<TAB>seq<TAB>kind<TAB>key=value...`, fields separated by
//! tabs. Times use Rust's shortest round-trip float formatting, so parsing a
//! line recovers the exact value the engine used. Setup lines carry `-` in
//! the seq column.

use std::fmt::{self, Display, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hex::{AoId, HexCoord, Location, MoveClass, VoId};
use crate::services::{GridServices, Job, JobId, MsId, PartialResult, SubJobId};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    lines: Vec<String>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        time: f64,
        seq: Option<u64>,
        kind: &str,
        fields: &[(&str, &dyn Display)],
    ) {
        let mut line = String::with_capacity(64);
        let _ = write!(line, "{time}\t");
        match seq {
            Some(s) => {
                let _ = write!(line, "{s}");
            }
            None => line.push('-'),
        }
        line.push('\t');
        line.push_str(kind);
        for (k, v) in fields {
            let _ = write!(line, "\t{k}={v}");
        }
        self.lines.push(line);
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.lines.len() * 64);
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Self {
        Self {
            lines: text
                .lines()
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect(),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = Result<LogRecord<'_>>> {
        self.lines
            .iter()
            .enumerate()
            .map(|(i, l)| LogRecord::parse(l, i + 1))
    }
}

impl fmt::Display for EventLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// One parsed log line.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord<'a> {
    pub line: usize,
    pub time: f64,
    pub seq: Option<u64>,
    pub kind: &'a str,
    fields: Vec<(&'a str, &'a str)>,
}

impl<'a> LogRecord<'a> {
    pub fn parse(text: &'a str, line: usize) -> Result<Self> {
        let err = |msg: String| Error::Log { line, msg };
        let mut cols = text.split('\t');
        let time = cols
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err("bad time column".into()))?;
        let seq = match cols.next() {
            Some("-") => None,
            Some(s) => Some(s.parse().map_err(|_| err(format!("bad seq {s:?}")))?),
            None => return Err(err("missing seq column".into())),
        };
        let kind = cols.next().ok_or_else(|| err("missing kind".into()))?;
        let fields = cols
            .map(|c| {
                c.split_once('=')
                    .ok_or_else(|| err(format!("bad field {c:?}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            line,
            time,
            seq,
            kind,
            fields,
        })
    }

    pub fn raw(&self, key: &str) -> Result<&'a str> {
        self.fields
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Log {
                line: self.line,
                msg: format!("{} line missing {key}", self.kind),
            })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| Error::Log {
            line: self.line,
            msg: format!("cannot parse {key}={raw}"),
        })
    }

    pub fn location(&self) -> Result<Location> {
        Ok(Location {
            cell: HexCoord::new(self.get("q")?, self.get("r")?),
            ao: AoId(self.get("ao")?),
            vo: VoId(self.get("vo")?),
        })
    }

    pub fn move_class(&self) -> Result<MoveClass> {
        let raw = self.raw("class")?;
        MoveClass::parse(raw).ok_or_else(|| Error::Log {
            line: self.line,
            msg: format!("unknown move class {raw}"),
        })
    }

    fn fail(&self, e: Error) -> Error {
        Error::Log {
            line: self.line,
            msg: format!("{} did not replay: {e}", self.kind),
        }
    }
}

/// Rebuilds RR, JADB and BSMS state by feeding logged transitions through the
/// grid service operations. No randomness or timing model is involved.
pub fn replay(log: &EventLog) -> Result<GridServices> {
    let mut grid: Option<GridServices> = None;
    for rec in log.records() {
        let rec = rec?;
        if rec.kind == "start" {
            grid = Some(GridServices::new(rec.get("exclude_initiator")?));
            continue;
        }
        let g = grid.as_mut().ok_or_else(|| Error::Log {
            line: rec.line,
            msg: "transition before start line".into(),
        })?;
        match rec.kind {
            "boot" => g.bootstrap_station(MsId(rec.get("ms")?), rec.get("cpu")?, rec.location()?),
            "join" => g.register_station(MsId(rec.get("ms")?), rec.get("cpu")?, rec.location()?),
            "submit" => {
                let job = Job {
                    id: JobId(rec.get("job")?),
                    initiator: MsId(rec.get("initiator")?),
                    total_work: rec.get("work")?,
                    subjob_count: rec.get("subjobs")?,
                    dispatch_payload_bytes: rec.get("dispatch_bytes")?,
                    result_payload_bytes: rec.get("result_bytes")?,
                };
                g.submit_job(job, rec.time).map_err(|e| rec.fail(e))?;
            }
            "dispatch" => {
                g.dispatch(SubJobId(rec.get("subjob")?), MsId(rec.get("ms")?))
                    .map_err(|e| rec.fail(e))?;
            }
            "exec" => {
                let ok = g.start_execution(
                    SubJobId(rec.get("subjob")?),
                    MsId(rec.get("ms")?),
                    rec.get("attempt")?,
                );
                if !ok {
                    return Err(Error::Log {
                        line: rec.line,
                        msg: "exec for a stale assignment".into(),
                    });
                }
            }
            "complete" => {
                let subjob = SubJobId(rec.get("subjob")?);
                let ms = MsId(rec.get("ms")?);
                let result = PartialResult {
                    subjob,
                    assignee: ms,
                    completed_at: rec.time,
                };
                g.complete_subjob(ms, subjob, result)
                    .map_err(|e| rec.fail(e))?;
            }
            "result" => {
                g.deliver_result(SubJobId(rec.get("subjob")?), rec.time)
                    .map_err(|e| rec.fail(e))?;
            }
            "move" => {
                g.on_location_update(MsId(rec.get("ms")?), rec.location()?, rec.move_class()?)
                    .map_err(|e| rec.fail(e))?;
            }
            "handover" => {
                let class = rec.move_class()?;
                let loc = match class {
                    MoveClass::InterVo => Some(rec.location()?),
                    _ => None,
                };
                g.on_handover(MsId(rec.get("ms")?), class, loc)
                    .map_err(|e| rec.fail(e))?;
            }
            // informational lines: consequences of transitions above
            "abort" | "stale" | "msg" | "job_done" | "end" => {}
            other => {
                return Err(Error::Log {
                    line: rec.line,
                    msg: format!("unknown kind {other:?}"),
                })
            }
        }
    }
    grid.ok_or_else(|| Error::Log {
        line: 0,
        msg: "log has no start line".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let mut log = EventLog::new();
        let t = 0.1 + 0.2;
        log.push(t, Some(7), "dispatch", &[("subjob", &3u64), ("ms", &9u64)]);
        log.push(0.0, None, "start", &[]);
        assert_eq!(
            log.lines()[0],
            "0.30000000000000004\t7\tdispatch\tsubjob=3\tms=9"
        );
        let recs: Vec<_> = log.records().collect::<Result<_>>().unwrap();
        assert_eq!(recs[0].time, t);
        assert_eq!(recs[0].seq, Some(7));
        assert_eq!(recs[0].get::<u64>("ms").unwrap(), 9);
        assert_eq!(recs[1].seq, None);
        assert!(recs[0].get::<u64>("nope").is_err());
        assert_eq!(EventLog::from_text(&log.to_text()), log);
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(LogRecord::parse("abc\t1\tx", 1).is_err());
        assert!(LogRecord::parse("1.0\tz\tx", 1).is_err());
        assert!(LogRecord::parse("1.0\t1\tx\tnovalue", 1).is_err());
        let log = EventLog::from_text("0\t-\tboot\tms=1\n");
        assert!(replay(&log).is_err());
    }
}
