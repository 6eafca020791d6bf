//! Event logs from XES and CSV.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use flate2::read::MultiGzDecoder;
use indexmap::IndexMap;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("bad timestamp '{value}' on line {line}")]
    BadTimestamp { line: u64, value: String },
    #[error("malformed CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogWarning {
    /// An event without `concept:name` was skipped.
    MissingActivity { trace: usize, event: usize },
    EmptyLog,
}

impl fmt::Display for LogWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogWarning::MissingActivity { trace, event } => {
                write!(f, "event {event} of trace {trace} has no concept:name and was skipped")
            }
            LogWarning::EmptyLog => f.write_str("the log contains no traces"),
        }
    }
}

/// Multiset of traces, keyed by activity sequence in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub variants: IndexMap<Vec<String>, usize>,
    pub source: Option<String>,
    pub warnings: Vec<LogWarning>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_traces<I, T, A>(traces: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = A>,
        A: Into<String>,
    {
        let mut log = EventLog::new();
        for t in traces {
            log.push(t.into_iter().map(Into::into).collect());
        }
        log
    }

    pub fn push(&mut self, trace: Vec<String>) {
        *self.variants.entry(trace).or_insert(0) += 1;
    }

    pub fn trace_count(&self) -> usize {
        self.variants.values().sum()
    }

    pub fn variant_count(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    fn finish(mut self) -> Self {
        if self.variants.is_empty() {
            self.warnings.push(LogWarning::EmptyLog);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// Keep only XES events whose `lifecycle:transition` is `complete`.
    pub filter_complete: bool,
}

fn attribute(start: &BytesStart<'_>, name: &[u8]) -> Result<Option<String>, LogError> {
    for attr in start.attributes() {
        let attr = attr.map_err(|e| LogError::MalformedXml(e.to_string()))?;
        if attr.key.as_ref() == name {
            let value = attr.unescape_value().map_err(|e| LogError::MalformedXml(e.to_string()))?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

#[derive(Default)]
struct PendingEvent {
    activity: Option<String>,
    lifecycle: Option<String>,
}

/// Parses the `log/trace/event` subset of XES. Only attributes that are
/// direct children of an `event` are read.
pub fn parse_xes<R: BufRead>(input: R, options: &ReadOptions) -> Result<EventLog, LogError> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut stack: Vec<Vec<u8>> = Vec::new();
    let mut log = EventLog::new();
    let mut trace: Option<Vec<String>> = None;
    let mut event: Option<PendingEvent> = None;
    let mut trace_index = 0usize;
    let mut event_index = 0usize;
    let mut saw_log = false;

    loop {
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| LogError::MalformedXml(format!("at byte {}: {e}", reader.error_position())))?;
        match ev {
            Event::Start(ref start) | Event::Empty(ref start) => {
                let is_empty = matches!(ev, Event::Empty(_));
                let name = start.local_name().as_ref().to_vec();
                let parent = stack.last().map(Vec::as_slice);
                match (name.as_slice(), parent) {
                    (b"log", None) => saw_log = true,
                    (b"trace", Some(b"log")) => {
                        trace = Some(Vec::new());
                        event_index = 0;
                    }
                    (b"event", Some(b"trace")) => event = Some(PendingEvent::default()),
                    (_, Some(b"event")) if stack.len() == 3 => {
                        if let Some(pending) = event.as_mut() {
                            match attribute(start, b"key")?.as_deref() {
                                Some("concept:name") => pending.activity = attribute(start, b"value")?,
                                Some("lifecycle:transition") => pending.lifecycle = attribute(start, b"value")?,
                                _ => {}
                            }
                        }
                    }
                    _ => {}
                }
                if is_empty {
                    close(&name, &mut trace, &mut event, &mut log, options, trace_index, &mut event_index);
                    if name == b"trace" && stack.last().map(Vec::as_slice) == Some(b"log") {
                        trace_index += 1;
                    }
                } else {
                    stack.push(name);
                }
            }
            Event::End(ref end) => {
                let name = end.local_name().as_ref().to_vec();
                if stack.pop().as_deref() != Some(name.as_slice()) {
                    return Err(LogError::MalformedXml("mismatched closing tag".into()));
                }
                if stack.len() <= 2 {
                    let was_trace = name == b"trace" && stack.len() == 1;
                    close(&name, &mut trace, &mut event, &mut log, options, trace_index, &mut event_index);
                    if was_trace {
                        trace_index += 1;
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(LogError::MalformedXml("unexpected end of document".into()));
    }
    if !saw_log {
        return Err(LogError::MalformedXml("no <log> root element".into()));
    }
    Ok(log.finish())
}

fn close(
    name: &[u8],
    trace: &mut Option<Vec<String>>,
    event: &mut Option<PendingEvent>,
    log: &mut EventLog,
    options: &ReadOptions,
    trace_index: usize,
    event_index: &mut usize,
) {
    match name {
        b"event" => {
            if let (Some(pending), Some(events)) = (event.take(), trace.as_mut()) {
                let keep = !options.filter_complete
                    || pending.lifecycle.as_deref().is_some_and(|l| l.eq_ignore_ascii_case("complete"));
                match pending.activity {
                    Some(activity) if keep => events.push(activity),
                    Some(_) => {}
                    None => log.warnings.push(LogWarning::MissingActivity {
                        trace: trace_index,
                        event: *event_index,
                    }),
                }
                *event_index += 1;
            }
        }
        b"trace" => {
            if let Some(events) = trace.take() {
                log.push(events);
            }
        }
        _ => {}
    }
}

fn parse_timestamp(text: &str) -> Option<NaiveDateTime> {
    let text = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.naive_utc());
    }
    for format in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(text, format) {
            return Some(dt);
        }
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Parses a CSV with `case_id` and `activity` columns and an optional
/// `timestamp` column. Within a case, events are ordered by timestamp when
/// present (ties keep file order), else by file order.
pub fn parse_csv<R: Read>(input: R) -> Result<EventLog, LogError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) if e.is_io_error() => return Err(LogError::Csv(e.to_string())),
        Err(_) => csv::StringRecord::new(),
    };
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Ok(EventLog::new().finish());
    }
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let case_col = column("case_id").ok_or_else(|| LogError::MissingColumn("case_id".into()))?;
    let activity_col = column("activity").ok_or_else(|| LogError::MissingColumn("activity".into()))?;
    let time_col = column("timestamp");

    let mut cases: IndexMap<String, Vec<(Option<NaiveDateTime>, String)>> = IndexMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| LogError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |idx: usize, name: &str| {
            record
                .get(idx)
                .map(str::to_string)
                .ok_or_else(|| LogError::Csv(format!("line {line}: missing {name} field")))
        };
        let case = field(case_col, "case_id")?;
        let activity = field(activity_col, "activity")?;
        let time = match time_col {
            Some(idx) => {
                let raw = field(idx, "timestamp")?;
                if raw.is_empty() {
                    None
                } else {
                    Some(parse_timestamp(&raw).ok_or(LogError::BadTimestamp { line, value: raw })?)
                }
            }
            None => None,
        };
        cases.entry(case).or_default().push((time, activity));
    }

    let mut log = EventLog::new();
    for (_, mut events) in cases {
        // Stable: equal timestamps keep file order; missing ones sort first.
        events.sort_by_key(|(time, _)| *time);
        log.push(events.into_iter().map(|(_, a)| a).collect());
    }
    Ok(log.finish())
}

/// Writes one row per event with generated case ids `case_1`, `case_2`, ….
pub fn write_csv<W: Write>(log: &EventLog, output: W) -> Result<(), LogError> {
    let mut writer = csv::Writer::from_writer(output);
    let csv_err = |e: csv::Error| LogError::Csv(e.to_string());
    writer.write_record(["case_id", "activity"]).map_err(csv_err)?;
    let mut case = 0usize;
    for (trace, &multiplicity) in &log.variants {
        for _ in 0..multiplicity {
            case += 1;
            let id = format!("case_{case}");
            for activity in trace {
                writer.write_record([id.as_str(), activity.as_str()]).map_err(csv_err)?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Decompresses gzip input transparently.
fn open_maybe_gzip(path: &Path) -> Result<Box<dyn BufRead>, LogError> {
    let mut file = BufReader::new(File::open(path)?);
    let magic = file.fill_buf()?;
    if magic.starts_with(&[0x1f, 0x8b]) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(file))
    }
}

/// Reads a XES or CSV log, optionally gzip-compressed. The format is taken
/// from the extension (`.xes`, `.csv`, each optionally followed by `.gz`),
/// falling back to sniffing for a leading `<`.
pub fn read_log_file(path: &Path, options: &ReadOptions) -> Result<EventLog, LogError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("").to_ascii_lowercase();
    let stem = name.strip_suffix(".gz").unwrap_or(&name);
    let mut input = open_maybe_gzip(path)?;
    let is_xes = if stem.ends_with(".xes") || stem.ends_with(".xml") {
        true
    } else if stem.ends_with(".csv") {
        false
    } else {
        let head = input.fill_buf()?;
        let text = String::from_utf8_lossy(&head[..head.len().min(64)]);
        text.trim_start_matches('\u{feff}').trim_start().starts_with('<')
    };
    let mut log = if is_xes { parse_xes(input, options)? } else { parse_csv(input)? };
    log.source = Some(path.display().to_string());
    Ok(log)
}

/// Counts events per activity over all traces.
pub fn activity_counts(log: &EventLog) -> HashMap<&str, usize> {
    let mut counts = HashMap::new();
    for (trace, &m) in &log.variants {
        for a in trace {
            *counts.entry(a.as_str()).or_insert(0) += m;
        }
    }
    counts
}
