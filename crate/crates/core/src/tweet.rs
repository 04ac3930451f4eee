//! Typed view of one archived post and the archive reader.
//!
//! Records follow the classic platform tweet object. Only the fields the
//! analytics need are mapped; everything else in the raw line is ignored
//! and the raw line itself is never rewritten.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde_json::{json, Value};

use crate::error::ParseError;

/// Provenance of a retweet, taken from the embedded original post.
#[derive(Debug, Clone, PartialEq)]
pub struct RetweetOf {
    pub id: u64,
    pub author: String,
    /// Text of the embedded copy, used to display originals that were never
    /// observed directly.
    pub text: String,
    /// The platform's cumulative retweet counter as embedded at capture time.
    pub retweet_count: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinates {
    pub latitude: f64,
    pub longitude: f64,
}

impl Coordinates {
    pub fn new(latitude: f64, longitude: f64) -> Option<Self> {
        let valid = latitude.is_finite()
            && longitude.is_finite()
            && (-90.0..=90.0).contains(&latitude)
            && (-180.0..=180.0).contains(&longitude);
        valid.then_some(Coordinates { latitude, longitude })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    pub id: u64,
    pub created_at: DateTime<Utc>,
    pub author: String,
    pub text: String,
    pub hashtags: Vec<String>,
    pub retweet_of: Option<RetweetOf>,
    pub reply_to: Option<String>,
    pub coords: Option<Coordinates>,
    /// Cumulative retweet counter of this post as embedded in the record.
    pub retweet_count: Option<u64>,
}

impl Tweet {
    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }
}

/// Line accounting for one pass over an archive.
///
/// `total_lines == parsed + skipped_malformed + duplicates_dropped` always holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub total_lines: u64,
    pub parsed: u64,
    pub skipped_malformed: u64,
    pub duplicates_dropped: u64,
}

const CLASSIC_TIMESTAMP: &str = "%a %b %d %H:%M:%S %z %Y";

/// Parses a timestamp in the classic platform layout
/// (`Thu Mar 19 18:00:00 +0000 2015`) or, failing that, RFC 3339 / ISO-8601.
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    DateTime::parse_from_str(raw, CLASSIC_TIMESTAMP)
        .or_else(|_| DateTime::parse_from_rfc3339(raw))
        .map(|t| t.with_timezone(&Utc))
        .ok()
}

/// Extracts `#tag` occurrences from free text. A tag is `#` followed by
/// one or more letters, digits or underscores; tags are lowercased.
pub fn hashtags_from_text(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '#' {
            continue;
        }
        let start = i + 1;
        let mut end = start;
        while let Some(&(j, n)) = chars.peek() {
            if n.is_alphanumeric() || n == '_' {
                end = j + n.len_utf8();
                chars.next();
            } else {
                break;
            }
        }
        if end > start {
            tags.push(text[start..end].to_lowercase());
        }
    }
    tags
}

fn field<'a>(record: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.')
        .try_fold(record, |v, key| v.get(key))
        .filter(|v| !v.is_null())
}

fn id_field(record: &Value, name: &'static str) -> Result<u64, ParseError> {
    let value = field(record, name).ok_or(ParseError::MissingField(name))?;
    let id = match value {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.parse().ok(),
        _ => None,
    };
    match id {
        Some(id) if id > 0 => Ok(id),
        _ => Err(ParseError::InvalidField(name)),
    }
}

fn screen_name(record: &Value, name: &'static str) -> Result<String, ParseError> {
    let value = field(record, name).ok_or(ParseError::MissingField(name))?;
    let s = value.as_str().ok_or(ParseError::InvalidField(name))?;
    let s = s.trim_start_matches('@');
    if s.is_empty() {
        return Err(ParseError::InvalidField(name));
    }
    Ok(s.to_string())
}

fn counter(record: &Value, name: &str) -> Option<u64> {
    field(record, name).and_then(Value::as_u64)
}

fn coordinate_pair(value: &Value) -> Option<(f64, f64)> {
    let arr = value.as_array()?;
    if arr.len() != 2 {
        return None;
    }
    Some((arr[0].as_f64()?, arr[1].as_f64()?))
}

fn coordinates(record: &Value) -> Result<Option<Coordinates>, ParseError> {
    if let Some(geojson) = field(record, "coordinates.coordinates") {
        let (lon, lat) = coordinate_pair(geojson).ok_or(ParseError::InvalidField("coordinates"))?;
        return Coordinates::new(lat, lon)
            .map(Some)
            .ok_or(ParseError::InvalidField("coordinates"));
    }
    if let Some(legacy) = field(record, "geo.coordinates") {
        let (lat, lon) = coordinate_pair(legacy).ok_or(ParseError::InvalidField("geo"))?;
        return Coordinates::new(lat, lon)
            .map(Some)
            .ok_or(ParseError::InvalidField("geo"));
    }
    Ok(None)
}

fn hashtags(record: &Value, text: &str) -> Vec<String> {
    match field(record, "entities.hashtags").and_then(Value::as_array) {
        Some(entries) => entries
            .iter()
            .filter_map(|h| h.get("text").and_then(Value::as_str))
            .map(|t| t.trim_start_matches('#').to_lowercase())
            .filter(|t| !t.is_empty())
            .collect(),
        None => hashtags_from_text(text),
    }
}

/// Parses one archive line into a [`Tweet`].
pub fn parse_tweet(line: &str) -> Result<Tweet, ParseError> {
    let record: Value = serde_json::from_str(line).map_err(|e| ParseError::Syntax(e.to_string()))?;
    if !record.is_object() {
        return Err(ParseError::Syntax("record is not a JSON object".into()));
    }

    let id = id_field(&record, "id")?;
    let created_raw = field(&record, "created_at")
        .ok_or(ParseError::MissingField("created_at"))?
        .as_str()
        .ok_or(ParseError::InvalidField("created_at"))?;
    let created_at = parse_timestamp(created_raw).ok_or(ParseError::InvalidField("created_at"))?;
    let author = screen_name(&record, "user.screen_name")?;
    let text = field(&record, "text")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();

    let retweet_of = match field(&record, "retweeted_status") {
        Some(original) if original.is_object() => {
            let original_id = id_field(original, "id").map_err(|_| ParseError::InvalidField("retweeted_status.id"))?;
            if original_id == id {
                return Err(ParseError::InvalidField("retweeted_status.id"));
            }
            let original_author = screen_name(original, "user.screen_name")
                .map_err(|_| ParseError::InvalidField("retweeted_status.user.screen_name"))?;
            Some(RetweetOf {
                id: original_id,
                author: original_author,
                text: field(original, "text")
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .to_string(),
                retweet_count: counter(original, "retweet_count"),
            })
        }
        Some(_) => return Err(ParseError::InvalidField("retweeted_status")),
        None => None,
    };

    let reply_to = field(&record, "in_reply_to_screen_name")
        .and_then(Value::as_str)
        .map(|s| s.trim_start_matches('@'))
        .filter(|s| !s.is_empty())
        .map(str::to_string);

    Ok(Tweet {
        id,
        created_at,
        hashtags: hashtags(&record, &text),
        author,
        text,
        retweet_of,
        reply_to,
        coords: coordinates(&record)?,
        retweet_count: counter(&record, "retweet_count"),
    })
}

/// Encodes a tweet as a platform-style record, the inverse of [`parse_tweet`]
/// for every field the model carries.
pub fn to_record(tweet: &Tweet) -> Value {
    let mut record = json!({
        "id": tweet.id,
        "id_str": tweet.id.to_string(),
        "created_at": tweet.created_at.format(CLASSIC_TIMESTAMP).to_string(),
        "user": { "screen_name": tweet.author },
        "text": tweet.text,
        "entities": {
            "hashtags": tweet.hashtags.iter().map(|h| json!({ "text": h })).collect::<Vec<_>>(),
        },
        "in_reply_to_screen_name": tweet.reply_to,
        "coordinates": tweet.coords.map(|c| json!({
            "type": "Point",
            "coordinates": [c.longitude, c.latitude],
        })),
    });
    if let Some(count) = tweet.retweet_count {
        record["retweet_count"] = json!(count);
    }
    if let Some(original) = &tweet.retweet_of {
        let mut embedded = json!({
            "id": original.id,
            "user": { "screen_name": original.author },
            "text": original.text,
        });
        if let Some(count) = original.retweet_count {
            embedded["retweet_count"] = json!(count);
        }
        record["retweeted_status"] = embedded;
    }
    record
}

/// Strips the line terminator (`\n` or `\r\n`) from a raw line.
pub(crate) fn trim_line_end(line: &[u8]) -> &[u8] {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    line.strip_suffix(b"\r").unwrap_or(line)
}

/// Parses an archive from any buffered reader. See [`read_archive`].
pub fn read_records<R: BufRead>(mut reader: R, dedupe: bool) -> io::Result<(Vec<Tweet>, ParseStats)> {
    let mut stats = ParseStats::default();
    let mut tweets = Vec::new();
    let mut seen = HashSet::new();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        stats.total_lines += 1;
        let parsed = std::str::from_utf8(trim_line_end(&buf))
            .map_err(|e| ParseError::Syntax(e.to_string()))
            .and_then(parse_tweet);
        match parsed {
            Ok(tweet) => {
                if dedupe && !seen.insert(tweet.id) {
                    stats.duplicates_dropped += 1;
                } else {
                    stats.parsed += 1;
                    tweets.push(tweet);
                }
            }
            Err(err) => {
                log::debug!("line {}: {err}", stats.total_lines);
                stats.skipped_malformed += 1;
            }
        }
    }
    Ok((tweets, stats))
}

/// The files making up an archive: the path itself, or for a directory
/// (as written by the collector) its `*.jsonl` files in name order.
pub fn archive_files(path: &Path) -> io::Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path)? {
        let p = entry?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "jsonl") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Reads a line-delimited archive file or directory. Malformed lines are
/// counted and skipped; with `dedupe`, later occurrences of an id are
/// dropped.
pub fn read_archive(path: impl AsRef<Path>, dedupe: bool) -> io::Result<(Vec<Tweet>, ParseStats)> {
    let files = archive_files(path.as_ref())?;
    let readers = files.iter().map(File::open).collect::<io::Result<Vec<_>>>()?;
    let chained = readers
        .into_iter()
        .fold(Box::new(io::empty()) as Box<dyn io::Read>, |acc, f| {
            Box::new(acc.chain(LineTerminated::new(f)))
        });
    read_records(BufReader::new(chained), dedupe)
}

/// Appends a newline to a file whose last line lacks one, so concatenated
/// files never merge lines.
struct LineTerminated<R> {
    inner: R,
    last: Option<u8>,
    done: bool,
}

impl<R> LineTerminated<R> {
    fn new(inner: R) -> Self {
        LineTerminated {
            inner,
            last: None,
            done: false,
        }
    }
}

impl<R: io::Read> io::Read for LineTerminated<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if self.done || buf.is_empty() {
            return Ok(0);
        }
        let n = self.inner.read(buf)?;
        if n > 0 {
            self.last = Some(buf[n - 1]);
            return Ok(n);
        }
        self.done = true;
        match self.last {
            Some(b) if b != b'\n' => {
                buf[0] = b'\n';
                Ok(1)
            }
            _ => Ok(0),
        }
    }
}
