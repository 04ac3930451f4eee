//! Source abstractions and in-memory scripted sources.

use std::io;
use std::time::Duration;

use chrono::{DateTime, Utc};

use super::clock::VirtualClock;

/// Result of polling an open connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Poll {
    /// One record, terminator stripped, bytes as received.
    Line(Vec<u8>),
    /// Nothing arrived yet; poll again.
    Idle,
    /// The peer closed the connection.
    Closed,
}

pub trait Connection {
    /// An `Err` is treated like `Closed`: the connection is gone.
    fn poll_line(&mut self) -> io::Result<Poll>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConnectError {
    /// The source has nothing more to deliver; the run ends normally.
    Exhausted,
    /// Retry after backing off.
    Transient(String),
    /// Authentication or request refused; retrying will not help.
    Rejected(String),
}

pub trait StreamSource {
    fn connect(&mut self, track: &[String]) -> Result<Box<dyn Connection + '_>, ConnectError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchKind {
    Recent,
    Popular,
}

impl SearchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchKind::Recent => "recent",
            SearchKind::Popular => "popular",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchQuery {
    pub terms: Vec<String>,
    pub kind: SearchKind,
}

impl SearchQuery {
    /// Terms joined as an OR query.
    pub fn query_string(&self) -> String {
        self.terms.join(" OR ")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchPage {
    pub lines: Vec<Vec<u8>>,
    pub next_cursor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchError {
    /// Request budget spent; retry once `reset_at` has passed.
    RateLimited {
        reset_at: DateTime<Utc>,
    },
    Transient(String),
    Rejected(String),
}

pub trait SearchSource {
    fn fetch(&mut self, query: &SearchQuery, cursor: Option<&str>) -> Result<SearchPage, SearchError>;
}

/// Replay plan shared by the in-memory sources and the TCP mock server.
#[derive(Debug, Clone)]
pub struct MockScript {
    pub lines: Vec<String>,
    /// Drop the stream connection once this many lines have been delivered
    /// in total. Each point fires once.
    pub disconnect_after: Vec<usize>,
    /// Lines re-sent at the start of each reconnection, as live streams do.
    pub redeliver: usize,
    /// Emit a blank keep-alive line after every `n` records.
    pub keepalive_every: Option<usize>,
    /// Real-time pause between lines (TCP server only).
    pub line_delay: Duration,
    /// Search page size.
    pub page_size: usize,
    /// Zero-based search request numbers answered with a rate-limit response.
    pub rate_limited_requests: Vec<usize>,
    pub rate_limit_reset: DateTime<Utc>,
}

impl MockScript {
    pub fn new(lines: Vec<String>) -> Self {
        MockScript {
            lines,
            disconnect_after: Vec::new(),
            redeliver: 0,
            keepalive_every: None,
            line_delay: Duration::ZERO,
            page_size: 100,
            rate_limited_requests: Vec::new(),
            rate_limit_reset: DateTime::UNIX_EPOCH,
        }
    }

    pub fn disconnect_after(mut self, points: &[usize]) -> Self {
        self.disconnect_after = points.to_vec();
        self.disconnect_after.sort_unstable();
        self
    }

    pub fn redeliver(mut self, n: usize) -> Self {
        self.redeliver = n;
        self
    }

    pub fn keepalive_every(mut self, n: usize) -> Self {
        self.keepalive_every = Some(n.max(1));
        self
    }

    pub fn line_delay(mut self, delay: Duration) -> Self {
        self.line_delay = delay;
        self
    }

    pub fn page_size(mut self, n: usize) -> Self {
        self.page_size = n.max(1);
        self
    }

    pub fn rate_limit(mut self, requests: &[usize], reset_at: DateTime<Utc>) -> Self {
        self.rate_limited_requests = requests.to_vec();
        self.rate_limit_reset = reset_at;
        self
    }
}

/// Delivery bookkeeping for one replayed stream.
#[derive(Debug, Clone, Default)]
pub(crate) struct StreamCursor {
    delivered: usize,
    connections: usize,
}

/// Line range sent over one connection.
pub(crate) struct Segment {
    pub start: usize,
    pub end: usize,
}

impl StreamCursor {
    /// `None` once every line has been delivered.
    pub fn next_segment(&mut self, script: &MockScript) -> Option<Segment> {
        if self.delivered >= script.lines.len() {
            return None;
        }
        let start = if self.connections == 0 {
            self.delivered
        } else {
            self.delivered.saturating_sub(script.redeliver)
        };
        self.connections += 1;
        let end = script
            .disconnect_after
            .iter()
            .find(|&&p| p > self.delivered)
            .map_or(script.lines.len(), |&p| p.min(script.lines.len()));
        self.delivered = end;
        Some(Segment { start, end })
    }
}

/// In-memory stream replaying a [`MockScript`].
pub struct ScriptedStream {
    script: MockScript,
    cursor: StreamCursor,
    clock: Option<(VirtualClock, Duration)>,
    requests: Vec<Vec<String>>,
}

impl ScriptedStream {
    pub fn new(script: MockScript) -> Self {
        ScriptedStream {
            script,
            cursor: StreamCursor::default(),
            clock: None,
            requests: Vec::new(),
        }
    }

    /// Advances `clock` by `per_line` for every line delivered.
    pub fn with_clock(mut self, clock: VirtualClock, per_line: Duration) -> Self {
        self.clock = Some((clock, per_line));
        self
    }

    /// Track terms sent with each connection attempt.
    pub fn requests(&self) -> &[Vec<String>] {
        &self.requests
    }
}

struct ScriptedConnection<'a> {
    lines: std::vec::IntoIter<Vec<u8>>,
    clock: Option<&'a (VirtualClock, Duration)>,
}

impl Connection for ScriptedConnection<'_> {
    fn poll_line(&mut self) -> io::Result<Poll> {
        match self.lines.next() {
            Some(line) => {
                if let Some((clock, step)) = self.clock {
                    clock.advance(*step);
                }
                Ok(Poll::Line(line))
            }
            None => Ok(Poll::Closed),
        }
    }
}

pub(crate) fn segment_lines(script: &MockScript, segment: &Segment) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for (n, line) in script.lines[segment.start..segment.end].iter().enumerate() {
        out.push(line.as_bytes().to_vec());
        if let Some(every) = script.keepalive_every {
            if (n + 1) % every == 0 {
                out.push(Vec::new());
            }
        }
    }
    out
}

impl StreamSource for ScriptedStream {
    fn connect(&mut self, track: &[String]) -> Result<Box<dyn Connection + '_>, ConnectError> {
        self.requests.push(track.to_vec());
        let segment = self.cursor.next_segment(&self.script).ok_or(ConnectError::Exhausted)?;
        let lines = segment_lines(&self.script, &segment);
        Ok(Box::new(ScriptedConnection {
            lines: lines.into_iter(),
            clock: self.clock.as_ref(),
        }))
    }
}

/// Shared paging logic for the scripted search sources.
#[derive(Debug, Default)]
pub(crate) struct SearchCursor {
    requests: usize,
}

impl SearchCursor {
    pub fn answer(&mut self, script: &MockScript, cursor: Option<&str>) -> Result<SearchPage, SearchError> {
        let request = self.requests;
        self.requests += 1;
        if script.rate_limited_requests.contains(&request) {
            return Err(SearchError::RateLimited {
                reset_at: script.rate_limit_reset,
            });
        }
        let start: usize = match cursor {
            None => 0,
            Some(c) => c
                .parse()
                .map_err(|_| SearchError::Rejected(format!("bad cursor `{c}`")))?,
        };
        let start = start.min(script.lines.len());
        let end = (start + script.page_size).min(script.lines.len());
        Ok(SearchPage {
            lines: script.lines[start..end].iter().map(|l| l.as_bytes().to_vec()).collect(),
            next_cursor: (end < script.lines.len()).then(|| end.to_string()),
        })
    }
}

/// In-memory paged search over a [`MockScript`].
pub struct ScriptedSearch {
    script: MockScript,
    cursor: SearchCursor,
}

impl ScriptedSearch {
    pub fn new(script: MockScript) -> Self {
        ScriptedSearch {
            script,
            cursor: SearchCursor::default(),
        }
    }
}

impl SearchSource for ScriptedSearch {
    fn fetch(&mut self, _query: &SearchQuery, cursor: Option<&str>) -> Result<SearchPage, SearchError> {
        self.cursor.answer(&self.script, cursor)
    }
}
