//! Keyword-filtered collection into daily JSONL archives.
//!
//! A run reads records from a [`StreamSource`] or [`SearchSource`], keeps
//! the ones matching the track terms (see [`matches_track`]) and hands the
//! raw bytes to a writer thread through a bounded queue. Archives live at
//! `<archive_dir>/<event_name>/<YYYY-MM-DD>.jsonl`, keyed by the UTC date
//! of receipt. An id is written at most once per run.

mod backoff;
mod clock;
mod credentials;
mod http;
mod mock;
mod oauth;
mod source;
mod track;

use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, SyncSender};
use std::thread::JoinHandle;
use std::time::Duration;

use chrono::{DateTime, NaiveDate, Utc};

pub use backoff::Backoff;
pub use clock::{Clock, StopSignal, SystemClock, VirtualClock};
pub use credentials::{load_credentials, Credentials};
pub use http::{HttpSearchSource, HttpStreamSource, NEXT_CURSOR_HEADER, RATE_LIMIT_RESET_HEADER};
pub use mock::{MockLog, MockServer};
pub use oauth::{percent_encode, OAuth1Signer, RequestSigner};
pub use source::{
    ConnectError, Connection, MockScript, Poll, ScriptedSearch, ScriptedStream, SearchError, SearchKind, SearchPage,
    SearchQuery, SearchSource, StreamSource,
};
pub use track::{matches_track, tokens};

use crate::error::CollectError;
use crate::tweet::parse_tweet;

/// Lines buffered between the reader and the archive writer.
pub const QUEUE_CAPACITY: usize = 10_000;

/// Consecutive failed search requests tolerated before giving up.
const MAX_SEARCH_RETRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Stream,
    SearchRecent,
    SearchPopular,
}

impl Mode {
    pub fn search_kind(self) -> Option<SearchKind> {
        match self {
            Mode::Stream => None,
            Mode::SearchRecent => Some(SearchKind::Recent),
            Mode::SearchPopular => Some(SearchKind::Popular),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stream" => Ok(Mode::Stream),
            "search-recent" => Ok(Mode::SearchRecent),
            "search-popular" => Ok(Mode::SearchPopular),
            other => Err(format!(
                "unknown mode `{other}` (expected stream, search-recent or search-popular)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Stream => "stream",
            Mode::SearchRecent => "search-recent",
            Mode::SearchPopular => "search-popular",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CollectionJob {
    pub mode: Mode,
    pub event_name: String,
    pub track_terms: Vec<String>,
    pub archive_dir: PathBuf,
    /// Search mode stops after this many pages.
    pub page_limit: Option<usize>,
}

impl CollectionJob {
    pub fn new(mode: Mode, event_name: &str, track_terms: &[&str], archive_dir: impl Into<PathBuf>) -> Self {
        CollectionJob {
            mode,
            event_name: event_name.to_string(),
            track_terms: track_terms.iter().map(|t| t.to_string()).collect(),
            archive_dir: archive_dir.into(),
            page_limit: None,
        }
    }

    pub fn validate(&self) -> Result<(), CollectError> {
        let name_ok = !self.event_name.is_empty()
            && self
                .event_name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !name_ok {
            return Err(CollectError::InvalidJob(format!(
                "event name `{}` must match [A-Za-z0-9_-]+",
                self.event_name
            )));
        }
        if self.track_terms.iter().all(|t| t.trim().is_empty()) {
            return Err(CollectError::InvalidJob("at least one track term is required".into()));
        }
        Ok(())
    }

    pub fn event_dir(&self) -> PathBuf {
        self.archive_dir.join(&self.event_name)
    }
}

/// Counters for one run. `written <= matched <= received`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectionStats {
    /// Non-blank lines received.
    pub received: u64,
    /// Received lines that parsed and matched the track terms.
    pub matched: u64,
    pub written: u64,
    pub malformed: u64,
    /// Matching lines whose id was already written this run.
    pub duplicates: u64,
    pub reconnects: u64,
    pub rate_limit_waits: u64,
    pub pages: u64,
    pub started_at: DateTime<Utc>,
    pub ended_at: DateTime<Utc>,
}

impl CollectionStats {
    fn new(started_at: DateTime<Utc>) -> Self {
        CollectionStats {
            received: 0,
            matched: 0,
            written: 0,
            malformed: 0,
            duplicates: 0,
            reconnects: 0,
            rate_limit_waits: 0,
            pages: 0,
            started_at,
            ended_at: started_at,
        }
    }
}

impl fmt::Display for CollectionStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "received {} matched {} written {} malformed {} duplicates {} reconnects {} rate-limit waits {}",
            self.received,
            self.matched,
            self.written,
            self.malformed,
            self.duplicates,
            self.reconnects,
            self.rate_limit_waits
        )
    }
}

/// Appends raw lines to per-day files, rotating on the receipt date.
pub struct ArchiveWriter {
    dir: PathBuf,
    current: Option<(NaiveDate, BufWriter<File>)>,
}

impl ArchiveWriter {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ArchiveWriter { dir, current: None })
    }

    pub fn path_for(dir: &Path, date: NaiveDate) -> PathBuf {
        dir.join(format!("{}.jsonl", date.format("%Y-%m-%d")))
    }

    pub fn append(&mut self, received_at: DateTime<Utc>, line: &[u8]) -> io::Result<()> {
        let date = received_at.date_naive();
        if self.current.as_ref().is_none_or(|(d, _)| *d != date) {
            self.flush()?;
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(Self::path_for(&self.dir, date))?;
            self.current = Some((date, BufWriter::new(file)));
        }
        let (_, out) = self.current.as_mut().expect("file opened above");
        out.write_all(line)?;
        out.write_all(b"\n")
    }

    pub fn flush(&mut self) -> io::Result<()> {
        match self.current.as_mut() {
            Some((_, out)) => out.flush(),
            None => Ok(()),
        }
    }
}

type Queued = (DateTime<Utc>, Vec<u8>);

fn spawn_writer(mut writer: ArchiveWriter, rx: Receiver<Queued>) -> JoinHandle<io::Result<u64>> {
    std::thread::spawn(move || {
        let mut written = 0;
        while let Ok((at, line)) = rx.recv() {
            writer.append(at, &line)?;
            written += 1;
            // Drain whatever is queued, then flush while idle.
            while let Ok((at, line)) = rx.try_recv() {
                writer.append(at, &line)?;
                written += 1;
            }
            writer.flush()?;
        }
        writer.flush()?;
        Ok(written)
    })
}

/// Filtering, dedupe and handoff shared by both modes.
struct Pipeline<'a> {
    track: &'a [String],
    clock: &'a dyn Clock,
    seen: HashSet<u64>,
    tx: Option<SyncSender<Queued>>,
    writer: Option<JoinHandle<io::Result<u64>>>,
    stats: CollectionStats,
}

impl<'a> Pipeline<'a> {
    fn start(job: &'a CollectionJob, clock: &'a dyn Clock) -> Result<Self, CollectError> {
        job.validate()?;
        let writer = ArchiveWriter::open(job.event_dir()).map_err(CollectError::Archive)?;
        let (tx, rx) = mpsc::sync_channel(QUEUE_CAPACITY);
        Ok(Pipeline {
            track: &job.track_terms,
            clock,
            seen: HashSet::new(),
            tx: Some(tx),
            writer: Some(spawn_writer(writer, rx)),
            stats: CollectionStats::new(clock.now()),
        })
    }

    /// Returns false once the writer has gone away.
    fn offer(&mut self, raw: Vec<u8>) -> bool {
        if raw.iter().all(u8::is_ascii_whitespace) {
            return true;
        }
        self.stats.received += 1;
        let tweet = match std::str::from_utf8(&raw)
            .map_err(|e| e.to_string())
            .and_then(|s| parse_tweet(s).map_err(|e| e.to_string()))
        {
            Ok(tweet) => tweet,
            Err(e) => {
                log::debug!("skipping malformed line: {e}");
                self.stats.malformed += 1;
                return true;
            }
        };
        if !matches_track(&tweet, self.track) {
            return true;
        }
        self.stats.matched += 1;
        if !self.seen.insert(tweet.id) {
            self.stats.duplicates += 1;
            return true;
        }
        let tx = self.tx.as_ref().expect("queue open while running");
        tx.send((self.clock.now(), raw)).is_ok()
    }

    fn finish(mut self) -> Result<CollectionStats, CollectError> {
        drop(self.tx.take());
        let written = self
            .writer
            .take()
            .expect("writer joined once")
            .join()
            .map_err(|_| CollectError::Archive(io::Error::other("archive writer panicked")))?
            .map_err(CollectError::Archive)?;
        self.stats.written = written;
        self.stats.ended_at = self.clock.now();
        Ok(self.stats)
    }
}

/// Follows a stream until it is exhausted or `stop` is raised, reconnecting
/// with [`Backoff`] after every disconnect or transient failure.
pub fn collect_stream(
    job: &CollectionJob,
    source: &mut dyn StreamSource,
    clock: &dyn Clock,
    stop: &StopSignal,
) -> Result<CollectionStats, CollectError> {
    collect_stream_with(job, source, clock, stop, Backoff::default())
}

pub fn collect_stream_with(
    job: &CollectionJob,
    source: &mut dyn StreamSource,
    clock: &dyn Clock,
    stop: &StopSignal,
    mut backoff: Backoff,
) -> Result<CollectionStats, CollectError> {
    if job.mode != Mode::Stream {
        return Err(CollectError::InvalidJob(format!(
            "collect_stream needs stream mode, got {}",
            job.mode
        )));
    }
    let mut pipeline = Pipeline::start(job, clock)?;
    let mut connected_once = false;
    let mut writer_gone = false;

    'run: while !stop.is_stopped() {
        match source.connect(&job.track_terms) {
            Ok(mut conn) => {
                if connected_once {
                    pipeline.stats.reconnects += 1;
                }
                connected_once = true;
                let connected_at = clock.now();
                loop {
                    if stop.is_stopped() {
                        break 'run;
                    }
                    match conn.poll_line() {
                        Ok(Poll::Line(raw)) => {
                            if !pipeline.offer(raw) {
                                writer_gone = true;
                                break 'run;
                            }
                        }
                        Ok(Poll::Idle) => {}
                        Ok(Poll::Closed) => break,
                        Err(e) => {
                            log::warn!("stream read failed: {e}");
                            break;
                        }
                    }
                }
                let uptime = (clock.now() - connected_at).to_std().unwrap_or(Duration::ZERO);
                backoff.on_disconnect(uptime);
                log::info!("stream disconnected after {}s", uptime.as_secs());
            }
            Err(ConnectError::Exhausted) => break,
            Err(ConnectError::Rejected(msg)) => {
                let _ = pipeline.finish();
                return Err(CollectError::Rejected(msg));
            }
            Err(ConnectError::Transient(msg)) => log::warn!("connect failed: {msg}"),
        }
        if stop.is_stopped() {
            break;
        }
        let delay = backoff.next_delay();
        log::info!("reconnecting in {}s", delay.as_secs());
        clock.sleep(delay, stop);
    }
    let stats = pipeline.finish()?;
    if writer_gone {
        return Err(CollectError::Archive(io::Error::other("archive writer stopped")));
    }
    Ok(stats)
}

/// Pages through search results until the source has no next cursor, the
/// job's page limit is reached or `stop` is raised. Rate-limit answers are
/// waited out until the advertised reset time.
pub fn collect_search(
    job: &CollectionJob,
    source: &mut dyn SearchSource,
    clock: &dyn Clock,
    stop: &StopSignal,
) -> Result<CollectionStats, CollectError> {
    let kind = job
        .mode
        .search_kind()
        .ok_or_else(|| CollectError::InvalidJob(format!("collect_search needs a search mode, got {}", job.mode)))?;
    let query = SearchQuery {
        terms: job.track_terms.clone(),
        kind,
    };
    let mut pipeline = Pipeline::start(job, clock)?;
    let mut backoff = Backoff::default();
    let mut cursor: Option<String> = None;
    let mut failures = 0;

    while !stop.is_stopped() && job.page_limit.is_none_or(|limit| pipeline.stats.pages < limit as u64) {
        match source.fetch(&query, cursor.as_deref()) {
            Ok(page) => {
                failures = 0;
                backoff.reset();
                pipeline.stats.pages += 1;
                for line in page.lines {
                    if !pipeline.offer(line) {
                        let _ = pipeline.finish();
                        return Err(CollectError::Archive(io::Error::other("archive writer stopped")));
                    }
                }
                match page.next_cursor {
                    Some(next) => cursor = Some(next),
                    None => break,
                }
            }
            Err(SearchError::RateLimited { reset_at }) => {
                pipeline.stats.rate_limit_waits += 1;
                let wait = (reset_at - clock.now()).to_std().unwrap_or(Duration::ZERO);
                log::info!("rate limited; waiting {}s", wait.as_secs());
                clock.sleep(wait, stop);
            }
            Err(SearchError::Transient(msg)) => {
                failures += 1;
                if failures > MAX_SEARCH_RETRIES {
                    let _ = pipeline.finish();
                    return Err(CollectError::Rejected(format!(
                        "giving up after {failures} failures: {msg}"
                    )));
                }
                clock.sleep(backoff.next_delay(), stop);
            }
            Err(SearchError::Rejected(msg)) => {
                let _ = pipeline.finish();
                return Err(CollectError::Rejected(msg));
            }
        }
    }
    pipeline.finish()
}
