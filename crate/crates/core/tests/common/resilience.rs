//! Replays a fixed 1000-line stream through the TCP mock server with two
//! dropped connections, then the same lines through paged search with one
//! rate-limit answer, and collects what ended up on disk.

use std::path::Path;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use eventpulse::collector::{
    collect_search, collect_stream, CollectionJob, CollectionStats, HttpSearchSource, HttpStreamSource, MockLog,
    MockScript, MockServer, Mode, StopSignal, VirtualClock,
};
use eventpulse::testing::TweetBuilder;
use eventpulse::tweet::to_record;

pub const LINES: usize = 1_000;
pub const DISCONNECTS: [usize; 2] = [300, 700];
pub const REDELIVER: usize = 25;
pub const RATE_LIMIT_WAIT: Duration = Duration::from_secs(900);

/// Source records and whether each one should be archived. Mixes compact
/// and hand-formatted JSON so byte identity is meaningful.
pub fn source_lines() -> Vec<(String, bool)> {
    (0..LINES)
        .map(|i| {
            let id = 5_000 + i as u64;
            match i % 5 {
                0 => (
                    to_record(&TweetBuilder::new(id, "aek").text("Hasi da #Korrika").hashtags(&["Korrika"]).build())
                        .to_string(),
                    true,
                ),
                1 => (to_record(&TweetBuilder::new(id, "b").text("Gaur KORRIKA Bilbon").build()).to_string(), true),
                2 => (
                    format!(
                        r#"{{ "id": {id}, "created_at": "Thu Mar 19 18:00:00 +0000 2015", "user": {{ "screen_name": "c" }}, "text": "Korrika éta \"ñ\"" }}"#
                    ),
                    true,
                ),
                3 => (to_record(&TweetBuilder::new(id, "d").text("korrikalari bat").build()).to_string(), false),
                _ => (
                    to_record(&TweetBuilder::new(id, "e").text("#euskara").hashtags(&["euskara"]).build()).to_string(),
                    false,
                ),
            }
        })
        .collect()
}

pub struct Run {
    pub stats: CollectionStats,
    pub sleeps: Vec<Duration>,
    pub archive: Vec<Vec<u8>>,
    pub log: MockLog,
}

pub struct Report {
    pub expected: Vec<Vec<u8>>,
    pub stream: Run,
    pub search: Run,
    pub elapsed: Duration,
}

fn archive_lines(dir: &Path) -> Vec<Vec<u8>> {
    let mut files: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut lines = Vec::new();
    for f in files {
        let bytes = std::fs::read(&f).unwrap();
        assert!(
            bytes.is_empty() || bytes.ends_with(b"\n"),
            "{} lacks a final newline",
            f.display()
        );
        lines.extend(
            bytes
                .split(|&b| b == b'\n')
                .filter(|l| !l.is_empty())
                .map(<[u8]>::to_vec),
        );
    }
    lines
}

pub fn run() -> Report {
    let started = Instant::now();
    let source = source_lines();
    let lines: Vec<String> = source.iter().map(|(l, _)| l.clone()).collect();
    let expected = source
        .iter()
        .filter(|(_, m)| *m)
        .map(|(l, _)| l.as_bytes().to_vec())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let start = Utc.with_ymd_and_hms(2015, 3, 19, 12, 0, 0).unwrap();

    let stream = {
        let clock = VirtualClock::new(start);
        let server = MockServer::start(
            MockScript::new(lines.clone())
                .disconnect_after(&DISCONNECTS)
                .redeliver(REDELIVER)
                .keepalive_every(40),
        )
        .unwrap();
        let job = CollectionJob::new(Mode::Stream, "korrika15", &["#korrika"], dir.path());
        let mut http = HttpStreamSource::new(&server.stream_url()).unwrap();
        let stats = collect_stream(&job, &mut http, &clock, &StopSignal::new()).unwrap();
        Run {
            stats,
            sleeps: clock.sleeps(),
            archive: archive_lines(&job.event_dir()),
            log: server.log(),
        }
    };

    let search = {
        let clock = VirtualClock::new(start);
        let reset = start + chrono::Duration::from_std(RATE_LIMIT_WAIT).unwrap();
        let server = MockServer::start(MockScript::new(lines).page_size(100).rate_limit(&[3], reset)).unwrap();
        let job = CollectionJob::new(Mode::SearchRecent, "korrika15-search", &["#korrika"], dir.path());
        let mut http = HttpSearchSource::new(&server.search_url()).unwrap();
        let stats = collect_search(&job, &mut http, &clock, &StopSignal::new()).unwrap();
        Run {
            stats,
            sleeps: clock.sleeps(),
            archive: archive_lines(&job.event_dir()),
            log: server.log(),
        }
    };

    Report {
        expected,
        stream,
        search,
        elapsed: started.elapsed(),
    }
}

/// Every expectation of the scenario; the first violation is reported.
pub fn check(report: &Report) -> Result<(), String> {
    let ensure = |ok: bool, what: String| if ok { Ok(()) } else { Err(what) };
    let matching = report.expected.len() as u64;
    ensure(matching == 600, format!("fixture has {matching} matching lines"))?;

    let s = &report.stream;
    ensure(
        s.archive == report.expected,
        "stream archive differs from the matching source lines".into(),
    )?;
    ensure(
        s.stats.reconnects == 2,
        format!("stream reconnects = {}", s.stats.reconnects),
    )?;
    ensure(
        s.stats.written == matching,
        format!("stream written = {}", s.stats.written),
    )?;
    let redelivered = (DISCONNECTS.len() * REDELIVER) as u64;
    ensure(
        s.stats.received == LINES as u64 + redelivered,
        format!("stream received = {}", s.stats.received),
    )?;
    ensure(
        s.stats.matched == s.stats.written + s.stats.duplicates && s.stats.duplicates > 0,
        format!("stream matched {} / duplicates {}", s.stats.matched, s.stats.duplicates),
    )?;
    // Two drops plus the final close before the replay reports exhaustion.
    let backoff: Vec<Duration> = [1, 2, 4].map(Duration::from_secs).to_vec();
    ensure(s.sleeps == backoff, format!("stream backoff waits {:?}", s.sleeps))?;
    ensure(
        s.log.stream_connections == 4,
        format!("stream connections = {}", s.log.stream_connections),
    )?;

    let q = &report.search;
    ensure(
        q.archive == report.expected,
        "search archive differs from the matching source lines".into(),
    )?;
    ensure(
        q.stats.rate_limit_waits == 1,
        format!("rate-limit waits = {}", q.stats.rate_limit_waits),
    )?;
    ensure(q.sleeps == [RATE_LIMIT_WAIT], format!("search waits {:?}", q.sleeps))?;
    ensure(
        q.log.rate_limited == 1,
        format!("server sent {} rate-limit answers", q.log.rate_limited),
    )?;
    ensure(q.stats.pages == 10, format!("search pages = {}", q.stats.pages))?;
    ensure(
        q.stats.written == matching,
        format!("search written = {}", q.stats.written),
    )?;

    ensure(
        report.elapsed < Duration::from_secs(10),
        format!("took {:?}", report.elapsed),
    )
}
