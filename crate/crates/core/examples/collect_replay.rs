//! Collect from the local replay server: a stream that drops twice and a
//! search that hits a rate limit. Backoff waits use a virtual clock.
//!
//! ```bash
//! cargo run -p eventpulse --example collect_replay
//! ```

use chrono::{TimeZone, Utc};
use eventpulse::collector::{
    collect_search, collect_stream, Clock, CollectionJob, HttpSearchSource, HttpStreamSource, MockScript, MockServer,
    Mode, StopSignal, VirtualClock,
};
use eventpulse::testing::TweetBuilder;
use eventpulse::tweet::to_record;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lines: Vec<String> = (1..=200u64)
        .map(|id| {
            let text = if id % 3 == 0 { "Gora #Korrika!" } else { "beste gai bat" };
            to_record(&TweetBuilder::new(id, "a").text(text).build()).to_string()
        })
        .collect();
    let dir = tempfile::tempdir()?;
    let clock = VirtualClock::new(Utc.with_ymd_and_hms(2015, 3, 19, 12, 0, 0).unwrap());

    let server = MockServer::start(
        MockScript::new(lines.clone())
            .disconnect_after(&[50, 120])
            .redeliver(5)
            .keepalive_every(20),
    )?;
    let job = CollectionJob::new(Mode::Stream, "korrika15", &["#korrika"], dir.path());
    let mut source = HttpStreamSource::new(&server.stream_url())?;
    let stats = collect_stream(&job, &mut source, &clock, &StopSignal::new())?;
    println!("stream: {stats}");
    println!("backoff waits: {:?}", clock.sleeps());
    drop(server);

    let reset = clock.now() + chrono::Duration::minutes(15);
    let server = MockServer::start(MockScript::new(lines).page_size(40).rate_limit(&[2], reset))?;
    let job = CollectionJob::new(Mode::SearchRecent, "korrika15-search", &["#korrika"], dir.path());
    let mut source = HttpSearchSource::new(&server.search_url())?;
    let stats = collect_search(&job, &mut source, &clock, &StopSignal::new())?;
    println!("search: {stats} over {} pages", stats.pages);

    for entry in std::fs::read_dir(dir.path())? {
        let entry = entry?;
        for file in std::fs::read_dir(entry.path())? {
            let file = file?;
            println!("{} ({} bytes)", file.path().display(), file.metadata()?.len());
        }
    }
    Ok(())
}
