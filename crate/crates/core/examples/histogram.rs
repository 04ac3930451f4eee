//! Hourly tweet counts, written as a plot-ready `.dat` file.
//!
//! ```bash
//! cargo run -p eventpulse --example histogram -- [archive.jsonl]
//! ```

mod common;

use eventpulse::analytics::{histogram, write_histogram_dat, Granularity, TzOffset};

fn main() -> std::io::Result<()> {
    let tweets = common::corpus_from_args();
    for offset in [0, 60] {
        let buckets = histogram(&tweets, Granularity::Hour, TzOffset::from_minutes(offset).unwrap());
        let peak = buckets.iter().max_by_key(|b| b.count);
        if let Some(peak) = peak {
            println!(
                "offset {offset:+}: {} buckets, peak {} tweets at {}",
                buckets.len(),
                peak.count,
                peak.start
            );
        }
    }
    let daily = histogram(&tweets, Granularity::Day, TzOffset::UTC);
    let mut out = std::io::stdout().lock();
    write_histogram_dat(&daily, &mut out)
}
