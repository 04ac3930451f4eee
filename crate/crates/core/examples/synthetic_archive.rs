//! Writes a synthetic event archive (one JSON record per line).
//!
//! ```bash
//! cargo run -p eventpulse --example synthetic_archive -- korrika-sim.jsonl 20000
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};

use eventpulse::testing::{random_corpus, CorpusShape};
use eventpulse::tweet::to_record;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "synthetic.jsonl".into());
    let count: usize = args.next().and_then(|n| n.parse().ok()).unwrap_or(5_000);

    let shape = CorpusShape {
        tweets: count,
        users: 300,
        retweet_ratio: 0.55,
        reply_ratio: 0.1,
        geotag_ratio: 0.03,
        unobserved_ratio: 0.2,
        span_hours: 24 * 11,
    };
    let mut out = BufWriter::new(File::create(&path)?);
    for tweet in random_corpus(2015, shape) {
        writeln!(out, "{}", to_record(&tweet))?;
    }
    out.flush()?;
    println!("wrote {count} records to {path}");
    Ok(())
}
