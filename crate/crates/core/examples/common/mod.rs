// Shared by the examples: load the archive named on the command line, or
// fall back to a synthetic corpus.

use eventpulse::testing::{random_corpus, CorpusShape};
use eventpulse::Tweet;

#[allow(dead_code)]
pub fn corpus_from_args() -> Vec<Tweet> {
    match std::env::args().nth(1) {
        Some(path) => {
            let (tweets, stats) = eventpulse::read_archive(&path, true).expect("readable archive");
            eprintln!(
                "{path}: {} lines, {} parsed, {} malformed, {} duplicates",
                stats.total_lines, stats.parsed, stats.skipped_malformed, stats.duplicates_dropped
            );
            tweets
        }
        None => random_corpus(
            2015,
            CorpusShape {
                tweets: 5_000,
                users: 120,
                retweet_ratio: 0.55,
                reply_ratio: 0.1,
                geotag_ratio: 0.03,
                unobserved_ratio: 0.2,
                span_hours: 72,
            },
        ),
    }
}
