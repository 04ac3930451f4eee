//! Most retweeted tweets, most active users and most retweeted users.
//!
//! ```bash
//! cargo run -p eventpulse --example rankings -- [archive.jsonl]
//! ```

mod common;

use eventpulse::analytics::{
    top_tweets_by_retweets, top_users_by_activity, top_users_by_received_retweets, CountSource,
};

fn main() {
    let tweets = common::corpus_from_args();

    for source in [CountSource::Observed, CountSource::Embedded] {
        println!("top tweets ({source:?})");
        for t in top_tweets_by_retweets(&tweets, 5, source) {
            println!("  {:>2}. @{} ({}) {}", t.entry.rank, t.author, t.entry.score, t.text);
        }
    }
    println!("most active");
    for e in top_users_by_activity(&tweets, 5) {
        println!("  {:>2}. @{} {}", e.rank, e.key, e.score);
    }
    println!("most retweeted");
    for e in top_users_by_received_retweets(&tweets, 5) {
        println!("  {:>2}. @{} {}", e.rank, e.key, e.score);
    }
}
