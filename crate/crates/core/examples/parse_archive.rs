//! Parse raw records and read an archive with dedupe and error accounting.
//!
//! ```bash
//! cargo run -p eventpulse --example parse_archive
//! ```

use std::io::Write;

use eventpulse::{parse_tweet, read_archive};

const RECORDS: &[&str] = &[
    r#"{"id":1,"created_at":"Thu Mar 19 18:00:00 +0000 2015","user":{"screen_name":"korrika_aek"},"text":"Hasi da #Korrika!","entities":{"hashtags":[{"text":"Korrika"}]}}"#,
    r#"{"id":2,"created_at":"Thu Mar 19 18:01:00 +0000 2015","user":{"screen_name":"a"},"text":"RT @korrika_aek: Hasi da #Korrika!","retweeted_status":{"id":1,"user":{"screen_name":"korrika_aek"},"text":"Hasi da #Korrika!"}}"#,
    r#"{"id":3,"created_at":"2015-03-19T18:02:00Z","user":{"screen_name":"b"},"text":"Gernikan","coordinates":{"type":"Point","coordinates":[-2.67,43.31]}}"#,
    r#"{"id":2,"created_at":"Thu Mar 19 18:01:00 +0000 2015","user":{"screen_name":"a"},"text":"re-delivered"}"#,
    r#"{"id":4,"created_at":"Thu Mar 19 18:0"#,
];

fn main() -> std::io::Result<()> {
    let tweet = parse_tweet(RECORDS[1]).expect("well-formed");
    println!(
        "tweet {} by @{} retweets {:?}",
        tweet.id,
        tweet.author,
        tweet.retweet_of.map(|r| (r.id, r.author))
    );
    println!("missing field: {}", parse_tweet(r#"{"id":9}"#).unwrap_err());

    let mut file = tempfile::NamedTempFile::new()?;
    for record in RECORDS {
        writeln!(file, "{record}")?;
    }
    let (tweets, stats) = read_archive(file.path(), true)?;
    println!("{stats:?}");
    for t in &tweets {
        println!(
            "{:>3} @{:<12} {} tags={:?} coords={:?}",
            t.id, t.author, t.created_at, t.hashtags, t.coords
        );
    }
    Ok(())
}
