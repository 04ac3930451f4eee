//! Fixture helpers: a tweet builder and a seeded synthetic corpus generator.
//!
//! Used by the crate's tests, the acceptance suite and the runnable
//! examples. Generated corpora mix originals, retweets of observed and
//! unobserved originals, replies and geotags.

use std::collections::HashMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tweet::{Coordinates, RetweetOf, Tweet};

pub fn default_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2015, 3, 19, 18, 0, 0).unwrap()
}

#[derive(Debug, Clone)]
pub struct TweetBuilder {
    tweet: Tweet,
}

impl TweetBuilder {
    pub fn new(id: u64, author: &str) -> Self {
        TweetBuilder {
            tweet: Tweet {
                id,
                created_at: default_time(),
                author: author.to_string(),
                text: String::new(),
                hashtags: Vec::new(),
                retweet_of: None,
                reply_to: None,
                coords: None,
                retweet_count: None,
            },
        }
    }

    pub fn at(mut self, created_at: DateTime<Utc>) -> Self {
        self.tweet.created_at = created_at;
        self
    }

    pub fn text(mut self, text: &str) -> Self {
        self.tweet.text = text.to_string();
        self
    }

    pub fn hashtags(mut self, tags: &[&str]) -> Self {
        self.tweet.hashtags = tags.iter().map(|t| t.to_lowercase()).collect();
        self
    }

    pub fn retweet(mut self, original_id: u64, original_author: &str, text: &str) -> Self {
        self.tweet.retweet_of = Some(RetweetOf {
            id: original_id,
            author: original_author.to_string(),
            text: text.to_string(),
            retweet_count: None,
        });
        self
    }

    pub fn retweet_counted(self, original_id: u64, original_author: &str, text: &str, count: u64) -> Self {
        let mut b = self.retweet(original_id, original_author, text);
        if let Some(rt) = b.tweet.retweet_of.as_mut() {
            rt.retweet_count = Some(count);
        }
        b
    }

    pub fn reply_to(mut self, target: &str) -> Self {
        self.tweet.reply_to = Some(target.to_string());
        self
    }

    pub fn coords(mut self, latitude: f64, longitude: f64) -> Self {
        self.tweet.coords = Some(Coordinates::new(latitude, longitude).expect("valid coordinates"));
        self
    }

    pub fn retweet_count(mut self, count: u64) -> Self {
        self.tweet.retweet_count = Some(count);
        self
    }

    pub fn build(self) -> Tweet {
        self.tweet
    }
}

/// Shape of a generated corpus.
#[derive(Debug, Clone, Copy)]
pub struct CorpusShape {
    pub tweets: usize,
    pub users: usize,
    pub retweet_ratio: f64,
    pub reply_ratio: f64,
    pub geotag_ratio: f64,
    /// Share of retweets whose original is never observed directly.
    pub unobserved_ratio: f64,
    pub span_hours: i64,
}

impl CorpusShape {
    pub fn random(rng: &mut impl Rng, max_tweets: usize) -> Self {
        CorpusShape {
            tweets: rng.random_range(0..=max_tweets),
            users: rng.random_range(1..=200),
            retweet_ratio: rng.random_range(0.0..0.8),
            reply_ratio: rng.random_range(0.0..0.3),
            geotag_ratio: rng.random_range(0.0..0.2),
            unobserved_ratio: rng.random_range(0.0..0.5),
            span_hours: rng.random_range(1..=24 * 11),
        }
    }
}

const WORDS: &[&str] = &[
    "korrika", "euskara", "gora", "herria", "lekukoa", "bilbo", "kaixo", "eskerrik", "asko",
];
const TAGS: &[&str] = &["korrika", "euskahaldun", "korrika2015", "korrika15", "korrikazuzenean"];

pub fn user_name(index: usize) -> String {
    // Mixed case so that name ordering exercises case folding.
    if index.is_multiple_of(3) {
        format!("User{index}")
    } else {
        format!("user{index}")
    }
}

/// Generates a corpus with unique ids. Deterministic for a given seed.
pub fn random_corpus(seed: u64, shape: CorpusShape) -> Vec<Tweet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Utc.with_ymd_and_hms(2015, 3, 19, 0, 0, 0).unwrap();
    let span_secs = shape.span_hours * 3_600;
    let mut originals: Vec<(u64, String, String, u64)> = Vec::new();
    let mut phantoms: HashMap<u64, usize> = HashMap::new();
    let mut next_id = 1_000u64;
    let mut tweets = Vec::with_capacity(shape.tweets);

    for _ in 0..shape.tweets {
        next_id += rng.random_range(1..5);
        let id = next_id;
        let author = user_name(rng.random_range(0..shape.users));
        let created_at = start + Duration::seconds(rng.random_range(0..span_secs));
        let words: Vec<&str> = (0..rng.random_range(1..6))
            .map(|_| *WORDS.choose(&mut rng).unwrap())
            .collect();
        let mut text = words.join(" ");
        let tags: Vec<&str> = (0..rng.random_range(0..3))
            .map(|_| *TAGS.choose(&mut rng).unwrap())
            .collect();
        for tag in &tags {
            text.push_str(" #");
            text.push_str(tag);
        }
        let mut b = TweetBuilder::new(id, &author)
            .at(created_at)
            .text(&text)
            .hashtags(&tags);

        if rng.random_bool(shape.retweet_ratio) {
            let unobserved = originals.is_empty() || rng.random_bool(shape.unobserved_ratio);
            let (oid, oauthor, otext, base) = if unobserved {
                // Phantom originals get ids far below the generated range.
                let oid = rng.random_range(1..1_000);
                let oauthor = user_name(rng.random_range(0..shape.users));
                let base = rng.random_range(0..500);
                let slot = *phantoms.entry(oid).or_insert_with(|| {
                    originals.push((oid, oauthor, format!("phantom {oid}"), base));
                    originals.len() - 1
                });
                originals[slot].clone()
            } else {
                originals.choose(&mut rng).unwrap().clone()
            };
            b = b.retweet_counted(oid, &oauthor, &otext, base + rng.random_range(0..50));
        } else {
            originals.push((id, author.clone(), text.clone(), rng.random_range(0..500)));
            if rng.random_bool(0.5) {
                b = b.retweet_count(rng.random_range(0..500));
            }
        }
        if rng.random_bool(shape.reply_ratio) {
            b = b.reply_to(&user_name(rng.random_range(0..shape.users)));
        }
        if rng.random_bool(shape.geotag_ratio) {
            b = b.coords(rng.random_range(-90.0..=90.0), rng.random_range(-180.0..=180.0));
        }
        tweets.push(b.build());
    }
    tweets
}
