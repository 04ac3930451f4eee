//! Corpus statistics: temporal histogram, rankings and geotag extraction.
//!
//! Every counter here has a partial form (`BucketCounts`, `Tally`,
//! `RetweetTally`) that can be filled on disjoint slices of a corpus and
//! merged by addition; the one-shot functions are thin wrappers over them.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::io::{self, Write};
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, Utc};

use crate::tweet::Tweet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    #[default]
    Hour,
    Day,
}

impl Granularity {
    pub fn seconds(self) -> i64 {
        match self {
            Granularity::Hour => 3_600,
            Granularity::Day => 86_400,
        }
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "h" | "hour" => Ok(Granularity::Hour),
            "d" | "day" => Ok(Granularity::Day),
            other => Err(format!("unknown granularity `{other}` (expected hour or day)")),
        }
    }
}

/// A fixed UTC offset in minutes, limited to ±14 h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TzOffset(i32);

impl TzOffset {
    pub const UTC: TzOffset = TzOffset(0);
    pub const MAX_MINUTES: i32 = 840;

    pub fn from_minutes(minutes: i32) -> Option<Self> {
        (-Self::MAX_MINUTES..=Self::MAX_MINUTES)
            .contains(&minutes)
            .then_some(TzOffset(minutes))
    }

    pub fn minutes(self) -> i32 {
        self.0
    }

    fn fixed(self) -> FixedOffset {
        FixedOffset::east_opt(self.0 * 60).expect("offset validated on construction")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramBucket {
    /// Bucket start in the requested offset, truncated to the granularity.
    pub start: DateTime<FixedOffset>,
    pub count: u64,
}

/// Partial histogram keyed by bucket index (local seconds / bucket width).
#[derive(Debug, Clone)]
pub struct BucketCounts {
    granularity: Granularity,
    offset: TzOffset,
    counts: BTreeMap<i64, u64>,
}

impl BucketCounts {
    pub fn new(granularity: Granularity, offset: TzOffset) -> Self {
        BucketCounts {
            granularity,
            offset,
            counts: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, created_at: DateTime<Utc>) {
        let local = created_at.timestamp() + i64::from(self.offset.minutes()) * 60;
        let index = local.div_euclid(self.granularity.seconds());
        *self.counts.entry(index).or_default() += 1;
    }

    pub fn merge(&mut self, other: BucketCounts) {
        assert_eq!(
            (self.granularity, self.offset),
            (other.granularity, other.offset),
            "merging histograms with different bucketing"
        );
        for (index, count) in other.counts {
            *self.counts.entry(index).or_default() += count;
        }
    }

    /// Dense bucket list from the first to the last non-empty bucket.
    pub fn into_buckets(self) -> Vec<HistogramBucket> {
        let (Some(&first), Some(&last)) = (self.counts.keys().next(), self.counts.keys().last()) else {
            return Vec::new();
        };
        let width = self.granularity.seconds();
        let offset_secs = i64::from(self.offset.minutes()) * 60;
        let tz = self.offset.fixed();
        (first..=last)
            .map(|index| {
                let utc =
                    DateTime::from_timestamp(index * width - offset_secs, 0).expect("bucket start within chrono range");
                HistogramBucket {
                    start: utc.with_timezone(&tz),
                    count: self.counts.get(&index).copied().unwrap_or(0),
                }
            })
            .collect()
    }
}

/// Counts tweets (retweets included) per hour or day of `created_at`
/// shifted by `offset`. Gaps between the first and last bucket are
/// filled with zero counts.
pub fn histogram(tweets: &[Tweet], granularity: Granularity, offset: TzOffset) -> Vec<HistogramBucket> {
    let mut counts = BucketCounts::new(granularity, offset);
    for tweet in tweets {
        counts.add(tweet.created_at);
    }
    counts.into_buckets()
}

/// Writes `<ISO-8601 start>\t<count>` lines.
pub fn write_histogram_dat<W: Write>(buckets: &[HistogramBucket], mut out: W) -> io::Result<()> {
    for bucket in buckets {
        writeln!(out, "{}\t{}", bucket.start.format("%Y-%m-%dT%H:%M:%S%:z"), bucket.count)?;
    }
    Ok(())
}

/// Ordering of ranking keys among equal scores.
pub trait RankKey: Clone + Eq + Hash {
    fn rank_cmp(&self, other: &Self) -> Ordering;
}

impl RankKey for u64 {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl RankKey for String {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        compare_names(self, other)
    }
}

/// Case-insensitive lexicographic order, falling back to the exact bytes so
/// that names differing only in case still have a fixed order.
pub fn compare_names(a: &str, b: &str) -> Ordering {
    let folded = a
        .chars()
        .flat_map(char::to_lowercase)
        .cmp(b.chars().flat_map(char::to_lowercase));
    folded.then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedEntry<K> {
    pub key: K,
    pub score: u64,
    /// 1-based.
    pub rank: usize,
}

/// Orders by descending score, then ascending key.
fn ranking_order<K: RankKey>(a: &(K, u64), b: &(K, u64)) -> Ordering {
    b.1.cmp(&a.1).then_with(|| a.0.rank_cmp(&b.0))
}

fn rank<K: RankKey>(mut scored: Vec<(K, u64)>, k: usize) -> Vec<RankedEntry<K>> {
    scored.sort_unstable_by(ranking_order);
    scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (key, score))| RankedEntry {
            key,
            score,
            rank: i + 1,
        })
        .collect()
}

/// Mergeable frequency counter.
#[derive(Debug, Clone)]
pub struct Tally<K> {
    counts: HashMap<K, u64>,
}

impl<K: RankKey> Default for Tally<K> {
    fn default() -> Self {
        Tally { counts: HashMap::new() }
    }
}

impl<K: RankKey> Tally<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K) {
        self.add_n(key, 1);
    }

    pub fn add_n(&mut self, key: K, n: u64) {
        *self.counts.entry(key).or_default() += n;
    }

    pub fn merge(&mut self, other: Tally<K>) {
        for (key, n) in other.counts {
            self.add_n(key, n);
        }
    }

    pub fn get(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn top(self, k: usize) -> Vec<RankedEntry<K>> {
        rank(self.counts.into_iter().collect(), k)
    }
}

/// Tweets per author; retweets count as the retweeter's.
pub fn top_users_by_activity(tweets: &[Tweet], k: usize) -> Vec<RankedEntry<String>> {
    let mut tally = Tally::new();
    for tweet in tweets {
        tally.add(tweet.author.clone());
    }
    tally.top(k)
}

/// Observed retweets per original author.
pub fn top_users_by_received_retweets(tweets: &[Tweet], k: usize) -> Vec<RankedEntry<String>> {
    let mut tally = Tally::new();
    for original in tweets.iter().filter_map(|t| t.retweet_of.as_ref()) {
        tally.add(original.author.clone());
    }
    tally.top(k)
}

/// How a tweet's retweet score is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountSource {
    /// Number of retweets of the original present in the corpus.
    #[default]
    Observed,
    /// Largest platform retweet counter seen on the original or any
    /// embedded copy of it.
    Embedded,
}

impl FromStr for CountSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "observed" => Ok(CountSource::Observed),
            "embedded" => Ok(CountSource::Embedded),
            other => Err(format!(
                "unknown count source `{other}` (expected observed or embedded)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopTweet {
    pub entry: RankedEntry<u64>,
    pub author: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Display {
    observed: bool,
    author: String,
    text: String,
}

impl Display {
    /// Observed originals win over embedded copies; among copies the
    /// smallest (author, text) wins so the choice is order-independent.
    fn prefer(self, other: Display) -> Display {
        match (self.observed, other.observed) {
            (true, false) => self,
            (false, true) => other,
            _ if (&other.author, &other.text) < (&self.author, &self.text) => other,
            _ => self,
        }
    }
}

/// Partial state for [`top_tweets_by_retweets`].
#[derive(Debug, Clone, Default)]
pub struct RetweetTally {
    observed: HashMap<u64, u64>,
    embedded: HashMap<u64, u64>,
    display: HashMap<u64, Display>,
}

impl RetweetTally {
    pub fn new() -> Self {
        Self::default()
    }

    fn offer(&mut self, id: u64, candidate: Display) {
        let merged = match self.display.remove(&id) {
            Some(current) => current.prefer(candidate),
            None => candidate,
        };
        self.display.insert(id, merged);
    }

    fn raise(&mut self, id: u64, counter: Option<u64>) {
        let slot = self.embedded.entry(id).or_default();
        *slot = (*slot).max(counter.unwrap_or(0));
    }

    pub fn add(&mut self, tweet: &Tweet) {
        match &tweet.retweet_of {
            Some(original) => {
                *self.observed.entry(original.id).or_default() += 1;
                self.raise(original.id, original.retweet_count);
                self.offer(
                    original.id,
                    Display {
                        observed: false,
                        author: original.author.clone(),
                        text: original.text.clone(),
                    },
                );
            }
            None => {
                self.observed.entry(tweet.id).or_default();
                self.raise(tweet.id, tweet.retweet_count);
                self.offer(
                    tweet.id,
                    Display {
                        observed: true,
                        author: tweet.author.clone(),
                        text: tweet.text.clone(),
                    },
                );
            }
        }
    }

    pub fn merge(&mut self, other: RetweetTally) {
        for (id, n) in other.observed {
            *self.observed.entry(id).or_default() += n;
        }
        for (id, n) in other.embedded {
            self.raise(id, Some(n));
        }
        for (id, display) in other.display {
            self.offer(id, display);
        }
    }

    pub fn top(mut self, k: usize, source: CountSource) -> Vec<TopTweet> {
        let scores = match source {
            CountSource::Observed => std::mem::take(&mut self.observed),
            CountSource::Embedded => std::mem::take(&mut self.embedded),
        };
        rank(scores.into_iter().collect(), k)
            .into_iter()
            .map(|entry| {
                let display = self
                    .display
                    .remove(&entry.key)
                    .expect("every candidate has a display entry");
                TopTweet {
                    entry,
                    author: display.author,
                    text: display.text,
                }
            })
            .collect()
    }
}

/// Ranks originals by retweets. Candidates are every original seen through
/// an embedded copy plus every observed non-retweet; zero-score candidates
/// rank after all positive ones.
pub fn top_tweets_by_retweets(tweets: &[Tweet], k: usize, source: CountSource) -> Vec<TopTweet> {
    let mut tally = RetweetTally::new();
    for tweet in tweets {
        tally.add(tweet);
    }
    tally.top(k, source)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateRow {
    pub id: u64,
    pub latitude: f64,
    pub longitude: f64,
}

pub fn extract_coordinates(tweets: &[Tweet]) -> Vec<CoordinateRow> {
    tweets
        .iter()
        .filter_map(|t| {
            t.coords.map(|c| CoordinateRow {
                id: t.id,
                latitude: c.latitude,
                longitude: c.longitude,
            })
        })
        .collect()
}

pub fn write_coordinates_csv<W: Write>(rows: &[CoordinateRow], out: W) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new().from_writer(out);
    writer.write_record(["id", "latitude", "longitude"])?;
    for row in rows {
        writer.write_record([row.id.to_string(), row.latitude.to_string(), row.longitude.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

/// Drops later occurrences of an id, keeping the first.
pub fn dedupe_by_id(tweets: Vec<Tweet>) -> Vec<Tweet> {
    let mut seen = HashSet::with_capacity(tweets.len());
    tweets.into_iter().filter(|t| seen.insert(t.id)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusSummary {
    pub tweets: usize,
    pub retweets: usize,
    pub replies: usize,
    pub geotagged: usize,
    pub distinct_users: usize,
    pub first: Option<DateTime<Utc>>,
    pub last: Option<DateTime<Utc>>,
}

pub fn summarize(tweets: &[Tweet]) -> CorpusSummary {
    let users: HashSet<&str> = tweets.iter().map(|t| t.author.as_str()).collect();
    CorpusSummary {
        tweets: tweets.len(),
        retweets: tweets.iter().filter(|t| t.retweet_of.is_some()).count(),
        replies: tweets.iter().filter(|t| t.reply_to.is_some()).count(),
        geotagged: tweets.iter().filter(|t| t.coords.is_some()).count(),
        distinct_users: users.len(),
        first: tweets.iter().map(|t| t.created_at).min(),
        last: tweets.iter().map(|t| t.created_at).max(),
    }
}

impl fmt::Display for CorpusSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} tweets", self.tweets)?;
        writeln!(f, "{} retweets", self.retweets)?;
        writeln!(f, "{} replies", self.replies)?;
        writeln!(f, "{} geotagged", self.geotagged)?;
        writeln!(f, "{} distinct users", self.distinct_users)?;
        if let (Some(first), Some(last)) = (self.first, self.last) {
            writeln!(f, "span {} .. {}", first.to_rfc3339(), last.to_rfc3339())?;
        }
        Ok(())
    }
}
