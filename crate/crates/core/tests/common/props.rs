//! Generators and property checks, shared by the proptest suite and the
//! acceptance runner.

use std::collections::BTreeSet;
use std::time::Duration;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eventpulse::analytics::{
    extract_coordinates, histogram, top_tweets_by_retweets, top_users_by_activity, top_users_by_received_retweets,
    BucketCounts, CountSource, Granularity, RetweetTally, Tally, TzOffset,
};
use eventpulse::collector::{matches_track, Backoff};
use eventpulse::graph::{
    aggregate, extract_interactions, label_propagation, notable_subgraph, read_edges_csv, write_edges_csv, EdgeKind,
    WeightedGraph,
};
use eventpulse::testing::TweetBuilder;
use eventpulse::tweet::{read_records, to_record};
use eventpulse::Tweet;

use super::oracle;

const NAMES: &[&str] = &["a", "B", "b", "Alice", "alice", "zed", "Zed", "_x", "mikel", "Miren"];

#[derive(Debug, Clone)]
pub struct TweetSpec {
    author: usize,
    offset_secs: i64,
    retweet: Option<(u64, usize, Option<u64>)>,
    reply: Option<usize>,
    coords: Option<(f64, f64)>,
    counter: Option<u64>,
}

fn tweet_spec() -> impl Strategy<Value = TweetSpec> {
    (
        0..NAMES.len(),
        0i64..3 * 86_400,
        prop::option::weighted(0.5, (1u64..140, 0..NAMES.len(), prop::option::of(0u64..50))),
        prop::option::weighted(0.2, 0..NAMES.len()),
        prop::option::weighted(0.2, (-90.0f64..=90.0, -180.0f64..=180.0)),
        prop::option::of(0u64..50),
    )
        .prop_map(|(author, offset_secs, retweet, reply, coords, counter)| TweetSpec {
            author,
            offset_secs,
            retweet,
            reply,
            coords,
            counter,
        })
}

/// Corpora with unique ids 100.. ; retweeted ids 1..140 overlap the
/// observed range so some originals are also present directly.
pub fn corpus(max_len: usize) -> impl Strategy<Value = Vec<Tweet>> {
    prop::collection::vec(tweet_spec(), 0..max_len).prop_map(|specs| {
        let start = Utc.with_ymd_and_hms(2015, 3, 19, 0, 0, 0).unwrap();
        specs
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let id = 100 + i as u64;
                let mut b = TweetBuilder::new(id, NAMES[s.author])
                    .at(start + chrono::Duration::seconds(s.offset_secs))
                    .text(&format!("text {}", i % 7));
                if let Some((oid, oauthor, count)) = s.retweet {
                    let text = format!("original {oid}");
                    b = match count {
                        Some(n) => b.retweet_counted(oid, NAMES[oauthor], &text, n),
                        None => b.retweet(oid, NAMES[oauthor], &text),
                    };
                } else if let Some(n) = s.counter {
                    b = b.retweet_count(n);
                }
                if let Some(r) = s.reply {
                    b = b.reply_to(NAMES[r]);
                }
                if let Some((lat, lon)) = s.coords {
                    b = b.coords(lat, lon);
                }
                b.build()
            })
            .collect()
    })
}

const GRAPH_NAMES: &[&str] = &[
    "a",
    "b",
    "C",
    "c",
    "comma,name",
    "quote\"d",
    "spa ce",
    "ñandú",
    "x",
    "y",
    "z",
    "w",
];

/// Graphs built from weighted edges only, so every node is an endpoint.
pub fn graph() -> impl Strategy<Value = WeightedGraph> {
    (
        any::<bool>(),
        prop::collection::vec(
            (0..GRAPH_NAMES.len(), 0..GRAPH_NAMES.len(), any::<bool>(), 1u64..5),
            0..40,
        ),
    )
        .prop_map(|(merged, edges)| {
            let mut g = WeightedGraph::new(merged);
            for (s, t, retweet, w) in edges {
                let kind = if retweet { EdgeKind::Retweet } else { EdgeKind::Reply };
                g.add_edge(GRAPH_NAMES[s], GRAPH_NAMES[t], Some(kind), w);
            }
            g
        })
}

fn shuffled(tweets: &[Tweet], seed: u64) -> Vec<Tweet> {
    let mut copy = tweets.to_vec();
    copy.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    copy
}

fn granularity(hourly: bool) -> Granularity {
    if hourly {
        Granularity::Hour
    } else {
        Granularity::Day
    }
}

pub fn histogram_conservation(tweets: &[Tweet], hourly: bool, offset: i32) -> Result<(), TestCaseError> {
    let buckets = histogram(tweets, granularity(hourly), TzOffset::from_minutes(offset).unwrap());
    prop_assert_eq!(buckets.iter().map(|b| b.count).sum::<u64>(), tweets.len() as u64);
    let step = granularity(hourly).seconds();
    for pair in buckets.windows(2) {
        prop_assert_eq!(pair[1].start.timestamp() - pair[0].start.timestamp(), step);
    }
    if let (Some(first), Some(last)) = (buckets.first(), buckets.last()) {
        prop_assert!(first.count > 0 && last.count > 0);
    }
    Ok(())
}

pub fn tz_shift_preserves_total(tweets: &[Tweet]) -> Result<(), TestCaseError> {
    let total = |minutes| {
        histogram(tweets, Granularity::Hour, TzOffset::from_minutes(minutes).unwrap())
            .iter()
            .map(|b| b.count)
            .sum::<u64>()
    };
    prop_assert_eq!(total(0), total(60));
    Ok(())
}

pub fn rankings_permutation_invariant(tweets: &[Tweet], seed: u64) -> Result<(), TestCaseError> {
    let other = shuffled(tweets, seed);
    let k = tweets.len() + 1;
    prop_assert_eq!(top_users_by_activity(tweets, k), top_users_by_activity(&other, k));
    prop_assert_eq!(
        top_users_by_received_retweets(tweets, k),
        top_users_by_received_retweets(&other, k)
    );
    for source in [CountSource::Observed, CountSource::Embedded] {
        prop_assert_eq!(
            top_tweets_by_retweets(tweets, k, source),
            top_tweets_by_retweets(&other, k, source)
        );
    }
    Ok(())
}

pub fn top_k_prefix(tweets: &[Tweet], k: usize) -> Result<(), TestCaseError> {
    let longer = top_users_by_activity(tweets, k + 1);
    let shorter = top_users_by_activity(tweets, k);
    prop_assert!(longer.starts_with(&shorter));
    let longer = top_users_by_received_retweets(tweets, k + 1);
    let shorter = top_users_by_received_retweets(tweets, k);
    prop_assert!(longer.starts_with(&shorter));
    for source in [CountSource::Observed, CountSource::Embedded] {
        let longer = top_tweets_by_retweets(tweets, k + 1, source);
        let shorter = top_tweets_by_retweets(tweets, k, source);
        prop_assert!(longer.starts_with(&shorter));
        for pair in longer.windows(2) {
            prop_assert!(pair[0].entry.score >= pair[1].entry.score);
        }
    }
    Ok(())
}

pub fn received_retweets_sum(tweets: &[Tweet]) -> Result<(), TestCaseError> {
    let all = top_users_by_received_retweets(tweets, usize::MAX);
    let retweets = tweets.iter().filter(|t| t.retweet_of.is_some()).count() as u64;
    prop_assert_eq!(all.iter().map(|e| e.score).sum::<u64>(), retweets);
    Ok(())
}

pub fn coordinate_rows(tweets: &[Tweet]) -> Result<(), TestCaseError> {
    let rows = extract_coordinates(tweets);
    prop_assert_eq!(rows.len(), tweets.iter().filter(|t| t.coords.is_some()).count());
    for row in rows {
        prop_assert!((-90.0..=90.0).contains(&row.latitude));
        prop_assert!((-180.0..=180.0).contains(&row.longitude));
    }
    Ok(())
}

pub fn edge_count_identity(tweets: &[Tweet]) -> Result<(), TestCaseError> {
    let edges = extract_interactions(tweets);
    let expected = tweets.iter().filter(|t| t.retweet_of.is_some()).count()
        + tweets.iter().filter(|t| t.reply_to.is_some()).count();
    prop_assert_eq!(edges.len(), expected);
    Ok(())
}

pub fn weight_sum_identity(tweets: &[Tweet]) -> Result<(), TestCaseError> {
    let edges = extract_interactions(tweets);
    for merge in [false, true] {
        let g = aggregate(&edges, merge);
        prop_assert_eq!(g.total_weight(), edges.len() as u64);
        for (key, _) in g.edges() {
            prop_assert!(g.contains_node(&key.source) && g.contains_node(&key.target));
        }
    }
    Ok(())
}

pub fn notable_idempotent(g: &WeightedGraph, top_n: usize) -> Result<(), TestCaseError> {
    let once = notable_subgraph(g, top_n);
    prop_assert_eq!(once.node_count(), g.node_count().min(top_n));
    prop_assert_eq!(notable_subgraph(&once, top_n), once);
    Ok(())
}

pub fn label_propagation_confined(g: &WeightedGraph, seed: u64) -> Result<(), TestCaseError> {
    let assignment = label_propagation(g, seed, 100);
    prop_assert_eq!(&assignment, &label_propagation(g, seed, 100));
    prop_assert_eq!(assignment.len(), g.node_count());
    let nodes: Vec<&str> = g.nodes().collect();
    for n in &nodes {
        prop_assert!(assignment.get(n).is_some());
    }
    let edges: Vec<(&str, &str)> = g.edges().map(|(k, _)| (k.source.as_str(), k.target.as_str())).collect();
    let components = oracle::components(&nodes, &edges);
    let component_of = |n: &str| components.iter().position(|c| c.contains(n)).unwrap();
    for a in &nodes {
        for b in &nodes {
            if assignment.get(a) == assignment.get(b) {
                prop_assert_eq!(component_of(a), component_of(b), "{} and {} share a label", a, b);
            }
        }
    }
    let labels: BTreeSet<usize> = assignment.iter().map(|(_, l)| l).collect();
    prop_assert_eq!(labels, (0..assignment.community_count()).collect::<BTreeSet<_>>());
    Ok(())
}

pub fn csv_round_trip(g: &WeightedGraph) -> Result<(), TestCaseError> {
    let mut buf = Vec::new();
    write_edges_csv(g, &mut buf).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let back = read_edges_csv(buf.as_slice()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&back, g);
    Ok(())
}

pub fn track_case_invariant(words: &[String], term: &str, upper_mask: u64) -> Result<(), TestCaseError> {
    let flip = |s: &str, salt: u32| -> String {
        s.chars()
            .enumerate()
            .map(|(i, c)| {
                if upper_mask.rotate_left(salt) >> (i % 64) & 1 == 1 {
                    c.to_ascii_uppercase()
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect()
    };
    let text = words.join(" ");
    let terms = vec![term.to_string()];
    let tweet = TweetBuilder::new(1, "a").text(&text).build();
    let shouted = TweetBuilder::new(1, "a").text(&flip(&text, 7)).build();
    let verdict = matches_track(&tweet, &terms);
    prop_assert_eq!(verdict, matches_track(&shouted, &terms));
    prop_assert_eq!(verdict, matches_track(&tweet, &[flip(term, 13)]));
    prop_assert_eq!(verdict, matches_track(&tweet, &[format!("#{term}")]));
    Ok(())
}

pub fn backoff_schedule(uptimes: &[u64]) -> Result<(), TestCaseError> {
    let mut backoff = Backoff::default();
    let mut previous = Duration::ZERO;
    for &uptime in uptimes {
        let uptime = Duration::from_secs(uptime);
        backoff.on_disconnect(uptime);
        let delay = backoff.next_delay();
        prop_assert!(delay >= Duration::from_secs(1) && delay <= Duration::from_secs(320));
        if uptime < Duration::from_secs(60) {
            prop_assert!(delay >= previous, "delay shrank without a healthy connection");
        } else {
            prop_assert_eq!(delay, Duration::from_secs(1));
        }
        previous = delay;
    }
    Ok(())
}

/// Archive lines: valid records (some repeated), garbage and blanks.
pub fn archive_lines() -> impl Strategy<Value = Vec<(u8, u64)>> {
    prop::collection::vec((0u8..4, 1u64..20), 0..60)
}

pub fn read_archive_accounting(lines: &[(u8, u64)], dedupe: bool) -> Result<(), TestCaseError> {
    let mut input = String::new();
    for &(kind, id) in lines {
        match kind {
            0 | 1 => input.push_str(&to_record(&TweetBuilder::new(id, "a").build()).to_string()),
            2 => input.push_str("{\"id\": broken"),
            _ => {}
        }
        input.push('\n');
    }
    let (tweets, stats) = read_records(input.as_bytes(), dedupe).map_err(|e| TestCaseError::fail(e.to_string()))?;
    // Blank lines are records too, and malformed ones.
    prop_assert_eq!(stats.total_lines, lines.len() as u64);
    let bad = lines.iter().filter(|(k, _)| *k >= 2).count() as u64;
    prop_assert_eq!(stats.skipped_malformed, bad);
    prop_assert_eq!(
        stats.parsed + stats.skipped_malformed + stats.duplicates_dropped,
        stats.total_lines
    );
    prop_assert_eq!(tweets.len() as u64, stats.parsed);
    let ids: BTreeSet<u64> = tweets.iter().map(|t| t.id).collect();
    if dedupe {
        prop_assert_eq!(ids.len(), tweets.len());
    } else {
        prop_assert_eq!(stats.duplicates_dropped, 0);
    }
    Ok(())
}

/// Counting on two halves and merging equals one pass.
pub fn split_merge(tweets: &[Tweet], cut: usize) -> Result<(), TestCaseError> {
    let cut = cut.min(tweets.len());
    let (left, right) = tweets.split_at(cut);

    let mut whole = BucketCounts::new(Granularity::Hour, TzOffset::UTC);
    tweets.iter().for_each(|t| whole.add(t.created_at));
    let mut a = BucketCounts::new(Granularity::Hour, TzOffset::UTC);
    left.iter().for_each(|t| a.add(t.created_at));
    let mut b = BucketCounts::new(Granularity::Hour, TzOffset::UTC);
    right.iter().for_each(|t| b.add(t.created_at));
    a.merge(b);
    prop_assert_eq!(a.into_buckets(), whole.into_buckets());

    let tally = |part: &[Tweet]| {
        let mut t = Tally::new();
        part.iter().for_each(|tw| t.add(tw.author.clone()));
        t
    };
    let mut merged = tally(left);
    merged.merge(tally(right));
    prop_assert_eq!(merged.top(usize::MAX), tally(tweets).top(usize::MAX));

    let retweets = |part: &[Tweet]| {
        let mut t = RetweetTally::new();
        part.iter().for_each(|tw| t.add(tw));
        t
    };
    for source in [CountSource::Observed, CountSource::Embedded] {
        let mut merged = retweets(left);
        merged.merge(retweets(right));
        prop_assert_eq!(merged.top(usize::MAX, source), retweets(tweets).top(usize::MAX, source));
    }
    Ok(())
}

/// Every analytics and graph operation against its brute-force oracle.
pub fn oracle_equivalence(tweets: &[Tweet]) -> Result<(), String> {
    let check = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(format!("{what} differs from oracle"))
        }
    };

    for (g, secs) in [(Granularity::Hour, 3_600), (Granularity::Day, 86_400)] {
        for offset in [0, 60, -300] {
            let got: Vec<(i64, u64)> = histogram(tweets, g, TzOffset::from_minutes(offset).unwrap())
                .iter()
                .map(|b| (b.start.naive_local().and_utc().timestamp(), b.count))
                .collect();
            check(got == oracle::histogram(tweets, secs, offset), "histogram")?;
        }
    }

    let all = usize::MAX;
    let users = |entries: Vec<eventpulse::analytics::RankedEntry<String>>| -> Vec<(String, u64)> {
        entries
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                assert_eq!(e.rank, i + 1);
                (e.key, e.score)
            })
            .collect()
    };
    check(
        users(top_users_by_activity(tweets, all)) == oracle::users_by_activity(tweets),
        "activity ranking",
    )?;
    check(
        users(top_users_by_received_retweets(tweets, all)) == oracle::users_by_received_retweets(tweets),
        "received-retweets ranking",
    )?;
    for (source, embedded) in [(CountSource::Observed, false), (CountSource::Embedded, true)] {
        let got: Vec<oracle::RankedTweet> = top_tweets_by_retweets(tweets, all, source)
            .into_iter()
            .map(|t| oracle::RankedTweet {
                id: t.entry.key,
                score: t.entry.score,
                author: t.author,
                text: t.text,
            })
            .collect();
        check(got == oracle::tweets_by_retweets(tweets, embedded), "tweet ranking")?;
    }
    for k in [1, 10] {
        let head: Vec<(String, u64)> = users(top_users_by_activity(tweets, k));
        let expected: Vec<(String, u64)> = oracle::users_by_activity(tweets).into_iter().take(k).collect();
        check(head == expected, "top-k truncation")?;
    }

    let rows: Vec<(u64, f64, f64)> = extract_coordinates(tweets)
        .into_iter()
        .map(|r| (r.id, r.latitude, r.longitude))
        .collect();
    check(rows == oracle::coordinates(tweets), "coordinates")?;

    let edges = extract_interactions(tweets);
    let got: Vec<(String, String, &'static str, u64)> = edges
        .iter()
        .map(|e| (e.source.clone(), e.target.clone(), e.kind.as_str(), e.tweet_id))
        .collect();
    let expected = oracle::interactions(tweets);
    check(got == expected, "interactions")?;

    for merge in [false, true] {
        let g = aggregate(&edges, merge);
        let weights: std::collections::BTreeMap<(String, String, &'static str), u64> = g
            .edges()
            .map(|(k, w)| {
                (
                    (k.source.clone(), k.target.clone(), k.kind.map_or("", EdgeKind::as_str)),
                    w,
                )
            })
            .collect();
        check(weights == oracle::aggregate(&expected, merge), "aggregate weights")?;
        let endpoints: BTreeSet<&str> = expected
            .iter()
            .flat_map(|(s, t, _, _)| [s.as_str(), t.as_str()])
            .collect();
        check(g.nodes().collect::<BTreeSet<_>>() == endpoints, "aggregate nodes")?;
    }
    Ok(())
}
