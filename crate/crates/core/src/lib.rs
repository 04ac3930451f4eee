//! Collect keyword-filtered social-media posts into line-delimited archives
//! and measure an event's footprint: hourly histograms, retweet and user
//! rankings, geotag extraction and the user-interaction graph.
//!
//! The runnable programs under `examples/` walk through each capability;
//! the `eventpulse` binary exposes the same pipeline as subcommands.

pub mod analytics;
pub mod cli;
pub mod collector;
pub mod error;
pub mod graph;
pub mod testing;
pub mod tweet;

pub use error::{CollectError, ConfigError, ExportError, ParseError};
pub use tweet::{parse_tweet, read_archive, ParseStats, Tweet};
