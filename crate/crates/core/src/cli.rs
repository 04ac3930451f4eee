//! The `eventpulse` command line.
//!
//! Exit codes: 0 on success, 1 on an operational failure (message on the
//! error stream), 2 on a usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{self, CountSource, Granularity, RankedEntry, TopTweet, TzOffset};
use crate::collector::{
    self, load_credentials, CollectionJob, HttpSearchSource, HttpStreamSource, Mode, OAuth1Signer, StopSignal,
    SystemClock,
};
use crate::graph::{self, CommunityAssignment, DEFAULT_MAX_ITERS};
use crate::tweet::{read_archive, ParseStats, Tweet};

/// Overrides the default credentials path.
pub const CONFIG_ENV: &str = "EVENTPULSE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "eventpulse",
    version,
    about = "Collect and analyze an event's social-media footprint"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalConfig {
    /// Credentials file (four OAuth keys); defaults to ./twitter.ini or $EVENTPULSE_CONFIG.
    #[arg(long, global = true, value_name = "PATH")]
    pub credentials: Option<PathBuf>,
    /// Root directory for collected archives.
    #[arg(long, global = true, default_value = "./data", value_name = "DIR")]
    pub data_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// Fixed UTC offset in minutes for time bucketing (-840..=840).
    #[arg(long = "tz", global = true, default_value_t = 0, allow_hyphen_values = true,
          value_parser = clap::value_parser!(i32).range(-840..=840))]
    pub tz_offset_minutes: i32,
    /// Seed for community detection.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
}

impl GlobalConfig {
    pub fn credentials_path(&self) -> PathBuf {
        self.credentials
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("./twitter.ini"))
    }

    fn tz(&self) -> TzOffset {
        TzOffset::from_minutes(self.tz_offset_minutes).expect("range checked by the parser")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CollectMode {
    Stream,
    SearchRecent,
    SearchPopular,
}

impl From<CollectMode> for Mode {
    fn from(m: CollectMode) -> Mode {
        match m {
            CollectMode::Stream => Mode::Stream,
            CollectMode::SearchRecent => Mode::SearchRecent,
            CollectMode::SearchPopular => Mode::SearchPopular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GranularityArg {
    #[value(alias = "h")]
    Hour,
    #[value(alias = "d")]
    Day,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountSourceArg {
    Observed,
    Embedded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UserRanking {
    Activity,
    Retweets,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collect matching posts into <data-dir>/<event-name>/.
    Collect {
        #[arg(value_enum)]
        mode: CollectMode,
        event_name: String,
        /// Keywords or hashtags to track.
        #[arg(required = true)]
        terms: Vec<String>,
        /// Source endpoint; defaults to a local replay server.
        #[arg(long, value_name = "URL")]
        endpoint: Option<String>,
        /// Send unsigned requests (local replay servers).
        #[arg(long)]
        no_auth: bool,
        /// Stop search mode after this many pages.
        #[arg(long)]
        page_limit: Option<usize>,
    },
    /// Tweets per hour or day, written as `<start>\t<count>` lines.
    Histogram {
        archive: PathBuf,
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = GranularityArg::Hour)]
        granularity: GranularityArg,
    },
    /// Most retweeted tweets.
    TopTweets {
        #[arg(short = 'f', long = "file")]
        archive: PathBuf,
        #[arg(short = 'k', default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_enum, default_value_t = CountSourceArg::Observed)]
        count_source: CountSourceArg,
    },
    /// Most active users, or users whose posts were retweeted most.
    TopUsers {
        #[arg(short = 'f', long = "file")]
        archive: PathBuf,
        #[arg(short = 'k', default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_enum)]
        by: UserRanking,
    },
    /// Geotagged tweets as `id,latitude,longitude` CSV.
    Coordinates { archive: PathBuf, out: PathBuf },
    /// Retweet/reply interaction graph as an edge CSV.
    Interactions {
        archive: PathBuf,
        out: PathBuf,
        /// One edge per user pair regardless of interaction kind.
        #[arg(long)]
        merge_kinds: bool,
        /// Keep only the N users with the largest weighted degree (default 50).
        #[arg(long, num_args = 0..=1, default_missing_value = "50", value_name = "N",
              value_parser = clap::value_parser!(u64).range(1..))]
        top: Option<u64>,
        /// Print community assignments.
        #[arg(long)]
        communities: bool,
        /// Also write GEXF with a community attribute per node.
        #[arg(long, value_name = "PATH")]
        gexf: Option<PathBuf>,
    },
    /// Parse statistics and a corpus summary.
    Stats { archive: PathBuf },
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

/// Parses `argv` (program name first) and runs one subcommand.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn load(archive: &Path) -> Result<(Vec<Tweet>, ParseStats), Box<dyn std::error::Error>> {
    read_archive(archive, true).map_err(|e| format!("cannot read {}: {e}", archive.display()).into())
}

fn create(path: &Path) -> Result<BufWriter<File>, Box<dyn std::error::Error>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn stop_signal() -> StopSignal {
    static STOP: OnceLock<StopSignal> = OnceLock::new();
    STOP.get_or_init(|| {
        let stop = StopSignal::new();
        let handler = stop.clone();
        if let Err(e) = ctrlc::set_handler(move || handler.stop()) {
            log::warn!("cannot install interrupt handler: {e}");
        }
        stop
    })
    .clone()
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult {
    let global = &cli.global;
    match &cli.command {
        Command::Collect {
            mode,
            event_name,
            terms,
            endpoint,
            no_auth,
            page_limit,
        } => {
            let mode = Mode::from(*mode);
            let job = CollectionJob {
                mode,
                event_name: event_name.clone(),
                track_terms: terms.clone(),
                archive_dir: global.data_dir.clone(),
                page_limit: *page_limit,
            };
            job.validate()?;
            let signer = if *no_auth {
                None
            } else {
                Some(Box::new(OAuth1Signer::new(load_credentials(
                    global.credentials_path(),
                )?)))
            };
            let stop = stop_signal();
            let stats = match mode {
                Mode::Stream => {
                    let url = endpoint
                        .clone()
                        .unwrap_or_else(|| "http://127.0.0.1:8080/stream".into());
                    let mut source = HttpStreamSource::new(&url)?;
                    if let Some(signer) = signer {
                        source = source.with_signer(signer);
                    }
                    collector::collect_stream(&job, &mut source, &SystemClock, &stop)?
                }
                Mode::SearchRecent | Mode::SearchPopular => {
                    let url = endpoint
                        .clone()
                        .unwrap_or_else(|| "http://127.0.0.1:8080/search".into());
                    let mut source = HttpSearchSource::new(&url)?;
                    if let Some(signer) = signer {
                        source = source.with_signer(signer);
                    }
                    collector::collect_search(&job, &mut source, &SystemClock, &stop)?
                }
            };
            writeln!(out, "{stats}")?;
            writeln!(out, "archive: {}", job.event_dir().display())?;
        }
        Command::Histogram {
            archive,
            out: path,
            granularity,
        } => {
            let (tweets, _) = load(archive)?;
            let granularity = match granularity {
                GranularityArg::Hour => Granularity::Hour,
                GranularityArg::Day => Granularity::Day,
            };
            let buckets = analytics::histogram(&tweets, granularity, global.tz());
            let mut file = create(path)?;
            analytics::write_histogram_dat(&buckets, &mut file)?;
            file.flush()?;
            writeln!(out, "{} buckets written to {}", buckets.len(), path.display())?;
        }
        Command::TopTweets {
            archive,
            k,
            count_source,
        } => {
            let (tweets, _) = load(archive)?;
            let source = match count_source {
                CountSourceArg::Observed => CountSource::Observed,
                CountSourceArg::Embedded => CountSource::Embedded,
            };
            let top = analytics::top_tweets_by_retweets(&tweets, *k as usize, source);
            print_top_tweets(&top, global.format, out)?;
        }
        Command::TopUsers { archive, k, by } => {
            let (tweets, _) = load(archive)?;
            let top = match by {
                UserRanking::Activity => analytics::top_users_by_activity(&tweets, *k as usize),
                UserRanking::Retweets => analytics::top_users_by_received_retweets(&tweets, *k as usize),
            };
            print_top_users(&top, global.format, out)?;
        }
        Command::Coordinates { archive, out: path } => {
            let (tweets, _) = load(archive)?;
            let rows = analytics::extract_coordinates(&tweets);
            let mut file = create(path)?;
            analytics::write_coordinates_csv(&rows, &mut file)?;
            file.flush()?;
            writeln!(out, "{} geotagged tweets written to {}", rows.len(), path.display())?;
        }
        Command::Interactions {
            archive,
            out: path,
            merge_kinds,
            top,
            communities,
            gexf,
        } => {
            let (tweets, _) = load(archive)?;
            let edges = graph::extract_interactions(&tweets);
            let mut g = graph::aggregate(&edges, *merge_kinds);
            if let Some(n) = top {
                g = graph::notable_subgraph(&g, *n as usize);
            }
            graph::write_edges_csv(&g, create(path)?)?;
            writeln!(
                out,
                "{} interactions, {} users, {} weighted edges written to {}",
                edges.len(),
                g.node_count(),
                g.edge_count(),
                path.display()
            )?;
            if *communities || gexf.is_some() {
                let assignment = graph::label_propagation(&g, global.seed, DEFAULT_MAX_ITERS);
                if let Some(gexf_path) = gexf {
                    graph::write_gexf(&g, &assignment, create(gexf_path)?)?;
                    writeln!(out, "gexf written to {}", gexf_path.display())?;
                }
                if *communities {
                    print_communities(&assignment, global.format, out)?;
                }
            }
        }
        Command::Stats { archive } => {
            let (tweets, stats) = load(archive)?;
            writeln!(out, "{} lines", stats.total_lines)?;
            writeln!(out, "{} parsed", stats.parsed)?;
            writeln!(out, "{} malformed", stats.skipped_malformed)?;
            writeln!(out, "{} duplicates dropped", stats.duplicates_dropped)?;
            write!(out, "{}", analytics::summarize(&tweets))?;
        }
    }
    Ok(())
}

fn print_top_users(top: &[RankedEntry<String>], format: OutputFormat, out: &mut dyn Write) -> CliResult {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["key", "score"])?;
            for e in top {
                w.write_record([e.key.as_str(), &e.score.to_string()])?;
            }
            w.flush()?;
        }
        OutputFormat::Table => {
            let name_w = top.iter().map(|e| e.key.chars().count() + 1).max().unwrap_or(0);
            let score_w = top.iter().map(|e| e.score.to_string().len()).max().unwrap_or(0);
            for e in top {
                writeln!(out, "{:<name_w$} {:>score_w$}", format!("@{}", e.key), e.score)?;
            }
        }
    }
    Ok(())
}

fn print_top_tweets(top: &[TopTweet], format: OutputFormat, out: &mut dyn Write) -> CliResult {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["key", "score"])?;
            for t in top {
                w.write_record([t.entry.key.to_string(), t.entry.score.to_string()])?;
            }
            w.flush()?;
        }
        OutputFormat::Table => {
            let author_w = top
                .iter()
                .map(|t| t.author.chars().count() + t.entry.score.to_string().len() + 4)
                .max()
                .unwrap_or(0);
            for t in top {
                let who = format!("@{} ({})", t.author, t.entry.score);
                let text = t.text.replace(['\n', '\r'], " ");
                writeln!(out, "{who:<author_w$} {:>20} {text}", t.entry.key)?;
            }
        }
    }
    Ok(())
}

fn print_communities(assignment: &CommunityAssignment, format: OutputFormat, out: &mut dyn Write) -> CliResult {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["node", "community"])?;
            for (node, label) in assignment.iter() {
                w.write_record([node, &label.to_string()])?;
            }
            w.flush()?;
        }
        OutputFormat::Table => {
            writeln!(out, "{} communities", assignment.community_count())?;
            for (label, members) in assignment.communities().iter().enumerate() {
                writeln!(out, "{label:>4} ({}) {}", members.len(), members.join(" "))?;
            }
        }
    }
    Ok(())
}
