//! Geotagged tweets as `id,latitude,longitude` CSV for web mapping tools.
//!
//! ```bash
//! cargo run -p eventpulse --example coordinates -- [archive.jsonl] > points.csv
//! ```

mod common;

use eventpulse::analytics::{extract_coordinates, write_coordinates_csv};

fn main() -> csv::Result<()> {
    let tweets = common::corpus_from_args();
    let rows = extract_coordinates(&tweets);
    eprintln!("{} of {} tweets carry coordinates", rows.len(), tweets.len());
    write_coordinates_csv(&rows, std::io::stdout().lock())
}
