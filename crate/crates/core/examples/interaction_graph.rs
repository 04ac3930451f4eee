//! Retweet/reply graph: aggregate weights, keep the notable users, detect
//! communities and export CSV + GEXF for graph tools.
//!
//! ```bash
//! cargo run -p eventpulse --example interaction_graph -- [archive.jsonl]
//! ```

mod common;

use eventpulse::graph::{
    aggregate, export_edges_csv, export_gexf, extract_interactions, label_propagation, notable_subgraph, EdgeKind,
    DEFAULT_MAX_ITERS, DEFAULT_TOP_N,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tweets = common::corpus_from_args();
    let edges = extract_interactions(&tweets);
    let self_loops = edges.iter().filter(|e| e.is_self_loop()).count();
    println!("{} interactions ({self_loops} self-loops)", edges.len());

    let graph = aggregate(&edges, false);
    let hub = graph
        .in_weight(Some(EdgeKind::Retweet))
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)));
    println!(
        "{} users, {} weighted edges, top retweeted hub {hub:?}",
        graph.node_count(),
        graph.edge_count()
    );

    let notable = notable_subgraph(&graph, DEFAULT_TOP_N);
    let communities = label_propagation(&notable, 42, DEFAULT_MAX_ITERS);
    println!(
        "notable subgraph: {} users, {} communities after {} sweeps",
        notable.node_count(),
        communities.community_count(),
        communities.iterations()
    );
    for (label, members) in communities.communities().iter().enumerate().take(5) {
        println!("  {label}: {}", members.join(" "));
    }

    let dir = tempfile::tempdir()?;
    let csv_path = dir.path().join("interactions.csv");
    let gexf_path = dir.path().join("interactions.gexf");
    export_edges_csv(&notable, &csv_path)?;
    export_gexf(&notable, &communities, &gexf_path)?;
    println!(
        "{}",
        std::fs::read_to_string(&csv_path)?
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!("gexf: {} bytes", std::fs::metadata(&gexf_path)?.len());
    Ok(())
}
