//! Edge-list CSV and GEXF 1.2 writers, plus the CSV reader.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, BytesText, Event};
use quick_xml::Writer;

use super::{CommunityAssignment, EdgeKind, WeightedGraph};
use crate::error::ExportError;

const GEXF_NS: &str = "http://www.gexf.net/1.2draft";
const XSI_NS: &str = "http://www.w3.org/2001/XMLSchema-instance";
const GEXF_SCHEMA_LOCATION: &str = "http://www.gexf.net/1.2draft http://www.gexf.net/1.2draft/gexf.xsd";

/// Writes `Source,Target,Weight[,Kind]`; the kind column is absent on a
/// kind-merged graph.
pub fn write_edges_csv<W: Write>(graph: &WeightedGraph, out: W) -> Result<(), ExportError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if graph.merged_kinds() {
        writer.write_record(["Source", "Target", "Weight"])?;
    } else {
        writer.write_record(["Source", "Target", "Weight", "Kind"])?;
    }
    for (key, weight) in graph.edges() {
        let weight = weight.to_string();
        match key.kind {
            Some(kind) if !graph.merged_kinds() => {
                writer.write_record([key.source.as_str(), key.target.as_str(), &weight, kind.as_str()])?
            }
            _ => writer.write_record([key.source.as_str(), key.target.as_str(), &weight])?,
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn export_edges_csv(graph: &WeightedGraph, path: impl AsRef<Path>) -> Result<(), ExportError> {
    let file = File::create(path)?;
    write_edges_csv(graph, BufWriter::new(file))
}

/// Reads an edge CSV written by [`write_edges_csv`]. Only nodes that are
/// edge endpoints survive the trip.
pub fn read_edges_csv<R: Read>(input: R) -> Result<WeightedGraph, ExportError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers()?.clone();
    let merged = match header.iter().collect::<Vec<_>>().as_slice() {
        ["Source", "Target", "Weight"] => true,
        ["Source", "Target", "Weight", "Kind"] => false,
        _ => {
            return Err(ExportError::Format {
                line: 1,
                message: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
            })
        }
    };
    let mut graph = WeightedGraph::new(merged);
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| ExportError::Format { line, message };
        let weight: u64 = record[2]
            .parse()
            .map_err(|_| bad(format!("bad weight `{}`", &record[2])))?;
        if weight == 0 {
            return Err(bad("zero weight".into()));
        }
        let kind = if merged {
            None
        } else {
            Some(record[3].parse::<EdgeKind>().map_err(bad)?)
        };
        graph.add_edge(&record[0], &record[1], kind, weight);
    }
    Ok(graph)
}

fn xml_err(e: impl std::fmt::Display) -> ExportError {
    ExportError::Xml(e.to_string())
}

/// Writes GEXF 1.2 with directed edges, a `weight` per edge and an integer
/// `community` attribute per node. Nodes absent from `communities` are
/// written without the attribute value.
pub fn write_gexf<W: Write>(
    graph: &WeightedGraph,
    communities: &CommunityAssignment,
    out: W,
) -> Result<(), ExportError> {
    let mut w = Writer::new_with_indent(out, b' ', 2);
    w.write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))
        .map_err(xml_err)?;

    let mut root = BytesStart::new("gexf");
    root.push_attribute(("xmlns", GEXF_NS));
    root.push_attribute(("xmlns:xsi", XSI_NS));
    root.push_attribute(("xsi:schemaLocation", GEXF_SCHEMA_LOCATION));
    root.push_attribute(("version", "1.2"));
    w.write_event(Event::Start(root)).map_err(xml_err)?;

    w.create_element("meta")
        .write_inner_content(|w| {
            w.create_element("creator")
                .write_text_content(BytesText::new("eventpulse"))?;
            w.create_element("description")
                .write_text_content(BytesText::new("user interaction graph"))?;
            Ok(())
        })
        .map_err(xml_err)?;

    let mut graph_el = BytesStart::new("graph");
    graph_el.push_attribute(("mode", "static"));
    graph_el.push_attribute(("defaultedgetype", "directed"));
    w.write_event(Event::Start(graph_el)).map_err(xml_err)?;

    w.create_element("attributes")
        .with_attribute(("class", "node"))
        .write_inner_content(|w| {
            w.create_element("attribute")
                .with_attributes([("id", "community"), ("title", "community"), ("type", "integer")])
                .write_empty()?;
            Ok(())
        })
        .map_err(xml_err)?;
    if !graph.merged_kinds() {
        w.create_element("attributes")
            .with_attribute(("class", "edge"))
            .write_inner_content(|w| {
                w.create_element("attribute")
                    .with_attributes([("id", "kind"), ("title", "kind"), ("type", "string")])
                    .write_empty()?;
                Ok(())
            })
            .map_err(xml_err)?;
    }

    w.write_event(Event::Start(BytesStart::new("nodes"))).map_err(xml_err)?;
    for node in graph.nodes() {
        let el = w
            .create_element("node")
            .with_attributes([("id", node), ("label", node)]);
        match communities.get(node) {
            Some(label) => {
                let label = label.to_string();
                el.write_inner_content(|w| {
                    w.create_element("attvalues").write_inner_content(|w| {
                        w.create_element("attvalue")
                            .with_attributes([("for", "community"), ("value", label.as_str())])
                            .write_empty()?;
                        Ok(())
                    })?;
                    Ok(())
                })
                .map_err(xml_err)?;
            }
            None => {
                el.write_empty().map_err(xml_err)?;
            }
        }
    }
    w.write_event(Event::End(BytesEnd::new("nodes"))).map_err(xml_err)?;

    w.write_event(Event::Start(BytesStart::new("edges"))).map_err(xml_err)?;
    for (i, (key, weight)) in graph.edges().enumerate() {
        let id = i.to_string();
        let weight = weight.to_string();
        let el = w.create_element("edge").with_attributes([
            ("id", id.as_str()),
            ("source", key.source.as_str()),
            ("target", key.target.as_str()),
            ("weight", weight.as_str()),
        ]);
        match key.kind.filter(|_| !graph.merged_kinds()) {
            Some(kind) => {
                el.write_inner_content(|w| {
                    w.create_element("attvalues").write_inner_content(|w| {
                        w.create_element("attvalue")
                            .with_attributes([("for", "kind"), ("value", kind.as_str())])
                            .write_empty()?;
                        Ok(())
                    })?;
                    Ok(())
                })
                .map_err(xml_err)?;
            }
            None => {
                el.write_empty().map_err(xml_err)?;
            }
        }
    }
    w.write_event(Event::End(BytesEnd::new("edges"))).map_err(xml_err)?;

    w.write_event(Event::End(BytesEnd::new("graph"))).map_err(xml_err)?;
    w.write_event(Event::End(BytesEnd::new("gexf"))).map_err(xml_err)?;
    let mut out = w.into_inner();
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn export_gexf(
    graph: &WeightedGraph,
    communities: &CommunityAssignment,
    path: impl AsRef<Path>,
) -> Result<(), ExportError> {
    let file = File::create(path)?;
    write_gexf(graph, communities, BufWriter::new(file))
}
