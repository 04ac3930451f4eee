//! Structural validator for GEXF 1.2draft documents.
//!
//! Encodes the schema's content model for the subset of elements the graph
//! tools read (no viz or dynamic extensions): element order and
//! cardinality, required attributes, enumerated values, typed values, and
//! the id references the schema leaves to consumers.

use std::collections::{HashMap, HashSet};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

pub const NAMESPACE: &str = "http://www.gexf.net/1.2draft";

#[derive(Debug, Default)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Element>,
    text: String,
}

impl Element {
    fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn require(&self, name: &str) -> Result<&str, String> {
        self.attr(name)
            .ok_or_else(|| format!("<{}> lacks required attribute `{name}`", self.name))
    }

    fn allow_attrs(&self, allowed: &[&str]) -> Result<(), String> {
        for (k, _) in &self.attrs {
            let namespaced = k.starts_with("xmlns") || k.starts_with("xsi:");
            if !namespaced && !allowed.contains(&k.as_str()) {
                return Err(format!("<{}> has unexpected attribute `{k}`", self.name));
            }
        }
        Ok(())
    }

    fn no_text(&self) -> Result<(), String> {
        if self.text.trim().is_empty() {
            Ok(())
        } else {
            Err(format!("<{}> must not contain text", self.name))
        }
    }
}

fn element(e: &BytesStart) -> Result<Element, String> {
    let mut el = Element {
        name: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
        ..Element::default()
    };
    for a in e.attributes() {
        let a = a.map_err(|e| format!("bad attribute: {e}"))?;
        let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        if el.attr(&key).is_some() {
            return Err(format!("<{}> repeats attribute `{key}`", el.name));
        }
        let value = a.unescape_value().map_err(|e| format!("bad attribute value: {e}"))?;
        el.attrs.push((key, value.into_owned()));
    }
    Ok(el)
}

fn parse(xml: &str) -> Result<Element, String> {
    let mut reader = Reader::from_str(xml);
    let mut stack: Vec<Element> = Vec::new();
    let mut root = None;
    let mut saw_decl = false;
    loop {
        let event = reader.read_event().map_err(|e| format!("not well-formed: {e}"))?;
        match event {
            Event::Decl(d) => {
                let version = d.version().map_err(|e| e.to_string())?;
                if version.as_ref() != b"1.0" {
                    return Err("XML declaration must say version 1.0".into());
                }
                saw_decl = true;
            }
            Event::Start(e) | Event::Empty(e) if root.is_some() => {
                return Err(format!(
                    "content after the root element: <{}>",
                    String::from_utf8_lossy(e.name().as_ref())
                ))
            }
            Event::Start(e) => stack.push(element(&e)?),
            Event::Empty(e) => {
                let el = element(&e)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::End(_) => {
                let el = stack.pop().ok_or("unbalanced end tag")?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| format!("bad text: {e}"))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&text),
                    None if text.trim().is_empty() => {}
                    None => return Err("text outside the root element".into()),
                }
            }
            Event::CData(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err("unclosed elements at end of document".into());
    }
    if !saw_decl {
        return Err("missing XML declaration".into());
    }
    root.ok_or_else(|| "empty document".into())
}

fn one_of(el: &Element, attr: &str, allowed: &[&str]) -> Result<(), String> {
    match el.attr(attr) {
        Some(v) if !allowed.contains(&v) => Err(format!("<{}> {attr}=`{v}` not in {allowed:?}", el.name)),
        _ => Ok(()),
    }
}

fn value_has_type(value: &str, ty: &str) -> bool {
    match ty {
        "integer" => value.parse::<i32>().is_ok(),
        "long" => value.parse::<i64>().is_ok(),
        "float" | "double" => value.parse::<f64>().is_ok(),
        "boolean" => matches!(value, "true" | "false" | "1" | "0"),
        _ => true,
    }
}

/// Checks the `<attributes class=..>` block and returns `id -> type`.
fn attribute_decls(el: &Element) -> Result<HashMap<String, String>, String> {
    el.allow_attrs(&["class", "mode", "start", "end"])?;
    el.require("class")?;
    one_of(el, "class", &["node", "edge"])?;
    one_of(el, "mode", &["static", "dynamic"])?;
    el.no_text()?;
    let mut decls = HashMap::new();
    for a in &el.children {
        if a.name != "attribute" {
            return Err(format!("<attributes> may not contain <{}>", a.name));
        }
        a.allow_attrs(&["id", "title", "type"])?;
        let id = a.require("id")?;
        a.require("title")?;
        let ty = a.require("type")?;
        one_of(
            a,
            "type",
            &[
                "integer",
                "long",
                "double",
                "float",
                "boolean",
                "liststring",
                "string",
                "anyURI",
            ],
        )?;
        for child in &a.children {
            if !matches!(child.name.as_str(), "default" | "options") {
                return Err(format!("<attribute> may not contain <{}>", child.name));
            }
        }
        if decls.insert(id.to_string(), ty.to_string()).is_some() {
            return Err(format!("attribute id `{id}` declared twice"));
        }
    }
    Ok(decls)
}

fn attvalues(el: &Element, decls: &HashMap<String, String>) -> Result<(), String> {
    el.no_text()?;
    if el.children.is_empty() {
        return Err("<attvalues> must hold at least one <attvalue>".into());
    }
    for v in &el.children {
        if v.name != "attvalue" {
            return Err(format!("<attvalues> may not contain <{}>", v.name));
        }
        v.allow_attrs(&["for", "value", "start", "end", "startopen", "endopen"])?;
        let target = v.require("for")?;
        let value = v.require("value")?;
        let ty = decls
            .get(target)
            .ok_or_else(|| format!("attvalue for undeclared attribute `{target}`"))?;
        if !value_has_type(value, ty) {
            return Err(format!("attvalue `{value}` is not a valid {ty}"));
        }
    }
    Ok(())
}

/// Returns `Ok(())` when `xml` is a valid GEXF 1.2draft document.
pub fn validate(xml: &str) -> Result<(), String> {
    let root = parse(xml)?;
    if root.name != "gexf" {
        return Err(format!("root element is <{}>, expected <gexf>", root.name));
    }
    root.allow_attrs(&["version", "variant"])?;
    if root.attr("xmlns") != Some(NAMESPACE) {
        return Err(format!("default namespace must be {NAMESPACE}"));
    }
    if root.require("version")? != "1.2" {
        return Err("gexf version must be 1.2".into());
    }
    root.no_text()?;

    let mut children = root.children.iter().peekable();
    if let Some(meta) = children.next_if(|c| c.name == "meta") {
        meta.allow_attrs(&["lastmodifieddate"])?;
        meta.no_text()?;
        for m in &meta.children {
            if !matches!(m.name.as_str(), "creator" | "keywords" | "description") {
                return Err(format!("<meta> may not contain <{}>", m.name));
            }
            if !m.children.is_empty() {
                return Err(format!("<{}> must be text only", m.name));
            }
        }
    }
    let graph = children
        .next()
        .filter(|c| c.name == "graph")
        .ok_or("expected exactly one <graph>")?;
    if let Some(extra) = children.next() {
        return Err(format!("unexpected <{}> after <graph>", extra.name));
    }

    graph.allow_attrs(&[
        "timeformat",
        "start",
        "end",
        "startopen",
        "endopen",
        "defaultedgetype",
        "idtype",
        "mode",
    ])?;
    one_of(graph, "defaultedgetype", &["directed", "undirected", "mutual"])?;
    one_of(graph, "idtype", &["integer", "string"])?;
    one_of(graph, "mode", &["static", "dynamic"])?;
    graph.no_text()?;

    let mut node_decls = HashMap::new();
    let mut edge_decls = HashMap::new();
    let mut parts = graph.children.iter().peekable();
    while let Some(block) = parts.next_if(|c| c.name == "attributes") {
        let decls = attribute_decls(block)?;
        let into = if block.attr("class") == Some("node") {
            &mut node_decls
        } else {
            &mut edge_decls
        };
        for (k, v) in decls {
            if into.insert(k.clone(), v).is_some() {
                return Err(format!("attribute id `{k}` declared twice"));
            }
        }
    }

    let mut node_ids = HashSet::new();
    if let Some(nodes) = parts.next_if(|c| c.name == "nodes") {
        nodes.allow_attrs(&["count"])?;
        nodes.no_text()?;
        for node in &nodes.children {
            if node.name != "node" {
                return Err(format!("<nodes> may not contain <{}>", node.name));
            }
            node.allow_attrs(&["id", "label", "pid", "start", "end", "startopen", "endopen"])?;
            let id = node.require("id")?;
            if !node_ids.insert(id.to_string()) {
                return Err(format!("duplicate node id `{id}`"));
            }
            node.no_text()?;
            for child in &node.children {
                match child.name.as_str() {
                    "attvalues" => attvalues(child, &node_decls)?,
                    "spells" | "parents" => {}
                    other => return Err(format!("<node> may not contain <{other}>")),
                }
            }
        }
        if let Some(count) = nodes.attr("count") {
            if count.parse::<usize>().ok() != Some(nodes.children.len()) {
                return Err("nodes count attribute disagrees with content".into());
            }
        }
    }

    if let Some(edges) = parts.next_if(|c| c.name == "edges") {
        edges.allow_attrs(&["count"])?;
        edges.no_text()?;
        let mut edge_ids = HashSet::new();
        for edge in &edges.children {
            if edge.name != "edge" {
                return Err(format!("<edges> may not contain <{}>", edge.name));
            }
            edge.allow_attrs(&["id", "source", "target", "label", "type", "weight", "start", "end"])?;
            let id = edge.require("id")?;
            if !edge_ids.insert(id.to_string()) {
                return Err(format!("duplicate edge id `{id}`"));
            }
            for end in ["source", "target"] {
                let node = edge.require(end)?;
                if !node_ids.contains(node) {
                    return Err(format!("edge {id} {end} `{node}` is not a node"));
                }
            }
            one_of(edge, "type", &["directed", "undirected", "mutual"])?;
            if let Some(w) = edge.attr("weight") {
                if !w.parse::<f32>().is_ok_and(f32::is_finite) {
                    return Err(format!("edge {id} weight `{w}` is not a float"));
                }
            }
            edge.no_text()?;
            for child in &edge.children {
                match child.name.as_str() {
                    "attvalues" => attvalues(child, &edge_decls)?,
                    "spells" => {}
                    other => return Err(format!("<edge> may not contain <{other}>")),
                }
            }
        }
    }

    if let Some(extra) = parts.next() {
        return Err(format!("unexpected <{}> inside <graph>", extra.name));
    }
    Ok(())
}
