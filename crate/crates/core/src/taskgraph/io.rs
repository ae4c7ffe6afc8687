//! Graph file formats: canonical JSON, a best-effort XML task description
//! importer, and DOT export.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{DepEdge, GraphError, TaskGraph, TaskId, TaskNode};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: u64,
    cost: f64,
    #[serde(default)]
    work: Option<f64>,
    #[serde(default)]
    mem_req: Option<f64>,
    #[serde(default)]
    disk_req: Option<f64>,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    src: u64,
    dst: u64,
    #[serde(default)]
    data_size: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRecord {
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
}

/// Maps arbitrary unique ids onto `0..n` in ascending order. When the file ids
/// were not already dense, the original id is kept as the task name.
fn densify(mut record: GraphRecord) -> Result<TaskGraph, GraphError> {
    record.nodes.sort_by_key(|n| n.id);
    let already_dense = record.nodes.iter().enumerate().all(|(i, n)| n.id == i as u64);
    let mut index = HashMap::with_capacity(record.nodes.len());
    let mut nodes = Vec::with_capacity(record.nodes.len());
    for (i, r) in record.nodes.into_iter().enumerate() {
        if index.insert(r.id, i).is_some() {
            return Err(GraphError::Parse(format!("duplicate task id {}", r.id)));
        }
        let name = match r.name {
            Some(name) => Some(name),
            None if !already_dense => Some(r.id.to_string()),
            None => None,
        };
        nodes.push(TaskNode {
            id: TaskId(i),
            cost: r.cost,
            work: r.work,
            mem_req: r.mem_req.unwrap_or(0.0),
            disk_req: r.disk_req.unwrap_or(0.0),
            name,
        });
    }
    let lookup = |id: u64| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| GraphError::Parse(format!("edge references unknown task {id}")))
    };
    let edges = record
        .edges
        .into_iter()
        .map(|e| Ok(DepEdge::new(lookup(e.src)?, lookup(e.dst)?, e.data_size)))
        .collect::<Result<Vec<_>, GraphError>>()?;
    Ok(TaskGraph::new(nodes, edges))
}

/// Parses the canonical JSON graph document.
pub fn from_json(text: &str) -> Result<TaskGraph, GraphError> {
    let record: GraphRecord =
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    densify(record)
}

pub fn to_json(graph: &TaskGraph) -> String {
    serde_json::to_string_pretty(graph).expect("graph serializes")
}

fn number(node: roxmltree::Node, keys: &[&str]) -> Result<Option<f64>, GraphError> {
    let raw = keys.iter().find_map(|k| {
        node.attribute(*k).map(str::to_string).or_else(|| {
            node.children()
                .find(|c| c.is_element() && c.tag_name().name().eq_ignore_ascii_case(k))
                .and_then(|c| c.text())
                .map(|t| t.trim().to_string())
        })
    });
    match raw {
        None => Ok(None),
        Some(s) => s.parse::<f64>().map(Some).map_err(|_| {
            let pos = node.document().text_pos_at(node.range().start);
            GraphError::Parse(format!("line {}: bad number {s:?}", pos.row))
        }),
    }
}

fn required_id(node: roxmltree::Node, keys: &[&str]) -> Result<u64, GraphError> {
    let pos = node.document().text_pos_at(node.range().start);
    let v = number(node, keys)?
        .ok_or_else(|| GraphError::Parse(format!("line {}: missing {}", pos.row, keys[0])))?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(GraphError::Parse(format!("line {}: bad task id {v}", pos.row)));
    }
    Ok(v as u64)
}

/// Imports an XML task description. Accepted shape (attributes or child
/// elements, tag names case-insensitive):
///
/// ```xml
/// <tasks>
///   <task id="1" cost="2" memory="4" disk="1">
///     <depends on="0" data_size="3"/>
///   </task>
///   <dependency from="1" to="2" data_size="4"/>
/// </tasks>
/// ```
pub fn from_xml(text: &str) -> Result<TaskGraph, GraphError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let tag = |n: &roxmltree::Node| n.tag_name().name().to_ascii_lowercase();
    for el in doc.descendants().filter(|n| n.is_element()) {
        match tag(&el).as_str() {
            "task" | "job" => {
                let id = required_id(el, &["id"])?;
                let cost = number(el, &["cost", "execution_time", "time", "runtime"])?.unwrap_or(0.0);
                nodes.push(NodeRecord {
                    id,
                    cost,
                    work: number(el, &["work", "instructions", "mi"])?,
                    mem_req: number(el, &["mem_req", "memory", "mem"])?,
                    disk_req: number(el, &["disk_req", "disk"])?,
                    name: el.attribute("name").map(str::to_string),
                });
            }
            "depends" | "parent" | "requires" => {
                let parent = el.parent_element().ok_or_else(|| {
                    GraphError::Parse("dependency outside of a task".to_string())
                })?;
                edges.push(EdgeRecord {
                    src: required_id(el, &["on", "ref", "id", "src", "from"])?,
                    dst: required_id(parent, &["id"])?,
                    data_size: number(el, &["data_size", "data", "size"])?.unwrap_or(0.0),
                });
            }
            "dependency" | "edge" => {
                edges.push(EdgeRecord {
                    src: required_id(el, &["src", "from"])?,
                    dst: required_id(el, &["dst", "to"])?,
                    data_size: number(el, &["data_size", "data", "size"])?.unwrap_or(0.0),
                });
            }
            _ => {}
        }
    }
    if nodes.is_empty() {
        return Err(GraphError::Parse("no <task> elements found".to_string()));
    }
    densify(GraphRecord { nodes, edges })
}

/// Loads a graph file, choosing the XML importer for `.xml` files.
pub fn load_graph(path: &Path) -> Result<TaskGraph, GraphError> {
    let text = std::fs::read_to_string(path)?;
    let is_xml = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("xml"));
    if is_xml {
        from_xml(&text)
    } else {
        from_json(&text)
    }
}

pub fn save_graph(graph: &TaskGraph, path: &Path) -> Result<(), GraphError> {
    std::fs::write(path, to_json(graph) + "\n")?;
    Ok(())
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// DOT rendering: nodes labelled "id/cost", edges labelled with data size.
pub fn to_dot(graph: &TaskGraph) -> String {
    let mut out = String::from("digraph tasks {\n");
    for n in &graph.nodes {
        let _ = writeln!(out, "  t{} [label=\"{}/{}\"];", n.id, n.label(), fmt_num(n.cost));
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  t{} -> t{} [label=\"{}\"];",
            e.src,
            e.dst,
            fmt_num(e.data_size)
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sparse_ids_are_densified_and_named() {
        let g = from_json(
            r#"{"nodes":[{"id":7,"cost":1},{"id":3,"cost":2}],
                "edges":[{"src":3,"dst":7,"data_size":5}]}"#,
        )
        .unwrap();
        assert_eq!(g.nodes[0].cost, 2.0);
        assert_eq!(g.nodes[0].label(), "3");
        assert_eq!(g.edges[0], DepEdge::new(0, 1, 5.0));
    }

    #[test]
    fn json_round_trip() {
        let g = fixtures::nine_task_graph();
        assert_eq!(from_json(&to_json(&g)).unwrap(), g);
    }

    #[test]
    fn parse_errors_mention_the_problem() {
        let err = from_json(r#"{"nodes":[{"id":0,"cost":1}],"edges":[{"src":0,"dst":4}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("unknown task 4"), "{err}");
        let err = from_json("{\"nodes\": [\n{\"id\": 0, \"cost\": }]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = from_json(r#"{"nodes":[{"id":0,"cost":1},{"id":0,"cost":1}]}"#).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn xml_import_attribute_and_element_styles() {
        let xml = r#"<?xml version="1.0"?>
            <job-description>
              <task id="1" cost="2" memory="4"/>
              <task id="2"><execution_time>3</execution_time><disk>1.5</disk>
                <depends on="1" data_size="4"/>
              </task>
              <task id="3" cost="1"/>
              <dependency from="2" to="3" data_size="6"/>
            </job-description>"#;
        let g = from_xml(xml).unwrap();
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.nodes[0].mem_req, 4.0);
        assert_eq!(g.nodes[1].cost, 3.0);
        assert_eq!(g.nodes[1].disk_req, 1.5);
        assert_eq!(g.edges, vec![DepEdge::new(0, 1, 4.0), DepEdge::new(1, 2, 6.0)]);
        assert_eq!(g.nodes[2].label(), "3");
    }

    #[test]
    fn xml_errors() {
        assert!(from_xml("<tasks></tasks>").is_err());
        let err = from_xml("<tasks>\n<task id=\"1\" cost=\"x\"/></tasks>").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn dot_export() {
        let dot = to_dot(&fixtures::nine_task_graph());
        assert!(dot.contains("t0 [label=\"1/2\"]"));
        assert!(dot.contains("t0 -> t6 [label=\"10\"]"));
        assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 12);
    }
}
