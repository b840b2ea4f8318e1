//! JSON and DOT formats for instances and edit sets.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CliqueId, CliquePartition, EditKind, EditSet, Graph, GraphError, PackedP3, Pair, Role, VertexId};
use crate::reduction::Instance;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex {id}: declared level {declared} but clique {clique} is on level {actual}")]
    Level { id: String, clique: String, declared: u8, actual: u8 },
    #[error("unsupported ell = {0}; only 0 is handled")]
    Ell(usize),
    #[error("{0} is not a declared vertex")]
    Undeclared(VertexId),
    #[error("vertex {0} declared twice")]
    DuplicateVertex(VertexId),
}

#[derive(Serialize, Deserialize)]
struct VertexDoc {
    id: String,
    clique: String,
    level: u8,
}

#[derive(Serialize, Deserialize)]
struct P3Doc {
    x: String,
    y: String,
    z: String,
    role: String,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    ell: usize,
    #[serde(default)]
    variables: usize,
    vertices: Vec<VertexDoc>,
    edges: Vec<[String; 2]>,
    packing: Vec<P3Doc>,
}

#[derive(Serialize, Deserialize)]
struct EditDoc {
    u: String,
    v: String,
    kind: String,
}

pub fn instance_to_json(inst: &Instance) -> String {
    let doc = InstanceDoc {
        ell: inst.ell,
        variables: inst.variable_count,
        vertices: inst
            .graph
            .vertices()
            .map(|v| {
                let c = inst.cliques.clique_of(v).expect("every vertex has a clique");
                VertexDoc { id: v.to_string(), clique: c.to_string(), level: c.level() }
            })
            .collect(),
        edges: inst.graph.edges().map(|e| [e.a().to_string(), e.b().to_string()]).collect(),
        packing: inst
            .packing
            .iter()
            .map(|p| P3Doc { x: p.x.to_string(), y: p.y.to_string(), z: p.z.to_string(), role: p.role.to_string() })
            .collect(),
    };
    let mut s = serde_json::to_string(&doc).expect("serializable");
    s.push('\n');
    s
}

/// Parses an instance and re-derives its merging model. Packed triples are
/// taken as given; the verifier checks them.
pub fn instance_from_json(text: &str) -> Result<Instance, IoError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if doc.ell != 0 {
        return Err(IoError::Ell(doc.ell));
    }
    let mut graph = Graph::new();
    let mut cliques = CliquePartition::new();
    for vd in &doc.vertices {
        let v: VertexId = vd.id.parse()?;
        let c: CliqueId = vd.clique.parse()?;
        if c.level() != vd.level {
            return Err(IoError::Level { id: vd.id.clone(), clique: vd.clique.clone(), declared: vd.level, actual: c.level() });
        }
        if !graph.add_vertex(v) {
            return Err(IoError::DuplicateVertex(v));
        }
        cliques.assign(v, c);
    }
    let declared = |v: VertexId, g: &Graph| if g.has_vertex(v) { Ok(v) } else { Err(IoError::Undeclared(v)) };
    for [a, b] in &doc.edges {
        let (a, b) = (declared(a.parse()?, &graph)?, declared(b.parse()?, &graph)?);
        graph.add_edge(a, b)?;
    }
    let mut packing = Vec::with_capacity(doc.packing.len());
    for pd in &doc.packing {
        let x = declared(pd.x.parse()?, &graph)?;
        let y = declared(pd.y.parse()?, &graph)?;
        let z = declared(pd.z.parse()?, &graph)?;
        let role: Role = pd.role.parse()?;
        packing.push(PackedP3::new(x, y, z, role));
    }
    Ok(Instance::new(graph, packing, cliques, doc.variables))
}

pub fn edits_to_json(s: &EditSet) -> String {
    let docs: Vec<EditDoc> = s
        .iter()
        .map(|(p, k)| EditDoc { u: p.a().to_string(), v: p.b().to_string(), kind: k.to_string() })
        .collect();
    let mut out = serde_json::to_string(&docs).expect("serializable");
    out.push('\n');
    out
}

/// Parses an edit set. Tag consistency with a graph is checked on use.
pub fn edits_from_json(text: &str) -> Result<EditSet, IoError> {
    let docs: Vec<EditDoc> = serde_json::from_str(text)?;
    let mut s = EditSet::new();
    for d in docs {
        let pair = Pair::try_new(d.u.parse()?, d.v.parse()?)?;
        let kind: EditKind = d.kind.parse()?;
        s.insert(pair, kind)?;
    }
    Ok(s)
}

/// One node per vertex, one cluster subgraph per clique; packed pairs are
/// colored by role and dashed when they are non-edges.
pub fn instance_to_dot(inst: &Instance) -> String {
    let mut out = String::from("graph instance {\n  node [shape=point];\n");
    for (k, (c, members)) in inst.cliques.blocks().into_iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{k} {{\n    label=\"{c}\";");
        for v in members {
            let _ = writeln!(out, "    \"{v}\";");
        }
        out.push_str("  }\n");
    }
    let covered: std::collections::HashMap<Pair, Role> =
        inst.packing.iter().flat_map(|p| p.pairs().map(|q| (q, p.role))).collect();
    for e in inst.graph.edges() {
        let color = match covered.get(&e) {
            Some(Role::Var) => " [color=gray]",
            Some(Role::Tra) => " [color=red]",
            Some(Role::Pad) => " [color=blue]",
            None => "",
        };
        let _ = writeln!(out, "  \"{}\" -- \"{}\"{color};", e.a(), e.b());
    }
    for p in &inst.packing {
        let _ = writeln!(out, "  \"{}\" -- \"{}\" [style=dashed, color={}];", p.x, p.z, match p.role {
            Role::Var => "gray",
            Role::Tra => "red",
            Role::Pad => "blue",
        });
    }
    out.push_str("}\n");
    out
}
