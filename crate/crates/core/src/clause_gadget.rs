//! Clause skeleton (cliques Q1..Q4 and three transferring cliques joined by
//! six P3s) and the rewiring that attaches a transferring clique to its
//! variable gadget.

use crate::graph::{CliqueId, PackedP3, Role, VertexId};
use crate::reduction::Draft;
use crate::variable_gadget::GadgetError;

/// Literal positions within a clause.
pub const POSITIONS: usize = 3;

#[derive(Clone, Debug)]
pub struct ClauseSkeleton {
    pub clause: usize,
    /// Variables at positions p, q, r.
    pub vars: [usize; POSITIONS],
    pub p3s: [PackedP3; 6],
}

impl ClauseSkeleton {
    pub fn transfer(&self, position: usize) -> CliqueId {
        CliqueId::t(self.clause, self.vars[position])
    }
}

fn q(d: usize, part: u8, index: u32) -> VertexId {
    VertexId::Clause { clause: d as u32, part, index }
}

fn t(d: usize, var: usize, index: u32) -> VertexId {
    VertexId::Transfer { clause: d as u32, var: var as u32, index }
}

/// Adds the skeleton of clause `d` to the draft.
pub fn build_clause_skeleton(draft: &mut Draft, d: usize, vars: [usize; POSITIONS]) -> Result<ClauseSkeleton, GadgetError> {
    for a in 0..POSITIONS {
        if vars[a + 1..].contains(&vars[a]) {
            return Err(GadgetError::RepeatedVariable { clause: d, var: vars[a] });
        }
    }
    let [vp, vq, vr] = vars;
    let seeds: [(CliqueId, Vec<VertexId>); 7] = [
        (CliqueId::q(d, 1), vec![q(d, 1, 0)]),
        (CliqueId::q(d, 2), (0..4).map(|k| q(d, 2, k)).collect()),
        (CliqueId::q(d, 3), (0..3).map(|k| q(d, 3, k)).collect()),
        (CliqueId::q(d, 4), vec![q(d, 4, 0)]),
        (CliqueId::t(d, vp), vec![t(d, vp, 0), t(d, vp, 1)]),
        (CliqueId::t(d, vq), vec![t(d, vq, 0), t(d, vq, 1)]),
        (CliqueId::t(d, vr), vec![t(d, vr, 0), t(d, vr, 1)]),
    ];
    for (clique, members) in seeds {
        for v in members {
            draft.add_clique_vertex(clique, v);
        }
    }
    let tra = |x, y, z| PackedP3::new(x, y, z, Role::Tra);
    let p3s = [
        tra(t(d, vp, 0), q(d, 1, 0), q(d, 2, 0)),
        tra(t(d, vp, 1), q(d, 1, 0), q(d, 2, 1)),
        tra(t(d, vq, 0), q(d, 3, 0), q(d, 2, 2)),
        tra(t(d, vq, 1), q(d, 3, 0), q(d, 2, 3)),
        tra(t(d, vr, 0), q(d, 4, 0), q(d, 3, 1)),
        tra(t(d, vr, 1), q(d, 4, 0), q(d, 3, 2)),
    ];
    for p in p3s {
        draft.add_p3_with_edges(p)?;
    }
    Ok(ClauseSkeleton { clause: d, vars, p3s })
}

#[derive(Clone, Debug)]
pub struct ConnectionRewiring {
    pub var: usize,
    pub clause: usize,
    pub positive: bool,
    /// The designated gadget vertices v1..v8.
    pub v: [VertexId; 8],
    /// The fresh transferring vertices w1..w4.
    pub w: [VertexId; 4],
    pub removed: [PackedP3; 4],
    pub added_var: [PackedP3; 2],
    pub added_tra: [PackedP3; 4],
}

/// Designated vertices v1..v8 for the occurrence with rank `pi`.
pub fn designated_vertices(var: usize, pi: usize, positive: bool) -> [VertexId; 8] {
    let base = 4 * pi;
    let (near, far) = if positive { (base + 2, base) } else { (base, base + 2) };
    let v = |clique, label| VertexId::var(var, clique, label);
    [
        v(base + 1, 0),
        v(base + 1, 1),
        v(near, 1),
        v(near, 2),
        v(far, 0),
        v(far, 1),
        v(far, 3),
        v(far, 4),
    ]
}

/// Attaches the transferring clique of `var` in clause `d` to the variable
/// gadget at occurrence rank `pi`.
pub fn connect_to_variable(
    draft: &mut Draft,
    d: usize,
    var: usize,
    pi: usize,
    positive: bool,
) -> Result<ConnectionRewiring, GadgetError> {
    let v = designated_vertices(var, pi, positive);
    let [v1, v2, v3, v4, v5, v6, v7, v8] = v;
    let var_p3 = |x, y, z| PackedP3::new(x, y, z, Role::Var);
    let removed = [var_p3(v8, v1, v3), var_p3(v7, v1, v4), var_p3(v6, v2, v3), var_p3(v5, v2, v4)];
    for p in removed {
        let found = draft.remove_p3(&p).ok_or_else(|| GadgetError::MissingP3(p.to_string()))?;
        draft.graph.remove_edge(found.x, found.y);
        draft.graph.remove_edge(found.y, found.z);
    }
    let added_var = [var_p3(v5, v6, v2), var_p3(v1, v7, v8)];
    for p in added_var {
        draft.add_p3_with_edges(p)?;
    }

    let clique = CliqueId::t(d, var);
    let first = draft.clique_len(clique) as u32;
    let w: [VertexId; 4] = std::array::from_fn(|k| t(d, var, first + k as u32));
    for x in w {
        draft.add_clique_vertex(clique, x);
    }
    let [w1, w2, w3, w4] = w;
    let tra = |x, y, z| PackedP3::new(x, y, z, Role::Tra);
    let added_tra = [tra(w1, v1, v3), tra(w2, v2, v4), tra(w3, v2, v3), tra(w4, v1, v4)];
    for p in added_tra {
        draft.add_p3_with_edges(p)?;
    }
    Ok(ConnectionRewiring { var, clause: d, positive, v, w, removed, added_var, added_tra })
}
