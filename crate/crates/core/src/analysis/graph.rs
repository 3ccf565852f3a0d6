use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use petgraph::algo::{tarjan_scc, toposort};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::syntax::Ident;

/// Outcome of a constraint check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "verdict")]
pub enum Verdict {
    /// A valid order, greatest first.
    Accept { order: Vec<Ident> },
    /// Identifiers `A1 > A2 > ... > An > A1` that cannot all hold.
    Reject { cycle: Vec<Ident> },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept { order } => {
                let names: Vec<&str> = order.iter().map(Ident::as_str).collect();
                if names.is_empty() {
                    f.write_str("accept")
                } else {
                    write!(f, "accept: {}", names.join(" > "))
                }
            }
            Verdict::Reject { cycle } => {
                let mut names: Vec<&str> = cycle.iter().map(Ident::as_str).collect();
                names.extend(cycle.first().map(Ident::as_str));
                write!(f, "reject: {}", names.join(" > "))
            }
        }
    }
}

struct Graph {
    graph: DiGraph<Ident, bool>,
}

impl Graph {
    fn build(nodes: &BTreeSet<Ident>, edges: &[(Ident, Ident, bool)]) -> Self {
        let mut graph = DiGraph::new();
        let mut index = HashMap::new();
        let all = nodes.iter().chain(edges.iter().flat_map(|(a, b, _)| [a, b]));
        for id in all {
            index.entry(id.clone()).or_insert_with(|| graph.add_node(id.clone()));
        }
        for (a, b, strict) in edges {
            graph.add_edge(index[a], index[b], *strict);
        }
        Graph { graph }
    }

    /// Shortest path from `from` to `to` staying inside `allowed`.
    fn path(&self, from: NodeIndex, to: NodeIndex, allowed: &BTreeSet<NodeIndex>) -> Vec<NodeIndex> {
        let mut prev: HashMap<NodeIndex, NodeIndex> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                break;
            }
            for m in self.graph.neighbors(n) {
                if allowed.contains(&m) && seen.insert(m) {
                    prev.insert(m, n);
                    queue.push_back(m);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = prev[&cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Accepts iff no strongly connected component contains a strict edge.
/// With only strict edges this is plain acyclicity.
pub(crate) fn acyclic_verdict(nodes: &BTreeSet<Ident>, edges: &[(Ident, Ident, bool)]) -> Verdict {
    let g = Graph::build(nodes, edges);
    for scc in tarjan_scc(&g.graph) {
        let members: BTreeSet<NodeIndex> = scc.iter().copied().collect();
        let strict = g.graph.edge_indices().find(|&e| {
            let (a, b) = g.graph.edge_endpoints(e).unwrap();
            g.graph[e] && members.contains(&a) && members.contains(&b)
        });
        if let Some(e) = strict {
            let (a, b) = g.graph.edge_endpoints(e).unwrap();
            // a > b, then back from b to a inside the component.
            let mut cycle = vec![a];
            if a != b {
                let back = g.path(b, a, &members);
                cycle.extend(&back[..back.len() - 1]);
            }
            return Verdict::Reject { cycle: cycle.into_iter().map(|n| g.graph[n].clone()).collect() };
        }
    }
    // Weak cycles are allowed: order the condensation.
    let condensed = petgraph::algo::condensation(g.graph.clone(), true);
    let order = toposort(&condensed, None).expect("condensation is acyclic");
    let mut out = Vec::new();
    for n in order {
        let mut group = condensed[n].clone();
        group.sort();
        out.extend(group);
    }
    Verdict::Accept { order: out }
}
