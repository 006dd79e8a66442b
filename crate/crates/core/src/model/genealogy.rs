use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::ids::{HolonId, ProcessInstanceId};

use super::Model;

/// A parent-to-child derivation. `via` is the process instance that consumed the
/// parent and produced the child, or `None` for links recovered without a process.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenealogyEdge {
    pub parent: HolonId,
    pub child: HolonId,
    pub via: Option<ProcessInstanceId>,
}

/// Ancestor sub-graph of one holon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenealogyGraph {
    pub root: HolonId,
    pub nodes: BTreeSet<HolonId>,
    pub edges: BTreeSet<GenealogyEdge>,
}

impl GenealogyGraph {
    /// Nodes without incoming edges.
    pub fn sources(&self) -> BTreeSet<&HolonId> {
        let children: BTreeSet<&HolonId> = self.edges.iter().map(|e| &e.child).collect();
        self.nodes.iter().filter(|n| !children.contains(n)).collect()
    }

    /// Kahn order with ties broken by id. Nodes on a cycle, if any, follow in id order.
    pub fn topological_order(&self) -> Vec<&HolonId> {
        let mut indegree: BTreeMap<&HolonId, usize> = self.nodes.iter().map(|n| (n, 0)).collect();
        let mut children: BTreeMap<&HolonId, BTreeSet<&HolonId>> = BTreeMap::new();
        for e in &self.edges {
            if children.entry(&e.parent).or_default().insert(&e.child) {
                *indegree.entry(&e.child).or_default() += 1;
            }
        }
        let mut ready: BTreeSet<&HolonId> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(n) = ready.pop_first() {
            order.push(n);
            for c in children.get(n).into_iter().flatten() {
                let d = indegree.get_mut(c).expect("edge endpoints are nodes");
                *d -= 1;
                if *d == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() < self.nodes.len() {
            let seen: BTreeSet<&HolonId> = order.iter().copied().collect();
            order.extend(self.nodes.iter().filter(|n| !seen.contains(n)));
        }
        order
    }

    /// Incoming edges of `node`, sorted.
    pub fn parents_of<'g>(&'g self, node: &'g HolonId) -> impl Iterator<Item = &'g GenealogyEdge> + 'g {
        self.edges.iter().filter(move |e| &e.child == node)
    }
}

pub(super) fn all_edges(model: &Model) -> BTreeSet<GenealogyEdge> {
    let mut edges = BTreeSet::new();
    for pi in model.process_instances.values() {
        for parent in model.input_holons(pi) {
            for child in &pi.output_holons {
                edges.insert(GenealogyEdge { parent: parent.clone(), child: child.clone(), via: Some(pi.id.clone()) });
            }
        }
    }
    for h in model.holons.values() {
        for parent in &h.assembled_from {
            edges.insert(GenealogyEdge { parent: parent.clone(), child: h.id.clone(), via: None });
        }
    }
    edges
}

pub(super) fn ancestors(model: &Model, holon: &str) -> GenealogyGraph {
    let mut incoming: BTreeMap<HolonId, Vec<GenealogyEdge>> = BTreeMap::new();
    for e in all_edges(model) {
        incoming.entry(e.child.clone()).or_default().push(e);
    }
    let root = model.holons.get_key_value(holon).map(|(k, _)| k.clone()).expect("caller checked existence");
    let mut nodes = BTreeSet::from([root.clone()]);
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(child) = queue.pop_front() {
        for e in incoming.get(&child).into_iter().flatten() {
            edges.insert(e.clone());
            if nodes.insert(e.parent.clone()) {
                queue.push_back(e.parent.clone());
            }
        }
    }
    GenealogyGraph { root, nodes, edges }
}
