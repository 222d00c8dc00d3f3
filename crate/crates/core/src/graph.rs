//! The signed graph of sign-regions of `K`: one vertex per component of the
//! complement of the zero level, one edge per zero-level torus.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ContactModel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub sign: i8,
    pub labels: Vec<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContactGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Regions are the classes of boundary ids joined by components that stay on
/// one side of zero; each zero-crossing component adds an edge between the
/// region of its lower boundary and that of its upper boundary.
pub fn build_graph(m: &ContactModel) -> Result<ContactGraph> {
    let mut ids: Vec<&str> = Vec::new();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut sign_of: Vec<i8> = Vec::new();
    for (ci, c) in m.components.iter().enumerate() {
        for b in [&c.lower, &c.upper] {
            if b.id.is_empty() {
                return Err(Error::Graph(format!("component {ci}: empty boundary id")));
            }
            let s = b.sign();
            if s == 0 {
                return Err(Error::Graph(format!(
                    "component {ci}: boundary {} sits at K = 0",
                    b.id
                )));
            }
            match index.get(b.id.as_str()) {
                Some(&i) if sign_of[i] != s => {
                    return Err(Error::Graph(format!(
                        "boundary {} is referenced with both signs of K",
                        b.id
                    )))
                }
                Some(_) => {}
                None => {
                    index.insert(&b.id, ids.len());
                    ids.push(&b.id);
                    sign_of.push(s);
                }
            }
        }
    }
    let mut uf = UnionFind((0..ids.len()).collect());
    let mut crossing = Vec::new();
    for (ci, c) in m.components.iter().enumerate() {
        let (lo, hi) = (index[c.lower.id.as_str()], index[c.upper.id.as_str()]);
        if lo == hi {
            return Err(Error::Graph(format!(
                "component {ci} has the same boundary id {} at both ends",
                c.lower.id
            )));
        }
        if c.crosses_zero() {
            crossing.push((lo, hi));
        } else {
            uf.union(lo, hi);
        }
    }

    // vertices numbered by first appearance of their region
    let mut vertex_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertices: Vec<Vertex> = Vec::new();
    for i in 0..ids.len() {
        let r = uf.find(i);
        if !vertex_of_root.contains_key(&r) {
            vertex_of_root.insert(r, vertices.len());
            vertices.push(Vertex {
                id: vertices.len(),
                sign: sign_of[i],
                labels: Vec::new(),
            });
        }
    }
    let edges: Vec<(usize, usize)> = crossing
        .into_iter()
        .map(|(a, b)| {
            (
                vertex_of_root[&uf.find(a)],
                vertex_of_root[&uf.find(b)],
            )
        })
        .collect();
    if let Some(&(a, _)) = edges.iter().find(|(a, b)| a == b) {
        return Err(Error::Graph(format!(
            "zero-level torus joins region {a} to itself"
        )));
    }

    for (orbit, label) in m.singular_labels()? {
        let v = vertex_of_root[&uf.find(index[orbit.as_str()])];
        vertices[v].labels.push(label);
    }

    let g = ContactGraph { vertices, edges };
    if !g.is_connected() {
        return Err(Error::Graph(
            "boundary adjacency describes a disconnected manifold".into(),
        ));
    }
    Ok(g)
}

impl ContactGraph {
    pub fn single(sign: i8) -> Self {
        ContactGraph {
            vertices: vec![Vertex {
                id: 0,
                sign,
                labels: Vec::new(),
            }],
            edges: Vec::new(),
        }
    }

    fn vertex(&self, id: usize) -> Result<&Vertex> {
        self.vertices
            .get(id)
            .ok_or_else(|| Error::Graph(format!("unknown vertex {id}")))
    }

    /// Every edge joins vertices of opposite sign.
    pub fn is_bipartite(&self) -> bool {
        self.edges.iter().all(|&(a, b)| match (self.vertices.get(a), self.vertices.get(b)) {
            (Some(x), Some(y)) => x.sign != y.sign,
            _ => false,
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut uf = UnionFind((0..self.vertices.len()).collect());
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        (0..self.vertices.len()).all(|v| uf.find(v) == 0)
    }

    /// Adds a vertex of opposite sign joined to `v` by one edge.
    pub fn lutz_twist(&self, v: usize) -> Result<ContactGraph> {
        let sign = -self.vertex(v)?.sign;
        let mut g = self.clone();
        let id = g.vertices.len();
        g.vertices.push(Vertex {
            id,
            sign,
            labels: Vec::new(),
        });
        g.edges.push((v, id));
        Ok(g)
    }

    /// Disjoint union with `v1` and `v2` identified; vertices of `other` are
    /// renumbered after those of `self`.
    pub fn connected_sum(&self, v1: usize, other: &ContactGraph, v2: usize) -> Result<ContactGraph> {
        let (a, b) = (self.vertex(v1)?, other.vertex(v2)?);
        if a.sign != b.sign {
            return Err(Error::Graph(format!(
                "cannot identify vertex {v1} (sign {}) with vertex {v2} (sign {})",
                a.sign, b.sign
            )));
        }
        let mut g = self.clone();
        g.vertices[v1].labels.extend(b.labels.iter().copied());
        let mut map = vec![0usize; other.vertices.len()];
        for w in &other.vertices {
            if w.id == v2 {
                map[w.id] = v1;
            } else {
                map[w.id] = g.vertices.len();
                g.vertices.push(Vertex {
                    id: g.vertices.len(),
                    sign: w.sign,
                    labels: w.labels.clone(),
                });
            }
        }
        g.edges
            .extend(other.edges.iter().map(|&(x, y)| (map[x], map[y])));
        Ok(g)
    }

    pub fn adjacency_list(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let sign = if v.sign > 0 { '+' } else { '-' };
            let mut nbrs: Vec<usize> = self
                .edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == v.id {
                        Some(b)
                    } else if b == v.id {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            nbrs.sort_unstable();
            let nbrs: Vec<String> = nbrs.iter().map(usize::to_string).collect();
            let labels: Vec<String> = v.labels.iter().map(|(p, q)| format!("({p},{q})")).collect();
            let _ = writeln!(
                out,
                "{}{} [{}]: {}",
                v.id,
                sign,
                labels.join(" "),
                nbrs.join(" ")
            );
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for v in &self.vertices {
            let sign = if v.sign > 0 { '+' } else { '-' };
            let labels: Vec<String> = v.labels.iter().map(|(p, q)| format!("({p},{q})")).collect();
            let _ = writeln!(
                out,
                "  v{} [label=\"{}{} {}\"];",
                v.id,
                v.id,
                sign,
                labels.join(" ")
            );
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  v{a} -- v{b};");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundaryOrbit, Component, ContactModel};
    use crate::potential::Potential;
    use crate::rational::int;
    use crate::seifert::SurgeryData;
    use proptest::prelude::*;

    fn comp(lo: i64, hi: i64, lo_id: &str, hi_id: &str) -> Component {
        Component {
            potential: Potential::exact_polynomial(int(lo), int(hi), vec![int(3)]).unwrap(),
            lower: BoundaryOrbit::new(int(lo), 1, lo_id),
            upper: BoundaryOrbit::new(int(hi), 1, hi_id),
        }
    }

    fn model(components: Vec<Component>) -> ContactModel {
        ContactModel {
            surgery: SurgeryData::new(0, vec![(1, -1)]).unwrap(),
            components,
            tame: true,
        }
    }

    #[test]
    fn single_crossing_component() {
        let g = build_graph(&model(vec![comp(-1, 1, "a", "b")])).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!((g.vertices[0].sign, g.vertices[1].sign), (-1, 1));
        assert_eq!(g.edges, vec![(0, 1)]);
        assert!(g.is_bipartite());
    }

    #[test]
    fn parallel_edges() {
        // two zero-crossing cylinders between the same pair of regions,
        // closed up by non-crossing components on each side
        let m = model(vec![
            comp(-1, 1, "a", "b"),
            comp(-1, 1, "c", "d"),
            comp(-2, -1, "x", "a"),
            comp(-2, -1, "x", "c"),
            comp(1, 2, "b", "y"),
            comp(1, 2, "d", "y"),
        ]);
        let g = build_graph(&m).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges, vec![(0, 1), (0, 1)]);
    }

    #[test]
    fn no_crossing_single_vertex() {
        let g = build_graph(&model(vec![comp(1, 2, "a", "b"), comp(2, 3, "b", "c")])).unwrap();
        assert_eq!(g.vertices.len(), 1);
        assert!(g.edges.is_empty());
        assert!(build_graph(&model(vec![comp(1, 2, "a", "b"), comp(2, 3, "c", "d")])).is_err());
    }

    #[test]
    fn inconsistent_adjacency_rejected() {
        assert!(build_graph(&model(vec![comp(-1, 1, "a", "b"), comp(1, 2, "a", "c")])).is_err());
        assert!(build_graph(&model(vec![comp(1, 2, "a", "a")])).is_err());
    }

    #[test]
    fn bipartite_examples() {
        let mut g = ContactGraph::single(1);
        assert!(g.is_bipartite());
        g = g.lutz_twist(0).unwrap();
        assert!(g.is_bipartite());
        g.vertices[1].sign = 1;
        assert!(!g.is_bipartite());
    }

    #[test]
    fn lutz_examples() {
        let g = ContactGraph::single(1).lutz_twist(0).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.vertices[1].sign, -1);
        let star = g.lutz_twist(0).unwrap();
        assert_eq!(star.edges, vec![(0, 1), (0, 2)]);
        let path = g.lutz_twist(1).unwrap();
        assert_eq!(path.edges, vec![(0, 1), (1, 2)]);
        assert!(ContactGraph::single(1).lutz_twist(3).is_err());
    }

    #[test]
    fn connected_sum_examples() {
        let a = ContactGraph::single(1);
        assert_eq!(a.connected_sum(0, &a, 0).unwrap().vertices.len(), 1);
        let e = a.lutz_twist(0).unwrap();
        let p = e.connected_sum(0, &e, 0).unwrap();
        assert_eq!(p.vertices.len(), 3);
        assert_eq!(p.edges, vec![(0, 1), (0, 2)]);
        assert!(p.is_bipartite());
        assert!(e.connected_sum(0, &e, 1).is_err());
    }

    #[test]
    fn labels_follow_regions() {
        let mut m = model(vec![comp(-1, 1, "a", "b"), comp(1, 2, "b", "s")]);
        m.components[1].upper.p = 3;
        m.surgery = SurgeryData::new(0, vec![(3, 1), (1, -2)]).unwrap();
        let g = build_graph(&m).unwrap();
        assert_eq!(g.vertices[1].labels, vec![(3, 1)]);
        assert!(g.vertices[0].labels.is_empty());
    }

    fn random_graph() -> impl Strategy<Value = ContactGraph> {
        prop::collection::vec((any::<bool>(), 0usize..8), 0..8).prop_map(|ops| {
            let mut g = ContactGraph::single(1);
            for (twist, v) in ops {
                let v = v % g.vertices.len();
                g = if twist {
                    g.lutz_twist(v).unwrap()
                } else {
                    g.connected_sum(v, &ContactGraph::single(g.vertices[v].sign).lutz_twist(0).unwrap(), 0)
                        .unwrap()
                };
            }
            g
        })
    }

    proptest! {
        #[test]
        fn operations_preserve_counts_and_bipartiteness(g in random_graph(), h in random_graph(), v in 0usize..16) {
            let v = v % g.vertices.len();
            let t = g.lutz_twist(v).unwrap();
            prop_assert_eq!(t.vertices.len(), g.vertices.len() + 1);
            prop_assert_eq!(t.edges.len(), g.edges.len() + 1);
            prop_assert!(t.is_bipartite());
            if let Some(w) = h.vertices.iter().position(|w| w.sign == g.vertices[v].sign) {
                let s = g.connected_sum(v, &h, w).unwrap();
                prop_assert_eq!(s.vertices.len(), g.vertices.len() + h.vertices.len() - 1);
                prop_assert_eq!(s.edges.len(), g.edges.len() + h.edges.len());
                prop_assert!(s.is_bipartite());
                prop_assert!(s.is_connected());
            }
        }
    }
}
