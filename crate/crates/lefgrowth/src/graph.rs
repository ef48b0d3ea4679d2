//! Finite simple graphs on opaque points: breadth-first paths,
//! diameter, spanning trees, and small constructors used across the
//! presentation and word-synthesis code.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::perm::Point;

/// An undirected simple graph. Vertices are explicit so isolated
/// vertices are representable; edges are stored both ways.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    verts: Vec<Point>,
    adj: BTreeMap<Point, BTreeSet<Point>>,
}

impl SimpleGraph {
    pub fn new(vertices: Vec<Point>, edges: &[(Point, Point)]) -> Result<SimpleGraph> {
        let mut adj: BTreeMap<Point, BTreeSet<Point>> = BTreeMap::new();
        let vert_set: BTreeSet<Point> = vertices.iter().copied().collect();
        if vert_set.len() != vertices.len() {
            return Err(Error::Precondition("duplicate vertex".into()));
        }
        for v in &vertices {
            adj.insert(*v, BTreeSet::new());
        }
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Precondition(format!("loop at {}", a.key())));
            }
            if !vert_set.contains(&a) || !vert_set.contains(&b) {
                return Err(Error::Precondition(format!(
                    "edge ({}, {}) leaves the vertex set",
                    a.key(),
                    b.key()
                )));
            }
            adj.get_mut(&a).unwrap().insert(b);
            adj.get_mut(&b).unwrap().insert(a);
        }
        Ok(SimpleGraph { verts: vertices, adj })
    }

    /// Path on `k` vertices `0..k`.
    pub fn path_graph(k: usize) -> SimpleGraph {
        let verts: Vec<Point> = (0..k as i64).map(Point::Int).collect();
        let edges: Vec<(Point, Point)> = (1..k as i64)
            .map(|i| (Point::Int(i - 1), Point::Int(i)))
            .collect();
        SimpleGraph::new(verts, &edges).expect("path graph is simple")
    }

    /// Star on `k` vertices: center `0` joined to `1..k`.
    pub fn star_graph(k: usize) -> SimpleGraph {
        let verts: Vec<Point> = (0..k as i64).map(Point::Int).collect();
        let edges: Vec<(Point, Point)> = (1..k as i64)
            .map(|i| (Point::Int(0), Point::Int(i)))
            .collect();
        SimpleGraph::new(verts, &edges).expect("star graph is simple")
    }

    /// The tree on `seq.len() + 2` vertices `0..n` encoded by a Prüfer
    /// sequence (entries in `0..n`). Every labeled tree arises from
    /// exactly one sequence.
    pub fn from_prufer(seq: &[usize]) -> Result<SimpleGraph> {
        let n = seq.len() + 2;
        if let Some(&bad) = seq.iter().find(|&&s| s >= n) {
            return Err(Error::Precondition(format!(
                "Prüfer entry {bad} outside 0..{n}"
            )));
        }
        let mut degree = vec![1usize; n];
        for &s in seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &s in seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf remains");
            edges.push((Point::Int(leaf as i64), Point::Int(s as i64)));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let last: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        edges.push((Point::Int(last[0] as i64), Point::Int(last[1] as i64)));
        SimpleGraph::new((0..n as i64).map(Point::Int).collect(), &edges)
    }

    /// Connected and acyclic.
    pub fn is_tree(&self) -> bool {
        !self.verts.is_empty()
            && self.edge_count() == self.vertex_count() - 1
            && self.is_connected()
    }

    /// Cycle on `k >= 3` vertices.
    pub fn cycle_graph(k: usize) -> Result<SimpleGraph> {
        if k < 3 {
            return Err(Error::Precondition("cycle needs at least 3 vertices".into()));
        }
        let verts: Vec<Point> = (0..k as i64).map(Point::Int).collect();
        let mut edges: Vec<(Point, Point)> = (1..k as i64)
            .map(|i| (Point::Int(i - 1), Point::Int(i)))
            .collect();
        edges.push((Point::Int(k as i64 - 1), Point::Int(0)));
        SimpleGraph::new(verts, &edges)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.verts
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|n| n.len()).sum::<usize>() / 2
    }

    /// Undirected edges, each reported once with endpoints ordered.
    pub fn edges(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for (&v, nbrs) in &self.adj {
            for &w in nbrs {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    pub fn neighbors(&self, v: Point) -> Result<impl Iterator<Item = Point> + '_> {
        Ok(self
            .adj
            .get(&v)
            .ok_or_else(|| Error::Precondition(format!("{} is not a vertex", v.key())))?
            .iter()
            .copied())
    }

    pub fn has_edge(&self, v: Point, w: Point) -> bool {
        self.adj.get(&v).is_some_and(|n| n.contains(&w))
    }

    fn bfs_parents(&self, from: Point) -> Result<BTreeMap<Point, Point>> {
        if !self.adj.contains_key(&from) {
            return Err(Error::Precondition(format!("{} is not a vertex", from.key())));
        }
        let mut parent = BTreeMap::new();
        parent.insert(from, from);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[&v] {
                if !parent.contains_key(&w) {
                    parent.insert(w, v);
                    queue.push_back(w);
                }
            }
        }
        Ok(parent)
    }

    /// A shortest path from `v` to `w` inclusive of both endpoints.
    pub fn shortest_path(&self, v: Point, w: Point) -> Result<Vec<Point>> {
        let parent = self.bfs_parents(v)?;
        if !self.adj.contains_key(&w) {
            return Err(Error::Precondition(format!("{} is not a vertex", w.key())));
        }
        if !parent.contains_key(&w) {
            return Err(Error::Disconnected);
        }
        let mut path = vec![w];
        let mut cur = w;
        while cur != v {
            cur = parent[&cur];
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    pub fn is_connected(&self) -> bool {
        match self.verts.first() {
            None => true,
            Some(&v) => self
                .bfs_parents(v)
                .map(|p| p.len() == self.verts.len())
                .unwrap_or(false),
        }
    }

    /// Maximal distance between vertex pairs; errors on disconnected
    /// graphs.
    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for &v in &self.verts {
            let mut dist = BTreeMap::new();
            dist.insert(v, 0usize);
            let mut queue = VecDeque::from([v]);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adj[&x] {
                    if !dist.contains_key(&y) {
                        dist.insert(y, dist[&x] + 1);
                        queue.push_back(y);
                    }
                }
            }
            if dist.len() != self.verts.len() {
                return Err(Error::Disconnected);
            }
            best = best.max(dist.values().copied().max().unwrap_or(0));
        }
        Ok(best)
    }

    /// Breadth-first spanning tree rooted at the first vertex, as a list
    /// of `vertex count - 1` edges.
    pub fn spanning_tree(&self) -> Result<Vec<(Point, Point)>> {
        let Some(&root) = self.verts.first() else {
            return Ok(Vec::new());
        };
        let parent = self.bfs_parents(root)?;
        if parent.len() != self.verts.len() {
            return Err(Error::Disconnected);
        }
        Ok(parent
            .into_iter()
            .filter(|(v, p)| v != p)
            .map(|(v, p)| (p, v))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Point::Int;

    #[test]
    fn path_graph_metrics() {
        let g = SimpleGraph::path_graph(6);
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.diameter().unwrap(), 5);
        let p = g.shortest_path(Int(0), Int(5)).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], Int(0));
        assert_eq!(p[5], Int(5));
    }

    #[test]
    fn cycle_graph_metrics() {
        let g = SimpleGraph::cycle_graph(7).unwrap();
        assert_eq!(g.edge_count(), 7);
        assert_eq!(g.diameter().unwrap(), 3);
        assert_eq!(g.shortest_path(Int(0), Int(5)).unwrap().len(), 3);
        assert!(SimpleGraph::cycle_graph(2).is_err());
    }

    #[test]
    fn prufer_decode_examples() {
        // [0, 0] is the star centered at 0; [1, 2] is the path 0-1-2-3.
        let star = SimpleGraph::from_prufer(&[0, 0]).unwrap();
        assert_eq!(star, SimpleGraph::star_graph(4));
        let path = SimpleGraph::from_prufer(&[1, 2]).unwrap();
        assert_eq!(path, SimpleGraph::path_graph(4));
        // The empty sequence is the single edge.
        let edge = SimpleGraph::from_prufer(&[]).unwrap();
        assert_eq!(edge.vertex_count(), 2);
        assert_eq!(edge.edge_count(), 1);
        assert!(SimpleGraph::from_prufer(&[5]).is_err());
        for g in [star, path, edge] {
            assert!(g.is_tree());
        }
        assert!(!SimpleGraph::cycle_graph(4).unwrap().is_tree());
        let forest =
            SimpleGraph::new(vec![Int(0), Int(1), Int(2)], &[(Int(0), Int(1))]).unwrap();
        assert!(!forest.is_tree());
    }

    #[test]
    fn disconnected_pairs_error() {
        let g = SimpleGraph::new(
            vec![Int(0), Int(1), Int(2)],
            &[(Int(0), Int(1))],
        )
        .unwrap();
        assert!(!g.is_connected());
        assert!(matches!(g.shortest_path(Int(0), Int(2)), Err(Error::Disconnected)));
        assert!(matches!(g.diameter(), Err(Error::Disconnected)));
    }

    #[test]
    fn malformed_graphs_are_rejected() {
        assert!(SimpleGraph::new(vec![Int(0)], &[(Int(0), Int(0))]).is_err());
        assert!(SimpleGraph::new(vec![Int(0)], &[(Int(0), Int(1))]).is_err());
        assert!(SimpleGraph::new(vec![Int(0), Int(0)], &[]).is_err());
    }

    #[test]
    fn spanning_tree_spans() {
        let g = SimpleGraph::cycle_graph(8).unwrap();
        let tree = g.spanning_tree().unwrap();
        assert_eq!(tree.len(), 7);
        let tg = SimpleGraph::new(g.vertices().to_vec(), &tree).unwrap();
        assert!(tg.is_connected());
        for (a, b) in tree {
            assert!(g.has_edge(a, b));
        }
    }
}
