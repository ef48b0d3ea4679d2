//! Schreier graph windows: balls, layers, growth tables, spanning trees.
//!
//! [`ActionGraph`] materializes the ball of a chosen radius around an
//! action's base point. Every (point, letter) edge is recorded; edges that
//! leave the window, or run off a truncated universe, are kept as explicit
//! [`EdgeTarget::Outside`] markers so downstream consumers can detect
//! boundary violations instead of silently wrapping.
//!
//! [`gn_graph_and_tree`] builds the auxiliary graph whose edges are the
//! supports of conjugated base transpositions, `{base.g, base.sg}` for
//! `|g| <= n-1`, together with a spanning tree of diameter at most `2n`:
//! each sphere vertex, taken with its least geodesic word `s1 s2 .. sd`,
//! hangs as a leaf under `base.(s2 .. sd)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{self, Write};

use crate::action::Action;
use crate::error::{Error, Result};
use crate::parallel;
use crate::perm::Point;
use crate::word::{FreeWord, Letter};

/// Where a (point, letter) edge lands.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeTarget {
    /// Index of the target point within the window.
    Inside(usize),
    /// The edge leaves the window (or the action's truncated universe).
    Outside,
}

/// The ball of a fixed radius around an action's base point, with every
/// labeled edge and the least geodesic word for each point.
#[derive(Clone, Debug)]
pub struct ActionGraph {
    base: Point,
    radius: usize,
    /// BFS discovery order; layer by layer.
    points: Vec<Point>,
    index: BTreeMap<Point, usize>,
    dist: Vec<usize>,
    /// Lexicographically least geodesic word per point.
    words: Vec<FreeWord>,
    /// `edges[p][l]` for letter index `l` (generator order, plain before
    /// inverse).
    edges: Vec<Vec<EdgeTarget>>,
    gen_names: Vec<String>,
    gen_count: usize,
}

/// Letters in scan order: each generator, plain then inverse.
fn letter_order(gen_count: usize) -> Vec<Letter> {
    (0..gen_count)
        .flat_map(|i| [Letter::new(i as u8, false), Letter::new(i as u8, true)])
        .collect()
}

impl ActionGraph {
    /// BFS ball of the given radius. Fails on any action error other than
    /// a boundary escape; escapes become [`EdgeTarget::Outside`].
    pub fn ball<A: Action>(action: &A, radius: usize) -> Result<ActionGraph> {
        let base = action.base_point();
        let letters = letter_order(action.gen_count());

        let mut points = vec![base];
        let mut index = BTreeMap::from([(base, 0usize)]);
        let mut dist = vec![0usize];
        let mut words = vec![FreeWord::identity()];

        let mut frontier = vec![0usize];
        for d in 1..=radius {
            // Least geodesic per new point: min over (pred word, letter).
            let mut next: BTreeMap<Point, FreeWord> = BTreeMap::new();
            for &u in &frontier {
                for &l in &letters {
                    let v = match action.apply_letter(points[u], l) {
                        Ok(v) => v,
                        Err(Error::BoundaryEscape { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    if index.contains_key(&v) {
                        continue;
                    }
                    let w = words[u].mul(&FreeWord::letter(l));
                    debug_assert_eq!(w.len(), d, "geodesic extension must not cancel");
                    match next.get_mut(&v) {
                        None => {
                            next.insert(v, w);
                        }
                        Some(best) => {
                            if w < *best {
                                *best = w;
                            }
                        }
                    }
                }
            }
            frontier = Vec::with_capacity(next.len());
            for (v, w) in next {
                let id = points.len();
                points.push(v);
                index.insert(v, id);
                dist.push(d);
                words.push(w);
                frontier.push(id);
            }
            if frontier.is_empty() {
                break;
            }
        }

        let mut edges = Vec::with_capacity(points.len());
        for &p in &points {
            let mut row = Vec::with_capacity(letters.len());
            for &l in &letters {
                row.push(match action.apply_letter(p, l) {
                    Ok(v) => match index.get(&v) {
                        Some(&i) => EdgeTarget::Inside(i),
                        None => EdgeTarget::Outside,
                    },
                    Err(Error::BoundaryEscape { .. }) => EdgeTarget::Outside,
                    Err(e) => return Err(e),
                });
            }
            edges.push(row);
        }

        Ok(ActionGraph {
            base,
            radius,
            points,
            index,
            dist,
            words,
            edges,
            gen_names: (0..action.gen_count()).map(|i| action.gen_name(i)).collect(),
            gen_count: action.gen_count(),
        })
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, p: Point) -> Option<usize> {
        self.index.get(&p).copied()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.index.contains_key(&p)
    }

    /// Graph distance from the base point.
    pub fn dist_of(&self, p: Point) -> Option<usize> {
        self.index_of(p).map(|i| self.dist[i])
    }

    /// Least geodesic word for a window point.
    pub fn geodesic(&self, p: Point) -> Option<&FreeWord> {
        self.index_of(p).map(|i| &self.words[i])
    }

    /// Points at distance exactly `d`, for `d <= radius`.
    pub fn layer(&self, d: usize) -> Vec<Point> {
        self.points
            .iter()
            .zip(&self.dist)
            .filter(|&(_, &dd)| dd == d)
            .map(|(&p, _)| p)
            .collect()
    }

    /// Ball sizes `|B(0)|..=|B(radius)|`.
    pub fn ball_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.radius + 1];
        for &d in &self.dist {
            sizes[d] += 1;
        }
        for i in 1..sizes.len() {
            sizes[i] += sizes[i - 1];
        }
        sizes
    }

    /// Points within distance `n`.
    pub fn ball_points(&self, n: usize) -> Vec<Point> {
        self.points
            .iter()
            .zip(&self.dist)
            .filter(|&(_, &d)| d <= n)
            .map(|(&p, _)| p)
            .collect()
    }

    /// True when no edge leaves the window.
    pub fn is_total(&self) -> bool {
        self.edges
            .iter()
            .all(|row| row.iter().all(|t| matches!(t, EdgeTarget::Inside(_))))
    }

    pub fn edge(&self, point_idx: usize, letter_idx: usize) -> EdgeTarget {
        self.edges[point_idx][letter_idx]
    }

    pub fn letters(&self) -> Vec<Letter> {
        letter_order(self.gen_count)
    }

    fn letter_label(&self, l: Letter) -> String {
        let name = &self.gen_names[l.gen as usize];
        if l.inv {
            format!("{name}^-1")
        } else {
            name.clone()
        }
    }

    /// Undirected neighbor sets over the recorded in-window edges.
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.points.len()];
        for (p, row) in self.edges.iter().enumerate() {
            for t in row {
                if let EdgeTarget::Inside(q) = *t {
                    if p != q {
                        adj[p].insert(q);
                        adj[q].insert(p);
                    }
                }
            }
        }
        adj
    }

    /// DOT rendering: one directed edge per (point, letter), with layers as
    /// vertex attributes and dashed edges into an "exit" pseudo-node where
    /// the window was cut.
    pub fn write_dot<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "digraph schreier {{")?;
        writeln!(out, "  rankdir=LR;")?;
        for (i, p) in self.points.iter().enumerate() {
            writeln!(out, "  \"{}\" [layer={}];", p.key(), self.dist[i])?;
        }
        if !self.is_total() {
            writeln!(out, "  \"exit\" [shape=plaintext];")?;
        }
        let letters = self.letters();
        for (i, p) in self.points.iter().enumerate() {
            for (li, &l) in letters.iter().enumerate() {
                let label = self.letter_label(l);
                match self.edges[i][li] {
                    EdgeTarget::Inside(j) => writeln!(
                        out,
                        "  \"{}\" -> \"{}\" [label=\"{}\"];",
                        p.key(),
                        self.points[j].key(),
                        label
                    )?,
                    EdgeTarget::Outside => writeln!(
                        out,
                        "  \"{}\" -> \"exit\" [label=\"{}\", style=dashed];",
                        p.key(),
                        label
                    )?,
                }
            }
        }
        writeln!(out, "}}")
    }
}

/// Ball sizes `|B(0)|..=|B(max_radius)|` of an action.
pub fn growth_table<A: Action>(action: &A, max_radius: usize) -> Result<Vec<usize>> {
    Ok(ActionGraph::ball(action, max_radius)?.ball_sizes())
}

/// CSV rendering of a growth table: `radius,ball_size` rows.
pub fn write_growth_csv<W: Write>(table: &[usize], out: &mut W) -> io::Result<()> {
    writeln!(out, "radius,ball_size")?;
    for (r, size) in table.iter().enumerate() {
        writeln!(out, "{r},{size}")?;
    }
    Ok(())
}

/// A tree edge: `child = base.(s conjugator)` hangs under
/// `parent = base.conjugator`, so the pair is the support of the base
/// transposition for `s` conjugated by `conjugator`.
#[derive(Clone, Debug)]
pub struct TreeEdge {
    pub parent: Point,
    pub child: Point,
    pub s: Letter,
    pub conjugator: FreeWord,
}

/// Spanning tree of the transposition-support graph on `B(n)`, with its
/// exact diameter.
#[derive(Clone, Debug)]
pub struct SpanningTreeCert {
    pub n: usize,
    /// `B(n)` in BFS order.
    pub vertices: Vec<Point>,
    pub tree_edges: Vec<TreeEdge>,
    /// Unordered graph edges `{base.g, base.sg}`, `|g| <= n-1`, as sorted
    /// pairs.
    pub graph_edges: BTreeSet<(Point, Point)>,
    /// Exact tree diameter.
    pub diameter: usize,
}

/// Build the support graph and its bounded-diameter spanning tree.
pub fn gn_graph_and_tree<A: Action>(action: &A, n: usize) -> Result<SpanningTreeCert> {
    if n == 0 {
        return Err(Error::Precondition("tree construction needs n >= 1".into()));
    }
    let window = ActionGraph::ball(action, n)?;
    let base = window.base();

    // Graph edges: supports of conjugated base transpositions.
    let mut graph_edges: BTreeSet<(Point, Point)> = BTreeSet::new();
    for g in crate::word::free_ball(action.gen_count() as u8, n - 1) {
        let p = action.apply_word(base, &g)?;
        for &s in &letter_order(action.gen_count()) {
            let q = action.apply_word(action.apply_letter(base, s)?, &g)?;
            if p != q {
                graph_edges.insert((p.min(q), p.max(q)));
            }
        }
    }

    // Tree edges: each sphere vertex hangs under base.(its geodesic minus
    // the first letter).
    let mut tree_edges = Vec::with_capacity(window.len().saturating_sub(1));
    for &v in window.points() {
        if v == base {
            continue;
        }
        let w = window.geodesic(v).expect("window point has a geodesic");
        let s = w.letters()[0];
        let conjugator = FreeWord::from_letters(w.letters()[1..].iter().copied());
        let parent = action.apply_word(base, &conjugator)?;
        let key = (parent.min(v), parent.max(v));
        debug_assert!(
            graph_edges.contains(&key),
            "tree edge must be a graph edge"
        );
        tree_edges.push(TreeEdge {
            parent,
            child: v,
            s,
            conjugator,
        });
    }

    let diameter = tree_diameter(window.points(), &tree_edges)?;
    Ok(SpanningTreeCert {
        n,
        vertices: window.points().to_vec(),
        tree_edges,
        graph_edges,
        diameter,
    })
}

fn bfs_ecc(adj: &[Vec<usize>], src: usize) -> (usize, usize, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    let mut far = src;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                if dist[v] > dist[far] {
                    far = v;
                }
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    (far, dist[far], reached)
}

fn adjacency_of(vertices: &[Point], pairs: impl Iterator<Item = (Point, Point)>) -> Result<Vec<Vec<usize>>> {
    let index: BTreeMap<Point, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i))
        .collect();
    let mut adj = vec![BTreeSet::new(); vertices.len()];
    for (p, q) in pairs {
        let (&i, &j) = match (index.get(&p), index.get(&q)) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                return Err(Error::Precondition(format!(
                    "edge endpoint outside the vertex set: ({}, {})",
                    p.key(),
                    q.key()
                )))
            }
        };
        if i != j {
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    Ok(adj.into_iter().map(|s| s.into_iter().collect()).collect())
}

/// Exact diameter of a tree by a double sweep.
fn tree_diameter(vertices: &[Point], edges: &[TreeEdge]) -> Result<usize> {
    if vertices.len() <= 1 {
        return Ok(0);
    }
    let adj = adjacency_of(vertices, edges.iter().map(|e| (e.parent, e.child)))?;
    let (far, _, reached) = bfs_ecc(&adj, 0);
    if reached != vertices.len() {
        return Err(Error::Disconnected);
    }
    let (_, diameter, _) = bfs_ecc(&adj, far);
    Ok(diameter)
}

/// Exact diameter by all-pairs BFS, sharded over source vertices.
pub fn graph_diameter(vertices: &[Point], edges: &BTreeSet<(Point, Point)>) -> Result<usize> {
    if vertices.len() <= 1 {
        return Ok(0);
    }
    let adj = adjacency_of(vertices, edges.iter().copied())?;
    let eccs = parallel::map_indexed(vertices.len(), |src| bfs_ecc(&adj, src));
    let mut diameter = 0;
    for (_, ecc, reached) in eccs {
        if reached != vertices.len() {
            return Err(Error::Disconnected);
        }
        diameter = diameter.max(ecc);
    }
    Ok(diameter)
}
