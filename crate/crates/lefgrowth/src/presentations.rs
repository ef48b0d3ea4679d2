//! Finite presentations: tree presentations of symmetric groups,
//! Steinberg presentations of elementary/special linear groups, relator
//! evaluation into concrete groups, and presentation-derived growth
//! lower bounds.
//!
//! A tree `T = (V, E)` presents `Sym(V)` on one transposition generator
//! per edge, with relators of length at most 8: squares of generators,
//! squares of products over disjoint edge pairs, cubes over edge pairs
//! sharing a vertex, and squared four-letter words over edge triples at
//! a common vertex. The constant relator length is what keeps the
//! presentation argument's radius linear.

use num_bigint::BigUint;

use crate::embeddings::GrowthBoundRecord;
use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::perm::{FinSuppPerm, Point};
use crate::word::{FreeWord, Letter};

/// A finite presentation: named generators and reduced relator words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub generators: Vec<String>,
    pub relators: Vec<FreeWord>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<FreeWord>) -> Result<Presentation> {
        let rank = generators.len();
        for r in &relators {
            if let Some(g) = r.max_gen() {
                if g as usize >= rank {
                    return Err(Error::UnknownGenerator(g as usize));
                }
            }
            if !is_cyclically_reduced(r) {
                return Err(Error::Precondition(format!(
                    "relator {r} is not cyclically reduced"
                )));
            }
        }
        Ok(Presentation {
            generators,
            relators,
        })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn max_relator_len(&self) -> usize {
        self.relators.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    /// Text form: one line listing the generator names, then one relator
    /// per line in compact letter encoding (`a` is the first generator,
    /// `A` its inverse). Limited to 26 generators by the encoding.
    pub fn to_text(&self) -> Result<String> {
        if self.generators.len() > 26 {
            return Err(Error::Precondition(format!(
                "text format carries at most 26 generators, got {}",
                self.generators.len()
            )));
        }
        let mut out = self.generators.join(" ");
        out.push('\n');
        for r in &self.relators {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Presentation> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Serde("empty presentation text".into()))?;
        let generators: Vec<String> = header.split_whitespace().map(String::from).collect();
        let mut relators = Vec::new();
        for line in lines {
            relators.push(line.trim().parse::<FreeWord>()?);
        }
        Presentation::new(generators, relators)
    }
}

fn is_cyclically_reduced(w: &FreeWord) -> bool {
    match (w.letters().first(), w.letters().last()) {
        (Some(&a), Some(&b)) => w.len() == 1 || !a.cancels(b),
        _ => true,
    }
}

fn word_of(letters: &[Letter]) -> FreeWord {
    FreeWord::from_letters(letters.iter().copied())
}

/// The presentation of `Sym(V)` on the edge transpositions of a tree.
///
/// Generators follow `tree.edges()` order. Relators: each generator
/// squared; `(s_a s_b)^2` for disjoint edge pairs; `(s_a s_b)^3` for
/// pairs sharing a vertex; `(s_a s_b s_a s_c)^2` for each ordered choice
/// of three edges at a common vertex, up to swapping the last two (a
/// cyclic rotation). Every relator has length at most 8.
pub fn tree_presentation(tree: &SimpleGraph) -> Result<Presentation> {
    if !tree.is_tree() {
        return Err(Error::NotATree(format!(
            "{} vertices, {} edges, connected: {}",
            tree.vertex_count(),
            tree.edge_count(),
            tree.is_connected()
        )));
    }
    let edges = tree.edges();
    if edges.len() > u8::MAX as usize {
        return Err(Error::Precondition(format!(
            "{} edges exceed the generator index space",
            edges.len()
        )));
    }
    let generators: Vec<String> = edges
        .iter()
        .map(|(v, w)| format!("s({}-{})", v.key(), w.key()))
        .collect();
    let gen = |i: usize| Letter::new(i as u8, false);
    let mut relators = Vec::new();

    for i in 0..edges.len() {
        relators.push(word_of(&[gen(i); 2]));
    }

    let shared_vertex = |i: usize, j: usize| -> Option<Point> {
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        [a, b].into_iter().find(|v| *v == c || *v == d)
    };
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let pair = [gen(i), gen(j)];
            match shared_vertex(i, j) {
                // Disjoint edges commute: (s_a s_b)^2.
                None => relators.push(word_of(&pair.repeat(2))),
                // Adjacent edges braid: (s_a s_b)^3.
                Some(_) => relators.push(word_of(&pair.repeat(3))),
            }
        }
    }

    // Triples at a common vertex v: (s_(v,w) s_(v,x) s_(v,w) s_(v,y))^2.
    // Swapping x and y rotates the relator, so one orientation per
    // repeated edge suffices.
    for &v in tree.vertices() {
        let at_v: Vec<usize> = (0..edges.len())
            .filter(|&i| edges[i].0 == v || edges[i].1 == v)
            .collect();
        for &a in &at_v {
            for xi in 0..at_v.len() {
                for yi in xi + 1..at_v.len() {
                    let (x, y) = (at_v[xi], at_v[yi]);
                    if x == a || y == a {
                        continue;
                    }
                    let quad = [gen(a), gen(x), gen(a), gen(y)];
                    relators.push(word_of(&quad.repeat(2)));
                }
            }
        }
    }

    let pres = Presentation::new(generators, relators)?;
    debug_assert!(pres.max_relator_len() <= 8);
    Ok(pres)
}

/// Word over the edge generators of `tree` evaluating to the
/// transposition `(v w)`: the first path edge conjugated by the rest of
/// the path, `s_(v0,v1) ^ (s_(v1,v2) ... s_(v(l-1),vl))`. Length
/// `2l - 1` for a path of length `l`.
pub fn transposition_word(tree: &SimpleGraph, v: Point, w: Point) -> Result<FreeWord> {
    if !tree.is_tree() {
        return Err(Error::NotATree("transposition words need a tree".into()));
    }
    if v == w {
        return Err(Error::Precondition(
            "transposition endpoints coincide".into(),
        ));
    }
    let edges = tree.edges();
    let edge_index = |a: Point, b: Point| -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        edges.iter().position(|&e| e == key).expect("path edge is in the tree")
    };
    let path = tree.shortest_path(v, w)?;
    let first = FreeWord::generator(edge_index(path[0], path[1]) as u8);
    let tail: Vec<Letter> = path
        .windows(2)
        .skip(1)
        .map(|e| Letter::new(edge_index(e[0], e[1]) as u8, false))
        .collect();
    let conj = word_of(&tail);
    Ok(conj.inverse().mul(&first).mul(&conj))
}

/// Evaluates `word` as a permutation, sending generator `i` to the
/// transposition over edge `i` of the tree.
pub fn eval_tree_word(tree: &SimpleGraph, word: &FreeWord) -> Result<FinSuppPerm> {
    let edges = tree.edges();
    let mut acc = FinSuppPerm::identity();
    for l in word.letters() {
        let (a, b) = edges
            .get(l.gen as usize)
            .ok_or(Error::UnknownGenerator(l.gen as usize))?;
        // Transpositions are involutions, so the inverse flag is moot.
        acc = acc.compose(&FinSuppPerm::transposition(*a, *b)?);
    }
    Ok(acc)
}

/// Coefficient choice for a Steinberg presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteinbergRing {
    Integers,
    PrimeField(u64),
}

/// The Steinberg presentation of the elementary group over `points`:
/// one generator per ordered pair, commutator relators
/// `[E_(v,x), E_(x,w)] E_(v,w)^-1`, commuting relators `[E_(v,w),
/// E_(x,y)]` for `v != y`, `w != x`, and the fourth power of
/// `E_(v0,w0) E_(w0,v0)^-1 E_(v0,w0)` at the first pair in canonical
/// order. Over a prime field the relator `E_(v0,w0)^p` is added.
pub fn steinberg_presentation(points: &[Point], ring: SteinbergRing) -> Result<Presentation> {
    if points.len() < 3 {
        return Err(Error::Precondition(format!(
            "Steinberg presentation needs at least 3 basis points, got {}",
            points.len()
        )));
    }
    let n = points.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    if pairs.len() > u8::MAX as usize {
        return Err(Error::Precondition(format!(
            "{} generators exceed the index space",
            pairs.len()
        )));
    }
    let generators: Vec<String> = pairs
        .iter()
        .map(|&(i, j)| format!("E({}.{})", points[i].key(), points[j].key()))
        .collect();
    let index_of = |i: usize, j: usize| pairs.iter().position(|&p| p == (i, j)).unwrap();
    let letter = |i: usize, j: usize, inv: bool| Letter::new(index_of(i, j) as u8, inv);
    let commutator = |a: Letter, b: Letter| [a.inverse(), b.inverse(), a, b];

    let mut relators = Vec::new();
    // [E_(v,x), E_(x,w)] = E_(v,w) over distinct triples.
    for v in 0..n {
        for x in 0..n {
            for w in 0..n {
                if v != x && x != w && v != w {
                    let mut word = commutator(letter(v, x, false), letter(x, w, false)).to_vec();
                    word.push(letter(v, w, true));
                    relators.push(word_of(&word));
                }
            }
        }
    }
    // Disjoint-type pairs commute; one relator per unordered pair.
    for (pi, &(v, w)) in pairs.iter().enumerate() {
        for &(x, y) in &pairs[pi + 1..] {
            if v != y && w != x {
                relators.push(word_of(&commutator(
                    letter(v, w, false),
                    letter(x, y, false),
                )));
            }
        }
    }
    // (E_(v0,w0) E_(w0,v0)^-1 E_(v0,w0))^4 at the first canonical pair.
    let (v0, w0) = pairs[0];
    let wiggle = [letter(v0, w0, false), letter(w0, v0, true), letter(v0, w0, false)];
    relators.push(word_of(&wiggle.repeat(4)));
    if let SteinbergRing::PrimeField(p) = ring {
        if !crate::elem_enrich::is_prime(p) {
            return Err(Error::Precondition(format!("{p} is not prime")));
        }
        relators.push(FreeWord::generator(index_of(v0, w0) as u8).pow(p as i64));
    }
    Presentation::new(generators, relators)
}

/// Ordered-pair list matching the generator order of
/// [`steinberg_presentation`].
pub fn steinberg_pairs(points: &[Point]) -> Vec<(Point, Point)> {
    let mut out = Vec::new();
    for &v in points {
        for &w in points {
            if v != w {
                out.push((v, w));
            }
        }
    }
    out
}

/// Evaluates every relator through `assign` (generator index to group
/// element) in parallel, returning the index of the first relator that
/// does not come out to the identity.
pub fn eval_relators<T, M, I>(
    pres: &Presentation,
    identity: &T,
    assign: &[T],
    mul: M,
    inv: I,
) -> Result<Option<usize>>
where
    T: Clone + Eq + Send + Sync,
    M: Fn(&T, &T) -> Result<T> + Send + Sync,
    I: Fn(&T) -> Result<T> + Send + Sync,
{
    if assign.len() != pres.rank() {
        return Err(Error::Precondition(format!(
            "assignment covers {} of {} generators",
            assign.len(),
            pres.rank()
        )));
    }
    let eval_one = |k: usize| -> Result<bool> {
        let mut acc = identity.clone();
        for l in pres.relators[k].letters() {
            let g = &assign[l.gen as usize];
            let g = if l.inv { inv(g)? } else { g.clone() };
            acc = mul(&acc, &g)?;
        }
        Ok(acc == *identity)
    };
    let verdicts = crate::parallel::map_indexed(pres.relators.len(), eval_one);
    for (k, v) in verdicts.into_iter().enumerate() {
        if !v? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Transforms certified finite inputs into a growth lower bound: if every
/// relevant generator is within distance `f_n` and all relators have
/// length at most `g_n`, an `R_value` lower bound on the subgroup's
/// growth at radius `g_n` becomes a lower bound for the ambient group at
/// radius `f_n * g_n`.
pub fn lerf_lower_bound(f_n: u64, g_n: u64, r_value: &BigUint) -> Result<GrowthBoundRecord> {
    if f_n == 0 || g_n == 0 || *r_value == BigUint::from(0u32) {
        return Err(Error::Precondition(
            "presentation-argument inputs must be positive".into(),
        ));
    }
    Ok(GrowthBoundRecord {
        radius: f_n
            .checked_mul(g_n)
            .ok_or_else(|| Error::Precondition("radius product overflows".into()))?,
        lower: Some(r_value.clone()),
        lower_provenance: "presentation argument".into(),
        upper: None,
        upper_provenance: String::new(),
        notes: format!("generator distance {f_n}, relator length {g_n}"),
    })
}
