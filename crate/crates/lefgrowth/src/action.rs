//! Group actions on point universes.
//!
//! An [`Action`] names a generating set and answers "where does this point
//! go under this generator". Points are acted on from the right; a word
//! acts letter by letter, left to right. Truncated universes report
//! out-of-range moves as [`Error::BoundaryEscape`] instead of guessing.
//!
//! [`AmbientGroup`] is the group-of-scalars view the enrichment modules
//! multiply through: element arithmetic together with the point action.
//! [`WordAmbient`] realizes a free group over any action; [`FiniteAmbient`]
//! realizes a finite catalog group acting on its own point set.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::finite::{FiniteGroup, GroupElem};
use crate::perm::{FinSuppPerm, Point};
use crate::word::{FreeWord, Letter};

/// Right action of a finitely generated group on a point universe.
pub trait Action {
    /// Number of generators (inverses are implicit).
    fn gen_count(&self) -> usize;

    /// Display name of generator `i`.
    fn gen_name(&self, i: usize) -> String;

    /// The distinguished point the pipeline takes balls around.
    fn base_point(&self) -> Point;

    /// `p` under generator `i` (or its inverse).
    fn apply_gen(&self, p: Point, i: usize, inv: bool) -> Result<Point>;

    fn apply_letter(&self, p: Point, l: Letter) -> Result<Point> {
        self.apply_gen(p, l.gen as usize, l.inv)
    }

    /// `p` under a word, letter by letter.
    fn apply_word(&self, p: Point, w: &FreeWord) -> Result<Point> {
        let mut q = p;
        for &l in w.letters() {
            q = self.apply_letter(q, l)?;
        }
        Ok(q)
    }
}

impl<A: Action + ?Sized> Action for &A {
    fn gen_count(&self) -> usize {
        (**self).gen_count()
    }

    fn gen_name(&self, i: usize) -> String {
        (**self).gen_name(i)
    }

    fn base_point(&self) -> Point {
        (**self).base_point()
    }

    fn apply_gen(&self, p: Point, i: usize, inv: bool) -> Result<Point> {
        (**self).apply_gen(p, i, inv)
    }
}

/// The integers shifting themselves: one generator, `Int(k) . t = Int(k+1)`.
#[derive(Clone, Debug, Default)]
pub struct LineAction;

impl Action for LineAction {
    fn gen_count(&self) -> usize {
        1
    }

    fn gen_name(&self, _i: usize) -> String {
        "t".into()
    }

    fn base_point(&self) -> Point {
        Point::Int(0)
    }

    fn apply_gen(&self, p: Point, i: usize, inv: bool) -> Result<Point> {
        if i != 0 {
            return Err(Error::UnknownGenerator(i));
        }
        match p {
            Point::Int(v) => Ok(Point::Int(if inv { v - 1 } else { v + 1 })),
            other => Err(Error::Precondition(format!(
                "line action is on integer points, got {}",
                other.key()
            ))),
        }
    }
}

/// The integer grid shifting itself: generators `x` and `y` translate the
/// coordinates of `Pair` points.
#[derive(Clone, Debug, Default)]
pub struct GridAction;

impl Action for GridAction {
    fn gen_count(&self) -> usize {
        2
    }

    fn gen_name(&self, i: usize) -> String {
        ["x", "y"][i.min(1)].into()
    }

    fn base_point(&self) -> Point {
        Point::Pair(0, 0)
    }

    fn apply_gen(&self, p: Point, i: usize, inv: bool) -> Result<Point> {
        if i >= 2 {
            return Err(Error::UnknownGenerator(i));
        }
        let step = if inv { -1 } else { 1 };
        match p {
            Point::Pair(x, y) if i == 0 => Ok(Point::Pair(x + step, y)),
            Point::Pair(x, y) => Ok(Point::Pair(x, y + step)),
            other => Err(Error::Precondition(format!(
                "grid action is on coordinate pairs, got {}",
                other.key()
            ))),
        }
    }
}

/// A cyclic group rotating its residues: `Int(k) . t = Int(k+1 mod m)`.
#[derive(Clone, Debug)]
pub struct CyclicAction {
    pub modulus: u64,
}

impl CyclicAction {
    pub fn new(modulus: u64) -> Result<CyclicAction> {
        if modulus == 0 {
            return Err(Error::Precondition("cyclic action needs a positive modulus".into()));
        }
        Ok(CyclicAction { modulus })
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.modulus as i64).map(Point::Int).collect()
    }
}

impl Action for CyclicAction {
    fn gen_count(&self) -> usize {
        1
    }

    fn gen_name(&self, _i: usize) -> String {
        "t".into()
    }

    fn base_point(&self) -> Point {
        Point::Int(0)
    }

    fn apply_gen(&self, p: Point, i: usize, inv: bool) -> Result<Point> {
        if i != 0 {
            return Err(Error::UnknownGenerator(i));
        }
        let m = self.modulus as i64;
        match p {
            Point::Int(v) if 0 <= v && v < m => {
                Ok(Point::Int(if inv { (v + m - 1) % m } else { (v + 1) % m }))
            }
            other => Err(Error::Precondition(format!(
                "point {} is not a residue mod {m}",
                other.key()
            ))),
        }
    }
}

/// Regular action of a free group on its own elements, truncated at a
/// radius. Points are `Int(i)` where `i` indexes the reduced words of
/// length at most `depth` in length-then-lexicographic order; multiplying
/// past the radius is a boundary escape.
#[derive(Clone, Debug)]
pub struct CayleyAction {
    rank: u8,
    depth: usize,
    words: Vec<FreeWord>,
    index: BTreeMap<FreeWord, usize>,
}

impl CayleyAction {
    pub fn new(rank: u8, depth: usize) -> CayleyAction {
        let words = crate::word::free_ball(rank, depth);
        let index = words
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        CayleyAction {
            rank,
            depth,
            words,
            index,
        }
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn point_of(&self, w: &FreeWord) -> Option<Point> {
        self.index.get(w).map(|&i| Point::Int(i as i64))
    }

    pub fn word_of(&self, p: Point) -> Result<&FreeWord> {
        match p {
            Point::Int(i) if 0 <= i && (i as usize) < self.words.len() => {
                Ok(&self.words[i as usize])
            }
            other => Err(Error::Precondition(format!(
                "point {} is not a word index",
                other.key()
            ))),
        }
    }
}

impl Action for CayleyAction {
    fn gen_count(&self) -> usize {
        self.rank as usize
    }

    fn gen_name(&self, i: usize) -> String {
        Letter::new(i as u8, false).to_char().to_string()
    }

    fn base_point(&self) -> Point {
        Point::Int(0)
    }

    fn apply_gen(&self, p: Point, i: usize, inv: bool) -> Result<Point> {
        if i >= self.rank as usize {
            return Err(Error::UnknownGenerator(i));
        }
        let w = self.word_of(p)?;
        let moved = w.mul(&FreeWord::letter(Letter::new(i as u8, inv)));
        match self.point_of(&moved) {
            Some(q) => Ok(q),
            None => Err(Error::BoundaryEscape {
                point: p,
                gen: Letter::new(i as u8, inv).to_char().to_string(),
            }),
        }
    }
}

/// An action given by explicit generator permutations of a finite point
/// set. Total: every generator is a full permutation.
#[derive(Clone, Debug)]
pub struct FinitePermAction {
    names: Vec<String>,
    perms: Vec<FinSuppPerm>,
    base: Point,
}

impl FinitePermAction {
    pub fn new(names: Vec<String>, perms: Vec<FinSuppPerm>, base: Point) -> Result<FinitePermAction> {
        if names.len() != perms.len() {
            return Err(Error::Precondition(
                "one name per generator permutation".into(),
            ));
        }
        Ok(FinitePermAction { names, perms, base })
    }

    pub fn perm(&self, i: usize) -> &FinSuppPerm {
        &self.perms[i]
    }
}

impl Action for FinitePermAction {
    fn gen_count(&self) -> usize {
        self.perms.len()
    }

    fn gen_name(&self, i: usize) -> String {
        self.names[i].clone()
    }

    fn base_point(&self) -> Point {
        self.base
    }

    fn apply_gen(&self, p: Point, i: usize, inv: bool) -> Result<Point> {
        let perm = self.perms.get(i).ok_or(Error::UnknownGenerator(i))?;
        Ok(if inv {
            perm.inverse().apply(p)
        } else {
            perm.apply(p)
        })
    }
}

/// Group arithmetic together with a right action on points: what an
/// enrichment multiplies through.
pub trait AmbientGroup {
    type Elem: Clone + Eq + Ord + std::fmt::Debug;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Self::Elem>;
    fn inv(&self, x: &Self::Elem) -> Result<Self::Elem>;
    fn act(&self, p: Point, g: &Self::Elem) -> Result<Point>;
    fn elem_key(&self, g: &Self::Elem) -> String;

    /// Conjugate a finitely supported permutation of the point universe
    /// through the action: relabels the support along `g`.
    fn conj_perm(&self, sigma: &FinSuppPerm, g: &Self::Elem) -> Result<FinSuppPerm> {
        sigma.map_points(|p| self.act(p, g))
    }
}

/// The free group over an action's generators, acting through it.
#[derive(Clone, Debug)]
pub struct WordAmbient<A: Action> {
    pub action: A,
}

impl<A: Action> WordAmbient<A> {
    pub fn new(action: A) -> WordAmbient<A> {
        WordAmbient { action }
    }
}

impl<A: Action> AmbientGroup for WordAmbient<A> {
    type Elem = FreeWord;

    fn identity(&self) -> FreeWord {
        FreeWord::identity()
    }

    fn mul(&self, x: &FreeWord, y: &FreeWord) -> Result<FreeWord> {
        Ok(x.mul(y))
    }

    fn inv(&self, x: &FreeWord) -> Result<FreeWord> {
        Ok(x.inverse())
    }

    fn act(&self, p: Point, g: &FreeWord) -> Result<Point> {
        self.action.apply_word(p, g)
    }

    fn elem_key(&self, g: &FreeWord) -> String {
        g.to_string()
    }
}

/// A finite catalog group acting on its own point set.
#[derive(Clone, Debug)]
pub struct FiniteAmbient {
    pub group: FiniteGroup,
}

impl FiniteAmbient {
    pub fn new(group: FiniteGroup) -> FiniteAmbient {
        FiniteAmbient { group }
    }
}

impl AmbientGroup for FiniteAmbient {
    type Elem = GroupElem;

    fn identity(&self) -> GroupElem {
        self.group.identity()
    }

    fn mul(&self, x: &GroupElem, y: &GroupElem) -> Result<GroupElem> {
        self.group.mul(x, y)
    }

    fn inv(&self, x: &GroupElem) -> Result<GroupElem> {
        self.group.inv(x)
    }

    fn act(&self, p: Point, g: &GroupElem) -> Result<Point> {
        self.group.act(p, g)
    }

    fn elem_key(&self, g: &GroupElem) -> String {
        g.key()
    }
}
