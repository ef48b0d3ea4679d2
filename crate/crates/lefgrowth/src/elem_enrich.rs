//! Transvection matrices over the integers and modular rings, indexed by
//! opaque points, together with the elementary enrichment of a group
//! action: the group of identity-plus-finite-deviation matrices twisted
//! by the acting group.
//!
//! A transvection `E_{v,w}(r)` adds `r` times basis vector `w` to basis
//! vector `v` and fixes everything else. Products of transvections stay
//! invertible, and the inverse is carried along exactly, so equality,
//! inversion, and congruence reduction are all exact operations.
//!
//! The enrichment pairs a matrix with an ambient group element under the
//! same twisted product used for permutations: the matrix part of the
//! right factor is re-indexed along the action before multiplying. The
//! window `I(n)` collects pairs whose matrix touches only the radius-`n`
//! ball (with sup-norm at most `2^n` over the integers) and whose group
//! part has length at most `n`; a verified local embedding of the base
//! action transports `I(n)` into the enrichment of the finite target
//! after reducing entries modulo `q`, which is injective precisely when
//! `q` exceeds twice the norm bound.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::{BigInt, BigUint, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::{Action, AmbientGroup, FiniteAmbient, WordAmbient};
use crate::embeddings::{CheckMode, Counterexample, WitnessStatus};
use crate::error::{Error, Result};
use crate::finite::{FiniteGroup, GroupElem, Mat2};
use crate::graph::SimpleGraph;
use crate::perm::Point;
use crate::permissible::FiniteActionApprox;
use crate::word::{free_ball, FreeWord, Letter};

/// Coefficient ring for matrix entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ring {
    /// The integers, with exact arbitrary-precision entries.
    Int,
    /// Integers modulo `q` for any `q >= 2`.
    Mod(u64),
    /// The field with `p` elements; `p` is validated prime.
    Prime(u64),
}

impl Ring {
    pub fn modular(q: u64) -> Result<Ring> {
        if q < 2 {
            return Err(Error::Precondition("modulus must be at least 2".into()));
        }
        Ok(Ring::Mod(q))
    }

    pub fn prime(p: u64) -> Result<Ring> {
        if !is_prime(p) {
            return Err(Error::Precondition(format!("{p} is not prime")));
        }
        Ok(Ring::Prime(p))
    }

    pub fn name(&self) -> String {
        match self {
            Ring::Int => "Z".into(),
            Ring::Mod(q) => format!("Z/{q}"),
            Ring::Prime(p) => format!("F_{p}"),
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            Ring::Int => None,
            Ring::Mod(q) | Ring::Prime(q) => Some(*q),
        }
    }

    fn normalize(&self, x: BigInt) -> BigInt {
        match self.modulus() {
            None => x,
            Some(q) => {
                let q = BigInt::from(q);
                ((x % &q) + &q) % &q
            }
        }
    }

    fn check_match(&self, other: &Ring) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::RingMismatch {
                left: self.name(),
                right: other.name(),
            })
        }
    }
}

type Dev = BTreeMap<(Point, Point), BigInt>;

/// An invertible matrix of the form identity plus a finite deviation,
/// rows and columns indexed by points. The inverse is maintained through
/// every operation, so no elimination is ever needed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ElemMatrix {
    ring: Ring,
    dev: Dev,
    inv: Dev,
}

fn dev_normalize(ring: &Ring, dev: Dev) -> Dev {
    dev.into_iter()
        .map(|(k, v)| (k, ring.normalize(v)))
        .filter(|(_, v)| v.sign() != Sign::NoSign)
        .collect()
}

/// `out = d1 + d2 + d1*d2`, the deviation of `(I + d1)(I + d2)`.
fn dev_combine(ring: &Ring, d1: &Dev, d2: &Dev) -> Dev {
    let mut rows: BTreeMap<Point, Vec<(Point, &BigInt)>> = BTreeMap::new();
    for ((r, c), v) in d2 {
        rows.entry(*r).or_default().push((*c, v));
    }
    let mut out = d1.clone();
    for (k, v) in d2 {
        *out.entry(*k).or_insert_with(|| BigInt::from(0)) += v;
    }
    for ((r, mid), a) in d1 {
        if let Some(cols) = rows.get(mid) {
            for (c, b) in cols {
                *out.entry((*r, *c)).or_insert_with(|| BigInt::from(0)) += a * *b;
            }
        }
    }
    dev_normalize(ring, out)
}

impl ElemMatrix {
    pub fn identity(ring: Ring) -> ElemMatrix {
        ElemMatrix {
            ring,
            dev: Dev::new(),
            inv: Dev::new(),
        }
    }

    /// `E_{v,w}(r)`: adds `r` times `w` to `v`. A zero parameter yields
    /// the identity; equal indices are rejected.
    pub fn transvection(ring: Ring, v: Point, w: Point, r: impl Into<BigInt>) -> Result<ElemMatrix> {
        if v == w {
            return Err(Error::Precondition(format!(
                "transvection indices coincide at {}",
                v.key()
            )));
        }
        let r = ring.normalize(r.into());
        if r.sign() == Sign::NoSign {
            return Ok(ElemMatrix::identity(ring));
        }
        let neg = ring.normalize(-&r);
        Ok(ElemMatrix {
            ring,
            dev: Dev::from([((v, w), r)]),
            inv: Dev::from([((v, w), neg)]),
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn is_identity(&self) -> bool {
        self.dev.is_empty()
    }

    /// Entry at `(v, w)` of the full matrix, including the implicit
    /// identity part.
    pub fn entry(&self, v: Point, w: Point) -> BigInt {
        let diag = if v == w { BigInt::from(1) } else { BigInt::from(0) };
        match self.dev.get(&(v, w)) {
            Some(x) => self.ring.normalize(diag + x),
            None => self.ring.normalize(diag),
        }
    }

    /// Points whose row or column deviates from the identity.
    pub fn touched(&self) -> BTreeSet<Point> {
        self.dev
            .keys()
            .flat_map(|&(r, c)| [r, c])
            .collect()
    }

    pub fn deviation(&self) -> &BTreeMap<(Point, Point), BigInt> {
        &self.dev
    }

    pub fn mul(&self, other: &ElemMatrix) -> Result<ElemMatrix> {
        self.ring.check_match(&other.ring)?;
        Ok(ElemMatrix {
            ring: self.ring,
            dev: dev_combine(&self.ring, &self.dev, &other.dev),
            inv: dev_combine(&self.ring, &other.inv, &self.inv),
        })
    }

    pub fn inverse(&self) -> ElemMatrix {
        ElemMatrix {
            ring: self.ring,
            dev: self.inv.clone(),
            inv: self.dev.clone(),
        }
    }

    /// `[a, b] = a^-1 b^-1 a b`.
    pub fn commutator(a: &ElemMatrix, b: &ElemMatrix) -> Result<ElemMatrix> {
        a.inverse().mul(&b.inverse())?.mul(a)?.mul(b)
    }

    /// Relabels rows and columns through `f`, which must be injective on
    /// the touched points. With `f = (.)g` this is the conjugate by `g`.
    pub fn map_points<F>(&self, mut f: F) -> Result<ElemMatrix>
    where
        F: FnMut(Point) -> Result<Point>,
    {
        let mut relabel: BTreeMap<Point, Point> = BTreeMap::new();
        let mut images: BTreeSet<Point> = BTreeSet::new();
        for p in self.touched() {
            let q = f(p)?;
            if !images.insert(q) {
                return Err(Error::NotAPermutation(
                    "point relabeling is not injective on the touched block".into(),
                ));
            }
            relabel.insert(p, q);
        }
        let move_dev = |d: &Dev| -> Dev {
            d.iter()
                .map(|(&(r, c), v)| ((relabel[&r], relabel[&c]), v.clone()))
                .collect()
        };
        Ok(ElemMatrix {
            ring: self.ring,
            dev: move_dev(&self.dev),
            inv: move_dev(&self.inv),
        })
    }

    /// Reduces entries into `target`: from the integers to any modulus,
    /// or from modulus `q` to a divisor of `q`. Ring homomorphisms only,
    /// so the inverse reduces along.
    pub fn reduce(&self, target: Ring) -> Result<ElemMatrix> {
        match (self.ring.modulus(), target.modulus()) {
            (_, None) => {
                self.ring.check_match(&target)?;
                return Ok(self.clone());
            }
            (None, Some(_)) => {}
            (Some(q), Some(r)) if q % r == 0 => {}
            (Some(q), Some(r)) => {
                return Err(Error::Precondition(format!(
                    "no reduction from modulus {q} to {r}"
                )))
            }
        }
        let move_dev = |d: &Dev| dev_normalize(&target, d.clone());
        Ok(ElemMatrix {
            ring: target,
            dev: move_dev(&self.dev),
            inv: move_dev(&self.inv),
        })
    }

    /// Exact sup-norm over the touched square block (the rest of the
    /// matrix contributes only the identity, so the norm is at least 1).
    /// Integer matrices only.
    pub fn norm_inf(&self) -> Result<BigUint> {
        if self.ring != Ring::Int {
            return Err(Error::Precondition(format!(
                "sup-norm is defined over Z, not {}",
                self.ring.name()
            )));
        }
        let pts: Vec<Point> = self.touched().into_iter().collect();
        let mut best = BigUint::from(1u32);
        for &v in &pts {
            for &w in &pts {
                let mag = self.entry(v, w).magnitude().clone();
                if mag > best {
                    best = mag;
                }
            }
        }
        Ok(best)
    }

    /// Internal consistency: the stored inverse really inverts.
    pub fn check_inverse(&self) -> Result<bool> {
        Ok(self.mul(&self.inverse())?.is_identity())
    }

    pub fn key(&self) -> String {
        if self.is_identity() {
            return "I".into();
        }
        let cells: Vec<String> = self
            .dev
            .iter()
            .map(|(&(r, c), v)| format!("{},{}:{}", r.key(), c.key(), v))
            .collect();
        format!("[{}]", cells.join(" "))
    }

    pub fn to_data(&self) -> ElemMatrixData {
        let pack = |d: &Dev| {
            d.iter()
                .map(|(&(r, c), v)| (r.key(), c.key(), v.to_string()))
                .collect()
        };
        ElemMatrixData {
            ring: self.ring,
            triples: pack(&self.dev),
            inverse_triples: pack(&self.inv),
        }
    }

    pub fn from_data(data: &ElemMatrixData) -> Result<ElemMatrix> {
        let unpack = |triples: &[(String, String, String)]| -> Result<Dev> {
            let mut out = Dev::new();
            for (r, c, v) in triples {
                let key = (Point::parse_key(r)?, Point::parse_key(c)?);
                let value: BigInt = v
                    .parse()
                    .map_err(|_| Error::Serde(format!("bad matrix entry {v}")))?;
                if out.insert(key, data.ring.normalize(value)).is_some() {
                    return Err(Error::Serde(format!("duplicate entry at ({r}, {c})")));
                }
            }
            Ok(out)
        };
        let m = ElemMatrix {
            ring: data.ring,
            dev: dev_normalize(&data.ring, unpack(&data.triples)?),
            inv: dev_normalize(&data.ring, unpack(&data.inverse_triples)?),
        };
        if !m.check_inverse()? {
            return Err(Error::Serde("stored inverse does not invert".into()));
        }
        Ok(m)
    }
}

/// Sparse serialization form: ring tag plus `(row, col, value)` triples
/// for the matrix and its inverse.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElemMatrixData {
    pub ring: Ring,
    pub triples: Vec<(String, String, String)>,
    pub inverse_triples: Vec<(String, String, String)>,
}

/// An enrichment element: a deviation matrix together with an ambient
/// group element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ElemEnrichElem<E> {
    pub mat: ElemMatrix,
    pub g: E,
}

/// Arithmetic of the elementary enrichment over a fixed ambient group:
/// `(M1, g1)(M2, g2) = (M1 * M2^(g1^-1), g1 g2)` with `M^g` the
/// re-indexing of `M` along the action of `g`.
#[derive(Clone, Debug)]
pub struct ElemEnrichment<A: AmbientGroup> {
    pub ambient: A,
    ring: Ring,
    name: String,
}

impl<A: AmbientGroup> ElemEnrichment<A> {
    pub fn new(ambient: A, ring: Ring, name: impl Into<String>) -> ElemEnrichment<A> {
        ElemEnrichment {
            ambient,
            ring,
            name: name.into(),
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn name(&self) -> String {
        self.name.clone()
    }

    pub fn identity(&self) -> ElemEnrichElem<A::Elem> {
        ElemEnrichElem {
            mat: ElemMatrix::identity(self.ring),
            g: self.ambient.identity(),
        }
    }

    pub fn conj_mat(&self, m: &ElemMatrix, g: &A::Elem) -> Result<ElemMatrix> {
        m.map_points(|p| self.ambient.act(p, g))
    }

    pub fn mul(
        &self,
        x: &ElemEnrichElem<A::Elem>,
        y: &ElemEnrichElem<A::Elem>,
    ) -> Result<ElemEnrichElem<A::Elem>> {
        self.ring.check_match(x.mat.ring())?;
        self.ring.check_match(y.mat.ring())?;
        let g1_inv = self.ambient.inv(&x.g)?;
        let twisted = self.conj_mat(&y.mat, &g1_inv)?;
        Ok(ElemEnrichElem {
            mat: x.mat.mul(&twisted)?,
            g: self.ambient.mul(&x.g, &y.g)?,
        })
    }

    pub fn inv(&self, x: &ElemEnrichElem<A::Elem>) -> Result<ElemEnrichElem<A::Elem>> {
        Ok(ElemEnrichElem {
            mat: self.conj_mat(&x.mat.inverse(), &x.g)?,
            g: self.ambient.inv(&x.g)?,
        })
    }

    pub fn elem_key(&self, x: &ElemEnrichElem<A::Elem>) -> String {
        format!("{}*{}", x.mat.key(), self.ambient.elem_key(&x.g))
    }
}

/// The enriched generating set: ambient generators plus the transvections
/// `E_{base, base.s}` and `E_{base.s, base}` for every generator letter
/// moving the base point.
#[derive(Clone, Debug)]
pub struct ElemGenSet {
    pub ambient: Vec<(String, FreeWord)>,
    pub transvections: Vec<(String, ElemMatrix)>,
}

pub fn elem_generators<A: Action>(action: &A, ring: Ring) -> Result<ElemGenSet> {
    let base = action.base_point();
    let mut ambient = Vec::new();
    let mut transvections = Vec::new();
    let mut seen = BTreeSet::new();
    for i in 0..action.gen_count() {
        for inv in [false, true] {
            let letter = Letter::new(i as u8, inv);
            let name = if inv {
                format!("{}^-1", action.gen_name(i))
            } else {
                action.gen_name(i)
            };
            ambient.push((name, FreeWord::letter(letter)));
            let image = action.apply_gen(base, i, inv)?;
            if image != base && seen.insert(image) {
                transvections.push((
                    format!("E({} {})", base.key(), image.key()),
                    ElemMatrix::transvection(ring, base, image, 1)?,
                ));
                transvections.push((
                    format!("E({} {})", image.key(), base.key()),
                    ElemMatrix::transvection(ring, image, base, 1)?,
                ));
            }
        }
    }
    Ok(ElemGenSet {
        ambient,
        transvections,
    })
}

/// The window generator set at level `n`: every enriched transvection
/// conjugated by an ambient word of length at most `n - 1`, i.e. the
/// matrices `E_{base.g, base.sg}` and `E_{base.sg, base.g}`. All of them
/// touch only the radius-`n` ball.
pub fn window_generators<A: Action>(action: &A, n: usize, ring: Ring) -> Result<Vec<ElemMatrix>> {
    if n == 0 {
        return Err(Error::Precondition("window level must be positive".into()));
    }
    let base = action.base_point();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for g in free_ball(action.gen_count() as u8, n - 1) {
        for i in 0..action.gen_count() {
            for inv in [false, true] {
                let s = action.apply_gen(base, i, inv)?;
                if s == base {
                    continue;
                }
                let from = action.apply_word(base, &g)?;
                let to = action.apply_word(s, &g)?;
                for (a, b) in [(from, to), (to, from)] {
                    if seen.insert((a, b)) {
                        out.push(ElemMatrix::transvection(ring, a, b, 1)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One letter of a word over the enriched generating set: an ambient
/// letter, or the transvection from the base point toward `base.s`
/// (`Up`), or back (`Down`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElemLetter {
    Ambient(Letter),
    Up(Letter),
    Down(Letter),
}

/// A word over the enriched generators; each letter carries an inversion
/// flag. Lengths are counted without free reduction, so every recorded
/// bound is conservative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElemWord {
    pub letters: Vec<(ElemLetter, bool)>,
}

impl ElemWord {
    pub fn empty() -> ElemWord {
        ElemWord::default()
    }

    pub fn single(l: ElemLetter) -> ElemWord {
        ElemWord {
            letters: vec![(l, false)],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn mul(&self, other: &ElemWord) -> ElemWord {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        ElemWord { letters }
    }

    pub fn inverse(&self) -> ElemWord {
        ElemWord {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|&(l, inv)| (l, !inv))
                .collect(),
        }
    }

    /// `k^-1 * self * k` for an ambient word `k`.
    pub fn conjugated_by(&self, k: &FreeWord) -> ElemWord {
        let amb = |w: &FreeWord| ElemWord {
            letters: w.letters().iter().map(|&l| (ElemLetter::Ambient(l), false)).collect(),
        };
        amb(&k.inverse()).mul(self).mul(&amb(k))
    }

    /// `[a, b] = a^-1 b^-1 a b`.
    pub fn commutator(a: &ElemWord, b: &ElemWord) -> ElemWord {
        a.inverse().mul(&b.inverse()).mul(a).mul(b)
    }

    /// Evaluates the word in the enrichment of the given action. The
    /// enrichment's ambient must act compatibly with `action`, which
    /// resolves the transvection endpoints.
    pub fn evaluate<G, A>(
        &self,
        enr: &ElemEnrichment<G>,
        action: &A,
    ) -> Result<ElemEnrichElem<FreeWord>>
    where
        G: AmbientGroup<Elem = FreeWord>,
        A: Action,
    {
        let ring = *enr.ring();
        let base = action.base_point();
        let mut acc = enr.identity();
        for &(letter, inverted) in &self.letters {
            let elem = match letter {
                ElemLetter::Ambient(l) => ElemEnrichElem {
                    mat: ElemMatrix::identity(ring),
                    g: FreeWord::letter(l),
                },
                ElemLetter::Up(l) => ElemEnrichElem {
                    mat: ElemMatrix::transvection(ring, base, action.apply_letter(base, l)?, 1)?,
                    g: FreeWord::identity(),
                },
                ElemLetter::Down(l) => ElemEnrichElem {
                    mat: ElemMatrix::transvection(ring, action.apply_letter(base, l)?, base, 1)?,
                    g: FreeWord::identity(),
                },
            };
            let elem = if inverted { enr.inv(&elem)? } else { elem };
            acc = enr.mul(&acc, &elem)?;
        }
        Ok(acc)
    }
}

/// One recursion level of the word synthesis, recording the length
/// recurrence `L_m <= 4 L_{m-1} + 2^(m+1)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub word_len: usize,
    pub child_max: usize,
    pub conj_len: usize,
}

/// Synthesized word for a transvection, with the per-level length
/// records and the measured constant from `L_m <= (C/2) 4^m`.
#[derive(Clone, Debug)]
pub struct TransvectionWord {
    pub word: ElemWord,
    pub levels: Vec<LevelRecord>,
    pub measured_c: f64,
}

fn level_of(len: usize) -> usize {
    // Smallest m with len <= 2^m.
    let mut m = 0;
    while (1usize << m) < len {
        m += 1;
    }
    m
}

fn synth_transvection<A: Action>(
    action: &A,
    g: &FreeWord,
    n: usize,
    levels: &mut Vec<LevelRecord>,
) -> Result<ElemWord> {
    let base = action.base_point();
    let image = action.apply_word(base, g)?;

    // Base case: the target point is a generator neighbor of the base.
    for i in 0..action.gen_count() {
        for inv in [false, true] {
            if action.apply_gen(base, i, inv)? == image {
                return Ok(ElemWord::single(ElemLetter::Up(Letter::new(i as u8, inv))));
            }
        }
    }

    // Split g = hk with both halves inside the level bound and the three
    // points base, base.k, base.g pairwise distinct, preferring splits
    // near the middle. A reduced word is the unique geodesic of its
    // element in the free group, so no other geodesics exist to try.
    let len = g.len();
    let m = level_of(len);
    let half = 1usize << m.saturating_sub(1);
    let letters = g.letters();
    let mut positions: Vec<usize> = (1..len).collect();
    positions.sort_by_key(|&i| (2 * i).abs_diff(len));
    for i in positions {
        if i > half || len - i > half {
            continue;
        }
        let h = FreeWord::from_letters(letters[..i].iter().copied());
        let k = FreeWord::from_letters(letters[i..].iter().copied());
        let mid = action.apply_word(base, &k)?;
        if mid == base || mid == image {
            continue;
        }
        let word_k = synth_transvection(action, &k, n, levels)?;
        let word_h = synth_transvection(action, &h, n, levels)?;
        let conjugated = word_h.conjugated_by(&k);
        let word = ElemWord::commutator(&word_k, &conjugated);
        let child_max = word_k.len().max(word_h.len());
        let record = LevelRecord {
            level: m,
            word_len: word.len(),
            child_max,
            conj_len: k.len(),
        };
        debug_assert!(record.word_len <= 4 * record.child_max + (1 << (m + 1)));
        levels.push(record);
        return Ok(word);
    }
    Err(Error::NoSplit {
        word: g.to_string(),
        radius: n,
    })
}

/// Synthesizes a word over the enriched generators evaluating to
/// `E_{base, base.g}`, verifying the result by matrix evaluation. The
/// word length obeys `L_m <= 4 L_{m-1} + 2^(m+1)` per recursion level.
pub fn word_for_transvection<A: Action>(
    action: &A,
    g: &FreeWord,
    n: usize,
) -> Result<TransvectionWord> {
    if g.len() > n {
        return Err(Error::Precondition(format!(
            "|g| = {} exceeds the window length {n}",
            g.len()
        )));
    }
    let base = action.base_point();
    let image = action.apply_word(base, g)?;
    if image == base {
        return Err(Error::Precondition(
            "the word fixes the base point, so the target transvection is degenerate".into(),
        ));
    }
    let mut levels = Vec::new();
    let word = synth_transvection(action, g, n, &mut levels)?;

    let enr = ElemEnrichment::new(WordAmbient::new(action), Ring::Int, "synthesis check");
    let value = word.evaluate(&enr, action)?;
    let target = ElemMatrix::transvection(Ring::Int, base, image, 1)?;
    if value.mat != target || !value.g.is_empty() {
        return Err(Error::Precondition(
            "synthesized word does not evaluate to the target transvection".into(),
        ));
    }

    let m = level_of(g.len().max(1));
    let measured_c = 2.0 * word.len() as f64 / 4f64.powi(m as i32);
    Ok(TransvectionWord {
        word,
        levels,
        measured_c,
    })
}

/// A word over edge transvections `E_{a,b}` of a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphWord {
    pub letters: Vec<((Point, Point), bool)>,
}

impl GraphWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn mul(&self, other: &GraphWord) -> GraphWord {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        GraphWord { letters }
    }

    pub fn inverse(&self) -> GraphWord {
        GraphWord {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|&(e, inv)| (e, !inv))
                .collect(),
        }
    }

    pub fn commutator(a: &GraphWord, b: &GraphWord) -> GraphWord {
        a.inverse().mul(&b.inverse()).mul(a).mul(b)
    }

    pub fn evaluate(&self, ring: Ring) -> Result<ElemMatrix> {
        let mut acc = ElemMatrix::identity(ring);
        for &((a, b), inv) in &self.letters {
            let e = ElemMatrix::transvection(ring, a, b, 1)?;
            let e = if inv { e.inverse() } else { e };
            acc = acc.mul(&e)?;
        }
        Ok(acc)
    }
}

fn path_word(path: &[Point]) -> GraphWord {
    let n = path.len() - 1;
    if n == 1 {
        return GraphWord {
            letters: vec![((path[0], path[1]), false)],
        };
    }
    let mid = n.div_ceil(2);
    let left = path_word(&path[..=mid]);
    let right = path_word(&path[mid..]);
    GraphWord::commutator(&left, &right)
}

/// Word over the edge transvections of `graph` evaluating to `E_{v,w}`,
/// built by recursive halving of a shortest path. For path length
/// `n <= 2^m` the word has length at most `4^m`.
pub fn path_commutator_word(graph: &SimpleGraph, v: Point, w: Point) -> Result<GraphWord> {
    if v == w {
        return Err(Error::Precondition(
            "endpoints of the transvection coincide".into(),
        ));
    }
    let path = graph.shortest_path(v, w)?;
    let word = path_word(&path);
    let m = level_of(path.len() - 1);
    if word.len() > (1usize << (2 * m)) {
        return Err(Error::Precondition(format!(
            "halving word of length {} exceeds 4^{m}",
            word.len()
        )));
    }
    let value = word.evaluate(Ring::Int)?;
    if value != ElemMatrix::transvection(Ring::Int, v, w, 1)? {
        return Err(Error::Precondition(
            "halving word does not evaluate to the edge transvection".into(),
        ));
    }
    Ok(word)
}

/// Norm and membership report for an integer enrichment element against
/// the window `I(n)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormReport {
    pub norm: BigUint,
    pub indices_inside: bool,
    pub norm_within: bool,
    pub word_within: bool,
}

impl NormReport {
    pub fn in_window(&self) -> bool {
        self.indices_inside && self.norm_within && self.word_within
    }
}

/// Checks membership of `x` in `I(n)`: matrix indices inside the window,
/// sup-norm at most `2^n`, word length at most `n`.
pub fn elem_window_check(
    x: &ElemEnrichElem<FreeWord>,
    n: usize,
    window: &BTreeSet<Point>,
) -> Result<NormReport> {
    let norm = x.mat.norm_inf()?;
    Ok(NormReport {
        indices_inside: x.mat.touched().iter().all(|p| window.contains(p)),
        norm_within: norm <= (BigUint::from(1u32) << n),
        word_within: x.g.len() <= n,
        norm,
    })
}

/// Whether the precondition `q > 2^(n+1)` is enforced or deliberately
/// waived to demonstrate the failure mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CongruenceMode {
    Strict,
    Demonstration,
}

/// Verification record for the congruence-reduced map on the elementary
/// window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElemPhiReport {
    pub target_ring: Ring,
    pub mode: CheckMode,
    pub pool_size: usize,
    pub pool_truncated: bool,
    pub domain_size: usize,
    pub pairs_checked: usize,
    pub products_inside: usize,
    pub status: WitnessStatus,
}

impl ElemPhiReport {
    pub fn verified(&self) -> bool {
        matches!(self.status, WitnessStatus::Verified)
    }
}

/// Breadth-first closure of products of `gens` (and their inverses)
/// filtered by `keep`, capped at `cap` elements.
fn matrix_pool(
    start: ElemMatrix,
    gens: &[ElemMatrix],
    keep: impl Fn(&ElemMatrix) -> Result<bool>,
    cap: usize,
) -> Result<(Vec<ElemMatrix>, bool)> {
    let mut all: Vec<ElemMatrix> = gens.to_vec();
    all.extend(gens.iter().map(|g| g.inverse()));
    let mut seen: BTreeSet<ElemMatrix> = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut truncated = false;
    'bfs: while let Some(x) = queue.pop_front() {
        for gen in &all {
            let y = x.mul(gen)?;
            if !keep(&y)? || seen.contains(&y) {
                continue;
            }
            if seen.len() >= cap {
                truncated = true;
                break 'bfs;
            }
            seen.insert(y.clone());
            queue.push_back(y);
        }
    }
    Ok((seen.into_iter().collect(), truncated))
}

/// Build and verify the map `M * g -> reduce_q(theta(M)) * pi(g)` from
/// the elementary window `I(n)` into the enrichment of the finite target
/// over `Z/q` or `F_p`.
///
/// Over `Z/q` the source matrices are integral with sup-norm at most
/// `2^n`; strict mode requires `q > 2^(n+1)`, which makes the reduction
/// injective on them. Demonstration mode waives that check and instead
/// reports the concrete injectivity counterexample `E(a)` vs `E(a - q)`
/// whenever `q` is too small. Over `F_p` there is no norm condition.
///
/// The domain is sampled as the breadth-first closure of window
/// generator products (capped at `pool_cap`) times the length-`n` word
/// ball; injectivity is checked exhaustively on that set, and the
/// multiplication law on `mode` pairs whose product stays in `I(n)`.
#[allow(clippy::too_many_arguments)]
pub fn build_phi_elem<A: Action + Clone>(
    action: &A,
    n: usize,
    target: &FiniteGroup,
    theta: impl Fn(&Point) -> Result<Point>,
    pi: impl Fn(&FreeWord) -> Result<GroupElem>,
    target_ring: Ring,
    congruence: CongruenceMode,
    pool_cap: usize,
    mode: CheckMode,
) -> Result<ElemPhiReport> {
    let graph = crate::schreier::ActionGraph::ball(action, n)?;
    let window: Vec<Point> = graph.points().to_vec();
    let window_set: BTreeSet<Point> = window.iter().copied().collect();

    let (source_ring, norm_cap) = match target_ring {
        Ring::Int => {
            return Err(Error::Precondition(
                "target ring must be modular".into(),
            ))
        }
        Ring::Mod(q) => {
            if congruence == CongruenceMode::Strict && BigUint::from(q) <= (BigUint::from(2u32) << n)
            {
                return Err(Error::Precondition(format!(
                    "modulus {q} is not above the injectivity threshold 2^{}",
                    n + 1
                )));
            }
            (Ring::Int, Some(BigUint::from(1u32) << n))
        }
        Ring::Prime(_) => (target_ring, None),
    };

    // A demonstration run with a too-small modulus exhibits the collision
    // E(a) = E(a - q) mod q with both norms within the window bound.
    if let (Ring::Mod(q), CongruenceMode::Demonstration) = (target_ring, congruence) {
        if BigUint::from(q) <= (BigUint::from(2u32) << n) {
            let v = window[0];
            let w = *window
                .iter()
                .find(|p| **p != v)
                .ok_or_else(|| Error::Precondition("window has a single point".into()))?;
            let a = (BigInt::from(q) - (BigInt::from(1) << n)).max(BigInt::from(0));
            let x = ElemMatrix::transvection(Ring::Int, v, w, a.clone())?;
            let y = ElemMatrix::transvection(Ring::Int, v, w, a - BigInt::from(q))?;
            debug_assert_eq!(x.reduce(target_ring)?, y.reduce(target_ring)?);
            return Ok(ElemPhiReport {
                target_ring,
                mode,
                pool_size: 0,
                pool_truncated: false,
                domain_size: 0,
                pairs_checked: 0,
                products_inside: 0,
                status: WitnessStatus::Failed(Counterexample::Injectivity {
                    x: format!("{}*e", x.key()),
                    y: format!("{}*e", y.key()),
                }),
            });
        }
    }

    // theta images, checked injective.
    let mut theta_window = Vec::with_capacity(window.len());
    for p in &window {
        theta_window.push(theta(p)?);
    }
    if theta_window.iter().collect::<BTreeSet<_>>().len() != theta_window.len() {
        return Err(Error::Precondition(
            "theta is not injective on the window".into(),
        ));
    }
    let theta_of = |p: &Point| -> Result<Point> {
        let i = window
            .iter()
            .position(|w| w == p)
            .ok_or_else(|| Error::Precondition(format!("{} not in the window", p.key())))?;
        Ok(theta_window[i])
    };

    // The matrix pool: products of window generators staying in A(n).
    let gens = match source_ring {
        Ring::Int => window_generators(action, n, Ring::Int)?,
        Ring::Prime(p) => {
            let mut gens = Vec::new();
            for &v in &window {
                for &w in &window {
                    if v != w {
                        for r in 1..p {
                            gens.push(ElemMatrix::transvection(source_ring, v, w, r)?);
                        }
                    }
                }
            }
            gens
        }
        Ring::Mod(_) => unreachable!("source ring is Z or a prime field"),
    };
    let keep = |m: &ElemMatrix| -> Result<bool> {
        if !m.touched().iter().all(|p| window_set.contains(p)) {
            return Ok(false);
        }
        match &norm_cap {
            Some(cap) => Ok(m.norm_inf()? <= *cap),
            None => Ok(true),
        }
    };
    let (pool, pool_truncated) =
        matrix_pool(ElemMatrix::identity(source_ring), &gens, keep, pool_cap)?;

    let words = free_ball(action.gen_count() as u8, n);
    let mut pi_of = BTreeMap::new();
    for w in &words {
        pi_of.insert(w.clone(), pi(w)?);
    }

    let enr_src = ElemEnrichment::new(
        WordAmbient::new(action.clone()),
        source_ring,
        "source elementary enrichment",
    );
    let enr_tgt = ElemEnrichment::new(
        FiniteAmbient::new(target.clone()),
        target_ring,
        format!("E({}, {})", target.name(), target_ring.name()),
    );

    let phi = |x: &ElemEnrichElem<FreeWord>| -> Result<ElemEnrichElem<GroupElem>> {
        Ok(ElemEnrichElem {
            mat: x.mat.map_points(|p| theta_of(&p))?.reduce(target_ring)?,
            g: pi_of[&x.g].clone(),
        })
    };

    // Domain enumeration and exhaustive injectivity.
    let elements: Vec<ElemEnrichElem<FreeWord>> = pool
        .iter()
        .flat_map(|m| {
            words.iter().map(move |w| ElemEnrichElem {
                mat: m.clone(),
                g: w.clone(),
            })
        })
        .collect();
    let mut images: BTreeMap<String, usize> = BTreeMap::new();
    for (i, x) in elements.iter().enumerate() {
        let key = enr_tgt.elem_key(&phi(x)?);
        if let Some(&j) = images.get(&key) {
            return Ok(ElemPhiReport {
                target_ring,
                mode,
                pool_size: pool.len(),
                pool_truncated,
                domain_size: elements.len(),
                pairs_checked: 0,
                products_inside: 0,
                status: WitnessStatus::Failed(Counterexample::Injectivity {
                    x: enr_src.elem_key(&elements[j]),
                    y: enr_src.elem_key(&elements[i]),
                }),
            });
        }
        images.insert(key, i);
    }

    // Multiplication law on pairs whose product stays in the window.
    let mut pairs_checked = 0usize;
    let mut products_inside = 0usize;
    let mut violation: Option<Counterexample> = None;
    let mut check_pair = |i: usize, j: usize| -> Result<bool> {
        pairs_checked += 1;
        let z = enr_src.mul(&elements[i], &elements[j])?;
        if z.g.len() > n || !z.mat.touched().iter().all(|p| window_set.contains(p)) {
            return Ok(true);
        }
        if let Some(cap) = &norm_cap {
            if z.mat.norm_inf()? > *cap {
                return Ok(true);
            }
        }
        products_inside += 1;
        let expected = phi(&z)?;
        let got = enr_tgt.mul(&phi(&elements[i])?, &phi(&elements[j])?)?;
        if got != expected {
            violation = Some(Counterexample::Multiplicativity {
                x: enr_src.elem_key(&elements[i]),
                y: enr_src.elem_key(&elements[j]),
                expected: enr_tgt.elem_key(&expected),
                got: enr_tgt.elem_key(&got),
            });
            return Ok(false);
        }
        Ok(true)
    };
    match &mode {
        CheckMode::Exhaustive => 'outer: {
            for i in 0..elements.len() {
                for j in 0..elements.len() {
                    if !check_pair(i, j)? {
                        break 'outer;
                    }
                }
            }
        }
        CheckMode::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*pairs {
                let i = rng.gen_range(0..elements.len());
                let j = rng.gen_range(0..elements.len());
                if !check_pair(i, j)? {
                    break;
                }
            }
        }
    }

    Ok(ElemPhiReport {
        target_ring,
        mode,
        pool_size: pool.len(),
        pool_truncated,
        domain_size: elements.len(),
        pairs_checked,
        products_inside,
        status: match violation {
            Some(c) => WitnessStatus::Failed(c),
            None => WitnessStatus::Verified,
        },
    })
}

/// The congruence map for a pipeline approximation.
pub fn build_phi_elem_for_approx(
    approx: &FiniteActionApprox,
    target_ring: Ring,
    congruence: CongruenceMode,
    pool_cap: usize,
    mode: CheckMode,
) -> Result<ElemPhiReport> {
    build_phi_elem(
        &approx.omega,
        approx.n,
        &approx.q_group,
        |p| approx.theta(p),
        |w| approx.pi(w),
        target_ring,
        congruence,
        pool_cap,
        mode,
    )
}

/// Verification record for the Chinese-remainder factorization of
/// `SL_V(Z/q1q2)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrtReport {
    pub q1: u64,
    pub q2: u64,
    pub enumerated: bool,
    /// Orders of the two factor groups (enumerated cases only).
    pub factor_orders: Option<(BigUint, BigUint)>,
    /// Order of the product-modulus group (enumerated cases only).
    pub product_order: Option<BigUint>,
    pub bijective: bool,
    pub lift_roundtrips: usize,
    pub preimage_checks: usize,
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// The unique residue mod `q1*q2` reducing to `a` mod `q1` and `b` mod
/// `q2`, for coprime moduli.
pub fn crt_lift_entry(a: u64, b: u64, q1: u64, q2: u64) -> Result<u64> {
    let (g, x, _) = ext_gcd(q1 as i128, q2 as i128);
    if g != 1 {
        return Err(Error::Precondition(format!(
            "moduli {q1} and {q2} are not coprime"
        )));
    }
    let q = (q1 as i128) * (q2 as i128);
    // x = q1^-1 mod q2 direction: a + q1 * ((b - a) * x mod q2)
    let diff = (b as i128 - a as i128).rem_euclid(q2 as i128);
    let t = (diff * x.rem_euclid(q2 as i128)).rem_euclid(q2 as i128);
    Ok(((a as i128 + q1 as i128 * t).rem_euclid(q)) as u64)
}

fn enumerate_sl2(q: u64) -> Vec<Mat2> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    let m = Mat2::new(q, [a, b, c, d]).expect("modulus >= 2");
                    if m.det() == 1 % q {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

fn random_sl_matrix<R: Rng>(
    ring: Ring,
    points: &[Point],
    factors: usize,
    rng: &mut R,
) -> Result<ElemMatrix> {
    let q = ring.modulus().expect("modular ring");
    let mut acc = ElemMatrix::identity(ring);
    for _ in 0..factors {
        let v = points[rng.gen_range(0..points.len())];
        let w = loop {
            let w = points[rng.gen_range(0..points.len())];
            if w != v {
                break w;
            }
        };
        let r = rng.gen_range(1..q);
        acc = acc.mul(&ElemMatrix::transvection(ring, v, w, r)?)?;
    }
    Ok(acc)
}

fn crt_lift_matrix(a: &ElemMatrix, b: &ElemMatrix, q1: u64, q2: u64) -> Result<ElemMatrix> {
    let ring = Ring::modular(q1 * q2)?;
    let mut keys: BTreeSet<(Point, Point)> = a.deviation().keys().copied().collect();
    keys.extend(b.deviation().keys().copied());
    let to_u64 = |m: &ElemMatrix, k: &(Point, Point), q: u64| -> u64 {
        let diag = u64::from(k.0 == k.1);
        let dev = m
            .deviation()
            .get(k)
            .map(|v| v.to_u64_digits().1.first().copied().unwrap_or(0))
            .unwrap_or(0);
        (diag + dev) % q
    };
    let mut dev = Dev::new();
    for k in keys {
        let lifted = crt_lift_entry(to_u64(a, &k, q1), to_u64(b, &k, q2), q1, q2);
        let diag = u64::from(k.0 == k.1);
        let value = BigInt::from(lifted?) - BigInt::from(diag);
        let value = ring.normalize(value);
        if value.sign() != Sign::NoSign {
            dev.insert(k, value);
        }
    }
    // The inverse lifts the same way.
    let to_u64_inv = |m: &ElemMatrix, k: &(Point, Point), q: u64| -> u64 {
        let diag = u64::from(k.0 == k.1);
        let dev = m
            .inverse()
            .deviation()
            .get(k)
            .map(|v| v.to_u64_digits().1.first().copied().unwrap_or(0))
            .unwrap_or(0);
        (diag + dev) % q
    };
    let mut inv = Dev::new();
    let mut inv_keys: BTreeSet<(Point, Point)> = a.inverse().deviation().keys().copied().collect();
    inv_keys.extend(b.inverse().deviation().keys().copied());
    for k in inv_keys {
        let lifted = crt_lift_entry(to_u64_inv(a, &k, q1), to_u64_inv(b, &k, q2), q1, q2)?;
        let diag = u64::from(k.0 == k.1);
        let value = ring.normalize(BigInt::from(lifted) - BigInt::from(diag));
        if value.sign() != Sign::NoSign {
            inv.insert(k, value);
        }
    }
    let m = ElemMatrix { ring, dev, inv };
    if !m.check_inverse()? {
        return Err(Error::Precondition(
            "CRT lift produced inconsistent inverse".into(),
        ));
    }
    Ok(m)
}

/// Verifies that reduction mod `q1` and `q2` factors `SL_V(Z/q1q2)` as a
/// direct product: by full enumeration and image counting when `V` has
/// two points and the modulus is small, and otherwise by round-tripping
/// random transvection products through the explicit CRT lift. The
/// kernel-preimage claim is tested on samples: matrices built from
/// transvections with parameters divisible by `q' * q2` reduce into the
/// congruence kernel mod `q'` on the first factor and to the identity on
/// the second, and conversely lifts of such pairs land back in the
/// kernel of the product modulus.
pub fn crt_split(
    q1: u64,
    q2: u64,
    points: &[Point],
    seed: u64,
    samples: usize,
) -> Result<CrtReport> {
    if q1 < 2 || q2 < 2 {
        return Err(Error::Precondition("moduli must be at least 2".into()));
    }
    let (g, _, _) = ext_gcd(q1 as i128, q2 as i128);
    if g != 1 {
        return Err(Error::Precondition(format!(
            "moduli {q1} and {q2} are not coprime"
        )));
    }
    if points.iter().collect::<BTreeSet<_>>().len() != points.len() || points.len() < 2 {
        return Err(Error::Precondition(
            "need at least two distinct index points".into(),
        ));
    }
    let q = q1
        .checked_mul(q2)
        .ok_or_else(|| Error::Precondition("modulus product overflows".into()))?;

    if points.len() == 2 && q <= 36 {
        // Full enumeration of all three groups and image counting.
        let left = enumerate_sl2(q);
        let f1 = enumerate_sl2(q1);
        let f2 = enumerate_sl2(q2);
        let mut seen: BTreeSet<([u64; 4], [u64; 4])> = BTreeSet::new();
        for m in &left {
            let r1 = m.e.map(|x| x % q1);
            let r2 = m.e.map(|x| x % q2);
            seen.insert((r1, r2));
        }
        let bijective = seen.len() == left.len() && left.len() == f1.len() * f2.len();
        return Ok(CrtReport {
            q1,
            q2,
            enumerated: true,
            factor_orders: Some((BigUint::from(f1.len()), BigUint::from(f2.len()))),
            product_order: Some(BigUint::from(left.len())),
            bijective,
            lift_roundtrips: 0,
            preimage_checks: 0,
        });
    }

    // Sampled verification with the explicit inverse.
    let ring = Ring::modular(q)?;
    let ring1 = Ring::modular(q1)?;
    let ring2 = Ring::modular(q2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roundtrips = 0usize;
    for _ in 0..samples {
        // reduce then lift is the identity
        let x = random_sl_matrix(ring, points, 8, &mut rng)?;
        let lifted = crt_lift_matrix(&x.reduce(ring1)?, &x.reduce(ring2)?, q1, q2)?;
        if lifted != x {
            return Err(Error::Precondition(format!(
                "CRT roundtrip failed at {}",
                x.key()
            )));
        }
        // lift of an arbitrary pair reduces back to it
        let a = random_sl_matrix(ring1, points, 8, &mut rng)?;
        let b = random_sl_matrix(ring2, points, 8, &mut rng)?;
        let y = crt_lift_matrix(&a, &b, q1, q2)?;
        if y.reduce(ring1)? != a || y.reduce(ring2)? != b {
            return Err(Error::Precondition("CRT lift does not reduce back".into()));
        }
        roundtrips += 2;
    }

    // Preimage claim for the congruence kernel, with q' the smallest
    // prime factor of q1.
    let qp = (2..=q1).find(|d| q1 % d == 0).expect("q1 >= 2 has a factor");
    let mut preimage_checks = 0usize;
    for _ in 0..samples {
        // Elements of K(q' q2) reduced mod q: parameters divisible by q' q2.
        let mut z = ElemMatrix::identity(ring);
        for _ in 0..4 {
            let v = points[rng.gen_range(0..points.len())];
            let w = loop {
                let w = points[rng.gen_range(0..points.len())];
                if w != v {
                    break w;
                }
            };
            let r = (qp * q2 * rng.gen_range(1..=(q / (qp * q2)).max(1))) % q;
            z = z.mul(&ElemMatrix::transvection(ring, v, w, r)?)?;
        }
        let z1 = z.reduce(ring1)?;
        let z2 = z.reduce(ring2)?;
        if !z2.is_identity() {
            return Err(Error::Precondition(
                "kernel sample is nontrivial on the coprime factor".into(),
            ));
        }
        if !z1.reduce(Ring::modular(qp)?)?.is_identity() {
            return Err(Error::Precondition(
                "kernel sample escapes the congruence kernel".into(),
            ));
        }
        // Conversely, lifting (z1, identity) lands in the kernel mod q' q2.
        let lifted = crt_lift_matrix(&z1, &ElemMatrix::identity(ring2), q1, q2)?;
        if !lifted.reduce(Ring::modular(qp * q2)?)?.is_identity() {
            return Err(Error::Precondition(
                "lift of a kernel pair escapes the kernel of the product modulus".into(),
            ));
        }
        preimage_checks += 2;
    }

    Ok(CrtReport {
        q1,
        q2,
        enumerated: false,
        factor_orders: None,
        product_order: None,
        bijective: true,
        lift_roundtrips: roundtrips,
        preimage_checks,
    })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn largest_prime_in(lo_times4: u64, hi_times4: u64) -> Option<u64> {
    // Primes p with lo_times4 < 4p < hi_times4 (open interval scaled by 4
    // to keep the quarter/half bounds exact in integers).
    let mut best = None;
    let hi = hi_times4 / 4 + 1;
    for p in 2..=hi {
        if 4 * p > lo_times4 && 4 * p < hi_times4 && is_prime(p) {
            best = Some(p);
        }
    }
    best
}

/// Finds a prime `p` in `[m/4, m]` and a divisor `r` of `q` with
/// `gcd(p, r) = 1` and `r >= sqrt(q)`, following the constructive proof:
/// take the largest prime in `(m/2, m)`; if its full power in `q` is at
/// most `sqrt(q)`, divide it out, otherwise fall back to a prime in
/// `(m/4, m/2)` whose power in `q` must then be below `sqrt(q)`.
pub fn bertrand_split(m: u64, q: u64) -> Result<(u64, u64)> {
    if m < 8 {
        return Err(Error::Precondition(format!("m = {m} is below 8")));
    }
    if q == 0 {
        return Err(Error::Precondition("q must be positive".into()));
    }
    let full_power = |p: u64| -> u64 {
        let mut power = 1u64;
        let mut rest = q;
        while rest % p == 0 {
            rest /= p;
            power *= p;
        }
        power
    };
    let p_big = largest_prime_in(2 * m, 4 * m).expect("Bertrand interval (m/2, m), m >= 8");
    let power = full_power(p_big);
    let (p, r) = if (power as u128) * (power as u128) <= q as u128 {
        (p_big, q / power)
    } else {
        let p_small = largest_prime_in(m, 2 * m).expect("Bertrand interval (m/4, m/2), m >= 8");
        (p_small, q / full_power(p_small))
    };
    debug_assert!(is_prime(p) && 4 * p >= m && p <= m);
    debug_assert!(q % r == 0 && r % p != 0);
    debug_assert!((r as u128) * (r as u128) >= q as u128);
    Ok((p, r))
}

/// Evaluates both chained commutator identities that generate any
/// transvection from a single one inside a normal subgroup: with six
/// distinct points `[v, w, x, y, t, u]`,
/// `E_{t,u}(r) = [E_{t,v}(r), [E_{v,w}, E_{w,u}]]` and
/// `E_{x,y}(r) = [E_{x,t}, [E_{t,u}(r), E_{u,y}]]`.
pub fn normal_gen_identity_check(r: i64, ring: Ring, points: &[Point]) -> Result<bool> {
    if points.len() != 6 {
        return Err(Error::Precondition(format!(
            "need exactly 6 points, got {}",
            points.len()
        )));
    }
    if points.iter().collect::<BTreeSet<_>>().len() != 6 {
        return Err(Error::Precondition("index points must be distinct".into()));
    }
    let [v, w, x, y, t, u] = [points[0], points[1], points[2], points[3], points[4], points[5]];
    let e = |a: Point, b: Point, s: i64| ElemMatrix::transvection(ring, a, b, s);

    let inner1 = ElemMatrix::commutator(&e(v, w, 1)?, &e(w, u, 1)?)?;
    let lhs1 = e(t, u, r)?;
    let rhs1 = ElemMatrix::commutator(&e(t, v, r)?, &inner1)?;

    let inner2 = ElemMatrix::commutator(&e(t, u, r)?, &e(u, y, 1)?)?;
    let lhs2 = e(x, y, r)?;
    let rhs2 = ElemMatrix::commutator(&e(x, t, 1)?, &inner2)?;

    Ok(lhs1 == rhs1 && lhs2 == rhs2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::LineAction;
    use crate::permissible::{build_finite_action, build_omega, PermissibleFn};
    use Point::Int;

    /// Dense matrix oracle on an explicit point list.
    #[derive(Clone, Debug, PartialEq)]
    struct Dense {
        pts: Vec<Point>,
        m: Vec<Vec<BigInt>>,
    }

    impl Dense {
        fn from(e: &ElemMatrix, pts: &[Point]) -> Dense {
            let m = pts
                .iter()
                .map(|&v| pts.iter().map(|&w| e.entry(v, w)).collect())
                .collect();
            Dense {
                pts: pts.to_vec(),
                m,
            }
        }

        fn mul(&self, other: &Dense, ring: &Ring) -> Dense {
            let k = self.pts.len();
            let mut m = vec![vec![BigInt::from(0); k]; k];
            #[allow(clippy::needless_range_loop)]
            for i in 0..k {
                for j in 0..k {
                    let mut acc = BigInt::from(0);
                    for l in 0..k {
                        acc += &self.m[i][l] * &other.m[l][j];
                    }
                    m[i][j] = ring.normalize(acc);
                }
            }
            Dense {
                pts: self.pts.clone(),
                m,
            }
        }
    }

    fn random_points(rng: &mut ChaCha8Rng, k: usize) -> Vec<Point> {
        let mut pts = BTreeSet::new();
        while pts.len() < k {
            pts.insert(Int(rng.gen_range(-20..20)));
        }
        pts.into_iter().collect()
    }

    #[test]
    fn transvection_entries_and_identity() {
        let e = ElemMatrix::transvection(Ring::Int, Int(1), Int(2), 3).unwrap();
        assert_eq!(e.entry(Int(1), Int(2)), BigInt::from(3));
        assert_eq!(e.entry(Int(1), Int(1)), BigInt::from(1));
        assert_eq!(e.entry(Int(2), Int(2)), BigInt::from(1));
        assert_eq!(e.entry(Int(2), Int(1)), BigInt::from(0));
        assert!(ElemMatrix::transvection(Ring::Int, Int(1), Int(1), 1).is_err());
        assert!(ElemMatrix::transvection(Ring::Int, Int(1), Int(2), 0)
            .unwrap()
            .is_identity());
        // Modular parameters normalize; a multiple of the modulus is zero.
        assert!(ElemMatrix::transvection(Ring::Mod(5), Int(1), Int(2), 10)
            .unwrap()
            .is_identity());
    }

    #[test]
    fn products_match_the_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for ring in [Ring::Int, Ring::Mod(9), Ring::Prime(5)] {
            for _ in 0..60 {
                let pts = random_points(&mut rng, 5);
                let rand_product = |rng: &mut ChaCha8Rng| -> ElemMatrix {
                    let mut acc = ElemMatrix::identity(ring);
                    for _ in 0..rng.gen_range(1..5) {
                        let v = pts[rng.gen_range(0..5)];
                        let w = loop {
                            let w = pts[rng.gen_range(0..5)];
                            if w != v {
                                break w;
                            }
                        };
                        let r = rng.gen_range(-4..=4i64);
                        acc = acc
                            .mul(&ElemMatrix::transvection(ring, v, w, r).unwrap())
                            .unwrap();
                    }
                    acc
                };
                let a = rand_product(&mut rng);
                let b = rand_product(&mut rng);
                let c = a.mul(&b).unwrap();
                assert_eq!(
                    Dense::from(&c, &pts),
                    Dense::from(&a, &pts).mul(&Dense::from(&b, &pts), &ring)
                );
                assert!(c.check_inverse().unwrap());
            }
        }
    }

    #[test]
    fn commutator_laws_hold() {
        let e = |v: i64, w: i64, r: i64| ElemMatrix::transvection(Ring::Int, Int(v), Int(w), r).unwrap();
        // [E_{1,2}, E_{2,3}] = E_{1,3}
        assert_eq!(
            ElemMatrix::commutator(&e(1, 2, 1), &e(2, 3, 1)).unwrap(),
            e(1, 3, 1)
        );
        // [E_{1,2}(2), E_{2,3}(3)] = E_{1,3}(6)
        assert_eq!(
            ElemMatrix::commutator(&e(1, 2, 2), &e(2, 3, 3)).unwrap(),
            e(1, 3, 6)
        );
        // Disjoint indices commute.
        assert!(ElemMatrix::commutator(&e(1, 2, 1), &e(3, 4, 1))
            .unwrap()
            .is_identity());
        // Ring mismatch is rejected.
        let modular = ElemMatrix::transvection(Ring::Mod(5), Int(1), Int(2), 1).unwrap();
        assert!(matches!(
            e(1, 2, 1).mul(&modular),
            Err(Error::RingMismatch { .. })
        ));
    }

    #[test]
    fn steinberg_laws_fuzzed_across_rings() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ring in [Ring::Int, Ring::Mod(12), Ring::Prime(7)] {
            for _ in 0..200 {
                let pts = random_points(&mut rng, 4);
                let (v, x, w, y) = (pts[0], pts[1], pts[2], pts[3]);
                let r = rng.gen_range(-5..=5i64);
                let s = rng.gen_range(-5..=5i64);
                // [E_{v,x}(r), E_{x,w}(s)] = E_{v,w}(rs) for distinct v, x, w.
                let got = ElemMatrix::commutator(
                    &ElemMatrix::transvection(ring, v, x, r).unwrap(),
                    &ElemMatrix::transvection(ring, x, w, s).unwrap(),
                )
                .unwrap();
                assert_eq!(got, ElemMatrix::transvection(ring, v, w, r * s).unwrap());
                // Disjoint pairs commute: [E_{v,x}, E_{w,y}].
                let got = ElemMatrix::commutator(
                    &ElemMatrix::transvection(ring, v, x, r).unwrap(),
                    &ElemMatrix::transvection(ring, w, y, s).unwrap(),
                )
                .unwrap();
                assert!(got.is_identity());
            }
        }
    }

    #[test]
    fn conjugation_relabels_indices() {
        let enr = ElemEnrichment::new(WordAmbient::new(LineAction), Ring::Int, "E(Z)");
        let t = FreeWord::generator(0);
        let e01 = ElemMatrix::transvection(Ring::Int, Int(0), Int(1), 1).unwrap();
        let e12 = ElemMatrix::transvection(Ring::Int, Int(1), Int(2), 1).unwrap();
        let e23 = ElemMatrix::transvection(Ring::Int, Int(2), Int(3), 1).unwrap();
        assert_eq!(enr.conj_mat(&e01, &t).unwrap(), e12);
        assert!(enr
            .conj_mat(&ElemMatrix::identity(Ring::Int), &t)
            .unwrap()
            .is_identity());
        assert_eq!(
            enr.conj_mat(&e01.mul(&e12).unwrap(), &t).unwrap(),
            e12.mul(&e23).unwrap()
        );
    }

    #[test]
    fn enrichment_group_laws() {
        let enr = ElemEnrichment::new(WordAmbient::new(LineAction), Ring::Int, "E(Z)");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rand_elem = |rng: &mut ChaCha8Rng| {
                let mut mat = ElemMatrix::identity(Ring::Int);
                for _ in 0..rng.gen_range(0..3) {
                    let v = Int(rng.gen_range(-3..=3));
                    let w = loop {
                        let w = Int(rng.gen_range(-3..=3));
                        if w != v {
                            break w;
                        }
                    };
                    mat = mat
                        .mul(&ElemMatrix::transvection(Ring::Int, v, w, rng.gen_range(-2..=2i64)).unwrap())
                        .unwrap();
                }
                ElemEnrichElem {
                    mat,
                    g: FreeWord::generator(0).pow(rng.gen_range(-2..=2)),
                }
            };
            let (x, y, z) = (rand_elem(&mut rng), rand_elem(&mut rng), rand_elem(&mut rng));
            let xy_z = enr.mul(&enr.mul(&x, &y).unwrap(), &z).unwrap();
            let x_yz = enr.mul(&x, &enr.mul(&y, &z).unwrap()).unwrap();
            assert_eq!(xy_z, x_yz);
            let xi = enr.inv(&x).unwrap();
            assert_eq!(enr.mul(&x, &xi).unwrap(), enr.identity());
            assert_eq!(enr.mul(&xi, &x).unwrap(), enr.identity());
        }
    }

    #[test]
    fn norm_examples() {
        let e12 = ElemMatrix::transvection(Ring::Int, Int(1), Int(2), 1).unwrap();
        let e21 = ElemMatrix::transvection(Ring::Int, Int(2), Int(1), 1).unwrap();
        assert_eq!(e12.norm_inf().unwrap(), BigUint::from(1u32));
        assert_eq!(
            ElemMatrix::identity(Ring::Int).norm_inf().unwrap(),
            BigUint::from(1u32)
        );
        // (E_{1,2} E_{2,1})^2 = [[5,3],[3,2]]: norm 5, four factors, 5 <= 2^3.
        let base = e12.mul(&e21).unwrap();
        let sq = base.mul(&base).unwrap();
        assert_eq!(sq.norm_inf().unwrap(), BigUint::from(5u32));
        assert_eq!(sq.entry(Int(1), Int(1)), BigInt::from(5));
        assert_eq!(sq.entry(Int(1), Int(2)), BigInt::from(3));
        assert_eq!(sq.entry(Int(2), Int(1)), BigInt::from(3));
        assert_eq!(sq.entry(Int(2), Int(2)), BigInt::from(2));
        // Norms are an integer-ring notion.
        assert!(ElemMatrix::identity(Ring::Mod(5)).norm_inf().is_err());
    }

    #[test]
    fn window_generator_products_respect_the_norm_bound() {
        let gens = window_generators(&LineAction, 6, Ring::Int).unwrap();
        // E_{j,j+1} and E_{j+1,j} style pairs around the origin.
        assert!(gens.len() > 10);
        let window: BTreeSet<Point> = (-6..=6).map(Int).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let m = rng.gen_range(1..=12usize);
            let mut acc = ElemMatrix::identity(Ring::Int);
            for _ in 0..m {
                let g = &gens[rng.gen_range(0..gens.len())];
                let g = if rng.gen_bool(0.5) { g.clone() } else { g.inverse() };
                acc = acc.mul(&g).unwrap();
            }
            assert!(acc.norm_inf().unwrap() <= BigUint::from(1u32) << (m - 1));
            assert!(acc.touched().iter().all(|p| window.contains(p)));
        }
    }

    #[test]
    fn window_check_reports_membership() {
        let window: BTreeSet<Point> = (-3..=3).map(Int).collect();
        let e12 = ElemMatrix::transvection(Ring::Int, Int(1), Int(2), 1).unwrap();
        let e21 = ElemMatrix::transvection(Ring::Int, Int(2), Int(1), 1).unwrap();
        let base = e12.mul(&e21).unwrap();
        let x = ElemEnrichElem {
            mat: base.mul(&base).unwrap(),
            g: FreeWord::generator(0).pow(2),
        };
        let report = elem_window_check(&x, 3, &window).unwrap();
        assert_eq!(report.norm, BigUint::from(5u32));
        assert!(report.in_window());
        let report = elem_window_check(&x, 2, &window).unwrap();
        assert!(!report.norm_within);
        assert!(!report.in_window());
    }

    #[test]
    fn word_synthesis_base_and_depth_one() {
        // A single generator neighbor stays a single letter.
        let tw = word_for_transvection(&LineAction, &FreeWord::generator(0), 4).unwrap();
        assert_eq!(tw.word.len(), 1);
        assert!(tw.levels.is_empty());
        // Length-2 targets synthesize a commutator of length at most 8.
        let g = FreeWord::generator(0).pow(2);
        let tw = word_for_transvection(&LineAction, &g, 4).unwrap();
        assert!(tw.word.len() <= 8);
        for rec in &tw.levels {
            assert!(rec.word_len <= 4 * rec.child_max + (1 << (rec.level + 1)));
        }
    }

    #[test]
    fn word_synthesis_for_a_distant_target() {
        let g = FreeWord::generator(0).pow(4);
        let tw = word_for_transvection(&LineAction, &g, 4).unwrap();
        // L_m <= (C/2) 4^m at m = 2.
        assert!(tw.word.len() <= 64);
        assert!(tw.measured_c > 0.0);
        for rec in &tw.levels {
            assert!(rec.word_len <= 4 * rec.child_max + (1 << (rec.level + 1)));
        }
        // The evaluation check inside word_for_transvection already
        // verified the value is E_{0,4}; double-check externally.
        let enr = ElemEnrichment::new(WordAmbient::new(LineAction), Ring::Int, "E(Z)");
        let value = tw.word.evaluate(&enr, &LineAction).unwrap();
        assert_eq!(
            value.mat,
            ElemMatrix::transvection(Ring::Int, Int(0), Int(4), 1).unwrap()
        );
        assert!(value.g.is_empty());
    }

    #[test]
    fn word_synthesis_reports_missing_splits() {
        // In the layered action the second generator fixes the base
        // point, so a word ending in its powers admits no factorization
        // with the three points distinct.
        let f = PermissibleFn::linear(10);
        let omega = build_omega(&f, 5).unwrap();
        let g = FreeWord::generator(0).mul(&FreeWord::generator(1));
        assert!(matches!(
            word_for_transvection(&omega, &g, 4),
            Err(Error::NoSplit { .. })
        ));
        // Degenerate target: the base point is fixed.
        assert!(word_for_transvection(&omega, &FreeWord::generator(1), 4).is_err());
    }

    #[test]
    fn path_words_evaluate_and_stay_short() {
        let g = SimpleGraph::path_graph(6);
        // Adjacent pair: a single letter.
        let w = path_commutator_word(&g, Int(2), Int(3)).unwrap();
        assert_eq!(w.len(), 1);
        // Distance two: one halving step, length 4.
        let w = path_commutator_word(&g, Int(0), Int(2)).unwrap();
        assert_eq!(w.len(), 4);
        // Distance five: within 4^3 = 64.
        let w = path_commutator_word(&g, Int(0), Int(5)).unwrap();
        assert!(w.len() <= 64);
        assert_eq!(
            w.evaluate(Ring::Int).unwrap(),
            ElemMatrix::transvection(Ring::Int, Int(0), Int(5), 1).unwrap()
        );
        // Errors.
        assert!(path_commutator_word(&g, Int(0), Int(0)).is_err());
        let h = SimpleGraph::new(vec![Int(0), Int(1), Int(2)], &[(Int(0), Int(1))]).unwrap();
        assert!(matches!(
            path_commutator_word(&h, Int(0), Int(2)),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn congruence_map_verifies_over_a_large_modulus() {
        // Z with n = 2 into C_7 x trivial-ish target: q = 9 > 2^3.
        let f = PermissibleFn::linear(10);
        let approx = build_finite_action(&f, 2, 5).unwrap();
        let report = build_phi_elem_for_approx(
            &approx,
            Ring::modular(9).unwrap(),
            CongruenceMode::Strict,
            60,
            CheckMode::Sampled { pairs: 4000, seed: 5 },
        )
        .unwrap();
        assert!(report.verified(), "{:?}", report.status);
        assert!(report.pool_size > 1);
        assert!(report.products_inside > 0);
    }

    #[test]
    fn congruence_map_verifies_over_the_line() {
        let report = build_phi_elem(
            &LineAction,
            2,
            &FiniteGroup::cyclic(7),
            |p| match p {
                Int(k) => Ok(Int(k.rem_euclid(7))),
                other => Err(Error::Precondition(format!("{} not an integer", other.key()))),
            },
            |w| {
                let k: i64 = w.letters().iter().map(|l| if l.inv { -1 } else { 1 }).sum();
                Ok(GroupElem::Res(k.rem_euclid(7) as u64))
            },
            Ring::modular(9).unwrap(),
            CongruenceMode::Strict,
            60,
            CheckMode::Sampled { pairs: 4000, seed: 9 },
        )
        .unwrap();
        assert!(report.verified(), "{:?}", report.status);
    }

    #[test]
    fn small_modulus_is_rejected_or_demonstrated() {
        let f = PermissibleFn::linear(10);
        let approx = build_finite_action(&f, 2, 5).unwrap();
        // Strict mode rejects q = 8 <= 2^3.
        assert!(matches!(
            build_phi_elem_for_approx(
                &approx,
                Ring::modular(8).unwrap(),
                CongruenceMode::Strict,
                40,
                CheckMode::Exhaustive,
            ),
            Err(Error::Precondition(_))
        ));
        // Demonstration mode with q = 2 exhibits E(2) = E(0) mod 2.
        let report = build_phi_elem_for_approx(
            &approx,
            Ring::modular(2).unwrap(),
            CongruenceMode::Demonstration,
            40,
            CheckMode::Exhaustive,
        )
        .unwrap();
        match &report.status {
            WitnessStatus::Failed(Counterexample::Injectivity { x, y }) => {
                assert_ne!(x, y);
            }
            other => panic!("expected an injectivity counterexample, got {other:?}"),
        }
    }

    #[test]
    fn prime_field_map_verifies_exhaustively() {
        // n = 1 over Z: window of 3 points, E_{B(1)}(F_2) = SL_3(F_2) of
        // order 168, checked on every pair.
        let report = build_phi_elem(
            &LineAction,
            1,
            &FiniteGroup::cyclic(5),
            |p| match p {
                Int(k) => Ok(Int(k.rem_euclid(5))),
                other => Err(Error::Precondition(format!("{} not an integer", other.key()))),
            },
            |w| {
                let k: i64 = w.letters().iter().map(|l| if l.inv { -1 } else { 1 }).sum();
                Ok(GroupElem::Res(k.rem_euclid(5) as u64))
            },
            Ring::prime(2).unwrap(),
            CongruenceMode::Strict,
            200,
            CheckMode::Exhaustive,
        )
        .unwrap();
        assert!(report.verified(), "{:?}", report.status);
        assert_eq!(report.pool_size, 168);
        assert!(!report.pool_truncated);
        assert_eq!(report.domain_size, 168 * 3);
    }

    #[test]
    fn crt_factorization_of_sl2_mod_12() {
        let report = crt_split(3, 4, &[Int(0), Int(1)], 1, 0).unwrap();
        assert!(report.enumerated);
        assert!(report.bijective);
        assert_eq!(report.product_order, Some(BigUint::from(1152u32)));
        assert_eq!(
            report.factor_orders,
            Some((BigUint::from(24u32), BigUint::from(48u32)))
        );
        // Cross-check against the group-order formula used elsewhere.
        assert_eq!(FiniteGroup::sl2(12).order(), BigUint::from(1152u32));
        assert_eq!(FiniteGroup::sl2(3).order(), BigUint::from(24u32));
        assert_eq!(FiniteGroup::sl2(4).order(), BigUint::from(48u32));
    }

    #[test]
    fn crt_rejects_bad_moduli() {
        assert!(crt_split(4, 6, &[Int(0), Int(1)], 1, 0).is_err());
        assert!(crt_split(5, 5, &[Int(0), Int(1)], 1, 0).is_err());
        assert!(crt_split(3, 4, &[Int(0), Int(0)], 1, 0).is_err());
    }

    #[test]
    fn crt_lift_examples() {
        // Lift of (I mod 3, E_{1,2} mod 4): the unique value mod 12 with
        // entry 0 mod 3 and 1 mod 4 is 9.
        let a = ElemMatrix::identity(Ring::modular(3).unwrap());
        let b = ElemMatrix::transvection(Ring::modular(4).unwrap(), Int(1), Int(2), 1).unwrap();
        let lifted = crt_lift_matrix(&a, &b, 3, 4).unwrap();
        assert_eq!(lifted.entry(Int(1), Int(2)), BigInt::from(9));
        assert_eq!(
            lifted.reduce(Ring::modular(3).unwrap()).unwrap(),
            a
        );
        assert_eq!(
            lifted.reduce(Ring::modular(4).unwrap()).unwrap(),
            b
        );
        assert_eq!(crt_lift_entry(2, 3, 3, 4).unwrap(), 11);
    }

    #[test]
    fn crt_sampled_roundtrips_on_three_points() {
        // 8 * 9 = 72 with q' = 2, so the congruence-kernel samples over
        // Z/72 are nontrivial (parameters in 18 Z/72).
        let pts = [Int(0), Int(1), Int(2)];
        let report = crt_split(8, 9, &pts, 42, 40).unwrap();
        assert!(!report.enumerated);
        assert!(report.bijective);
        assert_eq!(report.lift_roundtrips, 80);
        assert_eq!(report.preimage_checks, 80);
    }

    #[test]
    fn bertrand_split_examples() {
        assert_eq!(bertrand_split(8, 12).unwrap(), (7, 12));
        // m = 16, q = 49: the largest prime in (8, 16) is 13, which does
        // not divide 49, so r = 49 >= 7.
        assert_eq!(bertrand_split(16, 49).unwrap(), (13, 49));
        assert!(bertrand_split(7, 12).is_err());
        assert!(bertrand_split(8, 0).is_err());
        // When the big prime's power exceeds sqrt(q), the fallback prime
        // from (m/4, m/2) is used: m = 8, q = 7^3 = 343.
        let (p, r) = bertrand_split(8, 343).unwrap();
        assert_eq!(p, 3);
        assert_eq!(r, 343);
    }

    #[test]
    fn bertrand_postconditions_on_a_grid() {
        for m in 8..=64u64 {
            for q in [1u64, 2, 12, 36, 49, 64, 97, 343, 720, 729, 1000] {
                let (p, r) = bertrand_split(m, q).unwrap();
                assert!(is_prime(p), "m={m} q={q}");
                assert!(4 * p >= m && p <= m, "m={m} q={q} p={p}");
                assert!(q % r == 0, "m={m} q={q} r={r}");
                assert!(ext_gcd(p as i128, r as i128).0 == 1, "m={m} q={q} p={p} r={r}");
                assert!((r as u128) * (r as u128) >= q as u128, "m={m} q={q} r={r}");
            }
        }
    }

    #[test]
    fn normal_generation_identities() {
        let pts: Vec<Point> = (1..=6).map(Int).collect();
        assert!(normal_gen_identity_check(1, Ring::Int, &pts).unwrap());
        assert!(normal_gen_identity_check(3, Ring::Mod(7), &pts).unwrap());
        assert!(normal_gen_identity_check(-2, Ring::Prime(5), &pts).unwrap());
        // Degenerate point lists are rejected.
        let repeated: Vec<Point> = [1, 2, 3, 4, 5, 5].into_iter().map(Int).collect();
        assert!(normal_gen_identity_check(1, Ring::Int, &repeated).is_err());
        assert!(normal_gen_identity_check(1, Ring::Int, &pts[..5]).is_err());
    }

    #[test]
    fn serialization_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for ring in [Ring::Int, Ring::Mod(9), Ring::Prime(3)] {
            for _ in 0..20 {
                let pts = random_points(&mut rng, 4);
                let mut m = ElemMatrix::identity(ring);
                for _ in 0..4 {
                    let v = pts[rng.gen_range(0..4)];
                    let w = loop {
                        let w = pts[rng.gen_range(0..4)];
                        if w != v {
                            break w;
                        }
                    };
                    m = m
                        .mul(&ElemMatrix::transvection(ring, v, w, rng.gen_range(-3..=3i64)).unwrap())
                        .unwrap();
                }
                let data = m.to_data();
                let json = serde_json::to_string(&data).unwrap();
                let back: ElemMatrixData = serde_json::from_str(&json).unwrap();
                assert_eq!(ElemMatrix::from_data(&back).unwrap(), m);
            }
        }
        // Tampered inverse data is rejected.
        let m = ElemMatrix::transvection(Ring::Int, Int(0), Int(1), 2).unwrap();
        let mut data = m.to_data();
        data.inverse_triples[0].2 = "5".into();
        assert!(ElemMatrix::from_data(&data).is_err());
    }

    #[test]
    fn generator_sets_over_the_line() {
        let gens = elem_generators(&LineAction, Ring::Int).unwrap();
        assert_eq!(gens.ambient.len(), 2);
        // Two moved neighbors, two directions each.
        assert_eq!(gens.transvections.len(), 4);
        for (_, t) in &gens.transvections {
            assert!(t.touched().contains(&Int(0)));
            assert_eq!(t.norm_inf().unwrap(), BigUint::from(1u32));
        }
    }
}
