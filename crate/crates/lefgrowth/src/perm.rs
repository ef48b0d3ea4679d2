//! Finitely supported permutations over an opaque point universe.

use crate::error::{Error, Result};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

/// A point of a permutation domain. Plain integers serve ℤ-lines, finite
/// sets and interned Cayley vertices; `Layer(l, i)` is point `i` of layer
/// `l` in a layered action; `Pair` serves product lattices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Point {
    Int(i64),
    Layer(u32, u32),
    Pair(i32, i32),
}

impl Point {
    /// Stable textual key, used for DOT node ids and witness tables.
    pub fn key(&self) -> String {
        match self {
            Point::Int(k) => format!("{k}"),
            Point::Layer(l, i) => format!("L{l}_{i}"),
            Point::Pair(x, y) => format!("({x},{y})"),
        }
    }

    pub fn parse_key(s: &str) -> Result<Point> {
        let bad = || Error::Serde(format!("invalid point key {s:?}"));
        if let Some(rest) = s.strip_prefix('L') {
            if let Some((l, i)) = rest.split_once('_') {
                if let (Ok(l), Ok(i)) = (l.parse(), i.parse()) {
                    return Ok(Point::Layer(l, i));
                }
            }
            return Err(bad());
        }
        if let Some(rest) = s.strip_prefix('(') {
            let rest = rest.strip_suffix(')').ok_or_else(bad)?;
            let (x, y) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(Point::Pair(
                x.parse().map_err(|_| bad())?,
                y.parse().map_err(|_| bad())?,
            ));
        }
        s.parse().map(Point::Int).map_err(|_| bad())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Int(k) => s.serialize_i64(*k),
            _ => s.serialize_str(&self.key()),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(Point::Int)
                .ok_or_else(|| D::Error::custom("point out of range")),
            serde_json::Value::String(s) => {
                Point::parse_key(&s).map_err(|e| D::Error::custom(e.to_string()))
            }
            _ => Err(D::Error::custom("expected number or string point")),
        }
    }
}

/// A permutation with finite support, stored as its support map. Fixed
/// points are never stored, so equality of values is equality of
/// permutations regardless of the ambient universe.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct FinSuppPerm {
    map: BTreeMap<Point, Point>,
}

impl FinSuppPerm {
    pub fn identity() -> Self {
        FinSuppPerm { map: BTreeMap::new() }
    }

    /// Validates that `map` describes a bijection of its own key set and
    /// drops fixed points.
    pub fn from_map(map: BTreeMap<Point, Point>) -> Result<Self> {
        let mut values: Vec<Point> = map.values().copied().collect();
        values.sort();
        values.dedup();
        if values.len() != map.len() || !values.iter().all(|v| map.contains_key(v)) {
            return Err(Error::NotAPermutation(
                "support map is not a bijection of its key set".into(),
            ));
        }
        let map = map.into_iter().filter(|(k, v)| k != v).collect();
        Ok(FinSuppPerm { map })
    }

    pub fn transposition(a: Point, b: Point) -> Result<Self> {
        if a == b {
            return Err(Error::NotAPermutation("degenerate transposition".into()));
        }
        Ok(FinSuppPerm { map: BTreeMap::from([(a, b), (b, a)]) })
    }

    pub fn from_cycles(cycles: &[Vec<Point>]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for cycle in cycles {
            if cycle.len() < 2 {
                continue;
            }
            for i in 0..cycle.len() {
                let from = cycle[i];
                let to = cycle[(i + 1) % cycle.len()];
                if map.insert(from, to).is_some() {
                    return Err(Error::NotAPermutation(format!(
                        "point {from} appears in two cycles"
                    )));
                }
            }
        }
        FinSuppPerm::from_map(map)
    }

    /// Canonical cycle list: each cycle rotated to start at its least
    /// point, cycles sorted by first point.
    pub fn cycles(&self) -> Vec<Vec<Point>> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.map.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut cycle = vec![start];
            seen.insert(start);
            let mut p = self.apply(start);
            while p != start {
                cycle.push(p);
                seen.insert(p);
                p = self.apply(p);
            }
            out.push(cycle);
        }
        out
    }

    pub fn apply(&self, p: Point) -> Point {
        *self.map.get(&p).unwrap_or(&p)
    }

    /// Composition in action order: `(p)(self.compose(q)) = ((p)self)q`,
    /// i.e. apply `self` first, then `other`.
    pub fn compose(&self, other: &FinSuppPerm) -> FinSuppPerm {
        let mut map = BTreeMap::new();
        for &k in self.map.keys().chain(other.map.keys()) {
            let v = other.apply(self.apply(k));
            if v != k {
                map.insert(k, v);
            }
        }
        FinSuppPerm { map }
    }

    pub fn inverse(&self) -> FinSuppPerm {
        FinSuppPerm { map: self.map.iter().map(|(&k, &v)| (v, k)).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = Point> + '_ {
        self.map.keys().copied()
    }

    pub fn support_size(&self) -> usize {
        self.map.len()
    }

    /// Sign of the permutation: `(-1)^(support - cycles)`.
    pub fn sign(&self) -> i8 {
        let transpositions: usize =
            self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Relabels the permutation through an injection of its support. With
    /// `f = (·)g` this computes the conjugate `self^g = g^-1 · self · g`
    /// under the crate's right-action convention.
    pub fn map_points<F>(&self, mut f: F) -> Result<FinSuppPerm>
    where
        F: FnMut(Point) -> Result<Point>,
    {
        let mut map = BTreeMap::new();
        for (&k, &v) in &self.map {
            if map.insert(f(k)?, f(v)?).is_some() {
                return Err(Error::NotAPermutation(
                    "point relabeling is not injective on the support".into(),
                ));
            }
        }
        FinSuppPerm::from_map(map)
    }

    /// Conjugate by another finitely supported permutation.
    pub fn conjugate_by(&self, g: &FinSuppPerm) -> FinSuppPerm {
        self.map_points(|p| Ok(g.apply(p)))
            .expect("conjugation by a permutation is always a bijection")
    }

    /// Uniform random permutation of the given points (Fisher-Yates).
    pub fn random<R: Rng>(points: &[Point], rng: &mut R) -> FinSuppPerm {
        let mut images: Vec<Point> = points.to_vec();
        for i in (1..images.len()).rev() {
            images.swap(i, rng.gen_range(0..=i));
        }
        let map: BTreeMap<Point, Point> =
            points.iter().copied().zip(images).collect();
        FinSuppPerm::from_map(map).expect("shuffle is a bijection")
    }
}

impl fmt::Display for FinSuppPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "e");
        }
        for cycle in self.cycles() {
            write!(f, "(")?;
            for (i, p) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// `perm_compose(p, q)` is `p` then `q`; see [`FinSuppPerm::compose`].
pub fn perm_compose(p: &FinSuppPerm, q: &FinSuppPerm) -> FinSuppPerm {
    p.compose(q)
}

/// Enumerates all permutations of the given points in a deterministic
/// order (lexicographic in the image sequence).
pub fn all_perms(points: &[Point]) -> Vec<FinSuppPerm> {
    let mut images: Vec<Point> = points.to_vec();
    images.sort();
    let mut out = Vec::new();
    loop {
        let map: BTreeMap<Point, Point> =
            points.iter().copied().zip(images.iter().copied()).collect();
        out.push(FinSuppPerm::from_map(map).expect("permutation of images"));
        // next_permutation on `images`
        let Some(i) = images.windows(2).rposition(|w| w[0] < w[1]) else {
            return out;
        };
        let j = images.iter().rposition(|&p| p > images[i]).unwrap();
        images.swap(i, j);
        images[i + 1..].reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense oracle on the window 0..k: permutations as image vectors.
    #[derive(Clone, Debug, PartialEq)]
    struct Dense(Vec<usize>);

    impl Dense {
        fn compose(&self, other: &Dense) -> Dense {
            Dense(self.0.iter().map(|&i| other.0[i]).collect())
        }
        fn inverse(&self) -> Dense {
            let mut out = vec![0; self.0.len()];
            for (i, &v) in self.0.iter().enumerate() {
                out[v] = i;
            }
            Dense(out)
        }
        fn to_sparse(&self) -> FinSuppPerm {
            let map: BTreeMap<Point, Point> = self
                .0
                .iter()
                .enumerate()
                .map(|(i, &v)| (Point::Int(i as i64), Point::Int(v as i64)))
                .collect();
            FinSuppPerm::from_map(map).unwrap()
        }
    }

    fn arb_dense(k: usize) -> impl Strategy<Value = Dense> {
        Just(()).prop_perturb(move |_, mut rng| {
            let mut v: Vec<usize> = (0..k).collect();
            for i in (1..k).rev() {
                let j = usize::try_from(rng.next_u64() % (i as u64 + 1)).unwrap();
                v.swap(i, j);
            }
            Dense(v)
        })
    }

    #[test]
    fn rejects_non_bijection() {
        let map = BTreeMap::from([
            (Point::Int(0), Point::Int(1)),
            (Point::Int(2), Point::Int(1)),
        ]);
        assert!(FinSuppPerm::from_map(map).is_err());
    }

    #[test]
    fn drops_fixed_points() {
        let map = BTreeMap::from([
            (Point::Int(0), Point::Int(0)),
            (Point::Int(1), Point::Int(2)),
            (Point::Int(2), Point::Int(1)),
        ]);
        let p = FinSuppPerm::from_map(map).unwrap();
        assert_eq!(p.support_size(), 2);
    }

    #[test]
    fn cycle_roundtrip_and_sign() {
        let c = vec![vec![Point::Int(1), Point::Int(2), Point::Int(3)]];
        let p = FinSuppPerm::from_cycles(&c).unwrap();
        assert_eq!(p.cycles(), c);
        assert_eq!(p.sign(), 1);
        let t = FinSuppPerm::transposition(Point::Int(0), Point::Int(5)).unwrap();
        assert_eq!(t.sign(), -1);
        assert_eq!(t.compose(&p).sign(), -1);
    }

    #[test]
    fn compose_is_apply_then_apply() {
        // p = (0 1), q = (1 2): p then q sends 0 -> 1 -> 2.
        let p = FinSuppPerm::transposition(Point::Int(0), Point::Int(1)).unwrap();
        let q = FinSuppPerm::transposition(Point::Int(1), Point::Int(2)).unwrap();
        let pq = perm_compose(&p, &q);
        assert_eq!(pq.apply(Point::Int(0)), Point::Int(2));
        assert_eq!(pq.apply(Point::Int(2)), Point::Int(1));
    }

    #[test]
    fn conjugation_relabels_support() {
        // (0 1)^g with g = (1 2) is (0 2).
        let x = FinSuppPerm::transposition(Point::Int(0), Point::Int(1)).unwrap();
        let g = FinSuppPerm::transposition(Point::Int(1), Point::Int(2)).unwrap();
        let expect = FinSuppPerm::transposition(Point::Int(0), Point::Int(2)).unwrap();
        assert_eq!(x.conjugate_by(&g), expect);
        // matches g^-1 x g under apply-left-to-right composition
        assert_eq!(g.inverse().compose(&x).compose(&g), expect);
    }

    #[test]
    fn all_perms_count() {
        let pts: Vec<Point> = (0..4).map(Point::Int).collect();
        let perms = all_perms(&pts);
        assert_eq!(perms.len(), 24);
        let distinct: std::collections::BTreeSet<_> = perms.iter().collect();
        assert_eq!(distinct.len(), 24);
    }

    #[test]
    fn all_perms_is_complete_for_unsorted_input() {
        // Breadth-first point lists are not sorted; the enumeration must
        // not depend on the input order.
        let pts = [Point::Int(0), Point::Int(1), Point::Int(-1)];
        let perms = all_perms(&pts);
        assert_eq!(perms.len(), 6);
        let distinct: std::collections::BTreeSet<_> = perms.iter().collect();
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn point_key_roundtrip() {
        for p in [Point::Int(-3), Point::Int(7), Point::Layer(2, 13), Point::Pair(-1, 4)] {
            assert_eq!(Point::parse_key(&p.key()).unwrap(), p);
        }
    }

    proptest! {
        #[test]
        fn compose_matches_dense(a in arb_dense(6), b in arb_dense(6)) {
            let sparse = a.to_sparse().compose(&b.to_sparse());
            prop_assert_eq!(sparse, a.compose(&b).to_sparse());
        }

        #[test]
        fn inverse_matches_dense(a in arb_dense(7)) {
            prop_assert_eq!(a.to_sparse().inverse(), a.inverse().to_sparse());
            prop_assert!(a.to_sparse().compose(&a.to_sparse().inverse()).is_identity());
        }

        #[test]
        fn sign_multiplicative(a in arb_dense(6), b in arb_dense(6)) {
            let (pa, pb) = (a.to_sparse(), b.to_sparse());
            prop_assert_eq!(pa.compose(&pb).sign(), pa.sign() * pb.sign());
        }
    }
}
