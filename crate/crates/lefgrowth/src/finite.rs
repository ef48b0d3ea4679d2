//! Concrete finite groups used as local-embedding targets.
//!
//! A [`FiniteGroup`] bundles an element universe with a total multiplication
//! oracle. Kinds: cyclic, symmetric on an explicit point list, a
//! stabilizer-chain permutation group, `SL2(Z/N)`, and direct products.
//! Elements are self-describing ([`GroupElem`]) and serialize to compact
//! string keys for witness files.
//!
//! Groups with a natural point action (cyclic on residues, permutation
//! groups on their domain, products through the first factor) also expose
//! `act`, which is what lets them serve as ambient groups for enrichments.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::perm::{all_perms, FinSuppPerm, Point};
use crate::permgroup::PermGroup;
use crate::word::FreeWord;

/// 2x2 matrix over `Z/N`, row-major `[a, b, c, d]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Mat2 {
    pub modulus: u64,
    pub e: [u64; 4],
}

impl Mat2 {
    pub fn new(modulus: u64, e: [u64; 4]) -> Result<Mat2> {
        if modulus < 2 {
            return Err(Error::Precondition("matrix modulus must be at least 2".into()));
        }
        Ok(Mat2 {
            modulus,
            e: e.map(|x| x % modulus),
        })
    }

    pub fn identity(modulus: u64) -> Mat2 {
        Mat2 {
            modulus,
            e: [1 % modulus, 0, 0, 1 % modulus],
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2::identity(self.modulus)
    }

    pub fn mul(&self, other: &Mat2) -> Result<Mat2> {
        if self.modulus != other.modulus {
            return Err(Error::RingMismatch {
                left: format!("Z/{}", self.modulus),
                right: format!("Z/{}", other.modulus),
            });
        }
        let n = self.modulus;
        let [a, b, c, d] = self.e;
        let [e, f, g, h] = other.e;
        Ok(Mat2 {
            modulus: n,
            e: [
                (a * e + b * g) % n,
                (a * f + b * h) % n,
                (c * e + d * g) % n,
                (c * f + d * h) % n,
            ],
        })
    }

    pub fn det(&self) -> u64 {
        let n = self.modulus;
        let [a, b, c, d] = self.e;
        // a*d - b*c, kept nonnegative by adding a multiple of n^2.
        ((a * d + n * n) - (b * c) % (n * n)) % n
    }

    /// Inverse, valid for determinant-one matrices.
    pub fn inverse(&self) -> Result<Mat2> {
        if self.det() != 1 % self.modulus {
            return Err(Error::Precondition(format!(
                "matrix determinant {} != 1 mod {}",
                self.det(),
                self.modulus
            )));
        }
        let n = self.modulus;
        let [a, b, c, d] = self.e;
        Ok(Mat2 {
            modulus: n,
            e: [d, (n - b) % n, (n - c) % n, a],
        })
    }

    /// Image of the first free generator: upper unitriangular with entry 2.
    pub fn sanov_a(modulus: u64) -> Mat2 {
        Mat2 {
            modulus,
            e: [1 % modulus, 2 % modulus, 0, 1 % modulus],
        }
    }

    /// Image of the second free generator: lower unitriangular with entry 2.
    pub fn sanov_b(modulus: u64) -> Mat2 {
        Mat2 {
            modulus,
            e: [1 % modulus, 0, 2 % modulus, 1 % modulus],
        }
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{};{},{}]@{}",
            self.e[0], self.e[1], self.e[2], self.e[3], self.modulus
        )
    }
}

/// Image of a free word on two generators under the unitriangular pair.
pub fn sanov_image(w: &FreeWord, modulus: u64) -> Result<Mat2> {
    let mut m = Mat2::identity(modulus);
    for l in w.letters() {
        let g = match l.gen {
            0 => Mat2::sanov_a(modulus),
            1 => Mat2::sanov_b(modulus),
            other => return Err(Error::UnknownGenerator(other as usize)),
        };
        let g = if l.inv { g.inverse()? } else { g };
        m = m.mul(&g)?;
    }
    Ok(m)
}

/// Smallest modulus `N <= limit` whose unitriangular images separate the
/// rank-2 ball of radius `n`.
pub fn sl2_min_modulus(n: usize, limit: u64) -> Result<u64> {
    let ball = crate::word::free_ball(2, n);
    for modulus in 2..=limit {
        let mut seen = BTreeSet::new();
        let mut injective = true;
        for w in &ball {
            if !seen.insert(sanov_image(w, modulus)?) {
                injective = false;
                break;
            }
        }
        if injective {
            return Ok(modulus);
        }
    }
    Err(Error::CapExceeded {
        what: format!("modulus search for separating ball of radius {n}"),
        cap: limit as usize,
    })
}

/// Element of a [`FiniteGroup`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GroupElem {
    Res(u64),
    Perm(FinSuppPerm),
    Mat(Mat2),
    Pair(Box<GroupElem>, Box<GroupElem>),
}

impl GroupElem {
    /// Compact string key, unique within a group; see `FiniteGroup::parse_key`.
    pub fn key(&self) -> String {
        match self {
            GroupElem::Res(r) => format!("r{r}"),
            GroupElem::Perm(p) => {
                if p.is_identity() {
                    "e".into()
                } else {
                    p.cycles()
                        .iter()
                        .map(|c| {
                            let inner =
                                c.iter().map(|q| q.key()).collect::<Vec<_>>().join(" ");
                            format!("({inner})")
                        })
                        .collect::<String>()
                }
            }
            GroupElem::Mat(m) => m.to_string(),
            GroupElem::Pair(x, y) => format!("<{}|{}>", x.key(), y.key()),
        }
    }
}

/// A finite group with total multiplication, inversion, and enumeration.
#[derive(Clone, Debug)]
pub enum FiniteGroup {
    Cyclic(u64),
    Symmetric(Vec<Point>),
    Perm(PermGroup),
    Sl2(u64),
    Product(Box<FiniteGroup>, Box<FiniteGroup>),
}

impl FiniteGroup {
    pub fn cyclic(m: u64) -> FiniteGroup {
        FiniteGroup::Cyclic(m)
    }

    /// Symmetric group on the integer points `0..m`.
    pub fn symmetric(m: u64) -> FiniteGroup {
        FiniteGroup::Symmetric((0..m as i64).map(Point::Int).collect())
    }

    pub fn symmetric_on(points: Vec<Point>) -> FiniteGroup {
        FiniteGroup::Symmetric(points)
    }

    pub fn sl2(modulus: u64) -> FiniteGroup {
        FiniteGroup::Sl2(modulus)
    }

    pub fn product(a: FiniteGroup, b: FiniteGroup) -> FiniteGroup {
        FiniteGroup::Product(Box::new(a), Box::new(b))
    }

    pub fn name(&self) -> String {
        match self {
            FiniteGroup::Cyclic(m) => format!("C{m}"),
            FiniteGroup::Symmetric(pts) => format!("Sym({})", pts.len()),
            FiniteGroup::Perm(pg) => format!("PermGroup(order {})", pg.order()),
            FiniteGroup::Sl2(n) => format!("SL2(Z/{n})"),
            FiniteGroup::Product(a, b) => format!("{}x{}", a.name(), b.name()),
        }
    }

    pub fn identity(&self) -> GroupElem {
        match self {
            FiniteGroup::Cyclic(_) => GroupElem::Res(0),
            FiniteGroup::Symmetric(_) | FiniteGroup::Perm(_) => {
                GroupElem::Perm(FinSuppPerm::identity())
            }
            FiniteGroup::Sl2(n) => GroupElem::Mat(Mat2::identity(*n)),
            FiniteGroup::Product(a, b) => {
                GroupElem::Pair(Box::new(a.identity()), Box::new(b.identity()))
            }
        }
    }

    pub fn mul(&self, x: &GroupElem, y: &GroupElem) -> Result<GroupElem> {
        match (self, x, y) {
            (FiniteGroup::Cyclic(m), GroupElem::Res(a), GroupElem::Res(b)) => {
                Ok(GroupElem::Res((a + b) % m))
            }
            (FiniteGroup::Symmetric(_) | FiniteGroup::Perm(_), GroupElem::Perm(p), GroupElem::Perm(q)) => {
                Ok(GroupElem::Perm(p.compose(q)))
            }
            (FiniteGroup::Sl2(_), GroupElem::Mat(a), GroupElem::Mat(b)) => {
                Ok(GroupElem::Mat(a.mul(b)?))
            }
            (FiniteGroup::Product(ga, gb), GroupElem::Pair(x1, x2), GroupElem::Pair(y1, y2)) => {
                Ok(GroupElem::Pair(
                    Box::new(ga.mul(x1, y1)?),
                    Box::new(gb.mul(x2, y2)?),
                ))
            }
            _ => Err(Error::Precondition(format!(
                "element shape does not match group {}",
                self.name()
            ))),
        }
    }

    pub fn inv(&self, x: &GroupElem) -> Result<GroupElem> {
        match (self, x) {
            (FiniteGroup::Cyclic(m), GroupElem::Res(a)) => Ok(GroupElem::Res((m - a % m) % m)),
            (FiniteGroup::Symmetric(_) | FiniteGroup::Perm(_), GroupElem::Perm(p)) => {
                Ok(GroupElem::Perm(p.inverse()))
            }
            (FiniteGroup::Sl2(_), GroupElem::Mat(m)) => Ok(GroupElem::Mat(m.inverse()?)),
            (FiniteGroup::Product(ga, gb), GroupElem::Pair(a, b)) => Ok(GroupElem::Pair(
                Box::new(ga.inv(a)?),
                Box::new(gb.inv(b)?),
            )),
            _ => Err(Error::Precondition(format!(
                "element shape does not match group {}",
                self.name()
            ))),
        }
    }

    /// Structural membership: shapes, ranges, determinants, sifting.
    pub fn contains(&self, x: &GroupElem) -> bool {
        match (self, x) {
            (FiniteGroup::Cyclic(m), GroupElem::Res(a)) => a < m,
            (FiniteGroup::Symmetric(pts), GroupElem::Perm(p)) => {
                p.support().all(|q| pts.contains(&q))
            }
            (FiniteGroup::Perm(pg), GroupElem::Perm(p)) => pg.contains(p),
            (FiniteGroup::Sl2(n), GroupElem::Mat(m)) => {
                m.modulus == *n && m.det() == 1 % n
            }
            (FiniteGroup::Product(ga, gb), GroupElem::Pair(a, b)) => {
                ga.contains(a) && gb.contains(b)
            }
            _ => false,
        }
    }

    pub fn order(&self) -> BigUint {
        match self {
            FiniteGroup::Cyclic(m) => BigUint::from(*m),
            FiniteGroup::Symmetric(pts) => factorial(pts.len()),
            FiniteGroup::Perm(pg) => pg.order(),
            FiniteGroup::Sl2(n) => sl2_order(*n),
            FiniteGroup::Product(a, b) => a.order() * b.order(),
        }
    }

    /// All elements in a deterministic order; errors when the order
    /// exceeds `cap`.
    pub fn elements(&self, cap: usize) -> Result<Vec<GroupElem>> {
        if self.order() > BigUint::from(cap) {
            return Err(Error::CapExceeded {
                what: format!("element enumeration of {}", self.name()),
                cap,
            });
        }
        Ok(match self {
            FiniteGroup::Cyclic(m) => (0..*m).map(GroupElem::Res).collect(),
            FiniteGroup::Symmetric(pts) => {
                all_perms(pts).into_iter().map(GroupElem::Perm).collect()
            }
            FiniteGroup::Perm(pg) => pg
                .elements(cap)?
                .into_iter()
                .map(GroupElem::Perm)
                .collect(),
            FiniteGroup::Sl2(n) => {
                let n = *n;
                let mut out = Vec::new();
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            for d in 0..n {
                                let m = Mat2 { modulus: n, e: [a, b, c, d] };
                                if m.det() == 1 % n {
                                    out.push(GroupElem::Mat(m));
                                }
                            }
                        }
                    }
                }
                out
            }
            FiniteGroup::Product(ga, gb) => {
                let xs = ga.elements(cap)?;
                let ys = gb.elements(cap)?;
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for x in &xs {
                    for y in &ys {
                        out.push(GroupElem::Pair(Box::new(x.clone()), Box::new(y.clone())));
                    }
                }
                out
            }
        })
    }

    /// Right action on points, where the group has one: cyclic groups
    /// rotate integer residues, permutation kinds apply the permutation,
    /// and products act through their first factor.
    pub fn act(&self, p: Point, x: &GroupElem) -> Result<Point> {
        match (self, x) {
            (FiniteGroup::Cyclic(m), GroupElem::Res(r)) => match p {
                Point::Int(v) if 0 <= v && (v as u64) < *m => {
                    Ok(Point::Int(((v as u64 + r) % m) as i64))
                }
                _ => Err(Error::Precondition(format!(
                    "point {} is not a residue mod {m}",
                    p.key()
                ))),
            },
            (FiniteGroup::Symmetric(_) | FiniteGroup::Perm(_), GroupElem::Perm(q)) => {
                Ok(q.apply(p))
            }
            (FiniteGroup::Product(ga, _), GroupElem::Pair(a, _)) => ga.act(p, a),
            _ => Err(Error::Precondition(format!(
                "group {} has no point action",
                self.name()
            ))),
        }
    }

    /// Parse an element key produced by [`GroupElem::key`], shaped by this
    /// group.
    pub fn parse_key(&self, s: &str) -> Result<GroupElem> {
        let bad = |msg: &str| Error::Serde(format!("bad element key {s:?}: {msg}"));
        match self {
            FiniteGroup::Cyclic(_) => {
                let r = s
                    .strip_prefix('r')
                    .and_then(|t| t.parse::<u64>().ok())
                    .ok_or_else(|| bad("expected r<residue>"))?;
                Ok(GroupElem::Res(r))
            }
            FiniteGroup::Symmetric(_) | FiniteGroup::Perm(_) => {
                Ok(GroupElem::Perm(parse_cycles(s).map_err(|m| bad(&m))?))
            }
            FiniteGroup::Sl2(_) => {
                let (body, modulus) = s
                    .strip_prefix('[')
                    .and_then(|t| t.split_once("]@"))
                    .ok_or_else(|| bad("expected [a,b;c,d]@N"))?;
                let modulus: u64 = modulus.parse().map_err(|_| bad("bad modulus"))?;
                let mut entries = Vec::new();
                for row in body.split(';') {
                    for v in row.split(',') {
                        entries.push(v.parse::<u64>().map_err(|_| bad("bad entry"))?);
                    }
                }
                if entries.len() != 4 {
                    return Err(bad("expected 4 entries"));
                }
                Ok(GroupElem::Mat(Mat2::new(
                    modulus,
                    [entries[0], entries[1], entries[2], entries[3]],
                )?))
            }
            FiniteGroup::Product(ga, gb) => {
                let inner = s
                    .strip_prefix('<')
                    .and_then(|t| t.strip_suffix('>'))
                    .ok_or_else(|| bad("expected <left|right>"))?;
                // Split at the top-level bar (keys may nest products).
                let mut depth = 0usize;
                let mut split = None;
                for (i, c) in inner.char_indices() {
                    match c {
                        '<' => depth += 1,
                        '>' => depth -= 1,
                        '|' if depth == 0 => {
                            split = Some(i);
                            break;
                        }
                        _ => {}
                    }
                }
                let i = split.ok_or_else(|| bad("missing separator"))?;
                Ok(GroupElem::Pair(
                    Box::new(ga.parse_key(&inner[..i])?),
                    Box::new(gb.parse_key(&inner[i + 1..])?),
                ))
            }
        }
    }
}

fn parse_cycles(s: &str) -> std::result::Result<FinSuppPerm, String> {
    if s == "e" {
        return Ok(FinSuppPerm::identity());
    }
    let mut cycles = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| "expected '('".to_string())?;
        let (cycle, tail) = body
            .split_once(')')
            .ok_or_else(|| "unbalanced ')'".to_string())?;
        let pts = cycle
            .split_whitespace()
            .map(Point::parse_key)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        cycles.push(pts);
        rest = tail;
    }
    FinSuppPerm::from_cycles(&cycles).map_err(|e| e.to_string())
}

pub fn factorial(n: usize) -> BigUint {
    let mut out = BigUint::one();
    for k in 2..=n {
        out *= BigUint::from(k);
    }
    out
}

/// `|SL2(Z/N)| = N^3 * prod over primes p | N of (1 - 1/p^2)`, exactly.
pub fn sl2_order(n: u64) -> BigUint {
    assert!(n >= 2, "modulus must be at least 2");
    let mut order = BigUint::from(n) * n * n;
    let mut rest = n;
    let mut p = 2;
    while p * p <= rest {
        if rest % p == 0 {
            while rest % p == 0 {
                rest /= p;
            }
            order = order / (p * p) * (p * p - 1);
        }
        p += 1;
    }
    if rest > 1 {
        order = order / (rest * rest) * (rest * rest - 1);
    }
    order
}

/// Catalog of candidate embedding targets, sorted by order with a
/// deterministic tie-break: cyclic groups, products of two cyclics,
/// symmetric groups, and small `SL2(Z/N)`.
pub fn default_catalog(max_order: u64) -> Vec<FiniteGroup> {
    let mut items: Vec<(BigUint, u8, String, FiniteGroup)> = Vec::new();
    for m in 1..=max_order {
        items.push((
            BigUint::from(m),
            0,
            format!("{m:08}"),
            FiniteGroup::cyclic(m),
        ));
    }
    for i in 2..=max_order {
        for j in i..=max_order {
            if i * j > max_order {
                break;
            }
            let g = FiniteGroup::product(FiniteGroup::cyclic(i), FiniteGroup::cyclic(j));
            items.push((BigUint::from(i * j), 1, format!("{i:08}x{j:08}"), g));
        }
    }
    for m in 3..=10u64 {
        let g = FiniteGroup::symmetric(m);
        let ord = g.order();
        if ord <= BigUint::from(max_order) {
            items.push((ord, 2, format!("{m:08}"), g));
        }
    }
    for n in 2..=16u64 {
        let ord = sl2_order(n);
        if ord <= BigUint::from(max_order) {
            items.push((ord, 3, format!("{n:08}"), FiniteGroup::sl2(n)));
        }
    }
    items.sort_by(|a, b| (&a.0, a.1, &a.2).cmp(&(&b.0, b.1, &b.2)));
    items.into_iter().map(|(_, _, _, g)| g).collect()
}
