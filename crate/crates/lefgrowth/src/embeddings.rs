//! Local-embedding verification, minimal-target search, and growth-bound
//! records.
//!
//! A local embedding of a finite domain `F` into a group `Q` is an
//! injective table `F -> Q` with `table(gh) = table(g) table(h)` whenever
//! `g`, `h` and `gh` all lie in `F`. The domain is abstracted as a
//! [`PartialProducts`] oracle answering product-or-outside; the target as
//! a [`TargetGroup`] with total multiplication. Verification is exhaustive
//! over pairs (sharded across workers) or sampled with a logged seed.
//!
//! Restricting a verified table to a sub-domain can only remove pair
//! constraints, so verified status is monotone under restriction.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::{FiniteGroup, GroupElem};
use crate::parallel;
use crate::perm::FinSuppPerm;
use crate::word::{free_ball, FreeWord};

/// A finite element list with a multiplication oracle that may answer
/// "outside the domain". The oracle never errors on valid pairs.
pub trait PartialProducts {
    type Elem: Clone + Eq + Ord + std::fmt::Debug;

    fn name(&self) -> String;

    /// The domain, in its canonical search order.
    fn elements(&self) -> &[Self::Elem];

    /// Product if it lies in the domain, `None` otherwise.
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Option<Self::Elem>>;

    fn elem_key(&self, x: &Self::Elem) -> String;
}

/// A group with total multiplication, the codomain of a table.
pub trait TargetGroup {
    type Elem: Clone + Eq + Ord + std::fmt::Debug;

    fn name(&self) -> String;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Self::Elem>;
    fn elem_key(&self, x: &Self::Elem) -> String;
}

impl TargetGroup for FiniteGroup {
    type Elem = GroupElem;

    fn name(&self) -> String {
        FiniteGroup::name(self)
    }

    fn mul(&self, x: &GroupElem, y: &GroupElem) -> Result<GroupElem> {
        FiniteGroup::mul(self, x, y)
    }

    fn elem_key(&self, x: &GroupElem) -> String {
        x.key()
    }
}

/// The radius-`n` ball of a free group, multiplied by free reduction.
#[derive(Clone, Debug)]
pub struct FreeBallDomain {
    rank: u8,
    radius: usize,
    words: Vec<FreeWord>,
}

impl FreeBallDomain {
    pub fn new(rank: u8, radius: usize) -> FreeBallDomain {
        FreeBallDomain {
            rank,
            radius,
            words: free_ball(rank, radius),
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

impl PartialProducts for FreeBallDomain {
    type Elem = FreeWord;

    fn name(&self) -> String {
        format!("free-ball(rank {}, radius {})", self.rank, self.radius)
    }

    fn elements(&self) -> &[FreeWord] {
        &self.words
    }

    fn mul(&self, x: &FreeWord, y: &FreeWord) -> Result<Option<FreeWord>> {
        let z = x.mul(y);
        Ok((z.len() <= self.radius).then_some(z))
    }

    fn elem_key(&self, x: &FreeWord) -> String {
        x.to_string()
    }
}

/// How the pair set of a verification run was chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckMode {
    Exhaustive,
    Sampled { pairs: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Counterexample {
    /// Two domain elements sharing an image.
    Injectivity { x: String, y: String },
    /// `table(xy) != table(x) table(y)` with all three in the domain.
    Multiplicativity {
        x: String,
        y: String,
        expected: String,
        got: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessStatus {
    Verified,
    Failed(Counterexample),
}

/// Result record of a local-embedding verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartialMapWitness {
    pub domain_name: String,
    pub target_name: String,
    pub domain_size: usize,
    pub pairs_checked: usize,
    pub products_inside: usize,
    pub mode: CheckMode,
    /// Element key to target key, in domain order.
    pub table: Vec<(String, String)>,
    pub status: WitnessStatus,
}

impl PartialMapWitness {
    pub fn verified(&self) -> bool {
        matches!(self.status, WitnessStatus::Verified)
    }
}

struct PairScan {
    checked: usize,
    inside: usize,
    violation: Option<Counterexample>,
}

/// Verify that `table` (parallel to `domain.elements()`) is a local
/// embedding: injective, and multiplicative on every pair whose product
/// stays inside. Exhaustive mode scans all ordered pairs; sampled mode
/// scans a seeded selection (injectivity stays exhaustive either way).
pub fn verify_local_embedding<D, T>(
    domain: &D,
    target: &T,
    table: &[T::Elem],
    mode: CheckMode,
) -> Result<PartialMapWitness>
where
    D: PartialProducts + Sync,
    D::Elem: Sync,
    T: TargetGroup + Sync,
    T::Elem: Send + Sync,
{
    let elems = domain.elements();
    if table.len() != elems.len() {
        return Err(Error::Precondition(format!(
            "table has {} entries for a domain of {}",
            table.len(),
            elems.len()
        )));
    }

    let render = |status: WitnessStatus, checked: usize, inside: usize| PartialMapWitness {
        domain_name: domain.name(),
        target_name: target.name(),
        domain_size: elems.len(),
        pairs_checked: checked,
        products_inside: inside,
        mode: mode.clone(),
        table: elems
            .iter()
            .zip(table)
            .map(|(x, t)| (domain.elem_key(x), target.elem_key(t)))
            .collect(),
        status,
    };

    // Injectivity, always exhaustive.
    let mut seen: BTreeMap<&T::Elem, usize> = BTreeMap::new();
    for (i, t) in table.iter().enumerate() {
        if let Some(&j) = seen.get(t) {
            return Ok(render(
                WitnessStatus::Failed(Counterexample::Injectivity {
                    x: domain.elem_key(&elems[j]),
                    y: domain.elem_key(&elems[i]),
                }),
                0,
                0,
            ));
        }
        seen.insert(t, i);
    }

    let index: BTreeMap<&D::Elem, usize> = elems.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let scan_pair = |i: usize, j: usize| -> Result<(bool, Option<Counterexample>)> {
        let z = match domain.mul(&elems[i], &elems[j])? {
            Some(z) => z,
            None => return Ok((false, None)),
        };
        let &k = index.get(&z).ok_or_else(|| {
            Error::Precondition(format!(
                "oracle returned {} outside its own domain",
                domain.elem_key(&z)
            ))
        })?;
        let got = target.mul(&table[i], &table[j])?;
        if got == table[k] {
            Ok((true, None))
        } else {
            Ok((
                true,
                Some(Counterexample::Multiplicativity {
                    x: domain.elem_key(&elems[i]),
                    y: domain.elem_key(&elems[j]),
                    expected: target.elem_key(&table[k]),
                    got: target.elem_key(&got),
                }),
            ))
        }
    };

    let (checked, inside, violation) = match &mode {
        CheckMode::Exhaustive => {
            let rows: Vec<Result<PairScan>> = parallel::map_indexed(elems.len(), |i| {
                let mut scan = PairScan {
                    checked: 0,
                    inside: 0,
                    violation: None,
                };
                for j in 0..elems.len() {
                    scan.checked += 1;
                    let (inside, violation) = scan_pair(i, j)?;
                    scan.inside += usize::from(inside);
                    if scan.violation.is_none() {
                        scan.violation = violation;
                        if scan.violation.is_some() {
                            break;
                        }
                    }
                }
                Ok(scan)
            });
            fold_scans(rows)?
        }
        CheckMode::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let sampled: Vec<(usize, usize)> = (0..*pairs)
                .map(|_| (rng.gen_range(0..elems.len()), rng.gen_range(0..elems.len())))
                .collect();
            let rows: Vec<Result<PairScan>> = parallel::map_indexed(sampled.len(), |k| {
                let (i, j) = sampled[k];
                let (inside, violation) = scan_pair(i, j)?;
                Ok(PairScan {
                    checked: 1,
                    inside: usize::from(inside),
                    violation,
                })
            });
            fold_scans(rows)?
        }
    };

    Ok(render(
        match violation {
            None => WitnessStatus::Verified,
            Some(c) => WitnessStatus::Failed(c),
        },
        checked,
        inside,
    ))
}

fn fold_scans(rows: Vec<Result<PairScan>>) -> Result<(usize, usize, Option<Counterexample>)> {
    let mut checked = 0;
    let mut inside = 0;
    let mut violation = None;
    for row in rows {
        let row = row?;
        checked += row.checked;
        inside += row.inside;
        if violation.is_none() {
            violation = row.violation;
        }
    }
    Ok((checked, inside, violation))
}

/// Report of an exhaustive action-compatibility check: for every domain
/// element `g` and window point `w` with `w.g` still in the window, the
/// target must satisfy `theta(w.g) = theta(w).pi(g)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionCheckReport {
    pub window_size: usize,
    pub domain_size: usize,
    pub pairs_checked: usize,
    pub pairs_inside: usize,
    pub status: WitnessStatus,
}

impl ActionCheckReport {
    pub fn verified(&self) -> bool {
        matches!(self.status, WitnessStatus::Verified)
    }
}

/// Exhaustive check of the action-compatibility equation. `theta` must be
/// injective on the window (precondition, checked). The source action is
/// evaluated through `source_act`, which must be total on the queried
/// points; membership in the window decides which pairs constrain.
#[allow(clippy::too_many_arguments)]
pub fn verify_action_local_embedding<P1, P2, DE, TE>(
    window: &[P1],
    domain: &[DE],
    theta: impl Fn(&P1) -> Result<P2>,
    pi: impl Fn(&DE) -> Result<TE>,
    source_act: impl Fn(&P1, &DE) -> Result<P1>,
    target_act: impl Fn(&P2, &TE) -> Result<P2>,
    domain_key: impl Fn(&DE) -> String,
    point_key: impl Fn(&P1) -> String,
) -> Result<ActionCheckReport>
where
    P1: Clone + Eq + Ord,
    P2: Clone + Eq,
{
    let mut images = Vec::with_capacity(window.len());
    {
        let mut seen = std::collections::BTreeSet::new();
        for w in window {
            let img = theta(w)?;
            images.push(img);
            if !seen.insert(point_key(w)) {
                return Err(Error::Precondition("duplicate window point".into()));
            }
        }
        for i in 0..images.len() {
            for j in (i + 1)..images.len() {
                if images[i] == images[j] {
                    return Err(Error::Precondition(format!(
                        "theta is not injective on the window: {} and {}",
                        point_key(&window[i]),
                        point_key(&window[j])
                    )));
                }
            }
        }
    }
    let index: BTreeMap<&P1, usize> = window.iter().enumerate().map(|(i, w)| (w, i)).collect();

    let mut pairs_checked = 0;
    let mut pairs_inside = 0;
    for g in domain {
        let pig = pi(g)?;
        for (wi, w) in window.iter().enumerate() {
            pairs_checked += 1;
            let moved = source_act(w, g)?;
            let Some(&mi) = index.get(&moved) else {
                continue;
            };
            pairs_inside += 1;
            let got = target_act(&images[wi], &pig)?;
            if got != images[mi] {
                return Ok(ActionCheckReport {
                    window_size: window.len(),
                    domain_size: domain.len(),
                    pairs_checked,
                    pairs_inside,
                    status: WitnessStatus::Failed(Counterexample::Multiplicativity {
                        x: point_key(w),
                        y: domain_key(g),
                        expected: point_key(&window[mi]),
                        got: "a different target point".into(),
                    }),
                });
            }
        }
    }
    Ok(ActionCheckReport {
        window_size: window.len(),
        domain_size: domain.len(),
        pairs_checked,
        pairs_inside,
        status: WitnessStatus::Verified,
    })
}

/// One row of a growth-bound table. `lower <= upper` whenever both are
/// present; provenance strings say where each side came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthBoundRecord {
    pub radius: u64,
    pub lower: Option<BigUint>,
    pub lower_provenance: String,
    pub upper: Option<BigUint>,
    pub upper_provenance: String,
    pub notes: String,
}

impl GrowthBoundRecord {
    pub fn consistent(&self) -> bool {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV rendering with the fixed column set used by the CLI.
pub fn write_bounds_csv<W: Write>(records: &[GrowthBoundRecord], out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "radius,lower_bound,lower_provenance,upper_bound,upper_provenance,notes"
    )?;
    for r in records {
        let fmt = |v: &Option<BigUint>| v.as_ref().map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.radius,
            fmt(&r.lower),
            csv_field(&r.lower_provenance),
            fmt(&r.upper),
            csv_field(&r.upper_provenance),
            csv_field(&r.notes)
        )?;
    }
    Ok(())
}

/// Base-10 logarithm of a positive big integer, for report notes.
pub fn log10_of(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 52 {
        return (x.to_f64().expect("small value fits f64")).log10();
    }
    // x = m * 2^shift with m in f64 range.
    let shift = bits - 52;
    let m = (x >> shift).to_f64().expect("reduced mantissa fits f64");
    m.log10() + (shift as f64) * 2f64.log10()
}

/// Caps for the brute-force minimal-embedding search.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub domain_cap: usize,
    pub order_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            domain_cap: 9,
            order_cap: 5040,
        }
    }
}

/// Backtracking search for the smallest catalog group admitting a local
/// embedding of the domain. Images are assigned element by element in
/// domain order, with forced assignments propagated from partial products;
/// candidate images are tried in target enumeration order, so the search
/// trace is reproducible. Lower bound: the domain must inject, so its size
/// bounds every target order.
pub fn search_min_embedding<D: PartialProducts>(
    domain: &D,
    catalog: &[FiniteGroup],
    radius: u64,
    config: &SearchConfig,
) -> Result<GrowthBoundRecord> {
    let elems = domain.elements();
    if elems.len() > config.domain_cap {
        return Err(Error::CapExceeded {
            what: format!("search domain of size {}", elems.len()),
            cap: config.domain_cap,
        });
    }
    let n = elems.len();
    let index: BTreeMap<&D::Elem, usize> = elems.iter().enumerate().map(|(i, x)| (x, i)).collect();
    // prod[i][j] = Some(k) when elems[i] * elems[j] = elems[k].
    let mut prod = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if let Some(z) = domain.mul(&elems[i], &elems[j])? {
                let &k = index.get(&z).ok_or_else(|| {
                    Error::Precondition("oracle product escaped its own domain".into())
                })?;
                prod[i][j] = Some(k);
            }
        }
    }

    let lower = BigUint::from(n);
    for q in catalog {
        let order = q.order();
        if order < lower || order > BigUint::from(config.order_cap) {
            continue;
        }
        let targets = q.elements(config.order_cap)?;
        if search_in_group(q, &targets, &prod, n)? {
            let exact = order == lower;
            return Ok(GrowthBoundRecord {
                radius,
                lower: Some(lower),
                lower_provenance: "ball size".into(),
                upper: Some(order),
                upper_provenance: format!("{} witness", q.name()),
                notes: if exact { "exact".into() } else { String::new() },
            });
        }
    }
    Ok(GrowthBoundRecord {
        radius,
        lower: Some(lower),
        lower_provenance: "ball size".into(),
        upper: None,
        upper_provenance: "no catalog group within caps".into(),
        notes: String::new(),
    })
}

fn search_in_group(
    q: &FiniteGroup,
    targets: &[GroupElem],
    prod: &[Vec<Option<usize>>],
    n: usize,
) -> Result<bool> {
    let tindex: BTreeMap<&GroupElem, usize> =
        targets.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut images: Vec<Option<usize>> = vec![None; n];
    let mut forced: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n.max(targets.len())];

    // Check constraints touching slot k; extend `forced` for products that
    // land on unassigned slots, recording undo entries.
    fn note_product(
        q: &FiniteGroup,
        targets: &[GroupElem],
        tindex: &BTreeMap<&GroupElem, usize>,
        images: &[Option<usize>],
        forced: &mut [Option<usize>],
        used: &[bool],
        undo: &mut Vec<usize>,
        i: usize,
        j: usize,
        l: usize,
    ) -> Result<bool> {
        let (Some(ti), Some(tj)) = (images[i], images[j]) else {
            return Ok(true);
        };
        let value = q.mul(&targets[ti], &targets[tj])?;
        let Some(&vi) = tindex.get(&value) else {
            // Product left the enumerated set; cannot happen for closed
            // enumerations, treated as a dead branch.
            return Ok(false);
        };
        match images[l] {
            Some(tl) => Ok(tl == vi),
            None => match forced[l] {
                Some(f) => Ok(f == vi),
                None => {
                    // A forced image colliding with a used one breaks
                    // injectivity.
                    if used[vi] {
                        return Ok(false);
                    }
                    forced[l] = Some(vi);
                    undo.push(l);
                    Ok(true)
                }
            },
        }
    }

    fn dfs(
        q: &FiniteGroup,
        targets: &[GroupElem],
        tindex: &BTreeMap<&GroupElem, usize>,
        prod: &[Vec<Option<usize>>],
        images: &mut Vec<Option<usize>>,
        forced: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        k: usize,
        n: usize,
    ) -> Result<bool> {
        if k == n {
            return Ok(true);
        }
        let candidates: Vec<usize> = match forced[k] {
            Some(f) => vec![f],
            None => (0..targets.len()).collect(),
        };
        for t in candidates {
            if used[t] {
                continue;
            }
            images[k] = Some(t);
            used[t] = true;
            let mut undo = Vec::new();
            let mut ok = true;
            'scan: for i in 0..=k {
                for j in 0..=k {
                    if i != k && j != k {
                        continue;
                    }
                    if let Some(l) = prod[i][j] {
                        if !note_product(q, targets, tindex, images, forced, used, &mut undo, i, j, l)? {
                            ok = false;
                            break 'scan;
                        }
                    }
                }
            }
            if ok && dfs(q, targets, tindex, prod, images, forced, used, k + 1, n)? {
                return Ok(true);
            }
            for l in undo {
                forced[l] = None;
            }
            images[k] = None;
            used[t] = false;
        }
        Ok(false)
    }

    dfs(q, targets, &tindex, prod, &mut images, &mut forced, &mut used, 0, n)
}

/// Minimal order of a finite group injective on the radius-`r` ball of a
/// symmetric group over its adjacent transpositions, through a full
/// quotient. For `m >= 5` the alternating group is simple, so the only
/// quotients are the full group, order two, and trivial; a ball with at
/// least three elements (any `r >= 1` gives `m` of them) rules the small
/// ones out and the answer is `m!`. For `m <= 4` all normal subgroups are
/// enumerated and the best quotient injective on the ball wins.
pub fn rf_growth_symmetric(m: usize, r: usize) -> Result<BigUint> {
    if r == 0 {
        return Err(Error::Precondition("radius must be at least 1".into()));
    }
    if m >= 5 {
        return Ok(crate::finite::factorial(m));
    }
    let group = FiniteGroup::symmetric(m as u64);
    let elems: Vec<FinSuppPerm> = group
        .elements(24)?
        .into_iter()
        .map(|e| match e {
            GroupElem::Perm(p) => p,
            _ => unreachable!("symmetric group elements are permutations"),
        })
        .collect();
    let gens: Vec<FinSuppPerm> = (0..m.saturating_sub(1))
        .map(|i| {
            FinSuppPerm::transposition(
                crate::perm::Point::Int(i as i64),
                crate::perm::Point::Int(i as i64 + 1),
            )
            .expect("distinct points")
        })
        .collect();

    // Ball of radius r by BFS.
    let mut ball = vec![FinSuppPerm::identity()];
    let mut seen: std::collections::BTreeSet<FinSuppPerm> = ball.iter().cloned().collect();
    let mut frontier = ball.clone();
    for _ in 0..r {
        let mut next = Vec::new();
        for x in &frontier {
            for g in &gens {
                let y = x.compose(g);
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        ball.extend(next.iter().cloned());
        frontier = next;
    }

    let mut best: Option<BigUint> = None;
    for nsub in normal_subgroups(&elems) {
        let injective = {
            let mut ok = true;
            'outer: for i in 0..ball.len() {
                for j in (i + 1)..ball.len() {
                    let quot = ball[i].compose(&ball[j].inverse());
                    if nsub.contains(&quot) {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            ok
        };
        if injective {
            let size = BigUint::from(elems.len()) / BigUint::from(nsub.len());
            if best.as_ref().map_or(true, |b| size < *b) {
                best = Some(size);
            }
        }
    }
    best.ok_or_else(|| Error::Precondition("no quotient is injective on the ball".into()))
}

/// All normal subgroups of a small group given by its full element list:
/// unions of conjugacy classes containing the identity that are closed
/// under multiplication.
fn normal_subgroups(elems: &[FinSuppPerm]) -> Vec<std::collections::BTreeSet<FinSuppPerm>> {
    use std::collections::BTreeSet;
    let mut classes: Vec<BTreeSet<FinSuppPerm>> = Vec::new();
    let mut assigned: BTreeSet<FinSuppPerm> = BTreeSet::new();
    for x in elems {
        if assigned.contains(x) {
            continue;
        }
        let class: BTreeSet<FinSuppPerm> = elems.iter().map(|g| x.conjugate_by(g)).collect();
        assigned.extend(class.iter().cloned());
        classes.push(class);
    }
    let id_class: usize = classes
        .iter()
        .position(|c| c.iter().any(FinSuppPerm::is_identity))
        .expect("identity has a class");

    let mut out = Vec::new();
    let k = classes.len();
    for mask in 0..(1u32 << k) {
        if mask & (1 << id_class) == 0 {
            continue;
        }
        let union: BTreeSet<FinSuppPerm> = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .flat_map(|i| classes[i].iter().cloned())
            .collect();
        if elems.len() % union.len() != 0 {
            continue;
        }
        let closed = union
            .iter()
            .all(|x| union.iter().all(|y| union.contains(&x.compose(y))));
        if closed {
            out.push(union);
        }
    }
    out
}

/// Outcome of a finite-range growth comparison. This is a witness over the
/// checked range, not a proof of the asymptotic relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOutcome {
    /// `f1(x) <= f2(C x)` held for every `x` in the shared range.
    HoldsOnRange { range: usize, c: u64 },
    /// First `x` with `f1(x) > f2(C x)`.
    FailsAt { x: usize },
}

/// Check `f1(x) <= f2(C x)` over the whole range of `f1`. The `f2` table
/// must cover `C * (len(f1) - 1)`; a shorter table is a range mismatch,
/// not a pass.
pub fn compare_growth_witness(
    f1: &[BigUint],
    f2: &[BigUint],
    c: u64,
) -> Result<CompareOutcome> {
    if c < 1 {
        return Err(Error::Precondition("comparison constant must be >= 1".into()));
    }
    if f1.is_empty() {
        return Err(Error::Precondition("empty table".into()));
    }
    let needed = (f1.len() - 1) as u64 * c;
    if (f2.len() as u64) <= needed {
        return Err(Error::RangeMismatch(format!(
            "f2 table of length {} cannot evaluate C*x up to {}",
            f2.len(),
            needed
        )));
    }
    for (x, v) in f1.iter().enumerate() {
        if *v > f2[x * c as usize] {
            return Ok(CompareOutcome::FailsAt { x });
        }
    }
    Ok(CompareOutcome::HoldsOnRange {
        range: f1.len() - 1,
        c,
    })
}
