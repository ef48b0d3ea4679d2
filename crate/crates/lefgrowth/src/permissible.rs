//! Growth-table validation, the layered two-generator action realizing a
//! table, and its finite approximations.
//!
//! A table `f(0), f(1), ...` is permissible when `f(0) = 1`, the values
//! strictly increase, and consecutive difference ratios stay within a
//! factor of two, i.e. for every interior index the next difference is
//! between half and twice the previous one. For such a table the layered
//! action below has `|B(r)| = f(r)` exactly: the point set splits into
//! layers `L_0, L_1, ...` with `|L_r| = f(r) - f(r-1)` and each generator
//! matches consecutive layers in blocks, so breadth-first spheres are
//! exactly the layers.
//!
//! The difference-ratio clause only constrains indices from 1 on, so a
//! table may pass validation and still not be buildable: the first block
//! pairs `L_0` (a single point) with `L_1`, and a matching needs
//! `|L_1| <= 2 |L_0|`. Tables with `f(1) > 3` therefore fail at build
//! time with a structured error rather than at validation.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::action::{Action, FinitePermAction};
use crate::embeddings::{
    verify_action_local_embedding, verify_local_embedding, ActionCheckReport, CheckMode,
    FreeBallDomain, PartialMapWitness, PartialProducts,
};
use crate::error::{Error, Result};
use crate::finite::{sanov_image, sl2_min_modulus, FiniteGroup, GroupElem, Mat2};
use crate::perm::{FinSuppPerm, Point};
use crate::permgroup::PermGroup;
use crate::word::FreeWord;

/// A validation failure, locating the clause and index that broke.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PermissibleViolation {
    /// `f(0)` must be exactly 1.
    FirstValue { got: u64 },
    /// `f(n) <= f(n-1)`.
    NotIncreasing { n: usize },
    /// Difference ratio out of `[1/2, 2]` at index `n`: the step from
    /// `f(n)` to `f(n+1)` against the step from `f(n-1)` to `f(n)`.
    GrowthRatio {
        n: usize,
        prev_diff: u64,
        next_diff: u64,
    },
}

impl std::fmt::Display for PermissibleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PermissibleViolation::FirstValue { got } => {
                write!(f, "f(0) must be 1, got {got}")
            }
            PermissibleViolation::NotIncreasing { n } => {
                write!(f, "not strictly increasing at n={n}")
            }
            PermissibleViolation::GrowthRatio {
                n,
                prev_diff,
                next_diff,
            } => write!(
                f,
                "difference ratio out of range at n={n}: {prev_diff} then {next_diff}"
            ),
        }
    }
}

/// All violations of the permissibility clauses, in index order. Empty
/// means the table is permissible.
pub fn check_permissible(table: &[u64]) -> Vec<PermissibleViolation> {
    let mut out = Vec::new();
    if table.is_empty() || table[0] != 1 {
        out.push(PermissibleViolation::FirstValue {
            got: table.first().copied().unwrap_or(0),
        });
    }
    for n in 1..table.len() {
        if table[n] <= table[n - 1] {
            out.push(PermissibleViolation::NotIncreasing { n });
        }
    }
    if out.iter().any(|v| matches!(v, PermissibleViolation::NotIncreasing { .. })) {
        // Difference checks are meaningless once monotonicity broke.
        return out;
    }
    for n in 1..table.len().saturating_sub(1) {
        let prev = table[n] - table[n - 1];
        let next = table[n + 1] - table[n];
        if 2 * next < prev || next > 2 * prev {
            out.push(PermissibleViolation::GrowthRatio {
                n,
                prev_diff: prev,
                next_diff: next,
            });
        }
    }
    out
}

/// A validated growth table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissibleFn {
    table: Vec<u64>,
}

impl PermissibleFn {
    pub fn new(table: Vec<u64>) -> Result<PermissibleFn> {
        let violations = check_permissible(&table);
        if let Some(first) = violations.first() {
            return Err(Error::Precondition(format!(
                "table is not permissible: {first}"
            )));
        }
        Ok(PermissibleFn { table })
    }

    pub fn values(&self) -> &[u64] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// `f(n) = n + 1`, the line.
    pub fn linear(len: usize) -> PermissibleFn {
        PermissibleFn::new((0..len as u64).map(|n| n + 1).collect()).expect("valid by inspection")
    }

    /// `f(n) = 2^n`. Lengths beyond 64 overflow and error.
    pub fn pow2(len: usize) -> Result<PermissibleFn> {
        let mut table = Vec::with_capacity(len);
        for n in 0..len {
            let v = 1u64
                .checked_shl(n as u32)
                .ok_or_else(|| Error::Precondition("2^n exceeds u64".into()))?;
            table.push(v);
        }
        PermissibleFn::new(table)
    }

    /// `f(0) = 1`, `f(n) = 2n + 1`.
    pub fn odd(len: usize) -> PermissibleFn {
        let mut table = vec![1u64];
        table.extend((1..len as u64).map(|n| 2 * n + 1));
        PermissibleFn::new(table).expect("valid by inspection")
    }
}

/// Raw table for a named builtin family. `poly:alpha` rounds
/// `n^alpha / ln n` pointwise (with `f(0) = 1`, `f(1) = 2` by convention)
/// and performs no smoothing, so its small-index differences usually break
/// validation; callers are expected to run `check_permissible` and report.
pub fn builtin_table(name: &str, len: usize) -> Result<Vec<u64>> {
    if len == 0 {
        return Err(Error::Precondition("table length must be positive".into()));
    }
    if name == "linear" {
        return Ok((0..len as u64).map(|n| n + 1).collect());
    }
    if name == "pow2" {
        return Ok(PermissibleFn::pow2(len)?.values().to_vec());
    }
    if let Some(alpha) = name.strip_prefix("poly:") {
        let alpha: f64 = alpha
            .parse()
            .map_err(|_| Error::Precondition(format!("bad exponent in builtin '{name}'")))?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Precondition("exponent must be positive".into()));
        }
        let mut table = vec![1u64];
        if len > 1 {
            table.push(2);
        }
        for n in 2..len {
            let x = (n as f64).powf(alpha) / (n as f64).ln();
            if !(x.is_finite() && x < u64::MAX as f64) {
                return Err(Error::Precondition("rounded value exceeds u64".into()));
            }
            table.push(x.round() as u64);
        }
        return Ok(table);
    }
    Err(Error::Precondition(format!("unknown builtin family '{name}'")))
}

/// The layered action on `Layer(n, i)` points. Generator `a` matches the
/// layer pairs `(L_0, L_1), (L_2, L_3), ...`; generator `b` fixes the base
/// point and matches `(L_1, L_2), (L_3, L_4), ...`. Within a pair the
/// larger layer `L` (ties to the lower layer) splits into `u` adjacent
/// couples, each forming a 3-cycle with one point of the smaller layer,
/// and the remaining `v = 2|L'| - |L|` points transpose pairwise.
///
/// The universe is truncated at `depth`: the generator whose next block
/// would need layer `depth + 1` is undefined on the top layer, and
/// applying it there reports a boundary escape. Ball queries up to the
/// full depth are exact.
#[derive(Clone, Debug)]
pub struct LayeredAction {
    table: Vec<u64>,
    depth: usize,
    layers: Vec<Vec<Point>>,
    a: FinSuppPerm,
    b: FinSuppPerm,
    a_inv: FinSuppPerm,
    b_inv: FinSuppPerm,
    cut_gen: usize,
}

fn block_cycles(lo: &[Point], hi: &[Point]) -> Result<Vec<Vec<Point>>> {
    let (l, lp) = if lo.len() >= hi.len() { (lo, hi) } else { (hi, lo) };
    let u = l.len() - lp.len();
    let v = 2 * lp.len() as i64 - l.len() as i64;
    if v < 0 {
        return Err(Error::Precondition(format!(
            "layer block with sizes ({}, {}) has u or v negative (v = {}); \
             no matching exists for this pair",
            lo.len(),
            hi.len(),
            v
        )));
    }
    let v = v as usize;
    let mut cycles = Vec::with_capacity(u + v);
    for i in 0..u {
        cycles.push(vec![l[2 * i], l[2 * i + 1], lp[i]]);
    }
    for j in 0..v {
        cycles.push(vec![l[2 * u + j], lp[u + j]]);
    }
    Ok(cycles)
}

/// Build the layered action for `f` with layers `L_0 ..= L_depth`. The
/// table must cover indices `0 ..= depth`.
pub fn build_omega(f: &PermissibleFn, depth: usize) -> Result<LayeredAction> {
    let table = f.values();
    if table.len() <= depth {
        return Err(Error::Precondition(format!(
            "table covers indices up to {}, need {}",
            table.len() - 1,
            depth
        )));
    }
    let mut layers: Vec<Vec<Point>> = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let size = if n == 0 { 1 } else { table[n] - table[n - 1] };
        layers.push(
            (0..size)
                .map(|i| Point::Layer(n as u32, i as u32))
                .collect(),
        );
    }

    let mut a_cycles = Vec::new();
    let mut m = 0;
    while 2 * m + 1 <= depth {
        a_cycles.extend(block_cycles(&layers[2 * m], &layers[2 * m + 1])?);
        m += 1;
    }
    let mut b_cycles = Vec::new();
    let mut m = 1;
    while 2 * m <= depth {
        b_cycles.extend(block_cycles(&layers[2 * m - 1], &layers[2 * m])?);
        m += 1;
    }
    let a = FinSuppPerm::from_cycles(&a_cycles)?;
    let b = FinSuppPerm::from_cycles(&b_cycles)?;
    let a_inv = a.inverse();
    let b_inv = b.inverse();
    Ok(LayeredAction {
        table: table[..=depth].to_vec(),
        depth,
        layers,
        a,
        b,
        a_inv,
        b_inv,
        cut_gen: depth % 2,
    })
}

impl LayeredAction {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[u64] {
        &self.table
    }

    pub fn layer(&self, n: usize) -> &[Point] {
        &self.layers[n]
    }

    /// All points, layer by layer.
    pub fn points(&self) -> Vec<Point> {
        self.layers.iter().flatten().copied().collect()
    }

    /// Points of layers `0 ..= r`.
    pub fn ball_points(&self, r: usize) -> Vec<Point> {
        self.layers[..=r].iter().flatten().copied().collect()
    }

    pub fn gen_a(&self) -> &FinSuppPerm {
        &self.a
    }

    pub fn gen_b(&self) -> &FinSuppPerm {
        &self.b
    }

    /// Index of the generator undefined on the top layer.
    pub fn cut_gen(&self) -> usize {
        self.cut_gen
    }

    fn validate(&self, p: Point) -> Result<u32> {
        if let Point::Layer(l, i) = p {
            if (l as usize) <= self.depth && (i as usize) < self.layers[l as usize].len() {
                return Ok(l);
            }
        }
        Err(Error::Precondition(format!(
            "{} is not a point of this universe",
            p.key()
        )))
    }
}

impl Action for LayeredAction {
    fn gen_count(&self) -> usize {
        2
    }

    fn gen_name(&self, i: usize) -> String {
        match i {
            0 => "a".into(),
            _ => "b".into(),
        }
    }

    fn base_point(&self) -> Point {
        Point::Layer(0, 0)
    }

    fn apply_gen(&self, p: Point, i: usize, inv: bool) -> Result<Point> {
        if i > 1 {
            return Err(Error::UnknownGenerator(i));
        }
        let layer = self.validate(p)?;
        if layer as usize == self.depth && i == self.cut_gen {
            return Err(Error::BoundaryEscape {
                point: p,
                gen: self.gen_name(i),
            });
        }
        let perm = match (i, inv) {
            (0, false) => &self.a,
            (0, true) => &self.a_inv,
            (1, false) => &self.b,
            (1, true) => &self.b_inv,
            _ => unreachable!(),
        };
        Ok(perm.apply(p))
    }
}

/// A finite action approximation at level `n >= 2`: the ball `X = B(2n)`
/// of the layered action, with `alpha` agreeing with `a` on `B(2n - 1)`
/// and fixing the top layer, `beta` agreeing with `b` on all of `X`, the
/// permutation group they generate, and a matrix factor over the smallest
/// modulus whose Sanov images separate the free ball of radius `n`. The
/// product group acts through the permutation factor only.
#[derive(Clone, Debug)]
pub struct FiniteActionApprox {
    pub n: usize,
    pub omega: LayeredAction,
    pub x_points: Vec<Point>,
    pub alpha: FinSuppPerm,
    pub beta: FinSuppPerm,
    pub p_group: PermGroup,
    pub modulus: u64,
    pub q_group: FiniteGroup,
    seed: u64,
}

fn restrict_to_layers(p: &FinSuppPerm, max_layer: u32) -> Result<FinSuppPerm> {
    let mut map = BTreeMap::new();
    for pt in p.support() {
        let Point::Layer(l, _) = pt else {
            return Err(Error::Precondition("expected a layered point".into()));
        };
        if l <= max_layer {
            map.insert(pt, p.apply(pt));
        }
    }
    FinSuppPerm::from_map(map)
}

/// Build the level-`n` approximation. Requires `n >= 2` (the path
/// argument behind the compatibility check needs `3n/2 <= 2n - 1`) and a
/// table covering `0 ..= 2n + 1` so that free words of length `2n` can be
/// evaluated without hitting the truncation boundary.
pub fn build_finite_action(f: &PermissibleFn, n: usize, seed: u64) -> Result<FiniteActionApprox> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "approximation level must be at least 2, got {n}"
        )));
    }
    let omega = build_omega(f, 2 * n + 1)?;
    let x_points = omega.ball_points(2 * n);
    let alpha = restrict_to_layers(omega.gen_a(), 2 * n as u32 - 1)?;
    let beta = restrict_to_layers(omega.gen_b(), 2 * n as u32)?;
    let p_group = PermGroup::from_generators(vec![alpha.clone(), beta.clone()], seed)?;
    let modulus = sl2_min_modulus(n, 1 << 16)?;
    let q_group = FiniteGroup::product(
        FiniteGroup::Perm(p_group.clone()),
        FiniteGroup::sl2(modulus),
    );
    Ok(FiniteActionApprox {
        n,
        omega,
        x_points,
        alpha,
        beta,
        p_group,
        modulus,
        q_group,
        seed,
    })
}

impl FiniteActionApprox {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn x_size(&self) -> usize {
        self.x_points.len()
    }

    /// The source window `B(n)`, layer by layer.
    pub fn window(&self) -> Vec<Point> {
        self.omega.ball_points(self.n)
    }

    /// Permutation image of a word in the generators, evaluated left to
    /// right in `alpha`, `beta`.
    pub fn phi(&self, w: &FreeWord) -> Result<FinSuppPerm> {
        let mut acc = FinSuppPerm::identity();
        for l in w.letters() {
            let base = match l.gen {
                0 => &self.alpha,
                1 => &self.beta,
                other => return Err(Error::UnknownGenerator(other as usize)),
            };
            let step = if l.inv { base.inverse() } else { base.clone() };
            acc = acc.compose(&step);
        }
        Ok(acc)
    }

    /// Matrix image of a word under the Sanov pair modulo the chosen
    /// modulus.
    pub fn psi(&self, w: &FreeWord) -> Result<Mat2> {
        sanov_image(w, self.modulus)
    }

    /// Image in the product group.
    pub fn pi(&self, w: &FreeWord) -> Result<GroupElem> {
        Ok(GroupElem::Pair(
            Box::new(GroupElem::Perm(self.phi(w)?)),
            Box::new(GroupElem::Mat(self.psi(w)?)),
        ))
    }

    /// The inclusion of the window into `X`; errors outside the window.
    pub fn theta(&self, p: &Point) -> Result<Point> {
        if let Point::Layer(l, i) = p {
            if (*l as usize) <= self.n && (*i as usize) < self.omega.layer(*l as usize).len() {
                return Ok(*p);
            }
        }
        Err(Error::Precondition(format!(
            "{} is outside the source window",
            p.key()
        )))
    }

    /// `X` with `alpha`, `beta` as named generators, for downstream
    /// constructions over the approximation.
    pub fn x_action(&self) -> Result<FinitePermAction> {
        FinitePermAction::new(
            vec!["a".into(), "b".into()],
            vec![self.alpha.clone(), self.beta.clone()],
            self.omega.base_point(),
        )
    }
}

/// Combined witnesses for one approximation level: the word table into
/// the product group, and the action-compatibility report over the
/// window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineWitness {
    pub pi: PartialMapWitness,
    pub action: ActionCheckReport,
}

impl PipelineWitness {
    pub fn verified(&self) -> bool {
        self.pi.verified() && self.action.verified()
    }
}

/// Exhaustively verify one approximation: the word table on the free ball
/// of radius `n` must embed locally into the product group, and for every
/// window point and word with image still in the window, acting through
/// the group must agree with acting in the layered universe.
pub fn verify_pipeline(approx: &FiniteActionApprox) -> Result<PipelineWitness> {
    let domain = FreeBallDomain::new(2, approx.n);
    let table: Vec<GroupElem> = domain
        .elements()
        .iter()
        .map(|w| approx.pi(w))
        .collect::<Result<_>>()?;
    let pi = verify_local_embedding(&domain, &approx.q_group, &table, CheckMode::Exhaustive)?;
    let window = approx.window();
    let action = verify_action_local_embedding(
        &window,
        domain.elements(),
        |p| approx.theta(p),
        |w| approx.pi(w),
        |p, w| approx.omega.apply_word(*p, w),
        |p, t| approx.q_group.act(*p, t),
        |w| w.to_string(),
        |p| p.key(),
    )?;
    Ok(PipelineWitness { pi, action })
}

/// Convenience wrapper: build the approximation and verify it.
pub fn verify_action_embedding_pipeline(
    f: &PermissibleFn,
    n: usize,
    seed: u64,
) -> Result<(FiniteActionApprox, PipelineWitness)> {
    let approx = build_finite_action(f, n, seed)?;
    let witness = verify_pipeline(&approx)?;
    Ok((approx, witness))
}

/// The irregular table used throughout the tests: strictly increasing,
/// difference ratios exactly alternating between doubling and repeating.
pub fn irregular_table() -> Vec<u64> {
    vec![1, 2, 4, 6, 10, 14, 22, 30, 46, 62, 94, 126, 190, 254]
}

/// Growth table of the layered action as big integers, for bound records.
pub fn growth_values(f: &PermissibleFn, upto: usize) -> Result<Vec<BigUint>> {
    if f.len() <= upto {
        return Err(Error::Precondition(format!(
            "table covers indices up to {}, need {}",
            f.len() - 1,
            upto
        )));
    }
    Ok(f.values()[..=upto].iter().map(|&v| BigUint::from(v)).collect())
}
