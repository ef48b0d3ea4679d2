//! The symmetric enrichment of a group action: finitely supported
//! permutations of the point universe twisted by the acting group.
//!
//! Elements are pairs `(sigma, g)` with `sigma` a finitely supported
//! permutation and `g` an ambient group element, multiplying by
//! `(s1, g1)(s2, g2) = (s1 * s2^(g1^-1), g1 g2)` where `s^g = g^-1 s g`
//! relabels the support along the action. A pair acts on points by
//! `w . (s, g) = (w s) g`.
//!
//! The window set `I(n)` collects the pairs with `supp(sigma)` inside the
//! radius-`n` ball and `|g| <= n`; products of at most `n` enriched
//! generators always land in it. A verified local embedding of the base
//! action transports `I(n)` into the enrichment of the finite target, and
//! that map is checked pair by pair here.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::{Action, AmbientGroup, FiniteAmbient, WordAmbient};
use crate::embeddings::{
    log10_of, verify_local_embedding, CheckMode, GrowthBoundRecord, PartialMapWitness,
    PartialProducts, TargetGroup,
};
use crate::error::{Error, Result};
use crate::finite::{factorial, FiniteGroup, GroupElem};
use crate::perm::{FinSuppPerm, Point};
use crate::permissible::{build_finite_action, FiniteActionApprox, PermissibleFn};
use crate::schreier::ActionGraph;
use crate::word::{free_ball, FreeWord, Letter};

/// An enrichment element: a finitely supported permutation together with
/// an ambient group element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct EnrichElem<E> {
    pub sigma: FinSuppPerm,
    pub g: E,
}

/// Arithmetic of the enrichment over a fixed ambient group.
#[derive(Clone, Debug)]
pub struct SymEnrichment<A: AmbientGroup> {
    pub ambient: A,
    name: String,
}

impl<A: AmbientGroup> SymEnrichment<A> {
    pub fn new(ambient: A, name: impl Into<String>) -> SymEnrichment<A> {
        SymEnrichment {
            ambient,
            name: name.into(),
        }
    }

    pub fn identity(&self) -> EnrichElem<A::Elem> {
        EnrichElem {
            sigma: FinSuppPerm::identity(),
            g: self.ambient.identity(),
        }
    }

    /// `(s1, g1)(s2, g2) = (s1 * s2^(g1^-1), g1 g2)`. Errors when the
    /// relabeled support leaves a truncated universe.
    pub fn mul(&self, x: &EnrichElem<A::Elem>, y: &EnrichElem<A::Elem>) -> Result<EnrichElem<A::Elem>> {
        let g1_inv = self.ambient.inv(&x.g)?;
        let twisted = self.ambient.conj_perm(&y.sigma, &g1_inv)?;
        Ok(EnrichElem {
            sigma: x.sigma.compose(&twisted),
            g: self.ambient.mul(&x.g, &y.g)?,
        })
    }

    /// `(s, g)^-1 = ((s^-1)^g, g^-1)`.
    pub fn inv(&self, x: &EnrichElem<A::Elem>) -> Result<EnrichElem<A::Elem>> {
        Ok(EnrichElem {
            sigma: self.ambient.conj_perm(&x.sigma.inverse(), &x.g)?,
            g: self.ambient.inv(&x.g)?,
        })
    }

    /// `w . (s, g) = (w s) g`.
    pub fn act(&self, p: Point, x: &EnrichElem<A::Elem>) -> Result<Point> {
        self.ambient.act(x.sigma.apply(p), &x.g)
    }

    pub fn elem_key(&self, x: &EnrichElem<A::Elem>) -> String {
        format!("{}*{}", x.sigma, self.ambient.elem_key(&x.g))
    }

    /// Membership in the alternating sub-enrichment: even permutation
    /// part. Closed under multiplication since the twist is a
    /// relabeling.
    pub fn is_even(&self, x: &EnrichElem<A::Elem>) -> bool {
        x.sigma.sign() == 1
    }
}

impl<A: AmbientGroup + Sync> TargetGroup for SymEnrichment<A>
where
    A::Elem: Send + Sync,
{
    type Elem = EnrichElem<A::Elem>;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Self::Elem> {
        SymEnrichment::mul(self, x, y)
    }

    fn elem_key(&self, x: &Self::Elem) -> String {
        SymEnrichment::elem_key(self, x)
    }
}

/// The enriched generating set: the ambient generators (and inverses)
/// together with one transposition `(base, base . s)` for each generator
/// letter moving the base point.
#[derive(Clone, Debug)]
pub struct EnrichGenSet {
    pub ambient: Vec<(String, FreeWord)>,
    pub transpositions: Vec<(String, FinSuppPerm)>,
}

/// One letter of a word over the enriched generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnrichLetter {
    Ambient(Letter),
    Transposition(FinSuppPerm),
}

impl EnrichGenSet {
    /// The generators as enrichment elements: `(id, s)` and `(t, e)`.
    pub fn elements(&self) -> Vec<(String, EnrichElem<FreeWord>)> {
        let mut out = Vec::new();
        for (name, w) in &self.ambient {
            out.push((
                name.clone(),
                EnrichElem {
                    sigma: FinSuppPerm::identity(),
                    g: w.clone(),
                },
            ));
        }
        for (name, t) in &self.transpositions {
            out.push((
                name.clone(),
                EnrichElem {
                    sigma: t.clone(),
                    g: FreeWord::identity(),
                },
            ));
        }
        out
    }

    /// The generators as letters for decomposition input.
    pub fn letters(&self) -> Vec<(String, EnrichLetter)> {
        let mut out = Vec::new();
        for (name, w) in &self.ambient {
            out.push((name.clone(), EnrichLetter::Ambient(w.letters()[0])));
        }
        for (name, t) in &self.transpositions {
            out.push((name.clone(), EnrichLetter::Transposition(t.clone())));
        }
        out
    }
}

/// The enriched generating set of an action: each generator letter `s`
/// with `base . s != base` contributes the transposition swapping the
/// base point with its image; duplicates (e.g. when `s` and `s^-1` move
/// the base to the same point) are kept once.
pub fn enrich_generators<A: Action>(action: &A) -> Result<EnrichGenSet> {
    let base = action.base_point();
    let mut ambient = Vec::new();
    let mut transpositions = Vec::new();
    let mut seen = BTreeSet::new();
    for i in 0..action.gen_count() {
        for inv in [false, true] {
            let letter = Letter::new(i as u8, inv);
            let name = if inv {
                format!("{}^-1", action.gen_name(i))
            } else {
                action.gen_name(i)
            };
            ambient.push((name.clone(), FreeWord::letter(letter)));
            let image = action.apply_gen(base, i, inv)?;
            if image != base && seen.insert(image) {
                let t = FinSuppPerm::transposition(base, image)?;
                transpositions.push((format!("({} {})", base.key(), image.key()), t));
            }
        }
    }
    Ok(EnrichGenSet {
        ambient,
        transpositions,
    })
}

/// Normal-form split of a word over the enriched generators: all
/// permutation letters are pushed to the front, each conjugated by the
/// inverse of the ambient prefix read so far, and the ambient letters
/// multiply out on the right. For a word of length at most `n` every
/// conjugator has length at most `n - 1`.
#[derive(Clone, Debug)]
pub struct SdprodParts {
    /// The conjugated transpositions, in order of appearance.
    pub conjugates: Vec<FinSuppPerm>,
    /// The ambient prefixes they were conjugated by.
    pub conjugators: Vec<FreeWord>,
    /// Product of the ambient letters.
    pub ambient: FreeWord,
}

impl SdprodParts {
    /// Product of the conjugates: the permutation head of the element.
    pub fn head(&self) -> FinSuppPerm {
        let mut acc = FinSuppPerm::identity();
        for c in &self.conjugates {
            acc = acc.compose(c);
        }
        acc
    }
}

pub fn sdprod_decompose<A: Action>(
    enr: &SymEnrichment<WordAmbient<A>>,
    word: &[EnrichLetter],
    n: usize,
) -> Result<SdprodParts> {
    if word.len() > n {
        return Err(Error::Precondition(format!(
            "word of length {} exceeds the window length {n}",
            word.len()
        )));
    }
    let mut conjugates = Vec::new();
    let mut conjugators = Vec::new();
    let mut prefix = FreeWord::identity();
    for l in word {
        match l {
            EnrichLetter::Ambient(letter) => {
                prefix = prefix.mul(&FreeWord::letter(*letter));
            }
            EnrichLetter::Transposition(t) => {
                debug_assert!(prefix.len() + 1 <= n.max(1));
                let tau = enr.ambient.conj_perm(t, &prefix.inverse())?;
                conjugates.push(tau);
                conjugators.push(prefix.clone());
            }
        }
    }
    Ok(SdprodParts {
        conjugates,
        conjugators,
        ambient: prefix,
    })
}

/// Membership in `I(n)`: permutation support inside the window and word
/// length at most `n`.
pub fn in_window(x: &EnrichElem<FreeWord>, n: usize, window: &BTreeSet<Point>) -> bool {
    x.g.len() <= n && x.sigma.support().all(|p| window.contains(&p))
}

/// `I(n)` over an action, enumerated as a product-or-outside domain:
/// every permutation of the radius-`n` ball paired with every word of
/// length at most `n`. Enumeration is capped at windows of six points
/// (already 720 permutations); larger windows use sampled verification
/// through the same oracle.
pub struct EnrichWindowDomain<A: Action> {
    enr: SymEnrichment<WordAmbient<A>>,
    n: usize,
    window: Vec<Point>,
    window_set: BTreeSet<Point>,
    elements: Vec<EnrichElem<FreeWord>>,
    name: String,
}

impl<A: Action> EnrichWindowDomain<A> {
    pub fn new(action: A, n: usize) -> Result<EnrichWindowDomain<A>> {
        let graph = ActionGraph::ball(&action, n)?;
        let window: Vec<Point> = graph.points().to_vec();
        if window.len() > 6 {
            return Err(Error::CapExceeded {
                what: format!("window of {} points for full symmetric enumeration", window.len()),
                cap: 6,
            });
        }
        let rank = action.gen_count() as u8;
        let words = free_ball(rank, n);
        let perms = crate::perm::all_perms(&window);
        let mut elements = Vec::with_capacity(words.len() * perms.len());
        for w in &words {
            for s in &perms {
                elements.push(EnrichElem {
                    sigma: s.clone(),
                    g: w.clone(),
                });
            }
        }
        let name = format!("I({n}) with |B({n})| = {}", window.len());
        let window_set = window.iter().copied().collect();
        Ok(EnrichWindowDomain {
            enr: SymEnrichment::new(WordAmbient::new(action), "source enrichment"),
            n,
            window,
            window_set,
            elements,
            name,
        })
    }

    pub fn window(&self) -> &[Point] {
        &self.window
    }

    pub fn enrichment(&self) -> &SymEnrichment<WordAmbient<A>> {
        &self.enr
    }
}

impl<A: Action + Sync> PartialProducts for EnrichWindowDomain<A> {
    type Elem = EnrichElem<FreeWord>;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn elements(&self) -> &[EnrichElem<FreeWord>] {
        &self.elements
    }

    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Option<Self::Elem>> {
        let z = self.enr.mul(x, y)?;
        Ok(in_window(&z, self.n, &self.window_set).then_some(z))
    }

    fn elem_key(&self, x: &Self::Elem) -> String {
        self.enr.elem_key(x)
    }
}

/// Verification record for the transported map on `I(n)`: the embedding
/// witness, the support-confinement statistics from the underlying
/// argument, and the target order `|X|! * |Q|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiReport {
    pub witness: PartialMapWitness,
    /// Pairs with in-window product whose twisted supports were checked.
    pub support_checks: usize,
    /// Confinement failures (a correct build has none).
    pub support_violations: usize,
    /// `|X|! * |Q|`, the order of the target enrichment.
    pub target_order: BigUint,
}

impl PhiReport {
    pub fn verified(&self) -> bool {
        self.witness.verified() && self.support_violations == 0
    }
}

/// Build and verify the map `sigma * g -> theta(sigma) * pi(g)` from
/// `I(n)` into the enrichment of the finite target. `theta` must be
/// defined and injective on the radius-`n` ball; `pi` on words of length
/// at most `n`. Windows of at most five points are verified exhaustively;
/// larger ones check `sampled_pairs` seeded random pairs. On every
/// constrained pair the two twisted supports from the product law are
/// additionally confined to `theta(B(n)) pi(g1)^-1 n theta(B(n))`.
pub fn build_phi<A: Action + Clone + Sync>(
    action: &A,
    n: usize,
    target: &FiniteGroup,
    x_size: usize,
    theta: impl Fn(&Point) -> Result<Point>,
    pi: impl Fn(&FreeWord) -> Result<GroupElem>,
    seed: u64,
    sampled_pairs: usize,
) -> Result<PhiReport> {
    let domain = EnrichWindowDomain::new(action.clone(), n)?;
    let window = domain.window().to_vec();
    let enr_target = SymEnrichment::new(
        FiniteAmbient::new(target.clone()),
        format!("S({}, |X| = {x_size})", target.name()),
    );

    // theta images and injectivity.
    let mut theta_window = Vec::with_capacity(window.len());
    for p in &window {
        theta_window.push(theta(p)?);
    }
    {
        let distinct: BTreeSet<&Point> = theta_window.iter().collect();
        if distinct.len() != theta_window.len() {
            return Err(Error::Precondition(
                "theta is not injective on the window".into(),
            ));
        }
    }
    let theta_set: BTreeSet<Point> = theta_window.iter().copied().collect();
    let theta_of = |p: &Point| -> Result<Point> {
        let i = window
            .iter()
            .position(|w| w == p)
            .ok_or_else(|| Error::Precondition(format!("{} not in the window", p.key())))?;
        Ok(theta_window[i])
    };

    // pi images per word, computed once.
    let words = free_ball(action.gen_count() as u8, n);
    let mut pi_of = std::collections::BTreeMap::new();
    for w in &words {
        pi_of.insert(w.clone(), pi(w)?);
    }

    // The transported table, in domain order.
    let table: Vec<EnrichElem<GroupElem>> = domain
        .elements()
        .iter()
        .map(|x| {
            Ok(EnrichElem {
                sigma: x.sigma.map_points(|p| theta_of(&p))?,
                g: pi_of[&x.g].clone(),
            })
        })
        .collect::<Result<_>>()?;

    let mode = if window.len() <= 5 {
        CheckMode::Exhaustive
    } else {
        CheckMode::Sampled {
            pairs: sampled_pairs,
            seed,
        }
    };
    let witness = verify_local_embedding(&domain, &enr_target, &table, mode.clone())?;

    // Support confinement for the two sides of the product law, on the
    // same pair set.
    let elements = domain.elements();
    let mut support_checks = 0usize;
    let mut support_violations = 0usize;
    let mut check_pair = |i: usize, j: usize| -> Result<()> {
        if domain.mul(&elements[i], &elements[j])?.is_none() {
            return Ok(());
        }
        let g1 = &table[i].g;
        let g1_inv = enr_target.ambient.inv(g1)?;
        let tau1 = enr_target.ambient.conj_perm(&table[j].sigma, &g1_inv)?;
        let source_twist = domain
            .enrichment()
            .ambient
            .conj_perm(&elements[j].sigma, &elements[i].g.inverse())?;
        let tau2 = source_twist.map_points(|p| theta_of(&p))?;
        let mut allowed: BTreeSet<Point> = BTreeSet::new();
        for x in &theta_set {
            let moved = enr_target.ambient.act(*x, &g1_inv)?;
            if theta_set.contains(&moved) {
                allowed.insert(moved);
            }
        }
        support_checks += 1;
        let confined = tau1.support().all(|p| allowed.contains(&p))
            && tau2.support().all(|p| allowed.contains(&p))
            && tau1 == tau2;
        if !confined {
            support_violations += 1;
        }
        Ok(())
    };
    match &mode {
        CheckMode::Exhaustive => {
            for i in 0..elements.len() {
                for j in 0..elements.len() {
                    check_pair(i, j)?;
                }
            }
        }
        CheckMode::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*pairs {
                let i = rng.gen_range(0..elements.len());
                let j = rng.gen_range(0..elements.len());
                check_pair(i, j)?;
            }
        }
    }

    Ok(PhiReport {
        witness,
        support_checks,
        support_violations,
        target_order: factorial(x_size) * target.order(),
    })
}

/// The transported map for a pipeline approximation: source window
/// `B(n)` in the layered universe, identity inclusion, word images in the
/// product group.
pub fn build_phi_for_approx(
    approx: &FiniteActionApprox,
    seed: u64,
    sampled_pairs: usize,
) -> Result<PhiReport> {
    build_phi(
        &approx.omega,
        approx.n,
        &approx.q_group,
        approx.x_size(),
        |p| approx.theta(p),
        |w| approx.pi(w),
        seed,
        sampled_pairs,
    )
}

const LOG10_NOTE_THRESHOLD_FACTORIAL: usize = 20;

fn note_with_log10(value: &BigUint, mut notes: String) -> String {
    if *value > factorial(LOG10_NOTE_THRESHOLD_FACTORIAL) {
        if !notes.is_empty() {
            notes.push_str("; ");
        }
        notes.push_str(&format!("log10 = {:.3}", log10_of(value)));
    }
    notes
}

/// Growth-bound rows for the enriched group over the layered action of
/// `f`. Each window level `n` emits two rows: the target order
/// `|X_n|! * |Q_n|` as an upper bound at radius `n`, and `f(n)!` as a
/// lower bound at radius `16n - 8` (certified by the radius-8 quotient
/// argument only from level 5 on; smaller levels are marked). Window
/// sizes beyond `window_cap` skip the upper bound, since the chain
/// computation behind `|Q_n|` is deliberately capped.
pub fn enrich_bounds_table(
    f: &PermissibleFn,
    levels: RangeInclusive<usize>,
    seed: u64,
    window_cap: usize,
) -> Result<Vec<GrowthBoundRecord>> {
    let (lo, hi) = (*levels.start(), *levels.end());
    if lo < 2 {
        return Err(Error::Precondition(
            "bound rows need window level at least 2".into(),
        ));
    }
    let mut out = Vec::new();
    for n in lo..=hi {
        if f.len() <= 2 * n + 1 {
            return Err(Error::RangeMismatch(format!(
                "table covers indices up to {}, level {n} needs {}",
                f.len() - 1,
                2 * n + 1
            )));
        }
        let x_size = f.values()[2 * n] as usize;
        if x_size <= window_cap {
            let approx = build_finite_action(f, n, seed)?;
            let upper = factorial(approx.x_size()) * approx.q_group.order();
            let notes = note_with_log10(&upper, String::new());
            out.push(GrowthBoundRecord {
                radius: n as u64,
                lower: None,
                lower_provenance: String::new(),
                upper: Some(upper),
                upper_provenance: "enrichment target order |X_n|! * |Q_n|".into(),
                notes,
            });
        } else {
            out.push(GrowthBoundRecord {
                radius: n as u64,
                lower: None,
                lower_provenance: String::new(),
                upper: None,
                upper_provenance: String::new(),
                notes: format!(
                    "window of {x_size} points exceeds the cap of {window_cap}; upper bound skipped"
                ),
            });
        }

        let radius = 16 * n as u64 - 8;
        if n >= 5 {
            // Generators of the window subgroup sit within distance
            // 2n - 1 and its tree presentation has relators of length
            // at most 8, so its radius-8 quotient floor transfers.
            let lower = crate::embeddings::rf_growth_symmetric(f.values()[n] as usize, 8)?;
            let mut rec =
                crate::presentations::lerf_lower_bound(2 * n as u64 - 1, 8, &lower)?;
            debug_assert_eq!(rec.radius, radius);
            rec.notes = note_with_log10(&lower, rec.notes);
            out.push(rec);
        } else {
            out.push(GrowthBoundRecord {
                radius,
                lower: None,
                lower_provenance: String::new(),
                upper: None,
                upper_provenance: String::new(),
                notes: "no certified lower bound".into(),
            });
        }
    }
    Ok(out)
}
