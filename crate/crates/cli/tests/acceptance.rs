//! End-to-end acceptance checks for the toolkit. Each test prints one
//! summary line on success; budgets guard the cases that are expected to
//! stay interactive.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use lefgrowth::action::{CayleyAction, LineAction};
use lefgrowth::elem_enrich::{
    bertrand_split, build_phi_elem_for_approx, crt_split, normal_gen_identity_check,
    path_commutator_word, window_generators, word_for_transvection, CongruenceMode, ElemMatrix,
    Ring,
};
use lefgrowth::embeddings::{
    compare_growth_witness, search_min_embedding, CheckMode, CompareOutcome, Counterexample,
    FreeBallDomain, SearchConfig, WitnessStatus,
};
use lefgrowth::error::Error;
use lefgrowth::finite::{default_catalog, factorial, FiniteGroup, GroupElem};
use lefgrowth::graph::SimpleGraph;
use lefgrowth::perm::{FinSuppPerm, Point};
use lefgrowth::permissible::{
    build_finite_action, build_omega, irregular_table, verify_action_embedding_pipeline,
    PermissibleFn,
};
use lefgrowth::presentations::{
    eval_relators, steinberg_pairs, steinberg_presentation, tree_presentation, SteinbergRing,
};
use lefgrowth::schreier::{gn_graph_and_tree, growth_table};
use lefgrowth::sym_enrich::{build_phi, build_phi_for_approx};
use lefgrowth::todd_coxeter::{todd_coxeter, TcStatus};
use lefgrowth::word::{FreeWord, Letter};

use Point::Int;

fn pass(name: &str, detail: &str, started: Instant, budget: Option<Duration>) {
    let elapsed = started.elapsed();
    if let Some(b) = budget {
        assert!(
            elapsed <= b,
            "{name} took {elapsed:?}, budget {b:?}"
        );
    }
    println!("PASS {name}: {detail} [{elapsed:.2?}]");
}

fn families() -> Vec<(&'static str, PermissibleFn)> {
    vec![
        ("linear", PermissibleFn::linear(14)),
        ("pow2", PermissibleFn::pow2(14).unwrap()),
        ("odd", PermissibleFn::odd(14)),
        ("irregular", PermissibleFn::new(irregular_table()).unwrap()),
    ]
}

#[test]
fn a01_layered_ball_sizes_match_the_table() {
    let t0 = Instant::now();
    let mut entries = 0;
    for (name, f) in &families() {
        let omega = build_omega(f, 13).unwrap();
        let sizes = growth_table(&omega, 12).unwrap();
        let want: Vec<usize> = f.values()[..=12].iter().map(|&v| v as usize).collect();
        assert_eq!(sizes, want, "family {name}");
        entries += sizes.len();
    }
    pass(
        "01 layered ball sizes",
        &format!("4 families, radii 0..=12, {entries} exact matches"),
        t0,
        Some(Duration::from_secs(5)),
    );
}

#[test]
fn a02_finite_approximations_verify_exhaustively() {
    let t0 = Instant::now();
    let mut pairs = 0usize;
    for (name, f) in &families() {
        for n in 2..=3usize {
            let (approx, witness) = verify_action_embedding_pipeline(f, n, 7).unwrap();
            assert_eq!(
                approx.x_size() as u64,
                f.values()[2 * n],
                "family {name}, level {n}"
            );
            assert!(witness.verified(), "family {name}, level {n}");
            assert_eq!(witness.pi.mode, CheckMode::Exhaustive);
            assert_eq!(
                witness.pi.pairs_checked,
                witness.pi.domain_size * witness.pi.domain_size
            );
            assert_eq!(
                witness.action.pairs_checked,
                witness.action.window_size * witness.action.domain_size
            );
            pairs += witness.pi.pairs_checked + witness.action.pairs_checked;
        }
    }
    pass(
        "02 finite approximations",
        &format!("8 approximations, |X_n| exact, {pairs} pairs checked"),
        t0,
        Some(Duration::from_secs(30)),
    );
}

#[test]
fn a03_enrichment_maps_verify_on_the_window() {
    let t0 = Instant::now();
    let mut exhaustive_pairs = 0usize;

    // The integers into C7 at levels 1 and 2: every pair checked.
    for n in 1..=2usize {
        let report = build_phi(
            &LineAction,
            n,
            &FiniteGroup::cyclic(7),
            7,
            |p| match p {
                Int(k) => Ok(Int(k.rem_euclid(7))),
                other => Err(Error::Precondition(format!(
                    "{} not an integer",
                    other.key()
                ))),
            },
            |w| {
                let k: i64 = w.letters().iter().map(|l| if l.inv { -1 } else { 1 }).sum();
                Ok(GroupElem::Res(k.rem_euclid(7) as u64))
            },
            3,
            1000,
        )
        .unwrap();
        assert!(report.verified(), "line level {n}");
        assert_eq!(report.witness.mode, CheckMode::Exhaustive);
        exhaustive_pairs += report.witness.pairs_checked;
    }

    // Rank-2 layered action at level 2: every pair checked.
    let approx = build_finite_action(&PermissibleFn::linear(14), 2, 7).unwrap();
    let report = build_phi_for_approx(&approx, 7, 1000).unwrap();
    assert!(report.verified());
    assert_eq!(report.witness.mode, CheckMode::Exhaustive);
    assert_eq!(
        report.target_order,
        factorial(approx.x_size()) * approx.q_group.order()
    );
    exhaustive_pairs += report.witness.pairs_checked;

    // Six-point window: too large to enumerate pairs, so sample 10^5.
    let f = PermissibleFn::new(irregular_table()).unwrap();
    let approx = build_finite_action(&f, 3, 17).unwrap();
    let report = build_phi_for_approx(&approx, 17, 100_000).unwrap();
    assert!(matches!(
        report.witness.mode,
        CheckMode::Sampled {
            pairs: 100_000,
            seed: 17
        }
    ));
    assert!(report.verified());
    assert!(report.support_checks > 0);
    assert_eq!(report.support_violations, 0);

    pass(
        "03 window enrichment maps",
        &format!(
            "3 exhaustive cases ({exhaustive_pairs} pairs), six-point window with 100000 sampled pairs"
        ),
        t0,
        Some(Duration::from_secs(120)),
    );
}

fn tree_relators_hold(tree: &SimpleGraph) -> bool {
    let pres = tree_presentation(tree).unwrap();
    let assign: Vec<FinSuppPerm> = tree
        .edges()
        .iter()
        .map(|&(a, b)| FinSuppPerm::transposition(a, b).unwrap())
        .collect();
    eval_relators(
        &pres,
        &FinSuppPerm::identity(),
        &assign,
        |a, b| Ok(a.compose(b)),
        |a| Ok(a.inverse()),
    )
    .unwrap()
    .is_none()
}

#[test]
fn a04_tree_presentations_enumerate_symmetric_groups() {
    let t0 = Instant::now();
    let cases = [
        (SimpleGraph::path_graph(3), 6usize),
        (SimpleGraph::path_graph(4), 24),
        (SimpleGraph::star_graph(4), 24),
        (SimpleGraph::path_graph(5), 120),
    ];
    for (tree, want) in &cases {
        let pres = tree_presentation(tree).unwrap();
        let table = todd_coxeter(&pres, 20_000).unwrap();
        assert_eq!(table.status(), TcStatus::Complete);
        assert_eq!(table.coset_count(), *want);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for draw in 0..50 {
        let n = rng.gen_range(2..=7usize);
        let seq: Vec<usize> = (0..n.saturating_sub(2))
            .map(|_| rng.gen_range(0..n))
            .collect();
        let tree = SimpleGraph::from_prufer(&seq).unwrap();
        assert!(tree_relators_hold(&tree), "draw {draw}, sequence {seq:?}");
    }

    pass(
        "04 tree presentations",
        "coset counts 6/24/24/120, relators hold on 50 random trees",
        t0,
        Some(Duration::from_secs(30)),
    );
}

#[test]
fn a05_spanning_trees_cover_balls_with_small_diameter() {
    let t0 = Instant::now();
    let mut certs = 0;
    for (name, f) in &families() {
        for n in 1..=10usize {
            let omega = build_omega(f, n + 1).unwrap();
            let cert = gn_graph_and_tree(&omega, n).unwrap();
            assert_eq!(
                cert.vertices.len() as u64,
                f.values()[n],
                "family {name}, radius {n}"
            );
            assert_eq!(cert.tree_edges.len(), cert.vertices.len() - 1);
            assert!(
                cert.diameter <= 2 * n,
                "family {name}, radius {n}: diameter {}",
                cert.diameter
            );
            certs += 1;
        }
    }
    // Unbounded point sets exercise the same certificate.
    for n in 1..=10usize {
        let cert = gn_graph_and_tree(&LineAction, n).unwrap();
        assert_eq!(cert.vertices.len(), 2 * n + 1);
        assert!(cert.diameter <= 2 * n);
        certs += 1;
    }
    pass(
        "05 spanning trees",
        &format!("{certs} certificates: ball spanned, diameter at most 2n"),
        t0,
        None,
    );
}

fn eval_steinberg(points: &[Point], ring: Ring, field: Option<u64>) -> Option<usize> {
    let sring = match field {
        Some(p) => SteinbergRing::PrimeField(p),
        None => SteinbergRing::Integers,
    };
    let pres = steinberg_presentation(points, sring).unwrap();
    let assign: Vec<ElemMatrix> = steinberg_pairs(points)
        .iter()
        .map(|&(v, w)| ElemMatrix::transvection(ring, v, w, 1).unwrap())
        .collect();
    eval_relators(
        &pres,
        &ElemMatrix::identity(ring),
        &assign,
        ElemMatrix::mul,
        |m| Ok(m.inverse()),
    )
    .unwrap()
}

#[test]
fn a06_transvection_relations_hold_in_matrix_groups() {
    let t0 = Instant::now();
    let p3: Vec<Point> = (0..3).map(Int).collect();
    let p4: Vec<Point> = (0..4).map(Int).collect();
    assert_eq!(eval_steinberg(&p3, Ring::Int, None), None);
    assert_eq!(eval_steinberg(&p3, Ring::modular(5).unwrap(), None), None);
    assert_eq!(eval_steinberg(&p4, Ring::modular(7).unwrap(), None), None);
    assert_eq!(eval_steinberg(&p3, Ring::prime(2).unwrap(), Some(2)), None);

    // Fuzzed commutator laws: chained indices multiply coefficients,
    // index-disjoint pairs commute.
    let rings = [
        Ring::Int,
        Ring::modular(5).unwrap(),
        Ring::modular(7).unwrap(),
        Ring::prime(2).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut instances = 0;
    for ring in rings {
        for _ in 0..1000 {
            let mut pts = BTreeSet::new();
            while pts.len() < 4 {
                pts.insert(rng.gen_range(-10..=10i64));
            }
            let mut pts: Vec<Point> = pts.into_iter().map(Int).collect();
            pts.shuffle(&mut rng);
            let (v, x, w, y) = (pts[0], pts[1], pts[2], pts[3]);
            let r = rng.gen_range(-4..=4i64);
            let s = rng.gen_range(-4..=4i64);

            let chained = ElemMatrix::commutator(
                &ElemMatrix::transvection(ring, v, x, r).unwrap(),
                &ElemMatrix::transvection(ring, x, w, s).unwrap(),
            )
            .unwrap();
            assert_eq!(
                chained,
                ElemMatrix::transvection(ring, v, w, r * s).unwrap(),
                "{} chain at {v:?},{x:?},{w:?} with r={r}, s={s}",
                ring.name()
            );

            let disjoint = ElemMatrix::commutator(
                &ElemMatrix::transvection(ring, v, w, r).unwrap(),
                &ElemMatrix::transvection(ring, x, y, s).unwrap(),
            )
            .unwrap();
            assert!(disjoint.is_identity(), "{} disjoint pair", ring.name());
            instances += 2;
        }
    }
    pass(
        "06 transvection relations",
        &format!("4 matrix groups, {instances} fuzzed commutator instances"),
        t0,
        None,
    );
}

#[test]
fn a07_norm_discipline_and_congruence_maps() {
    let t0 = Instant::now();

    // Products of window generators stay inside the norm envelope.
    let gens = window_generators(&LineAction, 12, Ring::Int).unwrap();
    let window: BTreeSet<Point> = (-12..=12).map(Int).collect();
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

    // Strict congruence reduction verifies once the modulus clears 2^(n+1).
    let approx = build_finite_action(&PermissibleFn::linear(14), 2, 5).unwrap();
    let report = build_phi_elem_for_approx(
        &approx,
        Ring::modular(9).unwrap(),
        CongruenceMode::Strict,
        60,
        CheckMode::Sampled {
            pairs: 4000,
            seed: 5,
        },
    )
    .unwrap();
    assert!(report.verified(), "{:?}", report.status);

    // A modulus of 2 collapses distinct coefficients; demonstration mode
    // surfaces the concrete collision.
    let report = build_phi_elem_for_approx(
        &approx,
        Ring::modular(2).unwrap(),
        CongruenceMode::Demonstration,
        60,
        CheckMode::Exhaustive,
    )
    .unwrap();
    let collision = match &report.status {
        WitnessStatus::Failed(Counterexample::Injectivity { x, y }) => {
            assert_ne!(x, y);
            format!("{x} vs {y}")
        }
        other => panic!("expected an injectivity counterexample, got {other:?}"),
    };

    pass(
        "07 norm discipline",
        &format!(
            "1000 products within 2^(m-1), q=9 map verified, q=2 collision: {collision}"
        ),
        t0,
        None,
    );
}

fn random_reduced_word(rng: &mut ChaCha8Rng, rank: u8, len: usize) -> FreeWord {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        loop {
            let l = Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5));
            if letters.last().map_or(true, |prev| !prev.cancels(l)) {
                letters.push(l);
                break;
            }
        }
    }
    FreeWord::from_letters(letters)
}

#[test]
fn a08_synthesized_words_hit_their_transvections() {
    let t0 = Instant::now();

    // 200 random targets over the integers, |g| up to 16. Evaluation to
    // the target matrix is checked inside word_for_transvection; the
    // level records must obey the doubling recurrence.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut max_len = 0usize;
    for _ in 0..200 {
        let k = rng.gen_range(1..=16i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let g = FreeWord::generator(0).pow(k);
        let tw = word_for_transvection(&LineAction, &g, 16).unwrap();
        for rec in &tw.levels {
            assert!(
                rec.word_len <= 4 * rec.child_max + (1 << (rec.level + 1)),
                "k = {k}: level {} broke the recurrence",
                rec.level
            );
        }
        assert!(tw.measured_c.is_finite() && tw.measured_c > 0.0);
        max_len = max_len.max(tw.word.len());
    }

    // Rank-2 targets over a free orbit.
    let cayley = CayleyAction::new(2, 10);
    for _ in 0..200 {
        let len = rng.gen_range(1..=3usize);
        let g = random_reduced_word(&mut rng, 2, len);
        let tw = word_for_transvection(&cayley, &g, 3).unwrap();
        for rec in &tw.levels {
            assert!(rec.word_len <= 4 * rec.child_max + (1 << (rec.level + 1)));
        }
    }

    // Path words double toward the target: length at most 4^m for path
    // length at most 2^m.
    let path = SimpleGraph::path_graph(17);
    for d in 1..=16i64 {
        let w = path_commutator_word(&path, Int(0), Int(d)).unwrap();
        let mut m = 0u32;
        while (1i64 << m) < d {
            m += 1;
        }
        assert!(
            w.len() as u64 <= 4u64.pow(m),
            "distance {d}: length {} over 4^{m}",
            w.len()
        );
    }

    pass(
        "08 word synthesis",
        &format!("400 random targets, longest word {max_len}, path words within 4^m"),
        t0,
        None,
    );
}

#[test]
fn a09_minimal_embeddings_certified_by_search() {
    let t0 = Instant::now();
    let catalog = default_catalog(5040);
    for n in 1..=3usize {
        let domain = FreeBallDomain::new(1, n);
        let rec =
            search_min_embedding(&domain, &catalog, n as u64, &SearchConfig::default()).unwrap();
        let expect = BigUint::from(2 * n + 1);
        assert_eq!(rec.lower.as_ref(), Some(&expect), "radius {n}");
        assert_eq!(rec.upper.as_ref(), Some(&expect), "radius {n}");
        assert_eq!(rec.notes, "exact");
        assert_eq!(rec.upper_provenance, format!("C{} witness", 2 * n + 1));
    }

    // Backtracking genuinely rejects unsuitable groups at or above the
    // ball size: an elementary abelian 2-group cannot separate a point
    // from its inverse, and Sym(3) runs out of element orders.
    let klein = vec![FiniteGroup::product(
        FiniteGroup::cyclic(2),
        FiniteGroup::cyclic(2),
    )];
    let rec = search_min_embedding(
        &FreeBallDomain::new(1, 1),
        &klein,
        1,
        &SearchConfig::default(),
    )
    .unwrap();
    assert_eq!(rec.upper, None);

    let sym3 = vec![FiniteGroup::symmetric(3)];
    let rec = search_min_embedding(
        &FreeBallDomain::new(1, 2),
        &sym3,
        2,
        &SearchConfig::default(),
    )
    .unwrap();
    assert_eq!(rec.upper, None);

    pass(
        "09 minimal embeddings",
        "radii 1..=3 certified exact at 2n+1, counterexample groups rejected",
        t0,
        Some(Duration::from_secs(60)),
    );
}

#[test]
fn a10_bound_table_rows_are_sound() {
    let t0 = Instant::now();
    let exe = env!("CARGO_BIN_EXE_lefgrowth");
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bounds.csv");
    let out = Command::new(exe)
        .args([
            "bounds",
            "--builtin",
            "linear",
            "--flavor",
            "sym",
            "--range",
            "5:5",
            "--seed",
            "3",
            "--csv",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("radius,lower_bound,lower_provenance,upper_bound,upper_provenance,notes")
    );
    let mut lower_720 = false;
    let mut upper_value = None;
    for line in lines {
        let fields: Vec<&str> = line.splitn(6, ',').collect();
        match fields[0] {
            "72" => {
                assert_eq!(fields[1], "720");
                assert_eq!(fields[2], "presentation argument");
                lower_720 = true;
            }
            "5" => upper_value = Some(fields[3].to_string()),
            _ => {}
        }
    }
    assert!(lower_720, "lower row missing:\n{text}");

    // The emitted order must equal |X_5|! * |Q_5| recomputed from the
    // same seed.
    let f = PermissibleFn::linear(12);
    let approx = build_finite_action(&f, 5, 3).unwrap();
    let want = factorial(approx.x_size()) * approx.q_group.order();
    assert_eq!(upper_value.as_deref(), Some(want.to_string().as_str()));

    // Finite-range sandwich around the two factorial flavors. The
    // comparison constant is logged, not asserted against a formula.
    let mut lower_table = Vec::new();
    let mut upper_table = Vec::new();
    for n in 0..=5usize {
        lower_table.push(factorial(f.values()[n] as usize));
        if n < 2 {
            upper_table.push(factorial(f.values()[2 * n] as usize));
        } else {
            let a = build_finite_action(&f, n, 3).unwrap();
            upper_table.push(factorial(a.x_size()) * a.q_group.order());
        }
    }
    assert_eq!(
        compare_growth_witness(&lower_table, &upper_table, 1).unwrap(),
        CompareOutcome::HoldsOnRange { range: 5, c: 1 }
    );
    let mut logged_c = None;
    for c in 1..=40u64 {
        let top = 5 * c as usize;
        let bfac: Vec<BigUint> = (0..=top).map(|k| factorial(k + 1)).collect();
        if let CompareOutcome::HoldsOnRange { .. } =
            compare_growth_witness(&upper_table, &bfac, c).unwrap()
        {
            logged_c = Some(c);
            break;
        }
    }
    let c = logged_c.expect("a finite comparison constant on this range");

    pass(
        "10 bound table soundness",
        &format!("CSV rows reproduced exactly, sandwich holds with C = {c} on 0..=5"),
        t0,
        None,
    );
}

#[test]
fn a11_prime_splitting_and_crt_factorization() {
    let t0 = Instant::now();

    // Independent primality table for the brute-force side.
    let mut composite = vec![false; 1025];
    for i in 2..=32usize {
        if !composite[i] {
            let mut j = i * i;
            while j < composite.len() {
                composite[j] = true;
                j += i;
            }
        }
    }
    let prime = |n: u64| n >= 2 && !composite[n as usize];

    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut calls = 0u64;
    for m in 8..=512u64 {
        for _ in 0..200 {
            let q = rng.gen_range(1..=1000u64);
            let (p, r) = bertrand_split(m, q).unwrap();
            assert!(prime(p), "m={m} q={q}: p={p} not prime");
            assert!(4 * p >= m && p <= m, "m={m} q={q}: p={p} out of range");
            assert!(q % r == 0, "m={m} q={q}: r={r} does not divide q");
            assert!(r % p != 0, "m={m} q={q}: p={p} divides r={r}");
            assert!(
                (r as u128) * (r as u128) >= q as u128,
                "m={m} q={q}: r={r} below sqrt(q)"
            );
            calls += 1;
        }
    }

    // Coprime split of the modulus 12 matrix group, fully enumerated.
    let report = crt_split(3, 4, &[Int(0), Int(1)], 1, 0).unwrap();
    assert!(report.enumerated);
    assert!(report.bijective);
    assert_eq!(
        report.factor_orders,
        Some((BigUint::from(24u32), BigUint::from(48u32)))
    );
    assert_eq!(report.product_order, Some(BigUint::from(1152u32)));

    pass(
        "11 prime splitting",
        &format!("{calls} split postconditions brute-forced, modulus-12 factorization bijective"),
        t0,
        Some(Duration::from_secs(60)),
    );
}

#[test]
fn a12_normal_generation_identities_hold() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for i in 0..100 {
        let r = rng.gen_range(-6..=6i64);
        let ring = match rng.gen_range(0..3u8) {
            0 => Ring::Int,
            1 => Ring::modular(rng.gen_range(2..=50u64)).unwrap(),
            _ => Ring::prime([2, 3, 5, 7, 11, 13][rng.gen_range(0..6usize)]).unwrap(),
        };
        let mut pool = BTreeSet::new();
        while pool.len() < 6 {
            pool.insert(rng.gen_range(-20..=20i64));
        }
        let mut pts: Vec<Point> = pool.into_iter().map(Int).collect();
        pts.shuffle(&mut rng);
        assert!(
            normal_gen_identity_check(r, ring, &pts).unwrap(),
            "instance {i}: r={r}, ring {}",
            ring.name()
        );
    }
    pass(
        "12 normal generation",
        "100 random chained-commutator instances",
        t0,
        None,
    );
}
