//! Coset enumeration over the trivial subgroup: counts the cosets of a
//! finitely presented group, i.e. its order when finite.
//!
//! The table is indexed by cosets and columns of the doubled alphabet
//! (`Letter::index`), with the mirror invariant `t[c][x] = d` iff
//! `t[d][x^-1] = c` maintained throughout. Coincidences are resolved by
//! a union-find merge that keeps the smaller index and transplants the
//! dead row's entries, queueing any conflicts as further coincidences.
//!
//! Enumeration is deliberately single threaded: the definition order
//! determines the coset numbering, and a fixed order keeps runs
//! reproducible.

use crate::error::{Error, Result};
use crate::presentations::Presentation;
use crate::word::{FreeWord, Letter};

/// How an enumeration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcStatus {
    /// Closed with more than one coset; the count is the group order.
    Complete,
    /// Closed with a single coset: the presented group is trivial.
    Collapsed,
    /// Hit the coset cap before closing; counts are not meaningful.
    Aborted,
}

/// Definition strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcStrategy {
    /// Relator tracing with gap filling per coset, plus a lookahead pass
    /// under cap pressure. The default.
    Hlt,
    /// Define one entry at a time and saturate deductions between
    /// definitions. Slower, useful as an independent cross-check.
    Felsch,
}

/// A closed (or abandoned) coset table, compacted to live cosets.
#[derive(Clone, Debug)]
pub struct CosetTable {
    rows: Vec<Vec<Option<usize>>>,
    status: TcStatus,
    defined_total: usize,
}

impl CosetTable {
    pub fn status(&self) -> TcStatus {
        self.status
    }

    /// Live cosets. Equals the group order when the status is
    /// `Complete` or `Collapsed`.
    pub fn coset_count(&self) -> usize {
        self.rows.len()
    }

    /// Total cosets ever defined, including ones later merged away.
    pub fn defined_total(&self) -> usize {
        self.defined_total
    }

    /// The coset reached from `c` by one letter, if that entry is
    /// defined (aborted tables have gaps).
    pub fn apply(&self, c: usize, l: Letter) -> Option<usize> {
        self.rows.get(c).and_then(|row| row[l.index()])
    }

    /// Traces a word through the table from coset `c`.
    pub fn trace(&self, c: usize, w: &FreeWord) -> Option<usize> {
        w.letters().iter().try_fold(c, |acc, &l| self.apply(acc, l))
    }
}

/// Working state during enumeration. Rows are append-only; merged
/// cosets stay allocated but are skipped through the union-find.
struct Enumerator {
    cols: usize,
    cap: usize,
    table: Vec<Vec<Option<usize>>>,
    parent: Vec<usize>,
    live: usize,
}

enum Scan {
    /// Scan finished; the flag records whether anything was written.
    Done(bool),
    /// A definition was needed but the cap is reached.
    NeedSpace,
}

impl Enumerator {
    fn new(cols: usize, cap: usize) -> Enumerator {
        Enumerator {
            cols,
            cap,
            table: vec![vec![None; cols]],
            parent: vec![0],
            live: 1,
        }
    }

    fn rep(&mut self, mut c: usize) -> usize {
        let mut root = c;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[c] != root {
            let next = self.parent[c];
            self.parent[c] = root;
            c = next;
        }
        root
    }

    fn is_live(&self, c: usize) -> bool {
        self.parent[c] == c
    }

    /// Allocates a new coset as the image of `c` under column `x`, or
    /// reports cap pressure.
    fn define(&mut self, c: usize, x: usize) -> Option<usize> {
        if self.live >= self.cap {
            return None;
        }
        let d = self.table.len();
        self.table.push(vec![None; self.cols]);
        self.parent.push(d);
        self.live += 1;
        self.table[c][x] = Some(d);
        self.table[d][x ^ 1] = Some(c);
        Some(d)
    }

    fn merge(&mut self, a: usize, b: usize, queue: &mut Vec<usize>) {
        let a = self.rep(a);
        let b = self.rep(b);
        if a == b {
            return;
        }
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        self.parent[drop] = keep;
        self.live -= 1;
        queue.push(drop);
    }

    /// Identifies cosets `a` and `b`, transplanting every entry of each
    /// dead row onto its surviving representative. Conflicting entries
    /// queue further merges; afterwards no entry points at a dead coset.
    fn coincide(&mut self, a: usize, b: usize) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut qi = 0;
        while qi < queue.len() {
            let dead = queue[qi];
            qi += 1;
            for x in 0..self.cols {
                let Some(f) = self.table[dead][x] else {
                    continue;
                };
                debug_assert_eq!(self.table[f][x ^ 1], Some(dead));
                self.table[f][x ^ 1] = None;
                self.table[dead][x] = None;
                let e1 = self.rep(dead);
                let f1 = self.rep(f);
                if let Some(g) = self.table[e1][x] {
                    self.merge(f1, g, &mut queue);
                } else if let Some(g) = self.table[f1][x ^ 1] {
                    self.merge(e1, g, &mut queue);
                } else {
                    self.table[e1][x] = Some(f1);
                    self.table[f1][x ^ 1] = Some(e1);
                }
            }
        }
    }

    /// Scans a relator starting at coset `c` from both ends. A gap of
    /// one becomes a deduction, a closed mismatched scan a coincidence,
    /// and a wider gap is filled with new cosets when `fill` is set.
    fn scan(&mut self, c: usize, rel: &[usize], fill: bool) -> Scan {
        let mut f = c;
        let mut i = 0;
        let mut b = c;
        let mut j = rel.len();
        let mut changed = false;
        loop {
            while i < j {
                match self.table[f][rel[i]] {
                    Some(d) => {
                        f = d;
                        i += 1;
                    }
                    None => break,
                }
            }
            if i == j {
                if f != b {
                    self.coincide(f, b);
                    changed = true;
                }
                return Scan::Done(changed);
            }
            while j > i {
                match self.table[b][rel[j - 1] ^ 1] {
                    Some(d) => {
                        b = d;
                        j -= 1;
                    }
                    None => break,
                }
            }
            if j == i {
                if f != b {
                    self.coincide(f, b);
                    changed = true;
                }
                return Scan::Done(changed);
            }
            if j == i + 1 {
                self.table[f][rel[i]] = Some(b);
                self.table[b][rel[i] ^ 1] = Some(f);
                return Scan::Done(true);
            }
            if !fill {
                return Scan::Done(changed);
            }
            match self.define(f, rel[i]) {
                Some(_) => changed = true,
                None => return Scan::NeedSpace,
            }
        }
    }

    /// Rescans everything without defining, hoping coincidences free
    /// space. Returns whether the live count dropped.
    fn lookahead(&mut self, rels: &[Vec<usize>]) -> bool {
        let before = self.live;
        loop {
            let mut changed = false;
            for c in 0..self.parent.len() {
                if !self.is_live(c) {
                    continue;
                }
                for rel in rels {
                    if !self.is_live(c) {
                        break;
                    }
                    if let Scan::Done(ch) = self.scan(c, rel, false) {
                        changed |= ch;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.live < before
    }

    /// Scans all relators at all live cosets until nothing changes.
    fn saturate(&mut self, rels: &[Vec<usize>]) {
        loop {
            let mut changed = false;
            for c in 0..self.parent.len() {
                if !self.is_live(c) {
                    continue;
                }
                for rel in rels {
                    if !self.is_live(c) {
                        break;
                    }
                    if let Scan::Done(ch) = self.scan(c, rel, false) {
                        changed |= ch;
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn run_hlt(&mut self, rels: &[Vec<usize>]) -> TcStatus {
        let mut c = 0;
        'cosets: while c < self.parent.len() {
            if !self.is_live(c) {
                c += 1;
                continue;
            }
            let mut ri = 0;
            while ri < rels.len() {
                if !self.is_live(c) {
                    c += 1;
                    continue 'cosets;
                }
                match self.scan(c, &rels[ri], true) {
                    Scan::Done(_) => ri += 1,
                    Scan::NeedSpace => {
                        if !self.lookahead(rels) {
                            return TcStatus::Aborted;
                        }
                    }
                }
            }
            let mut x = 0;
            while x < self.cols {
                if !self.is_live(c) {
                    c += 1;
                    continue 'cosets;
                }
                if self.table[c][x].is_some() {
                    x += 1;
                } else if self.define(c, x).is_some() {
                    x += 1;
                } else if !self.lookahead(rels) {
                    return TcStatus::Aborted;
                }
            }
            c += 1;
        }
        if self.live == 1 {
            TcStatus::Collapsed
        } else {
            TcStatus::Complete
        }
    }

    fn run_felsch(&mut self, rels: &[Vec<usize>]) -> TcStatus {
        loop {
            self.saturate(rels);
            let mut target = None;
            'find: for c in 0..self.parent.len() {
                if !self.is_live(c) {
                    continue;
                }
                for x in 0..self.cols {
                    if self.table[c][x].is_none() {
                        target = Some((c, x));
                        break 'find;
                    }
                }
            }
            let Some((c, x)) = target else {
                return if self.live == 1 {
                    TcStatus::Collapsed
                } else {
                    TcStatus::Complete
                };
            };
            if self.define(c, x).is_none() {
                return TcStatus::Aborted;
            }
        }
    }

    /// Renumbers live cosets in increasing order and checks the closed
    /// table: full rows, mirror consistency, and every relator tracing
    /// back to its start coset. Skipped (except mirroring) on aborts.
    fn finish(self, rels: &[Vec<usize>], status: TcStatus) -> Result<CosetTable> {
        let defined_total = self.table.len();
        let mut map = vec![usize::MAX; self.parent.len()];
        let mut live_order = Vec::new();
        for c in 0..self.parent.len() {
            if self.is_live(c) {
                map[c] = live_order.len();
                live_order.push(c);
            }
        }
        let mut rows = Vec::with_capacity(live_order.len());
        for &c in &live_order {
            let row: Vec<Option<usize>> = (0..self.cols)
                .map(|x| {
                    self.table[c][x].map(|d| {
                        debug_assert!(self.is_live(d));
                        map[d]
                    })
                })
                .collect();
            rows.push(row);
        }
        for (c, row) in rows.iter().enumerate() {
            for (x, entry) in row.iter().enumerate() {
                let Some(d) = *entry else {
                    if status == TcStatus::Aborted {
                        continue;
                    }
                    return Err(Error::Internal(format!(
                        "closed table has an undefined entry at coset {c}"
                    )));
                };
                if rows[d][x ^ 1] != Some(c) {
                    return Err(Error::Internal(format!(
                        "mirror entry mismatch at coset {c}, column {x}"
                    )));
                }
            }
        }
        if status != TcStatus::Aborted {
            for rel in rels {
                for c in 0..rows.len() {
                    let end = rel.iter().try_fold(c, |acc, &x| rows[acc][x]);
                    if end != Some(c) {
                        return Err(Error::Internal(format!(
                            "relator does not close at coset {c}"
                        )));
                    }
                }
            }
        }
        Ok(CosetTable {
            rows,
            status,
            defined_total,
        })
    }
}

/// Enumerates the cosets of the trivial subgroup with the default
/// strategy. `cap` bounds the number of simultaneously live cosets;
/// hitting it yields an `Aborted` table rather than an error.
pub fn todd_coxeter(pres: &Presentation, cap: usize) -> Result<CosetTable> {
    todd_coxeter_with(pres, cap, TcStrategy::Hlt)
}

pub fn todd_coxeter_with(
    pres: &Presentation,
    cap: usize,
    strategy: TcStrategy,
) -> Result<CosetTable> {
    if cap == 0 {
        return Err(Error::Precondition("coset cap must be at least 1".into()));
    }
    let rels: Vec<Vec<usize>> = pres
        .relators
        .iter()
        .map(|r| r.letters().iter().map(|l| l.index()).collect())
        .collect();
    let mut e = Enumerator::new(2 * pres.rank(), cap);
    let status = match strategy {
        TcStrategy::Hlt => e.run_hlt(&rels),
        TcStrategy::Felsch => e.run_felsch(&rels),
    };
    e.finish(&rels, status)
}
