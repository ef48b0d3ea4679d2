//! Permutation groups on finite point sets via stabilizer chains.
//!
//! A [`PermGroup`] is built from finitely supported generators by the
//! deterministic Schreier-Sims procedure. The base is chosen along a seeded
//! shuffle of the domain so that orders and membership certificates are
//! reproducible run to run; the seed is recorded on the group.
//!
//! Internally the chain works on dense permutations of interned point
//! indices. The public surface speaks [`FinSuppPerm`] and [`Point`].

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::perm::{FinSuppPerm, Point};

/// Largest point set a stabilizer chain will accept.
pub const POINT_LIMIT: usize = 10_000;

/// Dense permutation of `0..m`; `perm[i]` is the image of `i`.
#[derive(Clone, PartialEq, Eq, Debug)]
struct Dense(Vec<u32>);

impl Dense {
    fn identity(m: usize) -> Dense {
        Dense((0..m as u32).collect())
    }

    fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    fn apply(&self, i: u32) -> u32 {
        self.0[i as usize]
    }

    /// Apply `self`, then `other`.
    fn compose(&self, other: &Dense) -> Dense {
        Dense(self.0.iter().map(|&v| other.0[v as usize]).collect())
    }

    fn inverse(&self) -> Dense {
        let mut out = vec![0u32; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            out[v as usize] = i as u32;
        }
        Dense(out)
    }
}

/// One level of the chain: the orbit and transversal of `base_point` under
/// the generators that fix all shallower base points.
#[derive(Clone, Debug)]
struct Level {
    base_point: u32,
    gens: Vec<Dense>,
    /// Discovery order of the orbit.
    orbit: Vec<u32>,
    /// `transversal[p] = Some(u)` with `base_point . u = p`.
    transversal: Vec<Option<Dense>>,
}

impl Level {
    fn new(base_point: u32) -> Level {
        Level {
            base_point,
            gens: Vec::new(),
            orbit: Vec::new(),
            transversal: Vec::new(),
        }
    }

    /// Recompute orbit and transversal by BFS over the current generators.
    fn update(&mut self, m: usize) {
        self.orbit.clear();
        self.transversal = vec![None; m];
        self.orbit.push(self.base_point);
        self.transversal[self.base_point as usize] = Some(Dense::identity(m));
        let mut head = 0;
        while head < self.orbit.len() {
            let p = self.orbit[head];
            head += 1;
            let u = self.transversal[p as usize].clone().expect("orbit point has a rep");
            for g in &self.gens {
                let q = g.apply(p);
                if self.transversal[q as usize].is_none() {
                    self.transversal[q as usize] = Some(u.compose(g));
                    self.orbit.push(q);
                }
            }
        }
    }
}

/// A finite permutation group with a verified stabilizer chain.
#[derive(Clone, Debug)]
pub struct PermGroup {
    /// Sorted union of the generator supports.
    domain: Vec<Point>,
    gens: Vec<FinSuppPerm>,
    seed: u64,
    /// Base points as indices into `domain`, in chain order.
    base: Vec<u32>,
    levels: Vec<Level>,
}

impl PermGroup {
    /// Build the stabilizer chain for the group generated by `gens`.
    ///
    /// `seed` drives the shuffle that fixes the base-point preference order;
    /// the same generators and seed always produce the same chain.
    pub fn from_generators(gens: Vec<FinSuppPerm>, seed: u64) -> Result<PermGroup> {
        let mut dom: BTreeSet<Point> = BTreeSet::new();
        for g in &gens {
            dom.extend(g.support());
        }
        let domain: Vec<Point> = dom.into_iter().collect();
        if domain.len() > POINT_LIMIT {
            return Err(Error::PointLimitExceeded {
                points: domain.len(),
                limit: POINT_LIMIT,
            });
        }

        let mut group = PermGroup {
            domain,
            gens,
            seed,
            base: Vec::new(),
            levels: Vec::new(),
        };
        group.build_chain();
        Ok(group)
    }

    fn index_of(&self, p: Point) -> Option<u32> {
        self.domain.binary_search(&p).ok().map(|i| i as u32)
    }

    fn densify(&self, p: &FinSuppPerm) -> Option<Dense> {
        let mut d = Dense::identity(self.domain.len());
        for a in p.support() {
            let i = self.index_of(a)?;
            let j = self.index_of(p.apply(a))?;
            d.0[i as usize] = j;
        }
        Some(d)
    }

    fn build_chain(&mut self) {
        let m = self.domain.len();
        // Base preference order: a seeded shuffle of the domain indices.
        let mut order: Vec<u32> = (0..m as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        order.shuffle(&mut rng);

        let dense_gens: Vec<Dense> = self
            .gens
            .iter()
            .map(|g| self.densify(g).expect("generator support lies in the domain"))
            .collect();

        // Seed the base so every input generator moves some base point.
        for g in &dense_gens {
            if g.is_identity() {
                continue;
            }
            if self.base.iter().all(|&b| g.apply(b) == b) {
                let b = *order
                    .iter()
                    .find(|&&p| g.apply(p) != p)
                    .expect("non-identity permutation moves a point");
                self.base.push(b);
                self.levels.push(Level::new(b));
            }
        }
        // Distribute generators: level i takes those fixing base[..i].
        for g in dense_gens {
            if g.is_identity() {
                continue;
            }
            let fixed = self.fixed_prefix(&g);
            for l in 0..=fixed.min(self.levels.len().saturating_sub(1)) {
                if !self.levels[l].gens.contains(&g) {
                    self.levels[l].gens.push(g.clone());
                }
            }
        }

        if self.levels.is_empty() {
            return;
        }

        for lvl in &mut self.levels {
            lvl.update(m);
        }

        // Bottom-up sweep: on a failed Schreier generator, record the
        // residue and jump back down to the deepest level it touched.
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let li = i as usize;
            self.levels[li].update(m);
            match self.find_failure(li) {
                None => i -= 1,
                Some(h) => {
                    let fixed = self.fixed_prefix(&h);
                    let j = if fixed >= self.levels.len() {
                        // The residue fixes every base point: extend the base.
                        let b = *order
                            .iter()
                            .find(|&&p| h.apply(p) != p)
                            .expect("residue is not the identity");
                        self.base.push(b);
                        let mut lvl = Level::new(b);
                        lvl.update(m);
                        self.levels.push(lvl);
                        self.levels.len() - 1
                    } else {
                        fixed
                    };
                    for l in (li + 1)..=j {
                        if !self.levels[l].gens.contains(&h) {
                            self.levels[l].gens.push(h.clone());
                        }
                    }
                    for l in (li + 1)..=j {
                        self.levels[l].update(m);
                    }
                    i = j as isize;
                }
            }
        }
    }

    /// Number of leading base points fixed by `g`.
    fn fixed_prefix(&self, g: &Dense) -> usize {
        let mut k = 0;
        while k < self.base.len() && g.apply(self.base[k]) == self.base[k] {
            k += 1;
        }
        k
    }

    /// Scan the Schreier generators of level `i`; return the first residue
    /// that fails to sift to the identity through the deeper levels.
    fn find_failure(&self, i: usize) -> Option<Dense> {
        let lvl = &self.levels[i];
        for &p in &lvl.orbit {
            let u = lvl.transversal[p as usize].as_ref().expect("orbit rep");
            for s in &lvl.gens {
                let q = s.apply(p);
                let uq = lvl.transversal[q as usize]
                    .as_ref()
                    .expect("orbit is closed under level generators");
                let schreier = u.compose(s).compose(&uq.inverse());
                if schreier.is_identity() {
                    continue;
                }
                let (residue, _) = self.strip(schreier, i + 1);
                if !residue.is_identity() {
                    return Some(residue);
                }
            }
        }
        None
    }

    /// Sift `g` through levels `from..`; returns the residue and the level
    /// at which sifting stopped (`levels.len()` if it ran through).
    fn strip(&self, mut g: Dense, from: usize) -> (Dense, usize) {
        for l in from..self.levels.len() {
            let lvl = &self.levels[l];
            let image = g.apply(lvl.base_point);
            match lvl.transversal[image as usize].as_ref() {
                None => return (g, l),
                Some(u) => g = g.compose(&u.inverse()),
            }
        }
        (g, self.levels.len())
    }

    /// Order of the group: the product of the orbit sizes along the chain.
    pub fn order(&self) -> BigUint {
        let mut n = BigUint::one();
        for lvl in &self.levels {
            n *= BigUint::from(lvl.orbit.len());
        }
        n
    }

    /// Membership test by sifting.
    pub fn contains(&self, p: &FinSuppPerm) -> bool {
        match self.densify(p) {
            // A permutation moving points outside the domain is not a member.
            None => false,
            Some(d) => {
                let (residue, _) = self.strip(d, 0);
                residue.is_identity()
            }
        }
    }

    /// The recorded base, as points.
    pub fn base_points(&self) -> Vec<Point> {
        self.base.iter().map(|&i| self.domain[i as usize]).collect()
    }

    /// Seed used for base selection.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sorted union of the generator supports.
    pub fn domain(&self) -> &[Point] {
        &self.domain
    }

    pub fn generators(&self) -> &[FinSuppPerm] {
        &self.gens
    }

    /// Enumerate all elements by closure, failing once `cap` is exceeded.
    ///
    /// Deterministic: the result is sorted. Intended for small groups only;
    /// use [`PermGroup::order`] for counting.
    pub fn elements(&self, cap: usize) -> Result<Vec<FinSuppPerm>> {
        let mut seen: BTreeSet<FinSuppPerm> = BTreeSet::new();
        seen.insert(FinSuppPerm::identity());
        let mut frontier = vec![FinSuppPerm::identity()];
        while let Some(x) = frontier.pop() {
            for g in &self.gens {
                let y = x.compose(g);
                if seen.insert(y.clone()) {
                    if seen.len() > cap {
                        return Err(Error::CapExceeded {
                            what: "element enumeration".into(),
                            cap,
                        });
                    }
                    frontier.push(y);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }
}
