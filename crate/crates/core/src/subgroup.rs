//! Finite-index subgroups of `PSL2(Z)` as permutation actions on cosets.
//!
//! A subgroup `K` is encoded by the right action of the generators
//! `S = (0 -1; 1 0)` and `U = (1 -1; 1 0)` on the right cosets `K\PSL2(Z)`,
//! with coset `0` the subgroup itself. Labels are normalised by a
//! breadth-first walk from coset `0` (trying `S` before `U`), so two encodings
//! describe the same subgroup iff they are equal.
//!
//! Oriented Farey edges are in bijection with group elements (`g ↦ g·DOE`),
//! so `K`-orbits of oriented edges are cosets, unoriented orbits are pairs
//! `{c, c·S}`, triangle orbits are `U`-orbits and cusp orbits are `T`-cycles.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::farey::{oriented_edge_to_element, FareyEdge, FareyVertex, Letter, Moebius, OrientedEdge};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubgroupError {
    #[error("permutations have different degrees ({0} and {1})")]
    DegreeMismatch(usize, usize),
    #[error("degree must be positive")]
    EmptyDegree,
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("perm_s does not square to the identity")]
    Order2Violation,
    #[error("perm_u does not cube to the identity")]
    Order3Violation,
    #[error("the generated action is not transitive")]
    NotTransitive,
    #[error("congruence level must be at least 1")]
    InvalidLevel,
}

/// A finite-index subgroup of `PSL2(Z)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    s: Vec<u32>,
    u: Vec<u32>,
}

impl std::fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subgroup(index {}, s={:?}, u={:?})", self.index(), self.s, self.u)
    }
}

/// An unoriented `K`-orbit of Farey edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeOrbit {
    pub id: usize,
    pub representative: FareyEdge,
}

fn is_permutation(p: &[u32]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        match seen.get_mut(x as usize) {
            Some(slot) if !*slot => *slot = true,
            _ => return false,
        }
    }
    true
}

impl Subgroup {
    pub fn from_permutations(perm_s: Vec<u32>, perm_u: Vec<u32>) -> Result<Self, SubgroupError> {
        let n = perm_s.len();
        if n != perm_u.len() {
            return Err(SubgroupError::DegreeMismatch(n, perm_u.len()));
        }
        if n == 0 {
            return Err(SubgroupError::EmptyDegree);
        }
        if !is_permutation(&perm_s) || !is_permutation(&perm_u) {
            return Err(SubgroupError::NotAPermutation(n));
        }
        if (0..n).any(|i| perm_s[perm_s[i] as usize] as usize != i) {
            return Err(SubgroupError::Order2Violation);
        }
        if (0..n).any(|i| perm_u[perm_u[perm_u[i] as usize] as usize] as usize != i) {
            return Err(SubgroupError::Order3Violation);
        }
        Self::relabel(&perm_s, &perm_u, 0).ok_or(SubgroupError::NotTransitive)
    }

    /// Breadth-first relabelling from `base`; `None` if not transitive.
    fn relabel(s: &[u32], u: &[u32], base: usize) -> Option<Self> {
        let n = s.len();
        let mut label = vec![u32::MAX; n];
        let mut order = Vec::with_capacity(n);
        label[base] = 0;
        order.push(base);
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for next in [s[c] as usize, u[c] as usize] {
                if label[next] == u32::MAX {
                    label[next] = order.len() as u32;
                    order.push(next);
                }
            }
        }
        if order.len() != n {
            return None;
        }
        let s2 = order.iter().map(|&c| label[s[c] as usize]).collect();
        let u2 = order.iter().map(|&c| label[u[c] as usize]).collect();
        Some(Subgroup { s: s2, u: u2 })
    }

    /// `PSL2(Z)` itself.
    pub fn full() -> Self {
        Subgroup { s: vec![0], u: vec![0] }
    }

    /// The commutator subgroup: the once-punctured torus group of index six.
    pub fn commutator() -> Self {
        // Cosets are Z/2 × Z/3 via the abelianisation S ↦ (1,0), U ↦ (0,1).
        let idx = |a: u32, b: u32| (a % 2) + 2 * (b % 3);
        let mut s = vec![0; 6];
        let mut u = vec![0; 6];
        for a in 0..2 {
            for b in 0..3 {
                s[idx(a, b) as usize] = idx(a + 1, b);
                u[idx(a, b) as usize] = idx(a, b + 1);
            }
        }
        Self::relabel(&s, &u, 0).expect("abelianisation action is transitive")
    }

    /// The principal congruence subgroup of level `n`, acting on `PSL2(Z/n)`.
    pub fn principal_congruence(n: u32) -> Result<Self, SubgroupError> {
        if n == 0 {
            return Err(SubgroupError::InvalidLevel);
        }
        if n == 1 {
            return Ok(Self::full());
        }
        let n64 = n as i64;
        let canon = |m: [i64; 4]| -> [i64; 4] {
            let m = m.map(|x| x.rem_euclid(n64));
            let neg = m.map(|x| (-x).rem_euclid(n64));
            m.min(neg)
        };
        let mul = |m: [i64; 4], g: [i64; 4]| -> [i64; 4] {
            canon([
                m[0] * g[0] + m[1] * g[2],
                m[0] * g[1] + m[1] * g[3],
                m[2] * g[0] + m[3] * g[2],
                m[2] * g[1] + m[3] * g[3],
            ])
        };
        let gs = [0, -1, 1, 0];
        let gu = [1, -1, 1, 0];
        let mut index: HashMap<[i64; 4], u32> = HashMap::new();
        let mut elems = vec![canon([1, 0, 0, 1])];
        index.insert(elems[0], 0);
        let mut head = 0;
        while head < elems.len() {
            let m = elems[head];
            head += 1;
            for g in [gs, gu] {
                let x = mul(m, g);
                if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(x) {
                    slot.insert(elems.len() as u32);
                    elems.push(x);
                }
            }
        }
        let s = elems.iter().map(|&m| index[&mul(m, gs)]).collect::<Vec<_>>();
        let u = elems.iter().map(|&m| index[&mul(m, gu)]).collect::<Vec<_>>();
        Ok(Self::relabel(&s, &u, 0).expect("PSL2(Z/n) is generated by S and U"))
    }

    pub fn index(&self) -> usize {
        self.s.len()
    }

    pub fn perm_s(&self) -> &[u32] {
        &self.s
    }

    pub fn perm_u(&self) -> &[u32] {
        &self.u
    }

    /// Action of `T = U·S`.
    pub fn perm_t(&self) -> Vec<u32> {
        self.u.iter().map(|&c| self.s[c as usize]).collect()
    }

    fn t_pow(t: &[u32], c: usize, n: &BigInt) -> usize {
        let mut cycle = vec![c];
        let mut x = t[c] as usize;
        while x != c {
            cycle.push(x);
            x = t[x] as usize;
        }
        let len = BigInt::from(cycle.len());
        let k = n.mod_floor(&len).to_usize().expect("reduced exponent is small");
        cycle[k]
    }

    /// The coset `K·g`.
    pub fn coset_of(&self, g: &Moebius) -> usize {
        self.act(0, &g.letters())
    }

    /// Right action of a letter word on coset `c`.
    pub fn act(&self, mut c: usize, letters: &[Letter]) -> usize {
        let t = self.perm_t();
        for l in letters {
            c = match l {
                Letter::S => self.s[c] as usize,
                Letter::T(n) => Self::t_pow(&t, c, n),
            };
        }
        c
    }

    pub fn contains(&self, g: &Moebius) -> bool {
        self.coset_of(g) == 0
    }

    /// `K₁ ∩ K₂` via the diagonal action on pairs of cosets.
    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(0u32, 0u32)];
        index.insert((0, 0), 0);
        let mut s = Vec::new();
        let mut u = Vec::new();
        let mut head = 0;
        while head < pairs.len() {
            let (a, b) = pairs[head];
            head += 1;
            for (perm_a, perm_b, out) in [(&self.s, &other.s, &mut s), (&self.u, &other.u, &mut u)] {
                let next = (perm_a[a as usize], perm_b[b as usize]);
                let id = *index.entry(next).or_insert_with(|| {
                    pairs.push(next);
                    (pairs.len() - 1) as u32
                });
                out.push(id);
            }
        }
        Self::relabel(&s, &u, 0).expect("orbit of (0,0) is transitive")
    }

    /// `g⁻¹ K g`: the same action re-based at the coset `K·g`.
    pub fn conjugate(&self, g: &Moebius) -> Subgroup {
        Self::relabel(&self.s, &self.u, self.coset_of(g)).expect("transitive")
    }

    pub fn is_normal(&self) -> bool {
        self.conjugate(&Moebius::s()) == *self && self.conjugate(&Moebius::u()) == *self
    }

    /// No elliptic elements: `S` and `U` act without fixed points.
    pub fn is_torsion_free(&self) -> bool {
        (0..self.index()).all(|c| self.s[c] as usize != c && self.u[c] as usize != c)
    }

    /// `self` when torsion-free, otherwise `self ∩ G` (G torsion-free).
    pub fn torsion_free_core(&self) -> Subgroup {
        if self.is_torsion_free() {
            self.clone()
        } else {
            self.intersect(&Self::commutator())
        }
    }

    /// One element per coset, found along the breadth-first spanning tree.
    pub fn coset_representatives(&self) -> Vec<Moebius> {
        let n = self.index();
        let mut reps: Vec<Option<Moebius>> = vec![None; n];
        reps[0] = Some(Moebius::identity());
        let mut queue = VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            let g = reps[c].clone().expect("visited");
            for (perm, gen) in [(&self.s, Moebius::s()), (&self.u, Moebius::u())] {
                let next = perm[c] as usize;
                if reps[next].is_none() {
                    reps[next] = Some(g.mul(&gen));
                    queue.push_back(next);
                }
            }
        }
        reps.into_iter().map(|g| g.expect("transitive")).collect()
    }

    /// Schreier generators `r_c · x · r_{c·x}⁻¹` for `x ∈ {S, U}`.
    pub fn generators(&self) -> Vec<Moebius> {
        let reps = self.coset_representatives();
        let mut gens = Vec::new();
        for c in 0..self.index() {
            for (perm, gen) in [(&self.s, Moebius::s()), (&self.u, Moebius::u())] {
                let g = reps[c].mul(&gen).mul(&reps[perm[c] as usize].inverse());
                if !g.is_identity() && !gens.contains(&g) {
                    gens.push(g);
                }
            }
        }
        gens
    }

    /// `other ≤ self`.
    pub fn contains_subgroup(&self, other: &Subgroup) -> bool {
        other.index().is_multiple_of(self.index()) && other.generators().iter().all(|g| self.contains(g))
    }

    /// Orbits of `T` on cosets: one per cusp of `D/K`.
    pub fn cusp_count(&self) -> usize {
        let t = self.perm_t();
        count_cycles(&t)
    }

    /// Canonical cusp-orbit label of a vertex: the least coset in its `T`-cycle.
    pub fn cusp_key(&self, x: &FareyVertex) -> usize {
        let (g, _) = crate::farey::edge_frame(&OrientedEdge {
            tail: x.clone(),
            head: if x.is_infinity() { FareyVertex::int(0) } else { FareyVertex::infinity() },
        });
        let t = self.perm_t();
        let c = self.coset_of(&g);
        let mut best = c;
        let mut y = t[c] as usize;
        while y != c {
            best = best.min(y);
            y = t[y] as usize;
        }
        best
    }

    /// Labels of all cusp orbits, in increasing order, as produced by
    /// [`Subgroup::cusp_key`].
    pub fn cusp_keys(&self) -> Vec<usize> {
        let t = self.perm_t();
        let mut out = Vec::new();
        let mut seen = vec![false; t.len()];
        for c in 0..t.len() {
            if !seen[c] {
                out.push(c);
                let mut x = c;
                while !seen[x] {
                    seen[x] = true;
                    x = t[x] as usize;
                }
            }
        }
        out
    }

    /// Number of `K`-orbits of triangles of the Farey tesselation.
    pub fn triangle_orbit_count(&self) -> usize {
        count_cycles(&self.u)
    }

    fn edge_orbit_minima(&self) -> Vec<usize> {
        (0..self.index()).filter(|&c| c <= self.s[c] as usize).collect()
    }

    /// Number of unoriented `K`-orbits of Farey edges.
    pub fn edge_orbit_count(&self) -> usize {
        self.edge_orbit_minima().len()
    }

    /// The `K`-orbit of a Farey edge, with a stable id (rank of the orbit's
    /// least coset) and a canonical representative.
    pub fn edge_orbit(&self, e: &FareyEdge) -> EdgeOrbit {
        let g = oriented_edge_to_element(&e.oriented()).expect("Farey edge");
        let c = self.coset_of(&g);
        let m = c.min(self.s[c] as usize);
        let minima = self.edge_orbit_minima();
        let id = minima.binary_search(&m).expect("minimum is listed");
        let rep = self.coset_representatives()[m].apply_edge(&OrientedEdge::standard());
        EdgeOrbit {
            id,
            representative: FareyEdge::new(rep.tail, rep.head).expect("image of a Farey edge"),
        }
    }

    /// A connected fundamental domain of Farey triangles, one per `K`-orbit,
    /// grown breadth-first in the dual tree from the triangle `(0/1, 1/0, 1/1)`.
    /// Each triangle is returned as `g·(0, ∞, 1)` together with `g`.
    pub fn triangle_transversal_elements(&self) -> Vec<Moebius> {
        let orbit_of = |c: usize| -> usize {
            let (a, b) = (self.u[c] as usize, self.u[self.u[c] as usize] as usize);
            c.min(a).min(b)
        };
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::from([Moebius::identity()]);
        seen.insert(orbit_of(0));
        let target = self.triangle_orbit_count();
        let u = Moebius::u();
        let s = Moebius::s();
        while let Some(g) = queue.pop_front() {
            out.push(g.clone());
            if out.len() == target {
                break;
            }
            let mut side = g.clone();
            for _ in 0..3 {
                let nb = side.mul(&s);
                let o = orbit_of(self.coset_of(&nb));
                if seen.insert(o) {
                    queue.push_back(nb);
                }
                side = side.mul(&u);
            }
        }
        out
    }

    pub fn triangle_transversal(&self) -> Vec<[FareyVertex; 3]> {
        let base = [FareyVertex::int(0), FareyVertex::infinity(), FareyVertex::int(1)];
        self.triangle_transversal_elements()
            .iter()
            .map(|g| base.clone().map(|x| g.apply(&x)))
            .collect()
    }

    /// A random transitive torsion-free subgroup of the given index, which
    /// must be a positive multiple of six.
    pub fn random_torsion_free<R: Rng + ?Sized>(index: usize, rng: &mut R) -> Subgroup {
        assert!(index > 0 && index.is_multiple_of(6), "torsion-free index is a multiple of 6");
        loop {
            let mut pts: Vec<u32> = (0..index as u32).collect();
            pts.shuffle(rng);
            let mut s = vec![0; index];
            for pair in pts.chunks(2) {
                s[pair[0] as usize] = pair[1];
                s[pair[1] as usize] = pair[0];
            }
            pts.shuffle(rng);
            let mut u = vec![0; index];
            for tri in pts.chunks(3) {
                u[tri[0] as usize] = tri[1];
                u[tri[1] as usize] = tri[2];
                u[tri[2] as usize] = tri[0];
            }
            if let Some(k) = Self::relabel(&s, &u, 0) {
                return k;
            }
        }
    }

    /// A random transitive subgroup of small index, torsion allowed.
    pub fn random<R: Rng + ?Sized>(index: usize, rng: &mut R) -> Subgroup {
        assert!(index > 0);
        loop {
            let mut pts: Vec<u32> = (0..index as u32).collect();
            pts.shuffle(rng);
            let mut s: Vec<u32> = (0..index as u32).collect();
            let pairs = rng.gen_range(0..=index / 2);
            for k in 0..pairs {
                let (a, b) = (pts[2 * k], pts[2 * k + 1]);
                s[a as usize] = b;
                s[b as usize] = a;
            }
            pts.shuffle(rng);
            let mut u: Vec<u32> = (0..index as u32).collect();
            let triples = rng.gen_range(0..=index / 3);
            for k in 0..triples {
                let (a, b, c) = (pts[3 * k], pts[3 * k + 1], pts[3 * k + 2]);
                u[a as usize] = b;
                u[b as usize] = c;
                u[c as usize] = a;
            }
            if let Some(k) = Self::relabel(&s, &u, 0) {
                return k;
            }
        }
    }
}

fn count_cycles(p: &[u32]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut n = 0;
    for i in 0..p.len() {
        if !seen[i] {
            n += 1;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = p[j] as usize;
            }
        }
    }
    n
}
