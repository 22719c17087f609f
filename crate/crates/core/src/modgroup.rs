//! The baseleaf-preserving modular group at the combinatorial level.
//!
//! An element is written `ω∘γ`: a Möbius element `γ` moving the DOE of the
//! Farey tesselation, followed by a geometric word `ω` of equivariant
//! Whitehead moves. Elements are compared by their image tesselation with
//! DOE, which determines them.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::farey::{oriented_edge_to_element, FareyVertex, Moebius, OrientedEdge};
use crate::structures::{edge_key, flip_sequence, DecoratedStructure, StructureError, TlcTesselation};
use crate::subgroup::Subgroup;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModgroupError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("malformed relation instance: {0}")]
    MalformedInstance(String),
    #[error("word is not geometric at position {0}")]
    NotGeometric(usize),
    #[error("structure must be decorated over the Farey tesselation")]
    NotFarey,
}

/// The `group`-equivariant Whitehead move along `edge` of `source`.
#[derive(Debug, Clone)]
pub struct WhiteheadGenerator {
    pub source: TlcTesselation,
    pub group: Subgroup,
    pub edge: OrientedEdge,
}

impl WhiteheadGenerator {
    pub fn new(source: TlcTesselation, group: Subgroup, edge: OrientedEdge) -> Result<Self, ModgroupError> {
        if !source.contains_edge(&edge) {
            return Err(StructureError::NotAnEdge(edge).into());
        }
        Ok(WhiteheadGenerator { source, group, edge })
    }

    pub fn target(&self) -> Result<TlcTesselation, ModgroupError> {
        Ok(whitehead_move(&self.source, &self.group, &self.edge)?)
    }
}

pub fn whitehead_move(t: &TlcTesselation, k: &Subgroup, e: &OrientedEdge) -> Result<TlcTesselation, StructureError> {
    t.whitehead_move(k, e)
}

/// `ω∘γ` with `γ = base`.
#[derive(Debug, Clone)]
pub struct ModularWord {
    pub base: Moebius,
    pub word: Vec<WhiteheadGenerator>,
}

/// The Farey tesselation with DOE `γ·(0/1 → 1/0)`.
pub fn based_farey(base: &Moebius) -> TlcTesselation {
    TlcTesselation::farey(&Subgroup::full())
        .with_doe(base.apply_edge(&OrientedEdge::standard()))
        .expect("Möbius images of Farey edges are Farey edges")
}

impl ModularWord {
    pub fn identity() -> Self {
        ModularWord { base: Moebius::identity(), word: Vec::new() }
    }

    /// Builds the geometric word performing `flips` in turn, starting from `γ·τ*`.
    pub fn from_flips(base: Moebius, flips: &[(Subgroup, OrientedEdge)]) -> Result<Self, ModgroupError> {
        let mut cur = based_farey(&base);
        let mut word = Vec::with_capacity(flips.len());
        for (k, e) in flips {
            let g = WhiteheadGenerator::new(cur, k.clone(), e.clone())?;
            cur = g.target()?;
            word.push(g);
        }
        Ok(ModularWord { base, word })
    }

    /// The flips of the word as `(group, edge)` pairs.
    pub fn flips(&self) -> Vec<(Subgroup, OrientedEdge)> {
        self.word.iter().map(|g| (g.group.clone(), g.edge.clone())).collect()
    }

    /// The image of the Farey tesselation with its DOE.
    pub fn image(&self) -> Result<TlcTesselation, ModgroupError> {
        match self.word.last() {
            Some(g) => g.target(),
            None => Ok(based_farey(&self.base)),
        }
    }

    pub fn is_geometric(&self) -> bool {
        match self.word.first() {
            None => true,
            Some(g) => {
                matches!(g.source.same_with_doe(&based_farey(&self.base)), Ok(true)) && is_geometric(&self.word)
            }
        }
    }

    /// This word followed by more flips.
    pub fn then(&self, flips: &[(Subgroup, OrientedEdge)]) -> Result<Self, ModgroupError> {
        let mut all = self.flips();
        all.extend_from_slice(flips);
        ModularWord::from_flips(self.base.clone(), &all)
    }

    /// The groups taking part in the word.
    pub fn groups(&self) -> Vec<Subgroup> {
        let mut out: Vec<Subgroup> = Vec::new();
        for g in &self.word {
            if !out.contains(&g.group) {
                out.push(g.group.clone());
            }
        }
        out
    }
}

/// Consecutive generators chain target to source, DOE included.
pub fn is_geometric(word: &[WhiteheadGenerator]) -> bool {
    word.windows(2).all(|w| match w[0].target() {
        Ok(t) => matches!(t.same_with_doe(&w[1].source), Ok(true)),
        Err(_) => false,
    }) && word.last().is_none_or(|g| g.target().is_ok())
}

/// Two elements agree iff their images of `(τ*, DOE)` agree.
pub fn equals(w1: &ModularWord, w2: &ModularWord) -> Result<bool, ModgroupError> {
    Ok(w1.image()?.same_with_doe(&w2.image()?)?)
}

/// Acts on a structure decorating the Farey tesselation: `γ` re-marks the
/// DOE, then each flip changes coordinates by the Ptolemy rule.
pub fn apply_word(w: &ModularWord, s: &DecoratedStructure) -> Result<DecoratedStructure, ModgroupError> {
    let farey = TlcTesselation::farey(s.group());
    if !s.tess().same_edges(&farey)? {
        return Err(ModgroupError::NotFarey);
    }
    // characteristic map of (τ*, DOE of s) is the Möbius element carrying e* to it
    let h = oriented_edge_to_element(s.tess().doe()).expect("Farey edge");
    let doe = h.mul(&w.base).apply_edge(&OrientedEdge::standard());
    let tess = s.tess().with_doe(doe)?;
    let mut cur = s.transplant(&tess)?;
    let hinv = h.inverse();
    for g in &w.word {
        let k = g.group.conjugate(&hinv);
        cur = cur.flip(&k, &h.apply_edge(&g.edge))?;
    }
    Ok(cur)
}

/// The flip sequence of `t` paired with the base element that makes the
/// replayed DOE land on `t`'s DOE.
pub fn word_to(t: &TlcTesselation) -> Result<ModularWord, ModgroupError> {
    let flips: Vec<(Subgroup, OrientedEdge)> =
        t.history().iter().map(|r| (r.group.clone(), r.edge.clone())).collect();
    let base = base_for(&flips, t.doe())?;
    ModularWord::from_flips(base, &flips)
}

/// The `γ` for which `flips` starting at `γ·τ*` end with DOE `doe`.
fn base_for(flips: &[(Subgroup, OrientedEdge)], doe: &OrientedEdge) -> Result<Moebius, ModgroupError> {
    let mut stages = vec![TlcTesselation::farey(&Subgroup::full())];
    let mut new_edges = Vec::new();
    for (k, e) in flips {
        let next = stages.last().expect("nonempty").whitehead_move(k, e)?;
        new_edges.push(next.history().last().expect("just flipped").new_edge.clone());
        stages.push(next);
    }
    let mut d = doe.clone();
    if !stages.last().expect("nonempty").contains_edge(&d) {
        return Err(StructureError::NotAnEdge(d).into());
    }
    for i in (0..flips.len()).rev() {
        let k = &flips[i].0;
        if edge_key(k, &d) == edge_key(k, &new_edges[i]) {
            // undoing a flip moves the DOE by the rule and then reverses it
            let [_, _, l, r] = stages[i + 1].quad_of(&d).expect("edge of the stage");
            d = OrientedEdge { tail: l, head: r };
        }
    }
    Ok(oriented_edge_to_element(&d).expect("Farey edge"))
}

/// A geometric word whose first `t1.history().len()` generators rebuild the
/// edges of `t1` and whose remaining generators carry them to `t2`, with the
/// base chosen so the image DOE is `t2`'s.
pub fn flip_path(t1: &TlcTesselation, t2: &TlcTesselation, max_flips: usize) -> Result<ModularWord, ModgroupError> {
    let h = t1.group().intersect(t2.group());
    let a = t1.regroup(&h)?;
    let b = t2.regroup(&h)?;
    let path = flip_sequence(&a, &b, max_flips)?;
    let mut flips: Vec<(Subgroup, OrientedEdge)> =
        t1.history().iter().map(|r| (r.group.clone(), r.edge.clone())).collect();
    flips.extend(path.into_iter().map(|e| (h.clone(), e)));
    let base = base_for(&flips, t2.doe())?;
    ModularWord::from_flips(base, &flips)
}

/// Rewrites every generator over the intersection of all participating
/// groups, splitting each orbit flip into the flips of its sub-orbits.
pub fn normalize(w: &ModularWord) -> Result<ModularWord, ModgroupError> {
    let groups = w.groups();
    let Some(first) = groups.first() else {
        return Ok(w.clone());
    };
    if groups.len() == 1 {
        return Ok(w.clone());
    }
    let h = groups[1..].iter().fold(first.clone(), |acc, g| acc.intersect(g));
    let mut cur = based_farey(&w.base).regroup(&h)?;
    let mut flips = Vec::new();
    for g in &w.word {
        let key = edge_key(&g.group, &g.edge);
        let parts: Vec<OrientedEdge> =
            cur.orbit_reps().into_iter().filter(|e| edge_key(&g.group, e) == key).collect();
        for e in parts {
            cur = cur.whitehead_move(&h, &e)?;
            flips.push((h.clone(), e));
        }
    }
    ModularWord::from_flips(w.base.clone(), &flips)
}

/// Elements `γ` of `PSL2(Z)` normalizing `k` with `γ·t = t`, one per coset of `k`.
pub fn quotient_automorphisms(t: &TlcTesselation, k: &Subgroup) -> Result<Vec<Moebius>, ModgroupError> {
    let h = t.group().intersect(k);
    let th = t.regroup(&h)?;
    let faces: Vec<[FareyVertex; 3]> = (0..th.face_count()).map(|f| th.face(f).clone()).collect();
    let mut out = Vec::new();
    for g in k.coset_representatives() {
        if k.conjugate(&g) != *k || h.conjugate(&g) != h {
            continue;
        }
        let preserved = faces.iter().all(|f| {
            (0..3).all(|i| {
                th.contains_edge(&OrientedEdge { tail: g.apply(&f[i]), head: g.apply(&f[(i + 1) % 3]) })
            })
        });
        if preserved {
            out.push(g);
        }
    }
    Ok(out)
}

/// The characteristic map of `t` with its DOE on the Farey vertices within
/// dual distance `depth` of the DOE.
pub fn characteristic_map(t: &TlcTesselation, depth: usize) -> BTreeMap<FareyVertex, FareyVertex> {
    let farey = TlcTesselation::farey(&Subgroup::full());
    let star = OrientedEdge::standard();
    let doe = t.doe().clone();
    let mut map = BTreeMap::new();
    map.insert(star.tail.clone(), doe.tail.clone());
    map.insert(star.head.clone(), doe.head.clone());
    let mut queue = VecDeque::from([(star.clone(), doe.clone(), 0usize), (star.reversed(), doe.reversed(), 0)]);
    while let Some((s, e, level)) = queue.pop_front() {
        let cs = farey.left_vertex(&s).expect("Farey edge");
        let c = t.left_vertex(&e).expect("edge of t");
        map.insert(cs.clone(), c.clone());
        if level < depth {
            queue.push_back((
                OrientedEdge { tail: cs.clone(), head: s.head.clone() },
                OrientedEdge { tail: c.clone(), head: e.head.clone() },
                level + 1,
            ));
            queue.push_back((
                OrientedEdge { tail: s.tail.clone(), head: cs },
                OrientedEdge { tail: e.tail.clone(), head: c },
                level + 1,
            ));
        }
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Involutivity,
    Commutativity,
    Pentagon,
    Coset,
}

impl std::str::FromStr for Relation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "involutivity" => Ok(Relation::Involutivity),
            "commutativity" => Ok(Relation::Commutativity),
            "pentagon" => Ok(Relation::Pentagon),
            "coset" => Ok(Relation::Coset),
            _ => Err(format!("unknown relation {s:?}")),
        }
    }
}

/// Data for one relation check. `tess` is reached from `τ*` by its own
/// history; its DOE must lie off the moved orbits.
#[derive(Debug, Clone)]
pub enum RelationInstance {
    Involutivity { tess: TlcTesselation, group: Subgroup, edge: OrientedEdge },
    /// `e` and `f` have orbits with no triangle in common.
    Commutativity { tess: TlcTesselation, group: Subgroup, e: OrientedEdge, f: OrientedEdge },
    /// `e` and `f` are two sides of one triangle.
    Pentagon { tess: TlcTesselation, group: Subgroup, e: OrientedEdge, f: OrientedEdge },
    /// `sub ≤ group`; the `group`-orbit of `edge` against its `sub`-orbits.
    Coset { tess: TlcTesselation, group: Subgroup, sub: Subgroup, edge: OrientedEdge },
}

impl RelationInstance {
    pub fn relation(&self) -> Relation {
        match self {
            RelationInstance::Involutivity { .. } => Relation::Involutivity,
            RelationInstance::Commutativity { .. } => Relation::Commutativity,
            RelationInstance::Pentagon { .. } => Relation::Pentagon,
            RelationInstance::Coset { .. } => Relation::Coset,
        }
    }
}

fn malformed(msg: &str) -> ModgroupError {
    ModgroupError::MalformedInstance(msg.to_string())
}

/// Composes both sides of the relation as words and compares them.
pub fn verify_relation(inst: &RelationInstance) -> Result<bool, ModgroupError> {
    let (tess, moved): (&TlcTesselation, Vec<(&Subgroup, &OrientedEdge)>) = match inst {
        RelationInstance::Involutivity { tess, group, edge } => (tess, vec![(group, edge)]),
        RelationInstance::Commutativity { tess, group, e, f } | RelationInstance::Pentagon { tess, group, e, f } => {
            (tess, vec![(group, e), (group, f)])
        }
        RelationInstance::Coset { tess, group, edge, .. } => (tess, vec![(group, edge)]),
    };
    for (k, e) in &moved {
        if !tess.contains_edge(e) {
            return Err(StructureError::NotAnEdge((*e).clone()).into());
        }
        if edge_key(k, tess.doe()) == edge_key(k, e) {
            return Err(malformed("DOE lies in a moved orbit"));
        }
    }
    let prefix = word_to(tess)?;
    let (lhs, rhs) = match inst {
        RelationInstance::Involutivity { group, edge, .. } => {
            let once = tess.whitehead_move(group, edge)?;
            let back = once.history().last().expect("flipped").new_edge.clone();
            (prefix.then(&[(group.clone(), edge.clone()), (group.clone(), back)])?, prefix)
        }
        RelationInstance::Commutativity { group, e, f, .. } => {
            if edge_key(group, e) == edge_key(group, f) {
                return Err(malformed("the two orbits coincide"));
            }
            let th = tess.regroup(&tess.group().intersect(group))?;
            let (ke, kf) = (edge_key(group, e), edge_key(group, f));
            let shared = (0..th.face_count()).any(|i| {
                let keys = th.face_orbits(i).map(|o| edge_key(group, &th.orbit_rep(o)));
                keys.contains(&ke) && keys.contains(&kf)
            });
            if shared {
                return Err(malformed("the two orbits share a triangle"));
            }
            let ef = [(group.clone(), e.clone()), (group.clone(), f.clone())];
            let fe = [(group.clone(), f.clone()), (group.clone(), e.clone())];
            (prefix.then(&ef)?, prefix.then(&fe)?)
        }
        RelationInstance::Pentagon { group, e, f, .. } => {
            let quad = tess.quad_of(e).ok_or_else(|| malformed("e is not an edge"))?;
            let f_u = f.unoriented();
            let adjacent = [(&quad[0], &quad[2]), (&quad[1], &quad[2]), (&quad[0], &quad[3]), (&quad[1], &quad[3])]
                .iter()
                .any(|(a, b)| OrientedEdge { tail: (*a).clone(), head: (*b).clone() }.unoriented() == f_u);
            if !adjacent {
                return Err(malformed("e and f do not share a triangle"));
            }
            // The pentagon must embed in the quotient: none of its five sides
            // may lie in the orbit of a diagonal.
            let qf = tess.quad_of(f).ok_or_else(|| malformed("f is not an edge"))?;
            let apex = [&qf[2], &qf[3]]
                .into_iter()
                .find(|x| !quad.contains(x))
                .ok_or_else(|| malformed("degenerate pentagon"))?;
            let (a, b) = f_u;
            let mut sides: Vec<(FareyVertex, FareyVertex)> = vec![(a.clone(), apex.clone()), (apex.clone(), b)];
            for (x, y) in [(&quad[0], &quad[2]), (&quad[1], &quad[2]), (&quad[0], &quad[3]), (&quad[1], &quad[3])] {
                let s = OrientedEdge { tail: x.clone(), head: y.clone() };
                if s.unoriented() != f.unoriented() {
                    sides.push((x.clone(), y.clone()));
                }
            }
            let diagonals = [edge_key(group, e), edge_key(group, f)];
            if sides
                .iter()
                .any(|(x, y)| diagonals.contains(&edge_key(group, &OrientedEdge { tail: x.clone(), head: y.clone() })))
            {
                return Err(malformed("the pentagon does not embed in the quotient"));
            }
            let mut cur = tess.clone();
            let mut diagonals = [e.clone(), f.clone()];
            let mut flips = Vec::new();
            for step in 0..5 {
                let d = diagonals[step % 2].clone();
                cur = cur.whitehead_move(group, &d).map_err(|err| malformed(&format!("step {step}: {err}")))?;
                diagonals[step % 2] = cur.history().last().expect("flipped").new_edge.clone();
                flips.push((group.clone(), d));
            }
            (prefix.then(&flips)?, prefix)
        }
        RelationInstance::Coset { group, sub, edge, .. } => {
            if !group.contains_subgroup(sub) {
                return Err(malformed("sub is not contained in group"));
            }
            let h = tess.group().intersect(sub);
            let mut cur = tess.regroup(&h)?;
            let key = edge_key(group, edge);
            let parts: Vec<OrientedEdge> =
                cur.orbit_reps().into_iter().filter(|e| edge_key(group, e) == key).collect();
            let mut seq = Vec::new();
            let mut seen = Vec::new();
            for e in parts {
                let k = edge_key(sub, &e);
                if seen.contains(&k) {
                    continue;
                }
                seen.push(k);
                cur = cur.whitehead_move(sub, &e)?;
                seq.push((sub.clone(), e));
            }
            (prefix.then(&[(group.clone(), edge.clone())])?, prefix.then(&seq)?)
        }
    };
    equals(&lhs, &rhs)
}

/// A random torsion-free subgroup of index at most `max_index`.
fn random_group<R: Rng + ?Sized>(rng: &mut R, max_index: usize) -> Subgroup {
    let index = 6 * rng.gen_range(1..=max_index / 6);
    Subgroup::random_torsion_free(index, rng)
}

/// A random tesselation over `k` reached by up to `flips` flips.
pub fn random_tesselation<R: Rng + ?Sized>(k: &Subgroup, flips: usize, rng: &mut R) -> TlcTesselation {
    let mut t = TlcTesselation::farey(k);
    for _ in 0..flips {
        let o = rng.gen_range(0..t.orbit_count());
        if t.is_flippable(o) {
            t = t.whitehead_move(k, &t.orbit_rep(o)).expect("flippable orbit");
        }
    }
    t
}

/// A random valid instance over groups of index at most 24.
pub fn random_instance<R: Rng + ?Sized>(relation: Relation, rng: &mut R) -> RelationInstance {
    loop {
        let (k, sub) = if relation == Relation::Coset {
            let k = random_group(rng, 12);
            let other = random_group(rng, 12);
            let h = k.intersect(&other);
            if h == k || h.index() > 24 {
                continue;
            }
            (k, Some(h))
        } else {
            (random_group(rng, 24), None)
        };
        let tess = random_tesselation(&k, rng.gen_range(0..4), rng);
        let doe_key = edge_key(&k, tess.doe());
        let candidates: Vec<usize> = (0..tess.orbit_count())
            .filter(|&o| tess.is_flippable(o) && tess.orbit_keys()[o] != doe_key)
            .collect();
        let Some(&o) = candidates.choose(rng) else { continue };
        let edge = tess.orbit_rep(o);
        let inst = match relation {
            Relation::Involutivity => RelationInstance::Involutivity { tess, group: k, edge },
            Relation::Coset => RelationInstance::Coset { tess, group: k, sub: sub.expect("chosen"), edge },
            Relation::Commutativity => {
                let touching: Vec<usize> = (0..tess.face_count())
                    .map(|f| tess.face_orbits(f))
                    .filter(|orbs| orbs.contains(&o))
                    .flat_map(|orbs| orbs.into_iter())
                    .collect();
                let others: Vec<usize> =
                    candidates.iter().copied().filter(|p| !touching.contains(p)).collect();
                let Some(&p) = others.choose(rng) else { continue };
                RelationInstance::Commutativity { f: tess.orbit_rep(p), tess, group: k, e: edge }
            }
            Relation::Pentagon => {
                // another side of a triangle on the left of the edge
                let quad = tess.quad_of(&edge).expect("edge");
                let side = if rng.gen_bool(0.5) {
                    OrientedEdge { tail: quad[1].clone(), head: quad[2].clone() }
                } else {
                    OrientedEdge { tail: quad[2].clone(), head: quad[0].clone() }
                };
                let p = tess.orbit_of(&side).expect("side of a triangle");
                if !candidates.contains(&p) || p == o {
                    continue;
                }
                RelationInstance::Pentagon { tess, group: k, e: edge, f: side }
            }
        };
        match verify_relation(&inst) {
            Err(ModgroupError::MalformedInstance(_)) => continue,
            _ => return inst,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::Letter;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(s: &str) -> FareyVertex {
        s.parse().unwrap()
    }

    fn oe(a: &str, b: &str) -> OrientedEdge {
        OrientedEdge::new(v(a), v(b)).unwrap()
    }

    fn g() -> Subgroup {
        Subgroup::commutator()
    }

    #[test]
    fn words_and_images() {
        let w = ModularWord::identity();
        assert!(w.is_geometric());
        assert!(w.image().unwrap().same_with_doe(&TlcTesselation::farey(&Subgroup::full())).unwrap());
        let w1 = ModularWord::from_flips(Moebius::identity(), &[(g(), oe("0", "1/0"))]).unwrap();
        assert!(w1.is_geometric());
        assert!(!equals(&w1, &w).unwrap());
        // chaining from τ* again after a flip is not geometric
        let bad = vec![
            w1.word[0].clone(),
            WhiteheadGenerator::new(TlcTesselation::farey(&g()), g(), oe("0", "1")).unwrap(),
        ];
        assert!(!is_geometric(&bad));
        assert!(is_geometric(&[]));
    }

    #[test]
    fn apply_word_examples() {
        let s = DecoratedStructure::unity(TlcTesselation::farey(&g()));
        let id = apply_word(&ModularWord::identity(), &s).unwrap();
        assert_eq!(id.lambda(), s.lambda());
        let w = ModularWord::from_flips(Moebius::identity(), &[(g(), oe("0", "1"))]).unwrap();
        let out = apply_word(&w, &s).unwrap();
        let target = w.word[0].target().unwrap();
        let new_edge = &target.history()[0].new_edge;
        assert_eq!(out.lambda_of(new_edge).unwrap(), &BigRational::from_integer(BigInt::from(2)));
        assert_eq!(out.lambda().iter().filter(|x| **x == BigRational::from_integer(1.into())).count(), 2);
        let back = w.then(&[(g(), new_edge.clone())]).unwrap();
        let round = apply_word(&back, &s).unwrap();
        assert!(round.tess().same_edges(s.tess()).unwrap());
        for e in s.tess().orbit_reps() {
            assert_eq!(round.lambda_of(&e), s.lambda_of(&e));
        }
    }

    #[test]
    fn double_flip_reverses_the_doe() {
        let t = TlcTesselation::farey(&g());
        let once = t.whitehead_move(&g(), &oe("0", "1/0")).unwrap();
        let twice = once.whitehead_move(&g(), &once.history()[0].new_edge).unwrap();
        assert_eq!(twice.doe(), &oe("1/0", "0"));
        // with the DOE elsewhere, the pair is the identity
        let inst = RelationInstance::Involutivity { tess: t, group: g(), edge: oe("0", "1") };
        assert!(verify_relation(&inst).unwrap());
    }

    #[test]
    fn relation_examples() {
        let t = TlcTesselation::farey(&g());
        let h = g().intersect(&Subgroup::principal_congruence(2).unwrap());
        assert_eq!(h.index(), 18);
        let coset = RelationInstance::Coset { tess: t.clone(), group: g(), sub: h.clone(), edge: oe("0", "1") };
        assert!(verify_relation(&coset).unwrap());
        // any DOE is reachable by choosing the base element
        let moved = t.with_doe(oe("0", "1")).unwrap();
        let coset = RelationInstance::Coset { tess: moved, group: g(), sub: h, edge: oe("0", "1/0") };
        assert!(verify_relation(&coset).unwrap());
        let bad = RelationInstance::Involutivity { tess: t.clone(), group: g(), edge: oe("0", "1/0") };
        assert!(matches!(verify_relation(&bad), Err(ModgroupError::MalformedInstance(_))));
        // On the torus every pentagon side shares an orbit with a diagonal.
        let folded = RelationInstance::Pentagon { tess: t, group: g(), e: oe("0", "1"), f: oe("1", "1/0") };
        assert!(matches!(verify_relation(&folded), Err(ModgroupError::MalformedInstance(_))));
    }

    #[test]
    fn random_relations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for rel in [Relation::Involutivity, Relation::Commutativity, Relation::Pentagon, Relation::Coset] {
            for _ in 0..12 {
                let inst = random_instance(rel, &mut rng);
                assert!(verify_relation(&inst).unwrap(), "{rel:?} failed on {inst:?}");
            }
        }
    }

    #[test]
    fn flip_path_recovers_scrambles() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let tau = TlcTesselation::farey(&Subgroup::full());
        for _ in 0..8 {
            let k = random_group(&mut rng, 12);
            let t = random_tesselation(&k, 5, &mut rng);
            let scramble = word_to(&t).unwrap();
            assert!(scramble.image().unwrap().same_with_doe(&t).unwrap());
            let w = flip_path(&tau, &t, 10_000).unwrap();
            assert!(w.is_geometric());
            assert!(equals(&w, &scramble).unwrap());
        }
        let t = TlcTesselation::farey(&g());
        assert!(flip_path(&t, &t, 10).unwrap().word.is_empty());
    }

    #[test]
    fn normalize_mixed_words() {
        let g2 = Subgroup::principal_congruence(2).unwrap();
        let first = ModularWord::from_flips(Moebius::identity(), &[(g2.clone(), oe("0", "1/0"))]).unwrap();
        let image = first.image().unwrap();
        let w = image
            .orbit_reps()
            .into_iter()
            .find_map(|e| first.then(&[(g(), e)]).ok())
            .expect("some G-orbit is flippable");
        let n = normalize(&w).unwrap();
        assert_eq!(n.groups().len(), 1);
        assert_eq!(n.groups()[0], g().intersect(&g2));
        assert!(n.is_geometric());
        assert!(equals(&n, &w).unwrap());
        let single = ModularWord::from_flips(Moebius::identity(), &[(g(), oe("0", "1"))]).unwrap();
        assert_eq!(normalize(&single).unwrap().flips(), single.flips());
        assert!(normalize(&ModularWord::identity()).unwrap().word.is_empty());
    }

    #[test]
    fn automorphism_counts() {
        let full = Subgroup::full();
        let g2 = Subgroup::principal_congruence(2).unwrap();
        for (k, n) in [(full.clone(), 1), (g(), 6), (g2, 6)] {
            let t = TlcTesselation::farey(&k);
            assert_eq!(quotient_automorphisms(&t, &k).unwrap().len(), n);
        }
    }

    #[test]
    fn characteristic_map_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let t = random_tesselation(&g(), 3, &mut rng);
        let h = characteristic_map(&t, 11);
        let gamma = Moebius::from_letters(&[Letter::T(1.into()), Letter::S, Letter::T((-2).into())]);
        let e = gamma.apply_edge(&OrientedEdge::standard());
        let d1 = OrientedEdge { tail: h[&e.tail].clone(), head: h[&e.head].clone() };
        let h1 = characteristic_map(&t.with_doe(d1).unwrap(), 5);
        let mut checked = 0;
        for (x, y) in &h1 {
            if let Some(z) = h.get(&gamma.apply(x)) {
                assert_eq!(y, z);
                checked += 1;
            }
        }
        assert!(checked * 10 > h1.len() * 9);
        // the identity tesselation has the identity map
        let id = characteristic_map(&TlcTesselation::farey(&g()), 4);
        assert!(id.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn asymmetric_tesselation_has_trivial_automorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        // on the punctured torus the elliptic involution preserves every tesselation
        let k = g().intersect(&Subgroup::principal_congruence(2).unwrap());
        assert!(k.is_normal());
        let found = (0..20).any(|_| {
            let t = random_tesselation(&k, 3, &mut rng);
            let auts = quotient_automorphisms(&t, &k).unwrap();
            assert!(auts.iter().any(|a| k.contains(a)));
            auts.len() == 1
        });
        assert!(found);
    }

    #[test]
    fn equal_words_act_alike() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let s = DecoratedStructure::from_orbit_values(
            TlcTesselation::farey(&g()),
            vec![BigRational::new(3.into(), 2.into()), BigRational::from_integer(2.into()), BigRational::new(5.into(), 3.into())],
        )
        .unwrap();
        let tau = TlcTesselation::farey(&Subgroup::full());
        for _ in 0..4 {
            let t = random_tesselation(&g(), 4, &mut rng);
            let w1 = word_to(&t).unwrap();
            let w2 = flip_path(&tau, &t, 1000).unwrap();
            assert!(equals(&w1, &w2).unwrap());
            let a = apply_word(&w1, &s).unwrap();
            let b = apply_word(&w2, &s).unwrap();
            let b = b.transport_to(a.tess(), 1000).unwrap();
            assert_eq!(a.lambda(), b.lambda());
        }
    }
}
