//! Decorated TLC structures: `K`-invariant ideal triangulations of the disk
//! with vertex set `Q ∪ {∞}`, lambda lengths on their edge orbits, the
//! characteristic-point recursion, simplicial coordinates and the
//! Delaunay flip algorithm producing the canonical paving.
//!
//! A tesselation is stored as its flip history from the Farey tesselation
//! together with a triangle map over a torsion-free working subgroup `W ≤ K`:
//! the quotient triangulation of `D/W`, each face carrying a counter-clockwise
//! lift to the disk and each edge gluing carrying the element of `W` that
//! matches the two lifts.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::farey::{edge_frame, FareyVertex, Moebius, OrientedEdge};
use crate::lightcone::{
    cross_ratio, ptolemy_flip, rational_sqrt, realize_triangle_exact, simplicial_coordinate,
    third_point_exact, ExactPoint, LightconeError, LightconePoint, Side,
};
use crate::subgroup::Subgroup;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("{0:?} is not an edge of the tesselation")]
    NotAnEdge(OrientedEdge),
    #[error("two edges of the flipped orbit lie on a common triangle")]
    OrbitSelfAdjacent,
    #[error("no lambda length given for edge orbit {0}")]
    MissingOrbit(usize),
    #[error("lambda lengths must be positive")]
    NonPositiveValue,
    #[error("conflicting values given for edge orbit {0}")]
    ConflictingValues(usize),
    #[error("tesselation is not invariant under the requested group")]
    NotInvariant,
    #[error("no scaling factor for cusp orbit {0}")]
    MissingCusp(usize),
    #[error("scaled lambda length squared {0} is not a rational square")]
    NotASquare(String),
    #[error("flip guard exhausted after {0} flips")]
    NonTermination(usize),
    #[error("every edge orbit with negative simplicial coordinate is self-adjacent")]
    Stuck,
    #[error("vector has {got} components, expected {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error(transparent)]
    Lightcone(#[from] LightconeError),
}

/// Label of a `K`-orbit of oriented ideal edges: the coset of the framing
/// element and the offset of the head in `[0, 1)`. For Farey edges the coset
/// is the one attached to the edge by the subgroup module and the offset is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub coset: usize,
    pub offset: BigRational,
}

pub fn oriented_key(k: &Subgroup, e: &OrientedEdge) -> EdgeKey {
    let (g, r) = edge_frame(e);
    EdgeKey { coset: k.perm_s()[k.coset_of(&g)] as usize, offset: r }
}

/// Orientation-free key: the smaller of the two oriented keys.
pub fn edge_key(k: &Subgroup, e: &OrientedEdge) -> EdgeKey {
    oriented_key(k, e).min(oriented_key(k, &e.reversed()))
}

fn rotate(t: &[FareyVertex; 3], i: usize) -> [FareyVertex; 3] {
    [t[i % 3].clone(), t[(i + 1) % 3].clone(), t[(i + 2) % 3].clone()]
}

/// Quotient triangulation of `D/W` for torsion-free `W`.
///
/// Dart `3f + i` is side `i` of face `f`, running from vertex `i` to vertex
/// `i+1` of the face's lift. `glue[d]` carries the reversed lift of `d` onto
/// the lift of its partner `alpha[d]`.
#[derive(Clone, Debug)]
struct TriMap {
    w: Subgroup,
    faces: Vec<[FareyVertex; 3]>,
    alpha: Vec<usize>,
    glue: Vec<Moebius>,
    index: HashMap<(usize, BigRational), usize>,
}

fn face_rotation() -> Moebius {
    // 0 -> ∞ -> -1 -> 0
    Moebius::new(1, 1, -1, 0).expect("det 1")
}

impl TriMap {
    fn farey(w: Subgroup) -> TriMap {
        assert!(w.is_torsion_free(), "working group must be torsion-free");
        let n = w.index();
        let reps = w.coset_representatives();
        let f = face_rotation();
        let f_letters = f.letters();
        let fperm: Vec<usize> = (0..n).map(|c| w.act(c, &f_letters)).collect();
        let mut dart_of = vec![usize::MAX; n];
        let mut elem = vec![Moebius::identity(); n];
        let mut coset_of_dart = vec![0usize; n];
        let mut faces = Vec::new();
        let base = [FareyVertex::int(0), FareyVertex::infinity(), FareyVertex::int(-1)];
        for c in 0..n {
            if dart_of[c] != usize::MAX {
                continue;
            }
            let fid = faces.len();
            let h = reps[c].clone();
            let mut cur = c;
            let mut g = h.clone();
            for i in 0..3 {
                dart_of[cur] = 3 * fid + i;
                coset_of_dart[3 * fid + i] = cur;
                elem[3 * fid + i] = g.clone();
                g = g.mul(&f);
                cur = fperm[cur];
            }
            debug_assert_eq!(cur, c);
            faces.push(base.clone().map(|x| h.apply(&x)));
        }
        let s = Moebius::s();
        let mut alpha = vec![0; n];
        let mut glue = vec![Moebius::identity(); n];
        for d in 0..n {
            let p = dart_of[w.perm_s()[coset_of_dart[d]] as usize];
            alpha[d] = p;
            glue[d] = elem[p].mul(&s).mul(&elem[d].inverse());
            debug_assert!(w.contains(&glue[d]));
        }
        let mut m = TriMap { w, faces, alpha, glue, index: HashMap::new() };
        m.reindex();
        m
    }

    fn darts(&self) -> usize {
        self.alpha.len()
    }

    fn next(d: usize) -> usize {
        3 * (d / 3) + (d % 3 + 1) % 3
    }

    fn prev(d: usize) -> usize {
        3 * (d / 3) + (d % 3 + 2) % 3
    }

    fn dart_edge(&self, d: usize) -> OrientedEdge {
        let t = &self.faces[d / 3];
        OrientedEdge { tail: t[d % 3].clone(), head: t[(d + 1) % 3].clone() }
    }

    fn wkey(&self, e: &OrientedEdge) -> ((usize, BigRational), Moebius) {
        let (g, r) = edge_frame(e);
        ((self.w.coset_of(&g), r), g)
    }

    fn reindex(&mut self) {
        self.index = (0..self.darts()).map(|d| (self.wkey(&self.dart_edge(d)).0, d)).collect();
    }

    /// The dart whose lift is `W`-equivalent to `e`, with `m ∈ W` such that
    /// `m · lift(dart) = e`.
    fn locate(&self, e: &OrientedEdge) -> Option<(usize, Moebius)> {
        let (key, g) = self.wkey(e);
        let d = *self.index.get(&key)?;
        let (gd, _) = edge_frame(&self.dart_edge(d));
        Some((d, g.mul(&gd.inverse())))
    }

    /// Quadrilateral around dart `d = A→B` in the frame of its face:
    /// `(A, B, C, D)` with `C` left of `A→B` and `D` right of it.
    fn quad(&self, d: usize) -> [FareyVertex; 4] {
        let [a, b, c] = rotate(&self.faces[d / 3], d % 3);
        let x = self.alpha[d];
        let far = self.faces[x / 3][(x % 3 + 2) % 3].clone();
        let dd = self.glue[d].inverse().apply(&far);
        [a, b, c, dd]
    }

    /// Diagonal exchange on the edge of dart `d`. Requires the two faces on
    /// either side of it to differ.
    fn flip_dart(&mut self, d: usize) {
        let f = d / 3;
        let x = self.alpha[d];
        let g = x / 3;
        debug_assert_ne!(f, g);
        let [a, b, c, dv] = self.quad(d);
        let d1 = TriMap::next(d);
        let d2 = TriMap::prev(d);
        let x1 = TriMap::next(x);
        let x2 = TriMap::prev(x);
        let tau_g = self.glue[d].inverse();
        // old dart -> (new dart, frame change)
        let mut moved: HashMap<usize, (usize, Moebius)> = HashMap::new();
        moved.insert(x1, (3 * f, tau_g.clone()));
        moved.insert(d2, (3 * f + 2, Moebius::identity()));
        moved.insert(x2, (3 * g, tau_g.clone()));
        moved.insert(d1, (3 * g + 1, Moebius::identity()));
        let lookup = |o: usize| -> (usize, Moebius) {
            moved.get(&o).cloned().unwrap_or((o, Moebius::identity()))
        };
        let mut updates = Vec::new();
        for (&old, (new, tau)) in &moved {
            let p = self.alpha[old];
            let (np, tau_p) = lookup(p);
            let gl = tau_p.mul(&self.glue[old]).mul(&tau.inverse());
            updates.push((*new, np, gl));
        }
        self.faces[f] = [a.clone(), dv.clone(), c.clone()];
        self.faces[g] = [dv, b, c];
        for (n, np, gl) in updates {
            self.alpha[np] = n;
            self.glue[np] = gl.inverse();
            self.alpha[n] = np;
            self.glue[n] = gl;
        }
        let (n1, n2) = (3 * f + 1, 3 * g + 2);
        self.alpha[n1] = n2;
        self.alpha[n2] = n1;
        self.glue[n1] = Moebius::identity();
        self.glue[n2] = Moebius::identity();
    }
}

/// One recorded Whitehead move: the `group`-orbit of `edge` was replaced by
/// the orbit of `new_edge`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipRecord {
    pub group: Subgroup,
    pub edge: OrientedEdge,
    pub new_edge: OrientedEdge,
}

/// A TLC tesselation with a distinguished oriented edge.
#[derive(Clone, Debug)]
pub struct TlcTesselation {
    group: Subgroup,
    history: Vec<FlipRecord>,
    doe: OrientedEdge,
    map: TriMap,
    dart_orbit: Vec<usize>,
    orbit_keys: Vec<EdgeKey>,
}

/// A triangle of the disk reached while developing a tesselation: the face
/// `face` of the quotient, placed by `m`, at dual-tree distance `depth` from
/// the base triangle.
#[derive(Debug, Clone)]
pub struct DevelopedFace {
    pub face: usize,
    pub m: Moebius,
    pub depth: usize,
    pub vertices: [FareyVertex; 3],
    /// Side of `face` crossed to reach it (`None` for the base triangle).
    pub entry: Option<usize>,
}

impl TlcTesselation {
    /// The Farey tesselation with the standard DOE, viewed as `k`-invariant.
    pub fn farey(k: &Subgroup) -> TlcTesselation {
        let map = TriMap::farey(k.torsion_free_core());
        let mut t = TlcTesselation {
            group: k.clone(),
            history: Vec::new(),
            doe: OrientedEdge::standard(),
            map,
            dart_orbit: Vec::new(),
            orbit_keys: Vec::new(),
        };
        t.compute_orbits();
        t
    }

    /// The Farey tesselation followed by `k`-equivariant flips of the given edges.
    pub fn from_flips(k: &Subgroup, flips: &[OrientedEdge]) -> Result<TlcTesselation, StructureError> {
        let mut t = TlcTesselation::farey(k);
        for e in flips {
            t = t.whitehead_move(k, e)?;
        }
        Ok(t)
    }

    fn compute_orbits(&mut self) {
        let keys: Vec<EdgeKey> =
            (0..self.map.darts()).map(|d| edge_key(&self.group, &self.map.dart_edge(d))).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        self.dart_orbit = keys.iter().map(|k| sorted.binary_search(k).expect("listed")).collect();
        self.orbit_keys = sorted;
    }

    pub fn group(&self) -> &Subgroup {
        &self.group
    }

    pub fn working_group(&self) -> &Subgroup {
        &self.map.w
    }

    pub fn history(&self) -> &[FlipRecord] {
        &self.history
    }

    pub fn doe(&self) -> &OrientedEdge {
        &self.doe
    }

    /// Same edges and history, different DOE; `doe` must be an edge.
    pub fn with_doe(&self, doe: OrientedEdge) -> Result<TlcTesselation, StructureError> {
        if self.map.locate(&doe).is_none() {
            return Err(StructureError::NotAnEdge(doe));
        }
        let mut t = self.clone();
        t.doe = doe;
        Ok(t)
    }

    pub fn orbit_count(&self) -> usize {
        self.orbit_keys.len()
    }

    pub fn orbit_keys(&self) -> &[EdgeKey] {
        &self.orbit_keys
    }

    /// Number of triangles of `D/W`.
    pub fn face_count(&self) -> usize {
        self.map.faces.len()
    }

    /// Lifted vertices of a face, counter-clockwise.
    pub fn face(&self, f: usize) -> &[FareyVertex; 3] {
        &self.map.faces[f]
    }

    /// Edge-orbit ids of the three sides of a face, in counter-clockwise order.
    pub fn face_orbits(&self, f: usize) -> [usize; 3] {
        [self.dart_orbit[3 * f], self.dart_orbit[3 * f + 1], self.dart_orbit[3 * f + 2]]
    }

    /// A representative edge of each orbit.
    pub fn orbit_reps(&self) -> Vec<OrientedEdge> {
        let mut reps: Vec<Option<OrientedEdge>> = vec![None; self.orbit_count()];
        for d in 0..self.map.darts() {
            let o = self.dart_orbit[d];
            if reps[o].is_none() {
                reps[o] = Some(self.map.dart_edge(d));
            }
        }
        reps.into_iter().map(|e| e.expect("every orbit has a dart")).collect()
    }

    pub fn orbit_rep(&self, o: usize) -> OrientedEdge {
        let d = self.dart_orbit.iter().position(|&x| x == o).expect("valid orbit id");
        self.map.dart_edge(d)
    }

    /// Orbit id of `e` if it is an edge of the tesselation.
    pub fn orbit_of(&self, e: &OrientedEdge) -> Option<usize> {
        let (d, _) = self.map.locate(e)?;
        Some(self.dart_orbit[d])
    }

    pub fn contains_edge(&self, e: &OrientedEdge) -> bool {
        self.map.locate(e).is_some()
    }

    fn orbit_dart(&self, o: usize) -> usize {
        self.dart_orbit.iter().position(|&x| x == o).expect("valid orbit id")
    }

    /// Quadrilateral of an edge in disk coordinates: `(A, B, C, D)` with the
    /// edge `A→B`, `C` on its left and `D` on its right.
    pub fn quad_of(&self, e: &OrientedEdge) -> Option<[FareyVertex; 4]> {
        let (d, m) = self.map.locate(e)?;
        Some(self.map.quad(d).map(|x| m.apply(&x)))
    }

    /// Orbit ids `[a, b, c, d, e]` of the quadrilateral around orbit `o`:
    /// sides `AD, DB, BC, CA` in counter-clockwise order and the diagonal.
    pub fn quad_orbits(&self, o: usize) -> [usize; 5] {
        let d = self.orbit_dart(o);
        let x = self.map.alpha[d];
        [
            self.dart_orbit[TriMap::next(x)],
            self.dart_orbit[TriMap::prev(x)],
            self.dart_orbit[TriMap::next(d)],
            self.dart_orbit[TriMap::prev(d)],
            o,
        ]
    }

    /// Whether flipping orbit `o` (equivariantly for the tesselation's own
    /// group) is legal.
    pub fn is_flippable(&self, o: usize) -> bool {
        (0..self.face_count()).all(|f| self.face_orbits(f).iter().filter(|&&x| x == o).count() <= 1)
    }

    /// Rebuilds over another invariance group `h`, replaying the flip
    /// history. Every recorded flip group must contain `h`.
    pub fn regroup(&self, h: &Subgroup) -> Result<TlcTesselation, StructureError> {
        if *h == self.group {
            return Ok(self.clone());
        }
        if !self.history.iter().all(|r| r.group.contains_subgroup(h)) {
            return Err(StructureError::NotInvariant);
        }
        let mut t = TlcTesselation::farey(h);
        for r in &self.history {
            t.apply_flip(&r.group, &r.edge)?;
        }
        t.compute_orbits();
        t.doe = self.doe.clone();
        Ok(t)
    }

    /// The `k`-equivariant Whitehead move along `e`. The result is invariant
    /// under `K ∩ k`, where `K` is the current invariance group.
    pub fn whitehead_move(&self, k: &Subgroup, e: &OrientedEdge) -> Result<TlcTesselation, StructureError> {
        let h = self.group.intersect(k);
        let mut t = self.regroup(&h)?;
        t.apply_flip(k, e)?;
        t.compute_orbits();
        Ok(t)
    }

    /// Flips the `k`-orbit of `e` in place; requires `self.group ≤ k`.
    fn apply_flip(&mut self, k: &Subgroup, e: &OrientedEdge) -> Result<(), StructureError> {
        let (dart, m) = self.map.locate(e).ok_or_else(|| StructureError::NotAnEdge(e.clone()))?;
        let key = edge_key(k, e);
        let chosen: Vec<bool> =
            (0..self.map.darts()).map(|d| edge_key(k, &self.map.dart_edge(d)) == key).collect();
        for f in 0..self.map.faces.len() {
            if (0..3).filter(|&i| chosen[3 * f + i]).count() > 1 {
                return Err(StructureError::OrbitSelfAdjacent);
            }
        }
        let [a, b, c, dv] = self.map.quad(dart).map(|x| m.apply(&x));
        let new_edge = OrientedEdge { tail: dv, head: c };
        if edge_key(k, &self.doe) == key {
            let (dd, mm) = self.map.locate(&self.doe).expect("DOE is an edge");
            let [_, _, c2, d2] = self.map.quad(dd).map(|x| mm.apply(&x));
            self.doe = OrientedEdge { tail: d2, head: c2 };
        }
        // each face holds at most one chosen dart, so flipping one edge
        // leaves the indices of the others untouched
        let darts: Vec<usize> = (0..self.map.darts()).filter(|&d| chosen[d] && d < self.map.alpha[d]).collect();
        for d in darts {
            self.map.flip_dart(d);
        }
        self.map.reindex();
        debug_assert!(self.map.locate(&new_edge).is_some());
        debug_assert!(self.map.locate(&OrientedEdge { tail: a, head: b }).is_none());
        self.history.push(FlipRecord { group: k.clone(), edge: e.clone(), new_edge });
        Ok(())
    }

    /// Keys of all edges over the invariance group.
    pub fn edge_keys(&self) -> BTreeSet<EdgeKey> {
        self.orbit_keys.iter().cloned().collect()
    }

    /// Same set of edges (the DOE is ignored).
    pub fn same_edges(&self, other: &TlcTesselation) -> Result<bool, StructureError> {
        let h = self.group.intersect(&other.group);
        Ok(self.regroup(&h)?.orbit_keys == other.regroup(&h)?.orbit_keys)
    }

    /// Same set of edges and the same DOE.
    pub fn same_with_doe(&self, other: &TlcTesselation) -> Result<bool, StructureError> {
        Ok(self.doe == other.doe && self.same_edges(other)?)
    }

    /// The triangles of the disk within dual-tree distance `depth` of the
    /// base triangle, which lies to the right of the DOE (its vertices
    /// `(head, tail, third)` are counter-clockwise).
    pub fn develop(&self, depth: usize) -> Vec<DevelopedFace> {
        self.develop_from(&self.doe, depth).expect("DOE is an edge")
    }

    /// As [`TlcTesselation::develop`], starting from the triangle right of `e`.
    pub fn develop_from(&self, e: &OrientedEdge, depth: usize) -> Result<Vec<DevelopedFace>, StructureError> {
        let (x, m) = self.map.locate(&e.reversed()).ok_or_else(|| StructureError::NotAnEdge(e.clone()))?;
        let base = x / 3;
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        queue.push_back((base, m, 0usize, None::<usize>));
        while let Some((f, m, dep, entry)) = queue.pop_front() {
            let vertices = self.map.faces[f].clone().map(|v| m.apply(&v));
            out.push(DevelopedFace { face: f, m: m.clone(), depth: dep, vertices, entry });
            if dep == depth {
                continue;
            }
            for i in 0..3 {
                if Some(i) == entry {
                    continue;
                }
                let d = 3 * f + i;
                let p = self.map.alpha[d];
                queue.push_back((p / 3, m.mul(&self.map.glue[d].inverse()), dep + 1, Some(p % 3)));
            }
        }
        Ok(out)
    }

    /// The vertex of the triangle left of the edge `e`.
    pub fn left_vertex(&self, e: &OrientedEdge) -> Option<FareyVertex> {
        Some(self.quad_of(e)?[2].clone())
    }

    /// Orbit id of side `i` of a developed face.
    pub fn side_orbit(&self, f: &DevelopedFace, i: usize) -> usize {
        self.dart_orbit[3 * f.face + i]
    }

    /// Distinct edges (unoriented, endpoints sorted) of the developed region.
    pub fn edges_to_depth(&self, depth: usize) -> BTreeSet<(FareyVertex, FareyVertex)> {
        let mut out = BTreeSet::new();
        for f in self.develop(depth) {
            for i in 0..3 {
                let e = OrientedEdge { tail: f.vertices[i].clone(), head: f.vertices[(i + 1) % 3].clone() };
                out.insert(e.unoriented());
            }
        }
        out
    }
}

/// A point of decorated Teichmüller space at a finite level: a TLC
/// tesselation and a positive lambda length on each of its edge orbits.
#[derive(Clone, Debug)]
pub struct DecoratedStructure {
    tess: TlcTesselation,
    lambda: Vec<BigRational>,
}

/// Delaunay output: the structure in its canonical coordinates, the paving,
/// and the edges flipped on the way (each flipped for the structure's group).
#[derive(Clone, Debug)]
pub struct DelaunayOutcome {
    pub structure: DecoratedStructure,
    pub paving: Paving,
    pub flips: Vec<OrientedEdge>,
}

/// The convex-hull decomposition: the tesselation with all zero-coordinate
/// orbits removed.
#[derive(Clone, Debug)]
pub struct Paving {
    pub removed: Vec<usize>,
    /// Faces of `D/W` as groups of triangles; each is an ideal polygon with
    /// `triangles.len() + 2` vertices.
    pub faces: Vec<Vec<usize>>,
    /// Keys of the remaining edges over the invariance group.
    pub edges: BTreeSet<EdgeKey>,
}

impl Paving {
    pub fn face_sizes(&self) -> Vec<usize> {
        self.faces.iter().map(|f| f.len() + 2).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellMembership {
    InOpenCell,
    InClosedCell,
    Outside,
}

impl DecoratedStructure {
    pub fn new(tess: TlcTesselation, values: &[(OrientedEdge, BigRational)]) -> Result<Self, StructureError> {
        let mut lambda: Vec<Option<BigRational>> = vec![None; tess.orbit_count()];
        for (e, v) in values {
            if !v.is_positive() {
                return Err(StructureError::NonPositiveValue);
            }
            let o = tess.orbit_of(e).ok_or_else(|| StructureError::NotAnEdge(e.clone()))?;
            match &lambda[o] {
                Some(x) if x != v => return Err(StructureError::ConflictingValues(o)),
                _ => lambda[o] = Some(v.clone()),
            }
        }
        let lambda = lambda
            .into_iter()
            .enumerate()
            .map(|(o, v)| v.ok_or(StructureError::MissingOrbit(o)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DecoratedStructure { tess, lambda })
    }

    /// Values indexed by orbit id.
    pub fn from_orbit_values(tess: TlcTesselation, lambda: Vec<BigRational>) -> Result<Self, StructureError> {
        if lambda.len() != tess.orbit_count() {
            return Err(StructureError::DimensionMismatch { got: lambda.len(), want: tess.orbit_count() });
        }
        if lambda.iter().any(|v| !v.is_positive()) {
            return Err(StructureError::NonPositiveValue);
        }
        Ok(DecoratedStructure { tess, lambda })
    }

    /// All lambda lengths equal to one.
    pub fn unity(tess: TlcTesselation) -> Self {
        let n = tess.orbit_count();
        DecoratedStructure { tess, lambda: vec![BigRational::one(); n] }
    }

    pub fn tess(&self) -> &TlcTesselation {
        &self.tess
    }

    pub fn group(&self) -> &Subgroup {
        &self.tess.group
    }

    pub fn lambda(&self) -> &[BigRational] {
        &self.lambda
    }

    /// Lambda length of an edge of the tesselation.
    pub fn lambda_of(&self, e: &OrientedEdge) -> Option<&BigRational> {
        let key = edge_key(&self.tess.group, e);
        let o = self.tess.orbit_keys.binary_search(&key).ok()?;
        Some(&self.lambda[o])
    }

    /// The same structure seen as invariant under `h`.
    pub fn regroup(&self, h: &Subgroup) -> Result<Self, StructureError> {
        let tess = self.tess.regroup(h)?;
        Ok(self.carry_to(tess))
    }

    /// Values for `tess` read off by edge; `tess` must have the same edges
    /// (each of its orbits lies in one orbit of `self`).
    fn carry_to(&self, tess: TlcTesselation) -> DecoratedStructure {
        let lambda = tess
            .orbit_reps()
            .iter()
            .map(|e| self.lambda_of(e).expect("same edge set").clone())
            .collect();
        DecoratedStructure { tess, lambda }
    }

    /// Reads this structure's values onto another tesselation with the same
    /// edge set.
    pub fn transplant(&self, tess: &TlcTesselation) -> Result<Self, StructureError> {
        let h = self.tess.group.intersect(&tess.group);
        let src = self.regroup(&h)?;
        let dst = tess.regroup(&h)?;
        if src.tess.orbit_keys != dst.orbit_keys {
            return Err(StructureError::NotInvariant);
        }
        let out = src.carry_to(dst);
        if out.tess.group != tess.group {
            return Err(StructureError::NotInvariant);
        }
        Ok(out)
    }

    /// The `k`-equivariant Whitehead move along `e` with the Ptolemy update.
    pub fn flip(&self, k: &Subgroup, e: &OrientedEdge) -> Result<Self, StructureError> {
        let tess = self.tess.whitehead_move(k, e)?;
        let rec = tess.history.last().expect("just flipped").clone();
        let new_key = edge_key(k, &rec.new_edge);
        let lambda = tess
            .orbit_reps()
            .iter()
            .map(|rep| {
                if edge_key(k, rep) == new_key {
                    let [p, q, r, s] = tess.quad_of(rep).expect("rep is an edge");
                    let l = |x: &FareyVertex, y: &FareyVertex| {
                        self.lambda_of(&OrientedEdge { tail: x.clone(), head: y.clone() })
                            .expect("quadrilateral sides survive the flip")
                            .clone()
                    };
                    // quadrilateral p, s, q, r counter-clockwise; old diagonal r–s
                    ptolemy_flip(&l(&p, &s), &l(&s, &q), &l(&q, &r), &l(&r, &p), &l(&r, &s))
                } else {
                    self.lambda_of(rep).expect("unflipped edge").clone()
                }
            })
            .collect();
        Ok(DecoratedStructure { tess, lambda })
    }

    /// Flip of orbit `o` for the structure's own group.
    pub fn flip_orbit(&self, o: usize) -> Result<Self, StructureError> {
        let e = self.tess.orbit_rep(o);
        self.flip(&self.tess.group.clone(), &e)
    }

    pub fn pinch_bounds(&self) -> (BigRational, BigRational) {
        let min = self.lambda.iter().min().expect("nonempty").clone();
        let max = self.lambda.iter().max().expect("nonempty").clone();
        (min, max)
    }

    /// The constant `M` with `1/M < λ < M` on every edge.
    pub fn pinch_constant(&self) -> BigRational {
        let (min, max) = self.pinch_bounds();
        max.max(min.recip()) + BigRational::one()
    }

    /// Simplicial coordinate of every edge orbit.
    pub fn simplicial_map(&self) -> Vec<BigRational> {
        (0..self.tess.orbit_count())
            .map(|o| {
                let [a, b, c, d, e] = self.tess.quad_orbits(o).map(|i| &self.lambda[i]);
                // triangles (A,B,C) with sides c, d and (B,A,D) with sides a, b
                simplicial_coordinate(c, d, e, a, b)
            })
            .collect()
    }

    /// Cross-ratio `ac/(bd)` of every edge orbit's quadrilateral.
    pub fn cross_ratio_function(&self) -> Vec<BigRational> {
        (0..self.tess.orbit_count())
            .map(|o| {
                let [a, b, c, d, _] = self.tess.quad_orbits(o).map(|i| &self.lambda[i]);
                cross_ratio(a, c, b, d)
            })
            .collect()
    }

    /// Rescales the horocycle at each cusp orbit by `factors[key]`, keyed by
    /// [`Subgroup::cusp_key`]: `λ'² = λ²·f_p·f_q`. Fails when a new lambda
    /// length would be irrational.
    pub fn scale_decoration(&self, factors: &BTreeMap<usize, BigRational>) -> Result<Self, StructureError> {
        let g = &self.tess.group;
        let mut lambda = Vec::with_capacity(self.lambda.len());
        for (o, rep) in self.tess.orbit_reps().iter().enumerate() {
            let fp = factors.get(&g.cusp_key(&rep.tail)).ok_or(StructureError::MissingCusp(g.cusp_key(&rep.tail)))?;
            let fq = factors.get(&g.cusp_key(&rep.head)).ok_or(StructureError::MissingCusp(g.cusp_key(&rep.head)))?;
            if !fp.is_positive() || !fq.is_positive() {
                return Err(StructureError::NonPositiveValue);
            }
            let sq = &self.lambda[o] * &self.lambda[o] * fp * fq;
            lambda.push(rational_sqrt(&sq).ok_or_else(|| StructureError::NotASquare(sq.to_string()))?);
        }
        Ok(DecoratedStructure { tess: self.tess.clone(), lambda })
    }

    /// Light-cone lifts of every vertex of the developed region out to dual
    /// distance `depth`, starting from the triangle right of the DOE realized
    /// over `−1, +1, −i`.
    pub fn characteristic_points_exact(&self, depth: usize) -> Result<BTreeMap<FareyVertex, ExactPoint>, StructureError> {
        let doe = self.tess.doe.clone();
        let third = self.tess.left_vertex(&doe.reversed()).expect("DOE is an edge");
        let l = |a: &FareyVertex, b: &FareyVertex| self.edge_lambda(a, b);
        let [pt, ph, _] = realize_triangle_exact(&l(&doe.tail, &doe.head), &l(&doe.tail, &third), &l(&doe.head, &third))?;
        self.characteristic_points_from(&doe, pt, ph, depth)
    }

    fn edge_lambda(&self, a: &FareyVertex, b: &FareyVertex) -> BigRational {
        self.lambda_of(&OrientedEdge { tail: a.clone(), head: b.clone() }).expect("edge of the tesselation").clone()
    }

    /// Light-cone lifts grown from an edge `e` whose endpoints are placed at
    /// `w_tail` and `w_head`, across the triangle right of `e` and out to dual
    /// distance `depth` from it.
    pub fn characteristic_points_from(
        &self,
        e: &OrientedEdge,
        w_tail: ExactPoint,
        w_head: ExactPoint,
        depth: usize,
    ) -> Result<BTreeMap<FareyVertex, ExactPoint>, StructureError> {
        let faces = self.tess.develop_from(e, depth)?;
        let lam = |f: &DevelopedFace, i: usize| &self.lambda[self.tess.side_orbit(f, i % 3)];
        let mut pts: BTreeMap<FareyVertex, ExactPoint> = BTreeMap::new();
        let base = &faces[0];
        let third = self.tess.left_vertex(&e.reversed()).expect("edge located");
        let w3 = third_point_exact(
            &w_tail,
            &w_head,
            &self.edge_lambda(&e.tail, &third),
            &self.edge_lambda(&e.head, &third),
            Side::Right,
        )?;
        pts.insert(e.tail.clone(), w_tail);
        pts.insert(e.head.clone(), w_head);
        pts.insert(third, w3);
        // parent of each developed face is found by the shared edge
        let mut by_edge: HashMap<(FareyVertex, FareyVertex), FareyVertex> = HashMap::new();
        let record = |f: &DevelopedFace, by_edge: &mut HashMap<(FareyVertex, FareyVertex), FareyVertex>| {
            for i in 0..3 {
                by_edge.insert(
                    (f.vertices[i].clone(), f.vertices[(i + 1) % 3].clone()),
                    f.vertices[(i + 2) % 3].clone(),
                );
            }
        };
        record(base, &mut by_edge);
        for f in &faces[1..] {
            let i = f.entry.expect("non-base faces have an entry side");
            let (p, q, n) = (&f.vertices[i], &f.vertices[(i + 1) % 3], &f.vertices[(i + 2) % 3]);
            // the parent holds the edge q -> p with its own third vertex r
            let r = by_edge.get(&(q.clone(), p.clone())).expect("parent recorded").clone();
            let (wp, wq, wr) = (&pts[p], &pts[q], &pts[&r]);
            let side = wr.side_of(wp, wq).ok_or(LightconeError::DegenerateSpan)?.opposite();
            // sides of f: p->q (i), q->n (i+1), n->p (i+2)
            let wn = third_point_exact(wp, wq, lam(f, i + 2), lam(f, i + 1), side)?;
            pts.insert(n.clone(), wn);
            record(f, &mut by_edge);
        }
        Ok(pts)
    }

    pub fn characteristic_points(&self, depth: usize) -> Result<BTreeMap<FareyVertex, LightconePoint>, StructureError> {
        Ok(self.characteristic_points_exact(depth)?.into_iter().map(|(k, v)| (k, v.to_f64())).collect())
    }

    fn paving(&self) -> Paving {
        let sigma = self.simplicial_map();
        let removed: Vec<usize> = (0..sigma.len()).filter(|&o| sigma[o].is_zero()).collect();
        let n = self.tess.face_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for d in 0..self.tess.map.darts() {
            if sigma[self.tess.dart_orbit[d]].is_zero() {
                let (a, b) = (find(&mut parent, d / 3), find(&mut parent, self.tess.map.alpha[d] / 3));
                parent[a] = b;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for f in 0..n {
            let r = find(&mut parent, f);
            groups.entry(r).or_default().push(f);
        }
        let edges = (0..sigma.len())
            .filter(|o| !removed.contains(o))
            .map(|o| self.tess.orbit_keys[o].clone())
            .collect();
        Paving { removed, faces: groups.into_values().collect(), edges }
    }

    /// Flips negative orbits until every simplicial coordinate is
    /// non-negative, always taking the lowest orbit id first.
    pub fn delaunay(&self, max_flips: usize) -> Result<DelaunayOutcome, StructureError> {
        self.delaunay_with(max_flips, |c| c[0])
    }

    /// Delaunay with a random choice among the flippable negative orbits.
    pub fn delaunay_random<R: Rng + ?Sized>(&self, max_flips: usize, rng: &mut R) -> Result<DelaunayOutcome, StructureError> {
        self.delaunay_with(max_flips, |c| c[rng.gen_range(0..c.len())])
    }

    /// Delaunay with a caller-supplied choice among the candidate orbits
    /// (listed in increasing id order).
    pub fn delaunay_with(
        &self,
        max_flips: usize,
        mut choose: impl FnMut(&[usize]) -> usize,
    ) -> Result<DelaunayOutcome, StructureError> {
        let mut cur = self.clone();
        let mut flips = Vec::new();
        loop {
            let sigma = cur.simplicial_map();
            let negative: Vec<usize> = (0..sigma.len()).filter(|&o| sigma[o].is_negative()).collect();
            if negative.is_empty() {
                let paving = cur.paving();
                return Ok(DelaunayOutcome { structure: cur, paving, flips });
            }
            let candidates: Vec<usize> = negative.into_iter().filter(|&o| cur.tess.is_flippable(o)).collect();
            if candidates.is_empty() {
                return Err(StructureError::Stuck);
            }
            if flips.len() >= max_flips {
                return Err(StructureError::NonTermination(max_flips));
            }
            let o = choose(&candidates);
            let e = cur.tess.orbit_rep(o);
            cur = cur.flip_orbit(o)?;
            flips.push(e);
        }
    }

    /// Where this structure sits relative to the cell of `t`.
    pub fn cell_membership(&self, t: &TlcTesselation, max_flips: usize) -> Result<CellMembership, StructureError> {
        let h = self.tess.group.intersect(&t.group);
        let s = self.regroup(&h)?;
        let t = t.regroup(&h)?;
        let out = s.delaunay(max_flips)?;
        let target = t.edge_keys();
        Ok(if out.paving.removed.is_empty() && out.structure.tess.edge_keys() == target {
            CellMembership::InOpenCell
        } else if out.paving.edges.is_subset(&target) {
            CellMembership::InClosedCell
        } else {
            CellMembership::Outside
        })
    }

    /// Whether two structures have the same underlying undecorated
    /// structure: `other` is carried onto this tesselation by flips and the
    /// cross-ratio functions are compared.
    pub fn equal_projected(&self, other: &DecoratedStructure, max_flips: usize) -> Result<bool, StructureError> {
        let h = self.tess.group.intersect(&other.tess.group);
        let a = self.regroup(&h)?;
        let b = other.regroup(&h)?;
        let b = b.transport_to(&a.tess, max_flips)?;
        Ok(a.cross_ratio_function() == b.cross_ratio_function())
    }

    /// The same decorated structure in the coordinates of `target`, which
    /// must share this structure's invariance group.
    pub fn transport_to(&self, target: &TlcTesselation, max_flips: usize) -> Result<DecoratedStructure, StructureError> {
        let path = flip_sequence(&self.tess, target, max_flips)?;
        let mut cur = self.clone();
        let g = self.tess.group.clone();
        for e in &path {
            cur = cur.flip(&g, e)?;
        }
        cur.transplant(target)
    }
}

/// Flips (each for the common group) carrying `from` to the edge set of
/// `to`: unity lambda lengths on `to` are expressed in the coordinates of
/// `from` and the Delaunay algorithm is run from there.
pub fn flip_sequence(from: &TlcTesselation, to: &TlcTesselation, max_flips: usize) -> Result<Vec<OrientedEdge>, StructureError> {
    if from.group != to.group {
        return Err(StructureError::NotInvariant);
    }
    let h = from.group.clone();
    let mut s = DecoratedStructure::unity(to.clone());
    for r in to.history.iter().rev() {
        s = s.flip(&r.group, &r.new_edge)?;
    }
    let on_farey = s.transplant(&TlcTesselation::farey(&h))?;
    let mut s = on_farey;
    for r in &from.history {
        s = s.flip(&r.group, &r.edge)?;
    }
    let s = s.transplant(from)?;
    let out = s.delaunay(max_flips)?;
    debug_assert_eq!(out.structure.tess.edge_keys(), to.edge_keys());
    Ok(out.flips)
}

/// Geometric mean of lambda lengths over each orbit of the coarser group
/// `k`, which must contain the structure's group and leave its tesselation
/// invariant. Roots that are not exact are rounded to `digits` decimals.
pub fn tlc_average(s: &DecoratedStructure, k: &Subgroup, digits: u32) -> Result<DecoratedStructure, StructureError> {
    if !k.contains_subgroup(&s.tess.group) {
        return Err(StructureError::NotInvariant);
    }
    let coarse = s.tess.regroup(k)?;
    let mut products: Vec<(BigRational, u32)> = vec![(BigRational::one(), 0); coarse.orbit_count()];
    for (o, rep) in s.tess.orbit_reps().iter().enumerate() {
        let c = coarse.orbit_of(rep).expect("same edges");
        products[c].0 *= &s.lambda[o];
        products[c].1 += 1;
    }
    let lambda = products.into_iter().map(|(p, n)| nth_root_rational(&p, n, digits)).collect();
    Ok(DecoratedStructure { tess: coarse, lambda })
}

/// `x^(1/n)` for positive `x`: exact when possible, otherwise rounded to a
/// multiple of `10^-digits`.
pub fn nth_root_rational(x: &BigRational, n: u32, digits: u32) -> BigRational {
    let (num, den) = (x.numer(), x.denom());
    let (rn, rd) = (num.nth_root(n), den.nth_root(n));
    if rn.pow(n) == *num && rd.pow(n) == *den {
        return BigRational::new(rn, rd);
    }
    let scale = BigInt::from(10u32).pow(digits);
    // floor((x · 10^(n·digits))^(1/n)) / 10^digits, then round half up
    let big = num * scale.pow(n) * BigInt::from(2u32).pow(n) / den;
    let root2 = big.nth_root(n);
    let rounded: BigInt = (root2 + BigInt::one()) / BigInt::from(2u32);
    BigRational::new(rounded, scale)
}
