//! Exact combinatorics of the Farey tesselation.
//!
//! Vertices are extended rationals `p/q` (with `1/0` standing for infinity),
//! edges join Farey neighbours (`|p s - q r| = 1`), and `PSL2(Z)` acts on
//! both through integer Möbius transformations. Everything here is exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FareyError {
    #[error("0/0 is not an extended rational")]
    ZeroOverZero,
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("{0} and {1} are not Farey neighbours")]
    NotNeighbours(FareyVertex, FareyVertex),
    #[error("edge endpoints coincide at {0}")]
    DegenerateEdge(FareyVertex),
    #[error("matrix determinant is {0}, expected 1")]
    BadDeterminant(BigInt),
    #[error("the edge {{0/1, 1/0}} carries no label")]
    UnlabelledEdge,
}

/// A point of `Q ∪ {∞}` stored as a reduced fraction.
///
/// Canonical form: `q > 0`, or `(p, q) = (1, 0)` for infinity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FareyVertex {
    p: BigInt,
    q: BigInt,
}

impl FareyVertex {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self, FareyError> {
        let (mut p, mut q) = (p.into(), q.into());
        if p.is_zero() && q.is_zero() {
            return Err(FareyError::ZeroOverZero);
        }
        if q.is_zero() {
            return Ok(Self::infinity());
        }
        let g = p.gcd(&q);
        p /= &g;
        q /= &g;
        if q.is_negative() {
            p = -p;
            q = -q;
        }
        Ok(FareyVertex { p, q })
    }

    /// Integer `n` as the vertex `n/1`.
    pub fn int(n: i64) -> Self {
        FareyVertex { p: BigInt::from(n), q: BigInt::one() }
    }

    pub fn infinity() -> Self {
        FareyVertex { p: BigInt::one(), q: BigInt::zero() }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    /// The finite value, or `None` at infinity.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_infinity() {
            None
        } else {
            Some(BigRational::new(self.p.clone(), self.q.clone()))
        }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        FareyVertex { p: r.numer().clone(), q: r.denom().clone() }
    }

    /// `p s - q r` for `self = p/q`, `other = r/s`.
    pub fn det(&self, other: &FareyVertex) -> BigInt {
        &self.p * &other.q - &self.q * &other.p
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        if self.is_infinity() {
            f64::INFINITY
        } else {
            BigRational::new(self.p.clone(), self.q.clone()).to_f64().unwrap_or(f64::NAN)
        }
    }
}

impl fmt::Display for FareyVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl fmt::Debug for FareyVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for FareyVertex {
    type Err = FareyError;

    /// Parses `p/q` or a bare integer. `1/0` is infinity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FareyError::Malformed(s.to_string());
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (parse_int(p).ok_or_else(bad)?, parse_int(q).ok_or_else(bad)?),
            None => (parse_int(s).ok_or_else(bad)?, BigInt::one()),
        };
        if q.is_negative() {
            return Err(bad());
        }
        if q.is_zero() && p != BigInt::one() {
            return Err(bad());
        }
        FareyVertex::new(p, q)
    }
}

/// Strict decimal integer: optional leading `-`, then ASCII digits only.
pub(crate) fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || digits.len() > 4096 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl Ord for FareyVertex {
    /// Real-line order with infinity above every finite value.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_infinity(), other.is_infinity()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => (&self.p * &other.q).cmp(&(&other.p * &self.q)),
        }
    }
}

impl PartialOrd for FareyVertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// True iff `a, b, c` are pairwise distinct and appear in this order going
/// counter-clockwise around the boundary circle (increasing along `R`, then
/// through infinity).
pub fn ccw(a: &FareyVertex, b: &FareyVertex, c: &FareyVertex) -> bool {
    (a < b && b < c) || (b < c && c < a) || (c < a && a < b)
}

/// True iff `x` lies strictly inside the counter-clockwise arc from `a` to `b`.
pub fn in_ccw_arc(a: &FareyVertex, x: &FareyVertex, b: &FareyVertex) -> bool {
    ccw(a, x, b)
}

pub fn is_farey_neighbor(a: &FareyVertex, b: &FareyVertex) -> bool {
    a.det(b).abs().is_one()
}

pub fn mediant(a: &FareyVertex, b: &FareyVertex) -> Result<FareyVertex, FareyError> {
    if !is_farey_neighbor(a, b) {
        return Err(FareyError::NotNeighbours(a.clone(), b.clone()));
    }
    FareyVertex::new(&a.p + &b.p, &a.q + &b.q)
}

/// An unordered pair of Farey neighbours: an edge of the Farey tesselation.
///
/// Endpoints are stored in increasing order so that equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FareyEdge {
    a: FareyVertex,
    b: FareyVertex,
}

impl FareyEdge {
    pub fn new(a: FareyVertex, b: FareyVertex) -> Result<Self, FareyError> {
        if a == b {
            return Err(FareyError::DegenerateEdge(a));
        }
        if !is_farey_neighbor(&a, &b) {
            return Err(FareyError::NotNeighbours(a, b));
        }
        Ok(if a < b { FareyEdge { a, b } } else { FareyEdge { a: b, b: a } })
    }

    /// The edge `{0/1, 1/0}`.
    pub fn e0() -> Self {
        FareyEdge { a: FareyVertex::int(0), b: FareyVertex::infinity() }
    }

    pub fn a(&self) -> &FareyVertex {
        &self.a
    }

    pub fn b(&self) -> &FareyVertex {
        &self.b
    }

    pub fn oriented(&self) -> OrientedEdge {
        OrientedEdge { tail: self.a.clone(), head: self.b.clone() }
    }
}

impl fmt::Debug for FareyEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.a, self.b)
    }
}

/// An ideal geodesic with a direction, from `tail` to `head`.
///
/// Unlike [`FareyEdge`] the endpoints need not be Farey neighbours: edges of
/// flipped tesselations join arbitrary rationals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedEdge {
    pub tail: FareyVertex,
    pub head: FareyVertex,
}

/// A distinguished oriented edge.
pub type Doe = OrientedEdge;

impl OrientedEdge {
    pub fn new(tail: FareyVertex, head: FareyVertex) -> Result<Self, FareyError> {
        if tail == head {
            return Err(FareyError::DegenerateEdge(tail));
        }
        Ok(OrientedEdge { tail, head })
    }

    /// The standard DOE `0/1 -> 1/0`.
    pub fn standard() -> Self {
        OrientedEdge { tail: FareyVertex::int(0), head: FareyVertex::infinity() }
    }

    pub fn reversed(&self) -> Self {
        OrientedEdge { tail: self.head.clone(), head: self.tail.clone() }
    }

    /// Endpoints in increasing order, forgetting the direction.
    pub fn unoriented(&self) -> (FareyVertex, FareyVertex) {
        if self.tail < self.head {
            (self.tail.clone(), self.head.clone())
        } else {
            (self.head.clone(), self.tail.clone())
        }
    }

    pub fn same_geodesic(&self, other: &OrientedEdge) -> bool {
        self == other || *self == other.reversed()
    }
}

impl fmt::Debug for OrientedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} -> {})", self.tail, self.head)
    }
}

/// Third vertices of the two Farey triangles on either side of `e`:
/// the mediant and the co-mediant.
pub fn triangles_adjacent(e: &FareyEdge) -> (FareyVertex, FareyVertex) {
    let (a, b) = (&e.a, &e.b);
    // Infinity may need to be read as -1/0 for the co-mediant to be correct,
    // but both sign choices give the same unordered pair {mediant, co-mediant}.
    let m = FareyVertex::new(&a.p + &b.p, &a.q + &b.q).expect("neighbours never sum to 0/0");
    let c = FareyVertex::new(&a.p - &b.p, &a.q - &b.q).expect("neighbours never differ by 0/0");
    (m, c)
}

/// The rational labelling the edge `e`: the third vertex of the adjacent
/// triangle lying on the far side of `e` from `{0/1, 1/0}`.
pub fn edge_label(e: &FareyEdge) -> Result<FareyVertex, FareyError> {
    if *e == FareyEdge::e0() {
        return Err(FareyError::UnlabelledEdge);
    }
    let zero = FareyVertex::int(0);
    let inf = FareyVertex::infinity();
    // An endpoint of e0 that is not an endpoint of e marks the e0 side.
    let witness = if e.a != zero && e.b != zero { zero } else { inf };
    let (m, c) = triangles_adjacent(e);
    let same_side = |x: &FareyVertex| in_ccw_arc(&e.a, x, &e.b) == in_ccw_arc(&e.a, &witness, &e.b);
    Ok(if same_side(&m) { c } else { m })
}

/// A generator letter in the decomposition of a Möbius element:
/// `S: z -> -1/z` or a power of `T: z -> z + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Letter {
    S,
    T(BigInt),
}

/// An element of `PSL2(Z)`, stored as a determinant-one integer matrix with
/// the first nonzero entry of `(m11, m12, m21)` positive.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Moebius {
    m: [BigInt; 4],
}

impl fmt::Debug for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.m[0], self.m[1], self.m[2], self.m[3])
    }
}

impl Moebius {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self, FareyError> {
        let m = [a.into(), b.into(), c.into(), d.into()];
        let det = &m[0] * &m[3] - &m[1] * &m[2];
        if !det.is_one() {
            return Err(FareyError::BadDeterminant(det));
        }
        Ok(Self::canonical(m))
    }

    fn canonical(m: [BigInt; 4]) -> Self {
        let first = m[..3].iter().find(|x| !x.is_zero());
        let negate = match first {
            Some(x) => x.is_negative(),
            None => m[3].is_negative(),
        };
        if negate {
            Moebius { m: m.map(|x| -x) }
        } else {
            Moebius { m }
        }
    }

    pub fn identity() -> Self {
        Self::canonical([1, 0, 0, 1].map(BigInt::from))
    }

    /// `z -> -1/z`, order two; swaps the endpoints of the standard DOE.
    pub fn s() -> Self {
        Self::canonical([0, -1, 1, 0].map(BigInt::from))
    }

    /// `z -> (z - 1)/z`, order three; cycles `0 -> ∞ -> 1 -> 0`.
    pub fn u() -> Self {
        Self::canonical([1, -1, 1, 0].map(BigInt::from))
    }

    /// `z -> z + 1`, equal to `U·S`.
    pub fn t() -> Self {
        Self::canonical([1, 1, 0, 1].map(BigInt::from))
    }

    pub fn t_pow(n: &BigInt) -> Self {
        Self::canonical([BigInt::one(), n.clone(), BigInt::zero(), BigInt::one()])
    }

    pub fn entries(&self) -> &[BigInt; 4] {
        &self.m
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn mul(&self, o: &Moebius) -> Moebius {
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &o.m;
        Self::canonical([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    pub fn inverse(&self) -> Moebius {
        let [a, b, c, d] = &self.m;
        Self::canonical([d.clone(), -b, -c, a.clone()])
    }

    pub fn apply(&self, v: &FareyVertex) -> FareyVertex {
        let [a, b, c, d] = &self.m;
        FareyVertex::new(a * &v.p + b * &v.q, c * &v.p + d * &v.q)
            .expect("invertible matrix maps nonzero vectors to nonzero vectors")
    }

    pub fn apply_edge(&self, e: &OrientedEdge) -> OrientedEdge {
        OrientedEdge { tail: self.apply(&e.tail), head: self.apply(&e.head) }
    }

    /// Writes `self` as `T^n1 S T^n2 S ... T^nk` (a product read left to right).
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        let [mut a, mut b, mut c, mut d] = self.m.clone();
        while !c.is_zero() {
            let n = a.div_floor(&c);
            if !n.is_zero() {
                out.push(Letter::T(n.clone()));
                a -= &n * &c;
                b -= &n * &d;
            }
            // [[a,b],[c,d]] = S · [[c,d],[-a,-b]]
            out.push(Letter::S);
            let (na, nb, nc, nd) = (c, d, -a, -b);
            a = na;
            b = nb;
            c = nc;
            d = nd;
        }
        // Now ±[[1, b], [0, 1]].
        let n = if a.is_negative() { -b } else { b };
        if !n.is_zero() {
            out.push(Letter::T(n));
        }
        out
    }

    /// Rebuilds an element from letters; inverse of [`Moebius::letters`].
    pub fn from_letters(letters: &[Letter]) -> Moebius {
        letters.iter().fold(Moebius::identity(), |acc, l| match l {
            Letter::S => acc.mul(&Moebius::s()),
            Letter::T(n) => acc.mul(&Moebius::t_pow(n)),
        })
    }
}

/// The element of `PSL2(Z)` carrying `∞` to `x`, with the free translation
/// fixed so that `g⁻¹·y ∈ [0, 1)`. Returns `(g, g⁻¹·y)`.
///
/// Two oriented ideal edges are `PSL2(Z)`-equivalent iff their offsets agree,
/// and then `g2 · g1⁻¹` is the unique element carrying one to the other.
pub fn edge_frame(e: &OrientedEdge) -> (Moebius, BigRational) {
    let x = &e.tail;
    let a = if x.is_infinity() {
        Moebius::identity()
    } else {
        // p d - b q = 1
        let eg = x.p.extended_gcd(&x.q);
        let (mut s, mut t) = (eg.x, eg.y);
        if eg.gcd.is_negative() {
            s = -s;
            t = -t;
        }
        Moebius::new(x.p.clone(), -t, x.q.clone(), s).expect("extended gcd gives det 1")
    };
    let y = a.inverse().apply(&e.head);
    let y = y.to_rational().expect("distinct endpoints stay distinct");
    let n = y.floor();
    let g = a.mul(&Moebius::t_pow(n.numer()));
    (g, y - n)
}

/// The unique element of `PSL2(Z)` carrying `from` onto `to`, if any.
pub fn element_carrying(from: &OrientedEdge, to: &OrientedEdge) -> Option<Moebius> {
    let (g1, r1) = edge_frame(from);
    let (g2, r2) = edge_frame(to);
    (r1 == r2).then(|| g2.mul(&g1.inverse()))
}

/// The element carrying the standard DOE `0/1 -> 1/0` onto `e`.
pub fn oriented_edge_to_element(e: &OrientedEdge) -> Result<Moebius, FareyError> {
    let (x, y) = (&e.tail, &e.head);
    if !is_farey_neighbor(x, y) {
        return Err(FareyError::NotNeighbours(x.clone(), y.clone()));
    }
    // g·0 = x (second column), g·∞ = y (first column)
    let det = y.det(x);
    let sign = if det.is_negative() { -BigInt::one() } else { BigInt::one() };
    Moebius::new(&y.p * &sign, x.p.clone(), &y.q * &sign, x.q.clone())
}

pub fn element_to_oriented_edge(g: &Moebius) -> OrientedEdge {
    g.apply_edge(&OrientedEdge::standard())
}

pub fn apply_moebius(g: &Moebius, v: &FareyVertex) -> FareyVertex {
    g.apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> FareyVertex {
        s.parse().unwrap()
    }

    fn edge(a: &str, b: &str) -> FareyEdge {
        FareyEdge::new(v(a), v(b)).unwrap()
    }

    #[test]
    fn canonical_vertices() {
        assert_eq!(FareyVertex::new(2, -4).unwrap(), v("-1/2"));
        assert_eq!(FareyVertex::new(-3, 0).unwrap(), FareyVertex::infinity());
        assert_eq!(FareyVertex::new(0, 0), Err(FareyError::ZeroOverZero));
        assert_eq!(v("7"), FareyVertex::int(7));
        assert!("1/0x".parse::<FareyVertex>().is_err());
        assert!("2/0".parse::<FareyVertex>().is_err());
        assert!("1/-2".parse::<FareyVertex>().is_err());
        assert!("".parse::<FareyVertex>().is_err());
        assert!("+1/2".parse::<FareyVertex>().is_err());
        assert_eq!(v("4/6").to_string(), "2/3");
    }

    #[test]
    fn mediant_examples() {
        assert_eq!(mediant(&v("0/1"), &v("1/1")).unwrap(), v("1/2"));
        assert_eq!(mediant(&v("1/0"), &v("0/1")).unwrap(), v("1/1"));
        assert_eq!(mediant(&v("1/2"), &v("1/1")).unwrap(), v("2/3"));
        assert!(mediant(&v("1/3"), &v("1/5")).is_err());
    }

    #[test]
    fn neighbour_examples() {
        assert!(is_farey_neighbor(&v("0/1"), &v("1/0")));
        assert!(is_farey_neighbor(&v("1/3"), &v("2/5")));
        assert!(!is_farey_neighbor(&v("1/3"), &v("1/5")));
    }

    #[test]
    fn adjacent_triangles() {
        let pair = |e: FareyEdge| {
            let (m, c) = triangles_adjacent(&e);
            for x in [&m, &c] {
                assert!(is_farey_neighbor(x, e.a()) && is_farey_neighbor(x, e.b()));
            }
            (m, c)
        };
        assert_eq!(pair(edge("0/1", "1/0")), (v("1"), v("-1")));
        assert_eq!(pair(edge("0/1", "1/1")), (v("1/2"), v("1/0")));
        assert_eq!(pair(edge("1/2", "1/1")), (v("2/3"), v("0/1")));
    }

    #[test]
    fn labels() {
        assert_eq!(edge_label(&edge("0/1", "1/1")).unwrap(), v("1/2"));
        assert_eq!(edge_label(&edge("1/1", "1/0")).unwrap(), v("2/1"));
        assert_eq!(edge_label(&edge("0/1", "-1/1")).unwrap(), v("-1/2"));
        assert_eq!(edge_label(&edge("-1/1", "1/0")).unwrap(), v("-2/1"));
        assert_eq!(edge_label(&FareyEdge::e0()), Err(FareyError::UnlabelledEdge));
    }

    #[test]
    fn moebius_action() {
        assert_eq!(Moebius::identity().apply(&v("3/5")), v("3/5"));
        assert_eq!(Moebius::new(1, 1, 0, 1).unwrap().apply(&v("0")), v("1"));
        assert_eq!(Moebius::new(0, -1, 1, 0).unwrap().apply(&FareyVertex::infinity()), v("0"));
        assert_eq!(Moebius::u().mul(&Moebius::s()), Moebius::t());
        let u = Moebius::u();
        assert!(u.mul(&u).mul(&u).is_identity());
        assert!(Moebius::s().mul(&Moebius::s()).is_identity());
        assert_eq!(Moebius::new(-1, 0, 0, -1).unwrap(), Moebius::identity());
        assert!(Moebius::new(2, 0, 0, 1).is_err());
    }

    #[test]
    fn edge_element_correspondence() {
        let doe = OrientedEdge::standard();
        assert!(oriented_edge_to_element(&doe).unwrap().is_identity());
        let g = oriented_edge_to_element(&doe.reversed()).unwrap();
        assert_eq!(g, Moebius::new(0, 1, -1, 0).unwrap());
        assert!(g.mul(&g).is_identity());
        let h = Moebius::new(2, 1, 5, 3).unwrap();
        assert_eq!(oriented_edge_to_element(&element_to_oriented_edge(&h)).unwrap(), h);
    }

    #[test]
    fn letters_roundtrip() {
        for m in [
            Moebius::identity(),
            Moebius::s(),
            Moebius::u(),
            Moebius::new(2, 1, 5, 3).unwrap(),
            Moebius::new(-7, 3, -12, 5).unwrap(),
        ] {
            assert_eq!(Moebius::from_letters(&m.letters()), m);
        }
    }

    #[test]
    fn frames() {
        let e = OrientedEdge::new(v("1"), v("-1")).unwrap();
        let (g, r) = edge_frame(&e);
        assert_eq!(g.apply(&FareyVertex::infinity()), v("1"));
        assert_eq!(r, BigRational::new(1.into(), 2.into()));
        let f = Moebius::new(3, 2, 4, 3).unwrap().apply_edge(&e);
        let k = element_carrying(&e, &f).unwrap();
        assert_eq!(k.apply_edge(&e), f);
        let farey = OrientedEdge::new(v("1/3"), v("1/2")).unwrap();
        assert!(element_carrying(&e, &farey).is_none());
    }
}
