//! Minkowski 3-space with the form `x² + y² − z²`, the positive light cone,
//! and the lambda-length calculus on it.
//!
//! Two backends live here. The `f64` types ([`MinkowskiVector`],
//! [`LightconePoint`]) are for rendering and numerical cross-checks.
//! [`ExactPoint`] stores `√2·v` with rational coordinates: for rational lambda
//! lengths every point produced by [`realize_triangle_exact`] and
//! [`third_point_exact`] stays rational in that scaling, so predicates on it
//! are exact.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{NumOps, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LightconeError {
    #[error("pairing is positive ({0}); points are not both on the light cone")]
    PositivePairing(f64),
    #[error("points span a degenerate plane")]
    DegenerateSpan,
    #[error("lambda lengths must be positive")]
    NonPositiveLength,
    #[error("not on the positive light cone")]
    NotOnCone,
    #[error("coefficient {0} has no rational square root")]
    Irrational(String),
    #[error("post-condition check failed: {0}")]
    PostCondition(&'static str),
}

/// Side of the plane through the origin spanned by two cone points, read in
/// the projective disk: `Left` of the chord from the first point to the
/// second means `det(v1, v2, v3) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneType {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MinkowskiVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl MinkowskiVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        MinkowskiVector { x, y, z }
    }

    pub fn scale(self, t: f64) -> Self {
        MinkowskiVector::new(self.x * t, self.y * t, self.z * t)
    }

    /// Euclidean cross product followed by `diag(1,1,-1)`: Minkowski-orthogonal
    /// to both arguments.
    pub fn lorentz_cross(self, o: Self) -> Self {
        MinkowskiVector::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            -(self.x * o.y - self.y * o.x),
        )
    }

    pub fn dist(self, o: Self) -> f64 {
        ((self.x - o.x).powi(2) + (self.y - o.y).powi(2) + (self.z - o.z).powi(2)).sqrt()
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

impl Add for MinkowskiVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        MinkowskiVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for MinkowskiVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        MinkowskiVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for MinkowskiVector {
    type Output = Self;
    fn neg(self) -> Self {
        MinkowskiVector::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for MinkowskiVector {
    type Output = Self;
    fn mul(self, t: f64) -> Self {
        self.scale(t)
    }
}

pub fn pairing(u: &MinkowskiVector, v: &MinkowskiVector) -> f64 {
    u.x * v.x + u.y * v.y - u.z * v.z
}

fn det3(a: MinkowskiVector, b: MinkowskiVector, c: MinkowskiVector) -> f64 {
    a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x)
}

/// A point of `L+`, standing for a horocycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightconePoint(pub MinkowskiVector);

impl LightconePoint {
    /// Accepts `v` when `⟨v,v⟩` is negligible relative to `z²` and `z > 0`.
    pub fn new(v: MinkowskiVector) -> Result<Self, LightconeError> {
        if v.z > 0.0 && pairing(&v, &v).abs() <= 1e-9 * v.z * v.z {
            Ok(LightconePoint(v))
        } else {
            Err(LightconeError::NotOnCone)
        }
    }

    pub fn v(&self) -> MinkowskiVector {
        self.0
    }

    /// The point on the unit circle that this ray projects to.
    pub fn circle_point(&self) -> (f64, f64) {
        (self.0.x / self.0.z, self.0.y / self.0.z)
    }
}

pub fn lambda_length(u: &LightconePoint, v: &LightconePoint) -> Result<f64, LightconeError> {
    let p = pairing(&u.0, &v.0);
    let tol = 1e-12 * u.0.z * v.0.z;
    if p > tol {
        return Err(LightconeError::PositivePairing(p));
    }
    Ok((-p).max(0.0).sqrt())
}

const BASE_RAYS: [MinkowskiVector; 3] = [
    MinkowskiVector { x: -1.0, y: 0.0, z: 1.0 },
    MinkowskiVector { x: 1.0, y: 0.0, z: 1.0 },
    MinkowskiVector { x: 0.0, y: -1.0, z: 1.0 },
];

/// Points on the rays over `−1, +1, −i` with the given pairwise lambda lengths.
pub fn realize_triangle(l12: f64, l13: f64, l23: f64) -> Result<[LightconePoint; 3], LightconeError> {
    if !(l12 > 0.0 && l13 > 0.0 && l23 > 0.0) {
        return Err(LightconeError::NonPositiveLength);
    }
    let c = |i: usize, j: usize| -pairing(&BASE_RAYS[i], &BASE_RAYS[j]);
    let l = [[0.0, l12, l13], [l12, 0.0, l23], [l13, l23, 0.0]];
    let mut out = [LightconePoint(MinkowskiVector::default()); 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let t = l[i][j] * l[i][k] / l[j][k] * (c(j, k) / (c(i, j) * c(i, k))).sqrt();
        out[i] = LightconePoint(BASE_RAYS[i].scale(t));
    }
    Ok(out)
}

/// The unique cone point with lambda lengths `l13` to `v1` and `l23` to `v2`
/// on the requested side of the plane spanned by `v1, v2`.
pub fn third_point(
    v1: &LightconePoint,
    v2: &LightconePoint,
    l13: f64,
    l23: f64,
    side: Side,
) -> Result<LightconePoint, LightconeError> {
    if !(l13 > 0.0 && l23 > 0.0) {
        return Err(LightconeError::NonPositiveLength);
    }
    let (w1, w2) = (v1.0, v2.0);
    let g = pairing(&w1, &w2);
    let n = w1.lorentz_cross(w2);
    let nn = pairing(&n, &n);
    if g >= 0.0 || nn <= 0.0 {
        return Err(LightconeError::DegenerateSpan);
    }
    let l12sq = -g;
    let a = l13 * l13 / l12sq;
    let b = l23 * l23 / l12sq;
    let c2 = -2.0 * a * b * g / nn;
    let mut c = c2.max(0.0).sqrt();
    // ⟨n, w3⟩ = c⟨n,n⟩ and ⟨n, w⟩ = det(w1, w2, w)
    if side == Side::Right {
        c = -c;
    }
    let w3 = w2 * a + w1 * b + n * c;
    let tol = 1e-9;
    let err = |x: f64, want: f64| (x - want).abs() > tol * want.max(1.0);
    if err(-pairing(&w3, &w1), l13 * l13) || err(-pairing(&w3, &w2), l23 * l23) {
        return Err(LightconeError::PostCondition("third point lambda lengths"));
    }
    debug_assert!(det3(w1, w2, w3) * if side == Side::Left { 1.0 } else { -1.0 } >= 0.0);
    LightconePoint::new(w3)
}

/// Classification of the plane through three cone points by the triangle
/// inequalities on their lambda lengths.
pub fn plane_type_from_lengths<T: Clone + PartialOrd + NumOps>(l12: &T, l13: &T, l23: &T) -> PlaneType {
    let sums = [
        (l12.clone() + l13.clone(), l23),
        (l12.clone() + l23.clone(), l13),
        (l13.clone() + l23.clone(), l12),
    ];
    if sums.iter().all(|(s, x)| s > *x) {
        PlaneType::Elliptic
    } else if sums.iter().any(|(s, x)| s == *x) {
        PlaneType::Parabolic
    } else {
        PlaneType::Hyperbolic
    }
}

/// Float classification; equalities are detected to relative `1e-12`.
pub fn plane_type(u1: &LightconePoint, u2: &LightconePoint, u3: &LightconePoint) -> Result<PlaneType, LightconeError> {
    let l = [lambda_length(u1, u2)?, lambda_length(u1, u3)?, lambda_length(u2, u3)?];
    let scale = l.iter().cloned().fold(0.0, f64::max);
    let snap = |x: f64| (x / scale * 1e12).round();
    Ok(plane_type_from_lengths(&snap(l[0]), &snap(l[1]), &snap(l[2])))
}

/// New diagonal of a quadrilateral with sides `a, b, c, d` in cyclic order
/// and diagonal `e`: `(ac + bd)/e`.
pub fn ptolemy_flip<T: Clone + NumOps>(a: &T, b: &T, c: &T, d: &T, e: &T) -> T {
    (a.clone() * c.clone() + b.clone() * d.clone()) / e.clone()
}

/// `λ23·λ34 / (λ12·λ14)`.
pub fn cross_ratio<T: Clone + NumOps>(l23: &T, l34: &T, l12: &T, l14: &T) -> T {
    (l23.clone() * l34.clone()) / (l12.clone() * l14.clone())
}

/// Simplicial coordinate of the diagonal `13` of the quadrilateral `1234`.
pub fn simplicial_coordinate<T: Clone + NumOps>(l12: &T, l23: &T, l31: &T, l14: &T, l43: &T) -> T {
    let sq = |x: &T| x.clone() * x.clone();
    let h1 = (sq(l12) + sq(l23) - sq(l31)) / (l12.clone() * l23.clone() * l31.clone());
    let h2 = (sq(l14) + sq(l43) - sq(l31)) / (l14.clone() * l43.clone() * l31.clone());
    h1 + h2
}

/// Exact square root of a non-negative rational, if it is rational.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

/// A light-cone point stored as `√2·v` with rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactPoint {
    pub x: BigRational,
    pub y: BigRational,
    pub z: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl ExactPoint {
    pub fn new(x: BigRational, y: BigRational, z: BigRational) -> Result<Self, LightconeError> {
        let p = ExactPoint { x, y, z };
        if p.z.is_positive() && p.self_pairing().is_zero() {
            Ok(p)
        } else {
            Err(LightconeError::NotOnCone)
        }
    }

    pub fn from_ints(x: i64, y: i64, z: i64) -> Result<Self, LightconeError> {
        Self::new(rat(x), rat(y), rat(z))
    }

    fn self_pairing(&self) -> BigRational {
        &self.x * &self.x + &self.y * &self.y - &self.z * &self.z
    }

    fn scaled(&self, t: &BigRational) -> ExactPoint {
        ExactPoint { x: &self.x * t, y: &self.y * t, z: &self.z * t }
    }

    /// `⟨w, w'⟩ = 2⟨v, v'⟩` on the stored coordinates.
    pub fn raw_pairing(&self, o: &ExactPoint) -> BigRational {
        &self.x * &o.x + &self.y * &o.y - &self.z * &o.z
    }

    /// Squared lambda length `−⟨v, v'⟩`.
    pub fn lambda_sq(&self, o: &ExactPoint) -> BigRational {
        -self.raw_pairing(o) / rat(2)
    }

    pub fn lambda(&self, o: &ExactPoint) -> Result<BigRational, LightconeError> {
        let sq = self.lambda_sq(o);
        rational_sqrt(&sq).ok_or_else(|| LightconeError::Irrational(sq.to_string()))
    }

    /// Euclidean determinant `det(self, b, c)`; its sign gives the side.
    pub fn det(&self, b: &ExactPoint, c: &ExactPoint) -> BigRational {
        &self.x * (&b.y * &c.z - &b.z * &c.y) - &self.y * (&b.x * &c.z - &b.z * &c.x)
            + &self.z * (&b.x * &c.y - &b.y * &c.x)
    }

    pub fn side_of(&self, v1: &ExactPoint, v2: &ExactPoint) -> Option<Side> {
        match v1.det(v2, self).numer().sign() {
            Sign::Plus => Some(Side::Left),
            Sign::Minus => Some(Side::Right),
            Sign::NoSign => None,
        }
    }

    pub fn to_f64(&self) -> LightconePoint {
        use num_traits::ToPrimitive;
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN) / std::f64::consts::SQRT_2;
        LightconePoint(MinkowskiVector::new(f(&self.x), f(&self.y), f(&self.z)))
    }
}

/// Classifies the affine plane through three exact cone points by the
/// Minkowski type of its normal `v` (with `⟨w_i, v⟩ = 1`): timelike normal
/// is elliptic, null is parabolic, spacelike is hyperbolic.
pub fn plane_type_exact(w1: &ExactPoint, w2: &ExactPoint, w3: &ExactPoint) -> Result<PlaneType, LightconeError> {
    let d = w1.det(w2, w3);
    if d.is_zero() {
        return Err(LightconeError::DegenerateSpan);
    }
    // Solve M·x = (1,1,1) with rows w_i by Cramer's rule; then v = J·x.
    let ones = ExactPoint { x: rat(1), y: rat(1), z: rat(1) };
    let col = |k: usize| {
        let pick = |w: &ExactPoint| match k {
            0 => w.x.clone(),
            1 => w.y.clone(),
            _ => w.z.clone(),
        };
        ExactPoint { x: pick(w1), y: pick(w2), z: pick(w3) }
    };
    let (c0, c1, c2) = (col(0), col(1), col(2));
    let x0 = ones.det(&c1, &c2) / &d;
    let x1 = c0.det(&ones, &c2) / &d;
    let x2 = c0.det(&c1, &ones) / &d;
    let vv = &x0 * &x0 + &x1 * &x1 - &x2 * &x2;
    Ok(match vv.numer().sign() {
        Sign::Minus => PlaneType::Elliptic,
        Sign::NoSign => PlaneType::Parabolic,
        Sign::Plus => PlaneType::Hyperbolic,
    })
}

/// Exact version of [`realize_triangle`].
pub fn realize_triangle_exact(
    l12: &BigRational,
    l13: &BigRational,
    l23: &BigRational,
) -> Result<[ExactPoint; 3], LightconeError> {
    if !(l12.is_positive() && l13.is_positive() && l23.is_positive()) {
        return Err(LightconeError::NonPositiveLength);
    }
    // √2·t_i with c12 = 2 and c13 = c23 = 1
    let s1 = l12 * l13 / l23;
    let s2 = l12 * l23 / l13;
    let s3 = rat(2) * l13 * l23 / l12;
    let base = [(-1, 0, 1), (1, 0, 1), (0, -1, 1)]
        .map(|(x, y, z)| ExactPoint { x: rat(x), y: rat(y), z: rat(z) });
    Ok([base[0].scaled(&s1), base[1].scaled(&s2), base[2].scaled(&s3)])
}

/// Exact version of [`third_point`].
pub fn third_point_exact(
    w1: &ExactPoint,
    w2: &ExactPoint,
    l13: &BigRational,
    l23: &BigRational,
    side: Side,
) -> Result<ExactPoint, LightconeError> {
    if !(l13.is_positive() && l23.is_positive()) {
        return Err(LightconeError::NonPositiveLength);
    }
    let g = w1.raw_pairing(w2);
    if !g.is_negative() {
        return Err(LightconeError::DegenerateSpan);
    }
    let n = ExactPoint {
        x: &w1.y * &w2.z - &w1.z * &w2.y,
        y: &w1.z * &w2.x - &w1.x * &w2.z,
        z: -(&w1.x * &w2.y - &w1.y * &w2.x),
    };
    let nn = n.self_pairing();
    if !nn.is_positive() {
        return Err(LightconeError::DegenerateSpan);
    }
    let l12sq = -&g / rat(2);
    let a = l13 * l13 / &l12sq;
    let b = l23 * l23 / &l12sq;
    let c2 = -rat(2) * &a * &b * &g / &nn;
    let mut c = rational_sqrt(&c2).ok_or_else(|| LightconeError::Irrational(c2.to_string()))?;
    if side == Side::Right {
        c = -c;
    }
    let w3 = ExactPoint {
        x: &a * &w2.x + &b * &w1.x + &c * &n.x,
        y: &a * &w2.y + &b * &w1.y + &c * &n.y,
        z: &a * &w2.z + &b * &w1.z + &c * &n.z,
    };
    if w3.lambda_sq(w1) != l13 * l13 || w3.lambda_sq(w2) != l23 * l23 || !w3.self_pairing().is_zero() {
        return Err(LightconeError::PostCondition("third point lambda lengths"));
    }
    if !w3.z.is_positive() {
        return Err(LightconeError::NotOnCone);
    }
    Ok(w3)
}

/// For four cone points with `v1, v3` the diagonal of the quadrilateral
/// `v1 v2 v3 v4`, returns `μ` such that some point of the segment `v1v3`
/// equals `μ` times a point of the segment `v2v4`. The diagonal `v1v3` lies
/// below (closer to the origin than) `v2v4` iff `μ < 1`, and the four points
/// are coplanar iff `μ = 1`.
pub fn diagonal_height(v1: &ExactPoint, v2: &ExactPoint, v3: &ExactPoint, v4: &ExactPoint) -> Option<BigRational> {
    // Kernel of the 3×4 matrix [v1, v3, −v2, −v4] by signed 3×3 minors.
    let neg = |p: &ExactPoint| ExactPoint { x: -&p.x, y: -&p.y, z: -&p.z };
    let cols = [v1.clone(), v3.clone(), neg(v2), neg(v4)];
    let minor = |skip: usize| {
        let rest: Vec<&ExactPoint> = (0..4).filter(|&j| j != skip).map(|j| &cols[j]).collect();
        rest[0].det(rest[1], rest[2])
    };
    let x: Vec<BigRational> = (0..4)
        .map(|j| if j % 2 == 0 { minor(j) } else { -minor(j) })
        .collect();
    let total = &x[0] + &x[1];
    if total.is_zero() {
        return None;
    }
    Some((&x[2] + &x[3]) / total)
}
