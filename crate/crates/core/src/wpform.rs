//! The Weil–Petersson two-form on lambda-length coordinates, its transport
//! under flips, and the kernel given by the decoration fiber.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::farey::OrientedEdge;
use crate::structures::{edge_key, DecoratedStructure, StructureError};
use crate::subgroup::Subgroup;

pub use crate::structures::tlc_average;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WpError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("vector lies in the kernel")]
    IsKernelVector,
}

/// A tangent vector to lambda-length space: one component per edge orbit of
/// the base structure, in orbit-id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentVector {
    pub components: Vec<BigRational>,
}

impl TangentVector {
    pub fn zero(s: &DecoratedStructure) -> Self {
        TangentVector { components: vec![BigRational::zero(); s.tess().orbit_count()] }
    }

    pub fn indicator(s: &DecoratedStructure, orbit: usize) -> Self {
        let mut v = TangentVector::zero(s);
        v.components[orbit] = BigRational::one();
        v
    }

    /// Components given per edge; every orbit must be covered.
    pub fn from_edges(s: &DecoratedStructure, values: &[(OrientedEdge, BigRational)]) -> Result<Self, StructureError> {
        let mut comps: Vec<Option<BigRational>> = vec![None; s.tess().orbit_count()];
        for (e, x) in values {
            let o = s.tess().orbit_of(e).ok_or_else(|| StructureError::NotAnEdge(e.clone()))?;
            match &comps[o] {
                Some(y) if y != x => return Err(StructureError::ConflictingValues(o)),
                _ => comps[o] = Some(x.clone()),
            }
        }
        let components = comps
            .into_iter()
            .enumerate()
            .map(|(o, x)| x.ok_or(StructureError::MissingOrbit(o)))
            .collect::<Result<_, _>>()?;
        Ok(TangentVector { components })
    }

    /// The uniform scaling direction `v = λ`.
    pub fn scaling(s: &DecoratedStructure) -> Self {
        TangentVector { components: s.lambda().to_vec() }
    }

    /// The cusp-scaling direction `v_e = λ_e (f_p + f_q) / 2`, with weights
    /// keyed by [`Subgroup::cusp_key`].
    pub fn cusp_scaling(s: &DecoratedStructure, weights: &BTreeMap<usize, BigRational>) -> Result<Self, StructureError> {
        let g = s.group();
        let w = |x| -> Result<BigRational, StructureError> {
            let k = g.cusp_key(x);
            weights.get(&k).cloned().ok_or(StructureError::MissingCusp(k))
        };
        let components = s
            .tess()
            .orbit_reps()
            .iter()
            .zip(s.lambda())
            .map(|(e, l)| Ok(l * (w(&e.tail)? + w(&e.head)?) / BigRational::from_integer(2.into())))
            .collect::<Result<_, StructureError>>()?;
        Ok(TangentVector { components })
    }

    pub fn add(&self, o: &TangentVector) -> TangentVector {
        TangentVector { components: self.components.iter().zip(&o.components).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, t: &BigRational) -> TangentVector {
        TangentVector { components: self.components.iter().map(|a| a * t).collect() }
    }

    fn check(&self, s: &DecoratedStructure) -> Result<(), StructureError> {
        let want = s.tess().orbit_count();
        if self.components.len() != want {
            return Err(StructureError::DimensionMismatch { got: self.components.len(), want });
        }
        Ok(())
    }

    /// The same vector seen on `s.regroup(h)`.
    pub fn regroup(&self, s: &DecoratedStructure, h: &Subgroup) -> Result<(DecoratedStructure, TangentVector), StructureError> {
        self.check(s)?;
        let fine = s.regroup(h)?;
        let components = fine
            .tess()
            .orbit_reps()
            .iter()
            .map(|e| self.components[s.tess().orbit_of(e).expect("same edges")].clone())
            .collect();
        Ok((fine, TangentVector { components }))
    }
}

/// `−2 Σ d log a ∧ d log b` over the cyclically ordered sides of a triangle,
/// evaluated on `(u, v)`.
pub fn eta_triangle(lambda: [&BigRational; 3], u: [&BigRational; 3], v: [&BigRational; 3]) -> BigRational {
    let mut sum = BigRational::zero();
    for i in 0..3 {
        let j = (i + 1) % 3;
        sum += (u[i] * v[j] - u[j] * v[i]) / (lambda[i] * lambda[j]);
    }
    sum * BigRational::from_integer((-2).into())
}

/// `(2/k) Σ_T η_T(u, v)` over the `k` triangles of a fundamental domain.
pub fn wp_form(s: &DecoratedStructure, u: &TangentVector, v: &TangentVector) -> Result<BigRational, StructureError> {
    u.check(s)?;
    v.check(s)?;
    let t = s.tess();
    let l = s.lambda();
    let mut sum = BigRational::zero();
    for f in 0..t.face_count() {
        let o = t.face_orbits(f);
        sum += eta_triangle(
            o.map(|i| &l[i]),
            o.map(|i| &u.components[i]),
            o.map(|i| &v.components[i]),
        );
    }
    Ok(sum * BigRational::from_integer(2.into()) / BigRational::from_integer(t.face_count().into()))
}

/// Flips `s` along the `k`-orbit of `e` and carries `u` along by the
/// differential of the Ptolemy map.
pub fn flip_tangent(
    s: &DecoratedStructure,
    k: &Subgroup,
    e: &OrientedEdge,
    u: &TangentVector,
) -> Result<(DecoratedStructure, TangentVector), StructureError> {
    u.check(s)?;
    let flipped = s.flip(k, e)?;
    let new_key = edge_key(k, &flipped.tess().history().last().expect("flipped").new_edge);
    let old = |x: &crate::farey::FareyVertex, y: &crate::farey::FareyVertex| {
        let e = OrientedEdge { tail: x.clone(), head: y.clone() };
        let o = s.tess().orbit_of(&e).expect("side survives the flip");
        (s.lambda()[o].clone(), u.components[o].clone())
    };
    let components = flipped
        .tess()
        .orbit_reps()
        .iter()
        .map(|rep| {
            if edge_key(k, rep) == new_key {
                // quadrilateral p, s, q, r counter-clockwise; old diagonal r–s
                let [p, q, r, sv] = flipped.tess().quad_of(rep).expect("rep is an edge");
                let (a, ua) = old(&p, &sv);
                let (b, ub) = old(&sv, &q);
                let (c, uc) = old(&q, &r);
                let (d, ud) = old(&r, &p);
                let (ee, ue) = old(&r, &sv);
                ptolemy_differential([&a, &b, &c, &d, &ee], [&ua, &ub, &uc, &ud, &ue])
            } else {
                u.components[s.tess().orbit_of(rep).expect("unflipped edge")].clone()
            }
        })
        .collect();
    Ok((flipped, TangentVector { components }))
}

/// Derivative of `(ac + bd)/e` along `(u_a, u_b, u_c, u_d, u_e)`.
pub fn ptolemy_differential(l: [&BigRational; 5], u: [&BigRational; 5]) -> BigRational {
    let [a, b, c, d, e] = l;
    let [ua, ub, uc, ud, ue] = u;
    (ua * c + a * uc + ub * d + b * ud) / e - (a * c + b * d) * ue / (e * e)
}

/// `v_a/λ_a + v_c/λ_c − v_b/λ_b − v_d/λ_d` on the quadrilateral of each orbit.
pub fn cross_ratio_derivative(s: &DecoratedStructure, v: &TangentVector) -> Result<Vec<BigRational>, StructureError> {
    v.check(s)?;
    let l = s.lambda();
    let r = |i: usize| &v.components[i] / &l[i];
    Ok((0..s.tess().orbit_count())
        .map(|o| {
            let [a, b, c, d, _] = s.tess().quad_orbits(o);
            r(a) + r(c) - r(b) - r(d)
        })
        .collect())
}

/// Whether `v` is tangent to the decoration fiber, i.e. leaves every
/// cross-ratio fixed to first order.
pub fn kernel_test(s: &DecoratedStructure, v: &TangentVector) -> Result<bool, StructureError> {
    Ok(cross_ratio_derivative(s, v)?.iter().all(Zero::is_zero))
}

/// An indicator vector `u` with `ω(u, v) ≠ 0`: the diagonal of a
/// quadrilateral whose cross-ratio `v` moves, if that works, else any orbit.
pub fn nondegenerate_partner(s: &DecoratedStructure, v: &TangentVector) -> Result<TangentVector, WpError> {
    let deriv = cross_ratio_derivative(s, v)?;
    if deriv.iter().all(Zero::is_zero) {
        return Err(WpError::IsKernelVector);
    }
    let witnesses = (0..deriv.len()).filter(|&o| !deriv[o].is_zero());
    let rest = (0..deriv.len()).filter(|&o| deriv[o].is_zero());
    for o in witnesses.chain(rest) {
        let u = TangentVector::indicator(s, o);
        if !wp_form(s, &u, v)?.is_zero() {
            return Ok(u);
        }
    }
    Err(WpError::IsKernelVector)
}
