//! Distances and coordinate maps between the Klein ball, the Poincaré ball
//! and the upper sheet of the hyperboloid.
//!
//! Points are fixed-size `[f64; D]` vectors. Every formula here works for any
//! `D >= 1`; the diagram pipeline only uses `D = 2`.

use std::fmt;

use serde::de::{Deserialize, Deserializer, Error as _};
use serde::ser::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Arguments of arccosh in `[1 - ACOSH_CLAMP, 1)` are treated as exactly 1.
pub const ACOSH_CLAMP: f64 = 1e-12;

/// Tolerance on `<p,p>_L = -1`, relative to `max(1, x0^2)`.
pub const HYPERBOLOID_TOL: f64 = 1e-12;

/// Smallest admissible denominator of a central projection.
pub const PROJECTION_EPS: f64 = 1e-12;

#[inline]
pub(crate) fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm_sq<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a)
}

#[inline]
pub(crate) fn scale<const D: usize>(a: &[f64; D], s: f64) -> [f64; D] {
    a.map(|x| x * s)
}

#[inline]
pub(crate) fn sub<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| a[i] - b[i])
}

fn check_finite<const D: usize>(coords: &[f64; D]) -> Result<()> {
    if D == 0 {
        return Err(Error::ZeroDimension);
    }
    if coords.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(coords.to_vec()))
    }
}

/// arccosh with the near-one clamp: values slightly below 1 from rounding
/// become 0, anything further below is an error.
pub fn arccosh_clamped(v: f64) -> Result<f64> {
    if v >= 1.0 {
        Ok(v.acosh())
    } else if v >= 1.0 - ACOSH_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::ArccoshDomain(v))
    }
}

/// Whether a distance is reported as the true hyperbolic distance or as the
/// monotone-equivalent argument of its arccosh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Hyperbolic,
    Equivalent,
}

/// A point strictly inside the open unit ball, in Klein coordinates.
#[derive(Clone, Copy, PartialEq)]
pub struct KleinPoint<const D: usize = 2>([f64; D]);

impl<const D: usize> KleinPoint<D> {
    pub fn new(coords: [f64; D]) -> Result<Self> {
        check_finite(&coords)?;
        let norm_sq = norm_sq(&coords);
        if norm_sq < 1.0 {
            Ok(Self(coords))
        } else {
            Err(Error::OutsideBall {
                coords: coords.to_vec(),
                norm_sq,
            })
        }
    }

    pub fn origin() -> Self {
        Self([0.0; D])
    }

    pub fn coords(&self) -> &[f64; D] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.0)
    }

    /// `sqrt(1 - <p,p>)`, strictly positive for every valid point.
    pub(crate) fn height(&self) -> f64 {
        (1.0 - self.norm_sq()).sqrt()
    }
}

impl<const D: usize> fmt::Debug for KleinPoint<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KleinPoint{:?}", self.0)
    }
}

impl<const D: usize> Serialize for KleinPoint<D> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de, const D: usize> Deserialize<'de> for KleinPoint<D> {
    fn deserialize<De: Deserializer<'de>>(deserializer: De) -> std::result::Result<Self, De::Error> {
        let v = Vec::<f64>::deserialize(deserializer)?;
        let coords: [f64; D] = v
            .try_into()
            .map_err(|v: Vec<f64>| De::Error::invalid_length(v.len(), &"a point of the right dimension"))?;
        KleinPoint::new(coords).map_err(De::Error::custom)
    }
}

/// A point of `R^d` before it is lifted onto the hyperboloid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint<const D: usize = 2>([f64; D]);

impl<const D: usize> AmbientPoint<D> {
    pub fn new(coords: [f64; D]) -> Result<Self> {
        check_finite(&coords)?;
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64; D] {
        &self.0
    }
}

/// Weierstrass coordinates `(x0, x)` on the upper sheet `<p,p>_L = -1, x0 >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiPoint<const D: usize = 2> {
    x0: f64,
    x: [f64; D],
}

impl<const D: usize> MinkowskiPoint<D> {
    pub fn new(x0: f64, x: [f64; D]) -> Result<Self> {
        check_finite(&x)?;
        let p = Self { x0, x };
        let residual = minkowski_inner(&p, &p) + 1.0;
        if !x0.is_finite() || x0 < 1.0 || residual.abs() > HYPERBOLOID_TOL * x0.powi(2).max(1.0) {
            return Err(Error::OutsideBall {
                coords: std::iter::once(x0).chain(x).collect(),
                norm_sq: residual - 1.0,
            });
        }
        Ok(p)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn spatial(&self) -> &[f64; D] {
        &self.x
    }
}

/// Central projection from `(c, 0)` onto the hyperplane `x0 = l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSpec {
    c: f64,
    l: f64,
}

impl ProjectionSpec {
    /// The projection from the origin onto `x0 = 1`, which yields Klein coordinates.
    pub const KLEIN: ProjectionSpec = ProjectionSpec { c: 0.0, l: 1.0 };

    pub fn new(c: f64, l: f64) -> Result<Self> {
        if c.is_finite() && l.is_finite() && c < 1.0 && l > 0.0 {
            Ok(Self { c, l })
        } else {
            Err(Error::InvalidProjection { c, l })
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn l(&self) -> f64 {
        self.l
    }
}

/// `arccosh(1 + t)` without forming `1 + t`, with the near-one clamp for
/// slightly negative `t`.
fn arccosh_one_plus(t: f64) -> Result<f64> {
    if t >= 0.0 {
        Ok((t + (t * (t + 2.0)).sqrt()).ln_1p())
    } else {
        arccosh_clamped(1.0 + t)
    }
}

/// `d^K - 1`, written as `(|x-p|^2 - |x^p|^2) / (s_x s_p (1 - <x,p> + s_x s_p))`
/// so that it vanishes exactly at `x = p`.
fn klein_excess<const D: usize>(x: &KleinPoint<D>, p: &KleinPoint<D>) -> f64 {
    let (a, b) = (&x.0, &p.0);
    let mut wedge = 0.0;
    for i in 0..D {
        for j in i + 1..D {
            wedge += (a[i] * b[j] - a[j] * b[i]).powi(2);
        }
    }
    let (sx, sp) = (x.height(), p.height());
    (norm_sq(&sub(a, b)) - wedge) / (sx * sp * (1.0 - dot(a, b) + sx * sp))
}

pub fn klein_distance<const D: usize>(x: &KleinPoint<D>, p: &KleinPoint<D>, measure: Measure) -> Result<f64> {
    let t = klein_excess(x, p);
    match measure {
        Measure::Equivalent => Ok(1.0 + t),
        Measure::Hyperbolic => arccosh_one_plus(t),
    }
}

pub fn weierstrass_lift<const D: usize>(x: &AmbientPoint<D>) -> MinkowskiPoint<D> {
    MinkowskiPoint {
        x0: (1.0 + norm_sq(&x.0)).sqrt(),
        x: x.0,
    }
}

/// `<p,q>_L = -p0 q0 + sum p_i q_i`.
pub fn minkowski_inner<const D: usize>(p: &MinkowskiPoint<D>, q: &MinkowskiPoint<D>) -> f64 {
    -p.x0 * q.x0 + dot(&p.x, &q.x)
}

pub fn hyperboloid_distance<const D: usize>(
    p: &MinkowskiPoint<D>,
    q: &MinkowskiPoint<D>,
    measure: Measure,
) -> Result<f64> {
    // on the sheet, -<p,q>_L - 1 = <p-q, p-q>_L / 2
    let dx0 = p.x0 - q.x0;
    let t = 0.5 * (norm_sq(&sub(&p.x, &q.x)) - dx0 * dx0);
    match measure {
        Measure::Equivalent => Ok(1.0 + t),
        Measure::Hyperbolic => arccosh_one_plus(t),
    }
}

pub fn central_project<const D: usize>(spec: &ProjectionSpec, p: &MinkowskiPoint<D>) -> Result<[f64; D]> {
    let denom = p.x0 - spec.c;
    if denom <= PROJECTION_EPS {
        return Err(Error::DegenerateProjection(denom));
    }
    Ok(scale(&p.x, (spec.l - spec.c) / denom))
}

/// Ambient point to Klein point: Weierstrass lift followed by the projection
/// onto `x0 = 1`.
pub fn ambient_to_klein<const D: usize>(x: &AmbientPoint<D>) -> Result<KleinPoint<D>> {
    let projected = central_project(&ProjectionSpec::KLEIN, &weierstrass_lift(x))?;
    KleinPoint::new(projected)
}

/// Inverse of [`ambient_to_klein`]: rescale by `1 / sqrt(1 - <x,x>)`.
pub fn klein_to_ambient<const D: usize>(x: &KleinPoint<D>) -> AmbientPoint<D> {
    AmbientPoint(scale(&x.0, 1.0 / x.height()))
}

/// Radial map `x_P = x_K / (1 + sqrt(1 - |x_K|^2))`.
pub fn klein_to_poincare<const D: usize>(x: &KleinPoint<D>) -> [f64; D] {
    klein_to_poincare_closed(&x.0)
}

/// [`klein_to_poincare`] extended to the closed ball; it fixes the ideal
/// boundary. Norms slightly above 1 from rounding are treated as 1.
pub fn klein_to_poincare_closed<const D: usize>(x: &[f64; D]) -> [f64; D] {
    scale(x, 1.0 / (1.0 + (1.0 - norm_sq(x)).max(0.0).sqrt()))
}

/// Radial map `x_K = 2 x_P / (1 + |x_P|^2)`.
pub fn poincare_to_klein<const D: usize>(x: &[f64; D]) -> Result<KleinPoint<D>> {
    check_finite(x)?;
    let n = norm_sq(x);
    if n >= 1.0 {
        return Err(Error::OutsideBall {
            coords: x.to_vec(),
            norm_sq: n,
        });
    }
    KleinPoint::new(scale(x, 2.0 / (1.0 + n)))
}
