//! The hemisphere potential `y = sqrt(1 - <x,x>)`, its tangent planes at the
//! sites, affine bisectors and the map from k-subsets of sites to weighted
//! balls of a power diagram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, norm_sq, scale, sub, AmbientPoint, KleinPoint};

/// Tolerance beyond the unit sphere still accepted by [`potential`].
pub const POTENTIAL_SLACK: f64 = 1e-12;

/// Two points closer than this in every coordinate have no bisector.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Graph `y = intercept + <slope, x>` of an affine function over the ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedHyperplane<const D: usize = 2> {
    pub slope: [f64; D],
    pub intercept: f64,
}

impl<const D: usize> LiftedHyperplane<D> {
    pub fn eval(&self, x: &[f64; D]) -> f64 {
        self.intercept + dot(&self.slope, x)
    }
}

/// The hyperplane `{x : <normal, x> = offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBisector<const D: usize = 2> {
    normal: [f64; D],
    offset: f64,
}

impl<const D: usize> AffineBisector<D> {
    pub fn new(normal: [f64; D], offset: f64) -> Result<Self> {
        if normal.iter().all(|&u| u == 0.0) {
            return Err(Error::DegenerateBisector);
        }
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> &[f64; D] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `<normal, x> - offset`.
    pub fn eval(&self, x: &[f64; D]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    /// Rescaled so that the normal has unit length and its first
    /// non-negligible component is positive.
    pub fn normalized(&self) -> Self {
        let len = norm_sq(&self.normal).sqrt();
        let lead = self
            .normal
            .iter()
            .copied()
            .find(|u| u.abs() > 1e-9 * len)
            .unwrap_or(1.0);
        let s = lead.signum() / len;
        Self {
            normal: scale(&self.normal, s),
            offset: self.offset * s,
        }
    }
}

/// Strictly increasing site indices naming one cell of an order-k diagram.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetGenerator(Vec<usize>);

impl SubsetGenerator {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let valid = !indices.is_empty()
            && indices.len() <= n
            && indices.windows(2).all(|w| w[0] < w[1])
            && indices.last().is_some_and(|&i| i < n);
        if valid {
            Ok(Self(indices))
        } else {
            Err(Error::InvalidSubset { indices, n })
        }
    }

    pub fn singleton(index: usize) -> Self {
        Self(vec![index])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }
}

/// Center and weight (squared radius, possibly negative) of a power-diagram ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSite<const D: usize = 2> {
    pub center: [f64; D],
    pub weight: f64,
}

impl<const D: usize> WeightedSite<D> {
    /// The affine part of the power function, `h(x) = -2<x,c> - w + <c,c>`.
    pub fn power_plane(&self) -> LiftedHyperplane<D> {
        LiftedHyperplane {
            slope: scale(&self.center, -2.0),
            intercept: norm_sq(&self.center) - self.weight,
        }
    }
}

pub fn potential<const D: usize>(x: &[f64; D]) -> Result<f64> {
    let n = norm_sq(x);
    if !n.is_finite() || n > 1.0 + POTENTIAL_SLACK {
        return Err(Error::OutsideBall {
            coords: x.to_vec(),
            norm_sq: n,
        });
    }
    Ok((1.0 - n).max(0.0).sqrt())
}

pub fn potential_gradient<const D: usize>(p: &KleinPoint<D>) -> [f64; D] {
    scale(p.coords(), -1.0 / p.height())
}

/// Tangent plane of the hemisphere at the lifted site, i.e. the graph of
/// `x -> (1 - <x,p>) / sqrt(1 - <p,p>)`.
pub fn site_hyperplane<const D: usize>(p: &KleinPoint<D>) -> LiftedHyperplane<D> {
    let s = p.height();
    if s < 1e-3 {
        log::debug!("site {:?} is near the ideal boundary; tangent plane slope ~{:.3e}", p, 1.0 / s);
    }
    LiftedHyperplane {
        slope: scale(p.coords(), -1.0 / s),
        intercept: 1.0 / s,
    }
}

fn coincide<const D: usize>(a: &[f64; D], b: &[f64; D]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= COINCIDENCE_TOL)
}

/// Locus where the two site planes agree: `<p/s_p - q/s_q, x> = 1/s_p - 1/s_q`.
pub fn klein_bisector<const D: usize>(p: &KleinPoint<D>, q: &KleinPoint<D>) -> Result<AffineBisector<D>> {
    if coincide(p.coords(), q.coords()) {
        return Err(Error::DegenerateBisector);
    }
    let (sp, sq) = (p.height(), q.height());
    let normal = sub(&scale(p.coords(), 1.0 / sp), &scale(q.coords(), 1.0 / sq));
    AffineBisector::new(normal, 1.0 / sp - 1.0 / sq)
}

/// Bisector of two Weierstrass-lifted points, written in the Klein
/// coordinate `x' = x / sqrt(1 + <x,x>)`: `<p - q, x'> = a_pq`.
pub fn hyperboloid_bisector<const D: usize>(p: &AmbientPoint<D>, q: &AmbientPoint<D>) -> Result<AffineBisector<D>> {
    if coincide(p.coords(), q.coords()) {
        return Err(Error::DegenerateBisector);
    }
    let a = (1.0 + norm_sq(p.coords())).sqrt() - (1.0 + norm_sq(q.coords())).sqrt();
    AffineBisector::new(sub(p.coords(), q.coords()), a)
}

pub fn subset_to_ball<const D: usize>(subset: &SubsetGenerator, sites: &[KleinPoint<D>]) -> Result<WeightedSite<D>> {
    if subset.indices().last().is_some_and(|&i| i >= sites.len()) {
        return Err(Error::InvalidSubset {
            indices: subset.indices().to_vec(),
            n: sites.len(),
        });
    }
    let mut center = [0.0; D];
    let mut constant = 0.0;
    for &i in subset.indices() {
        let p = &sites[i];
        let inv_s = 1.0 / p.height();
        for (c, x) in center.iter_mut().zip(p.coords()) {
            *c += 0.5 * x * inv_s;
        }
        constant += inv_s;
    }
    Ok(WeightedSite {
        center,
        weight: norm_sq(&center) - constant,
    })
}
