//! Brute-force ground truth for diagram construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{site_hyperplane, SubsetGenerator};
use crate::model::{klein_distance, KleinPoint, Measure};
use crate::par::{map_collect, Execution};
use crate::power::ClippedDiagram;

/// Result of a k-nearest query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Neighborhood {
    Set(SubsetGenerator),
    /// The k-th and (k+1)-th distances are within the margin.
    Ambiguous,
}

fn check_order(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidOrder { k, n })
    } else {
        Ok(())
    }
}

/// The `k` sites nearest to `x`, ranked by the equivalent Klein distance.
/// The margin is measured on the equivalent distance.
pub fn k_nearest_set(x: &KleinPoint, sites: &[KleinPoint], k: usize, margin: f64) -> Result<Neighborhood> {
    check_order(k, sites.len())?;
    let mut ranked: Vec<(f64, usize)> = sites
        .iter()
        .enumerate()
        .map(|(i, p)| klein_distance(x, p, Measure::Equivalent).map(|d| (d, i)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if k < ranked.len() && ranked[k].0 - ranked[k - 1].0 < margin {
        return Ok(Neighborhood::Ambiguous);
    }
    let mut idx: Vec<usize> = ranked[..k].iter().map(|&(_, i)| i).collect();
    idx.sort_unstable();
    SubsetGenerator::new(idx, sites.len()).map(Neighborhood::Set)
}

/// Site indices sorted by the value of their lifted plane at `x` (ties by index).
pub fn level_of_point(x: &KleinPoint, sites: &[KleinPoint]) -> Vec<usize> {
    let values: Vec<f64> = sites.iter().map(|p| site_hyperplane(p).eval(x.coords())).collect();
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub agreements: usize,
    pub margin_skipped: usize,
    /// Largest k-th/(k+1)-th distance gap among disagreeing samples; 0 when
    /// every checked sample agrees.
    pub max_violation_margin: f64,
    pub seed: u64,
    /// Agreements over non-skipped samples; `None` when nothing was checked.
    pub agreement_ratio: Option<f64>,
}

impl VerificationReport {
    pub fn checked(&self) -> usize {
        self.samples - self.margin_skipped
    }

    pub fn is_perfect(&self) -> bool {
        self.agreement_ratio == Some(1.0)
    }

    pub fn skipped_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.margin_skipped as f64 / self.samples as f64
        }
    }
}

/// Uniform points in the open disk of the given radius, by rejection from
/// the bounding square.
pub fn sample_disk(radius: f64, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = [rng.gen_range(-radius..radius), rng.gen_range(-radius..radius)];
        if p[0] * p[0] + p[1] * p[1] < radius * radius {
            out.push(p);
        }
    }
    out
}

enum Outcome {
    Agree,
    Skip,
    Disagree(f64),
}

fn gap_at(x: &KleinPoint, sites: &[KleinPoint], k: usize) -> f64 {
    if k >= sites.len() {
        return f64::INFINITY;
    }
    let mut d: Vec<f64> = sites
        .iter()
        .map(|p| klein_distance(x, p, Measure::Equivalent).unwrap_or(f64::NAN))
        .collect();
    d.sort_by(f64::total_cmp);
    d[k] - d[k - 1]
}

pub fn verify_diagram(diagram: &ClippedDiagram, n_samples: usize, seed: u64, margin: f64) -> VerificationReport {
    verify_diagram_with(diagram, n_samples, seed, margin, Execution::default())
}

/// Compares `locate` against [`k_nearest_set`] on seeded uniform samples.
/// Samples are drawn sequentially and evaluated independently, so the report
/// does not depend on `exec`.
pub fn verify_diagram_with(
    diagram: &ClippedDiagram,
    n_samples: usize,
    seed: u64,
    margin: f64,
    exec: Execution,
) -> VerificationReport {
    let points = sample_disk(diagram.clip_radius, n_samples, seed);
    let k = diagram.order;
    let outcomes = map_collect(&points, exec, |p| {
        let Ok(x) = KleinPoint::new(*p) else {
            return Outcome::Skip;
        };
        match k_nearest_set(&x, &diagram.sites, k, margin) {
            Ok(Neighborhood::Set(expected)) => match diagram.locate_cell(p) {
                Ok(i) if diagram.cells[i].generator == expected => Outcome::Agree,
                _ => Outcome::Disagree(gap_at(&x, &diagram.sites, k)),
            },
            Ok(Neighborhood::Ambiguous) | Err(_) => Outcome::Skip,
        }
    });
    let mut report = VerificationReport {
        samples: n_samples,
        agreements: 0,
        margin_skipped: 0,
        max_violation_margin: 0.0,
        seed,
        agreement_ratio: None,
    };
    for o in outcomes {
        match o {
            Outcome::Agree => report.agreements += 1,
            Outcome::Skip => report.margin_skipped += 1,
            Outcome::Disagree(gap) => report.max_violation_margin = report.max_violation_margin.max(gap),
        }
    }
    if report.checked() > 0 {
        report.agreement_ratio = Some(report.agreements as f64 / report.checked() as f64);
    }
    report
}

/// Membership counts of sampled points over the cells of a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TilingReport {
    pub samples: usize,
    /// Points inside exactly one cell (edge tolerance 1e-9).
    pub covered_once: usize,
    /// Points in no cell.
    pub uncovered: usize,
    /// Points strictly inside (by more than 1e-9) two or more cells.
    pub strictly_shared: usize,
}

/// Samples the disk of radius `clip_radius - 1e-9` and counts cell memberships.
pub fn check_tiling(diagram: &ClippedDiagram, n_samples: usize, seed: u64) -> TilingReport {
    let points = sample_disk(diagram.clip_radius - 1e-9, n_samples, seed);
    let counts = map_collect(&points, Execution::default(), |p| {
        let slacks: Vec<f64> = diagram.cells.iter().map(|c| c.slack(p)).collect();
        let loose = slacks.iter().filter(|&&s| s >= -1e-9).count();
        let strict = slacks.iter().filter(|&&s| s > 1e-9).count();
        (loose, strict)
    });
    let mut report = TilingReport {
        samples: n_samples,
        covered_once: 0,
        uncovered: 0,
        strictly_shared: 0,
    };
    for (loose, strict) in counts {
        match loose {
            0 => report.uncovered += 1,
            1 => report.covered_once += 1,
            _ => {}
        }
        if strict > 1 {
            report.strictly_shared += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::build_hvd;

    fn k(x: f64, y: f64) -> KleinPoint {
        KleinPoint::new([x, y]).unwrap()
    }

    fn set(v: &[usize], n: usize) -> Neighborhood {
        Neighborhood::Set(SubsetGenerator::new(v.to_vec(), n).unwrap())
    }

    #[test]
    fn single_site_is_always_nearest() {
        let sites = [k(0.4, 0.4)];
        for x in [k(0.0, 0.0), k(-0.9, 0.0), k(0.4, 0.4)] {
            assert_eq!(k_nearest_set(&x, &sites, 1, 1e-7).unwrap(), set(&[0], 1));
        }
    }

    #[test]
    fn nearest_from_center_by_norm() {
        let sites = [k(0.6, 0.0), k(-0.3, 0.0)];
        assert_eq!(k_nearest_set(&k(0.0, 0.0), &sites, 1, 1e-7).unwrap(), set(&[1], 2));
    }

    #[test]
    fn exact_tie_is_ambiguous() {
        let sites = [k(0.5, 0.0), k(-0.5, 0.0)];
        for margin in [1e-15, 1e-7, 0.1] {
            assert_eq!(
                k_nearest_set(&k(0.0, 0.4), &sites, 1, margin).unwrap(),
                Neighborhood::Ambiguous
            );
        }
    }

    #[test]
    fn invalid_order() {
        let sites = [k(0.5, 0.0)];
        assert!(k_nearest_set(&k(0.0, 0.0), &sites, 0, 0.0).is_err());
        assert!(k_nearest_set(&k(0.0, 0.0), &sites, 2, 0.0).is_err());
    }

    #[test]
    fn level_examples() {
        assert_eq!(level_of_point(&k(0.1, 0.1), &[k(0.2, 0.0)]), vec![0]);
        let sites = [k(0.6, 0.0), k(-0.3, 0.0), k(0.0, 0.8)];
        assert_eq!(level_of_point(&k(0.0, 0.0), &sites), vec![1, 0, 2]);
    }

    #[test]
    fn verify_symmetric_pair() {
        let d = build_hvd(&[k(0.5, 0.0), k(-0.5, 0.0)], 1, 1.0).unwrap();
        let r = verify_diagram(&d, 1000, 7, 1e-7);
        assert_eq!(r.samples, 1000);
        assert!(r.is_perfect(), "{r:?}");
    }

    #[test]
    fn verify_zero_samples_is_vacuous() {
        let d = build_hvd(&[k(0.5, 0.0), k(-0.5, 0.0)], 1, 1.0).unwrap();
        let r = verify_diagram(&d, 0, 7, 1e-7);
        assert_eq!((r.samples, r.agreements, r.margin_skipped), (0, 0, 0));
        assert_eq!(r.agreement_ratio, None);
        assert!(!r.is_perfect());
    }

    #[test]
    fn verify_detects_a_wrong_diagram() {
        let mut d = build_hvd(&[k(0.5, 0.0), k(-0.5, 0.0)], 1, 1.0).unwrap();
        let g0 = d.cells[0].generator.clone();
        d.cells[0].generator = d.cells[1].generator.clone();
        d.cells[1].generator = g0;
        let r = verify_diagram(&d, 500, 1, 1e-7);
        assert_eq!(r.agreements, 0);
        assert_eq!(r.agreement_ratio, Some(0.0));
        assert!(r.max_violation_margin > 0.0);
    }

    #[test]
    fn verification_is_deterministic() {
        let sites = [k(0.6, 0.0), k(0.0, 0.0), k(0.0, 0.6), k(-0.4, -0.5)];
        let d = build_hvd(&sites, 2, 1.0).unwrap();
        let a = verify_diagram_with(&d, 2000, 99, 1e-7, Execution::Sequential);
        let b = verify_diagram_with(&d, 2000, 99, 1e-7, Execution::Parallel);
        assert_eq!(a, b);
        assert!(a.is_perfect());
    }

    #[test]
    fn samples_stay_in_the_disk() {
        let pts = sample_disk(0.5, 5000, 3);
        assert_eq!(pts.len(), 5000);
        assert!(pts.iter().all(|p| p[0] * p[0] + p[1] * p[1] < 0.25));
        assert_eq!(pts, sample_disk(0.5, 5000, 3));
    }
}
