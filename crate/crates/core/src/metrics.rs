//! Quality measures for a computed representation.
//!
//! Coverage is the additive approximation quality against a sample of the
//! nondominated set; the sample's own density is reported alongside as a
//! covering slack so that a coverage bound can be checked empirically.

use serde::Serialize;
use thiserror::Error;

use crate::problems::{ProblemKind, ProblemSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{0} set is empty")]
    Empty(&'static str),
    #[error("point has {actual} components, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("problem {0} has no front sampler")]
    UnsupportedProblem(ProblemKind),
}

/// `max_i max(z_i - y_i, 0)`: how far `z` fails to be below `y`.
///
/// Panics if the dimensions differ.
pub fn additive_distance(y: &[f64], z: &[f64]) -> f64 {
    assert_eq!(y.len(), z.len(), "additive distance of points of different dimension");
    y.iter().zip(z).fold(0.0, |d, (y, z)| d.max(z - y))
}

/// `max_y min_z d(y, z)` over the samples `y` and representation points `z`.
pub fn approximation_quality<Z, Y>(z: &[Z], samples: &[Y]) -> Result<f64, MetricsError>
where
    Z: AsRef<[f64]>,
    Y: AsRef<[f64]>,
{
    worst_covered(z, samples).map(|(alpha, _)| alpha)
}

/// The approximation quality and the index of the first sample attaining it.
fn worst_covered<Z, Y>(z: &[Z], samples: &[Y]) -> Result<(f64, usize), MetricsError>
where
    Z: AsRef<[f64]>,
    Y: AsRef<[f64]>,
{
    if z.is_empty() {
        return Err(MetricsError::Empty("representation"));
    }
    if samples.is_empty() {
        return Err(MetricsError::Empty("sample"));
    }
    let m = z[0].as_ref().len();
    check_dims(z, m)?;
    check_dims(samples, m)?;
    let mut worst = (f64::NEG_INFINITY, 0);
    for (i, y) in samples.iter().enumerate() {
        let y = y.as_ref();
        let mut best = f64::INFINITY;
        for p in z {
            best = best.min(additive_distance(y, p.as_ref()));
            if best <= worst.0 {
                // this sample cannot raise the maximum
                break;
            }
        }
        if best > worst.0 {
            worst = (best, i);
        }
    }
    Ok(worst)
}

fn check_dims<P: AsRef<[f64]>>(pts: &[P], m: usize) -> Result<(), MetricsError> {
    match pts.iter().find(|p| p.as_ref().len() != m) {
        Some(p) => Err(MetricsError::DimensionMismatch { expected: m, actual: p.as_ref().len() }),
        None => Ok(()),
    }
}

fn euclidean_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Minimum pairwise Euclidean distance; `None` for fewer than two points.
pub fn uniformity<P: AsRef<[f64]>>(z: &[P]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (i, a) in z.iter().enumerate() {
        for b in &z[i + 1..] {
            let d = euclidean_sq(a.as_ref(), b.as_ref());
            if best.is_none_or(|x| d < x) {
                best = Some(d);
            }
        }
    }
    best.map(f64::sqrt)
}

/// Largest nearest-neighbour Euclidean distance within `samples`; zero for
/// fewer than two samples.
///
/// A front point within this distance of some sample is covered at most this
/// much worse than that sample, so it bounds the error of an empirical
/// approximation quality when the samples are dense in the front.
pub fn covering_slack<P: AsRef<[f64]>>(samples: &[P]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let mut slack_sq: f64 = 0.0;
    for (i, a) in samples.iter().enumerate() {
        let mut nearest = f64::INFINITY;
        for (j, b) in samples.iter().enumerate() {
            if i != j {
                nearest = nearest.min(euclidean_sq(a.as_ref(), b.as_ref()));
                if nearest <= slack_sq {
                    break;
                }
            }
        }
        slack_sq = slack_sq.max(nearest);
    }
    slack_sq.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QualityReport {
    pub cardinality: usize,
    /// Approximation quality against the sample; never negative.
    pub empirical_alpha: f64,
    /// Absent for fewer than two points.
    pub uniformity: Option<f64>,
    pub worst_sample: Vec<f64>,
    pub samples: usize,
    /// Largest nearest-neighbour distance within the sample.
    pub covering_slack: f64,
}

/// Cardinality, coverage against `n` front samples drawn with `seed`, and
/// uniformity of `z`.
pub fn quality_summary<P: AsRef<[f64]>>(
    z: &[P],
    spec: &ProblemSpec,
    n: usize,
    seed: u64,
) -> Result<QualityReport, MetricsError> {
    if !spec.has_front_sampler() {
        return Err(MetricsError::UnsupportedProblem(spec.kind()));
    }
    let samples = spec.sample_front(n, seed);
    let (alpha, worst) = worst_covered(z, &samples)?;
    Ok(QualityReport {
        cardinality: z.len(),
        // a sample on the front is never strictly dominated by a point of z
        empirical_alpha: alpha.max(0.0),
        uniformity: uniformity(z),
        worst_sample: samples[worst].as_slice().to_vec(),
        samples: samples.len(),
        covering_slack: covering_slack(&samples),
    })
}
