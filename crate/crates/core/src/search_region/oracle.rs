use crate::geometry::{strictly_less, weakly_less, BoxDims};

use super::sorted_points;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// Minimal elements of the start box minus the points strictly below some `s`.
    Lower,
    /// Maximal elements of the start box minus the points strictly above some `z`.
    Upper,
}

/// Brute-force local bounds of `points` with respect to `start`.
///
/// Every bound takes each component either from one of the points or from
/// the matching start-box corner, so enumerating that grid and keeping the
/// extremal admissible tuples gives the exact bound set. Cost is
/// `(|points| + 1)^m`; meant for small verification instances.
pub fn bounds_oracle(start: &BoxDims, points: &[Vec<f64>], kind: OracleKind) -> Vec<Vec<f64>> {
    let m = start.dim();
    let (lo, hi) = (start.lower().as_slice(), start.upper().as_slice());
    let corner = match kind {
        OracleKind::Lower => lo,
        OracleKind::Upper => hi,
    };
    let values: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut v: Vec<f64> = points
                .iter()
                .map(|p| p[j])
                .chain(std::iter::once(corner[j]))
                .filter(|&x| x >= lo[j] && x <= hi[j])
                .collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();

    let admissible = |c: &[f64]| match kind {
        OracleKind::Upper => !points.iter().any(|p| strictly_less(p, c)),
        OracleKind::Lower => !points.iter().any(|p| strictly_less(c, p)),
    };

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; m];
    let mut tuple = vec![0.0; m];
    'outer: loop {
        for j in 0..m {
            tuple[j] = values[j][idx[j]];
        }
        if admissible(&tuple) {
            candidates.push(tuple.clone());
        }
        for j in 0..m {
            idx[j] += 1;
            if idx[j] < values[j].len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }

    let extremal: Vec<Vec<f64>> = candidates
        .iter()
        .filter(|c| {
            !candidates.iter().any(|d| {
                d != *c
                    && match kind {
                        OracleKind::Upper => weakly_less(c, d),
                        OracleKind::Lower => weakly_less(d, c),
                    }
            })
        })
        .cloned()
        .collect();
    sorted_points(extremal)
}
