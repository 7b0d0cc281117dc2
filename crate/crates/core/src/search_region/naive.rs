use std::cmp::Ordering;

use crate::geometry::{strictly_less, weakly_less, BoxDims, SizeMeasure};

use super::{SelectedBox, UpdateSummary};

/// Baseline bound management: bounds are flat lists, every affected bound is
/// split into all `m` children, redundant children are filtered out by
/// pairwise comparison and the largest box is found by scanning `L × U`.
#[derive(Debug, Clone)]
pub struct NaiveRegion {
    m: usize,
    measure: SizeMeasure,
    epsilon: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Pairs given up on; splitting either side carries the mark over to the
    /// surviving children.
    evicted: Vec<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

impl NaiveRegion {
    pub fn new(start: &BoxDims, measure: SizeMeasure, epsilon: f64) -> Self {
        Self {
            m: start.dim(),
            measure,
            epsilon,
            lower: start.lower().as_slice().to_vec(),
            upper: start.upper().as_slice().to_vec(),
            evicted: Vec::new(),
        }
    }

    pub(super) fn apply_point(&mut self, z: Option<&[f64]>, s: &[f64]) -> UpdateSummary {
        let lower_replaced = self.update(Side::Lower, s);
        let upper_replaced = match z {
            Some(z) => self.update(Side::Upper, z),
            None => 0,
        };
        if !self.evicted.is_empty() {
            let (measure, eps) = (&self.measure, self.epsilon);
            self.evicted.retain(|(l, u)| strictly_less(l, u) && measure.size(l, u) > eps);
        }
        UpdateSummary { lower_replaced, upper_replaced }
    }

    fn update(&mut self, side: Side, p: &[f64]) -> usize {
        let m = self.m;
        let bounds = match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        };
        let affected_by = |b: &[f64]| match side {
            Side::Lower => strictly_less(b, p),
            Side::Upper => strictly_less(p, b),
        };
        // `covers(a, b)`: a makes b redundant
        let covers = |a: &[f64], b: &[f64]| match side {
            Side::Lower => weakly_less(a, b),
            Side::Upper => weakly_less(b, a),
        };

        let mut kept: Vec<f64> = Vec::with_capacity(bounds.len() + m * m);
        let mut candidates: Vec<f64> = Vec::new();
        let mut parents: Vec<usize> = Vec::new();
        let mut affected: Vec<usize> = Vec::new();
        for (i, b) in bounds.chunks_exact(m).enumerate() {
            if affected_by(b) {
                affected.push(i);
                for k in 0..m {
                    let start = candidates.len();
                    candidates.extend_from_slice(b);
                    candidates[start + k] = p[k];
                    parents.push(i);
                }
            } else {
                kept.extend_from_slice(b);
            }
        }
        if affected.is_empty() {
            return 0;
        }

        // drop candidates covered by a kept bound or by another candidate;
        // among identical candidates the first one survives
        let n_cand = parents.len();
        let mut survives = vec![true; n_cand];
        for i in 0..n_cand {
            let c = &candidates[i * m..(i + 1) * m];
            if kept.chunks_exact(m).any(|w| covers(w, c)) {
                survives[i] = false;
                continue;
            }
            for j in 0..n_cand {
                if i == j {
                    continue;
                }
                let d = &candidates[j * m..(j + 1) * m];
                if covers(d, c) && (d != c || j < i) {
                    survives[i] = false;
                    break;
                }
            }
        }

        let old: Vec<Vec<f64>> = if self.evicted.is_empty() {
            Vec::new()
        } else {
            affected.iter().map(|&i| bounds[i * m..(i + 1) * m].to_vec()).collect()
        };
        for i in 0..n_cand {
            if survives[i] {
                kept.extend_from_slice(&candidates[i * m..(i + 1) * m]);
            }
        }

        if !self.evicted.is_empty() {
            let mut carried = Vec::with_capacity(self.evicted.len());
            for (l, u) in self.evicted.drain(..) {
                let key = if side == Side::Lower { &l } else { &u };
                match old.iter().position(|b| b == key) {
                    None => carried.push((l, u)),
                    Some(ai) => {
                        let parent = affected[ai];
                        for i in (0..n_cand).filter(|&i| survives[i] && parents[i] == parent) {
                            let child = candidates[i * m..(i + 1) * m].to_vec();
                            match side {
                                Side::Lower => carried.push((child, u.clone())),
                                Side::Upper => carried.push((l.clone(), child)),
                            }
                        }
                    }
                }
            }
            self.evicted = carried;
        }

        match side {
            Side::Lower => self.lower = kept,
            Side::Upper => self.upper = kept,
        }
        affected.len()
    }

    fn is_evicted(&self, l: &[f64], u: &[f64]) -> bool {
        self.evicted.iter().any(|(el, eu)| el == l && eu == u)
    }

    pub(super) fn largest_box(&self) -> Option<SelectedBox> {
        let m = self.m;
        let mut best: Option<(usize, usize, f64)> = None;
        let n_upper = self.upper.len() / m;
        // column layout of U so the per-l size sweep vectorizes
        let mut columns = vec![0.0; self.upper.len()];
        for (i, u) in self.upper.chunks_exact(m).enumerate() {
            for k in 0..m {
                columns[k * n_upper + i] = u[k];
            }
        }
        let factors = self.measure.edge_factors();
        let mut sizes = vec![0.0; n_upper];
        for (li, l) in self.lower.chunks_exact(m).enumerate() {
            sizes.fill(f64::INFINITY);
            for k in 0..m {
                let (lk, fk) = (l[k], factors[k]);
                for (s, &uk) in sizes.iter_mut().zip(&columns[k * n_upper..(k + 1) * n_upper]) {
                    let e = (uk - lk) * fk;
                    if e < *s {
                        *s = e;
                    }
                }
            }
            for (ui, &size) in sizes.iter().enumerate() {
                // size > ε >= 0 implies l < u
                if size <= self.epsilon || best.is_some_and(|b| size < b.2) {
                    continue;
                }
                let u = &self.upper[ui * m..(ui + 1) * m];
                let better = match best {
                    None => true,
                    Some((bl, bu, bsize)) => {
                        self.measure.compare_with_sizes(
                            size,
                            l,
                            u,
                            bsize,
                            &self.lower[bl * m..(bl + 1) * m],
                            &self.upper[bu * m..(bu + 1) * m],
                        ) == Ordering::Greater
                    }
                };
                if better && !self.is_evicted(l, u) {
                    best = Some((li, ui, size));
                }
            }
        }
        best.map(|(li, ui, size)| SelectedBox {
            lower_id: li as u32,
            upper_id: ui as u32,
            lower: self.lower[li * m..(li + 1) * m].to_vec(),
            upper: self.upper[ui * m..(ui + 1) * m].to_vec(),
            size,
        })
    }

    pub(super) fn evict(&mut self, b: &SelectedBox) {
        if !self.is_evicted(&b.lower, &b.upper) {
            self.evicted.push((b.lower.clone(), b.upper.clone()));
        }
    }

    pub(super) fn lower_bounds(&self) -> Vec<Vec<f64>> {
        self.lower.chunks_exact(self.m).map(<[f64]>::to_vec).collect()
    }

    pub(super) fn upper_bounds(&self) -> Vec<Vec<f64>> {
        self.upper.chunks_exact(self.m).map(<[f64]>::to_vec).collect()
    }

    pub(super) fn num_lower(&self) -> usize {
        self.lower.len() / self.m
    }

    pub(super) fn num_upper(&self) -> usize {
        self.upper.len() / self.m
    }
}
