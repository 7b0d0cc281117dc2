use std::cmp::Ordering;

use crate::geometry::{strictly_less, BoxDims, SizeMeasure};

use super::{BoundKind, BoundNode, DefiningSet, SelectedBox, UpdateSummary};

const VIRTUAL: u32 = u32::MAX;
const DEAD: u32 = u32::MAX;

/// Slab of bounds of one kind with their defining sets and opposing lists.
///
/// `defining[id * m + k]` lists the points fixing component `k` of bound `id`;
/// the entry `VIRTUAL` stands for the start-box face.
#[derive(Debug, Clone)]
struct BoundStore {
    m: usize,
    coords: Vec<f64>,
    defining: Vec<Vec<u32>>,
    opposing: Vec<Vec<u32>>,
    active: Vec<u32>,
    position: Vec<u32>,
    free: Vec<u32>,
}

impl BoundStore {
    fn new(m: usize) -> Self {
        Self {
            m,
            coords: Vec::new(),
            defining: Vec::new(),
            opposing: Vec::new(),
            active: Vec::new(),
            position: Vec::new(),
            free: Vec::new(),
        }
    }

    #[inline]
    fn coords(&self, id: u32) -> &[f64] {
        let o = id as usize * self.m;
        &self.coords[o..o + self.m]
    }

    #[inline]
    fn defining(&self, id: u32, k: usize) -> &[u32] {
        &self.defining[id as usize * self.m + k]
    }

    #[inline]
    fn defining_mut(&mut self, id: u32, k: usize) -> &mut Vec<u32> {
        &mut self.defining[id as usize * self.m + k]
    }

    /// New bound with empty defining sets.
    fn insert(&mut self, coords: &[f64]) -> u32 {
        let id = match self.free.pop() {
            Some(id) => {
                let o = id as usize * self.m;
                self.coords[o..o + self.m].copy_from_slice(coords);
                for d in &mut self.defining[o..o + self.m] {
                    d.clear();
                }
                id
            }
            None => {
                let id = self.position.len() as u32;
                self.coords.extend_from_slice(coords);
                self.defining.extend((0..self.m).map(|_| Vec::new()));
                self.opposing.push(Vec::new());
                self.position.push(DEAD);
                id
            }
        };
        self.position[id as usize] = self.active.len() as u32;
        self.active.push(id);
        id
    }

    fn remove(&mut self, id: u32) {
        let pos = self.position[id as usize] as usize;
        debug_assert_ne!(pos as u32, DEAD);
        self.active.swap_remove(pos);
        if let Some(&moved) = self.active.get(pos) {
            self.position[moved as usize] = pos as u32;
        }
        self.position[id as usize] = DEAD;
        self.opposing[id as usize].clear();
        self.free.push(id);
    }

    fn is_active(&self, id: u32) -> bool {
        (id as usize) < self.position.len() && self.position[id as usize] != DEAD
    }
}

fn remove_id(list: &mut Vec<u32>, id: u32) {
    if let Some(pos) = list.iter().position(|&x| x == id) {
        list.swap_remove(pos);
    }
}

/// Position of `a` relative to `b`.
enum Relation {
    /// `a < b`.
    Below,
    /// `a_k = b_k` and `a_i < b_i` for `i != k`.
    Touching(usize),
    Other,
}

impl Relation {
    #[inline]
    fn of(a: &[f64], b: &[f64], m: usize) -> Relation {
        let mut equal = None;
        for i in 0..m {
            if a[i] < b[i] {
                continue;
            }
            if a[i] == b[i] && equal.is_none() {
                equal = Some(i);
                continue;
            }
            return Relation::Other;
        }
        match equal {
            None => Relation::Below,
            Some(k) => Relation::Touching(k),
        }
    }
}

/// Active bounds split into those the new point replaces and those whose
/// defining set in one component it joins.
fn classify(store: &BoundStore, rel: impl Fn(&[f64]) -> Relation) -> (Vec<u32>, Vec<(u32, usize)>) {
    let mut affected = Vec::new();
    let mut touching = Vec::new();
    for &id in &store.active {
        match rel(store.coords(id)) {
            Relation::Below => affected.push(id),
            Relation::Touching(k) => touching.push((id, k)),
            Relation::Other => {}
        }
    }
    (affected, touching)
}

/// Search region with redundancy avoidance via defining sets and stored
/// opposing-bound lists.
///
/// The defining set `D_k(u)` of an upper bound holds every `z` with
/// `z_k = u_k` and `z_i < u_i` for `i != k` (lower bounds likewise with `s`).
/// Child `u^j = (z_j, u_{-j})` of an affected `u` is a local upper bound iff
/// every `D_k(u)`, `k != j`, has a member with `d_j < z_j`; its sets are those
/// members. Keeping whole sets rather than one representative keeps the test
/// exact when points share coordinates.
///
/// For every lower bound `l` the list `U^l` holds the upper bounds `u` with
/// `l < u` whose box is larger than the threshold; `L^u` is the mirror list.
#[derive(Debug, Clone)]
pub struct ImprovedRegion {
    m: usize,
    measure: SizeMeasure,
    epsilon: f64,
    lower: BoundStore,
    upper: BoundStore,
    /// `s` points, flat; defining entries of lower bounds index into this.
    s_points: Vec<f64>,
    /// `z` points, flat; defining entries of upper bounds index into this.
    z_points: Vec<f64>,
}

impl ImprovedRegion {
    pub fn new(start: &BoxDims, measure: SizeMeasure, epsilon: f64) -> Self {
        let m = start.dim();
        let mut lower = BoundStore::new(m);
        let mut upper = BoundStore::new(m);
        let l0 = lower.insert(start.lower().as_slice());
        let u0 = upper.insert(start.upper().as_slice());
        for k in 0..m {
            lower.defining_mut(l0, k).push(VIRTUAL);
            upper.defining_mut(u0, k).push(VIRTUAL);
        }
        if measure.size(start.lower().as_slice(), start.upper().as_slice()) > epsilon {
            lower.opposing[l0 as usize].push(u0);
            upper.opposing[u0 as usize].push(l0);
        }
        Self { m, measure, epsilon, lower, upper, s_points: Vec::new(), z_points: Vec::new() }
    }

    #[inline]
    fn keeps(&self, l: &[f64], u: &[f64]) -> bool {
        strictly_less(l, u) && self.measure.size(l, u) > self.epsilon
    }

    pub(super) fn apply_point(&mut self, z: Option<&[f64]>, s: &[f64]) -> UpdateSummary {
        let lower_replaced = self.update_lower(s);
        let upper_replaced = match z {
            Some(z) => self.update_upper(z),
            None => 0,
        };
        UpdateSummary { lower_replaced, upper_replaced }
    }

    /// Replaces every lower bound `l < s` by the children that pass the
    /// creation criterion and adds `s` to the defining sets of bounds it
    /// touches in exactly one component.
    fn update_lower(&mut self, s: &[f64]) -> usize {
        let m = self.m;
        let sid = (self.s_points.len() / m) as u32;
        let (affected, touching) = classify(&self.lower, |b| Relation::of(b, s, m));
        if affected.is_empty() && touching.is_empty() {
            return 0;
        }
        self.s_points.extend_from_slice(s);
        for &(l, k) in &touching {
            self.lower.defining_mut(l, k).push(sid);
        }

        let points = &self.s_points;
        // D_k(l) may keep point d for child j iff d_j > s_j
        let keeps_def = |d: u32, j: usize| d == VIRTUAL || points[d as usize * m + j] > s[j];
        let mut plans: Vec<(usize, Vec<Vec<u32>>)> = Vec::new();
        let mut children: Vec<u32> = Vec::with_capacity(m);
        for &l in &affected {
            plans.clear();
            for j in 0..m {
                if (0..m).filter(|&k| k != j).all(|k| self.lower.defining(l, k).iter().any(|&d| keeps_def(d, j))) {
                    let sets = (0..m)
                        .map(|k| {
                            if k == j {
                                vec![sid]
                            } else {
                                self.lower.defining(l, k).iter().copied().filter(|&d| keeps_def(d, j)).collect()
                            }
                        })
                        .collect();
                    plans.push((j, sets));
                }
            }
            children.clear();
            let mut coords = self.lower.coords(l).to_vec();
            for (j, sets) in plans.drain(..) {
                let old = coords[j];
                coords[j] = s[j];
                let c = self.lower.insert(&coords);
                coords[j] = old;
                for (k, set) in sets.into_iter().enumerate() {
                    *self.lower.defining_mut(c, k) = set;
                }
                children.push(c);
            }

            let opp = std::mem::take(&mut self.lower.opposing[l as usize]);
            for &u in &opp {
                remove_id(&mut self.upper.opposing[u as usize], l);
                for &c in &children {
                    if self.keeps(self.lower.coords(c), self.upper.coords(u)) {
                        self.lower.opposing[c as usize].push(u);
                        self.upper.opposing[u as usize].push(c);
                    }
                }
            }
            self.lower.remove(l);
        }
        affected.len()
    }

    /// Mirror image of [`Self::update_lower`] for upper bounds `u > z`.
    fn update_upper(&mut self, z: &[f64]) -> usize {
        let m = self.m;
        let zid = (self.z_points.len() / m) as u32;
        let (affected, touching) = classify(&self.upper, |b| Relation::of(z, b, m));
        if affected.is_empty() && touching.is_empty() {
            return 0;
        }
        self.z_points.extend_from_slice(z);
        for &(u, k) in &touching {
            self.upper.defining_mut(u, k).push(zid);
        }

        let points = &self.z_points;
        let keeps_def = |d: u32, j: usize| d == VIRTUAL || points[d as usize * m + j] < z[j];
        let mut plans: Vec<(usize, Vec<Vec<u32>>)> = Vec::new();
        let mut children: Vec<u32> = Vec::with_capacity(m);
        for &u in &affected {
            plans.clear();
            for j in 0..m {
                if (0..m).filter(|&k| k != j).all(|k| self.upper.defining(u, k).iter().any(|&d| keeps_def(d, j))) {
                    let sets = (0..m)
                        .map(|k| {
                            if k == j {
                                vec![zid]
                            } else {
                                self.upper.defining(u, k).iter().copied().filter(|&d| keeps_def(d, j)).collect()
                            }
                        })
                        .collect();
                    plans.push((j, sets));
                }
            }
            children.clear();
            let mut coords = self.upper.coords(u).to_vec();
            for (j, sets) in plans.drain(..) {
                let old = coords[j];
                coords[j] = z[j];
                let c = self.upper.insert(&coords);
                coords[j] = old;
                for (k, set) in sets.into_iter().enumerate() {
                    *self.upper.defining_mut(c, k) = set;
                }
                children.push(c);
            }

            let opp = std::mem::take(&mut self.upper.opposing[u as usize]);
            for &l in &opp {
                remove_id(&mut self.lower.opposing[l as usize], u);
                for &c in &children {
                    if self.keeps(self.lower.coords(l), self.upper.coords(c)) {
                        self.upper.opposing[c as usize].push(l);
                        self.lower.opposing[l as usize].push(c);
                    }
                }
            }
            self.upper.remove(u);
        }
        affected.len()
    }

    pub(super) fn largest_box(&self) -> Option<SelectedBox> {
        let mut best: Option<(u32, u32, f64)> = None;
        for &l in &self.lower.active {
            let lc = self.lower.coords(l);
            for &u in &self.lower.opposing[l as usize] {
                let uc = self.upper.coords(u);
                let size = self.measure.size(lc, uc);
                let better = match best {
                    None => true,
                    Some((bl, bu, bsize)) => {
                        size >= bsize
                            && self.measure.compare_with_sizes(
                                size,
                                lc,
                                uc,
                                bsize,
                                self.lower.coords(bl),
                                self.upper.coords(bu),
                            ) == Ordering::Greater
                    }
                };
                if better {
                    best = Some((l, u, size));
                }
            }
        }
        best.map(|(l, u, size)| SelectedBox {
            lower_id: l,
            upper_id: u,
            lower: self.lower.coords(l).to_vec(),
            upper: self.upper.coords(u).to_vec(),
            size,
        })
    }

    pub(super) fn evict(&mut self, b: &SelectedBox) {
        let (l, u) = (b.lower_id, b.upper_id);
        if self.lower.is_active(l) && self.upper.is_active(u) {
            remove_id(&mut self.lower.opposing[l as usize], u);
            remove_id(&mut self.upper.opposing[u as usize], l);
        }
    }

    pub(super) fn lower_bounds(&self) -> Vec<Vec<f64>> {
        self.lower.active.iter().map(|&l| self.lower.coords(l).to_vec()).collect()
    }

    pub(super) fn upper_bounds(&self) -> Vec<Vec<f64>> {
        self.upper.active.iter().map(|&u| self.upper.coords(u).to_vec()).collect()
    }

    pub(super) fn num_lower(&self) -> usize {
        self.lower.active.len()
    }

    pub(super) fn num_upper(&self) -> usize {
        self.upper.active.len()
    }

    fn node(&self, kind: BoundKind, id: u32) -> BoundNode {
        let (store, points) = match kind {
            BoundKind::Lower => (&self.lower, &self.s_points),
            BoundKind::Upper => (&self.upper, &self.z_points),
        };
        let m = self.m;
        BoundNode {
            id,
            kind,
            coords: store.coords(id).to_vec(),
            defining: (0..m)
                .map(|k| {
                    let set = store.defining(id, k);
                    DefiningSet {
                        start_box: set.contains(&VIRTUAL),
                        points: set
                            .iter()
                            .filter(|&&d| d != VIRTUAL)
                            .map(|&d| points[d as usize * m..(d as usize + 1) * m].to_vec())
                            .collect(),
                    }
                })
                .collect(),
        }
    }

    /// All live lower bounds with their defining points.
    pub fn lower_nodes(&self) -> Vec<BoundNode> {
        self.lower.active.iter().map(|&l| self.node(BoundKind::Lower, l)).collect()
    }

    /// All live upper bounds with their defining points.
    pub fn upper_nodes(&self) -> Vec<BoundNode> {
        self.upper.active.iter().map(|&u| self.node(BoundKind::Upper, u)).collect()
    }

    /// Stored `(l, u)` pairs as coordinates, from the `U^l` lists.
    pub fn opposing_pairs(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut out = Vec::new();
        for &l in &self.lower.active {
            for &u in &self.lower.opposing[l as usize] {
                out.push((self.lower.coords(l).to_vec(), self.upper.coords(u).to_vec()));
            }
        }
        out
    }

    /// Checks that `U^l` and `L^u` mirror each other exactly.
    pub fn opposing_lists_consistent(&self) -> bool {
        let mut forward: Vec<(u32, u32)> = Vec::new();
        for &l in &self.lower.active {
            for &u in &self.lower.opposing[l as usize] {
                if !self.upper.is_active(u) {
                    return false;
                }
                forward.push((l, u));
            }
        }
        let mut backward: Vec<(u32, u32)> = Vec::new();
        for &u in &self.upper.active {
            for &l in &self.upper.opposing[u as usize] {
                if !self.lower.is_active(l) {
                    return false;
                }
                backward.push((l, u));
            }
        }
        forward.sort_unstable();
        backward.sort_unstable();
        forward.windows(2).all(|w| w[0] != w[1]) && forward == backward
    }

    /// Number of stored opposing pairs.
    pub fn num_pairs(&self) -> usize {
        self.lower.active.iter().map(|&l| self.lower.opposing[l as usize].len()).sum()
    }
}
