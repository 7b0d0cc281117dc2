use super::*;
use crate::geometry::weakly_less;
use proptest::prelude::*;
use proptest::strategy::Strategy as _;
use super::Strategy;

fn bx(l: &[f64], u: &[f64]) -> BoxDims {
    BoxDims::from_vecs(l.to_vec(), u.to_vec()).unwrap()
}

fn unit(m: usize) -> BoxDims {
    bx(&vec![0.0; m], &vec![1.0; m])
}

fn pts(v: &[&[f64]]) -> Vec<Vec<f64>> {
    sorted_points(v.iter().map(|p| p.to_vec()).collect())
}

fn both(start: &BoxDims, eps: f64) -> [SearchRegionState; 2] {
    [Strategy::Naive, Strategy::Improved]
        .map(|s| SearchRegionState::new(start, eps, SizeMode::Absolute, s).unwrap())
}

fn unpruned(start: &BoxDims) -> [SearchRegionState; 2] {
    [Strategy::Naive, Strategy::Improved].map(|s| SearchRegionState::without_pruning(start, SizeMode::Absolute, s))
}

#[test]
fn initial_state() {
    for r in both(&unit(2), 0.1) {
        let b = r.largest_box().unwrap();
        assert_eq!(b.size, 1.0);
        assert_eq!((b.lower, b.upper), (vec![0.0, 0.0], vec![1.0, 1.0]));
    }
    for r in both(&unit(2), 1.5) {
        assert_eq!(r.largest_box(), None);
    }
    let r = &both(&unit(2), 1.5)[1];
    assert_eq!(r.as_improved().unwrap().num_pairs(), 0);
    for r in both(&bx(&[-1.0; 3], &[0.0; 3]), 0.1) {
        assert_eq!((r.num_lower(), r.num_upper()), (1, 1));
    }
    assert_eq!(both(&bx(&[-1.0; 3], &[0.0; 3]), 0.1)[1].as_improved().unwrap().num_pairs(), 1);
    assert!(SearchRegionState::new(&unit(2), 0.0, SizeMode::Absolute, Strategy::Naive).is_err());
}

#[test]
fn upper_criterion_examples() {
    // u = (0.5, 1, 1) after z1 = (0.5, 0.5, 0.5) in [0, 1]³
    let z1 = [0.5, 0.5, 0.5];
    let d = [DefiningSet::point(&z1), DefiningSet::start_box(), DefiningSet::start_box()];
    let z2 = [0.25, 0.75, 0.25];
    assert!(child_criterion_upper(&d, &z2, 1));
    assert!(!child_criterion_upper(&d, &z2, 2));
    let virt = vec![DefiningSet::start_box(); 3];
    for k in 0..3 {
        assert!(child_criterion_upper(&virt, &z2, k));
    }
}

#[test]
fn lower_criterion_examples() {
    let s1 = [-0.5, -0.5];
    let d = [DefiningSet::point(&s1), DefiningSet::start_box()];
    assert!(child_criterion_lower(&d, &[-0.25, -0.75], 1));
    let virt = vec![DefiningSet::start_box(); 3];
    for k in 0..3 {
        assert!(child_criterion_lower(&virt, &[0.3, 0.2, 0.9], k));
    }
    // mirror of the upper example under x -> -x
    let neg = |p: &[f64]| p.iter().map(|v| -v).collect::<Vec<f64>>();
    let d = [DefiningSet::point(&neg(&[0.5, 0.5, 0.5])), DefiningSet::start_box(), DefiningSet::start_box()];
    let s2 = neg(&[0.25, 0.75, 0.25]);
    assert!(child_criterion_lower(&d, &s2, 1));
    assert!(!child_criterion_lower(&d, &s2, 2));
}

#[test]
fn two_point_sequence_in_unit_cube() {
    let z1 = [0.5, 0.5, 0.5];
    let z2 = [0.25, 0.75, 0.25];
    for mut r in unpruned(&unit(3)) {
        r.apply_point(Some(&z1), &z1).unwrap();
        assert_eq!(sorted_points(r.upper_bounds()), pts(&[&[0.5, 1.0, 1.0], &[1.0, 0.5, 1.0], &[1.0, 1.0, 0.5]]));
        assert_eq!(sorted_points(r.lower_bounds()), pts(&[&[0.5, 0.0, 0.0], &[0.0, 0.5, 0.0], &[0.0, 0.0, 0.5]]));
        r.apply_point(Some(&z2), &z2).unwrap();
        let expected = pts(&[
            &[1.0, 0.5, 1.0],
            &[0.25, 1.0, 1.0],
            &[0.5, 0.75, 1.0],
            &[1.0, 0.75, 0.5],
            &[1.0, 1.0, 0.25],
        ]);
        assert_eq!(sorted_points(r.upper_bounds()), expected, "{}", r.strategy());
        let zs = vec![z1.to_vec(), z2.to_vec()];
        assert_eq!(bounds_oracle(&unit(3), &zs, OracleKind::Upper), expected);
        assert_eq!(sorted_points(r.lower_bounds()), bounds_oracle(&unit(3), &zs, OracleKind::Lower));
    }
}

#[test]
fn s_tightens_lower_bounds_only() {
    for mut r in unpruned(&unit(2)) {
        r.apply_point(Some(&[0.5, 0.5]), &[0.6, 0.6]).unwrap();
        assert_eq!(sorted_points(r.lower_bounds()), pts(&[&[0.0, 0.6], &[0.6, 0.0]]));
        assert_eq!(sorted_points(r.upper_bounds()), pts(&[&[0.5, 1.0], &[1.0, 0.5]]));
    }
}

#[test]
fn point_outside_every_box_changes_nothing() {
    for mut r in unpruned(&unit(2)) {
        r.apply_point(Some(&[0.5, 0.5]), &[0.5, 0.5]).unwrap();
        let (lo, up) = (sorted_points(r.lower_bounds()), sorted_points(r.upper_bounds()));
        // a repeated point touches every bound without lying strictly inside any box
        let summary = r.apply_point(Some(&[0.5, 0.5]), &[0.5, 0.5]).unwrap();
        assert_eq!(summary, UpdateSummary::default());
        assert_eq!((sorted_points(r.lower_bounds()), sorted_points(r.upper_bounds())), (lo, up));
    }
}

#[test]
fn rejects_s_below_z_and_bad_points() {
    let [mut n, mut i] = unpruned(&unit(2));
    for r in [&mut n, &mut i] {
        assert!(matches!(
            r.apply_point(Some(&[0.5, 0.5]), &[0.6, 0.4]),
            Err(RegionError::SBelowZ { index: 1, .. })
        ));
        assert!(r.apply_point(None, &[0.5]).is_err());
        assert!(r.apply_point(None, &[0.5, f64::NAN]).is_err());
    }
}

#[test]
fn oracle_examples() {
    assert_eq!(bounds_oracle(&unit(2), &[vec![0.5, 0.5]], OracleKind::Upper), pts(&[&[0.5, 1.0], &[1.0, 0.5]]));
    assert_eq!(bounds_oracle(&unit(3), &[], OracleKind::Upper), pts(&[&[1.0, 1.0, 1.0]]));
    assert_eq!(bounds_oracle(&unit(3), &[], OracleKind::Lower), pts(&[&[0.0, 0.0, 0.0]]));
}

#[test]
fn quarter_circle_tie_goes_to_larger_key() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for mut r in both(&bx(&[-1.0, -1.0], &[0.0, 0.0]), 0.25) {
        r.apply_point(Some(&[-h, -h]), &[-h, -h]).unwrap();
        let b = r.largest_box().unwrap();
        assert!((b.size - (1.0 - h)).abs() < 1e-15);
        // the two boxes have equal size and volume; the larger lower corner wins
        assert_eq!(b.lower, vec![-h, -1.0]);
        assert_eq!(b.upper, vec![0.0, -h]);
    }
}

/// Brute-force check of the stored defining sets against the points applied
/// so far.
fn check_defining(r: &ImprovedRegion, start: &BoxDims, zs: &[Vec<f64>], ss: &[Vec<f64>]) -> Result<(), String> {
    let m = start.dim();
    for (nodes, points, corner, beyond) in [
        (r.upper_nodes(), zs, start.upper().as_slice(), -1.0),
        (r.lower_nodes(), ss, start.lower().as_slice(), 1.0),
    ] {
        for node in nodes {
            let b = &node.coords;
            for k in 0..m {
                let d = &node.defining[k];
                // p_k = b_k, strictly beyond b elsewhere (below for upper bounds)
                let mut expected: Vec<Vec<f64>> = points
                    .iter()
                    .filter(|p| p[k] == b[k] && (0..m).all(|i| i == k || (p[i] - b[i]) * beyond > 0.0))
                    .cloned()
                    .collect();
                expected.dedup();
                let got = sorted_points(d.points.clone());
                let mut want = sorted_points(expected);
                want.dedup();
                if got != want {
                    return Err(format!("{:?} bound {b:?} component {k}: {got:?} != {want:?}", node.kind));
                }
                if d.start_box != (b[k] == corner[k]) {
                    return Err(format!("{:?} bound {b:?} component {k}: start box flag {}", node.kind, d.start_box));
                }
            }
        }
    }
    Ok(())
}

/// Opposing pairs recomputed from scratch: `l < u` with size above `eps`.
fn brute_pairs(r: &SearchRegionState, eps: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for l in r.lower_bounds() {
        for u in r.upper_bounds() {
            if strictly_less(&l, &u) && r.measure().size(&l, &u) > eps {
                out.push((l.clone(), u));
            }
        }
    }
    sort_pairs(out)
}

fn sort_pairs(mut v: Vec<(Vec<f64>, Vec<f64>)>) -> Vec<(Vec<f64>, Vec<f64>)> {
    let key = |p: &(Vec<f64>, Vec<f64>)| p.0.iter().chain(&p.1).copied().collect::<Vec<f64>>();
    v.sort_by(|a, b| {
        key(a).iter().zip(&key(b)).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    v
}

fn is_antichain(pts: &[Vec<f64>]) -> bool {
    pts.iter().enumerate().all(|(i, a)| pts.iter().enumerate().all(|(j, b)| i == j || !weakly_less(a, b)))
}

/// Up to 8 mutually nondominated points on a coarse grid of `[0, 1]^m`, so
/// that coordinate ties are frequent.
fn grid_points() -> impl proptest::strategy::Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (2usize..=4).prop_flat_map(|m| {
        (Just(m), prop::collection::vec(prop::collection::vec(1u8..=6, m), 1..=8)).prop_map(|(m, raw)| {
            let mut kept: Vec<Vec<f64>> = Vec::new();
            for p in raw {
                let p: Vec<f64> = p.into_iter().map(|v| f64::from(v) / 7.0).collect();
                if kept.iter().all(|q| !weakly_less(q, &p) && !weakly_less(&p, q)) {
                    kept.push(p);
                }
            }
            (m, kept)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bounds_match_oracle_with_ties((m, zs) in grid_points(), lift in prop::collection::vec(0u8..=1, 32)) {
        let start = unit(m);
        // s = z or z + 1/7 per component, staying inside the box
        let ss: Vec<Vec<f64>> = zs
            .iter()
            .enumerate()
            .map(|(i, z)| z.iter().enumerate().map(|(j, v)| v + f64::from(lift[(i * m + j) % 32]) / 7.0).collect())
            .collect();
        let [mut naive, mut improved] = unpruned(&start);
        for (n, (z, s)) in zs.iter().zip(&ss).enumerate() {
            naive.apply_point(Some(z), s).unwrap();
            improved.apply_point(Some(z), s).unwrap();
            let upper = bounds_oracle(&start, &zs[..=n], OracleKind::Upper);
            let lower = bounds_oracle(&start, &ss[..=n], OracleKind::Lower);
            for r in [&naive, &improved] {
                prop_assert_eq!(sorted_points(r.upper_bounds()), upper.clone(), "{} upper", r.strategy());
                prop_assert_eq!(sorted_points(r.lower_bounds()), lower.clone(), "{} lower", r.strategy());
            }
            prop_assert!(is_antichain(&naive.upper_bounds()) && is_antichain(&naive.lower_bounds()));
            let imp = improved.as_improved().unwrap();
            prop_assert!(imp.opposing_lists_consistent());
            prop_assert_eq!(sort_pairs(imp.opposing_pairs()), brute_pairs(&improved, 0.0));
            if let Err(e) = check_defining(imp, &start, &zs[..=n], &ss[..=n]) {
                prop_assert!(false, "{}", e);
            }
        }
    }

    #[test]
    fn pruned_index_matches_brute_force((m, zs) in grid_points(), eps in 0.05..0.4f64) {
        let start = unit(m);
        let mut r = SearchRegionState::new(&start, eps, SizeMode::Absolute, Strategy::Improved).unwrap();
        for z in &zs {
            r.apply_point(Some(z), z).unwrap();
            let imp = r.as_improved().unwrap();
            prop_assert!(imp.opposing_lists_consistent());
            prop_assert_eq!(sort_pairs(imp.opposing_pairs()), brute_pairs(&r, eps));
        }
    }

    /// Lock-step run with box midpoints as new points and random evictions:
    /// both strategies select the same boxes and keep the same bounds.
    #[test]
    fn strategies_agree_step_by_step(
        m in 2usize..=4,
        eps in 0.1..0.3f64,
        evict in prop::collection::vec(prop::bool::weighted(0.2), 60),
    ) {
        let start = unit(m);
        let [mut naive, mut improved] = both(&start, eps);
        let mut last_size = f64::INFINITY;
        for &drop in &evict {
            let a = naive.largest_box();
            let b = improved.largest_box();
            prop_assert_eq!(
                a.as_ref().map(|x| (&x.lower, &x.upper, x.size)),
                b.as_ref().map(|x| (&x.lower, &x.upper, x.size))
            );
            let (Some(a), Some(b)) = (a, b) else { break };
            prop_assert!(a.size <= last_size);
            last_size = a.size;
            if drop {
                naive.evict(&a);
                improved.evict(&b);
            } else {
                // a box midpoint is nondominated with respect to every earlier point
                let mid: Vec<f64> = a.lower.iter().zip(&a.upper).map(|(l, u)| 0.5 * (l + u)).collect();
                naive.apply_point(Some(&mid), &mid).unwrap();
                improved.apply_point(Some(&mid), &mid).unwrap();
            }
            prop_assert_eq!(sorted_points(naive.upper_bounds()), sorted_points(improved.upper_bounds()));
            prop_assert_eq!(sorted_points(naive.lower_bounds()), sorted_points(improved.lower_bounds()));
        }
    }

    /// Updating with `s` only (dominated `z` skipped) matches the oracle on
    /// the `s` points.
    #[test]
    fn lower_only_updates((m, ss) in grid_points()) {
        let start = unit(m);
        for mut r in unpruned(&start) {
            for s in &ss {
                r.apply_point(None, s).unwrap();
            }
            prop_assert_eq!(sorted_points(r.lower_bounds()), bounds_oracle(&start, &ss, OracleKind::Lower));
            prop_assert_eq!(sorted_points(r.upper_bounds()), vec![vec![1.0; m]]);
        }
    }
}
