use super::{PsQuery, PsSolution, PsSolver, SolveError};

/// Closed-form solver for `min x` over `Σ (x_i / a_i)² <= 1`.
///
/// The feasible set equals its image, so the optimum lies on the boundary
/// `zᵀ A z = 1` with `A = diag(1 / a_i²)` and `λ = 0`. Substituting
/// `z = p + α q` leaves a quadratic in `α`; the smaller root is the entry
/// point of the line into the ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricSolver {
    inv_sq: Vec<f64>,
}

impl QuadricSolver {
    pub fn new(a: &[f64]) -> Result<Self, SolveError> {
        if let Some(i) = a.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(SolveError::Contract(format!("semi-axis a[{i}] = {} must be positive", a[i])));
        }
        Ok(Self { inv_sq: a.iter().map(|v| 1.0 / (v * v)).collect() })
    }
}

/// Smallest `α` with `(p + α q)ᵀ A (p + α q) = 1`, `A = diag(1 / a_i²)`.
pub fn solve_quadric(query: &PsQuery, a: &[f64]) -> Result<PsSolution, SolveError> {
    QuadricSolver::new(a)?.solve(query)
}

impl PsSolver for QuadricSolver {
    fn solve(&mut self, query: &PsQuery) -> Result<PsSolution, SolveError> {
        if query.dim() != self.inv_sq.len() {
            return Err(SolveError::Contract(format!(
                "query has {} components, quadric has {}",
                query.dim(),
                self.inv_sq.len()
            )));
        }
        let (mut qaq, mut paq, mut pap) = (0.0, 0.0, 0.0);
        for ((&p, &q), &w) in query.p.iter().zip(&query.q).zip(&self.inv_sq) {
            qaq += q * w * q;
            paq += p * w * q;
            pap += p * w * p;
        }
        let c = pap - 1.0;
        // quarter discriminant of qaq α² + 2 paq α + c
        let disc = paq * paq - qaq * c;
        if disc < 0.0 || qaq <= 0.0 {
            return Err(SolveError::NoIntersection);
        }
        let root = disc.sqrt();
        // avoid cancellation: pick the form without a difference of similar terms
        let alpha = if paq > 0.0 { (-paq - root) / qaq } else if root - paq > 0.0 { c / (root - paq) } else { 0.0 };
        let z = query.point_at(alpha);
        let lambda = vec![0.0; z.len()];
        PsSolution::from_parts(query.query_id, alpha, z.clone(), lambda, Some(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn q(p: &[f64], d: &[f64]) -> PsQuery {
        PsQuery::new(0, p.to_vec(), d.to_vec()).unwrap()
    }

    fn on_boundary(z: &[f64], a: &[f64]) -> f64 {
        z.iter().zip(a).map(|(z, a)| (z / a).powi(2)).sum::<f64>() - 1.0
    }

    #[test]
    fn circle_diagonal() {
        let sol = solve_quadric(&q(&[0.0, 0.0], &[1.0, 1.0]), &[1.0, 1.0]).unwrap();
        assert!((sol.alpha + H).abs() < 1e-15);
        assert!((sol.z[0] + H).abs() < 1e-15 && (sol.z[1] + H).abs() < 1e-15);
        assert_eq!(sol.lambda, vec![0.0, 0.0]);
        assert_eq!(sol.s, sol.z);
    }

    #[test]
    fn ellipse_axis_scaled() {
        // 2α² - 1 = 0
        let sol = solve_quadric(&q(&[0.0, 0.0], &[2.0, 1.0]), &[2.0, 1.0]).unwrap();
        assert!((sol.alpha + H).abs() < 1e-15);
        assert!((sol.z[0] + 2.0 * H).abs() < 1e-14);
        assert!((sol.z[1] + H).abs() < 1e-15);
        assert!(on_boundary(&sol.z, &[2.0, 1.0]).abs() < 1e-14);
    }

    #[test]
    fn line_missing_the_circle() {
        // distance 3/√2 from the origin
        assert_eq!(
            solve_quadric(&q(&[0.0, -3.0], &[1.0, 1.0]), &[1.0, 1.0]),
            Err(SolveError::NoIntersection)
        );
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(QuadricSolver::new(&[1.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn root_is_on_quadric_and_smallest(
            p in prop::collection::vec(-1.0..0.0f64, 3),
            d in prop::collection::vec(0.05..1.0f64, 3),
            a in prop::collection::vec(0.5..3.0f64, 3),
        ) {
            let query = q(&p, &d);
            if let Ok(sol) = solve_quadric(&query, &a) {
                prop_assert!(on_boundary(&sol.z, &a).abs() < 1e-10);
                // the other root is p + α' q with α' = -2 pᵀAq / qᵀAq - α
                let (mut qaq, mut paq) = (0.0, 0.0);
                for i in 0..3 {
                    let w = 1.0 / (a[i] * a[i]);
                    qaq += d[i] * w * d[i];
                    paq += p[i] * w * d[i];
                }
                let other = -2.0 * paq / qaq - sol.alpha;
                prop_assert!(sol.alpha <= other + 1e-12);
            }
        }

        #[test]
        fn lowering_reference_point_never_decreases_alpha(
            p in prop::collection::vec(-0.5..0.0f64, 3),
            d in prop::collection::vec(0.1..1.0f64, 3),
            shift in prop::collection::vec(0.0..0.3f64, 3),
        ) {
            let a = [1.0, 1.0, 1.0];
            let p2: Vec<f64> = p.iter().zip(&shift).map(|(p, s)| p - s).collect();
            let s1 = solve_quadric(&q(&p, &d), &a);
            let s2 = solve_quadric(&q(&p2, &d), &a);
            if let (Ok(s1), Ok(s2)) = (s1, s2) {
                // p' <= p: every α feasible for p' is feasible for p
                prop_assert!(s2.alpha >= s1.alpha - 1e-12);
            }
        }
    }
}
