use h2plan::lp::{Basis, BasisStatus, Direction, LpProblem, Sense, Simplex, SimplexOptions, Status};
use proptest::prelude::*;

/// Small LP in dense form: boxed columns, mixed-sense rows.
#[derive(Debug, Clone)]
struct Dense {
    lo: Vec<f64>,
    up: Vec<f64>,
    rows: Vec<(Vec<f64>, Sense, f64)>,
    cost: Vec<f64>,
}

impl Dense {
    fn build(&self) -> LpProblem {
        let mut p = LpProblem::new();
        let vars: Vec<_> = self.lo.iter().zip(&self.up).map(|(&l, &u)| p.add_variable(l, u).unwrap()).collect();
        for (a, s, b) in &self.rows {
            let terms: Vec<_> = vars.iter().zip(a).map(|(&v, &c)| (v, c)).collect();
            p.add_constraint(&terms, *s, *b).unwrap();
        }
        let obj: Vec<_> = vars.iter().zip(&self.cost).map(|(&v, &c)| (v, c)).collect();
        p.set_objective(&obj, Direction::Minimize).unwrap();
        p
    }

    fn feasible(&self, x: &[f64]) -> bool {
        let eps = 1e-9;
        for j in 0..x.len() {
            if x[j] < self.lo[j] - eps || x[j] > self.up[j] + eps {
                return false;
            }
        }
        self.rows.iter().all(|(a, s, b)| {
            let act: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            match s {
                Sense::Le => act <= b + eps,
                Sense::Ge => act >= b - eps,
                Sense::Eq => (act - b).abs() <= eps,
            }
        })
    }

    /// Minimum over all basic solutions; `None` when no vertex is feasible.
    fn brute_force(&self) -> Option<f64> {
        let n = self.lo.len();
        // Candidate hyperplanes: every row as an equality plus both bounds of each column.
        let mut planes: Vec<(Vec<f64>, f64)> = self.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            planes.push((e.clone(), self.lo[j]));
            planes.push((e, self.up[j]));
        }
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        fn rec(k: usize, start: usize, pick: &mut Vec<usize>, planes: &[(Vec<f64>, f64)], f: &mut dyn FnMut(&[usize])) {
            if k == pick.len() {
                f(pick);
                return;
            }
            for i in start..planes.len() {
                pick[k] = i;
                rec(k + 1, i + 1, pick, planes, f);
            }
        }
        rec(0, 0, &mut pick, &planes, &mut |idx| {
            let a: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
            let b: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
            if let Some(x) = gauss(a, b) {
                if self.feasible(&x) {
                    let v: f64 = self.cost.iter().zip(&x).map(|(c, q)| c * q).sum();
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
        });
        best
    }
}

fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &k| a[i][c].abs().total_cmp(&a[k][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn small_coef() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), (-4i32..=4).prop_map(|v| v as f64), (-40i32..=40).prop_map(|v| v as f64 / 8.0)]
}

fn sense() -> impl Strategy<Value = Sense> {
    prop_oneof![Just(Sense::Le), Just(Sense::Ge), Just(Sense::Eq)]
}

fn dense_lp(max_n: usize, max_m: usize) -> impl Strategy<Value = Dense> {
    (1..=max_n, 0..=max_m).prop_flat_map(|(n, m)| {
        let bounds = prop::collection::vec((-3i32..=1, 0i32..=4), n);
        let rows = prop::collection::vec((prop::collection::vec(small_coef(), n), sense(), -6i32..=6), m);
        let cost = prop::collection::vec(small_coef(), n);
        (bounds, rows, cost).prop_map(|(bounds, rows, cost)| Dense {
            lo: bounds.iter().map(|&(l, _)| l as f64).collect(),
            up: bounds.iter().map(|&(l, w)| (l + w) as f64).collect(),
            rows: rows.into_iter().map(|(a, s, b)| (a, s, b as f64)).collect(),
            cost,
        })
    })
}

fn variants() -> [Simplex; 3] {
    use h2plan::lp::Pricing;
    [
        Simplex::default(),
        Simplex::new(SimplexOptions { presolve: false, ..Default::default() }),
        Simplex::new(SimplexOptions { pricing: Pricing::Dantzig, refactor_interval: 2, ..Default::default() }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_vertex_enumeration(d in dense_lp(4, 4)) {
        let p = d.build();
        let oracle = d.brute_force();
        for solver in variants() {
            let sol = solver.solve(&p);
            match oracle {
                None => prop_assert_eq!(sol.status, Status::Infeasible),
                Some(best) => {
                    prop_assert_eq!(sol.status, Status::Optimal);
                    prop_assert!((sol.objective_value - best).abs() <= 1e-7 * best.abs().max(1.0),
                        "solver {} vs oracle {}", sol.objective_value, best);
                    let v = p.violations(&sol.values);
                    prop_assert!(v.bound <= 1e-7 && v.row_relative <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn power_of_two_objective_scaling_keeps_solution(d in dense_lp(5, 5), k in -6i32..=6) {
        let p = d.build();
        let mut scaled = d.clone();
        let lambda = 2f64.powi(k);
        scaled.cost.iter_mut().for_each(|c| *c *= lambda);
        let a = p.solve();
        let b = scaled.build().solve();
        prop_assert_eq!(a.status, b.status);
        if a.status == Status::Optimal {
            prop_assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn resolving_is_bit_identical(d in dense_lp(5, 5)) {
        let p = d.build();
        prop_assert_eq!(p.solve(), p.solve());
    }

    #[test]
    fn any_warm_start_reaches_the_optimum(d in dense_lp(4, 4), picks in prop::collection::vec(0u8..4, 8)) {
        let p = d.build();
        let status = |k: usize| match picks[k % picks.len()] {
            0 => BasisStatus::Basic,
            1 => BasisStatus::AtLower,
            2 => BasisStatus::AtUpper,
            _ => BasisStatus::Zero,
        };
        let hint = Basis {
            columns: (0..p.num_vars()).map(status).collect(),
            rows: (0..p.num_constraints()).map(|i| status(i + 3)).collect(),
        };
        let oracle = d.brute_force();
        for solver in variants() {
            let sol = solver.solve_from(&p, &hint);
            match oracle {
                None => prop_assert_eq!(sol.status, Status::Infeasible),
                Some(best) => {
                    prop_assert_eq!(sol.status, Status::Optimal);
                    prop_assert!((sol.objective_value - best).abs() <= 1e-7 * best.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn restarting_from_the_final_basis_needs_no_pivots(d in dense_lp(5, 5)) {
        let p = d.build();
        let first = p.solve();
        prop_assume!(first.status == Status::Optimal);
        let again = Simplex::default().solve_from(&p, &first.basis);
        prop_assert_eq!(again.iterations, 0);
        prop_assert!((again.objective_value - first.objective_value).abs() <= 1e-9 * first.objective_value.abs().max(1.0));
    }
}

/// Medium random LPs against an independent simplex implementation.
#[test]
fn agrees_with_minilp_on_medium_instances() {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = rng.random_range(10..60);
        let m = rng.random_range(5..40);
        let mut p = LpProblem::new();
        let mut q = minilp::Problem::new(minilp::OptimizationDirection::Minimize);
        let mut pv = Vec::new();
        let mut qv = Vec::new();
        for _ in 0..n {
            let lo = rng.random_range(-5.0..0.0);
            let up = lo + rng.random_range(0.0..10.0);
            let c = rng.random_range(-3.0..3.0);
            let v = p.add_variable(lo, up).unwrap();
            pv.push((v, c));
            qv.push(q.add_var(c, (lo, up)));
        }
        for _ in 0..m {
            let mut terms = Vec::new();
            let mut qterms = Vec::new();
            for j in 0..n {
                if rng.random_range(0.0..1.0) < 0.2 {
                    let a = rng.random_range(-4.0..4.0);
                    terms.push((pv[j].0, a));
                    qterms.push((qv[j], a));
                }
            }
            let rhs = rng.random_range(-5.0..5.0);
            let (s, op) = match rng.random_range(0..3) {
                0 => (Sense::Le, minilp::ComparisonOp::Le),
                1 => (Sense::Ge, minilp::ComparisonOp::Ge),
                _ => (Sense::Eq, minilp::ComparisonOp::Eq),
            };
            p.add_constraint(&terms, s, rhs).unwrap();
            q.add_constraint(qterms.as_slice(), op, rhs);
        }
        p.set_objective(&pv, Direction::Minimize).unwrap();
        for solver in variants() {
            let ours = solver.solve(&p);
            match q.solve() {
                Ok(sol) => {
                    assert_eq!(ours.status, Status::Optimal);
                    assert!((ours.objective_value - sol.objective()).abs() < 1e-6 * sol.objective().abs().max(1.0));
                }
                Err(minilp::Error::Infeasible) => assert_eq!(ours.status, Status::Infeasible),
                Err(e) => panic!("unexpected {e:?}"),
            }
        }
    }
}

#[test]
fn transport_toy_matches_enumeration() {
    // Two supplies (4, 6) and one demand node per column pair; three routes.
    let d = Dense {
        lo: vec![0.0; 3],
        up: vec![10.0; 3],
        rows: vec![(vec![1.0, 1.0, 0.0], Sense::Eq, 4.0), (vec![0.0, 1.0, 1.0], Sense::Eq, 6.0)],
        cost: vec![3.0, 1.0, 2.0],
    };
    let sol = d.build().solve();
    assert_eq!(sol.status, Status::Optimal);
    assert_eq!(d.brute_force(), Some(sol.objective_value));
    assert_eq!(sol.values, vec![0.0, 4.0, 2.0]);
}
