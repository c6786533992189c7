//! Acceptance suite. Each test covers one criterion end to end and prints a
//! pass line (visible with `--nocapture`); tolerances are pinned in the
//! assertions.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use ftb_core::bounds::{improved_fh_upper, sharp_upper_order0, sharp_upper_order1, ConstraintSet};
use ftb_core::box_hedge::{box_hedge, box_value, OrthantBox};
use ftb_core::constructions::{
    attain_order1, counterexample_instance, verify_membership, ClassKind,
};
use ftb_core::instancegen::{generate, GenParams};
use ftb_core::lp::{LinearProgram, LpStatus, Relation, Sense};
use ftb_core::measures::{DiscreteMarginal, JointMeasure, ProductGrid};
use ftb_core::numeric::Scalar;
use ftb_core::transport::{
    build_primal, check_no_uniform_strong_arbitrage, max_distribution_constraints, price_bound,
    FrechetClass, PayoffGrid,
};

type Q = BigRational;

fn q(s: &str) -> Q {
    Q::parse_number(s).unwrap()
}

/// Query corners mixing grid points, midpoints, and out-of-support values.
fn random_corner<T: Scalar>(rng: &mut ChaCha20Rng, grid: &ProductGrid<T>) -> Vec<T> {
    (0..grid.dimension())
        .map(|j| {
            let axis = grid.axis(j);
            let i = rng.gen_range(0..axis.len());
            match rng.gen_range(0..5) {
                0 => axis[i].clone() + T::from_ratio(1, 2),
                1 => axis[0].clone() - T::one(),
                2 => axis[axis.len() - 1].clone() + T::one(),
                _ => axis[i].clone(),
            }
        })
        .collect()
}

fn q0_lp_value<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    corner: &[T],
) -> T {
    let class = FrechetClass::Order0 { marginals: marginals.to_vec() };
    let grid = class.grid().unwrap();
    let payoff = PayoffGrid::lower_orthant_indicator(grid, corner.to_vec()).unwrap();
    let sol = build_primal(&class, constraints, &payoff).unwrap().solve().unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    sol.objective_value
}

#[test]
fn criterion_1_counterexample_reproduction() {
    let start = Instant::now();
    let (marginals, constraints, table) = counterexample_instance::<Q>();
    let x = [q("0"), q("1")];

    let bound = improved_fh_upper(&marginals, &constraints, &x).unwrap();
    assert_eq!(bound, Q::from_ratio(1, 10));

    let class = FrechetClass::Exact { marginals: marginals.clone() };
    let grid = class.grid().unwrap();
    let payoff = PayoffGrid::lower_orthant_indicator(grid, x.to_vec()).unwrap();
    let sol = build_primal(&class, &constraints, &payoff).unwrap().solve().unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert_eq!(sol.objective_value, Q::from_ratio(1, 20));

    let report =
        verify_membership(&table, ClassKind::Exact, &marginals, &constraints, &Q::zero()).unwrap();
    assert!(report.passed, "{:?}", report.violations);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("acceptance 1 (counterexample reproduction): PASS ({elapsed:?})");
}

#[test]
fn criterion_2_box_value_matches_q0_lp() {
    let start = Instant::now();

    // 200 random d=2 instances in float mode
    for seed in 0..200u64 {
        let params = GenParams {
            seed,
            dimension: 2,
            atoms_per_axis: 2 + (seed % 5) as usize, // up to 6 atoms
            n_constraints: (seed % 5) as usize,      // up to 4 constraints
        };
        let inst = generate::<f64>(&params).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xb0c5);
        let grid = ProductGrid::from_marginals(&inst.marginals).unwrap();
        let corner = random_corner(&mut rng, &grid);
        let b = OrthantBox::new(corner.clone());
        let closed = box_value(&inst.marginals, &inst.constraints, &b).unwrap();
        let lp = q0_lp_value(&inst.marginals, &inst.constraints, &corner);
        assert!(
            (closed - lp).abs() <= 1e-8,
            "seed {seed}: closed {closed} vs lp {lp}"
        );
    }

    // 50 random d=3 instances in float mode
    for seed in 0..50u64 {
        let params = GenParams {
            seed: seed + 1000,
            dimension: 3,
            atoms_per_axis: 2 + (seed % 3) as usize, // up to 4 atoms
            n_constraints: (seed % 4) as usize,
        };
        let inst = generate::<f64>(&params).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xd3);
        let grid = ProductGrid::from_marginals(&inst.marginals).unwrap();
        let corner = random_corner(&mut rng, &grid);
        let b = OrthantBox::new(corner.clone());
        let closed = box_value(&inst.marginals, &inst.constraints, &b).unwrap();
        let lp = q0_lp_value(&inst.marginals, &inst.constraints, &corner);
        assert!(
            (closed - lp).abs() <= 1e-8,
            "d=3 seed {seed}: closed {closed} vs lp {lp}"
        );
    }

    // exact spot-check on 20 d=2 instances: zero discrepancy
    for seed in 0..20u64 {
        let params = GenParams {
            seed,
            dimension: 2,
            atoms_per_axis: 2 + (seed % 5) as usize,
            n_constraints: (seed % 5) as usize,
        };
        let inst = generate::<Q>(&params).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xb0c5);
        let grid = ProductGrid::from_marginals(&inst.marginals).unwrap();
        let corner = random_corner(&mut rng, &grid);
        let b = OrthantBox::new(corner.clone());
        let closed = box_value(&inst.marginals, &inst.constraints, &b).unwrap();
        let lp = q0_lp_value(&inst.marginals, &inst.constraints, &corner);
        assert_eq!(closed, lp, "exact spot-check failed at seed {seed}");
        // the closed form and the envelope formula are the same number
        assert_eq!(
            closed,
            sharp_upper_order0(&inst.marginals, &inst.constraints, &corner).unwrap()
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("acceptance 2 (closed-form box value vs order-0 LP): PASS ({elapsed:?})");
}

#[test]
fn criterion_3_strong_duality_all_class_pairs() {
    let gap_tol = 1e-8f64;
    let dom_tol = 1e-9f64;
    for seed in 0..100u64 {
        let params = GenParams {
            seed: seed + 5000,
            dimension: 2,
            atoms_per_axis: 3 + (seed % 2) as usize,
            n_constraints: (seed % 4) as usize,
        };
        let inst = generate::<f64>(&params).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xa11ce);
        let classes = [
            FrechetClass::Exact { marginals: inst.marginals.clone() },
            FrechetClass::Order0 { marginals: inst.marginals.clone() },
            FrechetClass::Order1Band { bands: inst.bands.clone() },
        ];
        for class in classes {
            let grid = class.grid().unwrap();
            let values: Vec<f64> = (0..grid.num_points())
                .map(|_| rng.gen_range(-12i64..=12) as f64 / 4.0)
                .collect();
            let payoff = PayoffGrid::sampled(grid, values).unwrap();
            let pb = price_bound(&class, &inst.constraints, &payoff, &gap_tol)
                .unwrap_or_else(|e| panic!("seed {seed} {}: {e}", class.name()));
            assert!(
                (pb.primal_value - pb.dual_value).abs() <= gap_tol,
                "gap at seed {seed} {}",
                class.name()
            );
            pb.hedge
                .verify(&payoff, &inst.constraints, &dom_tol)
                .unwrap_or_else(|e| panic!("hedge at seed {seed} {}: {e}", class.name()));
        }
    }
    println!("acceptance 3 (strong duality on 100 instances per class pair): PASS");
}

#[test]
fn criterion_4_hedge_decomposition_validity() {
    for seed in 0..200u64 {
        let params = GenParams {
            seed,
            dimension: 2,
            atoms_per_axis: 2 + (seed % 5) as usize,
            n_constraints: (seed % 5) as usize,
        };
        let inst = generate::<f64>(&params).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xb0c5);
        let grid = ProductGrid::from_marginals(&inst.marginals).unwrap();
        let corner = random_corner(&mut rng, &grid);
        let b = OrthantBox::new(corner.clone());
        let res = box_hedge(&inst.marginals, &inst.constraints, &b).unwrap();
        let closed = box_value(&inst.marginals, &inst.constraints, &b).unwrap();
        assert!((res.portfolio.price - closed).abs() <= 1e-9, "seed {seed}");
        assert!((res.value - closed).abs() <= 1e-9, "seed {seed}");
        let payoff =
            PayoffGrid::lower_orthant_indicator(res.portfolio.grid.clone(), corner).unwrap();
        res.portfolio
            .verify(&payoff, &inst.constraints, &1e-9)
            .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let positive = res
            .portfolio
            .coefficients
            .iter()
            .filter(|a| **a > 1e-9)
            .count();
        assert!(positive <= 1, "seed {seed}: two positive orthant positions");
    }
    println!("acceptance 4 (hedge decomposition validity on the criterion-2 suite): PASS");
}

#[test]
fn criterion_5_order1_attainment_exact() {
    for seed in 0..100u64 {
        let params = GenParams {
            seed: seed + 9000,
            dimension: 2 + (seed % 2) as usize,
            atoms_per_axis: 3,
            n_constraints: (seed % 4) as usize,
        };
        let inst = generate::<Q>(&params).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x0417);
        let grid = ProductGrid::from_marginals(&inst.marginals).unwrap();
        let x = random_corner(&mut rng, &grid);
        let mu = attain_order1(&inst.marginals, &inst.constraints, &x).unwrap();
        let report = verify_membership(
            &mu,
            ClassKind::Order1,
            &inst.marginals,
            &inst.constraints,
            &Q::zero(),
        )
        .unwrap();
        assert!(report.passed, "seed {seed}: {:?}", report.violations);
        let bound = sharp_upper_order1(&inst.marginals, &inst.constraints, &x).unwrap();
        assert_eq!(mu.cdf(&x).unwrap(), bound, "seed {seed}");
    }
    println!("acceptance 5 (order-1 attainment, exact arithmetic): PASS");
}

/// LP over the order-1 membership class on the support grid extended by a
/// point past every coordinate, so mass may be parked outside the orthants.
fn sample_order1_member(
    marginals: &[DiscreteMarginal<f64>],
    constraints: &ConstraintSet<f64>,
    rng: &mut ChaCha20Rng,
) -> JointMeasure<f64> {
    let far = marginals
        .iter()
        .flat_map(|m| m.support())
        .chain(constraints.iter().flat_map(|c| c.corner().to_vec()))
        .fold(0.0f64, f64::max)
        + 1.0;
    let axes: Vec<Vec<f64>> = marginals
        .iter()
        .map(|m| {
            let mut a = m.support();
            a.push(far);
            a
        })
        .collect();
    let grid = ProductGrid::new(axes).unwrap();
    let n = grid.num_points();
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-8i64..=8) as f64 / 8.0).collect();
    let mut lp = LinearProgram::nonnegative(Sense::Maximize, objective);
    lp.push_row(vec![1.0; n], Relation::Eq, 1.0).unwrap();
    for (j, m) in marginals.iter().enumerate() {
        for (i, t) in grid.axis(j).iter().enumerate() {
            let mut row = vec![0.0; n];
            for idx in grid.indices() {
                if idx[j] <= i {
                    row[grid.flat_index(&idx)] = 1.0;
                }
            }
            let cap = if i + 1 == grid.axis(j).len() { 1.0 } else { m.cdf(t) };
            lp.push_row(row, Relation::Le, cap).unwrap();
        }
    }
    for c in constraints.iter() {
        let mut row = vec![0.0; n];
        for idx in grid.indices() {
            let p = grid.point(&idx);
            if p.iter().zip(c.corner()).all(|(x, s)| x <= s) {
                row[grid.flat_index(&idx)] = 1.0;
            }
        }
        lp.push_row(row, Relation::Le, *c.pi_upper()).unwrap();
    }
    let sol = lp.solve().unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    let masses = sol.primal.iter().map(|m| m.max(0.0)).collect();
    JointMeasure::new(grid, masses).unwrap()
}

#[test]
fn criterion_6_upper_bound_validity_for_sampled_members() {
    let tol = 1e-9f64;
    for seed in 0..100u64 {
        let params = GenParams {
            seed: seed + 13000,
            dimension: 2,
            atoms_per_axis: 3 + (seed % 2) as usize,
            n_constraints: 1 + (seed % 3) as usize,
        };
        let inst = generate::<f64>(&params).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6e);

        // order-0 member: optimal plan of the transport LP for a random payoff
        let class = FrechetClass::Order0 { marginals: inst.marginals.clone() };
        let grid = class.grid().unwrap();
        let values: Vec<f64> = (0..grid.num_points())
            .map(|_| rng.gen_range(-8i64..=8) as f64 / 8.0)
            .collect();
        let payoff = PayoffGrid::sampled(grid.clone(), values).unwrap();
        let sol = build_primal(&class, &inst.constraints, &payoff).unwrap().solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let masses = sol.primal.iter().map(|m| m.max(0.0)).collect();
        let member0 = JointMeasure::new(grid.clone(), masses).unwrap();

        let member1 = sample_order1_member(&inst.marginals, &inst.constraints, &mut rng);

        for _ in 0..50 {
            let x = random_corner(&mut rng, &grid);
            let f0 = member0.cdf(&x).unwrap();
            let b0 = sharp_upper_order0(&inst.marginals, &inst.constraints, &x).unwrap();
            assert!(f0 <= b0 + tol, "seed {seed}: order0 cdf {f0} above bound {b0}");
            let f1 = member1.cdf(&x).unwrap();
            let b1 = sharp_upper_order1(&inst.marginals, &inst.constraints, &x).unwrap();
            assert!(f1 <= b1 + tol, "seed {seed}: order1 cdf {f1} above bound {b1}");
        }
    }
    println!("acceptance 6 (upper-bound validity for sampled class members): PASS");
}

#[test]
fn criterion_7_arbitrage_equivalence() {
    // point masses force the coupling; the orthant cap 0.5 is unattainable
    let d0 = DiscreteMarginal::point_mass(q("0"));
    let constraints = ConstraintSet::new(vec![
        ftb_core::bounds::OrthantConstraint::new(vec![q("0"), q("0")], q("0"), q("0.5")).unwrap(),
    ]);
    let check = check_no_uniform_strong_arbitrage(&[d0.clone(), d0], &constraints).unwrap();
    assert!(!check.arbitrage_free);
    let portfolio = check.arbitrage.unwrap();
    assert!(portfolio.price <= Q::zero());
    for idx in portfolio.grid.indices() {
        assert!(portfolio.payout_at(&idx, &constraints) >= Q::one());
    }

    // generator-produced instances are arbitrage-free with a verified witness
    for seed in 0..20u64 {
        let params = GenParams {
            seed: seed + 21000,
            dimension: 2,
            atoms_per_axis: 3 + (seed % 3) as usize,
            n_constraints: 1 + (seed % 3) as usize,
        };
        let inst = generate::<Q>(&params).unwrap();
        let check =
            check_no_uniform_strong_arbitrage(&inst.marginals, &inst.constraints).unwrap();
        assert!(check.arbitrage_free, "seed {seed}");
        let witness = check.witness.unwrap();
        let report = verify_membership(
            &witness,
            ClassKind::Exact,
            &inst.marginals,
            &inst.constraints,
            &Q::zero(),
        )
        .unwrap();
        assert!(report.passed, "seed {seed}: {:?}", report.violations);
    }
    println!("acceptance 7 (arbitrage equivalence): PASS");
}

#[test]
fn criterion_8_maximum_transport_corollary() {
    let run = |mk: &dyn Fn(&str) -> f64| {
        let uniform2 = DiscreteMarginal::probability(vec![
            (mk("0"), mk("0.5")),
            (mk("1"), mk("0.5")),
        ])
        .unwrap();
        let nu_max = DiscreteMarginal::probability(vec![
            (mk("0"), mk("0.25")),
            (mk("1"), mk("0.75")),
        ])
        .unwrap();
        let constraints = max_distribution_constraints(&nu_max, 2);
        let class = FrechetClass::Exact { marginals: vec![uniform2.clone(), uniform2] };
        let grid = class.grid().unwrap();
        let mut values = Vec::new();
        for idx in grid.indices() {
            let p = grid.point(&idx);
            values.push(p[0] + p[1]);
        }
        let payoff = PayoffGrid::sampled(grid, values).unwrap();
        price_bound(&class, &constraints, &payoff, &1e-8).unwrap().value
    };
    let value = run(&|s| f64::parse_number(s).unwrap());
    assert!((value - 1.0).abs() <= 1e-9, "independence expectation, got {value}");

    // the same instance in exact arithmetic reproduces it with zero error
    let uniform2 =
        DiscreteMarginal::probability(vec![(q("0"), q("0.5")), (q("1"), q("0.5"))]).unwrap();
    let nu_max =
        DiscreteMarginal::probability(vec![(q("0"), q("0.25")), (q("1"), q("0.75"))]).unwrap();
    let constraints = max_distribution_constraints(&nu_max, 2);
    let class = FrechetClass::Exact { marginals: vec![uniform2.clone(), uniform2] };
    let grid = class.grid().unwrap();
    let mut values = Vec::new();
    for idx in grid.indices() {
        let p = grid.point(&idx);
        values.push(p[0].clone() + p[1].clone());
    }
    let payoff = PayoffGrid::sampled(grid, values).unwrap();
    let pb = price_bound(&class, &constraints, &payoff, &Q::zero()).unwrap();
    assert_eq!(pb.value, Q::one());
    println!("acceptance 8 (maximum-transport corollary): PASS");
}
