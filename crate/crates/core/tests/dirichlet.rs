//! Squared domains, flood fill, boundary transfer and the walk estimator.

use brownian_core::dirichlet::*;
use brownian_core::Error;

fn unit_square(n: u32) -> SquaredDomain {
    Shape::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }.squared(n).unwrap()
}

fn ring(n: i64, res: u32) -> SquaredDomain {
    let mut sq = Vec::new();
    for k in 0..n {
        sq.extend([(k, 0), (k, n - 1), (0, k), (n - 1, k)]);
    }
    SquaredDomain::new(res, sq).unwrap()
}

fn walk(n: u32, seed: u64) -> WalkConfig {
    WalkConfig {
        n_walkers: n,
        seed,
        ..WalkConfig::default()
    }
}

#[test]
fn sealed_pocket_is_excluded() {
    // 6x6 ring with an inner wall: column i = 3 closed off from j = 1..=4
    let mut sq: Vec<Square> = Vec::new();
    for k in 0..6 {
        sq.extend([(k, 0), (k, 5), (0, k), (5, k)]);
    }
    sq.extend((1..=4).map(|j| (3, j)));
    let d = SquaredDomain::new(2, sq).unwrap();
    let h = d.side();
    let r = InteriorRegion::flood_fill(&d, (1.5 * h, 1.5 * h)).unwrap();
    assert_eq!(r.squares().len(), 8);
    assert!(r.squares().iter().all(|s| s.0 < 3));
    let other = InteriorRegion::flood_fill(&d, (4.5 * h, 2.5 * h)).unwrap();
    assert_eq!(other.squares().len(), 4);
}

#[test]
fn fill_does_not_depend_on_start_square() {
    let d = ring(7, 3);
    let h = d.side();
    let a = InteriorRegion::flood_fill(&d, (1.5 * h, 1.5 * h)).unwrap();
    for (i, j) in [(2, 4), (5, 5), (3, 1)] {
        let b = InteriorRegion::flood_fill(&d, ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)).unwrap();
        assert_eq!(a.squares(), b.squares());
        assert_eq!(a.segments(), b.segments());
    }
}

#[test]
fn segments_are_edges_of_boundary_squares() {
    let d = unit_square(4);
    let h = d.side();
    let r = InteriorRegion::flood_fill(&d, (0.5, 0.5)).unwrap();
    for (s, &(i, j)) in r.segments().iter().zip(r.owners()) {
        assert!(d.contains((i, j)));
        let (x0, x1, y0, y1) = (i as f64 * h, (i + 1) as f64 * h, j as f64 * h, (j + 1) as f64 * h);
        let (p, q) = s.endpoints();
        for v in [p, q] {
            assert!(v.0 >= x0 && v.0 <= x1 && v.1 >= y0 && v.1 <= y1);
        }
    }
    for s in r.squares() {
        assert!(!d.contains(*s));
    }
}

#[test]
fn transfer_constant_and_missing() {
    let d = ring(4, 2);
    let h = d.side();
    let r = InteriorRegion::flood_fill(&d, (2.0 * h, 2.0 * h)).unwrap();
    let bc = BoundaryCondition::sample(&d, |_| 3.25, 0.0);
    assert!(transfer_condition(&r, &bc).unwrap().iter().all(|&v| v == 3.25));
    let partial = BoundaryCondition::new(
        bc.values().iter().filter(|(s, _)| **s != (0, 1)).map(|(s, v)| (*s, *v)).collect(),
        Epsilon::Lipschitz(0.0),
    );
    assert!(matches!(transfer_condition(&r, &partial), Err(Error::MissingBoundaryValue(0, 1))));
}

#[test]
fn corner_zone_averages_neighbors() {
    let d = ring(4, 2);
    let h = d.side();
    let r = InteriorRegion::flood_fill(&d, (2.0 * h, 2.0 * h)).unwrap();
    let values: Vec<f64> = (0..r.segments().len()).map(|k| k as f64 * 10.0).collect();
    for (k, s) in r.segments().iter().enumerate() {
        let (lo, _) = s.endpoints();
        let v = r.value_at(&values, k, lo);
        let p = r.partners()[k][0].unwrap();
        assert_eq!(v, 0.5 * (values[k] + values[p]));
        let (a, b) = s.endpoints();
        let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        assert_eq!(r.value_at(&values, k, mid), values[k]);
    }
}

#[test]
fn sampled_linear_condition_tracks_midpoints() {
    let n = 5;
    let d = unit_square(n);
    let r = InteriorRegion::flood_fill(&d, (0.5, 0.5)).unwrap();
    let bc = BoundaryCondition::sample(&d, |p| p.0, 1.0);
    let eps = bc.validate(&d).unwrap();
    let psi = transfer_condition(&r, &bc).unwrap();
    let h = d.side();
    for (s, v) in r.segments().iter().zip(&psi) {
        let (a, b) = s.endpoints();
        let mx = 0.5 * (a.0 + b.0);
        assert!((v - mx).abs() <= eps + h);
    }
}

#[test]
fn adjacency_violations_are_rejected() {
    let d = ring(4, 2);
    let mut values: std::collections::BTreeMap<Square, f64> = d.squares().iter().map(|&s| (s, 0.0)).collect();
    values.insert((0, 1), 1.0);
    let mut table = std::collections::BTreeMap::new();
    table.insert(2, 0.5);
    let bc = BoundaryCondition::new(values, Epsilon::Table(table));
    assert!(matches!(bc.validate(&d), Err(Error::Domain(_))));
}

#[test]
fn constant_condition_is_exact() {
    let d = unit_square(4);
    let r = InteriorRegion::flood_fill(&d, (0.3, 0.6)).unwrap();
    let psi = vec![0.7; r.segments().len()];
    let e = solve_at(&r, &psi, (0.3, 0.6), &walk(300, 5)).unwrap();
    assert_eq!(e.mean, 0.7);
    assert_eq!(e.half_width, 0.0);
    assert_eq!(e.lost_walkers, 0);
}

#[test]
fn linear_combination_of_conditions() {
    let d = unit_square(4);
    let x = (0.4, 0.55);
    let r = InteriorRegion::flood_fill(&d, x).unwrap();
    let a: Vec<f64> = (0..r.segments().len()).map(|k| (k % 7) as f64 * 0.25).collect();
    let b: Vec<f64> = (0..r.segments().len()).map(|k| (k % 3) as f64 - 1.0).collect();
    let c: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 2.0 * p - 0.5 * q).collect();
    let e = solve_many(&r, &[&a, &b, &c], x, &walk(400, 9)).unwrap();
    assert!((e[2].mean - (2.0 * e[0].mean - 0.5 * e[1].mean)).abs() < 1e-12);
}

#[test]
fn estimates_obey_maximum_principle() {
    let d = unit_square(4);
    let x = (0.2, 0.7);
    let r = InteriorRegion::flood_fill(&d, x).unwrap();
    let psi: Vec<f64> = (0..r.segments().len()).map(|k| ((k * 37) % 11) as f64).collect();
    let e = solve_at(&r, &psi, x, &walk(500, 3)).unwrap();
    let lo = psi.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = psi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(e.mean >= lo - e.half_width && e.mean <= hi + e.half_width);
}

#[test]
fn harmonic_polynomials_on_unit_square() {
    let n = 5;
    let d = unit_square(n);
    let h = d.side();
    let phis: [(fn((f64, f64)) -> f64, f64); 5] = [
        (|p| p.0, 1.0),
        (|p| p.1, 1.0),
        (|p| p.0 * p.1, std::f64::consts::SQRT_2),
        (|p| p.0 * p.0 - p.1 * p.1, 2.0 * std::f64::consts::SQRT_2),
        (|p| p.0.powi(3) - 3.0 * p.0 * p.1 * p.1, 6.0),
    ];
    let bcs: Vec<BoundaryCondition> = phis.iter().map(|(f, l)| BoundaryCondition::sample(&d, f, *l)).collect();
    for x in [(0.5, 0.5), (0.3, 0.7)] {
        let r = InteriorRegion::flood_fill(&d, x).unwrap();
        let psis: Vec<Vec<f64>> = bcs.iter().map(|bc| transfer_condition(&r, bc).unwrap()).collect();
        let refs: Vec<&[f64]> = psis.iter().map(|v| v.as_slice()).collect();
        let est = solve_many(&r, &refs, x, &walk(3000, 11)).unwrap();
        for ((e, (f, _)), bc) in est.iter().zip(&phis).zip(&bcs) {
            let budget = e.half_width + bc.epsilon().at(n).unwrap() + h;
            assert!((e.mean - f(x)).abs() <= budget, "x={x:?}: {} vs {}", e.mean, f(x));
            assert_eq!(e.lost_walkers, 0);
        }
    }
}

#[test]
fn refining_constant_converges_at_first_level() {
    let prob = ShapeProblem {
        shape: Shape::Disk { cx: 0.0, cy: 0.0, r: 1.0 },
        phi: |_: (f64, f64)| 2.5,
        lipschitz: 0.0,
    };
    let cfg = RefineConfig {
        n0: 3,
        n_max: 6,
        target_err: 0.2,
        walk: walk(200, 1),
    };
    let r = solve_refining(&prob, (0.1, 0.2), &cfg).unwrap();
    assert!(r.converged);
    assert_eq!(r.resolution, 3);
    assert_eq!(r.estimate.mean, 2.5);
    assert_eq!(r.trace.len(), 1);
}

#[test]
fn refining_disk_with_quadratic_condition() {
    let prob = ShapeProblem {
        shape: Shape::Disk { cx: 0.0, cy: 0.0, r: 1.0 },
        phi: |p: (f64, f64)| p.0 * p.0 - p.1 * p.1,
        lipschitz: 2.2,
    };
    let cfg = RefineConfig {
        n0: 4,
        n_max: 5,
        target_err: 1e-6,
        walk: walk(2000, 4),
    };
    let r = solve_refining(&prob, (0.25, 0.0), &cfg).unwrap();
    assert!(!r.converged);
    assert_eq!(r.trace.len(), 2);
    for t in &r.trace {
        assert!((t.v_n - 0.0625).abs() <= t.half_width + t.err_budget, "{t:?}");
    }
}

#[test]
fn disk_cosine_condition_vanishes_at_center() {
    let prob = ShapeProblem {
        shape: Shape::Disk { cx: 0.0, cy: 0.0, r: 1.0 },
        phi: |p: (f64, f64)| p.1.atan2(p.0).cos(),
        lipschitz: 1.5,
    };
    let cfg = RefineConfig {
        n0: 4,
        n_max: 4,
        target_err: 1e-6,
        walk: walk(2000, 8),
    };
    let r = solve_refining(&prob, (0.0, 0.0), &cfg).unwrap();
    let t = r.trace[0];
    assert!(t.v_n.abs() <= t.half_width + t.err_budget);
}

#[test]
fn start_outside_or_on_boundary_is_an_error() {
    let d = unit_square(3);
    let r = InteriorRegion::flood_fill(&d, (0.5, 0.5)).unwrap();
    let psi = vec![0.0; r.segments().len()];
    assert!(solve_at(&r, &psi, (0.01, 0.5), &walk(10, 0)).is_err());
    assert!(InteriorRegion::flood_fill(&d, (3.0, 3.0)).is_err());
}

#[test]
fn domain_file_round_trip() {
    let d = ring(4, 2);
    let bc = BoundaryCondition::sample(&d, |p| p.0 + p.1, 1.5);
    let f = DomainFile::from_parts(&d, &bc).unwrap();
    let back = DomainFile::parse(&f.to_json()).unwrap();
    assert_eq!(back, f);
    let (d2, bc2) = back.build().unwrap();
    assert_eq!(d2, d);
    assert_eq!(bc2.values(), bc.values());
    assert!(DomainFile::parse("{\"resolution\": 2}").is_err());
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let d = unit_square(4);
    let x = (0.6, 0.35);
    let r = InteriorRegion::flood_fill(&d, x).unwrap();
    let bc = BoundaryCondition::sample(&d, |p| p.0 * p.1, 1.5);
    let psi = transfer_condition(&r, &bc).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| solve_at(&r, &psi, x, &walk(300, 21)).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.half_width.to_bits(), b.half_width.to_bits());
}
