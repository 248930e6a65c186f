mod common;

use common::exact::{contains_exact, corners, q, random_convex_region};
use kslab::coverings::*;
use kslab::grid::*;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn half_interval_closed_form() {
    let e = Region::open_half_space([-1.0, 0.0, 0.0], 0.0).intersect(Region::half_space([1.0, 0.0, 0.0], 0.5));
    let depth = 10;
    let d = dyadic_decomposition(&e, 1, depth).unwrap();
    // [2^{-k-1}, 2^{-k}] for k = 1..=depth, listed by generation.
    let expected: Vec<DyadicCube> = (1..=depth)
        .map(|k| {
            let gen = k + 1;
            // lower end 2^{-k-1} = −1/2 + c·2^{-gen}  ⇒  c = 2^{gen−1} + 1
            DyadicCube { k: gen, coords: [(1u64 << (gen - 1)) + 1, 0, 0] }
        })
        .collect();
    assert_eq!(d.cubes, expected);
    for (c, k) in d.cubes.iter().zip(1..) {
        assert_eq!(c.lower(0), (-(k as f64) - 1.0).exp2());
        assert_eq!(c.upper(0), (-(k as f64)).exp2());
    }
    assert_eq!(d.residual_measure, (-(depth as f64) - 1.0).exp2());
    assert_eq!(d.covered_exact() + q(d.residual_measure), q(0.5));
}

#[test]
fn whole_cube_is_one_cube() {
    for dim in 1..=3 {
        let d = dyadic_decomposition(&Region::cube([0.0; 3], 1.0), dim, 6).unwrap();
        assert_eq!(d.cubes, vec![DyadicCube::ROOT]);
        assert_eq!(d.residual_measure, 0.0);
        assert_eq!(d.witnesses, vec![None]);
    }
}

#[test]
fn punctured_cube_residual_shrinks() {
    let e = Region::cube([0.0; 3], 1.0).minus(Region::closed_ball([0.0; 3], 0.0));
    let mut last = f64::INFINITY;
    for depth in 1..=6 {
        let d = dyadic_decomposition(&e, 2, depth).unwrap();
        assert!(d.pairwise_disjoint());
        assert_eq!(d.covered_exact() + q(d.residual_measure), BigRational::one());
        // Only the 4 cubes at the origin stay partial.
        assert_eq!(d.residual_measure, 4.0 * (-2.0 * (depth as f64 + 1.0)).exp2());
        assert!(d.residual_measure < last);
        last = d.residual_measure;
    }
}

#[test]
fn randomized_decompositions_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..100 {
        let dim = 1 + trial % 3;
        let depth = [9, 6, 3][dim - 1];
        let e = random_convex_region(&mut rng, dim);
        let d = dyadic_decomposition(&e, dim, depth).unwrap();
        assert!(d.pairwise_disjoint(), "trial {trial}");
        for (c, w) in d.cubes.iter().zip(&d.witnesses) {
            // Containment: a closed cube lies in a convex set iff its corners do.
            assert!(corners(c, dim).iter().all(|p| contains_exact(&e, p)), "trial {trial} cube {c:?}");
            // Progenitor escapes E, with an exact witness.
            match c.parent() {
                None => assert!(w.is_none()),
                Some(p) => {
                    let w = w.expect("witness recorded");
                    for a in 0..dim {
                        assert!(w[a] >= p.lower(a) && w[a] <= p.upper(a));
                    }
                    let wq = [q(w[0]), q(w[1]), q(w[2])];
                    assert!(!contains_exact(&e, &wq), "trial {trial} witness {w:?}");
                }
            }
        }
        // Pairwise disjointness checked by brute force too.
        for a in 0..d.cubes.len() {
            for b in a + 1..d.cubes.len() {
                assert!(d.cubes[a].interiors_disjoint(&d.cubes[b]));
            }
        }
        assert!(d.covered_measure() <= 1.0 + 1e-15);
    }
}

#[test]
fn uncovered_points_sit_in_partial_cubes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let depth = 5;
    for _ in 0..20 {
        let e = random_convex_region(&mut rng, 2);
        let d = dyadic_decomposition(&e, 2, depth).unwrap();
        for _ in 0..200 {
            let p = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), 0.0];
            if !e.contains(&p) {
                continue;
            }
            let covered = d.cubes.iter().any(|c| (0..2).all(|a| p[a] >= c.lower(a) && p[a] <= c.upper(a)));
            if covered {
                continue;
            }
            // No cube on the chain to the finest generation is inside E.
            let mut c = DyadicCube::ROOT;
            for _ in 0..=depth + 1 {
                assert_ne!(classify(&e, &c, 2).unwrap(), Relation::Inside, "point {p:?}");
                let kids = c.children(2);
                c = *kids
                    .iter()
                    .find(|k| (0..2).all(|a| p[a] >= k.lower(a) && p[a] < k.upper(a)))
                    .unwrap();
            }
        }
    }
}

#[test]
fn cz_hand_example() {
    let f = Region::half_space([-1.0, 0.0, 0.0], -0.25).intersect(Region::half_space([1.0, 0.0, 0.0], 0.5));
    let s = cz_selection(&f, 1, 0.25, 8).unwrap();
    assert_eq!(s.cubes, vec![DyadicCube { k: 2, coords: [3, 0, 0] }]);
    assert_eq!(s.densities, vec![1.0]);
    assert_eq!(s.predecessor_max, vec![0.5]);
    assert_eq!(s.residual_measure, 0.0);
    assert_eq!(s.f_measure, 0.25);
}

#[test]
fn cz_empty_and_too_dense() {
    let empty = Region::ball([5.0, 0.0, 0.0], 0.1);
    let s = cz_selection(&empty, 2, 0.3, 6).unwrap();
    assert!(s.cubes.is_empty());
    let full = Region::All;
    assert!(matches!(cz_selection(&full, 2, 0.3, 6), Err(kslab::LabError::Hypothesis(_))));
}

#[test]
fn cz_random_dyadic_unions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eta = 0.5;
    for _ in 0..20 {
        let mut cells = Vec::new();
        for _ in 0..rng.gen_range(1..6) {
            let k = rng.gen_range(2..5u32);
            let c = DyadicCube { k, coords: [rng.gen_range(0..1 << k), rng.gen_range(0..1 << k), 0] };
            cells.push(c);
        }
        let mut r = Region::cube(cells[0].center(2), cells[0].side());
        for c in &cells[1..] {
            r = r.union(Region::cube(c.center(2), c.side()));
        }
        let s = match cz_selection(&r, 2, eta, 7) {
            Ok(s) => s,
            Err(_) => continue,
        };
        for (d, p) in s.densities.iter().zip(&s.predecessor_max) {
            assert!(*d > 1.0 - eta);
            assert!(*p <= 1.0 - eta);
        }
        assert!(s.residual_measure <= 4.0 * (-7.0f64).exp2());
        for a in 0..s.cubes.len() {
            for b in a + 1..s.cubes.len() {
                assert!(s.cubes[a].interiors_disjoint(&s.cubes[b]));
            }
        }
    }
}

#[test]
fn vitali_greedy_trace() {
    let balls = [Ball { center: [0.0; 3], radius: 1.0 }, Ball { center: [0.5, 0.0, 0.0], radius: 1.0 }];
    let s = vitali_select(&balls, 1).unwrap();
    assert_eq!(s.selected, vec![0]);
    assert_eq!(s.cover_by, vec![0, 0]);
    assert!(s.five_times_coverage());
    let apart = [Ball { center: [0.0; 3], radius: 1.0 }, Ball { center: [3.0, 0.0, 0.0], radius: 0.5 }];
    assert_eq!(vitali_select(&apart, 1).unwrap().selected, vec![0, 1]);
    // Tangent balls are disjoint as open sets.
    let touch = [Ball { center: [0.0; 3], radius: 1.0 }, Ball { center: [2.0, 0.0, 0.0], radius: 1.0 }];
    assert_eq!(vitali_select(&touch, 1).unwrap().selected, vec![0, 1]);
    assert!(vitali_select(&[Ball { center: [0.0; 3], radius: 0.0 }], 1).is_err());
}

#[test]
fn vitali_random_collections() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = Grid::cube(2, 1.0 / 128.0, 1.5).unwrap();
    for _ in 0..10 {
        let balls: Vec<Ball> = (0..100)
            .map(|_| Ball {
                center: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0],
                radius: rng.gen_range(0.01..0.3),
            })
            .collect();
        let s = vitali_select(&balls, 2).unwrap();
        assert!(s.disjoint());
        assert!(s.five_times_coverage());
        let raster = |set: &[usize]| {
            (0..g.len())
                .filter(|&i| {
                    let p = g.point(i);
                    set.iter().any(|&j| dist2(&p, &balls[j].center) < balls[j].radius * balls[j].radius)
                })
                .count() as f64
        };
        let all: Vec<usize> = (0..balls.len()).collect();
        assert!(raster(&s.selected) >= raster(&all) / 25.0);
    }
}

#[test]
fn stacking_single_and_columns() {
    let m = Rational::from_integer(3);
    let exact = m / (m + Rational::from_integer(1));
    let one = Cylinder { k: 1, coords: [1, 0, 0], slot: 2 };
    let r = stacking(&[one], m, 2).unwrap();
    assert_eq!(r.stacked / r.total, exact);
    let two = [one, Cylinder { k: 1, coords: [0, 1, 0], slot: 0 }];
    let r = stacking(&two, m, 2).unwrap();
    assert_eq!(r.stacked / r.total, exact);
    // Same column, overlapping stacks.
    let col = [Cylinder { k: 1, coords: [0, 0, 0], slot: 0 }, Cylinder { k: 1, coords: [0, 0, 0], slot: 1 }];
    let r = stacking(&col, m, 2).unwrap();
    assert!(r.stacked / r.total > exact);
    assert!(r.holds && r.report.pass);
    assert!(stacking(&[Cylinder { k: 1, coords: [2, 0, 0], slot: 0 }], m, 2).is_err());
    assert!(stacking(&[one], Rational::new(1, 2), 2).is_err());
}

#[test]
fn stacking_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..1000 {
        let dim = 1 + trial % 2;
        let m = Rational::new(rng.gen_range(1..6), 1) + Rational::new(rng.gen_range(0..4), 4);
        let cyl: Vec<Cylinder> = (0..rng.gen_range(1..8))
            .map(|_| {
                let k = rng.gen_range(0..4u32);
                let mut coords = [0u64; 3];
                for c in coords.iter_mut().take(dim) {
                    *c = rng.gen_range(0..1u64 << k);
                }
                Cylinder { k, coords, slot: rng.gen_range(0..1u64 << (2 * k)) }
            })
            .collect();
        let r = stacking(&cyl, m, dim).unwrap();
        assert!(r.holds, "trial {trial}: {cyl:?}");
    }
}

#[test]
fn sun_rising_examples() {
    let g = Grid::unit_interval(256).unwrap();
    let u = ScalarField::from_fn(&g, |p| p[0]).unwrap();
    let s = sun_rising(&u, 2.0).unwrap();
    assert_eq!(s.shade_measure, 0.0);
    let s = sun_rising(&u, 0.5).unwrap();
    // Every interior node but the last one sees a higher point to its right.
    assert_eq!(s.shade.iter().filter(|&&b| b).count(), g.len() - 3);
    assert!(s.report.pass && s.slope_inclusion);
    let u = ScalarField::from_fn(&g, |p| (2.0 * std::f64::consts::PI * p[0]).sin()).unwrap();
    let s = sun_rising(&u, 20.0).unwrap();
    assert!(s.report.pass, "{:?}", s.report);
    assert!(s.slope_inclusion);
    assert!(sun_rising(&ScalarField::constant(&Grid::cube(2, 0.1, 1.0).unwrap(), 0.0).unwrap(), 1.0).is_err());
}

#[test]
fn sun_rising_two_rises() {
    // Two steep unit rises separated by a slow drop: each casts a shadow of
    // length ≈ 1/m, so |S^m| ≈ 2/m while osc = 1. Only the positive-variation
    // bound survives.
    let g = Grid::unit_interval(1000).unwrap();
    let u = ScalarField::from_fn(&g, |p| {
        let x = p[0];
        if x < 0.2 {
            0.0
        } else if x < 0.21 {
            (x - 0.2) / 0.01
        } else if x < 0.5 {
            1.0 - (x - 0.21) / 0.29
        } else if x < 0.51 {
            (x - 0.5) / 0.01
        } else {
            1.0
        }
    })
    .unwrap();
    let s = sun_rising(&u, 20.0).unwrap();
    assert!(!s.report.pass, "{:?}", s.report);
    assert!(s.variation_report.pass, "{:?}", s.variation_report);
    assert!((s.shade_measure - 0.1).abs() < 0.01, "{}", s.shade_measure);
}

#[test]
fn sun_rising_dominator_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = Grid::unit_interval(300).unwrap();
    for _ in 0..10 {
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let u = ScalarField::new(g.clone(), vals).unwrap();
        let m = rng.gen_range(0.5..5.0);
        let s = sun_rising(&u, m).unwrap();
        let v = |i: usize| u.at(i) - m * g.point(i)[0];
        for x in 1..g.len() - 1 {
            let dominated = (x + 1..g.len() - 1).any(|y| v(y) > v(x));
            assert_eq!(s.shade[x], dominated);
        }
        assert!(s.variation_report.pass);
    }
}

#[test]
fn ink_spots_trivial_cases() {
    let g = Grid::cube(2, 1.0 / 32.0, 1.0).unwrap();
    let point = Region::closed_ball([0.0; 3], 0.0);
    let r = ink_spots_check(&Region::ball([0.0; 3], 1.0), &point, 0.5, &g).unwrap();
    assert!(r.hypothesis_holds && r.report.pass, "{:?}", r.report);
    assert!(r.midpoint_balls.iter().all(|b| b.contained));
    let disc = Region::closed_ball([0.0; 3], RHO1);
    let r = ink_spots_check(&Region::ball([0.0; 3], 1.0), &disc, 0.5, &g).unwrap();
    assert_eq!(r.report.lhs, 0.0);
    assert!(r.report.pass);
    let far = Region::ball([0.8, 0.0, 0.0], 0.05);
    assert!(matches!(
        ink_spots_check(&Region::All, &far, 0.5, &g),
        Err(kslab::LabError::Hypothesis(_))
    ));
}
