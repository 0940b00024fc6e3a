mod common;

use common::{brute_force_retained, center_of, corner_of, cube_grid};
use levelset::approximators::{bag_strategy, bah_strategy, Mode, Strategy};
use levelset::blackbox::{make_affine, make_quadratic_f0, make_spike, Oracle};
use levelset::engine::{iterations_needed, run_ba, BaConfig, RunTrace, StopCriterion};
use levelset::protocol::LevelSetEstimate;
use levelset::verification::{check_trace, CheckOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(o: &Oracle, s: &dyn Strategy, level: f64, depth: u32, mode: Mode) -> RunTrace {
    let config = BaConfig::for_strategy(s, o.dim(), level, StopCriterion::MaxDepth(depth))
        .unwrap()
        .with_mode(mode);
    run_ba(&config, o, s).unwrap()
}

fn sorted(mut v: Vec<levelset::DyadicCube>) -> Vec<levelset::DyadicCube> {
    v.sort();
    v
}

fn accepts(mode: Mode, lo: f64, hi: f64, level: f64, rho: f64) -> bool {
    match mode {
        Mode::LevelSet => hi >= level - rho && lo <= level + rho,
        Mode::Sublevel => lo <= level + rho,
        Mode::Superlevel => hi >= level - rho,
    }
}

#[test]
fn bah_retention_matches_center_rule() {
    let cases: Vec<(Oracle, f64, f64, f64)> = vec![
        (make_affine(vec![1.0], 0.0).unwrap(), 0.5, 1.0, 1.0),
        (make_affine(vec![0.6, 0.4], 0.0).unwrap(), 0.5, 1.0, 1.0),
        (make_quadratic_f0(0.3, 2), 0.3, 2.0, 1.0),
        (
            make_spike(0.2, 1.0, 0.5, vec![0.3, 0.6]).unwrap(),
            0.1,
            1.0,
            0.5,
        ),
    ];
    for (o, level, c, gamma) in cases {
        for mode in [Mode::LevelSet, Mode::Sublevel, Mode::Superlevel] {
            let s = bah_strategy(c, gamma);
            let depth = if o.dim() == 1 { 8 } else { 6 };
            let trace = run(&o, &s, level, depth, mode);
            for i in 1..=trace.completed_iterations() {
                let keeps = |j: u32, idx: &[u64]| {
                    let v = o.value_unmetered(&center_of(j, idx));
                    accepts(mode, v, v, level, c * (-gamma * j as f64).exp2())
                };
                assert_eq!(
                    sorted(trace.retained_cubes(i)),
                    brute_force_retained(o.dim(), i, &keeps),
                    "iteration {i}, mode {mode:?}"
                );
            }
        }
    }
}

#[test]
fn bag_retention_matches_vertex_range_rule() {
    let cases: Vec<(Oracle, f64)> = vec![
        (make_quadratic_f0(0.3, 1), 0.3),
        (make_quadratic_f0(0.3, 2), 0.3),
        (make_affine(vec![0.6, 0.4], 0.0).unwrap(), 0.5),
    ];
    for (o, level) in cases {
        let d = o.dim();
        let s = bag_strategy(2.0, 1.0, d);
        for mode in [Mode::LevelSet, Mode::Sublevel, Mode::Superlevel] {
            let trace = run(&o, &s, level, 6, mode);
            for i in 1..=trace.completed_iterations() {
                let keeps = |j: u32, idx: &[u64]| {
                    let vals: Vec<f64> = (0..1 << d)
                        .map(|b| o.value_unmetered(&corner_of(j, idx, b)))
                        .collect();
                    let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
                    let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
                    accepts(
                        mode,
                        lo,
                        hi,
                        level,
                        2.0 * d as f64 * (-2.0 * j as f64).exp2(),
                    )
                };
                assert_eq!(
                    sorted(trace.retained_cubes(i)),
                    brute_force_retained(d, i, &keeps),
                    "iteration {i}, mode {mode:?}"
                );
            }
        }
    }
}

#[test]
fn queries_thresholds_and_accounting() {
    let o = make_quadratic_f0(0.3, 2);
    let s = bag_strategy(2.0, 1.0, 2);
    let trace = run(&o, &s, 0.3, 6, Mode::LevelSet);
    let k = 4u64;
    let mut expected = 0u64;
    let mut last_rho = f64::INFINITY;
    for i in 1..=trace.completed_iterations() {
        // every retained cube of the previous level is bisected and queried
        let bisected = 4 * trace.retained(i - 1).len() as u64;
        assert_eq!(trace.entries[i as usize].cubes_bisected as u64, bisected);
        expected += k * bisected;
        assert_eq!(trace.queries_after(i), expected);
        let rho = trace.output_set(i).unwrap().rho();
        let want = 4.0 * 0.25f64.powi(i as i32 - 1);
        assert!((rho - want).abs() <= 1e-15 * want, "{rho} vs {want}");
        assert!(rho < last_rho);
        last_rho = rho;
    }
    assert_eq!(o.query_count(), expected);
    assert_eq!(trace.total_queries(), expected);
}

#[test]
fn level_set_stays_inside_every_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases: Vec<(Oracle, Box<dyn Strategy>, f64)> = vec![
        (
            make_affine(vec![1.0], 0.0).unwrap(),
            Box::new(bah_strategy(1.0, 1.0)),
            0.5,
        ),
        (
            make_affine(vec![0.6, 0.4], 0.0).unwrap(),
            Box::new(bah_strategy(1.0, 1.0)),
            0.5,
        ),
        (
            make_affine(vec![0.6, 0.4], 0.0).unwrap(),
            Box::new(bag_strategy(1.0, 1.0, 2)),
            0.5,
        ),
        (
            make_quadratic_f0(0.3, 2),
            Box::new(bag_strategy(2.0, 1.0, 2)),
            0.3,
        ),
        (
            make_quadratic_f0(0.3, 2),
            Box::new(bah_strategy(2.0, 1.0)),
            0.3,
        ),
        (
            make_quadratic_f0(0.3, 3),
            Box::new(bag_strategy(2.0, 1.0, 3)),
            0.3,
        ),
    ];
    for (o, s, level) in cases {
        let trace = run(
            &o,
            &*s,
            level,
            if o.dim() == 3 { 4 } else { 7 },
            Mode::LevelSet,
        );
        let samples = o.sample_level_set(level, 2000, &mut rng).unwrap();
        for i in 1..=trace.completed_iterations() + 1 {
            let set = trace.output_set(i).unwrap();
            for x in &samples {
                assert!(set.contains(x), "{} iteration {i}: {x:?}", s.name());
            }
        }
    }
}

#[test]
fn outputs_are_accurate_once_enough_iterations_ran() {
    let o = make_quadratic_f0(0.3, 2);
    let s = bag_strategy(2.0, 1.0, 2);
    let eps = 0.05;
    let needed = iterations_needed(eps, 4.0, 2.0);
    let trace = run(&o, &s, 0.3, needed + 3, Mode::LevelSet);
    let grid = cube_grid(&[0.0, 0.0], 1.0, 301);
    for i in (needed + 1)..=trace.completed_iterations() {
        let set = trace.output_set(i).unwrap();
        for x in grid.iter().filter(|x| set.contains(x)) {
            assert!((o.value_unmetered(x) - 0.3).abs() <= eps + 1e-9);
        }
    }
}

#[test]
fn accuracy_is_monotone_across_iterations() {
    let o = make_affine(vec![0.6, 0.4], 0.0).unwrap();
    let s = bah_strategy(1.0, 1.0);
    let trace = run(&o, &s, 0.5, 9, Mode::LevelSet);
    let opts = CheckOptions::default()
        .with_grid(128)
        .with_random_points(50);
    for eps in [0.2, 0.05, 0.01] {
        let verdicts = check_trace(&trace, &o, eps, &opts).unwrap();
        let first = verdicts.iter().position(|v| v.passed);
        if let Some(first) = first {
            assert!(verdicts[first..].iter().all(|v| v.passed), "ε={eps}");
        }
        assert!(verdicts.iter().all(|v| v.containment_failures.is_empty()));
    }
}

#[test]
fn sublevel_outputs_contain_the_sublevel_set() {
    let o = make_quadratic_f0(0.3, 2);
    let s = bag_strategy(2.0, 1.0, 2);
    let trace = run(&o, &s, 0.3, 6, Mode::Sublevel);
    let opts = CheckOptions {
        mode: Mode::Sublevel,
        ..CheckOptions::default()
            .with_grid(128)
            .with_random_points(20)
    };
    for v in check_trace(&trace, &o, 0.05, &opts).unwrap() {
        assert!(v.containment_failures.is_empty());
    }
}

#[test]
fn traces_do_not_depend_on_thread_count() {
    let o = make_quadratic_f0(0.3, 2);
    let s = bag_strategy(2.0, 1.0, 2);
    let go = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let trace = run(&o, &s, 0.3, 7, Mode::LevelSet);
                (trace.to_csv(), trace.published_output_set().to_text())
            })
    };
    let one = go(1);
    assert_eq!(one, go(4));
    assert_eq!(one, go(1));
}
