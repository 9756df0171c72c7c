use proptest::prelude::*;
use roadprof::geometry::*;
use roadprof::probgen::{make_batch, BatchParams};
use roadprof::runner::{run_batch, RunOptions};
use roadprof::{AlgorithmId, Exec, Family, RunRecord};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn pair_projection_is_nonexpansive(
        a in -10.0..10.0f64, b in -10.0..10.0f64,
        c in -10.0..10.0f64, d in -10.0..10.0f64,
        alpha in 0.0..3.0f64,
    ) {
        let p = project_slope_pair(a, b, alpha);
        let q = project_slope_pair(c, d, alpha);
        prop_assert!(dist(&[p.0, p.1], &[q.0, q.1]) <= dist(&[a, b], &[c, d]) + 1e-12);
    }

    #[test]
    fn intrepid_pair_lands_in_stripe(a in -10.0..10.0f64, b in -10.0..10.0f64, alpha in 0.01..3.0f64) {
        let (x, y) = intrepid_slope_pair(a, b, alpha);
        prop_assert!((y - x).abs() <= alpha + 1e-12);
        prop_assert!(((x + y) - (a + b)).abs() < 1e-12);
    }

    #[test]
    fn nonconvex_projections_land_in_branches(
        a in -10.0..10.0f64, b in -10.0..10.0f64,
        alpha in 0.2..3.0f64, frac in 0.0..1.0f64,
    ) {
        let beta = alpha * frac;
        for (x, y) in [
            project_slope_pair_nonconvex(a, b, alpha, beta),
            intrepid_slope_pair_nonconvex(a, b, alpha, beta),
        ] {
            let d = (y - x).abs();
            prop_assert!(d >= beta - 1e-12 && d <= alpha + 1e-12);
        }
    }

    #[test]
    fn curvature_operators_are_feasible(
        x in prop::collection::vec(-5.0..5.0f64, 5),
        gaps in prop::collection::vec(0.3..3.0f64, 4),
        width in 0.1..2.0f64,
        shift in -1.0..1.0f64,
    ) {
        let mut t = vec![0.0];
        for g in &gaps {
            t.push(t.last().unwrap() + g);
        }
        let t = Breakpoints::new(t).unwrap();
        let n = t.len();
        let cb = CurvatureBounds::new(vec![shift + width; n - 2], vec![shift; n - 2]).unwrap();
        for block in 1..=3u8 {
            let set = ConstraintSet::curvature(block, cb.clone(), &t).unwrap();
            for p in [set.project(&x).unwrap(), set.intrepid(&x).unwrap()] {
                prop_assert!(residual(&p, &set).unwrap() < 1e-9);
            }
            let p = set.project(&x).unwrap();
            prop_assert!(close(&set.project(&p).unwrap(), &p, 1e-10));
        }
    }
}

#[test]
fn cyclic_projections_are_fejer_monotone() {
    let problems = make_batch(20, &BatchParams::default(), 11, Exec::Sequential).unwrap();
    let mut checked = 0;
    for p in problems.iter().filter(|p| p.meta.certified_feasible == Some(true)) {
        let n = p.n();
        let (a, b) = (p.v[0], p.v[n - 1]);
        let line: Vec<f64> =
            p.t.as_slice()
                .iter()
                .map(|t| a + (b - a) * (t - p.t.as_slice()[0]) / p.t.span())
                .collect();
        for s in &p.sets {
            assert!(
                residual(&line, s).unwrap() < 1e-9,
                "{} not feasible for {:?}",
                p.id,
                s.tag()
            );
        }
        let mut x = p.v.clone();
        let mut last = dist(&x, &line);
        for _ in 0..50 {
            for s in &p.sets {
                x = s.project(&x).unwrap();
                let now = dist(&x, &line);
                assert!(now <= last + 1e-9, "{}: {now} > {last}", p.id);
                last = now;
            }
        }
        checked += 1;
    }
    assert!(checked > 10);
}

fn strip_timing(mut r: Vec<RunRecord>) -> Vec<RunRecord> {
    r.iter_mut().for_each(|r| r.wall_seconds = 0.0);
    r
}

#[test]
fn generation_and_runs_do_not_depend_on_parallelism() {
    let params = BatchParams::nonconvex();
    let seq = make_batch(8, &params, 3, Exec::Sequential).unwrap();
    let par = make_batch(8, &params, 3, Exec::Parallel).unwrap();
    for (a, b) in seq.iter().zip(&par) {
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
    let algs = AlgorithmId::of_family(Family::BestApprox);
    let opts = RunOptions::default();
    let r1 = strip_timing(run_batch(&algs, &seq, &opts, Exec::Sequential));
    let r2 = strip_timing(run_batch(&algs, &seq, &opts, Exec::Parallel));
    assert_eq!(r1, r2);
}

#[test]
fn batches_are_reproducible_from_the_master_seed() {
    let params = BatchParams::default();
    let a = make_batch(5, &params, 42, Exec::Sequential).unwrap();
    let b = make_batch(5, &params, 42, Exec::Sequential).unwrap();
    let c = make_batch(5, &params, 43, Exec::Sequential).unwrap();
    assert!(a
        .iter()
        .zip(&b)
        .all(|(x, y)| x.to_json().unwrap() == y.to_json().unwrap()));
    assert!(a.iter().zip(&c).any(|(x, y)| x.v != y.v));
}

#[test]
fn every_algorithm_reports_a_well_formed_trace() {
    let problems = make_batch(3, &BatchParams::default(), 5, Exec::Sequential).unwrap();
    let records = run_batch(&AlgorithmId::ALL, &problems, &RunOptions::default(), Exec::Parallel);
    assert_eq!(records.len(), AlgorithmId::ALL.len() * 3);
    for r in &records {
        assert_eq!(r.d_trace.len(), r.iterations + 1, "{} on {}", r.algorithm, r.problem);
        assert!(r.d_trace.iter().all(|d| d.is_finite() && *d >= 0.0));
        if r.converged {
            assert!(*r.d_trace.last().unwrap() < 5e-3);
        }
    }
}
