use super::*;
use crate::functions::ConvexFunction;
use crate::linalg::DenseMatrix;
use crate::problems::instances::{make_instance, InstanceSpec};
use crate::problems::{AdmmConstrained, BilinearQuadratic, PdhgComposite};
use crate::solvers::{run, run_inexact, Algorithm, ErrorSchedule, EtaChoice, RunOptions};

fn p_i2() -> SymmetricOperator {
    SymmetricOperator::scaled_identity(2, 1.0)
}

#[test]
fn ergodic_bound_examples() {
    assert_eq!(ergodic_bound(&p_i2(), &[1.0, 2.0], &[1.0, 2.0], 4).unwrap(), 0.0);
    assert_eq!(ergodic_bound(&p_i2(), &[3.0, 4.0], &[0.0, 0.0], 5).unwrap(), 2.5);
    let p = SymmetricOperator::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    assert!((ergodic_bound(&p, &[1.0, 1.0], &[0.0, 0.0], 3).unwrap() - 1.0).abs() < 1e-15);
    assert!(ergodic_bound(&p, &[1.0], &[0.0, 0.0], 3).is_err());
    assert!(ergodic_bound(&p, &[1.0, 1.0], &[0.0, 0.0], 0).is_err());
}

#[test]
fn inexact_bound_examples() {
    let (zr, z0) = ([3.0, 4.0], [0.0, 0.0]);
    let base = ergodic_bound(&p_i2(), &zr, &z0, 2).unwrap();
    assert_eq!(inexact_bound(&p_i2(), &zr, &z0, 2, 5.0, &[0.0, 0.0]).unwrap(), base);
    let eps = [1.0, 0.25];
    assert!((inexact_bound(&p_i2(), &zr, &z0, 2, 2.0, &eps).unwrap() - (base + 1.25)).abs() < 1e-15);
    assert_eq!(inexact_bound(&p_i2(), &zr, &z0, 2, 0.0, &eps).unwrap(), base);
    assert!(inexact_bound(&p_i2(), &zr, &z0, 3, 1.0, &eps).is_err());
}

fn toy() -> (SaddleProblem, PrimalDualPoint) {
    make_instance(&InstanceSpec::ToyBilinear).unwrap()
}

#[test]
fn ppm_toy_certifies() {
    let (p, z0) = toy();
    let t = run(Algorithm::Ppm, &p, &z0, EtaChoice::Explicit(1.0), 1000, &RunOptions::default()).unwrap();
    let zr = PrimalDualPoint::zeros(p.layout());
    let r = certify_run(&t, &p, &t.metric, &zr, None).unwrap();
    assert!(r.summary.all_pass);
    assert_eq!(r.records.len(), 1000);
    assert!(r.summary.per_iterate.as_ref().unwrap().all_pass);
    let bounds: Vec<f64> = r.records.iter().map(|x| x.bound_value).collect();
    assert!(bounds.windows(2).all(|w| w[1] <= w[0]));
    for rec in &r.records {
        assert_eq!(rec.pass, rec.gap_value <= rec.bound_value + REPORT_TOL);
    }
}

#[test]
fn zero_bound_is_flagged() {
    let (p, z0) = toy();
    let t = run(Algorithm::Ppm, &p, &z0, EtaChoice::Explicit(1.0), 20, &RunOptions::default()).unwrap();
    let r = certify_run(&t, &p, &t.metric, &z0, None).unwrap();
    assert!(r.summary.zero_bound);
    assert!(r.records.iter().all(|x| x.bound_value == 0.0));
}

#[test]
fn violated_bound_is_reported() {
    let (p, z0) = toy();
    let t = run(Algorithm::Ppm, &p, &z0, EtaChoice::Explicit(1.0), 50, &RunOptions::default()).unwrap();
    // a metric far too small for the step makes the bound fail
    let tiny = SymmetricOperator::scaled_identity(2, 1e-6);
    let zr = PrimalDualPoint::new(p.layout(), vec![0.0, 3.0]).unwrap();
    let r = certify_run(&t, &p, &tiny, &zr, None).unwrap();
    assert!(!r.summary.all_pass);
    assert_eq!(r.summary.first_violation_k, r.records.iter().find(|x| !x.pass).map(|x| x.k));
}

#[test]
fn inexact_toy_certifies() {
    let (p, z0) = toy();
    let sched = ErrorSchedule::new(0.1, 2.0, 3).unwrap();
    let t = run_inexact(Algorithm::Pdhg, &p, &z0, EtaChoice::Explicit(0.9), 1000, &sched, &RunOptions::default()).unwrap();
    let zr = PrimalDualPoint::zeros(p.layout());
    let d = 2.0 * t.max_distance(&zr);
    let r = certify_run(&t, &p, &t.metric, &zr, Some(d)).unwrap();
    assert!(r.summary.all_pass, "{:?}", r.summary);
    assert!(r.summary.inexact);
    assert_eq!(r.summary.diameter, Some(d));
}

#[test]
fn infinite_reference_is_skipped_and_undefined_is_an_error() {
    let (p, z0) = make_instance(&InstanceSpec::Lasso { m: 5, n: 4, seed: 2 }).unwrap();
    let t = run(Algorithm::Pdhg, &p, &z0, EtaChoice::AUTO, 20, &RunOptions::default()).unwrap();
    // λ far outside the box: g*(λ) = +∞
    let mut zr = PrimalDualPoint::zeros(p.layout());
    zr.block_mut(Block::Lambda).fill(1e6);
    let r = certify_run(&t, &p, &t.metric, &zr, None).unwrap();
    assert!(r.summary.skipped);
    assert!(r.records.iter().all(|x| x.status == RecordStatus::SkippedInfiniteValue));

    // f = box, g* = box: both infinite gives +∞ − ∞
    let box2 = ConvexFunction::indicator_box(vec![-1.0], vec![1.0]).unwrap();
    let q = SaddleProblem::PdhgComposite(PdhgComposite::new(box2.clone(), box2, DenseMatrix::identity(1)).unwrap());
    let zq = PrimalDualPoint::new(q.layout(), vec![0.5, 0.5]).unwrap();
    let tq = run(Algorithm::Pdhg, &q, &zq, EtaChoice::AUTO, 5, &RunOptions::default()).unwrap();
    let bad = PrimalDualPoint::new(q.layout(), vec![5.0, 5.0]).unwrap();
    match certify_run(&tq, &q, &tq.metric, &bad, None) {
        Err(Error::UndefinedLagrangian(msg)) => assert!(msg.contains("x") && msg.contains("lambda"), "{msg}"),
        other => panic!("expected undefined Lagrangian, got {other:?}"),
    }
}

#[test]
fn report_serializes_to_json() {
    let (p, z0) = toy();
    let t = run(Algorithm::Ppm, &p, &z0, EtaChoice::Explicit(1.0), 3, &RunOptions::default()).unwrap();
    let r = certify_run(&t, &p, &t.metric, &PrimalDualPoint::zeros(p.layout()), None).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 3);
    assert_eq!(v["summary"]["all_pass"], serde_json::Value::Bool(true));
}

#[test]
fn oracle_examples() {
    let (p, _) = toy();
    let c = saddle_oracle(&p).unwrap();
    assert_eq!(c.method, OracleMethod::KktSolve);
    assert!(c.zstar.as_slice().iter().all(|v| v.abs() < 1e-15));

    // ½x² + λx − ½λ²
    let q = SaddleProblem::BilinearQuadratic(
        BilinearQuadratic::new(
            SymmetricOperator::scaled_identity(1, 1.0),
            SymmetricOperator::scaled_identity(1, 1.0),
            DenseMatrix::identity(1),
            vec![0.0],
            vec![0.0],
        )
        .unwrap(),
    );
    let c = saddle_oracle(&q).unwrap();
    assert!(c.certified && c.zstar.as_slice().iter().all(|v| v.abs() < 1e-15));
}

fn admm_1d() -> SaddleProblem {
    let h = ConvexFunction::quadratic(SymmetricOperator::scaled_identity(1, 1.0), vec![0.0]).unwrap();
    SaddleProblem::AdmmConstrained(
        AdmmConstrained::new(h.clone(), h, DenseMatrix::identity(1), DenseMatrix::identity(1), vec![1.0]).unwrap(),
    )
}

#[test]
fn admm_1d_oracle_agrees_with_grid() {
    let p = admm_1d();
    let kkt = saddle_oracle(&p).unwrap();
    assert!(kkt.certified);
    for v in kkt.zstar.as_slice() {
        assert!((v - 0.5).abs() < 1e-14);
    }
    assert!((kkt.fstar.unwrap() - 0.25).abs() < 1e-14);
    let grid = grid_bruteforce(&p, 10.0).unwrap();
    assert_eq!(grid.method, OracleMethod::GridBruteforce);
    assert!(grid.certified, "{grid:?}");
    for (a, b) in grid.zstar.as_slice().iter().zip(kkt.zstar.as_slice()) {
        assert!((a - b).abs() < 1e-6, "{grid:?}");
    }
}

#[test]
fn grid_handles_box_domains() {
    // ½(x−1)² + 0.5|x| in composite form: f = ½(x−1)², g* = box[−0.5, 0.5]
    let f = ConvexFunction::quadratic(SymmetricOperator::scaled_identity(1, 1.0), vec![-1.0]).unwrap();
    let gs = ConvexFunction::indicator_box(vec![-0.5], vec![0.5]).unwrap();
    let p = SaddleProblem::PdhgComposite(PdhgComposite::new(f, gs, DenseMatrix::identity(1)).unwrap());
    let run_c = high_accuracy_run(&p, 100_000, 1e-13).unwrap();
    let grid = grid_bruteforce(&p, 10.0).unwrap();
    assert!(run_c.certified && grid.certified);
    // x* = prox of 0.5|x| at 1 = 0.5, λ* = x* − 1
    assert!((run_c.zstar.as_slice()[0] - 0.5).abs() < 1e-10);
    assert!((grid.zstar.as_slice()[0] - 0.5).abs() < 1e-6);
    assert!((grid.zstar.as_slice()[1] + 0.5).abs() < 1e-6);
    assert!(grid_bruteforce(&make_instance(&InstanceSpec::QuadraticSaddle { n: 3, m: 2, seed: 1 }).unwrap().0, 10.0).is_err());
}

#[test]
fn lasso_oracle_is_certified() {
    let (p, _) = make_instance(&InstanceSpec::Lasso { m: 10, n: 20, seed: 1 }).unwrap();
    let c = saddle_oracle(&p).unwrap();
    assert_eq!(c.method, OracleMethod::HighAccuracyRun);
    assert!(c.certified, "residual {:e} after {} iterations", c.residual, c.iterations);
    assert!(c.fstar.unwrap().is_finite());
}

#[test]
fn assumption_check_examples() {
    let h = ConvexFunction::quadratic(SymmetricOperator::scaled_identity(2, 1.0), vec![0.0; 2]).unwrap();
    let a = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
    let p = SaddleProblem::PdhgComposite(PdhgComposite::new(h.clone(), h, a).unwrap());
    let z0 = PrimalDualPoint::new(p.layout(), vec![1.0, -1.0, 0.5, 2.0]).unwrap();
    let t = run(Algorithm::LinearizedPdhg, &p, &z0, EtaChoice::AUTO, 300, &RunOptions::default()).unwrap();
    let zstar = saddle_oracle(&p).unwrap().zstar;
    let refs = sample_references(&p, &zstar, 5, 1);
    let e = t.error_matrix.clone().unwrap();
    let r = check_assumption_gap(&t, &p, &t.metric, &e, &refs).unwrap();
    assert!(r.pass, "{r:?}");

    // η = 2/L breaks P ⪰ E
    let t2 = run(Algorithm::LinearizedPdhg, &p, &z0, EtaChoice::Explicit(2.0), 3, &RunOptions::default()).unwrap();
    let r2 = check_assumption_gap(&t2, &p, &t2.metric, &e, &refs).unwrap();
    assert!(!r2.psd_pass && r2.min_eigenvalue < 0.0);

    // exact methods satisfy (i) with E = 0
    let (lasso, lz0) = make_instance(&InstanceSpec::Lasso { m: 6, n: 8, seed: 4 }).unwrap();
    let t3 = run(Algorithm::Pdhg, &lasso, &lz0, EtaChoice::AUTO, 200, &RunOptions::default()).unwrap();
    let ls = saddle_oracle(&lasso).unwrap().zstar;
    let refs = sample_references(&lasso, &ls, 5, 2);
    let zero = SymmetricOperator::zeros(t3.metric.dim());
    assert!(check_assumption_gap(&t3, &lasso, &t3.metric, &zero, &refs).unwrap().pass);
}

#[test]
fn rate_slope_examples() {
    let records: Vec<KRecord> = (1..=50)
        .map(|k| {
            let b = 3.0 / (2.0 * k as f64);
            KRecord { k, gap_value: 0.0, bound_value: b, margin: b, pass: true, status: RecordStatus::Checked }
        })
        .collect();
    let mut rep = CertificateReport {
        label: "synthetic".into(),
        report_tol: REPORT_TOL,
        summary: ReportSummary {
            all_pass: true,
            worst_margin: 0.0,
            first_violation_k: None,
            zero_bound: false,
            skipped: false,
            inexact: false,
            diameter: None,
            max_ref_distance: 0.0,
            per_iterate: None,
        },
        records,
    };
    let fit = rate_slope(&rep).unwrap();
    assert!((fit.bound_slope.unwrap() + 1.0).abs() < 1e-12);
    assert!(fit.converged && fit.gap_slope.is_none());

    for r in rep.records.iter_mut() {
        r.gap_value = 0.1 / r.k as f64;
    }
    let fit = rate_slope(&rep).unwrap();
    assert!((fit.gap_slope.unwrap() + 1.0).abs() < 1e-12);
    rep.records.truncate(5);
    assert!(rate_slope(&rep).is_err());
}

#[test]
fn references_stay_in_domain_and_near_saddle() {
    let (p, _) = make_instance(&InstanceSpec::Lasso { m: 10, n: 20, seed: 1 }).unwrap();
    let zs = saddle_oracle(&p).unwrap().zstar;
    let refs = sample_references(&p, &zs, 5, 9);
    assert_eq!(refs.len(), 6);
    assert_eq!(refs[0], zs);
    for r in &refs {
        assert!(p.is_finite_at(r));
        assert!(crate::linalg::norm2(&sub(r.as_slice(), zs.as_slice())) <= 1.0 + 1e-12);
    }
    assert_eq!(refs, sample_references(&p, &zs, 5, 9));
}

#[test]
fn admm_primal_bound_holds() {
    let p = admm_1d();
    let cert = saddle_oracle(&p).unwrap();
    let z0 = PrimalDualPoint::zeros(p.layout());
    let t = run(Algorithm::Admm, &p, &z0, EtaChoice::Explicit(1.0), 500, &RunOptions::default()).unwrap();
    let SaddleProblem::AdmmConstrained(a) = &p else { unreachable!() };
    for lam in [0.0, 0.5, 1.0] {
        let recs = admm_primal_bound(&t, a, &cert.zstar, cert.fstar.unwrap(), &[lam]).unwrap();
        assert!(recs.iter().all(|r| r.pass), "λ = {lam}");
    }
}
