use finsler_ricci::metrics::{conformal_sphere, euclidean, randers, randers_constant};
use finsler_ricci::sample::{random_samples, SampleGrid};
use finsler_ricci::verify::corpus::{default_samples, lemma_fields, lemma_metrics, run_invariant_corpus, run_lemma_corpus};
use finsler_ricci::verify::tolerances::{ORACLE, ORACLE_RICCI_TENSOR, TABLE};
use finsler_ricci::verify::{
    finite_difference_oracle, verify_invariants, verify_lemma1, verify_lemma2, verify_lemma3, verify_lie_contraction,
    verify_oracle, OracleQuantity, VerificationReport,
};
use finsler_ricci::{Sample, SymbolicDiffeo};
use nalgebra::DMatrix;

fn shear() -> SymbolicDiffeo {
    SymbolicDiffeo::linear(&DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0])).unwrap()
}

fn polynomial() -> SymbolicDiffeo {
    SymbolicDiffeo::parse(&["x1 + 0.1*x2^2", "x2"], Some(&["x1 - 0.1*x2^2", "x2"])).unwrap()
}

fn samples() -> Vec<Sample> {
    SampleGrid { resolution: 3, directions: 6, ..Default::default() }.samples(2)
}

fn assert_pass(r: &VerificationReport) {
    for c in &r.checks {
        assert!(c.pass, "{} {} / {}: max {:e} > {:e}", r.suite, r.case, c.name, c.max, c.tolerance);
    }
    assert!(r.pass);
}

#[test]
fn lemma1_examples() {
    let r = verify_lemma1(&euclidean(2), &SymbolicDiffeo::rotation(0.4), &samples()).unwrap();
    assert_pass(&r);
    assert!(r.checks.iter().filter(|c| c.name != "strong convexity").all(|c| c.max < 1e-10));

    assert_pass(&verify_lemma1(&euclidean(2), &shear(), &samples()).unwrap());

    let r = verify_lemma1(&randers(0.1), &polynomial(), &samples()).unwrap();
    assert_pass(&r);
    let detail = r.check("strong convexity").unwrap().detail.clone().unwrap();
    assert!(detail.starts_with("min eigenvalue of g"), "{detail}");

    // a structure that is not strongly convex stays that way
    let r = verify_lemma1(&randers_constant(1.5), &SymbolicDiffeo::identity(2), &samples()).unwrap();
    assert!(!r.pass);
    assert!(!r.check("strong convexity").unwrap().pass);
}

#[test]
fn lemma2_examples() {
    let r = verify_lemma2(&randers(0.1), &SymbolicDiffeo::identity(2), &samples()).unwrap();
    assert_pass(&r);
    assert!(r.max() < 1e-14);

    let r = verify_lemma2(&euclidean(2), &SymbolicDiffeo::rotation(1.1), &samples()).unwrap();
    assert_pass(&r);
    assert!(r.max() < 1e-12);

    let r = verify_lemma2(&conformal_sphere(2), &shear(), &samples()).unwrap();
    assert_pass(&r);
    assert!(r.max() < 1e-6);

    // the nonlinear map exercises the Cartan correction
    assert_pass(&verify_lemma2(&randers(0.1), &polynomial(), &samples()).unwrap());
}

#[test]
fn lemma3_examples() {
    let r = verify_lemma3(&euclidean(2), 2.0, &SymbolicDiffeo::identity(2), &samples()).unwrap();
    assert_pass(&r);
    assert!(r.max() < 1e-12);

    let r = verify_lemma3(&conformal_sphere(2), 3.0, &SymbolicDiffeo::rotation(0.7), &samples()).unwrap();
    assert_pass(&r);
    assert!(r.check("ricci scaling").unwrap().max < 1e-8);
    assert!(r.check("ricci pullback").unwrap().max < 1e-6);
}

#[test]
fn lemma_corpus_passes() {
    let reports = run_lemma_corpus(&default_samples()).unwrap();
    // 3 metrics × 5 diffeos × (two pullback suites, 3 scale factors)
    assert_eq!(reports.len(), 3 * 5 * 5);
    reports.iter().for_each(assert_pass);
}

#[test]
fn invariant_corpus_passes() {
    let reports = run_invariant_corpus(&default_samples()).unwrap();
    assert_eq!(reports.len(), 12);
    reports.iter().for_each(assert_pass);
    for f in lemma_metrics() {
        for v in lemma_fields() {
            assert!(verify_lie_contraction(&f, &v, &default_samples()).unwrap().pass);
        }
    }
    let r = verify_invariants(&conformal_sphere(3), &SampleGrid { resolution: 2, directions: 6, ..Default::default() }.samples(3))
        .unwrap();
    assert_pass(&r);
}

#[test]
fn oracle_examples() {
    let s = Sample::new(vec![0.3, -0.7], vec![0.6, 0.8]);
    let g = finite_difference_oracle(&euclidean(2), &s, &OracleQuantity::Metric).unwrap();
    for (k, v) in g.iter().enumerate() {
        let expect = if k == 0 || k == 3 { 1.0 } else { 0.0 };
        assert!((v - expect).abs() < 1e-10);
    }
    for s in random_samples(2, 10, 40, -1.0, 1.0) {
        let ric = finite_difference_oracle(&conformal_sphere(2), &s, &OracleQuantity::Ricci).unwrap();
        assert!((ric[0] - 1.0).abs() < 1e-4);
    }
    let f = randers(0.1);
    for s in random_samples(2, 10, 41, -1.0, 1.0) {
        let fd = finite_difference_oracle(&f, &s, &OracleQuantity::RicciTensor).unwrap();
        let sym = f.akbar_zadeh_ricci(&s).unwrap();
        let scale = sym.amax();
        let err = fd.iter().zip(sym.as_slice()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
        assert!(err < 1e-3);
    }
}

#[test]
fn oracle_suite_agrees() {
    let samples = random_samples(2, 12, 42, -1.0, 1.0);
    for f in lemma_metrics() {
        let r = verify_oracle(&f, &lemma_fields(), &samples).unwrap();
        assert_pass(&r);
        assert_eq!(r.check("oracle Ric_jk").unwrap().tolerance, ORACLE_RICCI_TENSOR.value);
        assert_eq!(r.check("oracle R").unwrap().tolerance, ORACLE.value);
    }
}

#[test]
fn suites_are_deterministic() {
    let a = verify_lemma2(&randers(0.1), &polynomial(), &samples()).unwrap();
    let b = verify_lemma2(&randers(0.1), &polynomial(), &samples()).unwrap();
    assert_eq!(a, b);
    assert_eq!(default_samples(), default_samples());
    assert_eq!(random_samples(2, 5, 7, -1.0, 1.0), random_samples(2, 5, 7, -1.0, 1.0));
}

#[test]
fn tolerance_table_is_declared_once() {
    let names: Vec<&str> = TABLE.iter().map(|t| t.name).collect();
    for want in ["oracle", "oracle-ricci-tensor", "pullback", "scaling", "flow"] {
        assert!(names.contains(&want));
    }
}
