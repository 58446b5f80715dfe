use std::f64::consts::PI;
use std::sync::{Arc, LazyLock};

use finsler_ricci::flow::{default_horizon, time_grid, FlowData, TauSpec, DEFAULT_DT, EINSTEIN_SPREAD_TOL};
use finsler_ricci::metrics::{conformal_sphere, euclidean, randers};
use finsler_ricci::sample::{random_samples, SampleGrid};
use finsler_ricci::soliton::residual_report;
use finsler_ricci::{
    construct_flow, extract_soliton, integrate_conformal_flow, Error, Expr, FlowFamily, Sample, SolitonTriple,
    VectorField,
};
use proptest::prelude::*;

fn gaussian(lambda: f64) -> SolitonTriple {
    SolitonTriple::new(euclidean(2), VectorField::radial(2, lambda), lambda).unwrap()
}

fn sphere(field: VectorField) -> SolitonTriple {
    SolitonTriple::new(conformal_sphere(2), field, 1.0).unwrap()
}

static GAUSSIAN_FAMILY: LazyLock<FlowFamily> = LazyLock::new(|| construct_flow(&gaussian(0.5)));

#[test]
fn static_family() {
    let st = SolitonTriple::new(euclidean(2), VectorField::zero(2), 0.0).unwrap();
    let fam = construct_flow(&st);
    assert_eq!(fam.critical_time(), None);
    for sm in random_samples(2, 10, 30, -1.0, 1.0) {
        let f0 = st.f0.f2_at(&sm).unwrap();
        for t in [0.0, 0.3, 1.0, 5.0] {
            assert_eq!(fam.evaluate(&sm, t).unwrap(), f0);
            let r = fam.flow_residual(&sm, t, DEFAULT_DT).unwrap();
            assert_eq!(r.max_abs(), 0.0);
        }
    }
}

#[test]
fn gaussian_family_is_stationary() {
    let fam = &*GAUSSIAN_FAMILY;
    assert!(fam.closed_form().is_some());
    let samples = random_samples(2, 50, 31, -1.0, 1.0);
    for t in time_grid(default_horizon(0.5), 10) {
        for sm in &samples {
            let f0 = euclidean(2).f2_at(sm).unwrap();
            assert!((fam.evaluate(sm, t).unwrap() - f0).abs() <= 1e-6 * f0, "t = {t}");
            let closed = fam.evaluate_closed_form(sm, t).unwrap().unwrap();
            assert!((closed - f0).abs() <= 1e-12 * f0);
        }
    }
}

#[test]
fn sphere_family_scales_down() {
    let fam = construct_flow(&sphere(VectorField::zero(2)));
    for sm in random_samples(2, 10, 32, -1.0, 1.0) {
        let f0 = fam.triple().f0.f2_at(&sm).unwrap();
        assert_eq!(fam.evaluate(&sm, 0.0).unwrap(), f0);
        assert!((fam.evaluate(&sm, 0.25).unwrap() - 0.5 * f0).abs() <= 1e-15 * f0);
    }
}

#[test]
fn domain_is_bounded_by_tau() {
    let sm = Sample::new(vec![0.1, 0.2], vec![1.0, 0.0]);
    for t in [1.0, 1.5] {
        match GAUSSIAN_FAMILY.evaluate(&sm, t) {
            Err(Error::DomainExceeded { t: at, critical_time }) => {
                assert_eq!(at, t);
                assert_eq!(critical_time, 1.0);
            }
            other => panic!("{other:?}"),
        }
    }
    // the central difference must also stay inside
    assert!(matches!(GAUSSIAN_FAMILY.flow_residual(&sm, 1.0 - 0.5e-4, 1e-4), Err(Error::DomainExceeded { .. })));
    let fam = construct_flow(&sphere(VectorField::zero(2)));
    assert_eq!(fam.critical_time(), Some(0.5));
    assert!(matches!(fam.evaluate(&sm, 0.5), Err(Error::DomainExceeded { critical_time, .. }) if critical_time == 0.5));
}

#[test]
fn sphere_flow_residuals() {
    let fam = construct_flow(&sphere(VectorField::zero(2)));
    let samples = random_samples(2, 20, 33, -1.0, 1.0);
    let report = fam.flow_residual_grid(&samples, &[0.0, 0.1, 0.2], DEFAULT_DT).unwrap();
    assert_eq!(report.rows.len(), 60);
    assert!(report.max() < 1e-5);
    for r in &report.rows {
        // Ric_{F(t)} = 1/(1 - 2t)
        assert!((r.ric_lemma - 1.0 / (1.0 - 2.0 * r.t)).abs() < 1e-12);
    }
}

#[test]
fn gaussian_paths_agree() {
    let samples = random_samples(2, 10, 34, -1.0, 1.0);
    for (k, sm) in samples.iter().enumerate() {
        let t = 0.08 * k as f64;
        let r = GAUSSIAN_FAMILY.flow_residual(sm, t, DEFAULT_DT).unwrap();
        let gap = r.path_gap().expect("closed form available");
        assert!(gap <= 1e-6 * r.ric_lemma.abs().max(1.0));
        assert!(r.max_abs() < 1e-4);
    }
}

#[test]
fn rotating_sphere_family() {
    let st = sphere(VectorField::rotation());
    let samples = random_samples(2, 10, 35, -1.0, 1.0);
    let times = time_grid(0.4, 5);
    let with_closed = construct_flow(&st).flow_residual_grid(&samples, &times, DEFAULT_DT).unwrap();
    assert!(with_closed.max() < 1e-4);
    assert!(with_closed.max_path_gap.unwrap() < 1e-6);
    let numeric = construct_flow(&st).without_closed_form().flow_residual_grid(&samples, &times, DEFAULT_DT).unwrap();
    assert!(numeric.max_closed.is_none());
    assert!(numeric.max() < 1e-4);
}

#[test]
fn conformal_flow() {
    let samples = SampleGrid::default().samples(2);
    let flat = integrate_conformal_flow(&euclidean(2), &samples, 1e-3, 1.0, EINSTEIN_SPREAD_TOL).unwrap();
    assert!(flat.c.iter().all(|&c| c == 1.0));

    let traj = integrate_conformal_flow(&conformal_sphere(2), &samples, 1e-4, 0.4, EINSTEIN_SPREAD_TOL).unwrap();
    assert_eq!(traj.times.len(), 4001);
    let err = traj.times.iter().zip(&traj.c).fold(0.0f64, |m, (t, c)| m.max((c - (1.0 - 2.0 * t)).abs()));
    assert!(err < 1e-6);
    assert!((traj.ric0 - 1.0).abs() < 1e-12);

    match integrate_conformal_flow(&randers(0.1), &samples, 1e-4, 0.4, EINSTEIN_SPREAD_TOL) {
        Err(Error::NotEinstein { time, spread, .. }) => {
            assert_eq!(time, 0.0);
            assert!(spread > EINSTEIN_SPREAD_TOL);
        }
        other => panic!("{other:?}"),
    }

    // past τ = 0 the factor goes non-positive
    assert!(matches!(
        integrate_conformal_flow(&conformal_sphere(2), &samples, 1e-3, 0.6, EINSTEIN_SPREAD_TOL),
        Err(Error::StepUnderflow { .. }) | Err(Error::NotEinstein { .. })
    ));
}

#[test]
fn round_trip_recovers_the_soliton() {
    let samples = random_samples(2, 20, 36, -1.0, 1.0);
    let corpus = [
        gaussian(0.5),
        gaussian(-0.25),
        sphere(VectorField::zero(2)),
        sphere(VectorField::rotation()),
        SolitonTriple::new(euclidean(2), VectorField::zero(2), 0.0).unwrap(),
    ];
    for st in corpus {
        let out = extract_soliton(&construct_flow(&st).as_flow_data(), &samples).unwrap();
        assert!((out.triple.lambda - st.lambda).abs() <= 1e-9);
        assert_eq!(out.triple.field, st.field);
        let original = residual_report(&st, &samples).unwrap();
        assert!(out.report.max < 1e-8);
        for (a, b) in out.report.rows.iter().zip(&original.rows) {
            assert!((a.scalar.relative - b.scalar.relative).abs() <= 1e-8);
        }
    }
}

#[test]
fn sampled_tau_is_differentiated_numerically() {
    let samples = random_samples(2, 10, 37, -1.0, 1.0);
    let data = FlowData {
        f0: conformal_sphere(2),
        tau: TauSpec::Sampled(Arc::new(|t| 1.0 - 2.0 * t)),
        field_t: vec![Expr::constant(0.0), Expr::constant(0.0)],
    };
    let out = extract_soliton(&data, &samples).unwrap();
    assert!((out.triple.lambda - 1.0).abs() < 1e-9);
    assert!(out.report.max < 1e-6);

    let bad = FlowData { tau: TauSpec::Sampled(Arc::new(|t| 2.0 - t)), ..data };
    assert!(matches!(extract_soliton(&bad, &samples), Err(Error::Invalid(_))));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn gaussian_flow_equation_holds(
        x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, th in 0.0..2.0 * PI, t in 0.0f64..0.9,
    ) {
        let sm = Sample::new(vec![x1, x2], vec![th.cos(), th.sin()]);
        let r = GAUSSIAN_FAMILY.flow_residual(&sm, t, DEFAULT_DT).unwrap();
        prop_assert!(r.max_abs() < 1e-4);
    }
}
