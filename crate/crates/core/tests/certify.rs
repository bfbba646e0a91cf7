use contraction_core::certify::*;
use contraction_core::linalg::{DenseMatrix, NormKind, SurjectiveMap};
use contraction_core::system::{builtin_system, RateFunction, SampleBox, VectorFieldModel};

fn model(name: &str) -> VectorFieldModel<f64> {
    builtin_system(name, None).unwrap().into_model()
}

fn linear(rows: &[[f64; 2]]) -> VectorFieldModel<f64> {
    VectorFieldModel::linear("linear", DenseMatrix::from_rows(rows).unwrap(), SampleBox::cube(2, 5.0)).unwrap()
}

fn row_map(v: [f64; 2]) -> SurjectiveMap<f64> {
    SurjectiveMap::new(DenseMatrix::from_rows(&[v]).unwrap()).unwrap()
}

fn rate(c: f64) -> RateFunction<f64> {
    RateFunction::constant(c).unwrap()
}

fn sampling() -> Sampling<f64> {
    Sampling::new(1000, 42)
}

#[test]
fn integral_contractivity_examples() {
    let cert = check_integral_contractivity(&model("scalar_decay"), &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert_eq!(cert.verdict, Verdict::Certified);
    assert!(cert.worst_margin.abs() <= 1e-12);

    let growth = model("scalar_growth");
    let cert = check_integral_contractivity(&growth, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert_eq!(cert.verdict, Verdict::Falsified);
    let w = cert.witness.as_ref().unwrap();
    let e = w.x[0] - w.y.as_ref().unwrap()[0];
    assert!((cert.worst_margin - 2.0 * e * e).abs() <= 1e-12 * (1.0 + e * e));

    // only the first sample
    let first = check_integral_contractivity(&growth, &rate(1.0), &NormKind::Two, &Sampling::new(1, 42)).unwrap();
    assert_eq!(first.verdict, Verdict::Falsified);

    let cert = check_integral_contractivity(&model("rotation_decay"), &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert_eq!(cert.verdict, Verdict::Certified);
    assert!(cert.worst_margin.abs() <= 1e-12);

    assert!(check_integral_contractivity(&model("scalar_decay"), &rate(1.0), &NormKind::Inf, &sampling()).is_err());
}

#[test]
fn quad_nonsmooth_satisfies_integral_condition() {
    let cert = check_integral_contractivity(&model("quad_nonsmooth"), &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert_eq!(cert.verdict, Verdict::Certified);
    let cert = check_integral_contractivity(&model("quad_nonsmooth"), &rate(1.5), &NormKind::Two, &sampling()).unwrap();
    assert_eq!(cert.verdict, Verdict::Falsified);
}

#[test]
fn operator_measure_examples() {
    let cert = check_operator_measure(&model("scalar_decay"), &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert!(cert.is_certified());
    assert_eq!(cert.worst_margin, 0.0);

    let rot = model("rotation_decay");
    let cert = check_operator_measure(&rot, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert!(cert.is_certified());
    assert!(cert.worst_margin.abs() <= 1e-12);

    let cert = check_operator_measure(&rot, &rate(1.5), &NormKind::Two, &sampling()).unwrap();
    assert_eq!(cert.verdict, Verdict::Falsified);
    assert!((cert.worst_margin - 0.5).abs() <= 1e-12);
    assert!(cert.diagnostics.contains_key("sup_jacobian_op_norm"));
}

#[test]
fn integral_semi_examples() {
    let t = row_map([1.0, -1.0]);
    let neg = linear(&[[-1.0, 0.0], [0.0, -1.0]]);
    let cert = check_integral_semi(&neg, &t, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert!(cert.is_certified());
    assert!(cert.worst_margin.abs() <= 1e-12);

    let a = linear(&[[-1.0, 1.0], [1.0, -1.0]]);
    let cert = check_integral_semi(&a, &t, &rate(2.0), &NormKind::Two, &sampling()).unwrap();
    assert!(cert.is_certified());
    assert!(cert.worst_margin.abs() <= 1e-12);

    let cert = check_integral_semi(&a, &t, &rate(3.0), &NormKind::Two, &sampling()).unwrap();
    assert_eq!(cert.verdict, Verdict::Falsified);
    let w = cert.witness.as_ref().unwrap();
    let y = w.y.as_ref().unwrap();
    let te = (w.x[0] - y[0]) - (w.x[1] - y[1]);
    assert!((cert.worst_margin - te * te).abs() <= 1e-9 * (1.0 + te * te));
}

#[test]
fn integral_partial_examples() {
    let t = row_map([1.0, 0.0]);
    let neg = linear(&[[-1.0, 0.0], [0.0, -1.0]]);
    let cert = check_integral_partial(&neg, &t, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert!(cert.is_certified());
    assert!(cert.worst_margin.abs() <= 1e-12);

    let split = linear(&[[-1.0, 0.0], [0.0, 1.0]]);
    assert!(check_integral_partial(&split, &t, &rate(1.0), &NormKind::Two, &sampling()).unwrap().is_certified());

    let flipped = linear(&[[1.0, 0.0], [0.0, -1.0]]);
    let cert = check_integral_partial(&flipped, &t, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert_eq!(cert.verdict, Verdict::Falsified);
}

#[test]
fn semi_measure_bound_examples() {
    let t = row_map([1.0, -1.0]);
    let a = linear(&[[-1.0, 1.0], [1.0, -1.0]]);
    let cert = check_semi_measure_bound(&a, &t, &rate(2.0), &NormKind::Two, &sampling()).unwrap();
    assert!(cert.is_certified());
    assert_eq!(cert.worst_margin, 0.0);

    let id = SurjectiveMap::identity(1);
    let sd = model("scalar_decay");
    let semi = check_semi_measure_bound(&sd, &id, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    let full = check_operator_measure(&sd, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert!(semi.is_certified());
    assert_eq!(semi.worst_margin, full.worst_margin);

    let zero = linear(&[[0.0, 0.0], [0.0, 0.0]]);
    for map in [t, row_map([1.0, 0.0]), row_map([0.3, 2.0])] {
        let cert = check_semi_measure_bound(&zero, &map, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
        assert_eq!(cert.verdict, Verdict::Falsified);
        assert_eq!(cert.worst_margin, 1.0);
    }
}

#[test]
fn kernel_invariance_examples() {
    let t = row_map([1.0, -1.0]);
    let s = sampling();
    let neg = linear(&[[-1.0, 0.0], [0.0, -1.0]]);
    assert!(check_kernel_invariance(&neg, &t, &s).unwrap().is_certified());
    assert!(check_kernel_invariance(&neg, &row_map([0.2, 0.7]), &s).unwrap().is_certified());

    let a = linear(&[[-1.0, 1.0], [1.0, -1.0]]);
    assert!(check_kernel_invariance(&a, &t, &s).unwrap().is_certified());

    let b = linear(&[[-1.0, 0.0], [1.0, -1.0]]);
    let cert = check_kernel_invariance(&b, &t, &s).unwrap();
    assert_eq!(cert.verdict, Verdict::Falsified);
    assert!(cert.rate.is_none());
}

#[test]
fn tabulated_rates_are_checked_pointwise() {
    let ltv = builtin_system::<f64>("ltv_cosine", None).unwrap().into_model();
    // μ(A(t)) = −2 + cos t ≤ −1 everywhere.
    let ok = check_operator_measure(&ltv, &rate(1.0), &NormKind::Two, &sampling()).unwrap();
    assert!(ok.is_certified());
    let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
    let values: Vec<f64> = times.iter().map(|t| 2.0 - t.cos()).collect();
    let tight = RateFunction::tabulated(times, values).unwrap();
    // Interpolation error of the table is O(dt²/8).
    let cert = check_operator_measure(&ltv, &tight, &NormKind::Two, &sampling()).unwrap();
    assert!(cert.worst_margin <= 2e-3);
}

#[test]
fn certificates_are_deterministic_and_replayable() {
    let rot = model("quad_nonsmooth");
    let r = rate(1.2);
    let check = Check::IntegralContractivity { model: &rot, rate: &r, norm: &NormKind::Two };
    let a = check.run(&sampling()).unwrap();
    let b = check.run(&sampling()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.worst_margin.to_bits(), b.worst_margin.to_bits());
    let replayed = check.replay(a.witness.as_ref().unwrap()).unwrap();
    assert!((replayed - a.worst_margin).abs() <= 1e-12);

    let other = check.run(&Sampling::new(1000, 43)).unwrap();
    assert_ne!(other.witness, a.witness);
}

#[test]
fn dimension_mismatches_are_rejected() {
    let t = SurjectiveMap::new(DenseMatrix::from_rows(&[[1.0, 0.0, 0.0]]).unwrap()).unwrap();
    let rot = model("rotation_decay");
    assert!(check_integral_semi(&rot, &t, &rate(1.0), &NormKind::Two, &sampling()).is_err());
    assert!(check_kernel_invariance(&rot, &t, &sampling()).is_err());
    assert!(check_operator_measure(&rot, &rate(1.0), &NormKind::Two, &Sampling::new(0, 1)).is_err());
}
