use contraction_core::certify::{check_integral_contractivity, check_operator_measure, Check, Sampling};
use contraction_core::integrate::{verify_pairwise_decay, Window};
use contraction_core::linalg::{
    inner_product_bound_check, matrix_measure, matrix_measure_limit, operator_norm, seminorm, DenseMatrix, NormKind,
    SurjectiveMap,
};
use contraction_core::rdpde::{project_meanfree, rd_seminorm, Field, Grid1D};
use contraction_core::system::{RateFunction, SampleBox, VectorFieldModel};
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = DenseMatrix<f64>> {
    prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |v| DenseMatrix::new(n, n, v).unwrap())
}

fn pair() -> impl Strategy<Value = (DenseMatrix<f64>, DenseMatrix<f64>)> {
    (1usize..6).prop_flat_map(|n| (matrix(n), matrix(n)))
}

fn spd(n: usize) -> impl Strategy<Value = DenseMatrix<f64>> {
    matrix(n).prop_map(move |b| b.transpose().try_mul(&b).unwrap().try_add(&DenseMatrix::identity(n)).unwrap())
}

fn norms(n: usize) -> impl Strategy<Value = NormKind<f64>> {
    prop_oneof![
        Just(NormKind::One),
        Just(NormKind::Two),
        Just(NormKind::Inf),
        spd(n).prop_map(|p| NormKind::weighted_two(p).unwrap()),
    ]
}

fn matrix_with_norm() -> impl Strategy<Value = (DenseMatrix<f64>, NormKind<f64>)> {
    (1usize..6).prop_flat_map(|n| (matrix(n), norms(n)))
}

/// A full-rank `m×n` map (m < n) with its domain dimension.
fn surjective() -> impl Strategy<Value = SurjectiveMap<f64>> {
    (2usize..6)
        .prop_flat_map(|n| (1..n).prop_map(move |m| (m, n)))
        .prop_flat_map(|(m, n)| prop::collection::vec(-2.0..2.0f64, m * n).prop_map(move |v| (m, n, v)))
        .prop_filter_map("rank deficient", |(m, n, v)| SurjectiveMap::new(DenseMatrix::new(m, n, v).unwrap()).ok())
}

fn tol(a: &DenseMatrix<f64>) -> f64 {
    1e-9 * (1.0 + a.max_abs() * a.rows() as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn measure_is_subadditive((a, b) in pair()) {
        for norm in [NormKind::One, NormKind::Two, NormKind::Inf] {
            let sum = matrix_measure(&a.try_add(&b).unwrap(), &norm).unwrap();
            let split = matrix_measure(&a, &norm).unwrap() + matrix_measure(&b, &norm).unwrap();
            prop_assert!(sum <= split + tol(&a) + tol(&b));
        }
    }

    #[test]
    fn measure_is_positively_homogeneous((a, norm) in matrix_with_norm(), alpha in 0.0..10.0f64) {
        let scaled = matrix_measure(&a.scale(alpha), &norm).unwrap();
        let expect = alpha * matrix_measure(&a, &norm).unwrap();
        prop_assert!((scaled - expect).abs() <= (1.0 + alpha) * tol(&a));
    }

    #[test]
    fn norm_sandwich((a, norm) in matrix_with_norm()) {
        let op = operator_norm(&a, &norm).unwrap();
        let mu = matrix_measure(&a, &norm).unwrap();
        let mu_neg = matrix_measure(&a.scale(-1.0), &norm).unwrap();
        let eps = tol(&a);
        prop_assert!(-op <= -mu_neg + eps);
        prop_assert!(-mu_neg <= mu + eps);
        prop_assert!(mu <= op + eps);
    }

    #[test]
    fn limit_definition_agrees((a, norm) in matrix_with_norm()) {
        let closed = matrix_measure(&a, &norm).unwrap();
        let limit = matrix_measure_limit(&a, &norm, 1e-7).unwrap();
        prop_assert!((closed - limit).abs() <= 1e-4 * (1.0 + operator_norm(&a, &norm).unwrap()));
    }

    #[test]
    fn inner_product_bound(
        (a, x) in (1usize..6).prop_flat_map(|n| (matrix(n), prop::collection::vec(-3.0..3.0f64, n))),
    ) {
        let gap = inner_product_bound_check(&a, &x, &NormKind::Two).unwrap();
        prop_assert!(gap >= -tol(&a) * (1.0 + x.iter().map(|v| v * v).sum::<f64>()));
    }

    #[test]
    fn moore_penrose_identities(t in surjective()) {
        let tm = t.matrix();
        let td = t.pseudoinverse();
        let ttd = tm.try_mul(td).unwrap();
        let tdt = td.try_mul(tm).unwrap();
        let eps = 1e-9 * (1.0 + tm.max_abs() * td.max_abs());
        prop_assert!(ttd.try_mul(tm).unwrap().max_abs_diff(tm) <= eps * (1.0 + tm.max_abs()));
        prop_assert!(tdt.try_mul(td).unwrap().max_abs_diff(td) <= eps * (1.0 + td.max_abs()));
        prop_assert!(ttd.is_symmetric(eps));
        prop_assert!(tdt.is_symmetric(eps));
        prop_assert!(ttd.max_abs_diff(&DenseMatrix::identity(tm.rows())) <= eps);
    }

    #[test]
    fn seminorm_ignores_kernel(
        (t, x, z) in surjective().prop_flat_map(|t| {
            let n = t.domain_dim();
            (Just(t), prop::collection::vec(-3.0..3.0f64, n), prop::collection::vec(-3.0..3.0f64, n))
        }),
    ) {
        let u = t.projector_ker().try_mul_vec(&z).unwrap();
        let shifted: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + b).collect();
        let a = seminorm(&x, &t, &NormKind::Two).unwrap();
        let b = seminorm(&shifted, &t, &NormKind::Two).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        prop_assert!(seminorm(&u, &t, &NormKind::Two).unwrap() <= 1e-9 * (1.0 + z.iter().map(|v| v.abs()).sum::<f64>()));
    }

    #[test]
    fn operator_measure_implies_integral_contractivity(a in (1usize..4).prop_flat_map(matrix), seed in 0u64..1000) {
        let n = a.rows();
        let mu = matrix_measure(&a, &NormKind::Two).unwrap();
        prop_assume!(mu < -1e-3);
        let model = VectorFieldModel::linear("random", a, SampleBox::cube(n, 5.0)).unwrap();
        let rate = RateFunction::constant(-mu).unwrap();
        let sampling = Sampling::new(200, seed);
        prop_assert!(check_operator_measure(&model, &rate, &NormKind::Two, &sampling).unwrap().is_certified());
        prop_assert!(check_integral_contractivity(&model, &rate, &NormKind::Two, &sampling).unwrap().is_certified());
    }

    #[test]
    fn witness_replays_to_worst_margin(a in (1usize..4).prop_flat_map(matrix), c in 0.1..5.0f64, seed in 0u64..1000) {
        let n = a.rows();
        let model = VectorFieldModel::linear("random", a, SampleBox::cube(n, 2.0)).unwrap();
        let rate = RateFunction::constant(c).unwrap();
        let check = Check::IntegralContractivity { model: &model, rate: &rate, norm: &NormKind::Two };
        let cert = check.run(&Sampling::new(100, seed)).unwrap();
        let replayed = check.replay(cert.witness.as_ref().unwrap()).unwrap();
        prop_assert_eq!(replayed.to_bits(), cert.worst_margin.to_bits());
        prop_assert_eq!(cert.is_certified(), cert.worst_margin <= 0.0);
    }

    #[test]
    fn slack_is_monotone(c in 0.5..1.5f64, s in 0.0..0.5f64, extra in 0.0..0.5f64) {
        let model = VectorFieldModel::linear("decay", DenseMatrix::identity(1).scale(-1.0), SampleBox::cube(1, 1.0)).unwrap();
        let rate = RateFunction::constant(c).unwrap();
        let report = verify_pairwise_decay(&model, &[1.0], &[0.0], &rate, &NormKind::Two, &Window::new(0.0, 1.0, 0.01)).unwrap();
        let at_s = report.clone().with_slack(s);
        let at_more = report.with_slack(s + extra);
        prop_assert!(!at_s.pass || at_more.pass);
    }

    #[test]
    fn meanfree_projection_is_self_adjoint_and_idempotent(
        (u, v) in (3usize..30).prop_flat_map(|n| {
            (prop::collection::vec(-3.0..3.0f64, 2 * n), prop::collection::vec(-3.0..3.0f64, 2 * n))
        }),
    ) {
        let g = Grid1D::new(1.3, u.len() / 2).unwrap();
        let fu = Field::new(g.clone(), 2, u).unwrap();
        let fv = Field::new(g, 2, v).unwrap();
        let pu = project_meanfree(&fu);
        let lhs = pu.inner(&fv).unwrap();
        let rhs = fu.inner(&project_meanfree(&fv)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
        let ppu = project_meanfree(&pu);
        prop_assert!(ppu.try_sub(&pu).unwrap().values().iter().all(|d| d.abs() <= 1e-12));
        prop_assert!(pu.weighted_mean().iter().all(|m| m.abs() <= 1e-12));
    }

    #[test]
    fn rd_seminorm_vanishes_exactly_on_constants(
        (c, bump, node) in (prop::collection::vec(-3.0..3.0f64, 2), 1e-3..1.0f64, 0usize..17),
    ) {
        let g = Grid1D::new(1.0, 17).unwrap();
        let p = DenseMatrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let constant = Field::from_fn(&g, 2, |_| c.clone()).unwrap();
        prop_assert!(rd_seminorm(&constant, &p).unwrap() <= 1e-9);
        let mut values = constant.values().to_vec();
        values[2 * node] += bump;
        let bumped = Field::new(g, 2, values).unwrap();
        prop_assert!(rd_seminorm(&bumped, &p).unwrap() > 1e-9);
    }
}

#[test]
fn certificates_do_not_depend_on_thread_count() {
    let a = DenseMatrix::from_rows(&[[-1.0, 2.0], [-0.5, -1.5]]).unwrap();
    let model = VectorFieldModel::linear("lin", a, SampleBox::cube(2, 3.0)).unwrap();
    let rate = RateFunction::constant(0.7).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            check_integral_contractivity(&model, &rate, &NormKind::Two, &Sampling::new(2000, 11)).unwrap().to_json()
        })
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn single_precision_tracks_double() {
    let a64 = DenseMatrix::from_rows(&[[-1.0, 0.3, 0.0], [0.2, -2.0, 1.0], [0.0, -1.0, -0.5]]).unwrap();
    let a32 = a64.cast::<f32>();
    for (n64, n32) in [(NormKind::One, NormKind::One), (NormKind::Two, NormKind::Two), (NormKind::Inf, NormKind::Inf)] {
        let m64 = matrix_measure(&a64, &n64).unwrap();
        let m32 = matrix_measure(&a32, &n32).unwrap();
        assert!((m64 - m32 as f64).abs() <= 1e-5 * (1.0 + m64.abs()));
    }
    let map = SurjectiveMap::new(DenseMatrix::from_rows(&[[1.0f32, -1.0, 0.0]]).unwrap()).unwrap();
    let s = seminorm(&[1.0f32, 0.0, 2.0], &map, &NormKind::Two).unwrap();
    assert!((s - 1.0).abs() <= 1e-6);
}
