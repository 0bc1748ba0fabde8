use super::*;
use crate::families::{build_lwr, build_parity, LwrInstance, ParitySpec};
use crate::rational::{from_f64, rat};
use proptest::prelude::*;

fn parity(d: usize, s: &[usize]) -> CompressibleFn {
    build_parity(&ParitySpec::new(d, s.iter().copied().collect()).unwrap()).unwrap()
}

fn lwr_example() -> CompressibleFn {
    build_lwr(&LwrInstance::new(2, 2, 8, vec![3, 5]).unwrap()).unwrap()
}

fn point(values: &[f64]) -> Vec<Rational> {
    values.iter().map(|&v| from_f64(v).unwrap()).collect()
}

fn lifts(cf: &CompressibleFn) -> (GadgetParams, LiftedNetwork, LiftedNetwork) {
    let p = default_params_for(cf).unwrap();
    let naive = lift_naive_family(cf, &p).unwrap();
    let compressed = lift_compressed(cf, &p).unwrap();
    (p, naive, compressed)
}

#[test]
fn hand_evaluated_points() {
    let f = parity(10, &[1]);
    let (p, naive, compressed) = lifts(&f);
    let mut case1 = vec![rat(1, 2); 10];
    case1[0] = rat(-1, 2);
    let mut small = vec![rat(1, 2); 10];
    small[0] = rat(1, 200);
    let mut case2 = vec![int(-1); 10];
    case2[9] = rat(3, 200);
    for (z, want) in [(&case1, int(1)), (&small, int(0)), (&case2, rat(1, 2))] {
        assert_eq!(naive.eval_exact(z).unwrap(), want);
        assert_eq!(reference_eval_family(&f, &p, z).unwrap(), want);
    }
    assert_eq!(compressed.eval_exact(&case1).unwrap(), int(1));
    assert_eq!(compressed.eval_exact(&case2).unwrap(), rat(1, 2));
    assert_eq!(naive.net.hidden_layers(), 3);
    assert_eq!(compressed.net.hidden_layers(), 2);
    assert_eq!(naive.source_hidden, 1);
}

#[test]
fn lwr_depths_and_case_two() {
    let f = lwr_example();
    let (p, naive, compressed) = lifts(&f);
    assert_eq!((naive.net.hidden_layers(), compressed.net.hidden_layers()), (3, 2));
    // b = (0,1,0,1,0,0) encodes x = (2, 1): 11 ≡ 3, label 1/2.
    let b = [0i8, 1, 0, 1, 0, 0];
    let mut z: Vec<Rational> = b.iter().map(|&v| int(1 - 2 * v as i64)).collect();
    z[0] = rat(3, 72); // δ = 1/36, 2δ = 2/36: z_0 = 1.5δ
    let want = reference_eval_family(&f, &p, &z).unwrap();
    assert_eq!(want, rat(1, 2) - rat(1, 2));
    z[0] = rat(7, 144); // N2 = (8 − 7)/4 = 1/4
    let want = reference_eval_family(&f, &p, &z).unwrap();
    assert_eq!(want, rat(1, 4));
    assert_eq!(naive.eval_exact(&z).unwrap(), want);
    assert_eq!(compressed.eval_exact(&z).unwrap(), want);
    let literal = lift_compressed_variant(&f, &p, CompressedVariant::OuterCoefficient).unwrap();
    assert_eq!(literal.eval_exact(&z).unwrap(), rat(1, 2) * rat(3, 4));
}

#[test]
fn bounds_and_scales() {
    assert_eq!(compute_bound(&parity(5, &[2, 3])).unwrap(), int(1));
    assert_eq!(compute_bound(&lwr_example()).unwrap(), rat(1, 2));
    let zero = parity(5, &[2, 3]).zeroed();
    assert_eq!(compute_bound(&zero).unwrap(), int(0));
    assert_eq!(default_params_for(&zero).unwrap().n2_scale, int(1));

    let mut row = vec![int(0); 4];
    row[0] = int(10);
    let ten_x1 = ReluNetwork::affine(vec![row], vec![int(0)]).unwrap();
    assert_eq!(compute_bound_network(&ten_x1).unwrap(), int(10));
    let p1 = GadgetParams::new(4).unwrap();
    assert!(matches!(lift_naive(&ten_x1, &p1), Err(LiftError::ScaleBelowBound { .. })));
    let p10 = default_params(4, &int(10), 0).unwrap();
    assert_eq!(p10.n2_scale, int(10));
    assert_eq!(p10.n3_w, int(81));
    let lifted = lift_naive(&ten_x1, &p10).unwrap();
    // near zero the scaled N2 dominates 10·N1(z_1)
    let z = vec![rat(1, 100), int(1), int(1), int(1)];
    assert_eq!(lifted.eval_exact(&z).unwrap(), int(0));
    assert_eq!(reference_eval_network(&ten_x1, &p10, &z).unwrap(), int(0));
}

#[test]
fn compressed_lift_rejects_small_w() {
    let f = parity(4, &[1]);
    let p = GadgetParams::new(4).unwrap().with_w(int(3)).unwrap();
    assert!(matches!(lift_compressed(&f, &p), Err(LiftError::WTooSmall { .. })));
}

#[test]
fn label_map_cases() {
    let p = GadgetParams::new(10).unwrap();
    let good = vec![rat(3, 100); 10];
    assert_eq!(label_map(&rat(1, 2), &good, &p), rat(1, 2));
    let mut mid = vec![int(1); 10];
    mid[9] = rat(3, 200);
    assert_eq!(label_map(&int(1), &mid, &p), rat(1, 2));
    let mut bad = vec![int(1); 10];
    bad[4] = rat(1, 100);
    assert_eq!(label_map(&int(1), &bad, &p), int(0));
    bad[4] = int(0);
    assert_eq!(label_map(&rat(1, 3), &bad, &p), int(0));
}

#[test]
fn transform_forced_half_samples() {
    let f = parity(10, &[1, 2, 3]);
    let p = default_params_for(&f).unwrap();
    let x = vec![-1i8, 1, 1, 1, 1, 1, 1, 1, 1, 1];
    let ex = crate::families::BooleanExample { x: x.clone(), y: f.eval_pm(&x).unwrap() };
    let t = transform_with_half(&ex, &[0.5; 10], &p).unwrap();
    assert_eq!(t.y_tilde, int(1));
    assert_eq!(t.z[0], -0.5);
    let mut g = vec![0.5; 10];
    g[0] = 0.005;
    assert_eq!(transform_with_half(&ex, &g, &p).unwrap().y_tilde, int(0));
    let zo = crate::families::BooleanExample { x: vec![0; 10], y: int(0) };
    assert!(transform_with_half(&zo, &[0.5; 10], &p).is_err());
}

#[test]
fn good_set_predicate_and_probability() {
    let p = GadgetParams::new(10).unwrap();
    assert!(in_good_set(&vec![int(1); 10], &p));
    let mut z = vec![int(1); 10];
    z[3] = rat(1, 100);
    assert!(!in_good_set(&z, &p));
    assert!(in_good_set_f64(&[1.0; 10], 10));
    assert!(!in_good_set_f64(&[0.01, 1.0], 10));

    let oracle = {
        let m = crate::stats::normal_cdf(0.02, 1.0) - crate::stats::normal_cdf(-0.02, 1.0);
        (1.0 - m).powi(10)
    };
    let got = good_set_prob(&DistributionSpec::gaussian(), 10);
    assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
    assert!((got - 0.851).abs() < 1e-3);
    let hw = 3f64.sqrt();
    let uni = good_set_prob(&DistributionSpec::symmetric_uniform(), 10);
    assert!((uni - (1.0 - 0.02 / hw).powi(10)).abs() < 1e-12);
}

#[test]
fn certificates() {
    for d in [5, 10, 20, 40] {
        assert!(DistributionSpec::gaussian().certificate_holds(d));
        assert!(DistributionSpec::symmetric_uniform().certificate_holds(d));
    }
    let narrow = DistributionSpec::custom_product(
        vec![Marginal::Gaussian { std: 0.01 }],
        AntiConcentration { a: 2.0, b: 2.0 },
    )
    .unwrap();
    assert!(!narrow.certificate_holds(10));
    assert!(DistributionSpec::custom_product(vec![], AntiConcentration { a: 2.0, b: 2.0 }).is_err());
    assert!(DistributionSpec::custom_product(
        vec![Marginal::Uniform { half_width: 1.0 }],
        AntiConcentration { a: 2.0, b: 1.0 }
    )
    .is_err());
}

#[test]
fn weak_predictor_rules() {
    let dist = DistributionSpec::gaussian();
    let half = WeakPredictor::new(|_: &[f64]| 0.5, dist.clone(), 1);
    assert!((0..100).all(|i| half.predict(&[1, -1, 1], i) == 1));
    let big = WeakPredictor::new(|_: &[f64]| 2.0, dist.clone(), 1);
    assert_eq!(big.hypothesis(&[0.0]), 1.0);
    let neg = WeakPredictor::new(|_: &[f64]| -3.0, dist, 1);
    assert_eq!(neg.predict(&[1], 0), 0);
}

#[test]
fn weak_predictor_from_exact_lift() {
    let f = parity(16, &[2, 5, 11]);
    let p = default_params_for(&f).unwrap();
    let lifted = lift_naive_family(&f, &p).unwrap();
    let wp = WeakPredictor::new(|z: &[f64]| lifted.eval_f64(z).unwrap(), DistributionSpec::gaussian(), 9);
    let loss = wp.empirical_sq_loss(&f, 10_000, 4).unwrap();
    assert!(loss < 1.0 / 16.0, "loss {loss}");
}

#[test]
fn membership_wrapper() {
    let f = parity(6, &[1, 6]);
    let p = default_params_for(&f).unwrap();
    let mut oracle = LiftedQueryOracle::new(FamilyOracle::new(f.clone()), p.clone());
    let z = point(&[-0.7, 0.3, 1.0, 2.0, -0.5, 0.9]);
    assert_eq!(oracle.query(&z).unwrap(), int(1));
    let mut zero = z.clone();
    zero[2] = int(0);
    assert_eq!(oracle.query(&zero).unwrap(), int(0));
    for i in 0..2_000 {
        let z = random_point(&p, PointRegion::Anywhere, 3, i);
        assert_eq!(oracle.query(&z).unwrap(), reference_eval_family(&f, &p, &z).unwrap());
    }
    assert_eq!(oracle.real_queries(), 2_002);
    assert_eq!(oracle.boolean_queries(), 2_002);
}

#[test]
fn small_identity_sweeps() {
    for f in [parity(10, &[1, 4, 7]), lwr_example()] {
        let (p, naive, compressed) = lifts(&f);
        let reference = |z: &[Rational]| reference_eval_family(&f, &p, z);
        let r = verify_identity(&naive, &reference, 500, 200, PointRegion::Anywhere, 1).unwrap();
        assert_eq!((r.checked, r.failures), (700, 0));
        let r = verify_identity(&compressed, &reference, 500, 200, PointRegion::OffThreshold, 1).unwrap();
        assert_eq!((r.checked, r.failures), (700, 0));
    }
}

#[test]
fn off_threshold_points_respect_region() {
    let p = GadgetParams::new(8).unwrap();
    for i in 0..300 {
        let z = adversarial_point(&p, PointRegion::OffThreshold, 5, i);
        assert!(z.iter().all(|v| v.abs() > p.delta));
        assert!(z.iter().any(|v| v.abs() <= int(2) * &p.delta));
    }
}

#[test]
fn case3_report_shapes() {
    let f = parity(10, &[1, 2]);
    let p = default_params_for(&f).unwrap();
    let r = case3_discrepancy(&f, &p, 300, 2).unwrap();
    assert_eq!(r.naive.max_abs_deviation_exact, "0/1");
    assert!(r.compressed.max_abs_deviation.is_finite());
    assert!((0.0..=1.0).contains(&r.compressed.nonzero_fraction));
    let zero = case3_discrepancy(&f.zeroed(), &p, 300, 2).unwrap();
    assert_eq!(zero.compressed.max_abs_deviation, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn label_map_matches_reference_on_transformed_points(
        idx in 0u64..64,
        g in proptest::collection::vec(0.0f64..0.2, 6),
    ) {
        let f = parity(6, &[1, 3, 4]);
        let p = default_params_for(&f).unwrap();
        let x = crate::families::DomainConvention::PmOne.corner(idx, 6);
        let y = f.eval_pm(&x).unwrap();
        let ex = crate::families::BooleanExample { x, y };
        let t = transform_with_half(&ex, &g, &p).unwrap();
        let reference = reference_eval_family(&f, &p, &t.z_exact).unwrap();
        // sgn(0) = +1 can flip a coordinate of x when g_j = 0; then N2 ≥ K
        // forces both sides to zero anyway.
        prop_assert_eq!(t.y_tilde.clone(), reference);
        let abs: Vec<Rational> = t.z_exact.iter().map(|v| v.abs()).collect();
        let formula = rational::relu(&(&ex.y - gadgets::n2_closed_form(&p, &abs)));
        prop_assert_eq!(t.y_tilde, formula);
    }
}
