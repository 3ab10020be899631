use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(c: &[f64]) -> ParamVector<f64> {
    ParamVector::from_f64(c).unwrap()
}

fn hyper(alpha: f64) -> HyperParams<f64> {
    HyperParams::default().with_step(StepSizeSchedule::Constant { alpha })
}

fn full() -> FeasibleSet<f64> {
    FeasibleSet::FullSpace
}

fn interval(lo: f64, hi: f64) -> FeasibleSet<f64> {
    FeasibleSet::new_box(v(&[lo]), v(&[hi])).unwrap()
}

#[test]
fn zero_initialized_state() {
    let s = OptimizerState::new(v(&[1.0, 2.0]));
    for z in [s.first_moment(), s.second_moment(), s.max_second_moment(), s.prev_direction(), s.prev_gradient()] {
        assert!(z.is_zero());
    }
    assert_eq!(s.t(), 0);
}

#[test]
fn sgd_examples() {
    let h = hyper(0.1);
    let mut s = OptimizerState::new(v(&[1.0]));
    assert_eq!(sgd_step(&mut s, &h, &v(&[0.0]), &full()).unwrap(), &v(&[1.0]));
    let mut s = OptimizerState::new(v(&[1.0]));
    assert_eq!(sgd_step(&mut s, &h, &v(&[0.5]), &full()).unwrap()[0], 0.95);
    let mut s = OptimizerState::new(v(&[1.0]));
    assert_eq!(sgd_step(&mut s, &h, &v(&[0.5]), &interval(0.0, 0.9)).unwrap()[0], 0.9);
}

#[test]
fn adam_examples() {
    let h = hyper(0.01);
    let mut s = OptimizerState::new(v(&[0.3, -0.2]));
    assert_eq!(adam_step(&mut s, &h, &v(&[0.0, 0.0]), &full()).unwrap(), &v(&[0.3, -0.2]));

    let mut s = OptimizerState::new(v(&[0.0]));
    let x = adam_step(&mut s, &h, &v(&[2.0]), &full()).unwrap()[0];
    // mpmath, 40 digits: -0.03162277160168458388927897755892441731163
    assert!((x - -0.031_622_771_601_684_58).abs() < 1e-16, "{x}");
    assert!((s.first_moment()[0] - 0.2).abs() < 1e-16);
    assert!((s.second_moment()[0] - 0.004).abs() < 1e-17);

    let mut s = OptimizerState::new(v(&[0.0]));
    assert_eq!(adam_step(&mut s, &h, &v(&[2.0]), &interval(-0.01, 0.01)).unwrap()[0], -0.01);
}

#[test]
fn amsgrad_keeps_max_after_gradient_drops() {
    let h = hyper(0.01);
    let mut s = OptimizerState::new(v(&[0.0]));
    amsgrad_step(&mut s, &h, &v(&[2.0]), &full()).unwrap();
    let first = s.max_second_moment()[0];
    assert!((first - 0.004).abs() < 1e-17);
    amsgrad_step(&mut s, &h, &v(&[0.0]), &full()).unwrap();
    assert!((s.second_moment()[0] - 0.003996).abs() < 1e-17);
    assert_eq!(s.max_second_moment()[0], first);
}

#[test]
fn coba_two_step_oracle() {
    let h = HyperParams {
        damping: 1e-4,
        damping_exponent: 2.0,
        gamma_kind: GammaKind::Fr,
        ..hyper(0.01)
    };
    let mut s = OptimizerState::new(v(&[0.0]));
    coba_step(&mut s, &h, &v(&[2.0]), &full()).unwrap();
    assert_eq!(s.last_step().gamma, 0.0);
    coba_step(&mut s, &h, &v(&[1.0]), &full()).unwrap();
    assert_eq!(s.last_step().gamma, 0.25);
    assert!((s.prev_direction()[0] - 0.999_987_5).abs() < 1e-16);
    // Straight-line transcription of both iterations in 40-digit arithmetic:
    // x3 = -0.07123641759797887458343051791803616875599
    assert!((s.x()[0] - -0.071_236_417_597_978_87).abs() < 1e-16, "{}", s.x()[0]);
}

#[test]
fn coba_first_step_matches_amsgrad() {
    let h = hyper(0.05);
    let g = v(&[0.4, -1.2, 3.0]);
    let mut a = OptimizerState::new(v(&[0.1, 0.2, 0.3]));
    let mut c = a.clone();
    amsgrad_step(&mut a, &h, &g, &full()).unwrap();
    coba_step(&mut c, &h, &g, &full()).unwrap();
    assert_eq!(a.x(), c.x());
    assert_eq!(c.last_step().gamma, 0.0);
}

#[test]
fn adagrad_examples() {
    let mut h = hyper(0.1);
    h.eps = 0.0;
    let mut s = OptimizerState::new(v(&[0.5]));
    assert_eq!(adagrad_step(&mut s, &h, &v(&[0.0]), &full()).unwrap()[0], 0.5);

    let mut s = OptimizerState::new(v(&[0.0]));
    assert_eq!(adagrad_step(&mut s, &h, &v(&[3.0]), &full()).unwrap()[0], -0.1);
    let before = s.x()[0];
    let after = adagrad_step(&mut s, &h, &v(&[3.0]), &full()).unwrap()[0];
    assert!(((before - after) - 0.070_710_678_118_654_75).abs() < 1e-16);
}

#[test]
fn rmsprop_examples() {
    let h = hyper(0.01);
    let mut s = OptimizerState::new(v(&[0.25]));
    assert_eq!(rmsprop_step(&mut s, &h, &v(&[0.0]), &full()).unwrap()[0], 0.25);

    let mut s = OptimizerState::new(v(&[0.0]));
    let x = rmsprop_step(&mut s, &h, &v(&[2.0]), &full()).unwrap()[0];
    // -0.09999999500000024999998750000062499996875
    assert!((x - -0.099_999_995_000_000_25).abs() < 1e-16, "{x}");
}

#[test]
fn rmsprop_displacement_nonincreasing_on_constant_stream() {
    let h = hyper(0.01);
    let mut s = OptimizerState::new(v(&[0.0]));
    let g = v(&[1.5]);
    let mut prev_x = 0.0;
    let mut prev_step = f64::INFINITY;
    for t in 1..=100 {
        let x = rmsprop_step(&mut s, &h, &g, &full()).unwrap()[0];
        let step = (x - prev_x).abs();
        if t > 1 {
            assert!(step <= prev_step, "t = {t}");
        }
        prev_step = step;
        prev_x = x;
    }
}

#[test]
fn dimension_mismatch_leaves_state_untouched() {
    let h = hyper(0.01);
    let mut s = OptimizerState::new(v(&[0.0, 0.0]));
    let before = s.clone();
    assert!(coba_step(&mut s, &h, &v(&[1.0]), &full()).is_err());
    assert_eq!(s, before);
}

#[test]
fn optimizer_names_round_trip() {
    for name in OptimizerName::ROSTER {
        let parsed: OptimizerName = name.parse().unwrap();
        assert_eq!(parsed.to_string(), name);
    }
    assert!("coba-xx".parse::<OptimizerName>().is_err());
    assert!("momentum".parse::<OptimizerName>().is_err());
    let hz: OptimizerName = "coba-hz".parse().unwrap();
    assert_eq!(hz.gamma_kind(2.0).unwrap(), Some(GammaKind::Hz { lambda: 2.0 }));
}

#[test]
fn strict_constructor_rejects_degenerate_damping() {
    let h = hyper(0.01).with_damping(0.0, 1.5);
    assert!(Optimizer::new(Method::Coba, h, v(&[0.0])).is_err());
    assert!(Optimizer::new_relaxed(Method::Coba, h, v(&[0.0])).is_ok());
}

fn gradient_stream(seed: u64, n: usize, len: usize) -> Vec<ParamVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| ParamVector::new((0..n).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap())
        .collect()
}

#[test]
fn coba_without_damping_is_amsgrad_bit_for_bit() {
    let set = FeasibleSet::symmetric_box(4, 2.0).unwrap();
    for seed in 0..5 {
        for kind in GammaKind::all(2.0) {
            let h = HyperParams { damping: 0.0, gamma_kind: kind, ..hyper(0.05) };
            let mut a = Optimizer::new_relaxed(Method::AmsGrad, h, v(&[0.5, -0.5, 1.0, 0.0])).unwrap();
            let mut c = Optimizer::new_relaxed(Method::Coba, h, v(&[0.5, -0.5, 1.0, 0.0])).unwrap();
            for g in gradient_stream(seed, 4, 1000) {
                let xa = a.step(&g, &set).unwrap().clone();
                let xc = c.step(&g, &set).unwrap();
                assert_eq!(&xa, xc);
            }
        }
    }
}

#[test]
fn amsgrad_matches_adam_when_second_moment_grows() {
    // |g_t| nondecreasing keeps v_t nondecreasing, so v̂_t = v_t.
    let set = FeasibleSet::symmetric_box(3, 5.0).unwrap();
    let h = hyper(0.01);
    let mut a = Optimizer::new(Method::Adam, h, v(&[0.0, 1.0, -1.0])).unwrap();
    let mut b = Optimizer::new(Method::AmsGrad, h, v(&[0.0, 1.0, -1.0])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in 0..500 {
        let mag = 1.0 + t as f64 * 0.01;
        let g: Vec<f64> = (0..3)
            .map(|_| if rng.random_bool(0.5) { mag } else { -mag })
            .collect();
        let g = ParamVector::new(g).unwrap();
        let xa = a.step(&g, &set).unwrap().clone();
        let xb = b.step(&g, &set).unwrap();
        assert_eq!(&xa, xb, "t = {t}");
        assert_eq!(a.state().second_moment(), b.state().max_second_moment());
    }
}

#[test]
fn single_precision_runs() {
    let set = FeasibleSet::<f32>::symmetric_box(2, 1.0).unwrap();
    let mut o = Optimizer::<f32>::new(Method::Coba, HyperParams::default(), ParamVector::zeros(2)).unwrap();
    for t in 0..50 {
        let g = ParamVector::<f32>::from_f64(&[(t as f64).sin(), 0.5]).unwrap();
        o.step(&g, &set).unwrap();
    }
    assert!(set.contains(o.x(), 0.0));
}

fn methods() -> [Method; 6] {
    [Method::Sgd, Method::AdaGrad, Method::RmsProp, Method::Adam, Method::AmsGrad, Method::Coba]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn iterates_stay_feasible(seed in 0u64..1000, use_ball in any::<bool>()) {
        let set = if use_ball {
            FeasibleSet::new_ball(v(&[0.2, -0.1, 0.0]), 0.7).unwrap()
        } else {
            FeasibleSet::new_box(v(&[-1.0, 0.0, -0.5]), v(&[1.0, 0.3, 0.5])).unwrap()
        };
        for method in methods() {
            let h = hyper(0.2);
            let mut o = Optimizer::new(method, h, v(&[0.0, 0.1, 0.0])).unwrap();
            for g in gradient_stream(seed, 3, 60) {
                let x = o.step(&g, &set).unwrap();
                prop_assert!(set.contains(x, 1e-10), "{method}: {x:?}");
            }
        }
    }

    #[test]
    fn max_accumulator_is_monotone(seed in 0u64..1000) {
        for method in [Method::AmsGrad, Method::Coba] {
            let mut o = Optimizer::new(method, hyper(0.01), ParamVector::zeros(4)).unwrap();
            for g in gradient_stream(seed, 4, 80) {
                let before = o.state().max_second_moment().clone();
                o.step(&g, &FeasibleSet::FullSpace).unwrap();
                let after = o.state().max_second_moment();
                prop_assert!(before.iter().zip(after.iter()).all(|(b, a)| a >= b));
                prop_assert!(o.state().second_moment().iter().all(|&x| x >= 0.0));
            }
        }
    }
}
