use coba::problems::ProblemInstance;
use coba::theory::{regret, verify, TheoryTrace};
use coba::{FeasibleSet, GammaKind, HyperParams, Method, Optimizer, StepSizeSchedule};

fn hyper(kind: GammaKind<f64>) -> HyperParams<f64> {
    HyperParams::default()
        .with_step(StepSizeSchedule::DiminishingSqrt { alpha: 0.1 })
        .with_gamma(kind)
}

fn traced_run(problem: &ProblemInstance<f64>, method: Method, hyper: HyperParams<f64>, horizon: u64) -> TheoryTrace<f64> {
    let mut opt = Optimizer::new(method, hyper, problem.initial_point().unwrap()).unwrap();
    let mut trace = TheoryTrace::new();
    for t in 1..=horizon {
        let (loss, g) = problem.loss_and_grad(opt.x(), t).unwrap();
        opt.step(&g, problem.feasible()).unwrap();
        trace.record(&opt, &g, loss);
    }
    let best = problem.comparator(horizon).unwrap();
    let losses: Vec<f64> = (1..=horizon).map(|t| problem.loss_at(&best, t).unwrap()).collect();
    trace.set_comparator_losses(&losses).unwrap();
    trace
}

#[test]
fn bound_and_lemmas_hold_on_the_quadratic() {
    let set = FeasibleSet::symmetric_box(10, 10.0).unwrap();
    let problem = ProblemInstance::quadratic(10, set.clone(), 1).unwrap();
    for kind in GammaKind::all(2.0) {
        let h = hyper(kind);
        let trace = traced_run(&problem, Method::Coba, h, 500);
        let report = verify(&trace, &h, set.diameter_inf(), problem.gradient_bound().unwrap(), &[0, 1, 2]).unwrap();
        assert!(report.all_hold(), "{kind}: {report:?}");
        assert!(report.bound.regret < report.bound.total());
    }
}

#[test]
fn bound_holds_on_logistic_and_softmax() {
    let set = FeasibleSet::symmetric_box(4, 5.0).unwrap();
    let problems = [
        ProblemInstance::logistic(4, set.clone(), 2).unwrap(),
        ProblemInstance::softmax(2, 2, set.clone(), 2).unwrap(),
    ];
    for problem in &problems {
        let h = hyper(GammaKind::Hz { lambda: 2.0 });
        let trace = traced_run(problem, Method::Coba, h, 300);
        let report = verify(&trace, &h, set.diameter_inf(), problem.gradient_bound().unwrap(), &[0, 1]).unwrap();
        assert!(report.all_hold(), "{}: {report:?}", problem.kind().name());
    }
}

#[test]
fn average_regret_shrinks() {
    let set = FeasibleSet::symmetric_box(5, 10.0).unwrap();
    let problem = ProblemInstance::quadratic(5, set, 3).unwrap();
    let h = hyper(GammaKind::Hs);
    let short = regret(&traced_run(&problem, Method::Coba, h, 100)) / 100.0;
    let long = regret(&traced_run(&problem, Method::Coba, h, 3000)) / 3000.0;
    assert!(long < short, "{long} vs {short}");
}

#[test]
fn amsgrad_trace_uses_gradients_as_directions() {
    let set = FeasibleSet::symmetric_box(3, 2.0).unwrap();
    let problem = ProblemInstance::quadratic(3, set.clone(), 4).unwrap();
    let h = hyper(GammaKind::Fr);
    let trace = traced_run(&problem, Method::AmsGrad, h, 50);
    for s in trace.steps() {
        assert_eq!(s.direction, s.gradient);
        assert_eq!(s.gamma, 0.0);
    }
    let report = verify(&trace, &h, set.diameter_inf(), problem.gradient_bound().unwrap(), &[0]).unwrap();
    assert_eq!(report.bound.term3, report.bound.amsgrad_term3);
    assert_eq!(report.bound.term4, 0.0);
}
