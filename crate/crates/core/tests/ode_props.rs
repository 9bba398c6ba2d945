use nlgreen::expr::parse_nonlin;
use nlgreen::forcing::Forcing;
use nlgreen::green::green_catalog;
use nlgreen::ode::{energy, potential, solve_ivp, CauchyProblem};
use proptest::prelude::*;

fn free(src: &str, w0: f64, v0: f64, horizon: f64) -> CauchyProblem {
    CauchyProblem::new(
        parse_nonlin(src).unwrap(),
        Forcing::Zero,
        1.0,
        w0,
        v0,
        0.0,
        horizon,
    )
    .unwrap()
}

#[test]
fn small_amplitude_pendulum_is_linear() {
    let v0 = 1e-6;
    let traj = solve_ivp(&free("sin(w)", 0.0, v0, 10.0), 1e-10, 1e-12).unwrap();
    let worst = (0..=1000)
        .map(|i| {
            let t = i as f64 / 100.0;
            (traj.eval_component(t, 0).unwrap() - v0 * t.sin()).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn linear_problem_is_sine() {
    let traj = solve_ivp(&free("w", 0.0, 1.0, 10.0), 1e-10, 1e-12).unwrap();
    for (i, &t) in traj.times().iter().enumerate() {
        assert!((traj.state(i)[0] - t.sin()).abs() <= 1e-8, "t = {t}");
    }
}

#[test]
fn sinh_gordon_matches_closed_form() {
    let traj = solve_ivp(&free("sinh(w)", 0.0, 1.0, 1.0), 1e-12, 1e-14).unwrap();
    let closed = green_catalog("sinh", 1.0, None).unwrap();
    let got = traj.last_state()[0];
    let want = closed.value(1.0).unwrap();
    assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
}

#[test]
fn energy_drift_within_bound() {
    let (rtol, atol) = (1e-10, 1e-12);
    for src in ["w^3", "sin(w)", "sinh(w)", "exp(w)"] {
        let v0s: &[f64] = if src == "exp(w)" {
            &[1.0]
        } else {
            &[0.5, 1.0, 2.0]
        };
        for &v0 in v0s {
            let p = free(src, 0.0, v0, 10.0);
            let traj = solve_ivp(&p, rtol, atol).unwrap();
            let e = energy(&p, &traj).unwrap();
            assert!((e[0] - 0.5 * v0 * v0).abs() <= 1e-15);
            let drift = e.iter().map(|x| (x - e[0]).abs()).fold(0.0, f64::max);
            assert!(
                drift <= 100.0 * (rtol * e[0].abs() + atol),
                "{src} v0={v0}: drift {drift:e}"
            );
        }
    }
}

#[test]
fn potentials_are_symbolic_for_catalog() {
    for (src, w, v) in [
        ("w^3", 2.0, 4.0),
        ("sin(w)", 1.0, 1.0 - 1f64.cos()),
        ("sinh(w)", 1.0, 1f64.cosh() - 1.0),
        ("exp(w)", 1.0, 1f64.exp() - 1.0),
    ] {
        let p = potential(&parse_nonlin(src).unwrap());
        assert!(p.is_symbolic(), "{src}");
        assert!((p.eval(w).unwrap() - v).abs() <= 1e-15, "{src}");
    }
}

#[test]
fn step_count_follows_fifth_order() {
    // error per step ∝ h⁵, so steps grow like tol^(-1/5)
    let steps: Vec<f64> = [1e-6, 1e-8, 1e-10]
        .iter()
        .map(|&tol| {
            solve_ivp(&free("w", 0.0, 1.0, 20.0), tol, tol * 1e-2)
                .unwrap()
                .len() as f64
        })
        .collect();
    let errs: Vec<f64> = [1e-6, 1e-8, 1e-10]
        .iter()
        .map(|&tol| {
            let traj = solve_ivp(&free("w", 0.0, 1.0, 20.0), tol, tol * 1e-2).unwrap();
            (traj.last_state()[0] - 20f64.sin()).abs()
        })
        .collect();
    for w in steps.windows(2) {
        let growth = w[1] / w[0];
        // 100^(1/5) ≈ 2.51
        assert!((2.0..3.2).contains(&growth), "steps {steps:?}");
    }
    assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn time_reversible(
        src in prop::sample::select(vec!["w^3", "sin(w)", "sinh(w)", "w", "tanh(w)"]),
        v0 in 0.2f64..2.0,
        horizon in 1.0f64..5.0,
    ) {
        let fwd = solve_ivp(&free(src, 0.0, v0, horizon), 1e-10, 1e-12).unwrap();
        let end = fwd.last_state();
        let back = solve_ivp(&free(src, end[0], -end[1], horizon), 1e-10, 1e-12).unwrap();
        let y = back.last_state();
        prop_assert!(y[0].abs() <= 1e-7, "{} returned to {}", src, y[0]);
        prop_assert!((y[1] + v0).abs() <= 1e-7);
    }

    #[test]
    fn dense_output_matches_nodes(v0 in 0.2f64..2.0) {
        let traj = solve_ivp(&free("sin(w)", 0.0, v0, 5.0), 1e-10, 1e-12).unwrap();
        for i in 0..traj.len() {
            let t = traj.times()[i];
            prop_assert_eq!(traj.eval_component(t, 0).unwrap(), traj.state(i)[0]);
        }
    }
}
