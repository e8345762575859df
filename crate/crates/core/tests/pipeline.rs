use adiasched_core::bounds::eta_components;
use adiasched_core::evolve::{adiabatic_error_at, default_steps, final_error, propagate};
use adiasched_core::gap::{profile_from_pair, GapProfile};
use adiasched_core::harness::{
    fit_sweep, grover_instance, minimal_runtime, qlsa_linear_instance, scaling_sweep, FamilyKind, ScheduleKind,
    SearchOptions,
};
use adiasched_core::schedule::{linear_schedule, synthesize_power_law};

#[test]
fn dense_and_reduced_grover_agree() {
    let dense = grover_instance(64, true).unwrap();
    let reduced = grover_instance(64, false).unwrap();
    let sched = synthesize_power_law(&reduced.profile, 1.5, 257).unwrap();
    for t in [5.0, 20.0] {
        let a = final_error(&dense.pair, &sched, t, 1024).unwrap();
        let b = final_error(&reduced.pair, &sched, t, 1024).unwrap();
        assert!((a - b).abs() < 1e-8, "T={t}: {a} vs {b}");
    }
    assert!((dense.a_norm() - reduced.a_norm()).abs() < 1e-10);
}

#[test]
fn sampled_profile_matches_closed_form() {
    let inst = grover_instance(16, false).unwrap();
    let sampled = profile_from_pair(&inst.pair, 201).unwrap();
    assert!((sampled.min_gap() - 0.25).abs() < 1e-6);
    assert!((sampled.argmin() - 0.5).abs() < 1e-6);
    for k in 0..=50 {
        let u = k as f64 / 50.0;
        assert!((sampled.delta(u) - inst.profile.delta(u)).abs() < 1e-3);
    }
}

#[test]
fn harness_error_sits_below_target() {
    let inst = grover_instance(16, false).unwrap();
    let sched = synthesize_power_law(&inst.profile, 1.5, 1025).unwrap();
    let r = minimal_runtime(&inst.pair, &sched, 0.1, 1.0, 2.0).unwrap();
    let trace = propagate(&inst.pair, &sched, r.t_star, r.steps).unwrap();
    let e = adiabatic_error_at(&trace, 1.0).unwrap();
    assert!((0.0..=0.1).contains(&e), "{e}");
    assert!(adiabatic_error_at(&trace, 0.0).unwrap() <= 1e-10);
}

#[test]
fn error_improves_with_runtime() {
    for inst in [grover_instance(16, false).unwrap(), qlsa_linear_instance(4.0).unwrap()] {
        let sched = synthesize_power_law(&inst.profile, 1.5, 513).unwrap();
        let mut t = 4.0;
        while t <= 256.0 {
            let e1 = final_error(&inst.pair, &sched, t, default_steps(t)).unwrap();
            let e2 = final_error(&inst.pair, &sched, 2.0 * t, default_steps(2.0 * t)).unwrap();
            assert!(e2 <= e1 + 0.02, "T={t}: {e1} -> {e2}");
            t *= 2.0;
        }
    }
}

#[test]
fn error_decays_like_squared_eta() {
    // With C = 1 the reported eta is only an order estimate; check the true
    // defect shrinks at least as fast as eta² between T and 4T.
    let inst = grover_instance(64, false).unwrap();
    let sched = synthesize_power_law(&inst.profile, 1.5, 1025).unwrap();
    let e1 = final_error(&inst.pair, &sched, 200.0, default_steps(200.0)).unwrap();
    let e4 = final_error(&inst.pair, &sched, 800.0, default_steps(800.0)).unwrap();
    let r1 = eta_components(inst.a_norm(), &inst.profile, &sched, 200.0, 1.0).unwrap();
    let r4 = eta_components(inst.a_norm(), &inst.profile, &sched, 800.0, 1.0).unwrap();
    assert!((r1.predicted_eta / r4.predicted_eta - 4.0).abs() < 1e-12);
    assert!(e4 <= e1 / 8.0, "{e1} {e4}");
    assert!(e1 <= r1.predicted_eta * r1.predicted_eta);
}

#[test]
fn grover_sweep_shapes() {
    let opts = SearchOptions::default();
    let sizes = [4.0, 16.0, 64.0, 256.0, 1024.0];
    let pl = scaling_sweep(FamilyKind::Grover, &sizes, ScheduleKind::PowerLaw, 1.5, 0.1, &opts).unwrap();
    let lin = scaling_sweep(FamilyKind::Grover, &sizes, ScheduleKind::Linear, 1.5, 0.1, &opts).unwrap();
    let fp = fit_sweep(&pl).unwrap();
    let fl = fit_sweep(&lin).unwrap();
    assert!(fp.slope <= fl.slope - 0.5, "{} {}", fp.slope, fl.slope);
    assert!(fp.r_squared >= 0.98 && fl.r_squared >= 0.98);

    let scaled: Vec<f64> = pl.iter().map(|p| p.t_star * p.min_gap).collect();
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi / lo < 3.0, "{scaled:?}");
    for (a, b) in pl.iter().zip(&lin) {
        assert!(a.t_star < b.t_star);
        assert!(a.final_error <= 0.1 && b.final_error <= 0.1);
        assert!(a.step_check < 1e-4 && b.step_check < 1e-4);
    }
}

#[test]
fn linear_schedule_on_constant_gap_is_adiabatic() {
    let p = GapProfile::constant(1.0).unwrap();
    let s = linear_schedule(65).unwrap();
    let r = eta_components(1.0, &p, &s, 1.0, 1.0).unwrap();
    assert!((r.total_over_T - 3.0).abs() < 1e-12);
}
