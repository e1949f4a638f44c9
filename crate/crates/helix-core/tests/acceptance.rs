//! Acceptance suite: one test per numbered criterion, each printing a
//! PASS line with the measured quantities (run with `--nocapture` to see
//! them). Criterion 12 (byte-identical CLI artifacts) lives in the CLI
//! crate's own acceptance test.

use std::time::Instant;

use helix_core::criticality::{solve_drift_equation, ProgenySpec};
use helix_core::engine::{
    delta_n, evolve, expected_max, gw_extinction_curve, median, step_tail,
};
use helix_core::gumbel::{
    bernoulli_kappa_beta, classify, solve_gamma_star, verify_bound, LatticePmf,
};
use helix_core::helix::{
    cyclic_distance_curve, find_limit_point, from_median_anchor, sup_distance, HelixElement,
};
use helix_core::joint::joint_evolve;
use helix_core::maps::{shift_down, shift_up};
use helix_core::numeric::dkw_epsilon;
use helix_core::sim::{simulate_brw, split_level, LevelHistogram, SamplerEvents};
use helix_core::numeric::SplitMix64;
use helix_core::tail::TailFunction;
use helix_core::OpBudget;

fn budget() -> OpBudget {
    OpBudget::default()
}

#[test]
fn criterion_01_map_identities() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..=1000 {
        let y = i as f64 / 1000.0;
        let a = (shift_up(shift_down(y).unwrap()).unwrap() - y).abs();
        let b = (shift_down(shift_up(y).unwrap()).unwrap() - y).abs();
        let c = (shift_down(1.0 - y).unwrap() - (1.0 - shift_up(y).unwrap())).abs();
        worst = worst.max(a).max(b).max(c);
    }
    assert!(worst < 1e-12, "worst identity residual {worst}");
    assert!(start.elapsed().as_secs_f64() < 1.0);
    println!(
        "[PASS] criterion 1: map identities on 1000-point grid, worst residual {:.2e} ({:.3}s)",
        worst,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_02_hand_exact_recursion_values() {
    let f1 = evolve(1, 0.5).unwrap();
    let f2 = evolve(2, 0.5).unwrap();
    assert_eq!(f1.value(1), 0.25);
    assert_eq!(f2.value(1), 0.390625);
    assert_eq!(f2.value(2), 0.015625);
    let f1b = evolve(1, 0.6).unwrap();
    assert!((f1b.value(1) - 0.16).abs() < 1e-15);
    assert_eq!(expected_max(&f2), 1.1875);
    assert_eq!(delta_n(&f1, &f2).unwrap(), 0.15625);
    let joint = joint_evolve(1, 0.5, 64, &mut budget()).unwrap();
    let m = joint.joint.mass();
    assert_eq!(m.len(), 3);
    assert_eq!(m[&(0, 1)], 0.5);
    assert_eq!(m[&(0, 2)], 0.25);
    assert_eq!(m[&(1, 2)], 0.25);
    println!("[PASS] criterion 2: hand-exact recursion values (F_1, F_2, EM_2, Delta_1, joint at n=1)");
}

#[test]
fn criterion_03_gw_identity_bit_exact() {
    let start = Instant::now();
    let qs = gw_extinction_curve(10_000);
    let mut f = TailFunction::initial(0.5).unwrap();
    for (k, &qk) in qs.iter().enumerate() {
        f = step_tail(&f, 0.5).unwrap();
        assert_eq!(
            f.value(1).to_bits(),
            qk.to_bits(),
            "bit mismatch at level {}",
            k + 1
        );
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 10.0, "took {secs}s");
    println!(
        "[PASS] criterion 3: evolve(n,1/2).F(1) == scalar extinction iterate bit-exactly, n <= 10^4 ({:.2}s)",
        secs
    );
}

#[test]
fn criterion_04_helix_invariance_under_step() {
    let mut worst: f64 = 0.0;
    for i in 1..=5 {
        let v0 = i as f64 / 10.0;
        let e = HelixElement::new(45, v0).unwrap();
        let vals: Vec<f64> = (1..=85).map(|x| e.tail(x)).collect();
        let f = TailFunction::from_values(85, 0.5, vals).unwrap();
        let stepped = step_tail(&f, 0.5).unwrap();
        let shifted = e.translated(1);
        for x in 1..=stepped.hi() {
            // one step reproduces the element, which equals its own unit
            // shift re-anchored one site to the right
            assert_eq!(shifted.tail(x + 1), e.tail(x));
            worst = worst.max((stepped.value(x) - e.tail(x)).abs());
            let s = e.tail(x) + e.tail(x - 1);
            worst = worst.max((4.0 * e.tail(x) - s * s).abs());
        }
    }
    assert!(worst < 1e-12, "worst residual {worst}");
    println!(
        "[PASS] criterion 4: helix elements are fixed by the level step, residual {:.2e} < 1e-12",
        worst
    );
}

#[test]
fn criterion_05_cyclic_trend() {
    let start = Instant::now();
    let pts = cyclic_distance_curve(&[100, 1000, 10_000], 0.5, &mut budget()).unwrap();
    let d: Vec<f64> = pts.iter().map(|p| p.d_n).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "d not decreasing: {d:?}");
    assert!(d[2] < 0.5 * d[0], "d_1e4 = {} not < half of d_1e2 = {}", d[2], d[0]);

    // Delta_n strictly decreasing over the same levels
    let mut deltas = Vec::new();
    let mut f = TailFunction::initial(0.5).unwrap();
    for &target in &[100u32, 1000, 10_000] {
        while f.level() < target {
            f = step_tail(&f, 0.5).unwrap();
        }
        deltas.push(delta_n(&f, &step_tail(&f, 0.5).unwrap()).unwrap());
    }
    assert!(deltas[0] > deltas[1] && deltas[1] > deltas[2], "{deltas:?}");

    // two-sided inequality suite at every stored point of every level up to 1000
    let mut g = TailFunction::initial(0.5).unwrap();
    for _ in 0..1000 {
        g = step_tail(&g, 0.5).unwrap();
        for x in 1..=g.hi() {
            let fx = g.value(x);
            let fxm1 = g.value(x - 1);
            assert!(fx <= shift_down(fxm1).unwrap() + 1e-13);
            assert!(shift_up(fx).unwrap() <= fxm1 + 1e-13);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "took {secs}s");
    println!(
        "[PASS] criterion 5: d_n = {:.3e} > {:.3e} > {:.3e}, Delta_n decreasing, inequality suite holds ({:.2}s)",
        d[0], d[1], d[2], secs
    );
}

#[test]
fn criterion_06_limit_points() {
    let start = Instant::now();
    for &a in &[0.2, 0.4, 0.7] {
        let r = find_limit_point(a, 3, &mut budget()).unwrap();
        assert!(r.entries.len() >= 3, "a={a}: {} entries", r.entries.len());
        for w in r.entries.windows(2) {
            assert!(
                w[1].distance < w[0].distance,
                "a={a}: distances not strictly decreasing: {:?}",
                r.entries
            );
        }
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 300.0, "took {secs}s");
    println!(
        "[PASS] criterion 6: 3 strictly-improving subsequence witnesses for a in {{0.2, 0.4, 0.7}} ({:.2}s)",
        secs
    );
}

#[test]
fn criterion_07_supercritical_fixed_point() {
    // evolve p=0.6 until the per-step increment drops under 1e-12
    let p = 0.6;
    let mut f = TailFunction::initial(p).unwrap();
    let (n_stop, f_stop) = loop {
        let next = step_tail(&f, p).unwrap();
        let inc = delta_n(&f, &next).unwrap();
        f = next;
        if inc < 1e-12 {
            break (f.level(), f.clone());
        }
        assert!(f.level() < 10_000, "increment never dropped under 1e-12");
    };
    let gap = (f_stop.value(1) - 4.0 / 9.0).abs();
    assert!(gap < 1e-10, "F(1) off the fixed point by {gap}");

    let fp = helix_core::engine::fixed_point_supercritical(p, 50).unwrap();
    let q = 1.0 - p;
    let mut worst: f64 = 0.0;
    for x in 1..=50 {
        let a = p * fp.value(x) + q * fp.value(x - 1);
        worst = worst.max((fp.value(x) - a * a).abs());
    }
    assert!(worst < 1e-12, "fixed-point residual {worst}");
    println!(
        "[PASS] criterion 7: p=0.6 evolution reaches the fixed point at n={} (|F(1)-4/9|={:.2e}), profile residual {:.2e}",
        n_stop, gap, worst
    );
}

#[test]
fn criterion_08_drift_equation_vs_exact_dp() {
    let start = Instant::now();
    let d = solve_drift_equation(0.3).unwrap();
    assert!(d.residual < 1e-10, "root residual {}", d.residual);

    let mut f = TailFunction::initial(0.3).unwrap();
    let mut em2000 = 0.0;
    for _ in 0..4000u32 {
        f = step_tail(&f, 0.3).unwrap();
        if f.level() == 2000 {
            em2000 = expected_max(&f);
        }
    }
    let em4000 = expected_max(&f);
    let slope = (em4000 - em2000) / 2000.0;
    let rel_speed = ((slope - d.speed_pm1) / d.speed_pm1).abs();
    let rel_rho = ((slope - d.rho01) / d.rho01).abs();
    // the DP slope selects the 2 rho - 1 scale for the +-1 scheme
    assert!(rel_speed < 0.01, "slope {slope} vs 2rho-1 {}", d.speed_pm1);
    assert!(rel_rho > 0.10, "slope should not match rho01 itself");
    println!(
        "[PASS] criterion 8: drift root rho01={:.6} (residual {:.1e}); DP slope {:.6} matches 2*rho01-1={:.6} to {:.3}% (rho01 scale off by {:.1}%) ({:.2}s)",
        d.rho01, d.residual, slope, d.speed_pm1, rel_speed * 100.0, rel_rho * 100.0,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_09_gumbel_consistency_grid() {
    let mut worst_id: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let mut p = 0.10;
    while p < 0.46 {
        let kb = bernoulli_kappa_beta(p).unwrap();
        let params = solve_gamma_star(&classify(LatticePmf::bernoulli01(p).unwrap())).unwrap();
        worst_id = worst_id.max((kb.kappa - (-params.gamma_star).exp()).abs());
        worst_id = worst_id
            .max((kb.beta - 2.0 * std::f64::consts::PI * params.sigma * params.sigma).abs());
        worst_res = worst_res.max(params.residual);
        p += 0.05;
    }
    assert!(worst_id < 1e-9, "identity gap {worst_id}");
    assert!(worst_res < 1e-10, "tilt residual {worst_res}");
    println!(
        "[PASS] criterion 9: kappa = e^-gamma* and beta = 2 pi L'' across p in {{0.10..0.45}}, worst gap {:.2e}, residual {:.2e}",
        worst_id, worst_res
    );
}

#[test]
fn criterion_10_bound_verification() {
    let start = Instant::now();
    let scheme = classify(LatticePmf::bernoulli01(0.3).unwrap());
    let mut prev = f64::INFINITY;
    let mut last = f64::NAN;
    for &n in &[128u32, 256, 512] {
        let table = verify_bound(&scheme, n, (-3.0, 3.0)).unwrap();
        assert!(
            table.max_abs_ratio_err < prev,
            "band not shrinking at n={n}: {} vs {}",
            table.max_abs_ratio_err,
            prev
        );
        prev = table.max_abs_ratio_err;
        last = table.max_abs_ratio_err;
    }
    assert!(last < 0.25, "band at n=512 is {last}");
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 60.0, "took {secs}s");
    println!(
        "[PASS] criterion 10: max|ratio-1| shrinks with n and is {:.4} < 0.25 at n=512 ({:.2}s)",
        last, secs
    );
}

#[test]
fn criterion_11_monte_carlo_vs_exact() {
    let start = Instant::now();
    let reps = 100_000u64;
    let eps = dkw_epsilon(reps, 1e-3);
    for &p in &[0.5, 0.6] {
        let sim = simulate_brw(20, p, 2024, reps).unwrap();
        let exact = evolve(20, p).unwrap();
        let mut worst: f64 = 0.0;
        for x in 0..=20i64 {
            worst = worst.max((sim.empirical_tail(x) - exact.value(x)).abs());
        }
        assert!(worst <= eps, "p={p}: sup dev {worst} > DKW {eps}");
        println!(
            "       p={p}: sup|F_hat - F| = {:.4e} within DKW band {:.4e}",
            worst, eps
        );
    }
    // mean increment at level 1 against the exact 11/16
    let sim = simulate_brw(2, 0.5, 2024, reps).unwrap();
    let inc = sim.per_level[1].mean_increment.unwrap();
    let se = (1.0f64 - 0.6875 * 0.6875).sqrt() / (reps as f64).sqrt();
    assert!(
        (inc - 0.6875).abs() < 3.0 * se,
        "increment {inc} vs 0.6875 +- {}",
        3.0 * se
    );
    // conservation is asserted per replica inside the simulator; re-check a
    // direct walk here
    let mut rng = SplitMix64::seed_from_u64(9);
    let mut ev = SamplerEvents::default();
    let mut h = LevelHistogram::root();
    for _ in 0..20 {
        h = split_level(&h, 0.5, &mut rng, &mut ev).unwrap();
        assert_eq!(h.total(), 1u128 << h.level());
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "took {secs}s");
    println!(
        "[PASS] criterion 11: empirical tails within DKW at n=20 for p in {{0.5, 0.6}}; increment {:.5} within 3 SE of 0.6875 ({:.2}s)",
        inc, secs
    );
}

// Auxiliary cross-checks that tie the acceptance quantities together.

#[test]
fn cross_check_sup_distance_function_level_two() {
    let f2 = evolve(2, 0.5).unwrap();
    let e = from_median_anchor(&f2).unwrap();
    let d = sup_distance(&f2, &e, 0);
    assert!((d - 0.140625).abs() < 1e-12);
    assert_eq!(median(&f2), 1);
}

#[test]
fn cross_check_tilt_against_drift_root() {
    // e^{-2 gamma*(+-1 law)} = kappa within 1e-9 for p in {0.1, 0.2, 0.3, 0.4}
    for &p in &[0.1, 0.2, 0.3, 0.4] {
        let g = helix_core::criticality::solve_critical_gamma(
            &ProgenySpec::bernoulli_pm1(p).unwrap(),
        )
        .unwrap();
        let kb = bernoulli_kappa_beta(p).unwrap();
        assert!(
            ((-2.0 * g).exp() - kb.kappa).abs() < 1e-9,
            "p={p}: {} vs {}",
            (-2.0 * g).exp(),
            kb.kappa
        );
    }
    println!("[PASS] cross-check: e^(-2 gamma*) = kappa on the p grid");
}
