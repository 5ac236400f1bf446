//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its runtime (visible with `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use qsd_lab::discrimination::{
    bounds_report, chernoff, error_probability, hellstrom, tensor_power_study,
};
use qsd_lab::dynamics::{
    autocorrelation, bound_sweep, discretized_ac_model, evolve_ensemble, qubit_example,
    solvability_verdict, wiener_average, SpectralProfile, SweepQuantity, TimeGrid, UnitaryFamily,
    Verdict, WeightProfile,
};
use qsd_lab::operator::basis_vector;
use qsd_lab::random::SeedStream;
use qsd_lab::scenario::{run_scenario, Scenario};
use qsd_lab::states::{DensityOperator, Ensemble};
use qsd_lab::truncation::{
    fidelity_convergence_study, geometric_spectrum_state, kb_convergence_study,
};
use qsd_lab::uncountable::{
    separation_harness, fidelity_inequality_suite, n_mixture, SeparationHarnessParams, DensitySpec,
    QuadratureScheme,
};

const PI: f64 = std::f64::consts::PI;

fn pass(criterion: usize, what: &str, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("ACCEPTANCE {criterion}: PASS — {what} ({elapsed:.2} s, budget {budget_s} s)");
    assert!(
        elapsed < budget_s,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2} s ≥ {budget_s} s"
    );
}

fn ket_plus() -> Vec<Complex64> {
    let s = 1.0 / 2f64.sqrt();
    vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)]
}

/// 1. Qubit counterexample: generic evolution matches the closed form on a
///    2001-point grid over [0, 10π]; the error is π-periodic and recurs to
///    at least 0.45 in every period.
#[test]
fn criterion_1_qubit_counterexample() {
    let started = Instant::now();
    let grid = TimeGrid::new(0.0, 10.0 * PI, 2001);
    let times = grid.values();
    let family = UnitaryFamily::new(qsd_lab::dynamics::pauli_x(), vec![0.0, 1.0]).unwrap();
    let zero = DensityOperator::pure(&basis_vector(2, 0)).unwrap();

    let mut evolved_errors = Vec::with_capacity(times.len());
    let mut max_route_dev = 0.0_f64;
    for &t in &times {
        // Route A: generic unitary evolution.
        let ensemble = evolve_ensemble(&family, &[zero.clone(), zero.clone()], &[0.5, 0.5], t).unwrap();
        let (e_evolved, _) = hellstrom(0.5, ensemble.state(0), 0.5, ensemble.state(1)).unwrap();
        // Route B: the closed-form construction.
        let e_closed = qubit_example(t, 0.0, 1.0).unwrap().error;
        max_route_dev = max_route_dev.max((e_evolved - e_closed).abs());
        evolved_errors.push(e_evolved);
    }
    assert!(max_route_dev <= 1e-10, "routes disagree by {max_route_dev:e}");

    // Periodicity: π is exactly 200 grid steps.
    let step_per_period = 200;
    for k in 0..(times.len() - step_per_period) {
        let dev = (evolved_errors[k] - evolved_errors[k + step_per_period]).abs();
        assert!(dev <= 1e-9, "periodicity violated at index {k}: {dev:e}");
    }

    // Non-decay: the error climbs back to at least 0.45 in every period.
    for period in 0..10 {
        let (lo, hi) = (period as f64 * PI, (period + 1) as f64 * PI);
        let peak = times
            .iter()
            .zip(&evolved_errors)
            .filter(|(t, _)| **t >= lo && **t < hi)
            .map(|(_, e)| *e)
            .fold(0.0_f64, f64::max);
        assert!(peak >= 0.45, "period {period} peaked at only {peak}");
    }

    pass(1, "qubit counterexample non-decay and periodicity", started, 5.0);
}

/// 2. Bound ordering on 200 seeded random ensembles (dims 2-6, N 2-4), with
///    the Qiu/Helstrom collapse and projective-POVM optimality spot-checks
///    at N = 2.
#[test]
fn criterion_2_bound_ordering() {
    let started = Instant::now();
    let mut stream = SeedStream::new(2024);
    let mut n2_count = 0;
    for trial in 0..200 {
        let rng = &mut stream.rng();
        let dim = 2 + trial % 5;
        let n = 2 + trial % 3;
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let members: Vec<_> = raw
            .iter()
            .map(|w| {
                let rank = rng.gen_range(1..=dim);
                (w / total, qsd_lab::random::random_density(dim, rank, rng))
            })
            .collect();
        let ensemble = Ensemble::new(members).unwrap();
        let report = bounds_report(&ensemble).unwrap();
        let pgm_error = report.pgm_error.expect("pgm is defined on full-support mixtures");

        assert!(report.montanaro_lower <= pgm_error + 1e-9, "trial {trial}");
        assert!(report.qiu_lower <= pgm_error + 1e-9, "trial {trial}");
        assert!(pgm_error <= report.kb_upper + 1e-9, "trial {trial}");

        if n == 2 {
            n2_count += 1;
            let exact = report.hellstrom_exact.unwrap();
            assert!(
                (report.qiu_lower - exact).abs() <= 1e-10,
                "Qiu did not collapse to Helstrom on trial {trial}"
            );
            // No projective measurement can beat the Helstrom optimum.
            for _ in 0..100 {
                let povm = qsd_lab::random::random_projective_povm(dim, rng);
                let e = error_probability(&ensemble, &povm).unwrap();
                assert!(exact <= e + 1e-9, "random POVM beat Helstrom on trial {trial}");
            }
        }
    }
    assert!(n2_count >= 60);
    pass(2, "bound ordering on 200 random ensembles", started, 30.0);
}

/// 3. Chernoff sandwich for the pure pair |0⟩, |+⟩: ξ = ln 2; the finite-n
///    rate stays within the sandwich and approaches ξ; explicit tensor
///    states confirm the closed form for n ≤ 6.
#[test]
fn criterion_3_chernoff_sandwich() {
    let started = Instant::now();
    let zero = basis_vector(2, 0);
    let plus = ket_plus();

    let base = Ensemble::pair(
        0.5,
        DensityOperator::pure(&zero).unwrap(),
        0.5,
        DensityOperator::pure(&plus).unwrap(),
    )
    .unwrap();
    let xi = chernoff(&base).unwrap().ensemble_exponent;
    assert!((xi - 2f64.ln()).abs() <= 1e-9, "ensemble exponent {xi}");

    let study = tensor_power_study(0.5, &zero, 0.5, &plus, 20, 6).unwrap();
    let mut explicit_checked = 0;
    for row in &study.rows {
        let rate = row.rate.expect("error is positive for overlapping states");
        assert!(rate >= xi / 3.0 - 1e-12, "rate below ξ/3 at n = {}", row.n);
        if let Some(explicit) = row.explicit_error {
            assert!((explicit - row.error).abs() <= 1e-9, "explicit mismatch at n = {}", row.n);
            explicit_checked += 1;
        }
    }
    assert_eq!(explicit_checked, 6);
    let rate_20 = study.rows.last().unwrap().rate.unwrap();
    assert!(
        (rate_20 - xi).abs() <= 3.0 * 2f64.ln() / 20.0,
        "rate at n = 20 missed the sandwich: {rate_20} vs ξ = {xi}"
    );

    pass(3, "Chernoff exponent and tensor-power sandwich", started, 10.0);
}

/// 4. Dichotomy evidence on the d = 256 discretized model: the 3-branch KB
///    sweep decays below 0.1 on the plateau window (fully solvable
///    evidence); an eigenvector reference keeps |a| ≡ 1 and the Montanaro
///    sweep recurs (not fully solvable evidence).
#[test]
fn criterion_4_decay_dichotomy_evidence() {
    let started = Instant::now();
    let model = discretized_ac_model(256, (0.0, 1.0), WeightProfile::Uniform);
    let window = (50.0, (0.5 * model.recurrence_time).min(500.0));
    assert!(window.1 == 500.0, "recurrence time {} should exceed 1000", model.recurrence_time);

    let family = UnitaryFamily::new(model.generator.clone(), vec![0.0, 1.0, 2.0]).unwrap();
    let weights = [1.0 / 3.0; 3];
    let grid = TimeGrid::new(0.0, 520.0, 2001);

    let pure = DensityOperator::pure(&model.psi).unwrap();
    let kb_sweep = bound_sweep(&family, &vec![pure; 3], &weights, &grid, SweepQuantity::Kb).unwrap();
    let kb_max_on_window = kb_sweep
        .grid
        .iter()
        .zip(&kb_sweep.values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(_, v)| *v)
        .fold(0.0_f64, f64::max);
    assert!(kb_max_on_window <= 0.1, "KB peaked at {kb_max_on_window} on the window");
    let verdict = solvability_verdict(&kb_sweep, 0.1, window).unwrap();
    assert_eq!(verdict.verdict, Verdict::FullySolvableEvidence);

    // Point-spectrum reference: an eigenvector of the generator.
    let eigvec = basis_vector(256, 128);
    for t in [1.0, 75.0, 333.0] {
        let a = autocorrelation(&model.generator, &eigvec, t).unwrap();
        assert!((a.norm() - 1.0).abs() <= 1e-12, "|a| should be 1 at t = {t}");
    }
    let point = DensityOperator::pure(&eigvec).unwrap();
    let montanaro_sweep =
        bound_sweep(&family, &vec![point; 3], &weights, &grid, SweepQuantity::Montanaro).unwrap();
    let verdict = solvability_verdict(&montanaro_sweep, 0.1, window).unwrap();
    assert_eq!(verdict.verdict, Verdict::NotFullySolvableEvidence);

    pass(4, "dichotomy evidence on the d = 256 model", started, 60.0);
}

/// 5. Wiener time averages converge to the point-mass sums.
#[test]
fn criterion_5_wiener_averages() {
    let started = Instant::now();
    let sigma_z = qsd_lab::operator::ComplexMatrix::diag(&[1.0, -1.0]);
    let w = wiener_average(&sigma_z, &ket_plus(), 1000.0, 20_001).unwrap();
    assert!((w - 0.5).abs() <= 0.01, "σ_z/|+⟩ average {w}");

    let model = discretized_ac_model(256, (0.0, 1.0), WeightProfile::Uniform);
    let profile = SpectralProfile::new(&model.generator, &model.psi).unwrap();
    let expected = profile.point_mass_sum();
    assert!((expected - 1.0 / 256.0).abs() < 1e-15);
    let w = wiener_average(&model.generator, &model.psi, 2000.0, 40_001).unwrap();
    assert!((w - expected).abs() <= 0.01, "AC model average {w} vs {expected}");

    pass(5, "Wiener averages", started, 10.0);
}

/// 6. N-mixture rewriting: regrouping the quadrature nodes of the full
///    mixture into branches reproduces it to 1e-10 in trace norm at 20
///    sampled times.
#[test]
fn criterion_6_nmixture_rewriting() {
    let started = Instant::now();
    let model = discretized_ac_model(256, (0.0, 1.0), WeightProfile::Uniform);
    let spec = DensitySpec::Uniform { a: 0.0, b: 1.0 };
    let scheme = QuadratureScheme::for_spec(&spec, 128).unwrap();
    let partition = [(0.0, 0.5), (0.5, 1.0)];

    for k in 0..20 {
        let t = 2.5 * k as f64;
        let nm = n_mixture(&spec, &scheme, &partition, &model.generator, &model.psi, t).unwrap();
        let residual = nm.reconstruction_residual();
        assert!(residual <= 1e-10, "rewriting residual {residual:e} at t = {t}");
        for rho in nm.branch_states() {
            rho.validate().unwrap();
        }
    }

    pass(6, "N-mixture rewriting at 20 times", started, 30.0);
}

/// 7. Separation harness at c = 50 on the d = 256 model: a nonempty window
///    with both branch purities ≥ 0.95 and overlap ≤ 0.01, and the direct
///    fidelity honoring the super-fidelity consequence F ≤ 0.06.
#[test]
fn criterion_7_separation_harness() {
    let started = Instant::now();
    let model = discretized_ac_model(256, (0.0, 1.0), WeightProfile::Uniform);
    let params = SeparationHarnessParams {
        c: 50.0,
        eps1: 0.05,
        eps2: 0.01,
        nodes_per_component: 128,
        t_search: 10.0,
        fidelity_samples: 3,
    };
    let report = separation_harness(&model.generator, &model.psi, &params).unwrap();

    assert!(report.pass, "harness failed: {report:?}");
    assert!(report.t_prime < report.t_window, "window is empty");
    assert!(report.purity_min >= 0.95 - 1e-9, "purity floor {}", report.purity_min);
    assert!(report.overlap_max <= 0.01, "overlap {}", report.overlap_max);
    assert!(report.superfid_bound <= 0.06 + 1e-9);
    assert_eq!(report.fidelity_samples.len(), 3);
    for (t, f) in &report.fidelity_samples {
        assert!(*f <= 0.06 + 1e-9, "direct fidelity {f} at t = {t} broke the bound");
    }

    pass(7, "separation harness with direct fidelity check", started, 120.0);
}

/// 8. Fidelity inequality suite: 100 seeded quadrature-mixture instances,
///    all four inequality gaps nonnegative.
#[test]
fn criterion_8_fidelity_inequalities() {
    let started = Instant::now();
    let report = fidelity_inequality_suite(100, 88).unwrap();
    assert!(report.min_strong_concavity >= -1e-9, "{report:?}");
    assert!(report.min_mixture_vs_point >= -1e-9, "{report:?}");
    assert!(report.min_sqrt_weight_dominance >= -1e-9, "{report:?}");
    assert!(report.min_super_fidelity_gap >= -1e-9, "{report:?}");
    pass(8, "fidelity inequality suite over 100 instances", started, 60.0);
}

/// 9. Truncation convergence on dim-12 geometric spectra: deviations inside
///    the √tail bounds and nonincreasing; the KB deviation vanishes at full
///    rank; the displacement bound decreases to zero.
#[test]
fn criterion_9_truncation_convergence() {
    let started = Instant::now();

    // Scalar-series oracle for the normalized geometric tail at rank d.
    let tail_oracle = |rank: usize| -> f64 {
        let lam: Vec<f64> = (1..=12).map(|k| 0.5f64.powi(k)).collect();
        let total: f64 = lam.iter().sum();
        lam.iter().skip(rank).sum::<f64>() / total
    };

    let rho = geometric_spectrum_state(12, 0.5, 101);
    let sigma = geometric_spectrum_state(12, 0.5, 202);
    let ranks: Vec<usize> = (1..=12).collect();

    let study = fidelity_convergence_study(&rho, &sigma, &ranks).unwrap();
    for row in &study.rows {
        let dev = row.fidelity_dev.unwrap();
        assert!(dev <= row.bound + 1e-9, "rank {}: {dev} vs bound {}", row.rank, row.bound);
        assert!((row.tail - tail_oracle(row.rank)).abs() <= 1e-10);
        assert!((row.alpha - (1.0 - row.tail)).abs() <= 1e-12);
    }
    for w in study.rows.windows(2) {
        assert!(
            w[1].fidelity_dev.unwrap() <= w[0].fidelity_dev.unwrap() + 1e-9,
            "deviation increased between ranks {} and {}",
            w[0].rank,
            w[1].rank
        );
    }
    assert!(study.rows.last().unwrap().fidelity_dev.unwrap() <= 1e-9);

    let ensemble = Ensemble::pair(0.5, rho, 0.5, sigma).unwrap();
    let kb_study = kb_convergence_study(&ensemble, &ranks).unwrap();
    assert!(kb_study.rows.last().unwrap().kb_dev.unwrap() <= 1e-9);
    for w in kb_study.rows.windows(2) {
        assert!(w[1].bound <= w[0].bound + 1e-12, "displacement bound not decreasing");
    }
    assert!(kb_study.rows.last().unwrap().bound <= 1e-12);
    // Displacement bound is N Σ p_i tail_i = 2 · tail for this equal pair.
    for row in &kb_study.rows {
        assert!((row.bound - 2.0 * tail_oracle(row.rank)).abs() <= 1e-9);
    }

    pass(9, "truncation convergence studies", started, 10.0);
}

/// 10. Determinism: re-running scenarios with fixed seeds yields
///     byte-identical JSON artifacts.
#[test]
fn criterion_10_determinism() {
    let started = Instant::now();
    let dir = std::env::temp_dir().join("qsd-lab-acceptance-determinism");
    std::fs::create_dir_all(&dir).unwrap();

    let scenarios = [
        format!(
            r#"{{"kind": "inequality-suite", "out_prefix": "{}", "seed": 3, "trials": 12}}"#,
            dir.join("ineq").display()
        ),
        format!(
            r#"{{"kind": "truncation", "out_prefix": "{}", "seed": 5, "dim": 12, "ranks": [2, 4, 8, 12], "study": "kb"}}"#,
            dir.join("trunc").display()
        ),
        format!(
            r#"{{"kind": "urm-sweep", "out_prefix": "{}", "seed": 0,
                "model": {{"kind": "qubit-example", "x1": 0.0, "x2": 1.0}},
                "grid": {{"start": 0.0, "stop": 31.41592653589793, "points": 501}},
                "quantity": "hellstrom"}}"#,
            dir.join("sweep").display()
        ),
    ];

    for raw in &scenarios {
        let scenario: Scenario = serde_json::from_str(raw).unwrap();
        scenario.validate().unwrap();
        let first = run_scenario(&scenario, None).unwrap();
        let json1 = std::fs::read(&first.json_path).unwrap();
        let csv1 = std::fs::read(&first.csv_path).unwrap();
        let second = run_scenario(&scenario, None).unwrap();
        assert_eq!(json1, std::fs::read(&second.json_path).unwrap(), "JSON not byte-identical");
        assert_eq!(csv1, std::fs::read(&second.csv_path).unwrap(), "CSV not byte-identical");
    }

    std::fs::remove_dir_all(&dir).ok();
    pass(10, "byte-identical artifacts on re-run", started, 30.0);
}
