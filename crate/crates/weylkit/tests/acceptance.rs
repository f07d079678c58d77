//! End-to-end acceptance gate. Each test exercises one criterion across
//! the public API against independent oracles or closed-form values and
//! prints a single pass/fail line (visible with `-- --nocapture`).

use rand::rngs::StdRng;
use rand::SeedableRng;
use std::f64::consts::PI;

use weylkit::oracle::{adaptive_simpson, lp_exhaustive, random_measure, random_set, random_vector};
use weylkit::{
    compactness_diagnostic, d_pl, default_ladder, dense_module_signal, dist, kappa_w,
    levy_prokhorov, measure_selection, measure_valued_path, mstar_diagnostic,
    quasi_periodic_signal, scan_values, set_valued_path, verify_dense_selection,
    verify_set_selection, BaseMetric, FiniteSet, FrequencySpec, GridMask, GridSpec, MetricKind,
    MetricValue, Role, SampledPath, ScanParams, SlackFunction, VectorPoint, VerifyParams,
};

const TRIANGLE_TOL: f64 = 1e-9;
const LP_ORACLE_TOL: f64 = 1e-9;
const SINGLE_SINE_TOL: f64 = 2e-4;
const SHIFTED_SINE_TOL: f64 = 4e-4;
const DENSITY_TOL: f64 = 1e-3;
const QUARTILE_TOL: f64 = 1e-2;
const GAP_STABILITY_STEPS: f64 = 2.0;

fn finish(id: usize, label: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("criterion {id:02} ({label}): pass");
    } else {
        println!("criterion {id:02} ({label}): fail");
        for f in &failures {
            println!("  - {f}");
        }
    }
    assert!(failures.is_empty(), "criterion {id:02} ({label}): {failures:#?}");
}

fn axiom_failures(kind: MetricKind, triples: &[[MetricValue; 3]]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, [x, y, z]) in triples.iter().enumerate() {
        let name = kind.name();
        let dxx = dist(kind, x, x).unwrap();
        if dxx != 0.0 {
            out.push(format!("{name} identity broke on triple {i}: {dxx:e}"));
        }
        let dxy = dist(kind, x, y).unwrap();
        let dyx = dist(kind, y, x).unwrap();
        if dxy.to_bits() != dyx.to_bits() {
            out.push(format!("{name} symmetry broke on triple {i}: {dxy} vs {dyx}"));
        }
        if dxy < 0.0 {
            out.push(format!("{name} negative on triple {i}: {dxy}"));
        }
        let dxz = dist(kind, x, z).unwrap();
        let dyz = dist(kind, y, z).unwrap();
        if dxz > dxy + dyz + TRIANGLE_TOL {
            out.push(format!(
                "{name} triangle broke on triple {i}: {dxz} > {dxy} + {dyz}"
            ));
        }
    }
    out
}

#[test]
fn criterion_01_metric_axioms() {
    let mut rng = StdRng::seed_from_u64(101);
    let vectors: Vec<[MetricValue; 3]> = (0..1000)
        .map(|_| {
            [0; 3].map(|_| MetricValue::Vector(random_vector(&mut rng, 3, 10.0)))
        })
        .collect();
    let sets: Vec<[MetricValue; 3]> = (0..1000)
        .map(|_| [0; 3].map(|_| MetricValue::Set(random_set(&mut rng, 2, 6, 5.0))))
        .collect();
    let measures: Vec<[MetricValue; 3]> = (0..1000)
        .map(|_| {
            [0; 3].map(|_| MetricValue::Measure(random_measure(&mut rng, 2, 3, 5.0)))
        })
        .collect();

    let mut failures = Vec::new();
    for base in [BaseMetric::Euclidean, BaseMetric::Hausdorff, BaseMetric::LevyProkhorov] {
        let triples = match base {
            BaseMetric::Euclidean => &vectors,
            BaseMetric::Hausdorff => &sets,
            BaseMetric::LevyProkhorov => &measures,
        };
        failures.extend(axiom_failures(MetricKind::base(base), triples));
        failures.extend(axiom_failures(MetricKind::truncated(base), triples));
    }
    failures.truncate(10);
    finish(1, "metric axioms", failures);
}

#[test]
fn criterion_02_levy_prokhorov_against_the_exhaustive_oracle() {
    let mut rng = StdRng::seed_from_u64(202);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let mu = random_measure(&mut rng, 2, 4, 3.0);
        let nu = random_measure(&mut rng, 2, 4, 3.0);
        let fast = levy_prokhorov(&mu, &nu).unwrap();
        let exact = lp_exhaustive(&mu, &nu).unwrap();
        let gap = (fast - exact).abs();
        worst = worst.max(gap);
        if gap > LP_ORACLE_TOL {
            failures.push(format!("pair {i}: bisection {fast} vs exhaustive {exact}"));
        }
    }
    failures.truncate(10);
    println!("  lp bisection vs oracle, worst gap {worst:.3e}");
    finish(2, "levy-prokhorov oracle agreement", failures);
}

#[test]
fn criterion_03_window_means_match_quadrature() {
    let grid = GridSpec { t0: 0.0, h: 1e-4, n: 40_000 };
    let sine = quasi_periodic_signal(
        &FrequencySpec::scalar(&[(1.0, 1.0, 0.0)], 0).unwrap(),
        &grid,
    )
    .unwrap();
    let zero = SampledPath::constant(
        grid.t0,
        grid.h,
        grid.n,
        MetricValue::Vector(VectorPoint::scalar(0.0)),
    )
    .unwrap();
    let half_shift = quasi_periodic_signal(
        &FrequencySpec::scalar(&[(1.0, 1.0, PI)], 0).unwrap(),
        &grid,
    )
    .unwrap();
    let kind = MetricKind::base(BaseMetric::Euclidean);

    // Every length-1 window of |sin 2πt| spans one full period.
    let quad = adaptive_simpson(&|t: f64| (2.0 * PI * t).sin().abs(), 0.0, 1.0, 1e-11);
    let single = d_pl(&sine, &zero, kind, 1.0, 1.0).unwrap().value;
    let double = d_pl(&sine, &half_shift, kind, 1.0, 1.0).unwrap().value;

    let mut failures = Vec::new();
    let two_over_pi = 2.0 / PI;
    if (single - two_over_pi).abs() > SINGLE_SINE_TOL {
        failures.push(format!("sine vs zero: {single} not within 2e-4 of 2/pi"));
    }
    if (single - quad).abs() > SINGLE_SINE_TOL {
        failures.push(format!("sine vs zero: {single} not within 2e-4 of quadrature {quad}"));
    }
    if (double - 2.0 * two_over_pi).abs() > SHIFTED_SINE_TOL {
        failures.push(format!("sine vs half shift: {double} not within 4e-4 of 4/pi"));
    }
    if (double - 2.0 * quad).abs() > SHIFTED_SINE_TOL {
        failures.push(format!(
            "sine vs half shift: {double} not within 4e-4 of doubled quadrature {}",
            2.0 * quad
        ));
    }
    finish(3, "window means vs quadrature", failures);
}

#[test]
fn criterion_04_masked_density_recovers_duty_cycles() {
    let mut failures = Vec::new();
    let ladder = default_ladder(256.0);
    assert_eq!(*ladder.last().unwrap(), 64.0);
    for beta in [0.1f64, 0.25, 0.5] {
        // Period-1 mask of 1000 cells, on for the first beta fraction.
        let on = (beta * 1000.0).round() as usize;
        let flags: Vec<bool> = (0..256_000).map(|i| (i % 1000) < on).collect();
        let mask = GridMask::new(0.0, 1e-3, flags).unwrap();
        let kw = kappa_w(&mask, &ladder).unwrap();
        if (kw.value - beta).abs() > DENSITY_TOL {
            failures.push(format!("duty cycle {beta}: density {} off by > 1e-3", kw.value));
        }
    }
    finish(4, "upper density of duty masks", failures);
}

#[test]
fn criterion_05_sine_almost_periods() {
    let grid = GridSpec { t0: 0.0, h: 0.01, n: 6400 };
    let sine = quasi_periodic_signal(
        &FrequencySpec::scalar(&[(1.0, 1.0, 0.0)], 0).unwrap(),
        &grid,
    )
    .unwrap();
    let params = ScanParams {
        kind: MetricKind::base(BaseMetric::Euclidean),
        p: 1.0,
        l: 8.0,
        tau_step: 0.25,
        t_max: 16.0,
    };
    let epsilon = 0.05;
    let scan = scan_values(&sine, params).unwrap();
    let aps = scan.threshold(epsilon).unwrap();

    let mut failures = Vec::new();
    for k in -16..=16i32 {
        if !aps.contains(k as f64) {
            failures.push(format!("integer {k} not detected"));
        }
    }
    match aps.inclusion_length() {
        Some(gap) if (gap - 1.0).abs() <= params.tau_step + 1e-9 => {}
        other => failures.push(format!("inclusion length {other:?} not within one step of 1")),
    }
    for (t, v) in scan.taus().iter().zip(scan.values()) {
        let mirrored = scan.value_at(-t).unwrap();
        if mirrored.to_bits() != v.to_bits() {
            failures.push(format!("scan asymmetric at tau {t}"));
        }
    }
    // Detected periods form a 2ε near-group under addition.
    for &a in &aps.taus {
        for &b in &aps.taus {
            let s = a + b;
            if s.abs() <= params.t_max + 1e-9 {
                let v = scan.value_at(s).unwrap();
                if v >= 2.0 * epsilon {
                    failures.push(format!("sum {a} + {b}: value {v} >= 2 epsilon"));
                }
            }
        }
    }
    failures.truncate(10);
    finish(5, "sine almost-period structure", failures);
}

fn two_branch_suite(grid: &GridSpec) -> (SampledPath, SampledPath) {
    // Dominant common frequency plus small incommensurate terms keeps
    // every integer a strong almost period of all constituents.
    let g = quasi_periodic_signal(
        &FrequencySpec::scalar(&[(1.0, 1.0, 0.0), (2f64.sqrt(), 0.01, 0.0)], 0).unwrap(),
        grid,
    )
    .unwrap();
    let u = FrequencySpec::scalar(&[(1.0, 0.3, 0.0), (3f64.sqrt(), 0.01, 0.0)], 0).unwrap();
    let s0 = FiniteSet::new(vec![VectorPoint::scalar(-1.0), VectorPoint::scalar(1.0)])
        .unwrap();
    let sets = set_valued_path(&s0, &u, None, grid).unwrap();
    (g, sets)
}

#[test]
fn criterion_06_set_selection_inherits_almost_periods() {
    let grid = GridSpec { t0: 0.0, h: 0.01, n: 12_800 };
    let (g, sets) = two_branch_suite(&grid);
    let params = VerifyParams { l: 8.0, tau_step: 0.25, t_max: 32.0, double_range: true };
    let (sel, report) = verify_set_selection(
        &g,
        &sets,
        &SlackFunction::identity(10.0),
        &[0.05, 0.1, 0.2],
        &params,
    )
    .unwrap();

    let mut failures = Vec::new();
    if !sel.membership_ok {
        failures.push("selection left the set".into());
    }
    if sel.bound.violations != 0 {
        failures.push(format!("{} slack bound violations", sel.bound.violations));
    }
    for c in &report.containment_curve {
        match c.eps_prime {
            Some(ep) => println!("  eps {} calibrated at eps' {} (margin {:?})", c.eps, ep, c.margin),
            None => failures.push(format!("eps {}: no calibrated eps'", c.eps)),
        }
    }
    for r in &report.inclusion_lengths {
        match (r.at_range, r.at_doubled_range) {
            (Some(near), Some(far))
                if (near - far).abs() <= GAP_STABILITY_STEPS * params.tau_step + 1e-9 => {}
            other => failures.push(format!(
                "eps {}: inclusion length unstable under range doubling: {other:?}",
                r.eps
            )),
        }
    }
    if !report.passed {
        failures.push("verification report not passed".into());
    }
    finish(6, "set selection verification", failures);
}

#[test]
fn criterion_07_measure_selection_bound() {
    let grid = GridSpec { t0: 0.0, h: 0.01, n: 6400 };
    let g = quasi_periodic_signal(
        &FrequencySpec::scalar(&[(1.0, 0.5, 0.2)], 0).unwrap(),
        &grid,
    )
    .unwrap();
    let spec = |terms: &[(f64, f64, f64)]| FrequencySpec::scalar(terms, 0).unwrap();
    let paths = [
        measure_valued_path(
            &[
                (spec(&[(0.5, 1.0, 0.0)]), spec(&[(1.0, 0.8, 0.0)])),
                (spec(&[(1.0 / 3.0, 1.0, 1.0)]), spec(&[(2f64.sqrt(), 0.6, 0.5)])),
            ],
            &grid,
        )
        .unwrap(),
        measure_valued_path(
            &[
                (spec(&[(0.5, 0.9, 0.3)]), spec(&[(1.0, 0.7, 0.0)])),
                (spec(&[(0.25, 1.1, 0.0)]), spec(&[(2f64.sqrt(), 0.5, 1.0)])),
                (spec(&[(1.0 / 3.0, 0.8, 2.0)]), spec(&[(3f64.sqrt(), 0.4, 0.2)])),
            ],
            &grid,
        )
        .unwrap(),
        measure_valued_path(
            &[
                (spec(&[(2.0, 1.0, 0.0)]), spec(&[(2.0, 0.9, 0.4)])),
                (spec(&[(0.2, 0.7, 0.9)]), spec(&[(5f64.sqrt(), 0.6, 0.0)])),
            ],
            &grid,
        )
        .unwrap(),
    ];

    let mut failures = Vec::new();
    for (pi, path) in paths.iter().enumerate() {
        for delta in [0.25, 0.5, 0.75] {
            let sel = measure_selection(&g, path, delta).unwrap();
            if sel.bound.violations != 0 {
                failures.push(format!(
                    "path {pi} delta {delta}: {} strict bound violations",
                    sel.bound.violations
                ));
            }
            if sel.fallbacks != 0 {
                failures.push(format!("path {pi} delta {delta}: {} fallbacks", sel.fallbacks));
            }
            if !sel.membership_ok {
                failures.push(format!("path {pi} delta {delta}: selection left the support"));
            }
            if sel.bound.worst_margin <= 0.0 {
                failures.push(format!(
                    "path {pi} delta {delta}: nonpositive margin {}",
                    sel.bound.worst_margin
                ));
            }
        }
    }
    finish(7, "measure selection strict bound", failures);
}

#[test]
fn criterion_08_dense_module_selection() {
    let grid = GridSpec { t0: 0.0, h: 0.01, n: 12_800 };
    let (g, sets) = two_branch_suite(&grid);
    let h = dense_module_signal(8, &grid).unwrap();
    let delta = 0.2;
    let params = VerifyParams { l: 8.0, tau_step: 0.25, t_max: 32.0, double_range: false };
    let (sel, report) =
        verify_dense_selection(&g, &sets, &h, delta, &[0.05, 0.1, 0.2], &params).unwrap();

    let mut failures = Vec::new();
    if !sel.membership_ok {
        failures.push("selection left the set".into());
    }
    if sel.bound.violations != 0 {
        failures.push(format!("{} strict bound violations", sel.bound.violations));
    }
    // Exact nearest points make the strict slack exactly delta.
    if (sel.bound.worst_margin - delta).abs() > 1e-9 {
        failures.push(format!("worst margin {} not delta", sel.bound.worst_margin));
    }
    for c in &report.containment_curve {
        match c.eps_prime {
            Some(ep) => println!("  eps {} calibrated at eps' {ep}", c.eps),
            None => failures.push(format!("eps {}: no calibrated eps'", c.eps)),
        }
    }
    if !report.passed {
        failures.push("verification report not passed".into());
    }
    finish(8, "dense-module selection verification", failures);
}

#[test]
fn criterion_09_worst_mask_diagnostic() {
    let n = 16_000;
    let h = 1e-3;
    let values: Vec<MetricValue> = (0..n)
        .map(|i| {
            MetricValue::Vector(VectorPoint::scalar((2.0 * PI * i as f64 * h).sin().abs()))
        })
        .collect();
    let f = SampledPath::new(0.0, h, values).unwrap();
    let x0 = VectorPoint::scalar(0.0);
    let ladder = [1.0, 2.0, 4.0];
    let deltas = [0.05, 0.1, 0.25, 0.5];
    let recs: Vec<_> = deltas
        .iter()
        .map(|d| mstar_diagnostic(&f, &x0, 1.0, *d, &ladder).unwrap())
        .collect();

    let mut failures = Vec::new();
    for w in recs.windows(2) {
        if w[0].worst_value > w[1].worst_value + 1e-12 {
            failures.push(format!(
                "worst value decreased: {} then {}",
                w[0].worst_value, w[1].worst_value
            ));
        }
    }
    for (d, rec) in deltas.iter().zip(&recs) {
        if rec.worst_value > rec.rho_max * d + 1e-9 {
            failures.push(format!(
                "delta {d}: {} exceeds the density budget {}",
                rec.worst_value,
                rec.rho_max * d
            ));
        }
    }
    // Top quartile of |sin| by value: mean over the window is
    // (2/pi) cos(3pi/8).
    let analytic = (2.0 / PI) * (3.0 * PI / 8.0).cos();
    let quartile = recs[2].worst_value;
    println!("  quartile mass {quartile:.5} vs analytic {analytic:.5}");
    if (quartile - analytic).abs() > QUARTILE_TOL {
        failures.push(format!("quartile mass {quartile} not within 1e-2 of {analytic}"));
    }
    finish(9, "worst-mask uniform integrability", failures);
}

#[test]
fn criterion_10_compactness_follows_from_the_diagnostics() {
    let grid64 = GridSpec { t0: 0.0, h: 0.01, n: 6400 };
    let grid128 = GridSpec { t0: 0.0, h: 0.01, n: 12_800 };
    let grid32 = GridSpec { t0: 0.0, h: 0.01, n: 3200 };
    let sine = quasi_periodic_signal(
        &FrequencySpec::scalar(&[(1.0, 1.0, 0.0)], 0).unwrap(),
        &grid64,
    )
    .unwrap();
    let (combo, sets) = two_branch_suite(&grid128);
    let dense = dense_module_signal(8, &grid64).unwrap();
    let spec = |terms: &[(f64, f64, f64)]| FrequencySpec::scalar(terms, 0).unwrap();
    let measures = measure_valued_path(
        &[
            (spec(&[(0.25, 1.0, 0.0)]), spec(&[(1.0, 0.8, 0.0), (2f64.sqrt(), 0.05, 0.3)])),
            (spec(&[(0.125, 0.8, 0.5)]), spec(&[(0.5, 0.7, 1.0), (2f64.sqrt(), 0.05, 0.9)])),
        ],
        &grid32,
    )
    .unwrap();
    let suite: [(&str, &SampledPath, f64, f64); 5] = [
        ("sine", &sine, 16.0, 64.0),
        ("two-frequency signal", &combo, 32.0, 128.0),
        ("dense-module signal", &dense, 16.0, 64.0),
        ("translated branch sets", &sets, 32.0, 128.0),
        ("softmax measures", &measures, 8.0, 32.0),
    ];

    let epsilon = 0.25;
    let mut failures = Vec::new();
    for (name, path, t_max, total) in suite {
        let base = ScanParams {
            kind: MetricKind::for_role(path.role()),
            p: 1.0,
            l: 8.0,
            tau_step: 0.25,
            t_max,
        };
        let w_pass = scan_values(path, base)
            .unwrap()
            .threshold(epsilon)
            .unwrap()
            .inclusion_length()
            .is_some();
        let decay_pass = if path.role() == Role::Vector {
            let ladder = [1.0, 2.0, 4.0];
            let x0 = VectorPoint::scalar(0.0);
            let lo = mstar_diagnostic(path, &x0, 1.0, 0.02, &ladder).unwrap();
            let hi = mstar_diagnostic(path, &x0, 1.0, 0.1, &ladder).unwrap();
            lo.worst_value <= lo.rho_max * 0.02 + 1e-9
                && hi.worst_value <= hi.rho_max * 0.1 + 1e-9
                && lo.worst_value <= hi.worst_value + 1e-12
        } else {
            true
        };
        // The suite is built almost periodic, so the premises must hold;
        // a vacuous implication would prove nothing.
        if !w_pass {
            failures.push(format!("{name}: no relatively dense almost periods"));
            continue;
        }
        if !decay_pass {
            failures.push(format!("{name}: worst-mask decay failed"));
            continue;
        }
        let cond1 = scan_values(
            path,
            ScanParams { kind: MetricKind::truncated_for_role(path.role()), ..base },
        )
        .unwrap()
        .threshold(epsilon)
        .unwrap()
        .inclusion_length()
        .is_some();
        let compactness =
            compactness_diagnostic(path, 0.3, 0.1, &default_ladder(total), 64).unwrap();
        let cond2 =
            compactness.witness.is_some() && compactness.density_of_far_set < 0.1;
        if !(cond1 && cond2) {
            failures.push(format!(
                "{name}: counterexample (truncated scan {cond1}, witness cover {cond2}, far density {})",
                compactness.density_of_far_set
            ));
        } else {
            println!(
                "  {name}: witness size {} with far density {}",
                compactness.witness.as_ref().map_or(0, Vec::len),
                compactness.density_of_far_set
            );
        }
    }
    finish(10, "compactness chain over the suite", failures);
}
