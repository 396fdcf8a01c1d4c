use breather_core::fields::*;
use breather_core::verify::*;
use breather_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const NAT: PhysParams = PhysParams::NATURAL;

fn study() -> StencilConfig {
    StencilConfig::new(0.02, 3).unwrap()
}

/// 20 events with radii stratified over [0.2, 10] and random directions.
fn stratified_points(seed: u64) -> Vec<SpacetimePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 20;
    (0..n)
        .map(|i| {
            let width = (10.0 - 0.2) / n as f64;
            let r = 0.2 + width * (i as f64 + rng.gen::<f64>());
            let cos_theta: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
            SpacetimePoint::new(
                rng.gen_range(0.0..2.0 * PI),
                r * sin_theta * phi.cos(),
                r * sin_theta * phi.sin(),
                r * cos_theta,
            )
        })
        .collect()
}

fn field(spec: BreatherSpec, kind: FieldKind) -> BreatherField {
    BreatherField::new(spec, NAT, kind).unwrap()
}

#[test]
fn plane_wave_residual_is_pure_truncation_error() {
    let plane = |p: &SpacetimePoint| -> Result<Complex64> { Ok(Complex64::from_polar(1.0, -p.t)) };
    let report = kg_residual(&plane, &SpacetimePoint::new(0.7, 0.1, 0.2, 0.3), &study(), &NAT).unwrap();
    // (2 - 2 cos h)/h² - 1 = -h²/12 + O(h⁴)
    for level in &report.per_level {
        let expected = (2.0 - 2.0 * level.h.cos()) / (level.h * level.h) - 1.0;
        assert!((level.max_abs - expected.abs()).abs() < 1e-6 * level.h * level.h);
    }
    assert!(report.orders_within(1.8, 2.2), "{:?}", report.orders);
}

#[test]
fn reference_point_converges() {
    let p = SpacetimePoint::new(0.3, 1.2, 0.4, -0.7);
    let psi = field(BreatherSpec::new(0.5), FieldKind::Psi);
    let action = field(BreatherSpec::new(0.5), FieldKind::Action);
    for report in [kg_residual(&psi, &p, &study(), &NAT).unwrap(), qhj_residual(&action, &p, &study(), &NAT).unwrap()] {
        assert!(report.at_spacing(0.01).unwrap() <= 1e-3);
        assert!(report.orders_within(1.8, 2.2), "{:?}", report.orders);
    }
}

#[test]
fn spinning_modes_converge_at_every_point() {
    let points = stratified_points(7);
    for (l, n) in [(1, 0), (1, 1), (2, 1), (3, 2)] {
        let spec = BreatherSpec::new(0.5).with_mode(ModeIndex::new(l, n).unwrap());
        let psi = field(spec, FieldKind::Psi);
        for report in residual_batch(&points, |p| kg_residual(&psi, p, &study(), &NAT)) {
            let report = report.unwrap();
            assert!(report.at_spacing(0.01).unwrap() <= 1e-3, "(l, n) = ({l}, {n})");
            assert!(report.orders_within(1.8, 2.2), "(l, n) = ({l}, {n}): {:?}", report.orders);
        }
    }
}

#[test]
fn moving_breather_satisfies_klein_gordon() {
    let spec = BreatherSpec::new(0.5).with_mode(ModeIndex::new(2, -1).unwrap()).with_boost(Boost::new(0.6));
    let psi = field(spec, FieldKind::Psi);
    for p in stratified_points(11).iter().take(6) {
        let report = kg_residual(&psi, p, &study(), &NAT).unwrap();
        assert!(report.orders_within(1.8, 2.2), "{p:?}: {:?}", report.orders);
    }
}

#[test]
fn detuned_modes_plateau() {
    let points = stratified_points(3);
    for detuning in [Detuning { radial_factor: 1.7, kappa_scale: 1.0 }, Detuning { radial_factor: 3f64.sqrt(), kappa_scale: 1.1 }] {
        let psi = field(BreatherSpec::new(0.5).with_detuning(detuning), FieldKind::Psi);
        let reports: Vec<_> = residual_batch(&points, |p| kg_residual(&psi, p, &study(), &NAT))
            .into_iter()
            .collect::<Result<_>>()
            .unwrap();
        let all = ResidualReport::aggregate(&reports).unwrap();
        assert!(all.max_abs > 1e-2, "{detuning:?}: {}", all.max_abs);
        assert!(all.convergence_order.abs() < 0.2, "{detuning:?}: {:?}", all.orders);
    }
}

#[test]
fn wave_and_action_residuals_are_equivalent() {
    // with Ψ = e^{iS/ħ}: □Ψ + κ²Ψ = -(Ψ/ħ²)·(QHJ residual), up to truncation
    let spec = BreatherSpec::new(Complex64::new(0.4, 0.3)).with_mode(ModeIndex::new(1, 1).unwrap());
    let psi = field(spec, FieldKind::Psi);
    let action = field(spec, FieldKind::Action);
    for p in stratified_points(5).iter().take(8) {
        let h = 0.005;
        let kg = kg_residual_at(&psi, p, h, &NAT).unwrap();
        let qhj = qhj_residual_at(&action, p, h, &NAT).unwrap();
        let value = psi.eval(p).unwrap();
        assert!((kg + value * qhj).norm() < 1e-3 * (1.0 + value.norm()), "{p:?}: {kg} vs {}", -value * qhj);
    }
}

#[test]
fn classical_action_residual_vanishes() {
    let (e, p) = kinematics::energy_momentum_classical(Boost::new(0.6), &NAT).unwrap();
    let classical = move |q: &SpacetimePoint| -> Result<Complex64> { Ok(action_classical(q, e, p)) };
    let report = qhj_residual(&classical, &SpacetimePoint::ORIGIN, &study(), &NAT).unwrap();
    assert!(report.per_level.iter().all(|l| l.max_abs <= 1e-12), "{:?}", report.per_level);
}

#[test]
fn exact_time_derivative_cross_check() {
    let alpha = Complex64::new(0.5, 0.0);
    let action = field(BreatherSpec::new(alpha), FieldKind::Action);
    let k = 3f64.sqrt();
    for p in stratified_points(9) {
        let j0 = (k * p.radius()).sin() / (k * p.radius());
        let u = alpha * Complex64::from_polar(1.0, -p.t) * j0;
        let exact = -1.0 - Complex64::i() * (-Complex64::i() * u) / (1.0 + u);
        let mut errors = Vec::new();
        for h in [0.02, 0.01, 0.005] {
            let em = energy_momentum_field(&action, &p, &StencilConfig::new(h, 2).unwrap(), &NAT).unwrap();
            errors.push((-em.energy - exact).norm());
        }
        let order = (errors[1] / errors[2]).log2();
        assert!(errors[1] < 1e-4, "{p:?}: {errors:?}");
        assert!((1.8..=2.2).contains(&order) || errors[2] < 1e-10, "{p:?}: {errors:?}");
    }
}

fn potentials(p: &SpacetimePoint) -> Result<ExternalFieldSample> {
    Ok(ExternalFieldSample {
        u: 0.3 * (0.7 * p.t).sin() + 0.1 * p.x * p.y,
        a: [0.2 * (p.y + p.t).cos(), -0.15 * p.z * p.x, 0.05 * (p.x * p.t).sin()],
    })
}

#[test]
fn field_coupled_residual_matches_transcription() {
    // independent transcription with closed-form derivatives of S
    let alpha = 0.5;
    let action = field(BreatherSpec::new(alpha), FieldKind::Action);
    let k = 3f64.sqrt();
    for p in stratified_points(13).iter().take(10) {
        let r = p.radius();
        let kr = k * r;
        let j0 = kr.sin() / kr;
        let dj0 = k * (kr.cos() / kr - kr.sin() / (kr * kr));
        let d2j0 = -k * k * j0 - 2.0 / r * dj0;
        let e = Complex64::from_polar(alpha, -p.t);
        let u = e * j0;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        // S = -t - i ln(1 + u)
        let s_t = -1.0 - i * (-i * u) / (one + u);
        let grad_u: Vec<Complex64> = [p.x, p.y, p.z].iter().map(|c| e * dj0 * c / r).collect();
        let grad_s: Vec<Complex64> = grad_u.iter().map(|g| -i * g / (one + u)).collect();
        // □ln(1+u) = □u/(1+u) - ((u_t)² - |∇u|²)/(1+u)²
        let lap_u = e * (d2j0 + 2.0 / r * dj0);
        let u_t = -i * u;
        let u_tt = -u;
        let box_u = u_tt - lap_u;
        let grad2: Complex64 = grad_u.iter().map(|g| g * g).sum();
        let box_log = box_u / (one + u) - (u_t * u_t - grad2) / ((one + u) * (one + u));
        let box_s = -i * box_log;
        let ext = potentials(p).unwrap();
        let temporal = s_t + ext.u;
        let spatial: Complex64 = grad_s.iter().zip(ext.a).map(|(g, a)| (g - a) * (g - a)).sum();
        let direct = temporal * temporal - spatial - 1.0 - i * box_s;

        let numeric = qhj_field_residual_at(&action, &potentials, p, 0.005, &NAT).unwrap();
        assert!(direct.norm() > 1e-3, "potentials should leave a residual");
        assert!((numeric - direct).norm() < 1e-3, "{p:?}: {numeric} vs {direct}");
    }
}

#[test]
fn zero_potentials_reduce_to_free_residual() {
    let action = field(BreatherSpec::new(0.5), FieldKind::Action);
    let zero = |_: &SpacetimePoint| -> Result<ExternalFieldSample> { Ok(ExternalFieldSample::default()) };
    for p in stratified_points(17) {
        assert_eq!(
            qhj_field_residual_at(&action, &zero, &p, 0.01, &NAT).unwrap(),
            qhj_residual_at(&action, &p, 0.01, &NAT).unwrap()
        );
    }
}

#[test]
fn exact_gauge_pair_satisfies_lorenz_condition() {
    // U = f(t), A = -(x/c) f'(t) x̂
    let f = |t: f64| (1.3 * t).sin();
    let df = |t: f64| 1.3 * (1.3 * t).cos();
    let pair = move |p: &SpacetimePoint| -> Result<ExternalFieldSample> {
        Ok(ExternalFieldSample { u: f(p.t), a: [-p.x * df(p.t), 0.0, 0.0] })
    };
    for p in stratified_points(19).iter().take(8) {
        let report = lorenz_gauge_residual(&pair, p, &study(), &NAT).unwrap();
        assert!(report.max_abs < 1e-4);
        if report.per_level[0].max_abs > 1e-9 {
            assert!(report.orders_within(1.8, 2.2), "{p:?}: {:?}", report.orders);
        }
    }
}

#[test]
fn period_average_is_rest_energy() {
    for alpha in [0.1, 0.5, 0.9] {
        let action = field(BreatherSpec::new(alpha), FieldKind::Action);
        for r in [0.3, 0.7, 2.0] {
            let e = average_energy(&action, [r, 0.0, 0.0], &NAT, 256).unwrap();
            assert!((e - 1.0).norm() <= 1e-10, "alpha={alpha} r={r}: {e}");
        }
    }
    let near_origin = field(BreatherSpec::new(0.9), FieldKind::Action);
    let e = average_energy(&near_origin, [1e-3, 0.0, 0.0], &NAT, 1024).unwrap();
    assert!((e - 1.0).norm() <= 1e-8, "{e}");
}

#[test]
fn period_average_ignores_the_start_time() {
    let params = PhysParams::new(2.0, 3.0, 0.5).unwrap();
    let spec = BreatherSpec::new(0.5).with_mode(ModeIndex::new(1, 1).unwrap());
    let action = BreatherField::new(spec, params, FieldKind::Action).unwrap();
    let base = average_energy_from(&action, 0.1, 0.05, 0.08, 0.0, &params, 256).unwrap();
    assert!((base - params.rest_energy()).norm() <= 1e-10 * params.rest_energy());
    for t0 in [0.013, 0.37, 5.0] {
        let shifted = average_energy_from(&action, 0.1, 0.05, 0.08, t0, &params, 256).unwrap();
        assert!((shifted - base).norm() <= 1e-12 * params.rest_energy(), "t0={t0}");
    }
}

#[test]
fn far_field_is_monochromatic() {
    let action = field(BreatherSpec::new(0.5), FieldKind::Action);
    let far = far_field_spectrum(&action, [50.0, 0.0, 0.0], &NAT, 16, 64).unwrap();
    assert!((far.peak_frequency - 1.0).abs() <= far.bin_width);
    assert!(far.harmonic_ratio <= 1e-4, "{}", far.harmonic_ratio);
    let near = far_field_spectrum(&action, [0.5, 0.0, 0.0], &NAT, 16, 64).unwrap();
    assert!(near.harmonic_ratio >= 100.0 * far.harmonic_ratio);
    let flat = field(BreatherSpec::new(0.0), FieldKind::Action);
    assert!(far_field_spectrum(&flat, [1.0, 0.0, 0.0], &NAT, 16, 64).unwrap().zero_signal);
}

#[test]
fn dispersion_defect_decays_into_the_far_field() {
    let action = field(BreatherSpec::new(0.5), FieldKind::Action);
    let k = 3f64.sqrt();
    let cfg = StencilConfig::default();
    let near = dispersion_defect_envelope(&action, 5.0, [1.0, 0.0, 0.0], k, &cfg, &NAT, 32).unwrap();
    let far = dispersion_defect_envelope(&action, 50.0, [1.0, 0.0, 0.0], k, &cfg, &NAT, 32).unwrap();
    assert!(far * 10.0 <= near, "{near} vs {far}");
    let classical = |q: &SpacetimePoint| -> Result<Complex64> { Ok(Complex64::new(-q.t, 0.0)) };
    let em = energy_momentum_field(&classical, &SpacetimePoint::ORIGIN, &cfg, &NAT).unwrap();
    assert!(em.dispersion_defect(&NAT).norm() < 1e-12);
}

#[test]
fn quantized_trains_satisfy_the_boundary_conditions() {
    let d = 2.0 * PI;
    let cfg = StencilConfig::default();
    let mismatch = |p: f64| {
        let boost = Boost::from_momentum(p, &NAT).unwrap();
        let spec = BreatherSpec::new(0.5).with_boost(boost).with_train(d, 64);
        let action = field(spec, FieldKind::ActionTrain);
        boundary_condition_check(&action, d, 0.0, 0.0, 0.0, &cfg, &NAT).unwrap()
    };
    let on = mismatch(1.0);
    let off = mismatch(1.3);
    // truncation budget α·C/K with C = 2/(√3 d)
    let budget = 0.5 * 2.0 / (3f64.sqrt() * d) / 64.0 * 4.0;
    assert!(on.0 <= budget && on.1 <= budget, "{on:?} vs {budget}");
    assert!(off.1 >= 100.0 * on.1, "{off:?} vs {on:?}");
}
