use finite_ibm::sde::{check_ordering, simulate, simulate_path, IntegratorConfig};
use finite_ibm::{LabelScheme, LabeledState, ModelSpec, RngStream};

fn line(xs: &[f64]) -> LabeledState {
    LabeledState::from_ordered(1, xs.to_vec(), LabelScheme::AscendingValue).unwrap()
}

#[test]
fn two_particles_never_swap() {
    for beta in [1.0, 2.0, 4.0] {
        let cfg = IntegratorConfig {
            dt: 1e-4,
            t_final: 0.1,
            dt_record: 1e-3,
            ..IntegratorConfig::default()
        };
        let x0 = vec![line(&[-0.05, 0.05]); 1000];
        let ens = simulate(&ModelSpec::airy(2, beta), &x0, &cfg, 31).unwrap();
        assert_eq!(ens.ordering_violations, Some(0), "beta = {beta}");
        assert_eq!(check_ordering(&ens).unwrap(), 0);
    }
}

#[test]
fn airy_ten_particles_keep_order() {
    let spec = ModelSpec::airy(10, 2.0);
    let x0: Vec<f64> = (0..10).map(|k| -12.0 + 1.3 * k as f64).collect();
    let cfg = IntegratorConfig {
        dt: 1e-4,
        t_final: 0.2,
        dt_record: 1e-2,
        ..IntegratorConfig::default()
    };
    let ens = simulate(&spec, &vec![line(&x0); 500], &cfg, 8).unwrap();
    assert_eq!(ens.ordering_violations, Some(0));
}

#[test]
fn ornstein_uhlenbeck_mean_and_variance() {
    // a lone Ginibre particle solves dX = -X dt + dB in each coordinate:
    // E X_1 = x0 e^{-1}, Var X_1 = (1 - e^{-2}) / 2
    let spec = ModelSpec::ginibre(1);
    let x0 = [1.5, -0.5];
    let start = LabeledState::from_ordered(2, x0.to_vec(), LabelScheme::AscendingModulus).unwrap();
    let cfg = IntegratorConfig {
        dt: 1e-3,
        t_final: 1.0,
        dt_record: 1.0,
        ..IntegratorConfig::default()
    };
    let n = 10_000;
    let ens = simulate(&spec, &vec![start; n], &cfg, 77).unwrap();
    let var_exact = 0.5 * (1.0 - (-2.0f64).exp());
    for k in 0..2 {
        let v: Vec<f64> = ens.states_at(1).map(|s| s.coords()[k]).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let mean_exact = x0[k] * (-1.0f64).exp();
        let se_mean = (var_exact / n as f64).sqrt();
        let se_var = var_exact * (2.0 / (n - 1) as f64).sqrt();
        assert!((mean - mean_exact).abs() < 4.0 * se_mean, "mean {mean} vs {mean_exact}");
        assert!((var - var_exact).abs() < 4.0 * se_var + 1e-3, "var {var} vs {var_exact}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = ModelSpec::airy(6, 2.0);
    let x0: Vec<LabeledState> = (0..24)
        .map(|p| line(&[-5.0, -3.0, -1.5, 0.0, 1.0, 2.0 + 0.01 * p as f64]))
        .collect();
    let cfg = IntegratorConfig {
        t_final: 0.1,
        ..IntegratorConfig::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&spec, &x0, &cfg, 4).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.times, b.times);
    for (p, q) in a.paths.iter().zip(&b.paths) {
        for (s, t) in p.states.iter().zip(&q.states) {
            let bits = |v: &LabeledState| v.coords().iter().map(|c| c.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(s), bits(t));
        }
    }
}

#[test]
fn restart_from_midpoint_matches() {
    let spec = ModelSpec::bessel(3, 1.5);
    let cfg = IntegratorConfig {
        t_final: 0.2,
        dt_record: 0.02,
        ..IntegratorConfig::default()
    };
    let stream = RngStream::new(12, 5);
    let full = simulate_path(&spec, &line(&[0.5, 2.0, 6.0]), &cfg, stream, 0).unwrap();
    let tail = simulate_path(&spec, &full.states[5], &cfg, stream, 5).unwrap();
    assert_eq!(&full.states[5..], &tail.states[..]);
}

#[test]
fn bessel_families_stay_positive() {
    for spec in [
        ModelSpec::bessel(4, 1.0),
        ModelSpec::square_bessel(4, 1.0),
        ModelSpec::sqrt_square_bessel(4, 1.0),
    ] {
        let cfg = IntegratorConfig {
            t_final: 0.2,
            ..IntegratorConfig::default()
        };
        let x0 = vec![line(&[0.01, 0.5, 1.5, 3.0]); 200];
        let ens = simulate(&spec, &x0, &cfg, 2).unwrap();
        assert!(ens.paths.iter().all(|p| p.states.iter().all(|s| s.coords().iter().all(|&x| x > 0.0))));
    }
}
