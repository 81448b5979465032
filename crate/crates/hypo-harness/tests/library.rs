use hypo_harness::{run_experiment, sweep, Axis, Config, Experiment, Profile, RunOptions};

const DOUBLE_WELL: &str = include_str!("../configs/double_well.toml");

fn fast() -> RunOptions {
    RunOptions { profile: Profile::Fast, ..Default::default() }
}

#[test]
fn shipped_configs_parse() {
    for name in ["cos.toml", "double_well.toml", "sin3.toml", "flat.toml"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
        Config::load(&path).unwrap();
    }
}

#[test]
fn defaults_fill_missing_sections() {
    let cfg = Config::from_toml("[potential]\ncos_coeffs = [0, 1]\n[parameters]\nh = 0.5\n").unwrap();
    assert_eq!(cfg.discretization.c_g, 1.0);
    assert_eq!(cfg.parameters.kappa, 0.15);
    let d = cfg.discretization(Profile::Fast);
    assert_eq!((d.k_max, d.m_max), (12, 16));
}

#[test]
fn invalid_axis_value_is_rejected() {
    let cfg = Config::from_toml(DOUBLE_WELL).unwrap();
    assert!(cfg.with_axis(Axis::H, 1.5).is_err());
    assert!(cfg.with_axis(Axis::B, -0.1).is_err());
    assert_eq!(cfg.with_axis(Axis::K, 10.0).unwrap().discretization.k_max, Some(10));
}

#[test]
fn reruns_are_bitwise_identical() {
    let cfg = Config::from_toml(DOUBLE_WELL).unwrap();
    for exp in [Experiment::Witten, Experiment::Bismut, Experiment::Grushin] {
        let a = run_experiment(&cfg, exp, &fast()).unwrap();
        let b = run_experiment(&cfg, exp, &fast()).unwrap();
        assert_eq!(serde_json::to_string(&a[0].metrics).unwrap(), serde_json::to_string(&b[0].metrics).unwrap());
        assert_eq!(a[0].tables.iter().map(|t| &t.csv).collect::<Vec<_>>(), b[0].tables.iter().map(|t| &t.csv).collect::<Vec<_>>());
    }
}

#[test]
fn report_embeds_resolved_parameters() {
    let cfg = Config::from_toml(DOUBLE_WELL).unwrap();
    let r = run_experiment(&cfg, Experiment::Witten, &fast()).unwrap();
    let p = &r[0].parameters;
    let rho = p.rho.unwrap();
    assert!((p.b - 0.02 * p.h * rho).abs() < 1e-15);
    assert!(p.admissibility.is_some());
    assert!(p.c0.unwrap() >= 1.0);
}

#[test]
fn grushin_sweep_is_monotone() {
    let cfg = Config::from_toml(DOUBLE_WELL).unwrap();
    let r = sweep(&cfg, Experiment::Grushin, Axis::B, &[0.02, 0.01, 0.005], &fast()).unwrap();
    let a = r.assertions.iter().find(|a| a.name == "effective_error_monotone").unwrap();
    assert!(a.pass);
}
