use std::path::Path;

use frontlab::medium::{Interpolation, ReactionKind};
use frontlab::presets::base_profile;
use frontlab::{ReactionField, ReactionProfile};
use frontlab_cli::config::{Discretization, FamilySpec, Seeds};
use frontlab_cli::{
    run_experiment, validate, Experiment, ExperimentConfig, MediumSpec, RunManifest,
};

fn preset(name: &str) -> MediumSpec {
    MediumSpec {
        preset: Some(name.into()),
        ..MediumSpec::default()
    }
}

fn config(medium: MediumSpec, experiment: Experiment, out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        medium,
        discretization: Discretization::default(),
        experiment,
        output_dir: out.to_path_buf(),
    }
}

fn eigen(out: &Path) -> ExperimentConfig {
    let mut cfg = config(
        preset("homogeneous-0.2"),
        Experiment::Eigen {
            lambdas: vec![0.5, 1.0, 1.5, 2.0],
            direction: 1,
        },
        out,
    );
    cfg.discretization.dx = Some(1.0 / 64.0);
    cfg
}

fn front() -> Experiment {
    Experiment::Front {
        side: frontlab::fronts::Side::Left,
        shift: 1.0,
        n_max: 6,
        t_before: 0.5,
        ahead: 2.0,
        time_cap: 200.0,
        period: Some(1.0),
    }
}

fn run(cfg: &ExperimentConfig) -> RunManifest {
    let n = validate(cfg).unwrap_or_else(|e| panic!("{e:?}"));
    run_experiment(&n).unwrap()
}

fn sha_of(m: &RunManifest, file: &str) -> String {
    m.files
        .iter()
        .find(|f| f.path == file)
        .unwrap()
        .sha256
        .clone()
}

#[test]
fn eigen_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&eigen(&dir.path().join("a")));
    let b = run(&eigen(&dir.path().join("b")));
    assert_eq!(sha_of(&a, "eigen.csv"), sha_of(&b, "eigen.csv"));
    assert_eq!(a.assertions.len(), b.assertions.len());
}

#[test]
fn homogeneous_kappa_is_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(&eigen(dir.path()));
    assert!(m.passed, "{:?}", m.assertions);
    let a = m
        .assertions
        .iter()
        .find(|a| a.name == "kappa = a11 lambda^2 (relative)")
        .unwrap();
    assert!(a.value <= 1e-6);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["passed"], true);
}

#[test]
fn validate_fills_dt_and_zeta() {
    let dir = tempfile::tempdir().unwrap();
    let n = validate(&config(preset("homogeneous-0.2"), front(), dir.path())).unwrap();
    assert!(n.dt > 0.0);
    assert_eq!(n.dt_given, None);
    assert!(n.medium.zeta > 0.0);
    assert_eq!(n.config.discretization.dt, Some(n.dt));
}

#[test]
fn validate_rejects_low_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let mut medium = preset("homogeneous-0.2");
    medium.theta_tilde = Some(0.1);
    let errors = validate(&config(medium, front(), dir.path()))
        .err()
        .unwrap();
    assert!(
        errors.iter().any(|e| e.contains("theta_tilde")),
        "{errors:?}"
    );
}

#[test]
fn validate_rejects_unstable_dt() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = eigen(dir.path());
    cfg.discretization.dt = Some(1.0);
    let errors = validate(&cfg).err().unwrap();
    assert!(errors.iter().any(|e| e.contains("stable_dt")), "{errors:?}");
}

#[test]
fn validate_rejects_steep_upper_bound() {
    let dir = tempfile::tempdir().unwrap();
    let f0 = base_profile();
    let f1 = ReactionProfile::new(
        vec![(0.0, 0.0), (0.05, 2.0), (0.95, 2.0), (1.0, 0.0)],
        ReactionKind::Positive,
        0.0,
    )
    .unwrap();
    let field = ReactionField::new(
        f0.clone(),
        f1,
        None,
        vec![f0],
        0.0,
        1.0,
        Interpolation::Cellwise,
        None,
    )
    .unwrap();
    let path = dir.path().join("reaction.json");
    std::fs::write(&path, field.to_json().unwrap()).unwrap();
    let medium = MediumSpec {
        reaction: Some(path),
        ..MediumSpec::default()
    };
    let errors = validate(&config(medium, front(), &dir.path().join("out")))
        .err()
        .unwrap();
    assert!(errors.iter().any(|e| e.contains("f1'(0)")), "{errors:?}");
}

#[test]
fn periodic_front_reports_pulsating_defect() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(&config(preset("periodic-reaction"), front(), dir.path()));
    let d = m
        .assertions
        .iter()
        .find(|a| a.name == "pulsating defect")
        .unwrap();
    assert!(d.passed, "{d:?}");
    assert!(m.passed);
    for f in [
        "front_diagnostics.csv",
        "front_final.csv",
        "front_summary.json",
        "pulsating.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn random_family_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let family = frontlab::random::RandomFamily {
        base: base_profile(),
        amplitude_range: (0.5, 2.0),
        period: 1.0,
        coeffs: frontlab::CoefficientField::identity(1, 1.0),
        theta_tilde: 0.9,
        cell_shift: 0,
    };
    let path = dir.path().join("family.json");
    std::fs::write(&path, serde_json::to_string(&family).unwrap()).unwrap();
    let mut cfg = config(
        MediumSpec::default(),
        Experiment::Random {
            family: FamilySpec::Path(path),
            seeds: Seeds::Count(3),
            n: 4,
            audit_starts: vec![0],
            margin: 4.0,
            time_cap: 200.0,
        },
        &dir.path().join("out"),
    );
    cfg.discretization.dx = Some(0.1);
    let m = run(&cfg);
    assert!(m.error.is_none(), "{:?}", m.error);
    let slack = m
        .assertions
        .iter()
        .find(|a| a.name == "subadditivity worst slack")
        .unwrap();
    assert!(slack.passed, "{slack:?}");
    let records = std::fs::read_to_string(dir.path().join("out/records.csv")).unwrap();
    assert!(records.lines().count() > 3 * 4, "{records}");
}
