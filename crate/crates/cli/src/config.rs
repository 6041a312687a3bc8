use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use frontlab::cell::zeta_zero;
use frontlab::evolve::stable_dt_on;
use frontlab::fronts::{shooting_speed, Side};
use frontlab::grid::Grid;
use frontlab::medium::{check_hypotheses, check_majorizes, default_majorant, theta_bounds};
use frontlab::presets::{self, Medium};
use frontlab::random::RandomFamily;
use frontlab::{CoefficientField, ReactionField};
use serde::{Deserialize, Serialize};

/// Medium by preset name or by reaction and coefficient documents.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reaction: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_tilde: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<f64>,
}

fn one() -> i32 {
    1
}
fn left() -> Side {
    Side::Left
}
fn unit() -> f64 {
    1.0
}
fn four() -> f64 {
    4.0
}
fn six() -> usize {
    6
}
fn half() -> f64 {
    0.5
}
fn two() -> f64 {
    2.0
}
fn cap() -> f64 {
    200.0
}
fn nu() -> f64 {
    0.2
}
fn tenth() -> f64 {
    0.1
}
fn defect_tol() -> f64 {
    2e-2
}
fn five() -> f64 {
    5.0
}
fn shrink() -> f64 {
    0.95
}
fn spread_eps() -> f64 {
    0.05
}
fn starts() -> Vec<i64> {
    vec![0]
}

/// Random family given inline or as a path to its JSON document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Path(PathBuf),
    Inline(Box<RandomFamily>),
}

/// Seeds listed explicitly or as a count (`1..=count`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn list(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (1..=*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Eigen {
        lambdas: Vec<f64>,
        #[serde(default = "one")]
        direction: i32,
    },
    Speed {
        zetas: Vec<f64>,
    },
    Front {
        #[serde(default = "left")]
        side: Side,
        #[serde(default = "unit")]
        shift: f64,
        #[serde(default = "six")]
        n_max: usize,
        #[serde(default = "half")]
        t_before: f64,
        #[serde(default = "two")]
        ahead: f64,
        #[serde(default = "cap")]
        time_cap: f64,
        /// Period for the pulsating row; inferred from the medium when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
    },
    Stability {
        #[serde(default = "nu")]
        nu: f64,
        #[serde(default = "two")]
        mu: f64,
        #[serde(default = "unit")]
        y: f64,
        times: Vec<f64>,
        /// Half width of the two-sided datum; one-sided only when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        two_sided: Option<f64>,
    },
    Pulsating {
        period: f64,
        #[serde(default = "tenth")]
        rel_bracket: f64,
        #[serde(default = "defect_tol")]
        tol: f64,
    },
    Random {
        family: FamilySpec,
        seeds: Seeds,
        n: i64,
        #[serde(default = "starts")]
        audit_starts: Vec<i64>,
        #[serde(default = "four")]
        margin: f64,
        #[serde(default = "cap")]
        time_cap: f64,
    },
    Spreading {
        #[serde(default = "nu")]
        nu: f64,
        #[serde(default = "five")]
        half_width: f64,
        #[serde(default = "shrink")]
        speed_factor: f64,
        #[serde(default = "spread_eps")]
        eps: f64,
        /// Envelope speed; shooting on the lower profile when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        speed: Option<f64>,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Eigen { .. } => "eigen",
            Experiment::Speed { .. } => "speed",
            Experiment::Front { .. } => "front",
            Experiment::Stability { .. } => "stability",
            Experiment::Pulsating { .. } => "pulsating",
            Experiment::Random { .. } => "random",
            Experiment::Spreading { .. } => "spreading",
        }
    }

    fn default_t_end(&self) -> f64 {
        match self {
            Experiment::Stability { times, .. } => times.iter().cloned().fold(0.0, f64::max),
            Experiment::Spreading { .. } => 30.0,
            _ => 8.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub medium: MediumSpec,
    #[serde(default)]
    pub discretization: Discretization,
    pub experiment: Experiment,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Reads a config; relative paths inside it are taken from the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.medium.reaction.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.medium.coefficients.as_mut() {
            rebase(p);
        }
        if let Experiment::Random {
            family: FamilySpec::Path(p),
            ..
        } = &mut cfg.experiment
        {
            rebase(p);
        }
        rebase(&mut cfg.output_dir);
        Ok(cfg)
    }
}

/// Config with every default filled and the medium loaded.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub config: ExperimentConfig,
    pub medium: Medium,
    pub family: Option<RandomFamily>,
    pub grid: Grid,
    pub dt: f64,
    /// `dt` as given, before the stable default was filled in.
    pub dt_given: Option<f64>,
    pub t_end: f64,
    pub record_every: f64,
}

fn load_medium(spec: &MediumSpec) -> Result<Medium> {
    match (&spec.preset, &spec.reaction, &spec.coefficients) {
        (Some(name), None, None) => Ok(presets::by_name(name)?),
        (None, Some(r), c) => {
            let field = ReactionField::from_json(
                &std::fs::read_to_string(r)
                    .with_context(|| format!("cannot read {}", r.display()))?,
            )
            .with_context(|| format!("invalid reaction document {}", r.display()))?;
            let coeffs = match c {
                Some(c) => CoefficientField::from_json(
                    &std::fs::read_to_string(c)
                        .with_context(|| format!("cannot read {}", c.display()))?,
                )
                .with_context(|| format!("invalid coefficient document {}", c.display()))?,
                None => CoefficientField::identity(1, 1.0),
            };
            let ny = if coeffs.dim() == 2 {
                coeffs.shape().1
            } else {
                1
            };
            Ok(Medium {
                name: r.display().to_string(),
                coeffs,
                field,
                zeta: f64::NAN,
                theta_tilde: 0.9,
                dx: 0.05,
                ny,
            })
        }
        (None, None, _) => bail!("medium needs a preset or a reaction document"),
        _ => bail!("medium takes either a preset or documents, not both"),
    }
}

fn family_of(spec: &FamilySpec) -> Result<RandomFamily> {
    match spec {
        FamilySpec::Inline(f) => Ok((**f).clone()),
        FamilySpec::Path(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid family {}", p.display()))
        }
    }
}

/// Fills defaults and checks every hypothesis the experiment relies on. Returns all
/// violations at once.
pub fn validate(config: &ExperimentConfig) -> Result<Normalized, Vec<String>> {
    let mut errors = Vec::new();
    let mut cfg = config.clone();
    let exp = cfg.experiment.clone();
    let family = match &exp {
        Experiment::Random { family, .. } => match family_of(family) {
            Ok(f) => Some(f),
            Err(e) => return Err(vec![format!("{e:#}")]),
        },
        _ => None,
    };
    let mut medium = match (&family, cfg.medium == MediumSpec::default()) {
        (Some(f), true) => Medium {
            name: "random-family".into(),
            coeffs: f.coeffs.clone(),
            field: ReactionField::homogeneous(f.base.clone()),
            zeta: f64::NAN,
            theta_tilde: f.theta_tilde,
            dx: 0.1,
            ny: 1,
        },
        _ => match load_medium(&cfg.medium) {
            Ok(m) => m,
            Err(e) => return Err(vec![format!("{e:#}")]),
        },
    };
    for c in check_hypotheses(&medium.field, &medium.coeffs).failures() {
        errors.push(format!(
            "hypothesis {} violated (slack {:.3e})",
            c.name, c.slack
        ));
    }
    let dx = cfg.discretization.dx.unwrap_or(medium.dx);
    let grid = match Grid::new(medium.coeffs.dim(), dx, medium.ny) {
        Ok(g) => g,
        Err(e) => return Err(vec![e.to_string()]),
    };
    medium.dx = dx;
    let stable = stable_dt_on(&medium.coeffs, &medium.field, grid);
    let dt = match cfg.discretization.dt {
        Some(dt) if !(dt > 0.0 && dt <= stable) => {
            errors.push(format!("dt = {dt} must lie in (0, stable_dt = {stable}]"));
            stable
        }
        Some(dt) => dt,
        None => stable,
    };
    let needs_front = !matches!(exp, Experiment::Eigen { .. } | Experiment::Speed { .. });
    if let Some(tt) = cfg.medium.theta_tilde {
        medium.theta_tilde = tt;
    }
    if let Some(z) = cfg.medium.zeta {
        medium.zeta = z;
    }
    let c0 = if medium.coeffs.is_constant() && medium.coeffs.max_abs_q() == [0.0, 0.0] {
        shooting_speed(medium.field.lower(), 1e-10)
            .ok()
            .map(|c| medium.coeffs.a(0, 0)[0].sqrt() * c)
    } else {
        None
    };
    let z0 = c0.and_then(|c| zeta_zero(&medium.coeffs, c, 1).ok());
    if needs_front && errors.is_empty() {
        if medium.zeta.is_nan() {
            match z0 {
                Some(z0) => medium.zeta = certified_zeta(&medium.field, 0.5 * z0),
                None => {
                    errors.push("zeta must be given: zeta_0 needs constant A and q = 0".to_string())
                }
            }
        }
        if let Some(z0) = z0 {
            let s = medium.field.upper().slope_at_zero();
            if !(s < z0) {
                errors.push(format!(
                    "f1'(0) = {s} must be below zeta_0 = {z0} (existence hypothesis of the front)"
                ));
            }
            if !(medium.zeta < z0) {
                errors.push(format!(
                    "zeta = {} must be below zeta_0 = {z0}",
                    medium.zeta
                ));
            }
        }
        if !medium.zeta.is_nan() {
            match default_majorant(&medium.field, medium.zeta) {
                Ok(g) => {
                    if let Err(e) = check_majorizes(&medium.field, medium.zeta, &g) {
                        errors.push(format!("majorization fails at zeta = {}: {e}", medium.zeta));
                    }
                }
                Err(e) => errors.push(format!("no majorant at zeta = {}: {e}", medium.zeta)),
            }
            if let Ok((_, theta0)) = theta_bounds(&medium.field, medium.zeta) {
                if !(medium.theta_tilde > theta0 && medium.theta_tilde < 1.0) {
                    errors.push(format!(
                        "theta_tilde = {} must satisfy theta_0 = {theta0} < theta_tilde < 1 (subsolution plateau)",
                        medium.theta_tilde
                    ));
                }
            }
        }
    }
    let period = match &exp {
        Experiment::Pulsating { period, .. } => Some(*period),
        Experiment::Front {
            period: Some(p), ..
        } => Some(*p),
        _ => None,
    };
    if let Some(p) = period {
        if grid.cells_per(p).is_none() {
            errors.push(format!("period {p} is not a multiple of dx = {dx}"));
        }
    }
    if let Experiment::Random {
        family: _,
        seeds,
        n,
        margin,
        time_cap,
        ..
    } = &exp
    {
        if seeds.list().len() < 2 {
            errors.push("random experiments need at least 2 seeds".into());
        }
        if *n < 1 {
            errors.push(format!("n = {n} must be positive"));
        }
        if !(*margin > 0.0 && *time_cap > 0.0) {
            errors.push("margin and time_cap must be positive".into());
        }
        let f = family.as_ref().expect("loaded above");
        if let Err(e) = f.homogeneous_speed(f.amplitude_range.0) {
            errors.push(format!("family base profile: {e}"));
        }
    }
    if let Experiment::Eigen { lambdas, .. } = &exp {
        if lambdas.is_empty() || lambdas.iter().any(|&l| !(l >= 0.0)) {
            errors.push("lambdas must be non-negative and non-empty".into());
        }
    }
    if let Experiment::Speed { zetas } = &exp {
        if zetas.is_empty() || zetas.iter().any(|&z| !(z > 0.0)) {
            errors.push("zetas must be positive and non-empty".into());
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let t_end = cfg
        .discretization
        .t_end
        .unwrap_or_else(|| exp.default_t_end());
    let record_every = cfg.discretization.record_every.unwrap_or(0.05);
    cfg.discretization = Discretization {
        dx: Some(dx),
        dt: Some(dt),
        window: cfg.discretization.window,
        t_end: Some(t_end),
        record_every: Some(record_every),
    };
    if needs_front {
        cfg.medium.zeta = Some(medium.zeta);
        cfg.medium.theta_tilde = Some(medium.theta_tilde);
    }
    Ok(Normalized {
        config: cfg,
        medium,
        family,
        grid,
        dt,
        dt_given: config.discretization.dt,
        t_end,
        record_every,
    })
}

/// `zeta` halved until the default majorant certifies it.
fn certified_zeta(field: &ReactionField, mut zeta: f64) -> f64 {
    for _ in 0..40 {
        if let Ok(g) = default_majorant(field, zeta) {
            if check_majorizes(field, zeta, &g).is_ok() {
                return zeta;
            }
        }
        zeta *= 0.5;
    }
    zeta
}
