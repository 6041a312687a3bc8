use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use frontlab_cli::config::{FamilySpec, Seeds};
use frontlab_cli::{
    init_threads, run_experiment, validate, Experiment, ExperimentConfig, MediumSpec,
};

#[derive(Parser)]
#[command(
    name = "frontlab",
    version,
    about = "Reaction-diffusion front experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Principal eigenvalue kappa(lambda) of the cell problem.
    Eigen {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
    },
    /// Minimal speeds c_zeta.
    Speed {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        zetas: Option<Vec<f64>>,
    },
    /// Constructs the front and reports its diagnostics.
    Front {
        #[command(flatten)]
        common: Common,
    },
    /// Convergence of decaying data to a time shift of the front.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Half width of an additional two-sided datum.
        #[arg(long)]
        two_sided: Option<f64>,
    },
    /// Periodicity defect of the front.
    Pulsating {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
    },
    /// Crossing times and the speed c_+ of a random family.
    Random {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        n: Option<i64>,
    },
    /// Spreading from compactly supported data.
    Spreading {
        #[command(flatten)]
        common: Common,
    },
    /// Fills defaults and reports every violated hypothesis.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped medium by name.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Window `lo,hi` in x1.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    window: Option<Vec<f64>>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    record_every: Option<f64>,
}

impl Common {
    fn config(&self, default: Experiment) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let cfg = ExperimentConfig::load(p)?;
                if cfg.experiment.name() != default.name() {
                    bail!(
                        "{} holds a {} experiment, not {}",
                        p.display(),
                        cfg.experiment.name(),
                        default.name()
                    );
                }
                cfg
            }
            None => ExperimentConfig {
                medium: MediumSpec::default(),
                discretization: Default::default(),
                output_dir: PathBuf::from("out").join(default.name()),
                experiment: default,
            },
        };
        if let Some(p) = &self.preset {
            cfg.medium = MediumSpec {
                preset: Some(p.clone()),
                ..MediumSpec::default()
            };
        }
        let d = &mut cfg.discretization;
        d.dx = self.dx.or(d.dx);
        d.dt = self.dt.or(d.dt);
        d.t_end = self.t_end.or(d.t_end);
        d.record_every = self.record_every.or(d.record_every);
        if let Some(w) = &self.window {
            d.window = Some((w[0], w[1]));
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        Ok(cfg)
    }
}

fn build(command: Command) -> Result<Option<ExperimentConfig>> {
    let cfg = match command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            return match validate(&cfg) {
                Ok(n) => {
                    println!("{}", serde_json::to_string_pretty(&n.config)?);
                    Ok(None)
                }
                Err(errors) => {
                    for e in &errors {
                        eprintln!("error: {e}");
                    }
                    bail!("{} violation(s)", errors.len())
                }
            };
        }
        Command::Eigen { common, lambdas } => {
            let mut cfg = common.config(Experiment::Eigen {
                lambdas: vec![0.25, 0.5, 1.0, 2.0, 4.0],
                direction: 1,
            })?;
            if let (Some(l), Experiment::Eigen { lambdas, .. }) = (lambdas, &mut cfg.experiment) {
                *lambdas = l;
            }
            cfg
        }
        Command::Speed { common, zetas } => {
            let mut cfg = common.config(Experiment::Speed {
                zetas: vec![0.04, 0.25, 1.0],
            })?;
            if let (Some(z), Experiment::Speed { zetas, .. }) = (zetas, &mut cfg.experiment) {
                *zetas = z;
            }
            cfg
        }
        Command::Front { common } => common.config(Experiment::Front {
            side: frontlab::fronts::Side::Left,
            shift: 1.0,
            n_max: 6,
            t_before: 0.5,
            ahead: 2.0,
            time_cap: 200.0,
            period: None,
        })?,
        Command::Stability { common, two_sided } => {
            let mut cfg = common.config(Experiment::Stability {
                nu: 0.2,
                mu: 2.0,
                y: 1.0,
                times: vec![1.0, 2.0, 3.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
                two_sided: None,
            })?;
            if let (Some(l), Experiment::Stability { two_sided, .. }) =
                (two_sided, &mut cfg.experiment)
            {
                *two_sided = Some(l);
            }
            cfg
        }
        Command::Pulsating { common, period } => common.config(Experiment::Pulsating {
            period,
            rel_bracket: 0.1,
            tol: 2e-2,
        })?,
        Command::Random {
            common,
            family,
            seeds,
            n,
        } => {
            let default = Experiment::Random {
                family: FamilySpec::Path(family.clone().unwrap_or_default()),
                seeds: Seeds::Count(16),
                n: 16,
                audit_starts: vec![0],
                margin: 4.0,
                time_cap: 200.0,
            };
            let mut cfg = common.config(default)?;
            if let Experiment::Random {
                family: f,
                seeds: s,
                n: k,
                ..
            } = &mut cfg.experiment
            {
                if let Some(p) = family {
                    *f = FamilySpec::Path(p);
                }
                if let Some(c) = seeds {
                    *s = Seeds::Count(c);
                }
                if let Some(c) = n {
                    *k = c;
                }
            }
            cfg
        }
        Command::Spreading { common } => common.config(Experiment::Spreading {
            nu: 0.2,
            half_width: 5.0,
            speed_factor: 0.95,
            eps: 0.05,
            speed: None,
        })?,
    };
    Ok(Some(cfg))
}

fn run() -> Result<bool> {
    init_threads()?;
    let Some(cfg) = build(Cli::parse().command)? else {
        return Ok(true);
    };
    let n = match validate(&cfg) {
        Ok(n) => n,
        Err(errors) => {
            for e in &errors {
                eprintln!("error: {e}");
            }
            bail!("{} violation(s)", errors.len());
        }
    };
    let m = run_experiment(&n)?;
    for a in &m.assertions {
        println!(
            "{} {}: {:.6e} (threshold {:.6e})",
            if a.passed { "PASS" } else { "FAIL" },
            a.name,
            a.value,
            a.threshold
        );
    }
    if let Some(e) = &m.error {
        eprintln!("error: {e}");
    }
    println!(
        "manifest: {}",
        n.config.output_dir.join("manifest.json").display()
    );
    Ok(m.passed)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
