use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "contamreg",
    version,
    about = "Semiparametric estimation for contaminated linear regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a dataset and write `data.csv`.
    Simulate,
    /// Estimate (p, alpha, beta) and the error law from a dataset CSV.
    Estimate { data: PathBuf },
    /// Check the Gaussian contrast conditions and locate a spurious solution.
    Diagnose,
    /// Evaluate d_n on a (p, beta) grid; simulates when no dataset is given.
    Surface { data: Option<PathBuf> },
    /// Monte-Carlo replications for each n in `--ns`, with optional rate sweep.
    Replicate,
    /// Histograms of the theta-transformed responses.
    Demo { data: Option<PathBuf> },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Estimate { .. } => "estimate",
            Command::Diagnose => "diagnose",
            Command::Surface { .. } => "surface",
            Command::Replicate => "replicate",
            Command::Demo { .. } => "demo",
        }
    }
}

/// Every option maps to a config-file key of the same name (dashes become
/// underscores); flags win over the file.
#[derive(Args, Debug, Default)]
struct Opts {
    /// key = value config file (`#` starts a comment)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// m1 | m2 | m3 | asym:<lambda>
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    n: Option<String>,
    /// Master seed; generated and printed when absent
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    p_star: Option<String>,
    #[arg(long, global = true)]
    alpha_star: Option<String>,
    #[arg(long, global = true)]
    beta_star: Option<String>,
    #[arg(long, global = true)]
    design_mean: Option<String>,
    #[arg(long, global = true)]
    design_var: Option<String>,
    /// Variance of the unknown error law (Gaussian models)
    #[arg(long, global = true)]
    var_f: Option<String>,
    /// Variance of the known error law
    #[arg(long, global = true)]
    var_f0: Option<String>,
    /// Standard deviation of the weight law Q (default: the model's)
    #[arg(long, global = true)]
    q_sd: Option<String>,
    /// p_lo,p_hi,a_lo,a_hi,b_lo,b_hi
    #[arg(long = "box", global = true)]
    param_box: Option<String>,
    /// triangular | gaussian
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// normal-ref | normal-ref:<p> | fixed:<b> | power:<c>,<e> (`paper` = `normal-ref`)
    #[arg(long, global = true)]
    bandwidth: Option<String>,
    /// Number of weight points (default n)
    #[arg(long, global = true)]
    m: Option<String>,
    /// g_p,g_alpha,g_beta or g_p,g_beta
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Initial perturbation: one value or d_p,d_alpha,d_beta
    #[arg(long, global = true)]
    delta: Option<String>,
    #[arg(long, global = true)]
    eps_stop: Option<String>,
    #[arg(long, global = true)]
    max_iters: Option<String>,
    /// lattice | oracle | p,a,b;p,a,b (join with `+lattice` to add the lattice)
    #[arg(long, global = true)]
    starts: Option<String>,
    #[arg(long, global = true)]
    backtracking: bool,
    /// oracle | multistart (replicate)
    #[arg(long, global = true)]
    init: Option<String>,
    #[arg(long, global = true)]
    reps: Option<String>,
    /// Comma-separated sample sizes (replicate)
    #[arg(long, global = true)]
    ns: Option<String>,
    /// Also run the convergence-rate sweep over `--ns` (replicate)
    #[arg(long, global = true)]
    rates: bool,
    /// np,nb (surface)
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    p_range: Option<String>,
    #[arg(long, global = true)]
    beta_range: Option<String>,
    /// Fixed alpha of the surface slice
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// alpha,beta;alpha,beta (demo)
    #[arg(long, global = true)]
    thetas: Option<String>,
    /// Histogram bins (default Sturges)
    #[arg(long, global = true)]
    bins: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<String>,
}

impl Opts {
    fn flags(&self) -> BTreeMap<String, String> {
        let pairs: [(&str, &Option<String>); 32] = [
            ("model", &self.model),
            ("n", &self.n),
            ("seed", &self.seed),
            ("p_star", &self.p_star),
            ("alpha_star", &self.alpha_star),
            ("beta_star", &self.beta_star),
            ("design_mean", &self.design_mean),
            ("design_var", &self.design_var),
            ("var_f", &self.var_f),
            ("var_f0", &self.var_f0),
            ("q_sd", &self.q_sd),
            ("box", &self.param_box),
            ("kernel", &self.kernel),
            ("bandwidth", &self.bandwidth),
            ("m", &self.m),
            ("gamma", &self.gamma),
            ("delta", &self.delta),
            ("eps_stop", &self.eps_stop),
            ("max_iters", &self.max_iters),
            ("starts", &self.starts),
            ("init", &self.init),
            ("reps", &self.reps),
            ("ns", &self.ns),
            ("grid", &self.grid),
            ("p_range", &self.p_range),
            ("beta_range", &self.beta_range),
            ("alpha", &self.alpha),
            ("thetas", &self.thetas),
            ("bins", &self.bins),
            ("out", &self.out),
            ("backtracking", &self.backtracking.then(|| "true".to_string())),
            ("rates", &self.rates.then(|| "true".to_string())),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect()
    }
}

fn run(cli: Cli) -> Result<()> {
    let settings = Settings::resolve(cli.opts.config.as_deref(), cli.opts.flags())?;
    settings.validate()?;
    if settings.seed_generated() {
        eprintln!("seed = {}", settings.seed()?);
    }
    let out = commands::prepare_out(&settings, cli.command.name())?;
    match &cli.command {
        Command::Simulate => commands::simulate_cmd(&settings, &out),
        Command::Estimate { data } => commands::estimate_cmd(&settings, &out, data),
        Command::Diagnose => commands::diagnose_cmd(&settings, &out),
        Command::Surface { data } => commands::surface_cmd(&settings, &out, data.as_deref()),
        Command::Replicate => commands::replicate_cmd(&settings, &out),
        Command::Demo { data } => commands::demo_cmd(&settings, &out, data.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
