//! Monte-Carlo replication harness, contrast surfaces, rate sweeps and the
//! θ-transformation histograms.
//!
//! Every replication derives its own seed from the master seed and its index,
//! runs independently, and results are reduced in index order, so outputs do
//! not depend on scheduling.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::contrast::{ContrastConfig, ContrastContext};
use crate::error::{Error, Result};
use crate::estimator::{minimize, EstimateReport, OptimConfig};
use crate::model::{fmt_f64, simulate, DistSpec, ParamBox, Sample, Theta, Vartheta};
use crate::rng::replication_seed;

/// Simulation models; all use `α* = 0`, `β* = 1`, `f₀ = N(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// `p* = 0.7`, `Q = N(0, 4²)`, `f = N(0,1)`.
    M1,
    /// `p* = 0.3`, `Q = N(0, 2²)`, `f = N(0,1)`.
    M2,
    /// `p* = 0.3`, `Q = N(0, 4²)`, `f = N(0,1)`.
    M3,
    /// M1 with the asymmetric zero-mean mixture as unknown error law.
    Asymmetric { lambda: f64 },
}

impl ModelKind {
    pub fn p_star(&self) -> f64 {
        match self {
            ModelKind::M1 | ModelKind::Asymmetric { .. } => 0.7,
            ModelKind::M2 | ModelKind::M3 => 0.3,
        }
    }

    pub fn truth(&self) -> Vartheta {
        Vartheta {
            p: self.p_star(),
            alpha: 0.0,
            beta: 1.0,
        }
    }

    pub fn sigma_v(&self) -> f64 {
        match self {
            ModelKind::M2 => 2.0,
            _ => 4.0,
        }
    }

    pub fn q(&self) -> DistSpec {
        DistSpec::Gaussian {
            mean: 0.0,
            var: self.sigma_v().powi(2),
        }
    }

    pub fn f1(&self) -> Result<DistSpec> {
        match self {
            ModelKind::Asymmetric { lambda } => DistSpec::asymmetric_mixture(*lambda),
            _ => Ok(DistSpec::standard_normal()),
        }
    }

    pub fn f0(&self) -> DistSpec {
        DistSpec::standard_normal()
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// `m1`, `m2`, `m3` or `asym:<lambda>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "m1" => Ok(ModelKind::M1),
            "m2" => Ok(ModelKind::M2),
            "m3" => Ok(ModelKind::M3),
            _ => {
                let lambda = s
                    .strip_prefix("asym:")
                    .ok_or_else(|| Error::invalid("model", format!("`{s}` (expected m1, m2, m3 or asym:<lambda>)")))?
                    .parse::<f64>()
                    .map_err(|e| Error::invalid("model", format!("`{s}`: {e}")))?;
                if !(lambda > 0.0 && lambda < 1.0) {
                    return Err(Error::invalid("model", format!("lambda {lambda} is not in (0, 1)")));
                }
                Ok(ModelKind::Asymmetric { lambda })
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::M1 => f.write_str("m1"),
            ModelKind::M2 => f.write_str("m2"),
            ModelKind::M3 => f.write_str("m3"),
            ModelKind::Asymmetric { lambda } => write!(f, "asym:{lambda}"),
        }
    }
}

/// Published replication results, kept for side-by-side display.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub table: u8,
    pub row: u8,
    pub model: ModelKind,
    pub n: usize,
    pub mean: (f64, f64),
    pub sd: (f64, f64),
}

const fn rr(table: u8, row: u8, model: ModelKind, n: usize, mean: (f64, f64), sd: (f64, f64)) -> ReferenceRow {
    ReferenceRow {
        table,
        row,
        model,
        n,
        mean,
        sd,
    }
}

/// Means and standard deviations of `(p̂, β̂)` over 100 replications.
pub const REFERENCE_ROWS: [ReferenceRow; 18] = [
    rr(1, 1, ModelKind::M1, 100, (0.7055, 1.0051), (0.0373, 0.0697)),
    rr(1, 2, ModelKind::M1, 200, (0.6976, 0.9965), (0.0307, 0.0590)),
    rr(1, 3, ModelKind::M1, 500, (0.6954, 1.0059), (0.0296, 0.0358)),
    rr(1, 4, ModelKind::M3, 100, (0.3100, 0.9581), (0.0577, 0.1252)),
    rr(1, 5, ModelKind::M3, 200, (0.2965, 0.9851), (0.0501, 0.0855)),
    rr(1, 6, ModelKind::M3, 500, (0.2975, 1.0178), (0.0284, 0.0414)),
    rr(1, 7, ModelKind::M2, 100, (0.3971, 0.8587), (0.0942, 0.2213)),
    rr(1, 8, ModelKind::M2, 200, (0.3982, 0.9149), (0.0835, 0.1900)),
    rr(1, 9, ModelKind::M2, 500, (0.3315, 0.9683), (0.0524, 0.1067)),
    rr(
        2,
        1,
        ModelKind::Asymmetric { lambda: 0.5 },
        100,
        (0.7035, 1.0229),
        (0.0427, 0.0814),
    ),
    rr(
        2,
        2,
        ModelKind::Asymmetric { lambda: 0.5 },
        200,
        (0.7012, 1.0068),
        (0.0390, 0.0774),
    ),
    rr(
        2,
        3,
        ModelKind::Asymmetric { lambda: 0.5 },
        500,
        (0.6997, 1.0059),
        (0.0244, 0.0488),
    ),
    rr(
        2,
        4,
        ModelKind::Asymmetric { lambda: 0.55 },
        100,
        (0.6854, 1.0837),
        (0.0485, 0.0858),
    ),
    rr(
        2,
        5,
        ModelKind::Asymmetric { lambda: 0.55 },
        200,
        (0.6890, 1.0805),
        (0.0431, 0.0716),
    ),
    rr(
        2,
        6,
        ModelKind::Asymmetric { lambda: 0.55 },
        500,
        (0.6922, 1.0699),
        (0.0377, 0.0519),
    ),
    rr(
        2,
        7,
        ModelKind::Asymmetric { lambda: 0.6 },
        100,
        (0.6731, 1.1314),
        (0.0543, 0.0952),
    ),
    rr(
        2,
        8,
        ModelKind::Asymmetric { lambda: 0.6 },
        200,
        (0.6693, 1.1061),
        (0.0490, 0.0868),
    ),
    rr(
        2,
        9,
        ModelKind::Asymmetric { lambda: 0.6 },
        500,
        (0.6775, 1.0928),
        (0.0392, 0.0557),
    ),
];

pub fn reference_row(model: ModelKind, n: usize) -> Option<&'static ReferenceRow> {
    REFERENCE_ROWS.iter().find(|r| r.model == model && r.n == n)
}

/// Where each replication's descent starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// At the true parameter.
    Oracle,
    /// From `optimizer.starts` plus the lattice.
    MultiStart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: ModelKind,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub optimizer: OptimConfig,
    pub init: InitMode,
    pub design_mean: f64,
    pub design_var: f64,
    pub contrast: ContrastConfig,
    pub param_box: ParamBox,
}

impl ExperimentSpec {
    /// Oracle-initialised `(p, β)` estimation with `α` pinned at 0.
    pub fn new(model: ModelKind, n: usize, replications: usize, seed: u64) -> Self {
        ExperimentSpec {
            model,
            n,
            replications,
            seed,
            optimizer: OptimConfig {
                gamma: [0.2, 0.5, 0.5],
                ..OptimConfig::from_start(model.truth())
            },
            init: InitMode::Oracle,
            design_mean: 0.0,
            design_var: 9.0,
            contrast: ContrastConfig::default(),
            param_box: ParamBox {
                p_lo: 0.05,
                p_hi: 0.95,
                alpha_lo: 0.0,
                alpha_hi: 0.0,
                beta_lo: 0.1,
                beta_hi: 3.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        if self.n < 10 {
            return Err(Error::invalid("n", format!("{} is below the minimum of 10", self.n)));
        }
        if !(self.design_var.is_finite() && self.design_var > 0.0) || !self.design_mean.is_finite() {
            return Err(Error::invalid("design", "mean must be finite and variance positive"));
        }
        self.model.f1()?;
        self.param_box.validate()?;
        self.optimizer.validate()
    }

    pub fn design(&self) -> DistSpec {
        DistSpec::Gaussian {
            mean: self.design_mean,
            var: self.design_var,
        }
    }

    fn optimizer_for_run(&self) -> OptimConfig {
        match self.init {
            InitMode::Oracle => OptimConfig {
                starts: vec![self.model.truth()],
                lattice: false,
                ..self.optimizer.clone()
            },
            InitMode::MultiStart => self.optimizer.clone(),
        }
    }

    /// One `key = value` per line.
    pub fn manifest(&self) -> String {
        let o = &self.optimizer;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("model", self.model.to_string());
        kv("n", self.n.to_string());
        kv("replications", self.replications.to_string());
        kv("seed", self.seed.to_string());
        kv("init", format!("{:?}", self.init).to_lowercase());
        kv("design_mean", self.design_mean.to_string());
        kv("design_var", self.design_var.to_string());
        kv("box", self.param_box.to_string());
        kv("kernel", self.contrast.kernel.to_string());
        kv("sim_kernel", self.contrast.sim_kernel.to_string());
        kv("bandwidth", self.contrast.bandwidth.to_string());
        kv("m", self.contrast.m.map_or("n".into(), |m| m.to_string()));
        kv("gamma", format!("{},{},{}", o.gamma[0], o.gamma[1], o.gamma[2]));
        kv(
            "delta_init",
            format!("{},{},{}", o.delta_init[0], o.delta_init[1], o.delta_init[2]),
        );
        kv("eps_stop", o.eps_stop.to_string());
        kv("max_iters", o.max_iters.to_string());
        kv("backtracking", o.backtracking.to_string());
        s
    }
}

/// Builds the contrast context for one simulated data set.
pub fn context_for(spec: &ExperimentSpec, sample: Sample, seed: u64) -> Result<ContrastContext> {
    ContrastContext::new(sample, spec.model.f0(), &spec.model.q(), &spec.contrast, seed)
}

pub fn simulate_for(spec: &ExperimentSpec, n: usize, seed: u64) -> Result<Sample> {
    simulate(
        n,
        &spec.model.truth(),
        &spec.model.f0(),
        &spec.model.f1()?,
        &spec.design(),
        seed,
    )
}

/// Simulate, build the context and estimate, for replication `index`.
pub fn run_replication(spec: &ExperimentSpec, index: usize) -> Result<EstimateReport> {
    run_at(spec, spec.n, replication_seed(spec.seed, index as u64))
}

fn run_at(spec: &ExperimentSpec, n: usize, seed: u64) -> Result<EstimateReport> {
    let sample = simulate_for(spec, n, seed)?;
    let ctx = context_for(spec, sample, seed)?;
    minimize(&ctx, &spec.param_box, &spec.optimizer_for_run())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub index: usize,
    pub seed: u64,
    /// `None` when the replication raised an error.
    pub estimate: Option<Vartheta>,
    pub d_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Means and standard deviations over converged replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub model: ModelKind,
    pub n: usize,
    pub replications: usize,
    pub converged: usize,
    pub failures: usize,
    pub mean_p: f64,
    pub mean_alpha: f64,
    pub mean_beta: f64,
    pub sd_p: f64,
    pub sd_alpha: f64,
    pub sd_beta: f64,
    pub records: Vec<ReplicationRecord>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

impl ReplicationSummary {
    pub const CSV_HEADER: &'static str = "model,n,replications,converged,failures,mean_p,mean_alpha,mean_beta,sd_p,sd_alpha,sd_beta,ref_table,ref_row,ref_mean_p,ref_mean_beta,ref_sd_p,ref_sd_beta";

    pub fn reference(&self) -> Option<&'static ReferenceRow> {
        reference_row(self.model, self.n)
    }

    pub fn csv_row(&self) -> String {
        let r = self.reference();
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.n,
            self.replications,
            self.converged,
            self.failures,
            fmt_f64(self.mean_p),
            fmt_f64(self.mean_alpha),
            fmt_f64(self.mean_beta),
            fmt_f64(self.sd_p),
            fmt_f64(self.sd_alpha),
            fmt_f64(self.sd_beta),
            r.map_or(String::new(), |r| r.table.to_string()),
            r.map_or(String::new(), |r| r.row.to_string()),
            opt(r.map(|r| r.mean.0)),
            opt(r.map(|r| r.mean.1)),
            opt(r.map(|r| r.sd.0)),
            opt(r.map(|r| r.sd.1)),
        )
    }

    pub fn write_records_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,seed,p_hat,alpha_hat,beta_hat,d_value,iterations,converged")?;
        for r in &self.records {
            let (p, a, b) = r.estimate.map_or((String::new(), String::new(), String::new()), |v| {
                (fmt_f64(v.p), fmt_f64(v.alpha), fmt_f64(v.beta))
            });
            writeln!(
                w,
                "{},{},{p},{a},{b},{},{},{}",
                r.index,
                r.seed,
                fmt_f64(r.d_value),
                r.iterations,
                r.converged
            )?;
        }
        Ok(())
    }

    /// Human-readable comparison with the published row, when one exists.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "model {} n={} reps={} converged={} failures={}\n  mean (p, beta) = ({:.4}, {:.4})  sd = ({:.4}, {:.4})\n",
            self.model,
            self.n,
            self.replications,
            self.converged,
            self.failures,
            self.mean_p,
            self.mean_beta,
            self.sd_p,
            self.sd_beta
        );
        if let Some(r) = self.reference() {
            s.push_str(&format!(
                "  reference (table {} row {}): mean = ({:.4}, {:.4})  sd = ({:.4}, {:.4})\n",
                r.table, r.row, r.mean.0, r.mean.1, r.sd.0, r.sd.1
            ));
        }
        s
    }
}

/// Runs all replications of `spec` and summarises them.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ReplicationSummary> {
    spec.validate()?;
    let records: Vec<ReplicationRecord> = (0..spec.replications)
        .into_par_iter()
        .map(|i| {
            let seed = replication_seed(spec.seed, i as u64);
            match run_at(spec, spec.n, seed) {
                Ok(r) => ReplicationRecord {
                    index: i,
                    seed,
                    estimate: Some(r.vartheta_hat),
                    d_value: r.d_value,
                    iterations: r.iterations,
                    converged: r.converged,
                },
                Err(_) => ReplicationRecord {
                    index: i,
                    seed,
                    estimate: None,
                    d_value: f64::NAN,
                    iterations: 0,
                    converged: false,
                },
            }
        })
        .collect();
    let ok: Vec<Vartheta> = records
        .iter()
        .filter(|r| r.converged)
        .filter_map(|r| r.estimate)
        .collect();
    let failures = spec.replications - ok.len();
    if ok.is_empty() {
        return Err(Error::Experiment(format!(
            "all {} replications of {} at n={} failed",
            spec.replications, spec.model, spec.n
        )));
    }
    if failures as f64 > 0.1 * spec.replications as f64 {
        return Err(Error::Experiment(format!(
            "{failures} of {} replications failed (more than 10%)",
            spec.replications
        )));
    }
    let (mean_p, sd_p) = mean_sd(&ok.iter().map(|v| v.p).collect::<Vec<_>>());
    let (mean_alpha, sd_alpha) = mean_sd(&ok.iter().map(|v| v.alpha).collect::<Vec<_>>());
    let (mean_beta, sd_beta) = mean_sd(&ok.iter().map(|v| v.beta).collect::<Vec<_>>());
    Ok(ReplicationSummary {
        model: spec.model,
        n: spec.n,
        replications: spec.replications,
        converged: ok.len(),
        failures,
        mean_p,
        mean_alpha,
        mean_beta,
        sd_p,
        sd_alpha,
        sd_beta,
        records,
    })
}

/// One row of the first replication table (models M1–M3).
pub fn run_table1(spec: &ExperimentSpec) -> Result<ReplicationSummary> {
    if matches!(spec.model, ModelKind::Asymmetric { .. }) {
        return Err(Error::Config("run_table1 accepts models m1, m2 or m3".into()));
    }
    run_experiment(spec)
}

/// One row of the asymmetric-error table.
pub fn run_table2(lambda: f64, n: usize, replications: usize, seed: u64) -> Result<ReplicationSummary> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda", format!("{lambda} is not in (0, 1)")));
    }
    run_experiment(&ExperimentSpec::new(
        ModelKind::Asymmetric { lambda },
        n,
        replications,
        seed,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub d_n: f64,
}

/// `dₙ` on a `np × nb` lattice over `p_range × beta_range` at fixed α,
/// in `p`-major order.
pub fn surface_grid(
    ctx: &ContrastContext,
    p_range: (f64, f64),
    beta_range: (f64, f64),
    grid: (usize, usize),
    alpha: f64,
) -> Result<Vec<SurfacePoint>> {
    let (np, nb) = grid;
    if np < 2 || nb < 2 {
        return Err(Error::invalid(
            "grid",
            format!("{np}x{nb}: both dimensions must be at least 2"),
        ));
    }
    if !(p_range.0 > 0.0 && p_range.0 < p_range.1 && p_range.1 <= 1.0) {
        return Err(Error::invalid("p_range", format!("{p_range:?}")));
    }
    if !(beta_range.0 < beta_range.1) {
        return Err(Error::invalid("beta_range", format!("{beta_range:?}")));
    }
    let ps = crate::quad::linspace(p_range.0, p_range.1, np);
    let bs = crate::quad::linspace(beta_range.0, beta_range.1, nb);
    let mut out = vec![
        SurfacePoint {
            p: 0.0,
            alpha,
            beta: 0.0,
            d_n: 0.0
        };
        np * nb
    ];
    // β outer so each θ is transformed once.
    for (j, &b) in bs.iter().enumerate() {
        for (i, &p) in ps.iter().enumerate() {
            let d = ctx.d_n(&Vartheta { p, alpha, beta: b })?;
            out[i * nb + j] = SurfacePoint {
                p,
                alpha,
                beta: b,
                d_n: d,
            };
        }
    }
    Ok(out)
}

pub fn surface_argmin(points: &[SurfacePoint]) -> Option<SurfacePoint> {
    points.iter().copied().min_by(|a, b| a.d_n.total_cmp(&b.d_n))
}

pub fn write_surface_csv<W: Write>(points: &[SurfacePoint], mut w: W) -> Result<()> {
    writeln!(w, "p,alpha,beta,d_n")?;
    for s in points {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(s.p),
            fmt_f64(s.alpha),
            fmt_f64(s.beta),
            fmt_f64(s.d_n)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub median_error: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    /// OLS slope of `log(median error)` on `log(n)`.
    pub slope: f64,
    pub intercept: f64,
}

impl RateReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,median_error,log_n,log_median_error")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.n,
                fmt_f64(r.median_error),
                fmt_f64((r.n as f64).ln()),
                fmt_f64(r.median_error.ln())
            )?;
        }
        writeln!(w, "# slope = {}", fmt_f64(self.slope))?;
        Ok(())
    }
}

/// Least-squares line `y = slope·x + intercept`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Harness: `error(n, rep)` is evaluated for every pair, the median per `n`
/// is regressed on `n` in log-log scale.
pub fn rate_sweep_with<F>(n_list: &[usize], reps: usize, error: F) -> Result<RateReport>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    if n_list.len() < 3 {
        return Err(Error::invalid("n_list", "need at least 3 sample sizes"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_list", "must be strictly increasing"));
    }
    if reps == 0 {
        return Err(Error::invalid("reps", "must be at least 1"));
    }
    let pairs: Vec<(usize, usize)> = n_list.iter().flat_map(|&n| (0..reps).map(move |r| (n, r))).collect();
    let errs: Vec<f64> = pairs.par_iter().map(|&(n, r)| error(n, r)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let errors = errs[k * reps..(k + 1) * reps].to_vec();
        let med = median(&mut errors.clone());
        if !(med > 0.0 && med.is_finite()) {
            return Err(Error::numerical("rate sweep", format!("median error {med} at n={n}")));
        }
        rows.push(RateRow {
            n,
            median_error: med,
            errors,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.median_error.ln()).collect();
    let (slope, intercept) = ols_slope(&lx, &ly);
    Ok(RateReport { rows, slope, intercept })
}

/// `‖ϑ̂ₙ − ϑ*‖₁` over the template's protocol at each `n`.
pub fn rate_sweep(template: &ExperimentSpec, n_list: &[usize], reps: usize) -> Result<RateReport> {
    template.validate()?;
    let truth = template.model.truth();
    rate_sweep_with(n_list, reps, |n, r| {
        let seed = replication_seed(replication_seed(template.seed, n as u64), r as u64);
        Ok(run_at(template, n, seed)?.vartheta_hat.l1_distance(&truth))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub theta: Theta,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Sample skewness of all `Yᵢ^θ`.
    pub skewness: f64,
    /// Sample skewness of the `Uᵢ = 1` residuals, when labels are present.
    pub labelled_skewness: Option<f64>,
}

impl Histogram {
    pub fn file_name(&self) -> String {
        format!("hist_{}_{}.csv", self.theta.alpha, self.theta.beta)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let total: usize = self.counts.iter().sum();
        writeln!(w, "bin_lo,bin_hi,count,density")?;
        for (k, &c) in self.counts.iter().enumerate() {
            let width = self.edges[k + 1] - self.edges[k];
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(self.edges[k]),
                fmt_f64(self.edges[k + 1]),
                c,
                fmt_f64(c as f64 / (total as f64 * width))
            )?;
        }
        Ok(())
    }
}

/// `⌈log₂ n⌉ + 1`
pub fn sturges_bins(n: usize) -> usize {
    (n.max(1) as f64).log2().ceil() as usize + 1
}

pub fn skewness(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    if m2 > 0.0 {
        m3 / m2.powf(1.5)
    } else {
        0.0
    }
}

/// Histograms of `Yᵢ^θ` for each θ.
pub fn transformation_demo(sample: &Sample, thetas: &[Theta], bins: Option<usize>) -> Result<Vec<Histogram>> {
    let k = bins.unwrap_or_else(|| sturges_bins(sample.len()));
    if k == 0 {
        return Err(Error::invalid("bins", "must be at least 1"));
    }
    thetas
        .iter()
        .map(|&theta| {
            let y = crate::density::theta_transform(sample, theta).y_theta().to_vec();
            let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
            let edges = crate::quad::linspace(lo, hi, k + 1);
            let mut counts = vec![0usize; k];
            let w = (hi - lo) / k as f64;
            for &v in &y {
                let i = (((v - lo) / w).floor() as usize).min(k - 1);
                counts[i] += 1;
            }
            let labelled_skewness = sample.u.as_ref().map(|u| {
                let sub: Vec<f64> = y.iter().zip(u).filter(|(_, &l)| l == 1).map(|(v, _)| *v).collect();
                skewness(&sub)
            });
            Ok(Histogram {
                theta,
                edges,
                counts,
                skewness: skewness(&y),
                labelled_skewness,
            })
        })
        .collect()
}
