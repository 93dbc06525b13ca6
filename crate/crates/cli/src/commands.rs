use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use contamreg::estimator::{minimize, PluginEstimate};
use contamreg::experiments::{
    rate_sweep, run_experiment, surface_argmin, surface_grid, transformation_demo, write_surface_csv, ExperimentSpec,
    ReplicationSummary,
};
use contamreg::gaussian::{check_contrast_conditions, spurious_solution, GaussianModelSpec};
use contamreg::model::{fmt_f64, simulate};
use contamreg::{ContrastConfig, ContrastContext, Sample};

use crate::config::Settings;

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

/// Creates the output directory and writes the resolved settings to
/// `manifest.txt` before any computation.
pub fn prepare_out(settings: &Settings, command: &str) -> Result<PathBuf> {
    let out = settings.out_dir();
    fs::create_dir_all(&out).with_context(|| format!("cannot create output directory {}", out.display()))?;
    fs::write(out.join("manifest.txt"), settings.echo(command))
        .with_context(|| format!("cannot write {}", out.join("manifest.txt").display()))?;
    Ok(out)
}

fn contrast_config(settings: &Settings) -> Result<ContrastConfig> {
    Ok(ContrastConfig {
        kernel: settings.kernel()?,
        bandwidth: settings.bandwidth()?,
        m: settings.weight_points()?,
        ..ContrastConfig::default()
    })
}

fn build_context(settings: &Settings, sample: Sample) -> Result<ContrastContext> {
    let cfg = contrast_config(settings)?;
    for w in cfg.bandwidth.condition_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(ContrastContext::new(
        sample,
        settings.f0()?,
        &settings.q()?,
        &cfg,
        settings.seed()?,
    )?)
}

fn simulated_sample(settings: &Settings) -> Result<Sample> {
    Ok(simulate(
        settings.n()?,
        &settings.truth()?,
        &settings.f0()?,
        &settings.f1()?,
        &settings.design()?,
        settings.seed()?,
    )?)
}

fn load_or_simulate(settings: &Settings, data: Option<&Path>) -> Result<Sample> {
    match data {
        Some(path) => Ok(Sample::load_csv(path)?),
        None => simulated_sample(settings),
    }
}

/// With `α` pinned at 0 and a design symmetric about 0, `Y^θ` is symmetric
/// for every `(p, β)`, so `dₙ` carries no signal beyond noise.
fn warn_if_centred(sample: &Sample, bx: &contamreg::ParamBox) {
    let n = sample.len() as f64;
    let mean = sample.x.iter().sum::<f64>() / n;
    let sd = (sample.x.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    if bx.alpha_lo == 0.0 && bx.alpha_hi == 0.0 && mean.abs() < 0.1 * sd {
        eprintln!("warning: design is centred at 0 with alpha pinned at 0; the contrast is nearly flat in (p, beta)");
    }
}

pub fn simulate_cmd(settings: &Settings, out: &Path) -> Result<()> {
    let sample = simulated_sample(settings)?;
    let path = out.join("data.csv");
    sample.save_csv(&path)?;
    println!("wrote {} ({} rows)", path.display(), sample.len());
    Ok(())
}

pub fn estimate_cmd(settings: &Settings, out: &Path, data: &Path) -> Result<()> {
    let sample = Sample::load_csv(data)?;
    let param_box = settings.param_box()?;
    warn_if_centred(&sample, &param_box);
    let optimizer = settings.optimizer()?;
    let ctx = build_context(settings, sample)?;
    let report = minimize(&ctx, &param_box, &optimizer)?;

    let mut w = create(&out.join("summary.csv"))?;
    writeln!(w, "{}", contamreg::EstimateReport::CSV_HEADER)?;
    writeln!(w, "{}", report.csv_row())?;
    w.flush()?;

    let mut w = create(&out.join("minima.csv"))?;
    writeln!(w, "p,alpha,beta,d_n,l1_score,runs,converged")?;
    for m in &report.all_minima {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(m.vartheta.p),
            fmt_f64(m.vartheta.alpha),
            fmt_f64(m.vartheta.beta),
            fmt_f64(m.d_value),
            m.l1_score.map_or(String::new(), fmt_f64),
            m.runs,
            m.converged
        )?;
    }
    w.flush()?;

    let plugin = PluginEstimate::from_vartheta(&ctx, &report.vartheta_hat)?;
    let grid = plugin.grid();
    let monotone = plugin.cdf_monotone(&grid);
    let mut w = create(&out.join("plugin.csv"))?;
    writeln!(w, "t,f_hat,f_hat_clipped,cdf_raw,cdf_monotone")?;
    for (t, cm) in grid.iter().zip(&monotone) {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(plugin.f_hat(*t)),
            fmt_f64(plugin.f_hat_clipped(*t)),
            fmt_f64(plugin.cdf_raw(*t)),
            fmt_f64(*cm)
        )?;
    }
    w.flush()?;

    let text = report.to_text();
    fs::write(out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

/// Up to six decimals, trailing zeros dropped.
fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn box_flag(b: [f64; 6]) -> String {
    let parts: Vec<String> = b.iter().map(|&x| short(x)).collect();
    format!("  --box {}\n", parts.join(","))
}

pub fn diagnose_cmd(settings: &Settings, out: &Path) -> Result<()> {
    let truth = settings.truth()?;
    let spec = GaussianModelSpec::new(
        settings.var_f()?,
        settings.var_f0()?,
        settings.design_mean()?,
        settings.design_var()?,
        truth,
    )?;
    let bx = settings.param_box()?;
    let mut text = String::new();
    text.push_str(&format!("truth         {truth}\n"));
    text.push_str(&format!("box           {bx}\n"));
    let conditions = check_contrast_conditions(&spec);
    text.push_str(&conditions.to_string());
    for w in conditions.warnings() {
        text.push_str(&format!("warning: {w}\n"));
    }
    match spurious_solution(&spec)? {
        None => text.push_str("spurious      none (p* >= 1/2)\n"),
        Some(s) => {
            text.push_str(&format!("spurious      {s}\n"));
            if bx.contains(&s) {
                text.push_str("spurious solution lies inside the box; shrink the box so it keeps the truth but not the spurious point, e.g.\n");
                let p_cut = 0.5 * (truth.p + s.p);
                if truth.p < s.p && p_cut > bx.p_lo {
                    text.push_str(&box_flag([
                        bx.p_lo,
                        p_cut,
                        bx.alpha_lo,
                        bx.alpha_hi,
                        bx.beta_lo,
                        bx.beta_hi,
                    ]));
                }
                let b_cut = 0.5 * (truth.beta + s.beta);
                if s.beta < truth.beta && b_cut < bx.beta_hi && b_cut > 0.0 {
                    text.push_str(&box_flag([
                        bx.p_lo,
                        bx.p_hi,
                        bx.alpha_lo,
                        bx.alpha_hi,
                        b_cut,
                        bx.beta_hi,
                    ]));
                }
            } else {
                text.push_str("spurious solution lies outside the box\n");
            }
        }
    }
    for w in settings.bandwidth()?.condition_warnings() {
        text.push_str(&format!("warning: {w}\n"));
    }
    fs::write(out.join("diagnose.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn surface_cmd(settings: &Settings, out: &Path, data: Option<&Path>) -> Result<()> {
    let sample = load_or_simulate(settings, data)?;
    let ctx = build_context(settings, sample)?;
    let pts = surface_grid(
        &ctx,
        settings.range("p_range")?,
        settings.range("beta_range")?,
        settings.grid()?,
        settings.alpha()?,
    )?;
    let mut w = create(&out.join("surface.csv"))?;
    write_surface_csv(&pts, &mut w)?;
    w.flush()?;
    if let Some(m) = surface_argmin(&pts) {
        println!(
            "grid minimum d_n = {:.6e} at (p, alpha, beta) = ({}, {}, {})",
            m.d_n, m.p, m.alpha, m.beta
        );
    }
    Ok(())
}

fn experiment_spec(settings: &Settings, n: usize) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(settings.model()?, n, settings.reps()?, settings.seed()?);
    spec.optimizer = settings.optimizer()?;
    spec.init = settings.init()?;
    spec.design_mean = settings.design_mean()?;
    spec.design_var = settings.design_var()?;
    spec.contrast = contrast_config(settings)?;
    spec.param_box = settings.param_box()?;
    Ok(spec)
}

pub fn replicate_cmd(settings: &Settings, out: &Path) -> Result<()> {
    if settings.has_truth_override() {
        bail!("replicate uses the model's fixed parameters; drop --p-star/--alpha-star/--beta-star");
    }
    let ns = settings.ns()?;
    let mut summaries: Vec<ReplicationSummary> = Vec::with_capacity(ns.len());
    for &n in &ns {
        let spec = experiment_spec(settings, n)?;
        let s = run_experiment(&spec)?;
        print!("{}", s.to_text());
        let mut w = create(&out.join(format!("estimates_n{n}.csv")))?;
        s.write_records_csv(&mut w)?;
        w.flush()?;
        summaries.push(s);
    }
    let mut w = create(&out.join("summary.csv"))?;
    writeln!(w, "{}", ReplicationSummary::CSV_HEADER)?;
    for s in &summaries {
        writeln!(w, "{}", s.csv_row())?;
    }
    w.flush()?;

    if settings.flag("rates")? {
        let template = experiment_spec(settings, ns[0])?;
        let report = rate_sweep(&template, &ns, settings.reps()?)?;
        let mut w = create(&out.join("rates.csv"))?;
        report.write_csv(&mut w)?;
        w.flush()?;
        println!("rate slope {:.4}", report.slope);
    }
    Ok(())
}

pub fn demo_cmd(settings: &Settings, out: &Path, data: Option<&Path>) -> Result<()> {
    let sample = load_or_simulate(settings, data)?;
    let hists = transformation_demo(&sample, &settings.thetas()?, settings.bins()?)?;
    let mut w = create(&out.join("demo.csv"))?;
    writeln!(w, "alpha,beta,skewness,labelled_skewness,file")?;
    for h in &hists {
        let mut hw = create(&out.join(h.file_name()))?;
        h.write_csv(&mut hw)?;
        hw.flush()?;
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(h.theta.alpha),
            fmt_f64(h.theta.beta),
            fmt_f64(h.skewness),
            h.labelled_skewness.map_or(String::new(), fmt_f64),
            h.file_name()
        )?;
        println!(
            "theta = ({}, {})  skewness = {:.4}{}",
            h.theta.alpha,
            h.theta.beta,
            h.skewness,
            h.labelled_skewness
                .map_or(String::new(), |s| format!("  labelled skewness = {s:.4}"))
        );
    }
    w.flush()?;
    Ok(())
}
