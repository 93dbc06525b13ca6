use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use contamreg::experiments::{InitMode, ModelKind};
use contamreg::{BandwidthRule, DistSpec, KernelSpec, OptimConfig, ParamBox, Theta, Vartheta};

/// Every key accepted in a config file, with its default (empty = unset).
pub const KEYS: &[(&str, &str)] = &[
    ("model", "m1"),
    ("n", "200"),
    ("seed", ""),
    ("p_star", ""),
    ("alpha_star", ""),
    ("beta_star", ""),
    ("design_mean", "0"),
    ("design_var", "9"),
    ("var_f", "1"),
    ("var_f0", "1"),
    ("q_sd", ""),
    ("box", "0.05,0.95,0,0,0.1,3"),
    ("kernel", "triangular"),
    ("bandwidth", "normal-ref"),
    ("m", ""),
    ("gamma", "0.2,0.5,0.5"),
    ("delta", "0.01,0.01,0.01"),
    ("eps_stop", "0.005"),
    ("max_iters", "1000"),
    ("starts", "lattice"),
    ("backtracking", "false"),
    ("init", "oracle"),
    ("reps", "100"),
    ("ns", ""),
    ("rates", "false"),
    ("grid", "10,10"),
    ("p_range", "0.5,0.8"),
    ("beta_range", "0.9,1.1"),
    ("alpha", "0"),
    ("thetas", ""),
    ("bins", ""),
    ("out", "out"),
];

/// Resolved key/value settings: defaults, then the config file, then flags.
#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
    seed_generated: bool,
}

pub fn parse_config_text(text: &str, source: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", source.display(), i + 1))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.iter().any(|(name, _)| *name == k) {
            bail!("{}:{}: unknown key `{k}`", source.display(), i + 1);
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn resolve(file: Option<&Path>, flags: BTreeMap<String, String>) -> Result<Self> {
        let mut values: BTreeMap<String, String> = KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = file {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
            values.extend(parse_config_text(&text, path)?);
        }
        values.extend(flags);
        let seed_generated = values["seed"].is_empty();
        if seed_generated {
            let nanos = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0);
            values.insert("seed".into(), (nanos ^ (nanos >> 29)).to_string());
        }
        Ok(Settings { values, seed_generated })
    }

    pub fn seed_generated(&self) -> bool {
        self.seed_generated
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_empty()
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .parse::<T>()
            .map_err(|e| anyhow!("invalid value for `{key}`: `{}` ({e})", self.raw(key)))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        parse_list(self.raw(key)).with_context(|| format!("invalid value for `{key}`"))
    }

    pub fn n(&self) -> Result<usize> {
        let n: usize = self.num("n")?;
        if n < 10 {
            bail!("invalid value for `n`: {n} is below the minimum of 10");
        }
        Ok(n)
    }

    pub fn seed(&self) -> Result<u64> {
        self.num("seed")
    }

    pub fn model(&self) -> Result<ModelKind> {
        Ok(self.raw("model").parse::<ModelKind>()?)
    }

    pub fn has_truth_override(&self) -> bool {
        ["p_star", "alpha_star", "beta_star"].iter().any(|k| self.is_set(k))
    }

    pub fn truth(&self) -> Result<Vartheta> {
        let base = self.model()?.truth();
        let get = |k: &str, d: f64| -> Result<f64> {
            if self.is_set(k) {
                self.num(k)
            } else {
                Ok(d)
            }
        };
        Ok(Vartheta::new(
            get("p_star", base.p)?,
            get("alpha_star", base.alpha)?,
            get("beta_star", base.beta)?,
        )?)
    }

    pub fn design(&self) -> Result<DistSpec> {
        Ok(DistSpec::gaussian(self.num("design_mean")?, self.num("design_var")?)?)
    }

    pub fn design_mean(&self) -> Result<f64> {
        self.num("design_mean")
    }

    pub fn design_var(&self) -> Result<f64> {
        self.num("design_var")
    }

    pub fn var_f(&self) -> Result<f64> {
        self.num("var_f")
    }

    pub fn var_f0(&self) -> Result<f64> {
        self.num("var_f0")
    }

    pub fn f0(&self) -> Result<DistSpec> {
        Ok(DistSpec::gaussian(0.0, self.var_f0()?)?)
    }

    /// The unknown error law: the model's own, or `N(0, var_f)` when overridden.
    pub fn f1(&self) -> Result<DistSpec> {
        let model = self.model()?;
        if matches!(model, ModelKind::Asymmetric { .. }) {
            Ok(model.f1()?)
        } else {
            Ok(DistSpec::gaussian(0.0, self.var_f()?)?)
        }
    }

    pub fn q(&self) -> Result<DistSpec> {
        if self.is_set("q_sd") {
            let sd: f64 = self.num("q_sd")?;
            Ok(DistSpec::gaussian(0.0, sd * sd)?)
        } else {
            Ok(self.model()?.q())
        }
    }

    pub fn param_box(&self) -> Result<ParamBox> {
        Ok(ParamBox::parse(self.raw("box"))?)
    }

    pub fn kernel(&self) -> Result<KernelSpec> {
        Ok(self.raw("kernel").parse::<KernelSpec>()?)
    }

    pub fn bandwidth(&self) -> Result<BandwidthRule> {
        Ok(self.raw("bandwidth").parse::<BandwidthRule>()?)
    }

    pub fn weight_points(&self) -> Result<Option<usize>> {
        if self.is_set("m") {
            Ok(Some(self.num("m")?))
        } else {
            Ok(None)
        }
    }

    pub fn reps(&self) -> Result<usize> {
        self.num("reps")
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        self.num(key)
    }

    pub fn init(&self) -> Result<InitMode> {
        match self.raw("init") {
            "oracle" => Ok(InitMode::Oracle),
            "multistart" | "multi-start" => Ok(InitMode::MultiStart),
            other => bail!("invalid value for `init`: `{other}` (expected oracle or multistart)"),
        }
    }

    /// Optimizer settings; `starts` is `lattice`, `oracle`, or `p,a,b;p,a,b…`
    /// optionally followed by `+lattice`.
    pub fn optimizer(&self) -> Result<OptimConfig> {
        let gamma = self.list("gamma")?;
        let gamma = match gamma.as_slice() {
            [gp, ga, gb] => [*gp, *ga, *gb],
            [gp, gb] => [*gp, 0.5, *gb],
            _ => bail!("invalid value for `gamma`: expected 2 or 3 comma-separated numbers"),
        };
        let delta = self.list("delta")?;
        let delta_init: [f64; 3] = match delta.as_slice() {
            [d] => [*d; 3],
            [dp, da, db] => [*dp, *da, *db],
            _ => bail!("invalid value for `delta`: expected 1 or 3 numbers"),
        };
        let (starts, lattice) = self.starts()?;
        let cfg = OptimConfig {
            delta_init,
            eps_stop: self.num("eps_stop")?,
            gamma,
            max_iters: self.num("max_iters")?,
            starts,
            lattice,
            backtracking: self.flag("backtracking")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn starts(&self) -> Result<(Vec<Vartheta>, bool)> {
        let raw = self.raw("starts").trim();
        let mut lattice = false;
        let mut starts = Vec::new();
        for part in raw.split(['+', ';']).map(str::trim).filter(|s| !s.is_empty()) {
            match part {
                "lattice" => lattice = true,
                "oracle" => starts.push(self.truth()?),
                _ => {
                    let v = parse_list(part).with_context(|| format!("invalid start `{part}`"))?;
                    let [p, a, b] = v[..] else {
                        bail!("invalid start `{part}`: expected p,alpha,beta");
                    };
                    starts.push(Vartheta::new(p, a, b)?);
                }
            }
        }
        if starts.is_empty() && !lattice {
            bail!("invalid value for `starts`: no start points");
        }
        Ok((starts, lattice))
    }

    pub fn ns(&self) -> Result<Vec<usize>> {
        if !self.is_set("ns") {
            return Ok(vec![self.n()?]);
        }
        self.raw("ns")
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| anyhow!("invalid value for `ns`: `{s}` ({e})"))
            })
            .collect()
    }

    pub fn grid(&self) -> Result<(usize, usize)> {
        let g = self.list("grid")?;
        match g.as_slice() {
            [a, b] if a.fract() == 0.0 && b.fract() == 0.0 && *a >= 0.0 && *b >= 0.0 => Ok((*a as usize, *b as usize)),
            _ => bail!("invalid value for `grid`: expected two integers np,nb"),
        }
    }

    pub fn range(&self, key: &str) -> Result<(f64, f64)> {
        match self.list(key)?.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => bail!("invalid value for `{key}`: expected lo,hi"),
        }
    }

    pub fn alpha(&self) -> Result<f64> {
        self.num("alpha")
    }

    pub fn thetas(&self) -> Result<Vec<Theta>> {
        if !self.is_set("thetas") {
            let t = self.truth()?;
            return Ok(vec![Theta::ZERO, Theta::new(t.alpha / 2.0, t.beta / 2.0), t.theta()]);
        }
        self.raw("thetas")
            .split(';')
            .map(|part| match parse_list(part)?.as_slice() {
                [a, b] => Ok(Theta::new(*a, *b)),
                _ => bail!("invalid value for `thetas`: `{part}` (expected alpha,beta;alpha,beta…)"),
            })
            .collect()
    }

    pub fn bins(&self) -> Result<Option<usize>> {
        if self.is_set("bins") {
            Ok(Some(self.num("bins")?))
        } else {
            Ok(None)
        }
    }

    /// Parses every setting so invalid values fail before any computation.
    pub fn validate(&self) -> Result<()> {
        self.n()?;
        self.seed()?;
        self.truth()?;
        self.design()?;
        self.f0()?;
        self.f1()?;
        self.q()?;
        self.param_box()?;
        self.kernel()?;
        self.bandwidth()?;
        self.weight_points()?;
        self.reps()?;
        self.flag("backtracking")?;
        self.flag("rates")?;
        self.init()?;
        self.optimizer()?;
        self.ns()?;
        self.grid()?;
        self.range("p_range")?;
        self.range("beta_range")?;
        self.alpha()?;
        self.thetas()?;
        self.bins()?;
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out"))
    }

    /// `key = value` lines for every resolved setting.
    pub fn echo(&self, command: &str) -> String {
        let mut s = format!("command = {command}\n");
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|e| anyhow!("`{t}` is not a number ({e})"))
        })
        .collect()
}
