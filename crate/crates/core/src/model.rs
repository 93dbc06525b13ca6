//! Data model and simulation for the contaminated regression model.
//!
//! An observation is `(X, Y)` where, given a latent label `U ~ Bernoulli(p)`,
//! `Y = ε⁰` when `U = 0` (the fully known, pre-centred component) and
//! `Y = α + βX + ε¹` when `U = 1`. `ε⁰ ~ f₀` is known, `ε¹ ~ f` is unknown but
//! symmetric about zero.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::special::{normal_cdf, normal_pdf};

/// Regression shift `θ = (α, β)`; `θ ⊙ x = α + βx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    pub alpha: f64,
    pub beta: f64,
}

impl Theta {
    pub const ZERO: Theta = Theta { alpha: 0.0, beta: 0.0 };

    pub fn new(alpha: f64, beta: f64) -> Self {
        Theta { alpha, beta }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.alpha + self.beta * x
    }

    pub(crate) fn key(&self) -> (u64, u64) {
        (self.alpha.to_bits(), self.beta.to_bits())
    }
}

/// Euclidean parameter `ϑ = (p, α, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vartheta {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Vartheta {
    /// Checked constructor: `0 < p < 1`, `β ≠ 0`, all finite.
    pub fn new(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
        }
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha", format!("{alpha} is not finite")));
        }
        if !beta.is_finite() || beta == 0.0 {
            return Err(Error::invalid("beta", format!("{beta} must be finite and non-zero")));
        }
        Ok(Vartheta { p, alpha, beta })
    }

    pub fn theta(&self) -> Theta {
        Theta::new(self.alpha, self.beta)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.p, self.alpha, self.beta]
    }

    pub(crate) fn from_array_unchecked(a: [f64; 3]) -> Self {
        Vartheta {
            p: a[0],
            alpha: a[1],
            beta: a[2],
        }
    }

    /// `‖ϑ − ϑ'‖₁`
    pub fn l1_distance(&self, other: &Vartheta) -> f64 {
        (self.p - other.p).abs() + (self.alpha - other.alpha).abs() + (self.beta - other.beta).abs()
    }
}

impl fmt::Display for Vartheta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={:.6}, alpha={:.6}, beta={:.6})", self.p, self.alpha, self.beta)
    }
}

/// Compact parameter space `[δ, 1−δ] × [α_lo, α_hi] × [β_lo, β_hi]`.
///
/// A degenerate interval (`lo == hi`) pins that coordinate, which is how the
/// two-parameter `(p, β)` experiments with `α = 0` are expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBox {
    pub p_lo: f64,
    pub p_hi: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl ParamBox {
    pub fn new(p: (f64, f64), alpha: (f64, f64), beta: (f64, f64)) -> Result<Self> {
        let b = ParamBox {
            p_lo: p.0,
            p_hi: p.1,
            alpha_lo: alpha.0,
            alpha_hi: alpha.1,
            beta_lo: beta.0,
            beta_hi: beta.1,
        };
        b.validate()?;
        Ok(b)
    }

    /// Parse `p_lo,p_hi,a_lo,a_hi,b_lo,b_hi`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::invalid("box", format!("`{s}`: {e}")))?;
        if v.len() != 6 {
            return Err(Error::invalid(
                "box",
                format!("expected 6 comma-separated values, got {}", v.len()),
            ));
        }
        ParamBox::new((v[0], v[1]), (v[2], v[3]), (v[4], v[5]))
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.p_lo,
            self.p_hi,
            self.alpha_lo,
            self.alpha_hi,
            self.beta_lo,
            self.beta_hi,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("box", "bounds must be finite"));
        }
        if !(self.p_lo > 0.0 && self.p_lo <= self.p_hi && self.p_hi < 1.0) {
            return Err(Error::invalid(
                "box.p",
                format!("need 0 < p_lo <= p_hi < 1, got [{}, {}]", self.p_lo, self.p_hi),
            ));
        }
        if self.alpha_lo > self.alpha_hi {
            return Err(Error::invalid("box.alpha", "alpha_lo > alpha_hi"));
        }
        if self.beta_lo > self.beta_hi {
            return Err(Error::invalid("box.beta", "beta_lo > beta_hi"));
        }
        if !(self.beta_lo > 0.0 || self.beta_hi < 0.0) {
            return Err(Error::invalid(
                "box.beta",
                format!("interval [{}, {}] must exclude 0", self.beta_lo, self.beta_hi),
            ));
        }
        Ok(())
    }

    /// `δ`, the smallest admissible proportion.
    pub fn delta(&self) -> f64 {
        self.p_lo
    }

    pub fn contains(&self, v: &Vartheta) -> bool {
        (self.p_lo..=self.p_hi).contains(&v.p)
            && (self.alpha_lo..=self.alpha_hi).contains(&v.alpha)
            && (self.beta_lo..=self.beta_hi).contains(&v.beta)
    }

    pub fn lower(&self) -> [f64; 3] {
        [self.p_lo, self.alpha_lo, self.beta_lo]
    }

    pub fn upper(&self) -> [f64; 3] {
        [self.p_hi, self.alpha_hi, self.beta_hi]
    }

    /// Euclidean projection (componentwise clamp).
    pub fn project(&self, v: [f64; 3]) -> [f64; 3] {
        let (lo, hi) = (self.lower(), self.upper());
        [
            v[0].clamp(lo[0], hi[0]),
            v[1].clamp(lo[1], hi[1]),
            v[2].clamp(lo[2], hi[2]),
        ]
    }

    /// Points at the centres of a `k×k×k` partition; pinned coordinates collapse.
    pub fn lattice(&self, k: usize) -> Vec<Vartheta> {
        let axis = |lo: f64, hi: f64| -> Vec<f64> {
            if lo == hi {
                return vec![lo];
            }
            (0..k).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / k as f64).collect()
        };
        let mut out = Vec::new();
        for &p in &axis(self.p_lo, self.p_hi) {
            for &a in &axis(self.alpha_lo, self.alpha_hi) {
                for &b in &axis(self.beta_lo, self.beta_hi) {
                    out.push(Vartheta { p, alpha: a, beta: b });
                }
            }
        }
        out
    }
}

impl fmt::Display for ParamBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.p_lo, self.p_hi, self.alpha_lo, self.alpha_hi, self.beta_lo, self.beta_hi
        )
    }
}

/// Piecewise-linear density given on an increasing grid, zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDist {
    t: Vec<f64>,
    pdf: Vec<f64>,
    cum: Vec<f64>,
}

impl TabulatedDist {
    /// Builds from `(t, pdf)` pairs; the density is renormalised to integrate to one.
    pub fn new(t: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        if t.len() != pdf.len() || t.len() < 2 {
            return Err(Error::invalid(
                "table",
                "need at least two (t, pdf) pairs of equal length",
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "table",
                "abscissae must be finite and strictly increasing",
            ));
        }
        if pdf.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("table", "pdf values must be finite and non-negative"));
        }
        let mut cum = Vec::with_capacity(t.len());
        cum.push(0.0);
        for i in 1..t.len() {
            let area = 0.5 * (pdf[i] + pdf[i - 1]) * (t[i] - t[i - 1]);
            cum.push(cum[i - 1] + area);
        }
        let total = *cum.last().unwrap();
        if !(total > 0.0) {
            return Err(Error::invalid("table", "density has zero mass"));
        }
        Ok(TabulatedDist {
            t,
            pdf: pdf.into_iter().map(|v| v / total).collect(),
            cum: cum.into_iter().map(|v| v / total).collect(),
        })
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.t[0] || x > *self.t.last().unwrap() {
            return None;
        }
        let i = self.t.partition_point(|&v| v <= x);
        Some(i.clamp(1, self.t.len() - 1) - 1)
    }

    fn pdf(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(i) => {
                let w = (x - self.t[i]) / (self.t[i + 1] - self.t[i]);
                self.pdf[i] + w * (self.pdf[i + 1] - self.pdf[i])
            }
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.t[0] {
            return 0.0;
        }
        if x >= *self.t.last().unwrap() {
            return 1.0;
        }
        let i = self.segment(x).unwrap();
        let dx = x - self.t[i];
        let h = self.t[i + 1] - self.t[i];
        let slope = (self.pdf[i + 1] - self.pdf[i]) / h;
        self.cum[i] + self.pdf[i] * dx + 0.5 * slope * dx * dx
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = (self.cum.partition_point(|&c| c < u)).clamp(1, self.t.len() - 1) - 1;
        let h = self.t[i + 1] - self.t[i];
        let a = 0.5 * (self.pdf[i + 1] - self.pdf[i]) / h;
        let b = self.pdf[i];
        let c = self.cum[i] - u;
        // a·dx² + b·dx + c = 0, take the root inside the segment.
        let dx = if a.abs() < 1e-14 {
            if b > 0.0 {
                -c / b
            } else {
                0.0
            }
        } else {
            let disc = (b * b - 4.0 * a * c).max(0.0);
            // Stable form of (-b + sqrt(disc)) / 2a.
            2.0 * (-c) / (b + disc.sqrt())
        };
        self.t[i] + dx.clamp(0.0, h)
    }

    fn moment(&self, k: i32) -> f64 {
        let pts: Vec<f64> = crate::quad::linspace(self.t[0], *self.t.last().unwrap(), 4001);
        let step = pts[1] - pts[0];
        let vals: Vec<f64> = pts.iter().map(|&x| x.powi(k) * self.pdf(x)).collect();
        crate::quad::simpson(&vals, step)
    }
}

/// A univariate distribution with evaluatable density, cdf, quantile and sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Gaussian {
        mean: f64,
        var: f64,
    },
    GaussianMixture {
        weights: Vec<f64>,
        means: Vec<f64>,
        vars: Vec<f64>,
    },
    Table(TabulatedDist),
}

impl DistSpec {
    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        if !mean.is_finite() || !(var.is_finite() && var > 0.0) {
            return Err(Error::invalid("gaussian", format!("mean {mean}, variance {var}")));
        }
        Ok(DistSpec::Gaussian { mean, var })
    }

    pub fn standard_normal() -> Self {
        DistSpec::Gaussian { mean: 0.0, var: 1.0 }
    }

    pub fn mixture(weights: Vec<f64>, means: Vec<f64>, vars: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != vars.len() {
            return Err(Error::invalid(
                "mixture",
                "weights, means and variances must be non-empty and equally long",
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("mixture", "weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("mixture", format!("weights sum to {total}, not 1")));
        }
        if means.iter().any(|m| !m.is_finite()) || vars.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("mixture", "means must be finite and variances positive"));
        }
        Ok(DistSpec::GaussianMixture { weights, means, vars })
    }

    /// `λN(−0.7, ½) + (1−λ)N(0.7λ/(1−λ), ½)` (variances ½): zero mean for every λ,
    /// asymmetric unless λ = ½.
    pub fn asymmetric_mixture(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Domain(format!("lambda = {lambda} is not in (0, 1)")));
        }
        DistSpec::mixture(
            vec![lambda, 1.0 - lambda],
            vec![-0.7, 0.7 * lambda / (1.0 - lambda)],
            vec![0.5, 0.5],
        )
    }

    pub fn table(t: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        Ok(DistSpec::Table(TabulatedDist::new(t, pdf)?))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            DistSpec::Gaussian { mean, var } => normal_pdf(x, *mean, *var),
            DistSpec::GaussianMixture { weights, means, vars } => weights
                .iter()
                .zip(means)
                .zip(vars)
                .map(|((w, m), v)| w * normal_pdf(x, *m, *v))
                .sum(),
            DistSpec::Table(t) => t.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DistSpec::Gaussian { mean, var } => normal_cdf(x, *mean, *var),
            DistSpec::GaussianMixture { weights, means, vars } => weights
                .iter()
                .zip(means)
                .zip(vars)
                .map(|((w, m), v)| w * normal_cdf(x, *m, *v))
                .sum(),
            DistSpec::Table(t) => t.cdf(x),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            DistSpec::Table(t) => t.quantile(u),
            _ => {
                if u <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                if u >= 1.0 {
                    return f64::INFINITY;
                }
                let (mut lo, mut hi) = (self.mean() - 1.0, self.mean() + 1.0);
                let sd = self.variance().sqrt();
                while self.cdf(lo) > u {
                    lo -= 4.0 * sd;
                }
                while self.cdf(hi) < u {
                    hi += 4.0 * sd;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DistSpec::Gaussian { mean, var } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + var.sqrt() * z
            }
            DistSpec::GaussianMixture { weights, means, vars } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut k = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        k = i;
                        break;
                    }
                }
                let z: f64 = StandardNormal.sample(rng);
                means[k] + vars[k].sqrt() * z
            }
            DistSpec::Table(t) => t.quantile(rng.random()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistSpec::Gaussian { mean, .. } => *mean,
            DistSpec::GaussianMixture { weights, means, .. } => weights.iter().zip(means).map(|(w, m)| w * m).sum(),
            DistSpec::Table(t) => t.moment(1),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            DistSpec::Gaussian { var, .. } => *var,
            DistSpec::GaussianMixture { weights, means, vars } => {
                let mu = self.mean();
                weights
                    .iter()
                    .zip(means)
                    .zip(vars)
                    .map(|((w, m), v)| w * (v + (m - mu) * (m - mu)))
                    .sum()
            }
            DistSpec::Table(t) => {
                let mu = t.moment(1);
                t.moment(2) - mu * mu
            }
        }
    }

    /// Interval outside which the pdf is below `1e-17` relative to its mode
    /// and the cdf is within 1e-18 of 0 or 1.
    pub fn effective_support(&self) -> (f64, f64) {
        const R: f64 = 9.0;
        match self {
            DistSpec::Gaussian { mean, var } => (mean - R * var.sqrt(), mean + R * var.sqrt()),
            DistSpec::GaussianMixture { means, vars, .. } => means
                .iter()
                .zip(vars)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (m, v)| {
                    (lo.min(m - R * v.sqrt()), hi.max(m + R * v.sqrt()))
                }),
            DistSpec::Table(t) => (t.t[0], t.t[t.t.len() - 1]),
        }
    }

    /// Checks `pdf(t) = pdf(−t)` on a probe grid.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let sd = self.variance().sqrt();
        (1..=200).all(|k| {
            let t = sd * 0.05 * k as f64;
            (self.pdf(t) - self.pdf(-t)).abs() <= tol
        })
    }

    fn draw_checked<R: Rng + ?Sized>(&self, rng: &mut R, role: &str) -> Result<f64> {
        let v = self.sample(rng);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Generation {
                name: role.to_string(),
                reason: format!("non-finite draw {v}"),
            })
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Gaussian { mean, var } => write!(f, "N({mean}, {var})"),
            DistSpec::GaussianMixture { weights, means, vars } => {
                let parts: Vec<String> = weights
                    .iter()
                    .zip(means)
                    .zip(vars)
                    .map(|((w, m), v)| format!("{w}*N({m}, {v})"))
                    .collect();
                write!(f, "{}", parts.join(" + "))
            }
            DistSpec::Table(t) => write!(f, "table[{} points on {}..{}]", t.t.len(), t.t[0], t.t[t.t.len() - 1]),
        }
    }
}

/// Paired observations plus optional latent labels (kept for diagnostics only;
/// estimators never read them).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Option<Vec<u8>>,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Vec<f64>, u: Option<Vec<u8>>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Dimension("sample is empty".into()));
        }
        if x.len() != y.len() {
            return Err(Error::Dimension(format!("x has {} values, y has {}", x.len(), y.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample", "non-finite value"));
        }
        if let Some(u) = &u {
            if u.len() != x.len() {
                return Err(Error::Dimension(format!("u has {} values, x has {}", u.len(), x.len())));
            }
            if u.iter().any(|&l| l > 1) {
                return Err(Error::invalid("u", "labels must be 0 or 1"));
            }
        }
        Ok(Sample { x, y, u })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Maps `Yᵢ ↦ Yᵢ − (a₀ + b₀Xᵢ)`: turns data from the uncentred model, whose
    /// known component has regression line `(a₀, b₀)`, into the centred one.
    pub fn center(&self, a0: f64, b0: f64) -> Sample {
        Sample {
            x: self.x.clone(),
            y: self.x.iter().zip(&self.y).map(|(x, y)| y - (a0 + b0 * x)).collect(),
            u: self.u.clone(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let map = |e: csv::Error| Error::Io(std::io::Error::other(e));
        match &self.u {
            Some(u) => {
                wr.write_record(["x", "y", "u"]).map_err(map)?;
                for i in 0..self.len() {
                    wr.write_record([fmt_f64(self.x[i]), fmt_f64(self.y[i]), u[i].to_string()])
                        .map_err(map)?;
                }
            }
            None => {
                wr.write_record(["x", "y"]).map_err(map)?;
                for i in 0..self.len() {
                    wr.write_record([fmt_f64(self.x[i]), fmt_f64(self.y[i])]).map_err(map)?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads `x,y[,u]`; errors carry `source` and the offending line.
    pub fn read_csv<R: Read>(r: R, source: &str) -> Result<Sample> {
        let csv_err = |line: u64, reason: String| Error::Csv {
            path: source.to_string(),
            line,
            reason,
        };
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rd.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        let with_u = match names.as_slice() {
            ["x", "y"] => false,
            ["x", "y", "u"] => true,
            [] | [""] => return Err(csv_err(1, "empty file (expected header `x,y[,u]`)".into())),
            _ => {
                return Err(csv_err(
                    1,
                    format!("expected header `x,y[,u]`, found `{}`", names.join(",")),
                ))
            }
        };
        let (mut x, mut y, mut u) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                csv_err(line, e.to_string())
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let num = |i: usize| -> Result<f64> {
                let s = rec.get(i).unwrap_or("");
                let v: f64 = s
                    .parse()
                    .map_err(|_| csv_err(line, format!("cannot parse `{s}` as a number")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(csv_err(line, format!("non-finite value `{s}`")))
                }
            };
            x.push(num(0)?);
            y.push(num(1)?);
            if with_u {
                let s = rec.get(2).unwrap_or("");
                match s {
                    "0" => u.push(0u8),
                    "1" => u.push(1u8),
                    _ => return Err(csv_err(line, format!("label `{s}` is not 0 or 1"))),
                }
            }
        }
        if x.is_empty() {
            return Err(csv_err(2, "no data rows".into()));
        }
        Sample::new(x, y, with_u.then_some(u))
    }

    pub fn load_csv(path: &Path) -> Result<Sample> {
        let f = std::fs::File::open(path).map_err(|e| Error::Csv {
            path: path.display().to_string(),
            line: 0,
            reason: e.to_string(),
        })?;
        Sample::read_csv(f, &path.display().to_string())
    }
}

/// Round-trip float formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Draws `n` observations from the centred model.
pub fn simulate(
    n: usize,
    truth: &Vartheta,
    f0: &DistSpec,
    f1: &DistSpec,
    design: &DistSpec,
    seed: u64,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let truth = Vartheta::new(truth.p, truth.alpha, truth.beta)?;
    let mut rng_x = stream_rng(seed, Stream::Design);
    let mut rng_u = stream_rng(seed, Stream::Labels);
    let mut rng_e0 = stream_rng(seed, Stream::Errors0);
    let mut rng_e1 = stream_rng(seed, Stream::Errors1);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = design.draw_checked(&mut rng_x, "design")?;
        let label = rng_u.random_bool(truth.p);
        let e0 = f0.draw_checked(&mut rng_e0, "f0")?;
        let e1 = f1.draw_checked(&mut rng_e1, "f1")?;
        x.push(xi);
        if label {
            y.push(truth.alpha + truth.beta * xi + e1);
            u.push(1);
        } else {
            y.push(e0);
            u.push(0);
        }
    }
    Sample::new(x, y, Some(u))
}

/// The asymmetric-error variant of model M1: `α = 0`, `f₀ = N(0,1)`, and
/// component-1 errors from [`DistSpec::asymmetric_mixture`].
pub fn simulate_asymmetric(
    n: usize,
    p_star: f64,
    beta_star: f64,
    lambda: f64,
    design: &DistSpec,
    seed: u64,
) -> Result<Sample> {
    let f1 = DistSpec::asymmetric_mixture(lambda)?;
    let truth = Vartheta::new(p_star, 0.0, beta_star)?;
    simulate(n, &truth, &DistSpec::standard_normal(), &f1, design, seed)
}

/// `n` iid draws `V₁…Vₙ` from the instrumental law `Q`.
pub fn sample_weight_points(n: usize, q: &DistSpec, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream_rng(seed, Stream::WeightPoints);
    (0..n).map(|_| q.draw_checked(&mut rng, "q")).collect()
}
