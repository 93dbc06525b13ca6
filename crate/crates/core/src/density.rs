//! Kernels, bandwidths and the nonparametric / Monte-Carlo estimators built on
//! the θ-transformation `Yᵢ^θ = Yᵢ − θ ⊙ Xᵢ`.
//!
//! | estimator | formula |
//! |-----------|---------|
//! | `Ψ̂(t)`  | `(1/nb) Σ K((t − Yᵢ^θ)/b)` |
//! | `F̃(y)`  | `(1/n) Σ K_cdf((y − Yᵢ^θ)/b)` |
//! | `Î(z)`  | `(1/n) Σ f₀(z + θ⊙Xᵢ)` |
//! | `Ĵ(y)`  | `(1/n) Σ F₀(y + θ⊙Xᵢ)` |
//! | `Ĩ(t)`  | `(1/nb) Σ K((t − θ⊙Xᵢ − ε̃ᵢ)/b)` |
//! | `J̃(y)`  | `(1/n) Σ K_cdf((y − θ⊙Xᵢ − ε̃ᵢ)/b)` |
//!
//! Every estimator comes in a scalar and a grid form. The kernel sums are
//! restricted to a window of sorted points, so a single evaluation costs
//! `O(log n + window)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{DistSpec, Sample, Theta};
use crate::special::{std_normal_cdf, std_normal_pdf, NormalTable};

/// Second-order symmetric kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelSpec {
    Triangular,
    Gaussian,
}

impl KernelSpec {
    #[inline]
    pub fn k(&self, t: f64) -> f64 {
        match self {
            KernelSpec::Triangular => {
                let a = t.abs();
                if a < 1.0 {
                    1.0 - a
                } else {
                    0.0
                }
            }
            KernelSpec::Gaussian => std_normal_pdf(t),
        }
    }

    /// Antiderivative `∫_{−∞}^t K`.
    #[inline]
    pub fn k_cdf(&self, t: f64) -> f64 {
        match self {
            KernelSpec::Triangular => {
                if t <= -1.0 {
                    0.0
                } else if t <= 0.0 {
                    0.5 * (1.0 + t) * (1.0 + t)
                } else if t < 1.0 {
                    1.0 - 0.5 * (1.0 - t) * (1.0 - t)
                } else {
                    1.0
                }
            }
            KernelSpec::Gaussian => std_normal_cdf(t),
        }
    }

    /// `∫ t² K(t) dt`
    pub fn second_moment(&self) -> f64 {
        match self {
            KernelSpec::Triangular => 1.0 / 6.0,
            KernelSpec::Gaussian => 1.0,
        }
    }

    /// Half-width of the evaluation window in units of `b`. Exact for the
    /// triangular kernel; for the Gaussian the neglected mass is below 1e-23.
    pub fn radius(&self) -> f64 {
        match self {
            KernelSpec::Triangular => 1.0,
            KernelSpec::Gaussian => 10.0,
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "triangular" => Ok(KernelSpec::Triangular),
            "gaussian" => Ok(KernelSpec::Gaussian),
            other => Err(Error::invalid(
                "kernel",
                format!("unknown kernel `{other}` (triangular|gaussian)"),
            )),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelSpec::Triangular => "triangular",
            KernelSpec::Gaussian => "gaussian",
        })
    }
}

/// How `bₙ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// `√(1 + 4p(1−p)) · (4/(3n))^{1/5}` with a working proportion `p`.
    NormalReference {
        p: f64,
    },
    Fixed(f64),
    /// `c · n^{−exponent}`
    Power {
        c: f64,
        exponent: f64,
    },
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule::NormalReference { p: 0.5 }
    }
}

impl BandwidthRule {
    pub fn evaluate(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::invalid("n", "bandwidth needs n >= 1"));
        }
        let n = n as f64;
        let b = match *self {
            BandwidthRule::NormalReference { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::invalid("bandwidth.p", format!("{p} is not in (0, 1]")));
                }
                (1.0 + 4.0 * p * (1.0 - p)).sqrt() * (4.0 / (3.0 * n)).powf(0.2)
            }
            BandwidthRule::Fixed(b) => b,
            BandwidthRule::Power { c, exponent } => c * n.powf(-exponent),
        };
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Domain(format!("bandwidth {b} must be positive")));
        }
        Ok(b)
    }

    /// Asymptotic conditions `bₙ → 0`, `nbₙ → ∞`, `√n bₙ² → 0` that the rule
    /// fails, one message per violated condition.
    pub fn condition_warnings(&self) -> Vec<String> {
        let exponent = match *self {
            BandwidthRule::NormalReference { .. } => 0.2,
            BandwidthRule::Fixed(_) => 0.0,
            BandwidthRule::Power { exponent, .. } => exponent,
        };
        let mut out = Vec::new();
        if exponent <= 0.0 {
            out.push(format!("bandwidth rule `{self}` does not shrink to 0"));
        }
        if exponent >= 1.0 {
            out.push(format!("bandwidth rule `{self}`: n*b_n does not diverge"));
        }
        if exponent <= 0.25 {
            out.push(format!(
                "bandwidth rule `{self}`: sqrt(n)*b_n^2 does not vanish (exponent {exponent} <= 1/4)"
            ));
        }
        out
    }
}

impl FromStr for BandwidthRule {
    type Err = Error;

    /// `normal-ref`, `normal-ref:<p>`, `fixed:<b>` or `power:<c>,<e>`; `paper` is an alias of `normal-ref`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid("bandwidth", format!("`{s}`: {e}")))
        };
        let rule = match kind {
            "normal-ref" | "paper" if arg.is_empty() => BandwidthRule::default(),
            "normal-ref" | "paper" => BandwidthRule::NormalReference { p: num(arg)? },
            "fixed" => BandwidthRule::Fixed(num(arg)?),
            "power" => {
                let (c, e) = arg
                    .split_once(',')
                    .ok_or_else(|| Error::invalid("bandwidth", format!("`{s}`: expected power:<c>,<e>")))?;
                BandwidthRule::Power {
                    c: num(c)?,
                    exponent: num(e)?,
                }
            }
            _ => {
                return Err(Error::invalid(
                    "bandwidth",
                    format!("`{s}`: expected normal-ref, normal-ref:<p>, fixed:<b> or power:<c>,<e>"),
                ))
            }
        };
        rule.evaluate(100)?;
        Ok(rule)
    }
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthRule::NormalReference { p } => write!(f, "normal-ref:{p}"),
            BandwidthRule::Fixed(b) => write!(f, "fixed:{b}"),
            BandwidthRule::Power { c, exponent } => write!(f, "power:{c},{exponent}"),
        }
    }
}

fn check_b(b: f64) -> Result<()> {
    if b.is_finite() && b > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("bandwidth {b} must be positive")))
    }
}

/// Points sorted ascending, each carrying a weight (the matching `Xᵢ`).
#[derive(Debug, Clone, PartialEq)]
pub struct SortedPoints {
    pts: Vec<f64>,
    weights: Vec<f64>,
}

impl SortedPoints {
    pub fn new(points: &[f64], weights: &[f64]) -> Self {
        debug_assert_eq!(points.len(), weights.len());
        let mut idx: Vec<usize> = (0..points.len()).collect();
        idx.sort_by(|&a, &b| points[a].total_cmp(&points[b]).then(a.cmp(&b)));
        SortedPoints {
            pts: idx.iter().map(|&i| points[i]).collect(),
            weights: idx.iter().map(|&i| weights[i]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.pts
    }

    pub fn min(&self) -> f64 {
        self.pts[0]
    }

    pub fn max(&self) -> f64 {
        self.pts[self.pts.len() - 1]
    }

    /// Index range of points in `[lo, hi]`.
    #[inline]
    fn window(&self, lo: f64, hi: f64) -> (usize, usize) {
        (
            self.pts.partition_point(|&p| p < lo),
            self.pts.partition_point(|&p| p <= hi),
        )
    }

    /// `Σ K((t − pᵢ)/b)`
    pub fn kernel_sum(&self, kernel: KernelSpec, b: f64, t: f64) -> f64 {
        let r = kernel.radius() * b;
        let (lo, hi) = self.window(t - r, t + r);
        self.pts[lo..hi].iter().map(|&p| kernel.k((t - p) / b)).sum()
    }

    /// `Σ wᵢ K((t − pᵢ)/b)`
    pub fn weighted_kernel_sum(&self, kernel: KernelSpec, b: f64, t: f64) -> f64 {
        let r = kernel.radius() * b;
        let (lo, hi) = self.window(t - r, t + r);
        self.pts[lo..hi]
            .iter()
            .zip(&self.weights[lo..hi])
            .map(|(&p, &w)| w * kernel.k((t - p) / b))
            .sum()
    }

    /// `Σ K_cdf((y − pᵢ)/b)`
    pub fn kernel_cdf_sum(&self, kernel: KernelSpec, b: f64, y: f64) -> f64 {
        let r = kernel.radius() * b;
        let (lo, hi) = self.window(y - r, y + r);
        let window: f64 = self.pts[lo..hi].iter().map(|&p| kernel.k_cdf((y - p) / b)).sum();
        lo as f64 + window
    }
}

/// The θ-transformed responses `Yᵢ^θ`, kept both in sample order and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTransformed {
    pub theta: Theta,
    y_theta: Vec<f64>,
    sorted: SortedPoints,
}

impl ThetaTransformed {
    pub fn y_theta(&self) -> &[f64] {
        &self.y_theta
    }

    pub fn sorted(&self) -> &SortedPoints {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.y_theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_theta.is_empty()
    }
}

pub fn theta_transform(sample: &Sample, theta: Theta) -> ThetaTransformed {
    let y_theta: Vec<f64> = sample
        .x
        .iter()
        .zip(&sample.y)
        .map(|(&x, &y)| y - theta.apply(x))
        .collect();
    let sorted = SortedPoints::new(&y_theta, &sample.x);
    ThetaTransformed { theta, y_theta, sorted }
}

/// `Ψ̂ₙ,θ(t)`
pub fn kde_psi(data: &ThetaTransformed, t: f64, kernel: KernelSpec, b: f64) -> Result<f64> {
    check_b(b)?;
    Ok(data.sorted.kernel_sum(kernel, b, t) / (data.len() as f64 * b))
}

pub fn kde_psi_grid(data: &ThetaTransformed, ts: &[f64], kernel: KernelSpec, b: f64) -> Result<Vec<f64>> {
    check_b(b)?;
    let scale = 1.0 / (data.len() as f64 * b);
    Ok(ts
        .iter()
        .map(|&t| data.sorted.kernel_sum(kernel, b, t) * scale)
        .collect())
}

/// `Ψ̃ₙ,β(t) = (1/nb) Σ Xᵢ K((t − Yᵢ^θ)/b)`, the β-derivative of `F̃ₙ,θ(t)`.
pub fn psi_beta(data: &ThetaTransformed, t: f64, kernel: KernelSpec, b: f64) -> Result<f64> {
    check_b(b)?;
    Ok(data.sorted.weighted_kernel_sum(kernel, b, t) / (data.len() as f64 * b))
}

/// `F̃ₙ,θ(y)`
pub fn smoothed_cdf(data: &ThetaTransformed, y: f64, kernel: KernelSpec, b: f64) -> Result<f64> {
    check_b(b)?;
    Ok(data.sorted.kernel_cdf_sum(kernel, b, y) / data.len() as f64)
}

pub fn smoothed_cdf_grid(data: &ThetaTransformed, ys: &[f64], kernel: KernelSpec, b: f64) -> Result<Vec<f64>> {
    check_b(b)?;
    let scale = 1.0 / data.len() as f64;
    Ok(ys
        .iter()
        .map(|&y| data.sorted.kernel_cdf_sum(kernel, b, y) * scale)
        .collect())
}

/// Monte-Carlo averages over the design for the known component:
/// `Î(z)`, `Ĵ(y)` and `jₙ,β(z) = (1/n) Σ Xᵢ f₀(z + θ⊙Xᵢ)`.
#[derive(Debug, Clone)]
pub struct KnownComponent {
    centres: SortedPoints,
    f0: DistSpec,
    /// `(mean, 1/sd)` when `f₀` is Gaussian; evaluated through [`NormalTable`].
    gauss: Option<(f64, f64)>,
    support: (f64, f64),
}

impl KnownComponent {
    pub fn new(sample: &Sample, theta: Theta, f0: &DistSpec) -> Self {
        let c: Vec<f64> = sample.x.iter().map(|&x| theta.apply(x)).collect();
        let gauss = match *f0 {
            DistSpec::Gaussian { mean, var } => Some((mean, 1.0 / var.sqrt())),
            _ => None,
        };
        KnownComponent {
            centres: SortedPoints::new(&c, &sample.x),
            f0: f0.clone(),
            gauss,
            support: f0.effective_support(),
        }
    }

    fn n(&self) -> f64 {
        self.centres.len() as f64
    }

    /// `f₀(z + cᵢ)` is negligible unless `cᵢ ∈ [lo − z, hi − z]`.
    #[inline]
    fn window(&self, z: f64) -> (usize, usize) {
        self.centres.window(self.support.0 - z, self.support.1 - z)
    }

    /// `Σ g(z + cᵢ)` over the window, with `g` the pdf (`cdf = false`) or cdf of `f₀`.
    #[inline]
    fn sum_over(&self, z: f64, lo: usize, hi: usize, cdf: bool) -> f64 {
        let pts = &self.centres.pts[lo..hi];
        match self.gauss {
            Some((m, inv)) => {
                let t = NormalTable::get();
                if cdf {
                    pts.iter().map(|&c| t.cdf((z + c - m) * inv)).sum()
                } else {
                    pts.iter().map(|&c| t.pdf((z + c - m) * inv)).sum::<f64>() * inv
                }
            }
            None if cdf => pts.iter().map(|&c| self.f0.cdf(z + c)).sum(),
            None => pts.iter().map(|&c| self.f0.pdf(z + c)).sum(),
        }
    }

    pub fn i_hat(&self, z: f64) -> f64 {
        let (lo, hi) = self.window(z);
        self.sum_over(z, lo, hi, false) / self.n()
    }

    pub fn j_hat(&self, y: f64) -> f64 {
        let (lo, hi) = self.window(y);
        // Points above the window have F₀ = 1.
        ((self.centres.len() - hi) as f64 + self.sum_over(y, lo, hi, true)) / self.n()
    }

    pub fn j_beta(&self, z: f64) -> f64 {
        self.i_and_j_beta(z).1
    }

    /// `(Î(z), jₙ,β(z))` sharing the density evaluations.
    pub fn i_and_j_beta(&self, z: f64) -> (f64, f64) {
        let (lo, hi) = self.window(z);
        let pts = self.centres.pts[lo..hi].iter().zip(&self.centres.weights[lo..hi]);
        let (mut si, mut sj) = (0.0, 0.0);
        match self.gauss {
            Some((m, inv)) => {
                let t = NormalTable::get();
                for (&c, &x) in pts {
                    let d = t.pdf((z + c - m) * inv);
                    si += d;
                    sj += x * d;
                }
                si *= inv;
                sj *= inv;
            }
            None => {
                for (&c, &x) in pts {
                    let d = self.f0.pdf(z + c);
                    si += d;
                    sj += x * d;
                }
            }
        }
        (si / self.n(), sj / self.n())
    }

    /// Smallest `z` with a non-negligible `Î(z)`.
    pub fn lower_edge(&self) -> f64 {
        self.support.0 - self.centres.max()
    }

    pub fn upper_edge(&self) -> f64 {
        self.support.1 - self.centres.min()
    }
}

/// `Îₙ,θ(z)`
pub fn mc_i(sample: &Sample, theta: Theta, f0: &DistSpec, z: f64) -> f64 {
    KnownComponent::new(sample, theta, f0).i_hat(z)
}

pub fn mc_i_grid(sample: &Sample, theta: Theta, f0: &DistSpec, zs: &[f64]) -> Vec<f64> {
    let kc = KnownComponent::new(sample, theta, f0);
    zs.iter().map(|&z| kc.i_hat(z)).collect()
}

/// `Ĵₙ,θ(y)`
pub fn mc_j(sample: &Sample, theta: Theta, f0: &DistSpec, y: f64) -> f64 {
    KnownComponent::new(sample, theta, f0).j_hat(y)
}

pub fn mc_j_grid(sample: &Sample, theta: Theta, f0: &DistSpec, ys: &[f64]) -> Vec<f64> {
    let kc = KnownComponent::new(sample, theta, f0);
    ys.iter().map(|&y| kc.j_hat(y)).collect()
}

/// Kernel smoothing of the simulated known-component sample
/// `ε̃ᵢ − θ⊙Xᵢ`, giving `Ĩₙ,θ` and `J̃ₙ,θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedComponent {
    centres: SortedPoints,
    kernel: KernelSpec,
    b: f64,
}

impl SimulatedComponent {
    pub fn new(sample: &Sample, theta: Theta, eps0_sim: &[f64], kernel: KernelSpec, b: f64) -> Result<Self> {
        check_b(b)?;
        if eps0_sim.len() != sample.len() {
            return Err(Error::Dimension(format!(
                "simulated f0 sample has {} values, data has {}",
                eps0_sim.len(),
                sample.len()
            )));
        }
        let c: Vec<f64> = sample
            .x
            .iter()
            .zip(eps0_sim)
            .map(|(&x, &e)| e - theta.apply(x))
            .collect();
        Ok(SimulatedComponent {
            centres: SortedPoints::new(&c, &sample.x),
            kernel,
            b,
        })
    }

    pub fn i_tilde(&self, t: f64) -> f64 {
        self.centres.kernel_sum(self.kernel, self.b, t) / (self.centres.len() as f64 * self.b)
    }

    pub fn j_tilde(&self, y: f64) -> f64 {
        self.centres.kernel_cdf_sum(self.kernel, self.b, y) / self.centres.len() as f64
    }

    pub fn centres(&self) -> &SortedPoints {
        &self.centres
    }
}

/// `Ĩₙ,θ(t)`
pub fn sim_i_tilde(sample: &Sample, theta: Theta, eps0_sim: &[f64], kernel: KernelSpec, b: f64, t: f64) -> Result<f64> {
    Ok(SimulatedComponent::new(sample, theta, eps0_sim, kernel, b)?.i_tilde(t))
}

pub fn sim_i_tilde_grid(
    sample: &Sample,
    theta: Theta,
    eps0_sim: &[f64],
    kernel: KernelSpec,
    b: f64,
    ts: &[f64],
) -> Result<Vec<f64>> {
    let sc = SimulatedComponent::new(sample, theta, eps0_sim, kernel, b)?;
    Ok(ts.iter().map(|&t| sc.i_tilde(t)).collect())
}

/// `J̃ₙ,θ(y)`
pub fn sim_j_tilde(sample: &Sample, theta: Theta, eps0_sim: &[f64], kernel: KernelSpec, b: f64, y: f64) -> Result<f64> {
    Ok(SimulatedComponent::new(sample, theta, eps0_sim, kernel, b)?.j_tilde(y))
}

pub fn sim_j_tilde_grid(
    sample: &Sample,
    theta: Theta,
    eps0_sim: &[f64],
    kernel: KernelSpec,
    b: f64,
    ys: &[f64],
) -> Result<Vec<f64>> {
    let sc = SimulatedComponent::new(sample, theta, eps0_sim, kernel, b)?;
    Ok(ys.iter().map(|&y| sc.j_tilde(y)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate, Vartheta};
    use crate::quad::{integrate, integrate_piecewise, linspace};
    use crate::rng::{stream_rng, Stream};

    fn m1(n: usize, seed: u64) -> Sample {
        let n01 = DistSpec::standard_normal();
        let truth = Vartheta::new(0.7, 0.0, 1.0).unwrap();
        simulate(n, &truth, &n01, &n01, &DistSpec::gaussian(0.0, 9.0).unwrap(), seed).unwrap()
    }

    fn eps0(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, Stream::SimulatedErrors0);
        (0..n).map(|_| DistSpec::standard_normal().sample(&mut rng)).collect()
    }

    fn brute_kde(y: &[f64], kernel: KernelSpec, b: f64, t: f64) -> f64 {
        y.iter().map(|&v| kernel.k((t - v) / b)).sum::<f64>() / (y.len() as f64 * b)
    }

    #[test]
    fn kernels_are_even_densities() {
        for k in [KernelSpec::Triangular, KernelSpec::Gaussian] {
            assert_eq!(k.k_cdf(0.0), 0.5);
            for t in [0.1, 0.5, 0.99, 2.0] {
                assert_eq!(k.k(t), k.k(-t));
                assert!((k.k_cdf(t) + k.k_cdf(-t) - 1.0).abs() < 1e-15);
            }
            let r = k.radius();
            let mass = integrate(|t| k.k(t), -r, r, 1e-14, 1e-14).unwrap();
            assert!((mass - 1.0).abs() < 1e-12);
            let m2 = integrate(|t| t * t * k.k(t), -r, r, 1e-14, 1e-14).unwrap();
            assert!((m2 - k.second_moment()).abs() < 1e-12);
        }
        // piecewise antiderivative
        let k = KernelSpec::Triangular;
        assert_eq!(k.k_cdf(-1.5), 0.0);
        assert_eq!(k.k_cdf(-0.5), 0.125);
        assert_eq!(k.k_cdf(0.5), 0.875);
        assert_eq!(k.k_cdf(1.0), 1.0);
    }

    #[test]
    fn normal_reference_bandwidth_at_n100() {
        let b = BandwidthRule::default().evaluate(100).unwrap();
        assert!((b - 2f64.sqrt() * (4.0f64 / 300.0).powf(0.2)).abs() < 1e-15);
        assert!(!BandwidthRule::default().condition_warnings().is_empty());
        assert!(BandwidthRule::Power { c: 1.0, exponent: 0.3 }
            .condition_warnings()
            .is_empty());
        assert!(BandwidthRule::Fixed(-1.0).evaluate(10).is_err());
    }

    #[test]
    fn bandwidth_parsing() {
        assert_eq!(
            "normal-ref".parse::<BandwidthRule>().unwrap(),
            BandwidthRule::NormalReference { p: 0.5 }
        );
        assert_eq!(
            "paper:0.7".parse::<BandwidthRule>().unwrap(),
            BandwidthRule::NormalReference { p: 0.7 }
        );
        assert_eq!("fixed:0.3".parse::<BandwidthRule>().unwrap(), BandwidthRule::Fixed(0.3));
        assert_eq!(
            "power:1.2,0.3".parse::<BandwidthRule>().unwrap(),
            BandwidthRule::Power { c: 1.2, exponent: 0.3 }
        );
        assert!("fixed:0".parse::<BandwidthRule>().is_err());
        assert!("silverman".parse::<BandwidthRule>().is_err());
        let r: BandwidthRule = "power:1.2,0.3".parse().unwrap();
        assert_eq!(r.to_string().parse::<BandwidthRule>().unwrap(), r);
    }

    #[test]
    fn theta_transform_examples() {
        let s = Sample::new(vec![2.0], vec![5.0], None).unwrap();
        assert_eq!(theta_transform(&s, Theta::new(1.0, 2.0)).y_theta(), &[0.0]);
        let s = m1(50, 1);
        assert_eq!(theta_transform(&s, Theta::ZERO).y_theta(), s.y.as_slice());
    }

    #[test]
    fn kde_small_cases() {
        let s = Sample::new(vec![0.0], vec![0.0], None).unwrap();
        let d = theta_transform(&s, Theta::ZERO);
        assert_eq!(kde_psi(&d, 0.0, KernelSpec::Triangular, 1.0).unwrap(), 1.0);
        assert_eq!(smoothed_cdf(&d, 0.0, KernelSpec::Gaussian, 0.7).unwrap(), 0.5);
        assert_eq!(smoothed_cdf(&d, 1e6, KernelSpec::Triangular, 0.7).unwrap(), 1.0);
        assert!(kde_psi(&d, 0.0, KernelSpec::Triangular, 0.0).is_err());

        let s = Sample::new(vec![0.0, 0.0], vec![-1.0, 1.0], None).unwrap();
        let d = theta_transform(&s, Theta::ZERO);
        let v = kde_psi(&d, 0.0, KernelSpec::Gaussian, 1.0).unwrap();
        assert!((v - 0.241_970_724_519_143_37).abs() < 1e-15);
    }

    #[test]
    fn windowed_sums_match_brute_force() {
        let s = m1(300, 2);
        let d = theta_transform(&s, Theta::new(0.3, 0.8));
        for k in [KernelSpec::Triangular, KernelSpec::Gaussian] {
            for t in linspace(-12.0, 12.0, 97) {
                let fast = kde_psi(&d, t, k, 0.4).unwrap();
                assert!((fast - brute_kde(d.y_theta(), k, 0.4, t)).abs() < 1e-14);
                let cdf: f64 = d.y_theta().iter().map(|&v| k.k_cdf((t - v) / 0.4)).sum::<f64>() / 300.0;
                assert!((smoothed_cdf(&d, t, k, 0.4).unwrap() - cdf).abs() < 1e-14);
                let pb: f64 = d
                    .y_theta()
                    .iter()
                    .zip(&s.x)
                    .map(|(&v, &x)| x * k.k((t - v) / 0.4))
                    .sum::<f64>()
                    / (300.0 * 0.4);
                assert!((psi_beta(&d, t, k, 0.4).unwrap() - pb).abs() < 1e-13);
            }
        }
        let f0 = DistSpec::standard_normal();
        let kc = KnownComponent::new(&s, Theta::new(0.3, 0.8), &f0);
        for z in linspace(-40.0, 40.0, 81) {
            let i: f64 = s.x.iter().map(|&x| f0.pdf(z + 0.3 + 0.8 * x)).sum::<f64>() / 300.0;
            let j: f64 = s.x.iter().map(|&x| f0.cdf(z + 0.3 + 0.8 * x)).sum::<f64>() / 300.0;
            assert!((kc.i_hat(z) - i).abs() < 1e-14);
            assert!((kc.j_hat(z) - j).abs() < 1e-14);
        }
    }

    #[test]
    fn kde_integrates_to_one_and_cdf_matches_quadrature() {
        let s = m1(200, 3);
        let b = BandwidthRule::default().evaluate(200).unwrap();
        for theta in [Theta::ZERO, Theta::new(0.5, 1.0), Theta::new(-1.0, 1.5)] {
            let d = theta_transform(&s, theta);
            let mut breaks: Vec<f64> = d.y_theta().iter().flat_map(|&v| [v - b, v, v + b]).collect();
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let psi = |t: f64| kde_psi(&d, t, KernelSpec::Triangular, b).unwrap();
            let mass = integrate_piecewise(psi, &breaks, 1e-12).unwrap();
            assert!((mass - 1.0).abs() < 1e-10);
            for y in linspace(d.sorted().min() - b, d.sorted().max() + b, 25) {
                let mut br: Vec<f64> = breaks.iter().copied().filter(|&v| v < y).collect();
                br.push(y);
                let q = integrate_piecewise(psi, &br, 1e-12).unwrap();
                assert!((q - smoothed_cdf(&d, y, KernelSpec::Triangular, b).unwrap()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn kde_self_convergence() {
        let n01 = DistSpec::standard_normal();
        let sup_err = |n: usize| {
            let s = Sample::new(
                vec![0.0; n],
                {
                    let mut rng = stream_rng(17, Stream::Errors1);
                    (0..n).map(|_| n01.sample(&mut rng)).collect()
                },
                None,
            )
            .unwrap();
            let d = theta_transform(&s, Theta::ZERO);
            let b = BandwidthRule::NormalReference { p: 1.0 }.evaluate(n).unwrap();
            linspace(-4.0, 4.0, 161)
                .into_iter()
                .map(|t| (kde_psi(&d, t, KernelSpec::Triangular, b).unwrap() - n01.pdf(t)).abs())
                .fold(0.0, f64::max)
        };
        assert!(sup_err(10_000) < sup_err(1_000));
    }

    #[test]
    fn mc_estimators_examples() {
        let f0 = DistSpec::standard_normal();
        let s = Sample::new(vec![0.0, 1.0], vec![0.0, 0.0], None).unwrap();
        let expected = (1.0 / (2.0 * std::f64::consts::PI).sqrt()) * (1.0 + (-0.5f64).exp()) / 2.0;
        assert!((mc_i(&s, Theta::new(0.0, 1.0), &f0, 0.0) - expected).abs() < 1e-16);

        let s = m1(100, 4);
        for z in [-3.0, -0.2, 0.0, 1.7] {
            assert!((mc_i(&s, Theta::ZERO, &f0, z) - f0.pdf(z)).abs() <= 1e-14 * f0.pdf(z));
            assert!((mc_j(&s, Theta::ZERO, &f0, z) - f0.cdf(z)).abs() <= 1e-14 * f0.cdf(z));
        }
        assert_eq!(mc_j(&s, Theta::new(1.0, 2.0), &f0, 1e9), 1.0);
    }

    #[test]
    fn integral_of_i_hat_is_j_hat() {
        let s = m1(150, 5);
        let f0 = DistSpec::standard_normal();
        for alpha in [-1.0, 0.0, 1.0] {
            for beta in [0.5, 1.0, 1.5] {
                let kc = KnownComponent::new(&s, Theta::new(alpha, beta), &f0);
                let lo = kc.lower_edge();
                for y in linspace(-15.0, 15.0, 100) {
                    let q = if y <= lo {
                        0.0
                    } else {
                        integrate(|z| kc.i_hat(z), lo, y, 1e-12, 1e-12).unwrap()
                    };
                    assert!((q - kc.j_hat(y)).abs() < 1e-6, "alpha={alpha} beta={beta} y={y}");
                }
            }
        }
    }

    #[test]
    fn simulated_component() {
        let s = Sample::new(vec![1.0], vec![0.0], None).unwrap();
        let v = sim_i_tilde(&s, Theta::new(0.0, 1.0), &[0.0], KernelSpec::Gaussian, 1.0, -1.0).unwrap();
        assert_eq!(v, KernelSpec::Gaussian.k(0.0));
        assert!(matches!(
            sim_i_tilde(&s, Theta::ZERO, &[0.0, 1.0], KernelSpec::Gaussian, 1.0, 0.0),
            Err(Error::Dimension(_))
        ));

        let s = m1(200, 6);
        let e = eps0(200, 6);
        let b = BandwidthRule::default().evaluate(200).unwrap();
        let sc = SimulatedComponent::new(&s, Theta::new(0.5, 1.2), &e, KernelSpec::Gaussian, b).unwrap();
        assert_eq!(sc.j_tilde(1e9), 1.0);
        let lo = sc.centres().min() - 10.0 * b;
        for y in linspace(-20.0, 20.0, 41) {
            let q = if y <= lo {
                0.0
            } else {
                integrate(|t| sc.i_tilde(t), lo, y, 1e-12, 1e-12).unwrap()
            };
            assert!((q - sc.j_tilde(y)).abs() < 1e-6);
        }
    }

    #[test]
    fn simulated_and_monte_carlo_i_agree_in_l1() {
        let f0 = DistSpec::standard_normal();
        let l1 = |n: usize| {
            let s = m1(n, 8);
            let e = eps0(n, 8);
            let b = BandwidthRule::default().evaluate(n).unwrap();
            let theta = Theta::new(1.0, 0.8);
            let sc = SimulatedComponent::new(&s, theta, &e, KernelSpec::Gaussian, b).unwrap();
            let kc = KnownComponent::new(&s, theta, &f0);
            let grid = linspace(-20.0, 20.0, 2001);
            let vals: Vec<f64> = grid.iter().map(|&t| (sc.i_tilde(t) - kc.i_hat(t)).abs()).collect();
            crate::quad::simpson(&vals, grid[1] - grid[0])
        };
        let (small, large) = (l1(500), l1(10_000));
        assert!(large < small);
        assert!(large < 0.1, "L1 = {large}");
    }

    #[test]
    fn sim_tilde_with_zero_theta_approaches_f0() {
        let n = 10_000;
        let s = Sample::new(vec![0.0; n], vec![0.0; n], None).unwrap();
        let e = eps0(n, 9);
        let b = BandwidthRule::default().evaluate(n).unwrap();
        let sc = SimulatedComponent::new(&s, Theta::ZERO, &e, KernelSpec::Gaussian, b).unwrap();
        let sup = linspace(-5.0, 5.0, 201)
            .into_iter()
            .map(|y| (sc.j_tilde(y) - std_normal_cdf(y)).abs())
            .fold(0.0, f64::max);
        assert!(sup < 0.03, "sup = {sup}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn cdfs_are_monotone_in_unit_interval(
                seed in 0u64..500,
                alpha in -2.0f64..2.0,
                beta in 0.2f64..2.0,
                gaussian in any::<bool>(),
            ) {
                let s = m1(120, seed);
                let theta = Theta::new(alpha, beta);
                let kernel = if gaussian { KernelSpec::Gaussian } else { KernelSpec::Triangular };
                let b = BandwidthRule::default().evaluate(120).unwrap();
                let grid = linspace(-30.0, 30.0, 1000);
                let ft = smoothed_cdf_grid(&theta_transform(&s, theta), &grid, kernel, b).unwrap();
                let jh = mc_j_grid(&s, theta, &DistSpec::standard_normal(), &grid);
                for v in [&ft, &jh] {
                    prop_assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
                    prop_assert!(v.windows(2).all(|w| w[1] >= w[0]));
                }
            }
        }
    }
}
