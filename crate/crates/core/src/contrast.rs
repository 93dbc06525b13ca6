//! The symmetry contrast.
//!
//! With `F̃ = F̃ₙ,θ` and `Ĵ = Ĵₙ,θ`,
//!
//! ```text
//! H₁(y; ϑ) = (1/p) F̃(y)  − ((1−p)/p) Ĵ(y)
//! H₂(y; ϑ) = 1 − (1/p) F̃(−y) + ((1−p)/p) Ĵ(−y)
//! H        = H₁ − H₂
//! dₙ(ϑ)    = (1/m) Σⱼ H²(Vⱼ; ϑ)
//! ```
//!
//! `H₁` is the cdf implied for the unknown error law and `H₂` the cdf of its
//! reflection, so `H ≡ 0` exactly when the implied law is symmetric.
//!
//! Gradient. Writing `S_G(y) = G(y) + G(−y)`, the partials of `H` are
//!
//! ```text
//! ∂H/∂p = −(1/p²) (S_F̃ − S_Ĵ)
//! ∂H/∂α =  (1/p) S_Ψ̂   − ((1−p)/p) S_Î
//! ∂H/∂β =  (1/p) S_Ψ̃β  − ((1−p)/p) S_jβ
//! ```
//!
//! because `∂F̃/∂α = Ψ̂`, `∂Ĵ/∂α = Î`, `∂F̃/∂β = Ψ̃β` and `∂Ĵ/∂β = jβ`
//! (each `Yᵢ^θ` moves by `−1` in α and by `−Xᵢ` in β). Then
//! `∂dₙ = (2/m) Σⱼ H(Vⱼ) ∂H(Vⱼ)`. The bandwidth does not depend on ϑ.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;
use rayon::prelude::*;

use crate::density::{theta_transform, BandwidthRule, KernelSpec, KnownComponent, ThetaTransformed};
use crate::error::{Error, Result};
use crate::model::{sample_weight_points, DistSpec, Sample, Theta, Vartheta};
use crate::rng::{stream_rng, Stream};

const CACHE_CAPACITY: usize = 64;

/// Tuning of the contrast and of the plug-in estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastConfig {
    /// Kernel of `Ψ̂ₙ,θ` and `F̃ₙ,θ`.
    pub kernel: KernelSpec,
    /// Kernel of `Ĩₙ,θ` and `J̃ₙ,θ`.
    pub sim_kernel: KernelSpec,
    pub bandwidth: BandwidthRule,
    /// Number of Q-draws; `None` uses the sample size.
    pub m: Option<usize>,
    pub cache: bool,
}

impl Default for ContrastConfig {
    fn default() -> Self {
        ContrastConfig {
            kernel: KernelSpec::Triangular,
            sim_kernel: KernelSpec::Gaussian,
            bandwidth: BandwidthRule::default(),
            m: None,
            cache: true,
        }
    }
}

/// `H₁`, `H₂` and `H = H₁ − H₂` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValue {
    pub h1: f64,
    pub h2: f64,
    pub h: f64,
}

impl HValue {
    /// Assembles `H` from `F(±y)` and `J(±y)`.
    pub fn from_parts(p: f64, f_pos: f64, f_neg: f64, j_pos: f64, j_neg: f64) -> Self {
        let r = (1.0 - p) / p;
        let h1 = f_pos / p - r * j_pos;
        let h2 = 1.0 - f_neg / p + r * j_neg;
        HValue { h1, h2, h: h1 - h2 }
    }
}

/// Everything about one θ that `H` and its gradient need at the Q-points.
struct ThetaEval {
    data: ThetaTransformed,
    known: KnownComponent,
    base: OnceLock<BaseArrays>,
    grad: OnceLock<GradArrays>,
}

/// `F̃(±Vⱼ)` and `Ĵ(±Vⱼ)`.
struct BaseArrays {
    f_pos: Vec<f64>,
    f_neg: Vec<f64>,
    j_pos: Vec<f64>,
    j_neg: Vec<f64>,
}

/// Symmetrised sums `S_Ψ̂`, `S_Î`, `S_Ψ̃β`, `S_jβ` at each `Vⱼ`.
struct GradArrays {
    psi: Vec<f64>,
    i: Vec<f64>,
    psi_beta: Vec<f64>,
    j_beta: Vec<f64>,
}

type ThetaCache = Mutex<HashMap<(u64, u64), Arc<ThetaEval>>>;

/// Data, frozen Q-points and frozen simulated `f₀` sample for one estimation run.
pub struct ContrastContext {
    sample: Sample,
    v: Vec<f64>,
    eps0_sim: Vec<f64>,
    f0: DistSpec,
    kernel: KernelSpec,
    sim_kernel: KernelSpec,
    b: f64,
    cache: Option<ThetaCache>,
}

impl std::fmt::Debug for ContrastContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContrastContext")
            .field("n", &self.sample.len())
            .field("m", &self.v.len())
            .field("kernel", &self.kernel)
            .field("sim_kernel", &self.sim_kernel)
            .field("b", &self.b)
            .finish()
    }
}

impl ContrastContext {
    /// Draws the Q-points and the simulated `f₀` sample from `seed`.
    pub fn new(sample: Sample, f0: DistSpec, q: &DistSpec, cfg: &ContrastConfig, seed: u64) -> Result<Self> {
        let m = cfg.m.unwrap_or(sample.len());
        let v = sample_weight_points(m, q, seed)?;
        let mut rng = stream_rng(seed, Stream::SimulatedErrors0);
        let eps0_sim: Vec<f64> = (0..sample.len()).map(|_| f0.sample(&mut rng)).collect();
        Self::from_parts(sample, f0, v, eps0_sim, cfg)
    }

    pub fn from_parts(
        sample: Sample,
        f0: DistSpec,
        v: Vec<f64>,
        eps0_sim: Vec<f64>,
        cfg: &ContrastConfig,
    ) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Dimension("sample is empty".into()));
        }
        if v.is_empty() {
            return Err(Error::invalid("m", "need at least one Q-point"));
        }
        if v.iter().chain(&eps0_sim).any(|x| !x.is_finite()) {
            return Err(Error::invalid("q", "non-finite Q-point or simulated error"));
        }
        if eps0_sim.len() != sample.len() {
            return Err(Error::Dimension(format!(
                "simulated f0 sample has {} values, data has {}",
                eps0_sim.len(),
                sample.len()
            )));
        }
        let b = cfg.bandwidth.evaluate(sample.len())?;
        Ok(ContrastContext {
            sample,
            v,
            eps0_sim,
            f0,
            kernel: cfg.kernel,
            sim_kernel: cfg.sim_kernel,
            b,
            cache: cfg.cache.then(|| Mutex::new(HashMap::new())),
        })
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn v_points(&self) -> &[f64] {
        &self.v
    }

    pub fn eps0_sim(&self) -> &[f64] {
        &self.eps0_sim
    }

    pub fn f0(&self) -> &DistSpec {
        &self.f0
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn sim_kernel(&self) -> KernelSpec {
        self.sim_kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.b
    }

    pub fn clear_cache(&self) {
        if let Some(c) = &self.cache {
            c.lock().clear();
        }
    }

    fn check(&self, vt: &Vartheta) -> Result<()> {
        if !(vt.p > 0.0 && vt.p <= 1.0) {
            return Err(Error::Domain(format!("p = {} is not in (0, 1]", vt.p)));
        }
        if !(vt.alpha.is_finite() && vt.beta.is_finite()) {
            return Err(Error::Domain(format!("non-finite theta at {vt}")));
        }
        Ok(())
    }

    fn eval(&self, theta: Theta) -> Arc<ThetaEval> {
        let build = || {
            Arc::new(ThetaEval {
                data: theta_transform(&self.sample, theta),
                known: KnownComponent::new(&self.sample, theta, &self.f0),
                base: OnceLock::new(),
                grad: OnceLock::new(),
            })
        };
        let Some(cache) = &self.cache else {
            return build();
        };
        if let Some(e) = cache.lock().get(&theta.key()) {
            return Arc::clone(e);
        }
        let e = build();
        let mut guard = cache.lock();
        if guard.len() >= CACHE_CAPACITY {
            guard.clear();
        }
        Arc::clone(guard.entry(theta.key()).or_insert(e))
    }

    fn base<'a>(&self, e: &'a ThetaEval) -> &'a BaseArrays {
        e.base.get_or_init(|| {
            let n = self.sample.len() as f64;
            let pts = e.data.sorted();
            let cols: Vec<[f64; 4]> = self
                .v
                .par_iter()
                .map(|&v| {
                    [
                        pts.kernel_cdf_sum(self.kernel, self.b, v) / n,
                        pts.kernel_cdf_sum(self.kernel, self.b, -v) / n,
                        e.known.j_hat(v),
                        e.known.j_hat(-v),
                    ]
                })
                .collect();
            BaseArrays {
                f_pos: cols.iter().map(|c| c[0]).collect(),
                f_neg: cols.iter().map(|c| c[1]).collect(),
                j_pos: cols.iter().map(|c| c[2]).collect(),
                j_neg: cols.iter().map(|c| c[3]).collect(),
            }
        })
    }

    fn grad_arrays<'a>(&self, e: &'a ThetaEval) -> &'a GradArrays {
        e.grad.get_or_init(|| {
            let nb = self.sample.len() as f64 * self.b;
            let pts = e.data.sorted();
            let cols: Vec<[f64; 4]> = self
                .v
                .par_iter()
                .map(|&v| {
                    let (ip, jbp) = e.known.i_and_j_beta(v);
                    let (im, jbm) = e.known.i_and_j_beta(-v);
                    [
                        (pts.kernel_sum(self.kernel, self.b, v) + pts.kernel_sum(self.kernel, self.b, -v)) / nb,
                        ip + im,
                        (pts.weighted_kernel_sum(self.kernel, self.b, v)
                            + pts.weighted_kernel_sum(self.kernel, self.b, -v))
                            / nb,
                        jbp + jbm,
                    ]
                })
                .collect();
            GradArrays {
                psi: cols.iter().map(|c| c[0]).collect(),
                i: cols.iter().map(|c| c[1]).collect(),
                psi_beta: cols.iter().map(|c| c[2]).collect(),
                j_beta: cols.iter().map(|c| c[3]).collect(),
            }
        })
    }

    /// `H₁`, `H₂`, `H` at an arbitrary point `y`.
    pub fn h_components(&self, y: f64, vt: &Vartheta) -> Result<HValue> {
        self.check(vt)?;
        let e = self.eval(vt.theta());
        let n = self.sample.len() as f64;
        let pts = e.data.sorted();
        Ok(HValue::from_parts(
            vt.p,
            pts.kernel_cdf_sum(self.kernel, self.b, y) / n,
            pts.kernel_cdf_sum(self.kernel, self.b, -y) / n,
            e.known.j_hat(y),
            e.known.j_hat(-y),
        ))
    }

    /// `H(Vⱼ; ϑ)` for every Q-point.
    pub fn h_at_v(&self, vt: &Vartheta) -> Result<Vec<HValue>> {
        self.check(vt)?;
        let e = self.eval(vt.theta());
        let a = self.base(&e);
        Ok((0..self.v.len())
            .map(|j| HValue::from_parts(vt.p, a.f_pos[j], a.f_neg[j], a.j_pos[j], a.j_neg[j]))
            .collect())
    }

    /// `dₙ(ϑ)`
    pub fn d_n(&self, vt: &Vartheta) -> Result<f64> {
        let h = self.h_at_v(vt)?;
        let d = h.iter().map(|v| v.h * v.h).sum::<f64>() / h.len() as f64;
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::numerical("contrast", format!("d_n is not finite at {vt}")))
        }
    }

    /// `∇dₙ(ϑ)` in the order `(p, α, β)`.
    pub fn grad_d_n(&self, vt: &Vartheta) -> Result<[f64; 3]> {
        Ok(self.value_and_grad(vt)?.1)
    }

    pub fn value_and_grad(&self, vt: &Vartheta) -> Result<(f64, [f64; 3])> {
        self.check(vt)?;
        let e = self.eval(vt.theta());
        let a = self.base(&e);
        let g = self.grad_arrays(&e);
        let p = vt.p;
        let r = (1.0 - p) / p;
        let (mut d, mut gp, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..self.v.len() {
            let h = HValue::from_parts(p, a.f_pos[j], a.f_neg[j], a.j_pos[j], a.j_neg[j]).h;
            let sf = a.f_pos[j] + a.f_neg[j];
            let sj = a.j_pos[j] + a.j_neg[j];
            d += h * h;
            gp += h * (-(sf - sj) / (p * p));
            ga += h * (g.psi[j] / p - r * g.i[j]);
            gb += h * (g.psi_beta[j] / p - r * g.j_beta[j]);
        }
        let m = self.v.len() as f64;
        let out = (d / m, [2.0 * gp / m, 2.0 * ga / m, 2.0 * gb / m]);
        if out.0.is_finite() && out.1.iter().all(|x| x.is_finite()) {
            Ok(out)
        } else {
            Err(Error::numerical("gradient", format!("non-finite value at {vt}")))
        }
    }
}
