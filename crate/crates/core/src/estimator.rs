//! Minimisation of `dₙ` over a box, selection among distinct minima, and the
//! plug-in estimators of the unknown error density and cdf.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::contrast::ContrastContext;
use crate::density::{theta_transform, KernelSpec, SimulatedComponent, SortedPoints, ThetaTransformed};
use crate::error::{Error, Result};
use crate::model::{fmt_f64, ParamBox, Theta, Vartheta};
use crate::quad::{linspace, simpson};

/// Anything the optimiser can minimise.
pub trait Objective: Sync {
    fn value(&self, vt: &Vartheta) -> Result<f64>;

    fn value_and_grad(&self, vt: &Vartheta) -> Result<(f64, [f64; 3])>;

    /// Model-fit score used to choose among distinct minima; lower is better.
    fn selection_score(&self, _vt: &Vartheta) -> Result<f64> {
        Ok(0.0)
    }
}

impl Objective for ContrastContext {
    fn value(&self, vt: &Vartheta) -> Result<f64> {
        self.d_n(vt)
    }

    fn value_and_grad(&self, vt: &Vartheta) -> Result<(f64, [f64; 3])> {
        ContrastContext::value_and_grad(self, vt)
    }

    fn selection_score(&self, vt: &Vartheta) -> Result<f64> {
        joint_l1_score(self, vt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    /// Offset of the second iterate from each start.
    pub delta_init: [f64; 3],
    /// Stop once `‖ϑ₂ − ϑ₁‖₂ ≤ eps_stop`.
    pub eps_stop: f64,
    /// Per-coordinate step scales for `(p, α, β)`.
    pub gamma: [f64; 3],
    pub max_iters: usize,
    pub starts: Vec<Vartheta>,
    /// Add the centres of a 3×3×3 partition of the box to `starts`.
    pub lattice: bool,
    /// Halve the step while `dₙ` increases.
    pub backtracking: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            delta_init: [0.01; 3],
            eps_stop: 0.005,
            gamma: [0.2, 0.5, 0.5],
            max_iters: 1000,
            starts: Vec::new(),
            lattice: true,
            backtracking: false,
        }
    }
}

impl OptimConfig {
    /// Single start, no lattice: the protocol used for the replication tables.
    pub fn from_start(start: Vartheta) -> Self {
        OptimConfig {
            starts: vec![start],
            lattice: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_stop.is_finite() && self.eps_stop > 0.0) {
            return Err(Error::invalid(
                "eps_stop",
                format!("{} must be positive", self.eps_stop),
            ));
        }
        if self.gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::invalid("gamma", format!("{:?} must be positive", self.gamma)));
        }
        if self.delta_init.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("delta_init", "must be finite"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        Ok(())
    }

    fn all_starts(&self, bx: &ParamBox) -> Vec<Vartheta> {
        let mut s = self.starts.clone();
        if self.lattice {
            s.extend(bx.lattice(3));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectedBy {
    SingleMinimum,
    L1Rule,
}

impl fmt::Display for SelectedBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectedBy::SingleMinimum => "single-minimum",
            SelectedBy::L1Rule => "l1-rule",
        })
    }
}

/// One stabilised point after clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub vartheta: Vartheta,
    pub d_value: f64,
    /// Selection score; `None` when only one minimum was found.
    pub l1_score: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of starts that ended in this cluster.
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub vartheta_hat: Vartheta,
    pub d_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Euclidean norm of `∇dₙ(ϑ̂)` over the free (non-pinned) coordinates.
    pub grad_norm: f64,
    /// Per coordinate `(p, α, β)`: the estimate sits on a non-degenerate box face.
    pub boundary_active: [bool; 3],
    pub all_minima: Vec<Minimum>,
    pub selected_by: SelectedBy,
}

impl EstimateReport {
    pub const CSV_HEADER: &'static str = "p_hat,alpha_hat,beta_hat,d_value,iterations,converged,selected_by";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(self.vartheta_hat.p),
            fmt_f64(self.vartheta_hat.alpha),
            fmt_f64(self.vartheta_hat.beta),
            fmt_f64(self.d_value),
            self.iterations,
            self.converged,
            self.selected_by
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("estimate      {}\n", self.vartheta_hat));
        s.push_str(&format!("d_n           {:.6e}\n", self.d_value));
        s.push_str(&format!("iterations    {}\n", self.iterations));
        s.push_str(&format!("converged     {}\n", self.converged));
        s.push_str(&format!("grad_norm     {:.6e}\n", self.grad_norm));
        s.push_str(&format!(
            "on_boundary   p={} alpha={} beta={}\n",
            self.boundary_active[0], self.boundary_active[1], self.boundary_active[2]
        ));
        s.push_str(&format!("selected_by   {}\n", self.selected_by));
        s.push_str(&format!("minima        {}\n", self.all_minima.len()));
        for m in &self.all_minima {
            let score = m.l1_score.map_or("-".to_string(), |v| format!("{v:.6e}"));
            s.push_str(&format!(
                "  {}  d_n={:.6e}  l1={}  runs={}  converged={}\n",
                m.vartheta, m.d_value, score, m.runs, m.converged
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy)]
struct Run {
    vt: Vartheta,
    d: f64,
    iterations: usize,
    converged: bool,
}

fn norm2(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn step<O: Objective + ?Sized>(
    obj: &O,
    bx: &ParamBox,
    cfg: &OptimConfig,
    x: [f64; 3],
    d: f64,
    g: [f64; 3],
) -> Result<[f64; 3]> {
    let trial = |scale: f64| bx.project([0, 1, 2].map(|k| x[k] - scale * cfg.gamma[k] * g[k]));
    let mut cand = trial(1.0);
    if cfg.backtracking {
        let mut scale = 1.0;
        for _ in 0..30 {
            if obj.value(&Vartheta::from_array_unchecked(cand))? <= d {
                break;
            }
            scale *= 0.5;
            cand = trial(scale);
        }
    }
    Ok(cand)
}

fn descend<O: Objective + ?Sized>(obj: &O, bx: &ParamBox, cfg: &OptimConfig, start: &Vartheta) -> Result<Run> {
    let s = bx.project(start.to_array());
    let mut x1;
    let mut x2 = bx.project([0, 1, 2].map(|k| s[k] + cfg.delta_init[k]));
    let mut iterations = 0;
    let converged = loop {
        x1 = x2;
        let vt = Vartheta::from_array_unchecked(x1);
        let (d, g) = obj.value_and_grad(&vt)?;
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::numerical(
                "gradient",
                format!("non-finite gradient at iterate {vt}"),
            ));
        }
        x2 = step(obj, bx, cfg, x1, d, g)?;
        iterations += 1;
        if norm2(x2, x1) <= cfg.eps_stop {
            break true;
        }
        if iterations >= cfg.max_iters {
            break false;
        }
    };
    let vt = Vartheta::from_array_unchecked(x2);
    Ok(Run {
        vt,
        d: obj.value(&vt)?,
        iterations,
        converged,
    })
}

fn lex(a: &Vartheta, b: &Vartheta) -> Ordering {
    a.p.total_cmp(&b.p)
        .then(a.alpha.total_cmp(&b.alpha))
        .then(a.beta.total_cmp(&b.beta))
}

/// Projected gradient descent from every start, followed by clustering of the
/// end points and, when several clusters remain, the selection rule.
pub fn minimize<O: Objective + ?Sized>(obj: &O, bx: &ParamBox, cfg: &OptimConfig) -> Result<EstimateReport> {
    bx.validate()?;
    cfg.validate()?;
    let starts = cfg.all_starts(bx);
    if starts.is_empty() {
        return Err(Error::Config(
            "no start points (give starts or enable the lattice)".into(),
        ));
    }
    let mut runs: Vec<Run> = starts
        .par_iter()
        .map(|s| descend(obj, bx, cfg, s))
        .collect::<Result<_>>()?;
    runs.sort_by(|a, b| a.d.total_cmp(&b.d).then(lex(&a.vt, &b.vt)));

    let mut minima: Vec<Minimum> = Vec::new();
    for r in &runs {
        match minima
            .iter_mut()
            .find(|m| m.vartheta.l1_distance(&r.vt) <= 2.0 * cfg.eps_stop)
        {
            Some(m) => m.runs += 1,
            None => minima.push(Minimum {
                vartheta: r.vt,
                d_value: r.d,
                l1_score: None,
                iterations: r.iterations,
                converged: r.converged,
                runs: 1,
            }),
        }
    }

    let (best, selected_by) = if minima.len() == 1 {
        (0, SelectedBy::SingleMinimum)
    } else {
        let cands: Vec<Vartheta> = minima.iter().map(|m| m.vartheta).collect();
        let sel = select_among_minima(obj, &cands)?;
        for (m, s) in minima.iter_mut().zip(&sel.scores) {
            m.l1_score = Some(*s);
        }
        (sel.index, SelectedBy::L1Rule)
    };
    let chosen = minima[best].clone();
    let (_, g) = obj.value_and_grad(&chosen.vartheta)?;
    let (lo, hi) = (bx.lower(), bx.upper());
    let x = chosen.vartheta.to_array();
    let free: Vec<usize> = (0..3).filter(|&k| lo[k] < hi[k]).collect();
    let grad_norm = free.iter().map(|&k| g[k] * g[k]).sum::<f64>().sqrt();
    let boundary_active = [0, 1, 2].map(|k| lo[k] < hi[k] && (x[k] <= lo[k] || x[k] >= hi[k]));
    Ok(EstimateReport {
        vartheta_hat: chosen.vartheta,
        d_value: chosen.d_value,
        iterations: chosen.iterations,
        converged: chosen.converged,
        grad_norm,
        boundary_active,
        all_minima: minima,
        selected_by,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub scores: Vec<f64>,
}

const TIE_REL_TOL: f64 = 1e-12;

/// Index of the candidate with the smallest selection score. Scores equal up
/// to a relative `1e-12` are tied; ties go to the smaller `dₙ`, then to the
/// lexicographically smaller ϑ.
pub fn select_among_minima<O: Objective + ?Sized>(obj: &O, candidates: &[Vartheta]) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate minima".into()));
    }
    if candidates.len() == 1 {
        return Ok(Selection {
            index: 0,
            scores: vec![obj.selection_score(&candidates[0])?],
        });
    }
    let scores: Vec<f64> = candidates
        .iter()
        .map(|c| obj.selection_score(c))
        .collect::<Result<_>>()?;
    // dₙ only matters for ties, so it is evaluated on demand.
    let mut d: Vec<Option<f64>> = vec![None; candidates.len()];
    let mut d_at = |i: usize| -> Result<f64> {
        if d[i].is_none() {
            d[i] = Some(obj.value(&candidates[i])?);
        }
        Ok(d[i].unwrap_or(f64::NAN))
    };
    let tied = |a: f64, b: f64| (a - b).abs() <= TIE_REL_TOL * a.abs().max(b.abs());
    let mut best = 0;
    for i in 1..candidates.len() {
        let better = if tied(scores[i], scores[best]) {
            match d_at(i)?.total_cmp(&d_at(best)?) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => lex(&candidates[i], &candidates[best]) == Ordering::Less,
            }
        } else {
            scores[i] < scores[best]
        };
        if better {
            best = i;
        }
    }
    Ok(Selection { index: best, scores })
}

/// Sign of the `Ĩ` term in `f̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PluginSign {
    /// `(1/p)Ψ̂ − ((1−p)/p)Ĩ`, the inversion of the mixture identity.
    #[default]
    Minus,
    /// `(1/p)Ψ̂ + ((1−p)/p)Ĩ`
    Plus,
}

/// `f̂ₙ` and `F̂ₙ` at a fixed `(p, θ)`.
#[derive(Debug, Clone)]
pub struct PluginEstimate {
    p: f64,
    data: ThetaTransformed,
    sim: SimulatedComponent,
    kernel: KernelSpec,
    b: f64,
    sign: PluginSign,
}

impl PluginEstimate {
    /// `p` may equal 1 (no contamination correction).
    pub fn new(ctx: &ContrastContext, p: f64, theta: Theta) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("p = {p} is not in (0, 1]")));
        }
        Ok(PluginEstimate {
            p,
            data: theta_transform(ctx.sample(), theta),
            sim: SimulatedComponent::new(ctx.sample(), theta, ctx.eps0_sim(), ctx.sim_kernel(), ctx.bandwidth())?,
            kernel: ctx.kernel(),
            b: ctx.bandwidth(),
            sign: PluginSign::Minus,
        })
    }

    pub fn from_vartheta(ctx: &ContrastContext, vt: &Vartheta) -> Result<Self> {
        Self::new(ctx, vt.p, vt.theta())
    }

    pub fn with_sign(mut self, sign: PluginSign) -> Self {
        self.sign = sign;
        self
    }

    fn psi(&self, t: f64) -> f64 {
        self.data.sorted().kernel_sum(self.kernel, self.b, t) / (self.data.len() as f64 * self.b)
    }

    fn f_tilde(&self, y: f64) -> f64 {
        self.data.sorted().kernel_cdf_sum(self.kernel, self.b, y) / self.data.len() as f64
    }

    /// Raw `f̂ₙ(t)`; may be negative at finite `n`.
    pub fn f_hat(&self, t: f64) -> f64 {
        let r = (1.0 - self.p) / self.p;
        let i = self.sim.i_tilde(t);
        match self.sign {
            PluginSign::Minus => self.psi(t) / self.p - r * i,
            PluginSign::Plus => self.psi(t) / self.p + r * i,
        }
    }

    pub fn f_hat_clipped(&self, t: f64) -> f64 {
        self.f_hat(t).max(0.0)
    }

    /// Raw `F̂ₙ(y) = (1/p)F̃(y) − ((1−p)/p)J̃(y)`.
    pub fn cdf_raw(&self, y: f64) -> f64 {
        self.f_tilde(y) / self.p - (1.0 - self.p) / self.p * self.sim.j_tilde(y)
    }

    /// Running maximum of the raw cdf over `ys` (sorted internally), clamped
    /// to `[0, 1]`, returned in the order of `ys`.
    pub fn cdf_monotone(&self, ys: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..ys.len()).collect();
        idx.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));
        let mut out = vec![0.0; ys.len()];
        let mut run = 0.0f64;
        for &i in &idx {
            run = run.max(self.cdf_raw(ys[i]).clamp(0.0, 1.0));
            out[i] = run;
        }
        out
    }

    /// `[min Yᵢ^θ − 5b, max Yᵢ^θ + 5b]`, the quadrature range for `f̂ₙ`.
    pub fn support(&self) -> (f64, f64) {
        let s = self.data.sorted();
        (s.min() - 5.0 * self.b, s.max() + 5.0 * self.b)
    }

    /// Grid of `2¹⁰ + 1` points over [`support`](Self::support).
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        linspace(lo, hi, QUAD_POINTS)
    }
}

/// Simpson grid size for L1 scores and integral checks.
pub const QUAD_POINTS: usize = 1025;

/// `f̂ₙ(t)` with the default sign.
pub fn plugin_f_hat(ctx: &ContrastContext, p: f64, theta: Theta, t: f64) -> Result<f64> {
    Ok(PluginEstimate::new(ctx, p, theta)?.f_hat(t))
}

/// Raw `F̂ₙ(y)`.
pub fn plugin_cdf_hat(ctx: &ContrastContext, p: f64, theta: Theta, y: f64) -> Result<f64> {
    Ok(PluginEstimate::new(ctx, p, theta)?.cdf_raw(y))
}

/// `∫|f̂ₙ − g|` by Simpson on the plug-in grid.
pub fn l1_distance_to(pe: &PluginEstimate, g: impl Fn(f64) -> f64) -> f64 {
    let grid = pe.grid();
    let vals: Vec<f64> = grid.iter().map(|&t| (pe.f_hat(t) - g(t)).abs()).collect();
    simpson(&vals, grid[1] - grid[0])
}

fn silverman(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |u: f64| {
        let pos = u * (n - 1.0);
        let i = pos.floor() as usize;
        let j = (i + 1).min(s.len() - 1);
        s[i] + (pos - i as f64) * (s[j] - s[i])
    };
    let iqr = (q(0.75) - q(0.25)) / 1.34;
    let spread = if iqr > 0.0 { sd.min(iqr) } else { sd };
    let h = 0.9 * spread * n.powf(-0.2);
    if h > 0.0 {
        h
    } else {
        1e-3
    }
}

/// Number of design-quantile bins used by [`joint_l1_score`].
fn bin_count(n: usize) -> usize {
    ((n as f64).sqrt() / 4.0).floor().clamp(2.0, 10.0) as usize
}

/// Model-fit score of a candidate ϑ.
///
/// The design is split into quantile bins. In each bin the responses are
/// smoothed without any model (Gaussian kernel, Silverman bandwidth) and
/// compared in L1 with the conditional density the model implies,
/// `p f̂ₙ(y − θ⊙Xᵢ) + (1−p) f₀(y)` averaged over the bin. Bin scores are
/// weighted by bin size.
pub fn joint_l1_score(ctx: &ContrastContext, vt: &Vartheta) -> Result<f64> {
    let pe = PluginEstimate::from_vartheta(ctx, vt)?;
    let grid = pe.grid();
    let (tlo, step) = (grid[0], grid[1] - grid[0]);
    let table: Vec<f64> = grid.iter().map(|&t| pe.f_hat(t)).collect();
    let f_interp = |t: f64| -> f64 {
        let u = (t - tlo) / step;
        if !(u >= 0.0 && u <= (QUAD_POINTS - 1) as f64) {
            return 0.0;
        }
        let i = (u.floor() as usize).min(QUAD_POINTS - 2);
        let w = u - i as f64;
        table[i] + w * (table[i + 1] - table[i])
    };

    let s = ctx.sample();
    let n = s.len();
    let theta = vt.theta();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.x[a].total_cmp(&s.x[b]).then(a.cmp(&b)));
    let k = if n < 20 { 1 } else { bin_count(n) };
    let (f0_lo, f0_hi) = ctx.f0().effective_support();
    let (t_lo, t_hi) = pe.support();
    let mut score = 0.0;
    for bin in 0..k {
        let idx = &order[bin * n / k..(bin + 1) * n / k];
        let y: Vec<f64> = idx.iter().map(|&i| s.y[i]).collect();
        let c: Vec<f64> = idx.iter().map(|&i| theta.apply(s.x[i])).collect();
        let h = silverman(&y);
        let free = SortedPoints::new(&y, &y);
        let c_min = c.iter().copied().fold(f64::INFINITY, f64::min);
        let c_max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = (y_min - 10.0 * h).min(c_min + t_lo).min(f0_lo);
        let hi = (y_max + 10.0 * h).max(c_max + t_hi).max(f0_hi);
        let pts = linspace(lo, hi, QUAD_POINTS);
        let nk = idx.len() as f64;
        let vals: Vec<f64> = pts
            .iter()
            .map(|&yy| {
                let g_free = free.kernel_sum(KernelSpec::Gaussian, h, yy) / (nk * h);
                let mix = c.iter().map(|&ci| f_interp(yy - ci)).sum::<f64>() / nk;
                let g_model = vt.p * mix + (1.0 - vt.p) * ctx.f0().pdf(yy);
                (g_free - g_model).abs()
            })
            .collect();
        score += nk / n as f64 * simpson(&vals, pts[1] - pts[0]);
    }
    if score.is_finite() {
        Ok(score)
    } else {
        Err(Error::numerical("selection score", format!("non-finite at {vt}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrast::ContrastConfig;
    use crate::model::{simulate, DistSpec, Sample};

    /// `‖ϑ − c‖²` with optional fixed scores.
    struct Quadratic {
        c: [f64; 3],
    }

    impl Objective for Quadratic {
        fn value(&self, vt: &Vartheta) -> Result<f64> {
            let x = vt.to_array();
            Ok((0..3).map(|k| (x[k] - self.c[k]).powi(2)).sum())
        }

        fn value_and_grad(&self, vt: &Vartheta) -> Result<(f64, [f64; 3])> {
            let x = vt.to_array();
            Ok((self.value(vt)?, [0, 1, 2].map(|k| 2.0 * (x[k] - self.c[k]))))
        }
    }

    struct Scored {
        scores: Vec<(Vartheta, f64, f64)>,
    }

    impl Objective for Scored {
        fn value(&self, vt: &Vartheta) -> Result<f64> {
            Ok(self.scores.iter().find(|s| s.0 == *vt).unwrap().1)
        }

        fn value_and_grad(&self, vt: &Vartheta) -> Result<(f64, [f64; 3])> {
            Ok((self.value(vt)?, [0.0; 3]))
        }

        fn selection_score(&self, vt: &Vartheta) -> Result<f64> {
            Ok(self.scores.iter().find(|s| s.0 == *vt).unwrap().2)
        }
    }

    fn wide_box() -> ParamBox {
        ParamBox::new((0.05, 0.95), (-2.0, 2.0), (0.1, 3.0)).unwrap()
    }

    #[test]
    fn quadratic_converges_to_centre() {
        for c in [[0.3, -0.5, 1.2], [0.8, 1.0, 2.5], [0.5, 0.0, 0.4]] {
            let cfg = OptimConfig {
                gamma: [0.3, 0.3, 0.3],
                ..Default::default()
            };
            let rep = minimize(&Quadratic { c }, &wide_box(), &cfg).unwrap();
            assert!(rep.converged);
            let x = rep.vartheta_hat.to_array();
            assert!(norm2(x, c) <= cfg.eps_stop, "{x:?} vs {c:?}");
            assert_eq!(rep.all_minima.len(), 1);
            assert_eq!(rep.selected_by, SelectedBy::SingleMinimum);
        }
    }

    #[test]
    fn projection_keeps_iterates_in_box() {
        let rep = minimize(&Quadratic { c: [1.5, 5.0, -1.0] }, &wide_box(), &OptimConfig::default()).unwrap();
        assert!(wide_box().contains(&rep.vartheta_hat));
        assert_eq!(rep.boundary_active, [true, true, true]);
    }

    #[test]
    fn pinned_alpha_stays_fixed() {
        let bx = ParamBox::new((0.05, 0.95), (0.0, 0.0), (0.1, 3.0)).unwrap();
        let rep = minimize(&Quadratic { c: [0.4, 1.0, 1.0] }, &bx, &OptimConfig::default()).unwrap();
        assert_eq!(rep.vartheta_hat.alpha, 0.0);
        assert!(!rep.boundary_active[1]);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let cfg = OptimConfig {
            max_iters: 1,
            gamma: [0.01; 3],
            ..OptimConfig::from_start(Vartheta::new(0.1, 0.0, 0.2).unwrap())
        };
        let rep = minimize(&Quadratic { c: [0.9, 1.0, 2.9] }, &wide_box(), &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn empty_starts_is_a_config_error() {
        let cfg = OptimConfig {
            lattice: false,
            ..Default::default()
        };
        assert!(matches!(
            minimize(&Quadratic { c: [0.5, 0.0, 1.0] }, &wide_box(), &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn selection_rules() {
        let a = Vartheta::new(0.3, 0.0, 1.0).unwrap();
        let b = Vartheta::new(0.6, 0.0, 0.5).unwrap();
        let obj = Scored {
            scores: vec![(a, 0.2, 1.0), (b, 0.1, 2.0)],
        };
        assert_eq!(select_among_minima(&obj, &[a]).unwrap().index, 0);
        assert_eq!(select_among_minima(&obj, &[a, b]).unwrap().index, 0);
        let tie = Scored {
            scores: vec![(a, 0.2, 1.0), (b, 0.1, 1.0 + 1e-14)],
        };
        assert_eq!(select_among_minima(&tie, &[a, b]).unwrap().index, 1);
        let full_tie = Scored {
            scores: vec![(b, 0.1, 1.0), (a, 0.1, 1.0)],
        };
        assert_eq!(select_among_minima(&full_tie, &[b, a]).unwrap().index, 1);
        assert!(select_among_minima(&obj, &[]).is_err());
    }

    #[test]
    fn report_row_has_declared_columns() {
        let rep = minimize(&Quadratic { c: [0.5, 0.0, 1.0] }, &wide_box(), &OptimConfig::default()).unwrap();
        assert_eq!(
            rep.csv_row().split(',').count(),
            EstimateReport::CSV_HEADER.split(',').count()
        );
        assert!(rep.to_text().contains("single-minimum"));
    }

    fn m1_ctx(n: usize, seed: u64) -> ContrastContext {
        let n01 = DistSpec::standard_normal();
        let truth = Vartheta::new(0.7, 0.0, 1.0).unwrap();
        let s = simulate(n, &truth, &n01, &n01, &DistSpec::gaussian(0.0, 9.0).unwrap(), seed).unwrap();
        ContrastContext::new(
            s,
            n01,
            &DistSpec::gaussian(0.0, 16.0).unwrap(),
            &ContrastConfig::default(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn plugin_limits() {
        let ctx = m1_ctx(200, 1);
        let theta = Theta::new(0.1, 0.9);
        let pe = PluginEstimate::new(&ctx, 1.0, theta).unwrap();
        let data = theta_transform(ctx.sample(), theta);
        for t in [-2.0, 0.0, 0.3, 4.0] {
            let psi = crate::density::kde_psi(&data, t, ctx.kernel(), ctx.bandwidth()).unwrap();
            assert_eq!(pe.f_hat(t), psi);
            let ft = crate::density::smoothed_cdf(&data, t, ctx.kernel(), ctx.bandwidth()).unwrap();
            assert_eq!(pe.cdf_raw(t), ft);
        }
        let pe = PluginEstimate::new(&ctx, 0.6, theta).unwrap();
        assert!((pe.cdf_raw(1e9) - 1.0).abs() < 1e-14);
        assert!(PluginEstimate::new(&ctx, 0.0, theta).is_err());
        assert!(PluginEstimate::new(&ctx, 1.2, theta).is_err());
        let plus = pe.clone().with_sign(PluginSign::Plus);
        assert!(plus.f_hat(0.0) > pe.f_hat(0.0));
    }

    #[test]
    fn monotone_cdf_variant() {
        let ctx = m1_ctx(100, 2);
        let pe = PluginEstimate::new(&ctx, 0.5, Theta::new(0.4, 0.7)).unwrap();
        let ys = linspace(-15.0, 15.0, 2000);
        let f = pe.cdf_monotone(&ys);
        assert!(f.windows(2).all(|w| w[1] >= w[0]));
        assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
        let rev: Vec<f64> = ys.iter().rev().copied().collect();
        let fr = pe.cdf_monotone(&rev);
        assert_eq!(fr.iter().rev().copied().collect::<Vec<_>>(), f);
    }

    #[test]
    fn estimate_is_a_pure_function_of_inputs() {
        let bx = ParamBox::new((0.05, 0.95), (0.0, 0.0), (0.1, 3.0)).unwrap();
        let cfg = OptimConfig::from_start(Vartheta::new(0.7, 0.0, 1.0).unwrap());
        let a = minimize(&m1_ctx(100, 3), &bx, &cfg).unwrap();
        let b = minimize(&m1_ctx(100, 3), &bx, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn joint_score_prefers_truth_over_distorted_parameters() {
        let ctx = m1_ctx(2000, 4);
        let truth = joint_l1_score(&ctx, &Vartheta::new(0.7, 0.0, 1.0).unwrap()).unwrap();
        let off = joint_l1_score(&ctx, &Vartheta::new(0.7, 0.0, 0.6).unwrap()).unwrap();
        assert!(truth < off, "truth {truth} off {off}");
    }

    #[test]
    fn tiny_sample_single_bin() {
        let s = Sample::new(
            (0..12).map(|i| i as f64 / 3.0).collect(),
            (0..12).map(|i| (i as f64 * 0.7).sin()).collect(),
            None,
        )
        .unwrap();
        let n01 = DistSpec::standard_normal();
        let ctx = ContrastContext::new(s, n01.clone(), &n01, &ContrastConfig::default(), 1).unwrap();
        assert!(joint_l1_score(&ctx, &Vartheta::new(0.5, 0.0, 1.0).unwrap()).unwrap() >= 0.0);
    }
}
