//! Closed-form oracle for the all-Gaussian model: `f = N(0, m)`,
//! `f₀ = N(0, m₀)`, `X ~ N(μ, σ²)`.
//!
//! Population quantities at `θ = (α, β)`:
//!
//! ```text
//! Ψ_θ(y) = p*·N(y; −[(α−α*) + (β−β*)μ], (β−β*)²σ² + m)
//!        + (1−p*)·N(y; −(α + βμ), β²σ² + m₀)
//! J_θ(y) = Φ((y + α + βμ) / √(β²σ² + m₀))
//! F_θ    = cdf of Ψ_θ
//! ```

use std::fmt;

use crate::contrast::HValue;
use crate::error::{Error, Result};
use crate::model::{DistSpec, Theta, Vartheta};
use crate::quad::integrate;
use crate::special::{normal_cdf, normal_pdf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModelSpec {
    /// Variance of `f`.
    pub m: f64,
    /// Variance of `f₀`.
    pub m0: f64,
    pub mu_x: f64,
    pub var_x: f64,
    pub vartheta_star: Vartheta,
}

impl GaussianModelSpec {
    pub fn new(m: f64, m0: f64, mu_x: f64, var_x: f64, vartheta_star: Vartheta) -> Result<Self> {
        for (name, v) in [("m", m), ("m0", m0), ("var_x", var_x)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("{v} must be positive")));
            }
        }
        if !mu_x.is_finite() {
            return Err(Error::invalid("mu_x", "must be finite"));
        }
        let vs = Vartheta::new(vartheta_star.p, vartheta_star.alpha, vartheta_star.beta)?;
        Ok(GaussianModelSpec {
            m,
            m0,
            mu_x,
            var_x,
            vartheta_star: vs,
        })
    }

    fn moments(&self) -> (f64, f64, f64) {
        let mu = self.mu_x;
        let s2 = self.var_x;
        (mu, mu * mu + s2, mu * mu * mu + 3.0 * mu * s2)
    }

    /// `(mean, variance)` of the shifted unknown component of `Y^θ`.
    fn component1(&self, theta: Theta) -> (f64, f64) {
        let s = &self.vartheta_star;
        let db = theta.beta - s.beta;
        (
            -((theta.alpha - s.alpha) + db * self.mu_x),
            db * db * self.var_x + self.m,
        )
    }

    /// `(mean, variance)` of the known component of `Y^θ`.
    fn component0(&self, theta: Theta) -> (f64, f64) {
        (
            -(theta.alpha + theta.beta * self.mu_x),
            theta.beta * theta.beta * self.var_x + self.m0,
        )
    }
}

/// `Ψ_θ(y)`
pub fn population_psi(spec: &GaussianModelSpec, theta: Theta, y: f64) -> f64 {
    let p = spec.vartheta_star.p;
    let (m1, v1) = spec.component1(theta);
    let (m0, v0) = spec.component0(theta);
    p * normal_pdf(y, m1, v1) + (1.0 - p) * normal_pdf(y, m0, v0)
}

/// `I_θ(z) = ∫ f₀(z + θ⊙x) h(x) dx`
pub fn population_i(spec: &GaussianModelSpec, theta: Theta, z: f64) -> f64 {
    let (m0, v0) = spec.component0(theta);
    normal_pdf(z, m0, v0)
}

/// `F_θ(y) = ∫_{−∞}^y Ψ_θ`
pub fn population_f(spec: &GaussianModelSpec, theta: Theta, y: f64) -> f64 {
    let p = spec.vartheta_star.p;
    let (m1, v1) = spec.component1(theta);
    let (m0, v0) = spec.component0(theta);
    p * normal_cdf(y, m1, v1) + (1.0 - p) * normal_cdf(y, m0, v0)
}

/// `J_θ(y) = ∫_{−∞}^y I_θ`
pub fn population_j(spec: &GaussianModelSpec, theta: Theta, y: f64) -> f64 {
    let (m0, v0) = spec.component0(theta);
    normal_cdf(y, m0, v0)
}

pub fn population_h(spec: &GaussianModelSpec, vt: &Vartheta, y: f64) -> HValue {
    let th = vt.theta();
    HValue::from_parts(
        vt.p,
        population_f(spec, th, y),
        population_f(spec, th, -y),
        population_j(spec, th, y),
        population_j(spec, th, -y),
    )
}

/// `d(ϑ) = ∫ H²(y; ϑ) q(y) dy`
pub fn population_d(spec: &GaussianModelSpec, q: &DistSpec, vt: &Vartheta) -> Result<f64> {
    let (lo, hi) = q.effective_support();
    integrate(
        |y| {
            let h = population_h(spec, vt, y).h;
            h * h * q.pdf(y)
        },
        lo,
        hi,
        1e-15,
        1e-10,
    )
}

/// `(Σ_β, Σ_{β−β*}) = (σ²β² + m₀, σ²(β−β*)² + m)`
pub fn variance_terms(spec: &GaussianModelSpec, beta: f64) -> (f64, f64) {
    let db = beta - spec.vartheta_star.beta;
    (spec.var_x * beta * beta + spec.m0, spec.var_x * db * db + spec.m)
}

/// The second zero of the population contrast, when one exists:
///
/// ```text
/// p   = 2p*
/// α   = α*/2 + μ(m₀ − m)/(2β*σ²)
/// β   = β*/2 − (m₀ − m)/(2β*σ²)
/// ```
///
/// At this point the two Gaussian components of `Ψ_θ` have equal variance
/// and opposite means, so the implied unknown density is symmetric. None when
/// `p* ≥ 1/2`, since `2p*` is not an admissible proportion.
pub fn spurious_solution(spec: &GaussianModelSpec) -> Result<Option<Vartheta>> {
    let s = &spec.vartheta_star;
    if s.beta == 0.0 {
        return Err(Error::Domain("beta* = 0".into()));
    }
    if s.p >= 0.5 {
        return Ok(None);
    }
    let k = (spec.m0 - spec.m) / (2.0 * s.beta * spec.var_x);
    let beta = s.beta / 2.0 - k;
    if beta == 0.0 {
        return Ok(None);
    }
    Ok(Some(Vartheta {
        p: 2.0 * s.p,
        alpha: s.alpha / 2.0 + spec.mu_x * k,
        beta,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionThree {
    Evaluated {
        m: f64,
        rhs: f64,
        pass: bool,
    },
    /// `α* + β*E(X) = 0`
    Undefined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// `4E(X)³ + 3E(X)E(X²) + E(X³)`
    pub c1_value: f64,
    pub c1_pass: bool,
    pub c3: ConditionThree,
}

impl ConditionReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.c1_pass {
            w.push(format!(
                "condition (C i) fails: 4E(X)^3 + 3E(X)E(X^2) + E(X^3) = {:.6e}",
                self.c1_value
            ));
        }
        match &self.c3 {
            ConditionThree::Evaluated { pass: false, m, rhs } => w.push(format!(
                "condition (C iii) fails: m = {m} equals the excluded value {rhs}"
            )),
            ConditionThree::Undefined => {
                w.push("condition (C iii) undefined: alpha* + beta*E(X) = 0 (division by zero)".into())
            }
            _ => {}
        }
        w
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "(C i)   4E(X)^3+3E(X)E(X^2)+E(X^3) = {:.6e}  {}",
            self.c1_value,
            if self.c1_pass { "PASS" } else { "FAIL (warning)" }
        )?;
        match &self.c3 {
            ConditionThree::Evaluated { m, rhs, pass } => writeln!(
                f,
                "(C iii) m = {m} vs excluded value {rhs:.6e}  {}",
                if *pass { "PASS" } else { "FAIL" }
            ),
            ConditionThree::Undefined => writeln!(f, "(C iii) undefined (division by zero: alpha*+beta*E(X) = 0)"),
        }
    }
}

const ZERO_BAND: f64 = 1e-10;

pub fn check_contrast_conditions(spec: &GaussianModelSpec) -> ConditionReport {
    let (e1, e2, e3) = spec.moments();
    let c1 = 4.0 * e1.powi(3) + 3.0 * e1 * e2 + e3;
    let (a, b) = (spec.vartheta_star.alpha, spec.vartheta_star.beta);
    let denom = 3.0 * (a + b * e1);
    let c3 = if denom.abs() <= ZERO_BAND {
        ConditionThree::Undefined
    } else {
        let num = a.powi(3) + 3.0 * a * a * b * e1 + 3.0 * a * b * b * e2 + b.powi(3) * e3;
        let rhs = spec.m0 + num / denom;
        ConditionThree::Evaluated {
            m: spec.m,
            rhs,
            pass: (spec.m - rhs).abs() > ZERO_BAND,
        }
    };
    ConditionReport {
        c1_value: c1,
        c1_pass: c1.abs() > ZERO_BAND,
        c3,
    }
}

/// Alternative Gaussian parametrisation matching the first moments of the
/// conditional law of `Y` given `X = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentSystemPoint {
    Solution { p2: f64, theta2_x: f64, m2: f64 },
    Singular,
}

/// With `t = θ*⊙x`, `m₁ = m`:
///
/// ```text
/// p₂     = p₁ · 2t² / (3m₁ + t² − 3m₀)
/// θ₂⊙x   = t + (3m₁ − t² − 3m₀) / (2t)
/// m₂     = m₁ + (m₁ + t² − m₀)(3m₁ + t² − 3m₀) / (4t²)
/// ```
pub fn identifiability_moment_system(spec: &GaussianModelSpec, x: f64) -> MomentSystemPoint {
    let t = spec.vartheta_star.theta().apply(x);
    let (m1, m0) = (spec.m, spec.m0);
    let denom = 3.0 * m1 + t * t - 3.0 * m0;
    if t == 0.0 || denom.abs() <= ZERO_BAND {
        return MomentSystemPoint::Singular;
    }
    MomentSystemPoint::Solution {
        p2: spec.vartheta_star.p * 2.0 * t * t / denom,
        theta2_x: t + (3.0 * m1 - t * t - 3.0 * m0) / (2.0 * t),
        m2: m1 + (m1 + t * t - m0) * denom / (4.0 * t * t),
    }
}
