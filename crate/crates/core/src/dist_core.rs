//! Rising factorials, the Beta law in mean/overdispersion coordinates, the
//! BetaPower family and the risk-reduction factor η.
//!
//! A Beta law is parametrised by its mean `mu = alpha / (alpha + beta)` and its
//! overdispersion `rho = 1 / (1 + alpha + beta)`. The concentration
//! `r0 = (1 - rho) / rho = alpha + beta` appears in every closed form below.
//! Some texts write the mean as `beta / (alpha + beta)`, which is the same law
//! with the shapes swapped. Here the shape attached to `x` is always `alpha`,
//! so that `E[X^n] = alpha^(n) / r0^(n)` with `^(n)` the rising factorial.
//!
//! Everything is evaluated in log space. Differences of log-Gamma values are
//! never formed directly: [`ln_rising_factorial`] uses the Stirling series in
//! difference form, which stays accurate when both arguments are huge
//! (`rho -> 0`) and when the exponent is huge (deep chains).

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::beta_kernel_integral;

// Arguments below this are shifted up with the Gamma recurrence before the
// asymptotic series is applied.
const STIRLING_MIN: f64 = 15.0;

// Stirling tail φ(z) = ln Γ(z) - (z - 1/2) ln z + z - ln(2π)/2, truncated
// after the z^-13 term. The first omitted term is below 1e-19 for z >= 15.
fn stirling_tail(z: f64) -> f64 {
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// `ln(Γ(x + n) / Γ(x))` for real `n` with `x > 0` and `x + n > 0`.
///
/// Negative `n` is accepted. The public [`rising_factorial`] restricts to
/// `n >= 0`.
pub fn ln_rising_factorial(x: f64, n: f64) -> f64 {
    debug_assert!(x > 0.0 && x + n > 0.0, "ln_rising_factorial({x}, {n})");
    if n == 0.0 {
        return 0.0;
    }
    let (x, shift_sum) = shift_up(x, n);
    let xn = x + n;
    (x - 0.5) * (n / x).ln_1p() + n * xn.ln() - n + (stirling_tail(xn) - stirling_tail(x))
        + shift_sum
}

/// `ln(a^(n) / b^(n))`, with the large `n ln(x + n)` terms cancelled
/// analytically so the ratio keeps full relative accuracy for big `n`.
pub fn ln_rising_factorial_ratio(a: f64, b: f64, n: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0 && a + n > 0.0 && b + n > 0.0);
    if n == 0.0 {
        return 0.0;
    }
    let (a, shift_a) = shift_up(a, n);
    let (b, shift_b) = shift_up(b, n);
    let head = (a - 0.5) * (n / a).ln_1p() - (b - 0.5) * (n / b).ln_1p();
    let cross = n * ((a - b) / (b + n)).ln_1p();
    let tails = (stirling_tail(a + n) - stirling_tail(a)) - (stirling_tail(b + n) - stirling_tail(b));
    head + cross + tails + (shift_a - shift_b)
}

// Moves `x` up until both `x` and `x + n` clear `STIRLING_MIN`; returns the
// new argument and the log correction ln(x^(n)) - ln((x + m)^(n)).
fn shift_up(mut x: f64, n: f64) -> (f64, f64) {
    let low = x.min(x + n);
    let mut shift_sum = 0.0;
    if low < STIRLING_MIN {
        let steps = (STIRLING_MIN - low).ceil() as usize;
        for _ in 0..steps {
            // ln(x) - ln(x + n)
            shift_sum -= (n / x).ln_1p();
            x += 1.0;
        }
    }
    (x, shift_sum)
}

/// The rising factorial `x^(n) = Γ(x + n) / Γ(x)`.
///
/// For integer `n` this is the product `x (x + 1) ... (x + n - 1)`.
pub fn rising_factorial(x: f64, n: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain("x", x, "x > 0"));
    }
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::domain("n", n, "n >= 0"));
    }
    Ok(ln_rising_factorial(x, n).exp())
}

/// A Beta law given by its mean and overdispersion, both in the open unit
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBetaParams", into = "RawBetaParams")]
pub struct BetaParams {
    mu: f64,
    rho: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBetaParams {
    mu: f64,
    rho: f64,
}

impl TryFrom<RawBetaParams> for BetaParams {
    type Error = Error;
    fn try_from(raw: RawBetaParams) -> Result<Self> {
        BetaParams::new(raw.mu, raw.rho)
    }
}

impl From<BetaParams> for RawBetaParams {
    fn from(p: BetaParams) -> Self {
        RawBetaParams { mu: p.mu, rho: p.rho }
    }
}

fn open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

impl BetaParams {
    pub fn new(mu: f64, rho: f64) -> Result<Self> {
        if !open_unit(mu) {
            return Err(Error::domain("mu", mu, "0 < mu < 1"));
        }
        if !open_unit(rho) {
            return Err(Error::domain("rho", rho, "0 < rho < 1"));
        }
        Ok(BetaParams { mu, rho })
    }

    /// Inverse of [`shape_from_mean_overdispersion`].
    pub fn from_shapes(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain("alpha", alpha, "alpha > 0"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain("beta", beta, "beta > 0"));
        }
        let total = alpha + beta;
        BetaParams::new(alpha / total, 1.0 / (1.0 + total))
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `r0 = (1 - rho) / rho = alpha + beta`.
    pub fn concentration(&self) -> f64 {
        (1.0 - self.rho) / self.rho
    }

    pub fn alpha(&self) -> f64 {
        self.mu * self.concentration()
    }

    pub fn beta_shape(&self) -> f64 {
        (1.0 - self.mu) * self.concentration()
    }

    /// `ln E[X^n]` for real `n > -alpha`.
    pub fn ln_moment(&self, n: f64) -> f64 {
        let r0 = self.concentration();
        ln_rising_factorial_ratio(self.mu * r0, r0, n)
    }

    /// `E[X^n]` for real `n > -alpha`.
    pub fn moment(&self, n: f64) -> f64 {
        self.ln_moment(n).exp()
    }

    /// Same mean, different overdispersion.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        BetaParams::new(self.mu, rho)
    }
}

/// Shapes `(alpha, beta)` of the law. `alpha + beta = (1 - rho) / rho` and
/// `alpha / (alpha + beta) = mu`.
pub fn shape_from_mean_overdispersion(p: &BetaParams) -> (f64, f64) {
    (p.alpha(), p.beta_shape())
}

/// The law of `X^power` with `X ~ Beta(base)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPowerParams {
    base: BetaParams,
    power: f64,
}

impl BetaPowerParams {
    pub fn new(base: BetaParams, power: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::domain("power", power, "power > 0"));
        }
        Ok(BetaPowerParams { base, power })
    }

    pub fn base(&self) -> BetaParams {
        self.base
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

/// `E[X^power]`, the mean disruption probability of a firm whose chain has
/// diversification level `power`.
pub fn betapower_mean(bp: &BetaPowerParams) -> f64 {
    bp.base.moment(bp.power)
}

/// `mu^power`: the mean in the uncorrelated limit `rho -> 0`.
pub fn betapower_mean_uncorrelated(mu: f64, power: f64) -> f64 {
    mu.powf(power)
}

/// `P(X^power <= y)`, by quadrature of the Beta density.
///
/// Intended for moderate shapes (roughly `1e-3 <= alpha, beta <= 1e4`); used
/// to place equal-probability bins in the Monte Carlo checks.
pub fn betapower_cdf(bp: &BetaPowerParams, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let (a, b) = shape_from_mean_overdispersion(&bp.base);
    let x = y.powf(1.0 / bp.power);
    let (part, _) = beta_kernel_integral(a, b, 0.0, x, 1e-15);
    let (whole, _) = beta_kernel_integral(a, b, 0.0, 1.0, 1e-15);
    (part / whole).clamp(0.0, 1.0)
}

/// Inverse of [`betapower_cdf`] by bisection.
pub fn betapower_quantile(bp: &BetaPowerParams, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if betapower_cdf(bp, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Reusable sampler for `X^power`, `X ~ Beta(base)`.
#[derive(Debug, Clone)]
pub struct BetaPowerSampler {
    beta: Beta<f64>,
    power: f64,
}

impl BetaPowerSampler {
    pub fn new(bp: &BetaPowerParams) -> Self {
        let (a, b) = shape_from_mean_overdispersion(&bp.base);
        let beta = Beta::new(a, b).expect("validated shapes are positive and finite");
        BetaPowerSampler {
            beta,
            power: bp.power,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = self.beta.sample(rng);
        if self.power == 1.0 {
            x
        } else {
            x.powf(self.power)
        }
    }
}

/// Draw `X^power` with `X ~ Beta(base)`.
pub fn betapower_sample<R: Rng + ?Sized>(bp: &BetaPowerParams, rng: &mut R) -> f64 {
    BetaPowerSampler::new(bp).sample(rng)
}

fn check_counts(s_next: u64, upstream: u64) -> Result<()> {
    if s_next == 0 {
        return Err(Error::domain(
            "s_next",
            0.0,
            "s_next >= 1; without suppliers the mean disruption is 1",
        ));
    }
    if upstream == 0 {
        return Err(Error::domain("S", 0.0, "S >= 1"));
    }
    Ok(())
}

/// Risk-reduction factor `η(s, S) = (mu0 r0 + S)^(S(s-1)) / (r0 + S)^(S(s-1))`.
///
/// A firm in layer `k + 1` with `s_next` suppliers, whose chain has upstream
/// diversification `upstream = S_k`, has mean disruption `η · mu_k`.
pub fn eta(s_next: u64, upstream: u64, base: &BetaParams) -> Result<f64> {
    check_counts(s_next, upstream)?;
    let r0 = base.concentration();
    let s_up = upstream as f64;
    let n = (upstream as u128 * (s_next as u128 - 1)) as f64;
    Ok(ln_rising_factorial_ratio(base.mu * r0 + s_up, r0 + s_up, n).exp())
}

/// One step of the recursion `η(s + 1, S) = η(s, S) (mu0 r0 + S s)^(S) / (r0 + S s)^(S)`.
pub fn eta_recursion_step(eta_s: f64, s: u64, upstream: u64, base: &BetaParams) -> Result<f64> {
    check_counts(s, upstream)?;
    let r0 = base.concentration();
    let s_up = upstream as f64;
    let ss = (upstream as u128 * s as u128) as f64;
    Ok(eta_s
        * ln_rising_factorial_ratio(base.mu * r0 + ss, r0 + ss, s_up).exp())
}

/// Γ-extension of η to real `s` and `S`: `E[X^(S s)] / E[X^S]`.
///
/// Defined for `S s > -alpha`; used by the real-valued sourcing root finder.
pub fn eta_real(s: f64, upstream: f64, base: &BetaParams) -> f64 {
    (base.ln_moment(upstream * s) - base.ln_moment(upstream)).exp()
}

/// `mu0^(S (s - 1))`, the uncorrelated limit of [`eta`].
pub fn eta_uncorrelated(s_next: u64, upstream: u64, mu0: f64) -> f64 {
    mu0.powf(upstream as f64 * (s_next as f64 - 1.0))
}
