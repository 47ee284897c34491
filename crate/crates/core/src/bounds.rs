//! Closed-form quantities: sufficient test counts, entropy helpers,
//! order-level lower bounds, score moments and the mis-specified-K penalty.
//!
//! All logarithms are natural.

use std::f64::consts::E;

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::model::{channel_stats, design_p, ChannelStats, NoiseParams};

/// `-x log x - (1 - x) log(1 - x)` with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("binary entropy argument {x} outside [0, 1]"));
    }
    let term = |v: f64| if v == 0.0 { 0.0 } else { -v * v.ln() };
    Ok(term(x) + term(1.0 - x))
}

/// `H_b(zeta) / (1 - zeta)` for `zeta` in `(0, 1)`.
pub fn g_zeta(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return invalid(format!("zeta = {zeta} outside (0, 1)"));
    }
    Ok(binary_entropy(zeta)? / (1.0 - zeta))
}

/// Affine majorant of [`g_zeta`] on `(0, 0.5]`: `(17/6) zeta + 1/4`.
pub fn entropy_affine_bound(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta <= 0.5) {
        return invalid(format!("zeta = {zeta} outside (0, 0.5]"));
    }
    Ok(17.0 / 6.0 * zeta + 0.25)
}

/// `log C(n, k)`. Direct summation when `min(k, n - k)` is small, log-gamma otherwise.
pub fn log_binom(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return invalid(format!("log C({n}, {k}) with k > n"));
    }
    let k = k.min(n - k);
    if k <= 64 {
        let base = (n - k) as f64;
        return Ok((1..=k).map(|i| ((base + i as f64) / i as f64).ln()).sum());
    }
    Ok(ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
}

/// Default constant multiplying the combinatorial term.
pub const CA1: f64 = 48.0 * E * E;
/// Default constant multiplying the `log K` term.
pub const CA2: f64 = 8.0 * E * E;

/// Inputs of the sufficient-test formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub noise: NoiseParams,
    /// Design parameter; defaults to `1 / ((1 - u) K)`.
    pub p: f64,
    pub c0: f64,
    pub ca1: f64,
    pub ca2: f64,
    /// Positive-pool weight of the decoder (0 for the row decoders).
    pub psi0: f64,
}

impl SystemParams {
    pub fn new(n: usize, k: usize, l: usize, noise: NoiseParams) -> Result<Self> {
        if k == 0 || k >= n {
            return invalid(format!("need 1 <= K < N, got K = {k}, N = {n}"));
        }
        if l == 0 || l > n - k {
            return invalid(format!("need 1 <= L <= N - K, got L = {l}"));
        }
        Ok(Self {
            n,
            k,
            l,
            noise,
            p: design_p(k, noise.u(), true)?,
            c0: 1.0,
            ca1: CA1,
            ca2: CA2,
            psi0: 0.0,
        })
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    pub fn with_psi0(mut self, psi0: f64) -> Self {
        self.psi0 = psi0;
        self
    }

    pub fn with_constants(mut self, ca1: f64, ca2: f64) -> Self {
        self.ca1 = ca1;
        self.ca2 = ca2;
        self
    }

    pub fn stats(&self) -> Result<ChannelStats> {
        channel_stats(self.p, self.k, self.noise)
    }

    /// `(N - K) - (L - 1)`.
    pub fn n0(&self) -> usize {
        (self.n - self.k) - (self.l - 1)
    }

    fn check(&self) -> Result<()> {
        if !(self.c0 > 0.0 && self.ca1 > 0.0 && self.ca2 > 0.0) {
            return invalid("c0, Ca1 and Ca2 must be positive");
        }
        if !(self.psi0 >= 0.0 && self.psi0.is_finite()) {
            return invalid(format!("psi0 = {} must be finite and >= 0", self.psi0));
        }
        Ok(())
    }

    /// `(1 + c0) K (1 - u) / ((1 - q)(1 - gamma0)^2 (1 + psi0))`.
    fn prefactor(&self) -> Result<f64> {
        let g0 = self.stats()?.gamma0;
        let (u, q) = (self.noise.u(), self.noise.q());
        Ok((1.0 + self.c0) * self.k as f64 * (1.0 - u) / ((1.0 - q) * (1.0 - g0).powi(2) * (1.0 + self.psi0)))
    }
}

/// A sufficient number of tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestCount {
    pub m: u64,
    /// The formula value before rounding up.
    pub raw: f64,
    /// `K < 2`: outside the range the guarantee is stated for.
    pub k_below_two: bool,
}

fn count(raw: f64, k: usize) -> TestCount {
    if k < 2 {
        log::warn!("sufficient test counts assume K > 1 (got K = {k})");
    }
    TestCount { m: raw.ceil() as u64, raw, k_below_two: k < 2 }
}

/// Tests sufficient for a fixed defective set.
pub fn sufficient_tests_nonuniform(params: &SystemParams) -> Result<TestCount> {
    params.check()?;
    let (n, k, l) = (params.n as u64, params.k as u64, params.l as u64);
    let comb = (k as f64).ln() + log_binom(n - k, l - 1)?;
    let bracket = params.ca1 * comb / params.n0() as f64 + params.ca2 * (k as f64).ln();
    Ok(count(params.prefactor()? * bracket, params.k))
}

/// Tests sufficient for every defective set of size `K`.
pub fn sufficient_tests_uniform(params: &SystemParams) -> Result<TestCount> {
    params.check()?;
    let (n, k, l) = (params.n as u64, params.k as u64, params.l as u64);
    let comb = (k as f64).ln() + log_binom(n - k, l - 1)? + log_binom(n, k)?;
    let bracket = params.ca1 * comb / params.n0() as f64 + params.ca2 * (n as f64).ln();
    Ok(count(params.prefactor()? * bracket, params.k))
}

/// Order-level necessary test counts with implicit constant 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderBounds {
    pub no_noise: f64,
    pub dilution: f64,
    pub additive: f64,
}

impl OrderBounds {
    /// Multiply each entry by `log K`, the scaling used when plotting against simulations.
    pub fn scaled(&self, k: usize) -> Self {
        let s = (k as f64).ln();
        Self { no_noise: self.no_noise * s, dilution: self.dilution * s, additive: self.additive * s }
    }
}

/// Order-level lower bounds for the noiseless, dilution and additive channels,
/// each of the form `K / D * log((1 - K/N) / (1 - L/N - K/N))`.
pub fn lower_bound_order(n: usize, k: usize, l: usize, noise: NoiseParams) -> Result<OrderBounds> {
    if k < 2 {
        return invalid("order-level bounds need K >= 2");
    }
    let (a0, b0) = (l as f64 / n as f64, k as f64 / n as f64);
    if a0 + b0 >= 1.0 {
        return invalid(format!("(L + K) / N = {} must be < 1", a0 + b0));
    }
    let base = ((1.0 - b0) / (1.0 - a0 - b0)).ln();
    let (kf, logk) = (k as f64, (k as f64).ln());
    let inv_q = if noise.q() > 0.0 { (1.0 / noise.q()).ln() } else { f64::INFINITY };
    Ok(OrderBounds {
        no_noise: kf / logk * base,
        dilution: kf / ((1.0 - noise.u()) * logk) * base,
        additive: kf / inv_q.min(logk) * base,
    })
}

/// Mean and variance bounds of the column statistic for a defective (`i`)
/// and a non-defective (`j`) item.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimates {
    pub mu_i: f64,
    pub mu_j: f64,
    pub var_i_bound: f64,
    pub var_j_bound: f64,
    /// `(mu_i + mu_j) / 2`.
    pub tau: f64,
    /// `(N - K) - (L - 1)`, when population sizes are supplied.
    pub n0: Option<usize>,
}

impl MomentEstimates {
    pub fn with_n0(mut self, n: usize, k: usize, l: usize) -> Result<Self> {
        if l == 0 || k + l > n {
            return invalid(format!("need 1 <= L <= N - K, got N = {n}, K = {k}, L = {l}"));
        }
        self.n0 = Some((n - k) - (l - 1));
        Ok(self)
    }
}

/// Moments of `x^T y^c - psi_cb x^T y` over `M` tests with Bernoulli(`p`) entries.
pub fn moment_oracle(m: usize, p: f64, stats: &ChannelStats, psi_cb: f64) -> Result<MomentEstimates> {
    if m == 0 {
        return invalid("moment oracle needs M >= 1");
    }
    if !(p > 0.0 && p <= 1.0) || !(psi_cb >= 0.0 && psi_cb.is_finite()) {
        return invalid(format!("bad p = {p} or psi_cb = {psi_cb}"));
    }
    let mp = m as f64 * p;
    let (g, gi) = (stats.gamma, stats.gamma0 * stats.gamma);
    let mu_j = mp * (g - psi_cb * (1.0 - g));
    let mu_i = mp * (gi - psi_cb * (1.0 - gi));
    Ok(MomentEstimates {
        mu_i,
        mu_j,
        var_i_bound: mp * (gi + psi_cb * psi_cb * (1.0 - gi)),
        var_j_bound: mp * (g + psi_cb * psi_cb * (1.0 - g)),
        tau: 0.5 * (mu_i + mu_j),
        n0: None,
    })
}

/// Factor by which the test count grows when the design assumes `delta_k * K`
/// defectives: `delta_k * exp((1 - u)(1 / delta_k - 1))`.
///
/// Follows from `M ~ 1 / (p Gamma)` with `p = 1 / (delta_k K)` and
/// `Gamma ~ exp(-(1 - u) p K)`.
pub fn fm_penalty(delta_k: f64, u: f64) -> Result<f64> {
    if !(delta_k > 0.0 && delta_k.is_finite()) {
        return invalid(format!("delta_k = {delta_k} must be positive"));
    }
    if !(0.0..0.5).contains(&u) {
        return invalid(format!("dilution probability u = {u} outside [0, 0.5)"));
    }
    Ok(delta_k * ((1.0 - u) * (1.0 / delta_k - 1.0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((binary_entropy(0.2).unwrap() - 0.500_402_423_538_188_3).abs() < 1e-12);
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn g_and_affine_bound() {
        assert!((g_zeta(0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((entropy_affine_bound(0.5).unwrap() - (17.0 / 12.0 + 0.25)).abs() < 1e-15);
        assert!(g_zeta(1.0).is_err());
        assert!(entropy_affine_bound(0.6).is_err());
    }

    #[test]
    fn log_binom_small() {
        assert!((log_binom(5, 2).unwrap() - 10f64.ln()).abs() < 1e-14);
        assert_eq!(log_binom(9, 0).unwrap(), 0.0);
        assert_eq!(log_binom(9, 9).unwrap(), 0.0);
        assert!(log_binom(3, 4).is_err());
    }

    #[test]
    fn fm_examples() {
        assert_eq!(fm_penalty(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(fm_penalty(1.0, 0.3).unwrap(), 1.0);
        assert!((fm_penalty(1.5, 0.0).unwrap() - 1.5 * (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!(fm_penalty(0.0, 0.0).is_err());
    }

    #[test]
    fn order_bounds() {
        let b = lower_bound_order(256, 16, 128, NoiseParams::noiseless()).unwrap();
        let want = 16.0 / 16f64.ln() * (240.0f64 / 112.0).ln();
        assert!((b.no_noise - want).abs() < 1e-12);
        assert_eq!(b.dilution, b.no_noise);
        assert_eq!(b.additive, b.no_noise);
        // log(1/0.2) < log 16
        let a = lower_bound_order(256, 16, 128, NoiseParams::new(0.0, 0.2).unwrap()).unwrap();
        assert!((a.additive - 16.0 / 5f64.ln() * (240.0f64 / 112.0).ln()).abs() < 1e-12);
        assert!(lower_bound_order(10, 5, 5, NoiseParams::noiseless()).is_err());
        assert!(lower_bound_order(10, 1, 5, NoiseParams::noiseless()).is_err());
    }

    #[test]
    fn moments() {
        let s = channel_stats(0.1, 5, NoiseParams::new(0.2, 0.1).unwrap()).unwrap();
        let mo = moment_oracle(1000, 0.1, &s, 0.0).unwrap();
        assert!((mo.mu_j - 100.0 * s.gamma).abs() < 1e-12);
        assert!((mo.mu_i - 100.0 * s.gamma0 * s.gamma).abs() < 1e-12);
        for psi in [0.0, 0.3, 1.2] {
            let mo = moment_oracle(1000, 0.1, &s, psi).unwrap();
            let gap = 100.0 * s.gamma * (1.0 - s.gamma0) * (1.0 + psi);
            assert!((mo.mu_j - mo.mu_i - gap).abs() < 1e-10);
            assert!(mo.mu_j > mo.mu_i);
        }
        assert_eq!(mo.with_n0(256, 16, 64).unwrap().n0, Some(177));
        assert!(moment_oracle(0, 0.1, &s, 0.0).is_err());
    }
}
