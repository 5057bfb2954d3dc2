//! The martingale approximation `S_n(t) = M_n(t) + R_n(t)`, projection
//! norms `||E_0(X_k)||_2`, the Rootzén boundedness condition and the
//! integrated remainder identity.
//!
//! For a linear filter with `F_0 = sigma(eps_j, j <= 0)` the projections
//! are explicit: `P_0(X_k) = a_k eps_0`, so `D_l(t) = e^{ilt} A(e^{it})
//! eps_l` with `A(z) = sum a_j z^j`, and both the subtraction form
//! `R_n = S_n - M_n` and the projection form of `R_n` can be evaluated
//! exactly from a stored innovation window.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConditionTerm, Verdict};
use crate::core::{Frequency, SeedSpec, StreamRole};
use crate::error::{Error, Result};
use crate::processes::{
    canonical_drift, ArlSpec, InnovationDist, LinearSpec, MetropolisSpec, ScalarFn,
    TimeSeriesWindow,
};
use crate::transform::dft;

/// `||E_0(X_k)||_2^2 = sigma^2 sum_{j >= k} a_j^2` for a linear filter
/// (exact finite sum over the truncated coefficients; zero beyond the
/// filter order).
pub fn e0_norm_linear(spec: &LinearSpec, k: usize) -> Result<f64> {
    let sigma2 = spec
        .innovation
        .variance()
        .ok_or_else(|| Error::Domain("innovation variance does not exist".into()))?;
    if k > spec.order() {
        return Ok(0.0);
    }
    Ok(sigma2 * spec.coeffs[k..].iter().map(|a| a * a).sum::<f64>())
}

/// A Markov kernel that can be sampled path-wise, for the nested
/// conditional-expectation estimators.
pub trait SampleKernel: Sync {
    /// Draw an (approximately) stationary starting state.
    fn init(&self, rng: &mut ChaCha12Rng) -> f64;
    /// One transition.
    fn step(&self, rng: &mut ChaCha12Rng, x: f64) -> f64;
}

/// AR(1): `X_{n+1} = rho X_n + sigma eps`.
pub struct Ar1Kernel {
    pub rho: f64,
    pub sigma: f64,
}

impl SampleKernel for Ar1Kernel {
    fn init(&self, rng: &mut ChaCha12Rng) -> f64 {
        // Exact stationary draw.
        let sd = self.sigma / (1.0 - self.rho * self.rho).sqrt();
        InnovationDist::Gaussian { sigma: sd }.sample(rng)
    }
    fn step(&self, rng: &mut ChaCha12Rng, x: f64) -> f64 {
        self.rho * x + InnovationDist::Gaussian { sigma: self.sigma }.sample(rng)
    }
}

/// Iid draws (the trivial kernel).
pub struct IidKernel(pub InnovationDist);

impl SampleKernel for IidKernel {
    fn init(&self, rng: &mut ChaCha12Rng) -> f64 {
        self.0.sample(rng)
    }
    fn step(&self, rng: &mut ChaCha12Rng, _x: f64) -> f64 {
        self.0.sample(rng)
    }
}

impl SampleKernel for ArlSpec {
    fn init(&self, rng: &mut ChaCha12Rng) -> f64 {
        let mut y = 0.0;
        for _ in 0..self.burn_in.max(1000) {
            y = self.step(rng, y);
        }
        y
    }
    fn step(&self, rng: &mut ChaCha12Rng, x: f64) -> f64 {
        canonical_drift(self.c, self.delta, x) + self.innovation.sample(rng)
    }
}

impl SampleKernel for MetropolisSpec {
    fn init(&self, rng: &mut ChaCha12Rng) -> f64 {
        let mut x = self.nu.sample(rng);
        for _ in 0..self.burn_in.max(200) {
            x = self.step(rng, x);
        }
        x
    }
    fn step(&self, rng: &mut ChaCha12Rng, x: f64) -> f64 {
        let u: f64 = rng.random();
        if u >= self.p.eval(x) {
            self.nu.sample(rng)
        } else {
            x
        }
    }
}

/// Monte Carlo budget for nested conditional-expectation estimators.
#[derive(Debug, Clone, Copy)]
pub struct E0Budget {
    /// Outer (stationary-state) samples.
    pub outer: usize,
    /// Futures per independent half-batch.
    pub futures: usize,
}

impl Default for E0Budget {
    fn default() -> Self {
        E0Budget {
            outer: 512,
            futures: 64,
        }
    }
}

/// An estimate with standard error and the 5%-SE conclusiveness flag.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct E0Estimate {
    pub value: f64,
    pub se: f64,
    /// Set when the budget could not push the SE below 5% of the estimate
    /// (or of the observable's variance scale, for estimates near zero).
    pub inconclusive: bool,
}

/// `||E_0(X_k)||_2^2` for a kernel model with observable `g`, by the
/// coupled-trajectories estimator: from each stationary state, two
/// independent half-batches of `k`-step futures give an unbiased product
/// estimator of `(K^k g(x) - mu(g))^2`.
pub fn e0_norm_markov(
    kernel: &dyn SampleKernel,
    g: ScalarFn,
    k: usize,
    budget: E0Budget,
    seed: SeedSpec,
) -> Result<E0Estimate> {
    if k == 0 {
        return Err(Error::Argument("e0_norm_markov needs k >= 1".into()));
    }
    // mu(g) from a long independent chain.
    let mut rng = seed.with_role(StreamRole::Centering).rng();
    let mut x = kernel.init(&mut rng);
    let prepass = 1usize << 16;
    let mut mu_g = 0.0;
    let mut mu_g2 = 0.0;
    for _ in 0..prepass {
        x = kernel.step(&mut rng, x);
        let v = g.eval(x);
        mu_g += v;
        mu_g2 += v * v;
    }
    mu_g /= prepass as f64;
    mu_g2 /= prepass as f64;
    let var_g = (mu_g2 - mu_g * mu_g).max(0.0);

    let products: Vec<f64> = (0..budget.outer as u32)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.with_role(StreamRole::Futures(i)).rng();
            let x0 = kernel.init(&mut rng);
            let mut half = |rng: &mut ChaCha12Rng| {
                let mut acc = 0.0;
                for _ in 0..budget.futures {
                    let mut y = x0;
                    for _ in 0..k {
                        y = kernel.step(rng, y);
                    }
                    acc += g.eval(y);
                }
                acc / budget.futures as f64 - mu_g
            };
            let a = half(&mut rng);
            let b = half(&mut rng);
            a * b
        })
        .collect();
    let n = products.len() as f64;
    let value = products.iter().sum::<f64>() / n;
    let var = products.iter().map(|p| (p - value) * (p - value)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let scale = value.abs().max(1e-3 * var_g);
    Ok(E0Estimate {
        value,
        se,
        inconclusive: se > 0.05 * scale,
    })
}

/// The martingale decomposition of one window at one frequency.
#[derive(Debug, Clone)]
pub struct MartingaleDecomp {
    pub t: Frequency,
    /// `A(e^{it})`, the coefficient of the limiting martingale difference
    /// `D_0(t) = A(e^{it}) eps_0`.
    pub d0_coeff: Complex64,
    pub s_n: Complex64,
    pub m_n: Complex64,
    /// `R_n = S_n - M_n`.
    pub r_n: Complex64,
    /// `R_n` recomputed independently from the projection formula.
    pub r_n_projection: Complex64,
}

/// Decompose `S_n(t) = M_n(t) + R_n(t)` for a linear window, returning the
/// remainder both as `S_n - M_n` and via the projection formula
/// `R_n = sum_{k<=n} e^{ikt} E_0(X_k)
///        + sum_{k>n} e^{ikt} (E_0(X_k) - E_n(X_k))`.
pub fn martingale_decompose_linear(
    spec: &LinearSpec,
    window: &TimeSeriesWindow,
    t: Frequency,
) -> Result<MartingaleDecomp> {
    let inn = window
        .innovations
        .as_ref()
        .ok_or_else(|| Error::Argument("window stores no innovations".into()))?;
    let n = window.len() as i64;
    let j_max = spec.order() as i64;
    let tv = t.value();
    let a_t = spec.transfer_at(tv);

    let s_n = dft(&window.values, t)?;
    // M_n = A(e^{it}) sum_{k=1}^n e^{ikt} eps_k.
    let eps_1n: Vec<f64> = (1..=n).map(|k| inn.at(k)).collect();
    let m_n = a_t * dft(&eps_1n, t)?;
    let r_n = s_n - m_n;

    // Projection form, exact for the finite filter:
    // E_0(X_k) = sum_{j >= k} a_j eps_{k-j} and
    // E_0(X_k) - E_n(X_k) = -sum_{j=k-n}^{min(k-1, J)} a_j eps_{k-j}.
    let phase = |k: i64| {
        let p = k as f64 * tv;
        Complex64::new(p.cos(), p.sin())
    };
    let mut proj = Complex64::new(0.0, 0.0);
    for k in 1..=n.min(j_max) {
        let mut e0 = 0.0;
        for j in k..=j_max {
            e0 += spec.coeffs[j as usize] * inn.at(k - j);
        }
        proj += phase(k) * e0;
    }
    for k in n + 1..=n + j_max {
        let mut d = 0.0;
        for j in (k - n).max(0)..=(k - 1).min(j_max) {
            d += spec.coeffs[j as usize] * inn.at(k - j);
        }
        proj -= phase(k) * d;
    }
    Ok(MartingaleDecomp {
        t,
        d0_coeff: a_t,
        s_n,
        m_n,
        r_n,
        r_n_projection: proj,
    })
}

/// Monte Carlo + quadrature check of the integrated remainder identity
/// `int E|R_n(t)|^2 dt/(2pi) = 2 sum_{k=1}^n ||E_0(X_k)||_2^2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartestReport {
    pub n: usize,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub ratio_se: f64,
}

/// Estimate the left side over `replicates` windows and a uniform `t_grid`
/// (normalized measure `dt / 2pi`; the grid sum is an exact quadrature for
/// trigonometric polynomials once `t_grid > 2(n + J)`), and compare with
/// the closed-form right side.
pub fn partest_identity_check(
    spec: &LinearSpec,
    n: usize,
    t_grid: usize,
    replicates: usize,
    master_seed: u64,
) -> Result<PartestReport> {
    if replicates < 2 {
        return Err(Error::Argument("need at least 2 replicates".into()));
    }
    let grid: Vec<Frequency> = (0..t_grid)
        .map(|g| {
            Frequency::radians(2.0 * std::f64::consts::PI * (g as f64 + 0.5) / t_grid as f64)
        })
        .collect::<Result<_>>()?;
    let per_rep: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let w = crate::processes::generate(
                &crate::processes::ProcessSpec::Linear(spec.clone()),
                master_seed,
                r,
                n,
            )?;
            let mut acc = 0.0;
            for &t in &grid {
                let d = martingale_decompose_linear(spec, &w, t)?;
                acc += d.r_n.norm_sqr();
            }
            Ok(acc / t_grid as f64)
        })
        .collect::<Result<_>>()?;
    let lhs = per_rep.iter().sum::<f64>() / replicates as f64;
    let var = per_rep.iter().map(|v| (v - lhs) * (v - lhs)).sum::<f64>()
        / (replicates as f64 - 1.0);
    let lhs_se = (var / replicates as f64).sqrt();
    let mut rhs = 0.0;
    for k in 1..=n {
        rhs += e0_norm_linear(spec, k)?;
    }
    rhs *= 2.0;
    if rhs == 0.0 {
        // White noise: both sides vanish.
        return Ok(PartestReport {
            n,
            lhs,
            lhs_se,
            rhs,
            ratio: if lhs == 0.0 { 1.0 } else { f64::INFINITY },
            ratio_se: 0.0,
        });
    }
    Ok(PartestReport {
        n,
        lhs,
        lhs_se,
        rhs,
        ratio: lhs / rhs,
        ratio_se: lhs_se / rhs,
    })
}

/// Evidence for `sup_n ||E_0(S_n(t))||_2 < infinity`, evaluated across
/// dyadic `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootzenReport {
    pub t: f64,
    /// `(n, ||E_0(S_n(t))||_2)` at each evaluated dyadic `n`.
    pub norms: Vec<(u64, f64)>,
    pub sup: f64,
    pub verdict: Verdict,
    pub evidence: Vec<ConditionTerm>,
}

fn rootzen_verdict(norms: &[(u64, f64)]) -> Verdict {
    // Growth detection: the sup doubling across consecutive dyadic n.
    for w in norms.windows(2) {
        if w[1].1 > 2.0 * w[0].1.max(1e-12) {
            return Verdict::Diverges;
        }
    }
    Verdict::Converges
}

fn rootzen_report(t: f64, norms: Vec<(u64, f64)>) -> RootzenReport {
    let sup = norms.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let verdict = rootzen_verdict(&norms);
    let evidence = norms
        .iter()
        .map(|&(n, v)| ConditionTerm {
            k: n,
            term: v,
            partial_sum: v,
        })
        .collect();
    RootzenReport {
        t,
        norms,
        sup,
        verdict,
        evidence,
    }
}

/// `||E_0(S_n(t))||_2` for a linear filter, in closed form by innovation
/// orthogonality:
/// `||sum_{k=1}^n e^{ikt} E_0(X_k)||^2
///  = sigma^2 sum_{l >= 1} |sum_{k=1}^{min(n, J-l+1)} e^{ikt} a_{k+l-1}|^2`.
pub fn rootzen_condition_linear(
    spec: &LinearSpec,
    t: Frequency,
    n_max: u64,
) -> Result<RootzenReport> {
    let sigma2 = spec
        .innovation
        .variance()
        .ok_or_else(|| Error::Domain("innovation variance does not exist".into()))?;
    let tv = t.value();
    let j_max = spec.order();
    let mut norms = Vec::new();
    let mut n = 16u64;
    while n <= n_max {
        let cap = (n as usize).min(j_max);
        let mut total = 0.0;
        for l in 1..=j_max {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=cap.min(j_max + 1 - l) {
                let p = k as f64 * tv;
                acc += Complex64::new(p.cos(), p.sin()) * spec.coeffs[k + l - 1];
            }
            total += acc.norm_sqr();
        }
        norms.push((n, (sigma2 * total).sqrt()));
        n *= 2;
    }
    Ok(rootzen_report(tv, norms))
}

/// `||E_0(S_n(t))||_2` for the exact (untruncated) AR(1) chain:
/// `E_0(S_n(t)) = sum_{k=1}^n (rho e^{it})^k X_0`, so the norm is
/// `|z (1 - z^n) / (1 - z)| ||X_0||` with `z = rho e^{it}` and
/// `||X_0|| = sigma / sqrt(1 - rho^2)`.
pub fn rootzen_condition_ar1(
    rho: f64,
    sigma: f64,
    t: Frequency,
    n_max: u64,
) -> Result<RootzenReport> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Argument(format!("AR(1) needs |rho| < 1, got {rho}")));
    }
    let tv = t.value();
    let z = Complex64::new(tv.cos(), tv.sin()) * rho;
    let x0_norm = sigma / (1.0 - rho * rho).sqrt();
    let mut norms = Vec::new();
    let mut n = 16u64;
    while n <= n_max {
        let geo = z * (1.0 - pow_complex(z, n)) / (1.0 - z);
        norms.push((n, geo.norm() * x0_norm));
        n *= 2;
    }
    Ok(rootzen_report(tv, norms))
}

fn pow_complex(z: Complex64, mut n: u64) -> Complex64 {
    let mut base = z;
    let mut acc = Complex64::new(1.0, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

/// Monte Carlo evidence for the Rootzén condition on a kernel model:
/// `X_k = g(xi_k) - mu(g)`, with `E_0(S_n(t))` estimated by
/// coupled-trajectory half-batches (unbiased product form).
pub fn rootzen_condition_markov(
    kernel: &dyn SampleKernel,
    g: ScalarFn,
    t: Frequency,
    n_max: u64,
    budget: E0Budget,
    seed: SeedSpec,
) -> Result<RootzenReport> {
    let tv = t.value();
    let dyadic: Vec<u64> = std::iter::successors(Some(16u64), |&n| Some(n * 2))
        .take_while(|&n| n <= n_max)
        .collect();
    if dyadic.is_empty() {
        return Err(Error::Argument("n_max below the first dyadic point 16".into()));
    }
    let horizon = *dyadic.last().unwrap() as usize;

    let mut rng = seed.with_role(StreamRole::Centering).rng();
    let mut x = kernel.init(&mut rng);
    let prepass = 1usize << 16;
    let mut mu_g = 0.0;
    for _ in 0..prepass {
        x = kernel.step(&mut rng, x);
        mu_g += g.eval(x);
    }
    mu_g /= prepass as f64;

    // For each outer state, half-batch estimates of E_0 S_n(t) for all n.
    let per_outer: Vec<Vec<f64>> = (0..budget.outer as u32)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.with_role(StreamRole::Futures(i)).rng();
            let x0 = kernel.init(&mut rng);
            let mut half = |rng: &mut ChaCha12Rng| -> Vec<Complex64> {
                let mut sums = vec![Complex64::new(0.0, 0.0); dyadic.len()];
                for _ in 0..budget.futures {
                    let mut y = x0;
                    let mut s = Complex64::new(0.0, 0.0);
                    let mut d = 0usize;
                    for k in 1..=horizon {
                        y = kernel.step(rng, y);
                        let p = k as f64 * tv;
                        s += Complex64::new(p.cos(), p.sin()) * (g.eval(y) - mu_g);
                        if d < dyadic.len() && k as u64 == dyadic[d] {
                            sums[d] += s;
                            d += 1;
                        }
                    }
                }
                sums.iter()
                    .map(|v| *v / budget.futures as f64)
                    .collect()
            };
            let a = half(&mut rng);
            let b = half(&mut rng);
            a.iter()
                .zip(b.iter())
                .map(|(u, v)| (u * v.conj()).re)
                .collect()
        })
        .collect();
    let norms: Vec<(u64, f64)> = dyadic
        .iter()
        .enumerate()
        .map(|(d, &n)| {
            let mean =
                per_outer.iter().map(|v| v[d]).sum::<f64>() / budget.outer as f64;
            (n, mean.max(0.0).sqrt())
        })
        .collect();
    Ok(rootzen_report(tv, norms))
}

/// Dispatching wrapper: closed form for linear models, Monte Carlo for
/// kernel models.
pub fn rootzen_condition(
    spec: &LinearSpec,
    t: Frequency,
    n_max: u64,
) -> Result<RootzenReport> {
    rootzen_condition_linear(spec, t, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{gen_linear, BaseDist};

    fn gaussian() -> InnovationDist {
        InnovationDist::standard_gaussian()
    }

    fn seed() -> SeedSpec {
        SeedSpec::new(500, 0, StreamRole::Innovations)
    }

    #[test]
    fn e0_linear_values() {
        let spec = LinearSpec::geometric(0.5, gaussian()).unwrap();
        // k = 0: full variance sum a_j^2 (truncated tail < 1e-8 of 4/3).
        let full = e0_norm_linear(&spec, 0).unwrap();
        assert!((full - 4.0 / 3.0).abs() <= 1e-7);
        // k = 2: sum_{j>=2} 0.25^j = 1/12.
        let v = e0_norm_linear(&spec, 2).unwrap();
        assert!((v - 1.0 / 12.0).abs() <= 1e-8, "{v}");
        // Beyond the truncation order the projection is exactly zero.
        assert_eq!(e0_norm_linear(&spec, spec.order() + 1).unwrap(), 0.0);
    }

    #[test]
    fn e0_markov_iid_is_zero() {
        let est = e0_norm_markov(
            &IidKernel(gaussian()),
            ScalarFn::Identity,
            2,
            E0Budget {
                outer: 200,
                futures: 32,
            },
            seed(),
        )
        .unwrap();
        assert!(est.value.abs() <= 4.0 * est.se.max(1e-6), "{est:?}");
    }

    #[test]
    fn e0_markov_ar1_matches_closed_form() {
        // E_0(X_k) = rho^k X_0, so the norm^2 is rho^{2k} var(X_0);
        // k = 3, rho = 0.5: 0.015625 * 4/3.
        let est = e0_norm_markov(
            &Ar1Kernel {
                rho: 0.5,
                sigma: 1.0,
            },
            ScalarFn::Identity,
            3,
            E0Budget {
                outer: 3000,
                futures: 48,
            },
            seed(),
        )
        .unwrap();
        let want = 0.015625 * 4.0 / 3.0;
        assert!(
            (est.value - want).abs() <= 4.0 * est.se,
            "est {est:?}, want {want}"
        );
        // And agrees with the linear route within 4 SE.
        let lin = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let closed = e0_norm_linear(&lin, 3).unwrap();
        assert!((est.value - closed).abs() <= 4.0 * est.se);
    }

    #[test]
    fn e0_markov_metropolis_kernel_algebra() {
        // Constant p: K g = p g + (1-p) nu(g), so K^2 h - mu(h) scales by
        // p^2 and the squared norm is p^4 var_mu(h) = 0.0625/3 for
        // h(x) = x, nu = U(-1, 1).
        let spec = MetropolisSpec {
            p: crate::processes::AcceptFn::Const { p: 0.5 },
            nu: BaseDist::Uniform { a: -1.0, b: 1.0 },
            observable: ScalarFn::Identity,
            burn_in: 100,
        };
        let est = e0_norm_markov(
            &spec,
            ScalarFn::Identity,
            2,
            E0Budget {
                outer: 3000,
                futures: 48,
            },
            seed(),
        )
        .unwrap();
        let want = 0.0625 / 3.0;
        assert!(
            (est.value - want).abs() <= 4.0 * est.se,
            "est {est:?}, want {want}"
        );
    }

    #[test]
    fn decomposition_white_noise_has_zero_remainder() {
        let spec = LinearSpec::new(vec![1.0], gaussian()).unwrap();
        let w = gen_linear(&spec, seed(), 256).unwrap();
        let d =
            martingale_decompose_linear(&spec, &w, Frequency::radians(1.0).unwrap()).unwrap();
        assert!((d.d0_coeff - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(d.r_n.norm() <= 1e-10 * d.s_n.norm());
        assert!(d.r_n_projection.norm() <= 1e-12);
    }

    #[test]
    fn decomposition_explicit_three_sample_window() {
        // a = [1, 1], n = 3: R_n = e^{it} eps_0 - e^{4it} eps_3 by hand.
        let spec = LinearSpec::new(vec![1.0, 1.0], gaussian()).unwrap();
        let w = gen_linear(&spec, seed(), 3).unwrap();
        let inn = w.innovations.as_ref().unwrap();
        let t = Frequency::radians(0.77).unwrap();
        let d = martingale_decompose_linear(&spec, &w, t).unwrap();
        let tv = t.value();
        let want = Complex64::new(tv.cos(), tv.sin()) * inn.at(0)
            - Complex64::new((4.0 * tv).cos(), (4.0 * tv).sin()) * inn.at(3);
        assert!((d.r_n_projection - want).norm() <= 1e-13);
        assert!((d.r_n - d.r_n_projection).norm() <= 1e-12);
        // S_n = M_n + R_n exactly.
        assert!(((d.m_n + d.r_n) - d.s_n).norm() <= 1e-12 * d.s_n.norm().max(1.0));
    }

    #[test]
    fn two_remainder_routes_agree_on_geometric_filter() {
        let spec = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let w = gen_linear(&spec, seed(), 200).unwrap();
        for t in [0.4, 1.9, 4.4] {
            let d =
                martingale_decompose_linear(&spec, &w, Frequency::radians(t).unwrap()).unwrap();
            let scale = d.r_n.norm().max(d.s_n.norm() * 1e-3).max(1e-12);
            assert!(
                (d.r_n - d.r_n_projection).norm() / scale <= 1e-9,
                "t={t}: {} vs {}",
                d.r_n,
                d.r_n_projection
            );
        }
    }

    #[test]
    fn remainder_is_negligible_at_lil_scale() {
        // E|R_n|^2 / (n ln ln n) <= 0.01 for a_j = 0.5^j at t = pi/2.
        let spec = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let t = Frequency::rational_pi(1, 2).unwrap();
        let n = 1 << 12;
        let reps = 500u64;
        let mut acc = 0.0;
        for r in 0..reps {
            let w = gen_linear(&spec, SeedSpec::new(901, r, StreamRole::Innovations), n).unwrap();
            let d = martingale_decompose_linear(&spec, &w, t).unwrap();
            acc += d.r_n.norm_sqr();
        }
        let mean = acc / reps as f64;
        let scale = n as f64 * crate::core::loglog(n as u64).unwrap();
        assert!(mean / scale <= 0.01, "E|R|^2/(n lnln n) = {}", mean / scale);
    }

    #[test]
    fn partest_white_noise_both_sides_zero() {
        let spec = LinearSpec::new(vec![1.0], gaussian()).unwrap();
        let r = partest_identity_check(&spec, 8, 64, 16, 77).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert!(r.lhs <= 1e-20);
    }

    #[test]
    fn partest_two_tap_filter() {
        let spec = LinearSpec::new(vec![1.0, 1.0], gaussian()).unwrap();
        let r = partest_identity_check(&spec, 8, 64, 4000, 78).unwrap();
        assert!(
            (r.ratio - 1.0).abs() <= 4.0 * r.ratio_se,
            "ratio {} +- {}",
            r.ratio,
            r.ratio_se
        );
    }

    #[test]
    fn partest_geometric_filter() {
        let spec = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let r = partest_identity_check(&spec, 64, 256, 2000, 79).unwrap();
        assert!(
            (r.ratio - 1.0).abs() <= 4.0 * r.ratio_se,
            "ratio {} +- {}",
            r.ratio,
            r.ratio_se
        );
    }

    #[test]
    fn rootzen_iid_is_identically_zero() {
        let spec = LinearSpec::new(vec![1.0], gaussian()).unwrap();
        let r = rootzen_condition(&spec, Frequency::radians(1.3).unwrap(), 1 << 10).unwrap();
        assert!(r.norms.iter().all(|&(_, v)| v == 0.0));
        assert_eq!(r.verdict, Verdict::Converges);
    }

    #[test]
    fn rootzen_ar1_closed_form_at_quarter_turn() {
        // sup over dyadic n >= 16 of |z(1-z^n)/(1-z)| ||X_0|| with
        // z = 0.5 i approaches |z/(1-z)| ||X_0|| = ||X_0|| / sqrt(5).
        let t = Frequency::rational_pi(1, 2).unwrap();
        let r = rootzen_condition_ar1(0.5, 1.0, t, 1 << 12).unwrap();
        let x0_norm = (4.0f64 / 3.0).sqrt();
        // Oracle: the same sup from an independent power route.
        let z = Complex64::new(0.0, 0.5);
        let mut want: f64 = 0.0;
        let mut n = 16u64;
        while n <= 1 << 12 {
            let v = (z * (1.0 - z.powu(n as u32)) / (1.0 - z)).norm() * x0_norm;
            want = want.max(v);
            n *= 2;
        }
        assert!(
            ((r.sup - want) / want).abs() <= 1e-12,
            "sup {} want {want}",
            r.sup
        );
        // The limiting norm is ||X_0|| / sqrt(5).
        assert!((r.sup / x0_norm - 0.4472135954999579).abs() <= 1e-9);
        assert_eq!(r.verdict, Verdict::Converges);

        // The truncated-filter route agrees with its own closed form
        // (per-lag geometric sums) and sits close to the exact chain.
        let spec = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let lr = rootzen_condition(&spec, t, 1 << 12).unwrap();
        let j = spec.order();
        let mut lin_want: f64 = 0.0;
        let mut n = 16u64;
        while n <= 1 << 12 {
            let mut total = 0.0;
            for l in 1..=j {
                let cap = (n as usize).min(j + 1 - l) as u32;
                let geo = z * (1.0 - z.powu(cap)) / (1.0 - z);
                total += (0.5f64.powi(l as i32 - 1) * geo.norm()).powi(2);
            }
            lin_want = lin_want.max(total.sqrt());
            n *= 2;
        }
        assert!(((lr.sup - lin_want) / lin_want).abs() <= 1e-10, "sup {}", lr.sup);
        assert!((lr.sup - r.sup).abs() <= 1e-3 * r.sup);
    }

    #[test]
    fn rootzen_metropolis_poisson_bound() {
        // For X_k = h(xi_k) with h = g - e^{it} T g the telescoping gives
        // ||E_0 S_n(t)|| <= 2 ||g||; here we check the plain observable
        // g(x) = x stays uniformly bounded (reversible chain).
        let spec = MetropolisSpec {
            p: crate::processes::AcceptFn::Const { p: 0.5 },
            nu: BaseDist::Uniform { a: -1.0, b: 1.0 },
            observable: ScalarFn::Identity,
            burn_in: 100,
        };
        let r = rootzen_condition_markov(
            &spec,
            ScalarFn::Identity,
            Frequency::rational_pi(1, 2).unwrap(),
            1 << 9,
            E0Budget {
                outer: 400,
                futures: 32,
            },
            seed(),
        )
        .unwrap();
        // ||g||_mu = sqrt(1/3); the sup must stay below 2 ||g||.
        assert!(r.sup <= 2.0 / 3f64.sqrt(), "sup {}", r.sup);
        assert_eq!(r.verdict, Verdict::Converges);
    }
}
