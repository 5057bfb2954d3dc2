//! Spectral densities: analytic evaluation for linear filters, Fejér
//! (Cesàro) reconstruction from autocovariances, smoothed-periodogram
//! estimation, and the per-frequency limit `sigma_t^2 = lim E|S_n(t)|^2/n`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::Frequency;
use crate::error::{Error, Result};
use crate::processes::{generate, LinearSpec, ProcessSpec};
use crate::transform::{dft_grid, periodogram};

/// Where a density evaluation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    AnalyticLinear,
    FejerFromAutocov,
    SmoothedPeriodogram,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::AnalyticLinear => "analytic_linear",
            Provenance::FejerFromAutocov => "fejer_from_autocov",
            Provenance::SmoothedPeriodogram => "smoothed_periodogram",
        }
    }
}

/// Autocovariances `c_0 .. c_Jmax` (symmetric extension implied).
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovSeq {
    c: Vec<f64>,
}

impl AutocovSeq {
    /// Validates `c_0 >= |c_j|` and positive semidefiniteness of the
    /// leading Toeplitz sections up to 8x8.
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Argument("empty autocovariance sequence".into()));
        }
        let c0 = c[0];
        if c.iter().any(|&x| !x.is_finite() || x.abs() > c0 * (1.0 + 1e-12)) {
            return Err(Error::Data("autocovariance with |c_j| > c_0".into()));
        }
        for k in 2..=8.min(c.len()) {
            if !toeplitz_psd(&c[..k]) {
                return Err(Error::Data(format!(
                    "Toeplitz section {k}x{k} is not positive semidefinite"
                )));
            }
        }
        Ok(AutocovSeq { c })
    }

    /// `c_j = sigma^2 sum_i a_i a_{i+j}` of a finite linear filter.
    pub fn from_linear(spec: &LinearSpec) -> Result<Self> {
        let sigma2 = spec
            .innovation
            .variance()
            .ok_or_else(|| Error::Domain("innovation variance does not exist".into()))?;
        let a = &spec.coeffs;
        let c = (0..a.len())
            .map(|j| {
                sigma2
                    * a[..a.len() - j]
                        .iter()
                        .zip(&a[j..])
                        .map(|(x, y)| x * y)
                        .sum::<f64>()
            })
            .collect();
        AutocovSeq::new(c)
    }

    /// AR(1) autocovariances `c_j = rho^j / (1 - rho^2)` (unit innovation
    /// variance), out to lag `j_max`.
    pub fn ar1(rho: f64, j_max: usize) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::Argument(format!("AR(1) needs |rho| < 1, got {rho}")));
        }
        let v = 1.0 / (1.0 - rho * rho);
        AutocovSeq::new((0..=j_max).map(|j| v * rho.powi(j as i32)).collect())
    }

    pub fn max_lag(&self) -> usize {
        self.c.len() - 1
    }

    /// `c_j`, with the implicit zero extension beyond the stored lags.
    pub fn at(&self, j: usize) -> f64 {
        self.c.get(j).copied().unwrap_or(0.0)
    }

    /// Autocovariances `b_n = 2 c_n - c_{n+1} - c_{n-1}` of the differenced
    /// series `Z_n = X_n - X_{n-1}` (one lag shorter).
    pub fn differenced(&self) -> Result<Self> {
        if self.c.len() < 2 {
            return Err(Error::Argument("need at least lag 1 to difference".into()));
        }
        let b = (0..self.c.len() - 1)
            .map(|n| {
                let prev = if n == 0 { self.c[1] } else { self.c[n - 1] };
                2.0 * self.c[n] - self.at(n + 1) - prev
            })
            .collect();
        // PSD by construction (spectral gain |1 - e^{it}|^2 >= 0).
        Ok(AutocovSeq { c: b })
    }
}

/// Cholesky-based positive semidefiniteness test of the Toeplitz matrix
/// built from `c`, with a small relative tolerance.
fn toeplitz_psd(c: &[f64]) -> bool {
    let k = c.len();
    let tol = 1e-10 * c[0].max(1e-300);
    let mut m = vec![0.0f64; k * k];
    for i in 0..k {
        for j in 0..k {
            m[i * k + j] = c[i.abs_diff(j)];
        }
    }
    // In-place Cholesky; a pivot below -tol certifies indefiniteness.
    for i in 0..k {
        let mut d = m[i * k + i];
        for p in 0..i {
            d -= m[i * k + p] * m[i * k + p];
        }
        if d < -tol {
            return false;
        }
        let d = d.max(0.0).sqrt();
        m[i * k + i] = d;
        for j in i + 1..k {
            let mut v = m[j * k + i];
            for p in 0..i {
                v -= m[j * k + p] * m[i * k + p];
            }
            m[j * k + i] = if d > 0.0 { v / d } else { 0.0 };
        }
    }
    true
}

/// Closed-form AR(1) spectral density
/// `f(t) = sigma^2 / (2 pi |1 - rho e^{it}|^2)` of the untruncated chain;
/// the oracle for truncated geometric filters.
pub fn ar1_density(rho: f64, sigma2: f64, t: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Argument(format!("AR(1) needs |rho| < 1, got {rho}")));
    }
    let gain = num_complex::Complex64::new(1.0 - rho * t.cos(), -rho * t.sin()).norm_sqr();
    Ok(sigma2 / (2.0 * PI * gain))
}

/// Analytic spectral density of a linear filter:
/// `f(t) = sigma^2 |sum_j a_j e^{ijt}|^2 / (2 pi)`.
pub fn linear_density(spec: &LinearSpec, t: f64) -> Result<f64> {
    let sigma2 = spec
        .innovation
        .variance()
        .ok_or_else(|| Error::Domain("innovation variance does not exist".into()))?;
    Ok(sigma2 * spec.transfer_at(t).norm_sqr() / (2.0 * PI))
}

/// Cesàro (Fejér) mean of order `m` of the partial Fourier sums of
/// `(1/2pi) sum_j c_j e^{-ijt}`:
/// `(1/2pi) [c_0 + 2 sum_{j=1}^m (1 - j/(m+1)) c_j cos(jt)]`.
pub fn fejer_density(c: &AutocovSeq, t: f64, m: usize) -> Result<f64> {
    if m > c.max_lag() {
        return Err(Error::Argument(format!(
            "Fejér order {m} exceeds available lags {}",
            c.max_lag()
        )));
    }
    let mut acc = c.at(0);
    for j in 1..=m {
        let w = 1.0 - j as f64 / (m as f64 + 1.0);
        acc += 2.0 * w * c.at(j) * (j as f64 * t).cos();
    }
    Ok(acc / (2.0 * PI))
}

/// Daniell-smoothed periodogram: the average of `I_n` over the `2m+1`
/// Fourier frequencies nearest `t`, excluding `j = 0`.
///
/// Frequencies within `m` grid steps of `0 (mod 2pi)` are rejected: the
/// estimate there is contaminated by the sample mean.
pub fn smoothed_periodogram(window: &[f64], t: f64, m: usize) -> Result<f64> {
    let n = window.len();
    if m < 1 || 4 * m > n {
        return Err(Error::Argument(format!(
            "half-width must satisfy 1 <= m <= n/4, got m={m}, n={n}"
        )));
    }
    let j_center = ((t * n as f64 / (2.0 * PI)).round() as i64).rem_euclid(n as i64);
    let dist_to_zero = j_center.min(n as i64 - j_center);
    if dist_to_zero <= m as i64 {
        return Err(Error::Estimator(format!(
            "frequency t={t} is within {m} grid steps of 0 (mod 2pi)"
        )));
    }
    let grid = dft_grid(window)?;
    let mut acc = 0.0;
    for dj in -(m as i64)..=m as i64 {
        let j = (j_center + dj).rem_euclid(n as i64) as usize;
        acc += periodogram(grid[j], n as u64)?;
    }
    Ok(acc / (2 * m + 1) as f64)
}

/// Default Daniell bandwidth `m = floor(n^0.4)`.
pub fn default_bandwidth(n: usize) -> usize {
    ((n as f64).powf(0.4) as usize).max(1)
}

/// Monte Carlo estimate of `sigma_t^2 = lim E|S_n(t)|^2 / n` with its
/// standard error.
///
/// `sigma_t^2` is reported with its SE always; for processes outside the
/// linear family this is a per-frequency limit and no density is claimed.
pub fn sigma_t_estimate(
    spec: &ProcessSpec,
    t: Frequency,
    n: usize,
    replicates: usize,
    master_seed: u64,
) -> Result<(f64, f64)> {
    if replicates < 30 {
        return Err(Error::Argument(format!(
            "need at least 30 replicates for a standard error, got {replicates}"
        )));
    }
    let values = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let w = generate(spec, master_seed, r, n)?;
            let s = crate::transform::dft(&w.values, t)?;
            Ok(s.norm_sqr() / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / replicates as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (replicates as f64 - 1.0);
    Ok((mean, (var / replicates as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::InnovationDist;
    use num_complex::Complex64;

    fn gaussian() -> InnovationDist {
        InnovationDist::standard_gaussian()
    }

    #[test]
    fn white_noise_density_is_flat() {
        let spec = LinearSpec::new(vec![1.0], gaussian()).unwrap();
        for t in [0.0, 0.5, PI, 5.0] {
            let f = linear_density(&spec, t).unwrap();
            assert!((f - 1.0 / (2.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn ar1_density_at_pi_matches_closed_form() {
        // (1/2pi) / |1 + 0.5|^2 = (4/9)/(2pi); frozen from a 30-digit
        // evaluation.
        let want = 0.070735530263064594;
        let exact = ar1_density(0.5, 1.0, PI).unwrap();
        assert!(((exact - want) / want).abs() <= 1e-14, "exact = {exact}");
        // The truncated geometric filter agrees up to its l1 coefficient
        // tail, about rho^{J+1} / (1 - rho) relatively.
        let spec = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let f = linear_density(&spec, PI).unwrap();
        let tail = 0.5f64.powi(spec.order() as i32 + 1) / 0.5;
        assert!(((f - want) / want).abs() <= 4.0 * tail, "f = {f}");
    }

    #[test]
    fn long_memory_density_diverges_near_zero() {
        let spec = LinearSpec::power_law(0.75, 100_000, gaussian()).unwrap();
        let near0 = linear_density(&spec, 1e-3).unwrap();
        let mid = linear_density(&spec, PI / 2.0).unwrap();
        assert!(near0 > 10.0 * mid, "f(1e-3) = {near0}, f(pi/2) = {mid}");
    }

    #[test]
    fn density_symmetry_and_nonnegativity() {
        let spec = LinearSpec::new(vec![1.0, -0.8, 0.3], gaussian()).unwrap();
        let c = AutocovSeq::from_linear(&spec).unwrap();
        for t in [0.3, 1.1, 2.9] {
            let f = linear_density(&spec, t).unwrap();
            assert!(f >= -1e-12);
            let fr = linear_density(&spec, 2.0 * PI - t).unwrap();
            assert!((f - fr).abs() <= 1e-9 * f.max(1.0));
            let g = fejer_density(&c, t, 2).unwrap();
            let gr = fejer_density(&c, 2.0 * PI - t, 2).unwrap();
            assert!((g - gr).abs() <= 1e-9 * g.abs().max(1.0));
        }
    }

    #[test]
    fn analytic_integral_matches_variance() {
        // Trapezoid with 2^12 nodes of f over [0, 2pi] equals sigma^2 sum a_j^2.
        let spec = LinearSpec::new(vec![1.0, 0.5, 0.25], gaussian()).unwrap();
        let nodes = 1 << 12;
        let h = 2.0 * PI / nodes as f64;
        // Periodic integrand: the trapezoid rule reduces to a uniform sum.
        let integral: f64 = (0..nodes)
            .map(|i| linear_density(&spec, i as f64 * h).unwrap())
            .sum::<f64>()
            * h;
        let want = spec.l2_mass();
        assert!(((integral - want) / want).abs() <= 1e-6);
    }

    #[test]
    fn fejer_constant_sequence() {
        let c = AutocovSeq::new(vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        for t in [0.0, 1.0, PI] {
            for m in [0usize, 1, 3] {
                let f = fejer_density(&c, t, m).unwrap();
                assert!((f - 2.0 / (2.0 * PI)).abs() < 1e-15);
            }
        }
        assert!(fejer_density(&c, 1.0, 4).is_err());
    }

    #[test]
    fn fejer_matches_analytic_on_ar1() {
        let spec = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let c = AutocovSeq::ar1(0.5, 600).unwrap();
        let f = fejer_density(&c, PI, 512).unwrap();
        let want = linear_density(&spec, PI).unwrap();
        assert!((f - want).abs() <= 1e-3, "fejer {f} vs analytic {want}");
    }

    #[test]
    fn fejer_differenced_series_identity() {
        // b_n = 2c_n - c_{n+1} - c_{n-1} reconstructs |1-e^{it}|^2 f(t).
        let c = AutocovSeq::ar1(0.5, 600).unwrap();
        let b = c.differenced().unwrap();
        for t in [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0] {
            let lhs = fejer_density(&b, t, 512).unwrap();
            let gain = (1.0 - Complex64::new(t.cos(), t.sin())).norm_sqr();
            let rhs = gain * fejer_density(&c, t, 512).unwrap();
            assert!((lhs - rhs).abs() <= 1e-3, "t={t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn smoothed_periodogram_zero_window() {
        let w = vec![0.0; 4096];
        let f = smoothed_periodogram(&w, PI / 2.0, 16).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn smoothed_periodogram_rejects_frequencies_near_zero() {
        let w = vec![1.0; 4096];
        assert!(smoothed_periodogram(&w, 0.0, 16).is_err());
        assert!(smoothed_periodogram(&w, 2.0 * PI - 1e-4, 16).is_err());
        assert!(smoothed_periodogram(&w, PI / 2.0, 2000).is_err());
    }

    #[test]
    fn smoothed_periodogram_white_noise_level() {
        let spec = ProcessSpec::Iid {
            innovation: gaussian(),
        };
        let n = 1 << 14;
        let w = generate(&spec, 51, 0, n).unwrap();
        let m = 32;
        let f = smoothed_periodogram(&w.values, PI / 2.0, m).unwrap();
        let want = 1.0 / (2.0 * PI);
        // I_n at distinct Fourier frequencies are near-independent Exp(f),
        // so the smoothed estimate has SE about f / sqrt(2m+1).
        let se = want / ((2 * m + 1) as f64).sqrt();
        assert!((f - want).abs() <= 4.0 * se, "estimate {f}");
    }

    #[test]
    fn smoothed_periodogram_ar1_level() {
        let lin = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let want = linear_density(&lin, PI).unwrap();
        let n = 1 << 16;
        let m = 64;
        let w = generate(&ProcessSpec::Linear(lin), 52, 0, n).unwrap();
        let f = smoothed_periodogram(&w.values, PI, m).unwrap();
        let se = want / ((2 * m + 1) as f64).sqrt();
        assert!((f - want).abs() <= 4.0 * se, "estimate {f} want {want}");
    }

    #[test]
    fn sigma_t_iid_is_unit() {
        let spec = ProcessSpec::Iid {
            innovation: gaussian(),
        };
        let t = Frequency::radians(1.1).unwrap();
        let (est, se) = sigma_t_estimate(&spec, t, 1 << 10, 200, 53).unwrap();
        assert!((est - 1.0).abs() <= 3.0 * se, "sigma_t {est} +- {se}");
        assert!(sigma_t_estimate(&spec, t, 64, 10, 53).is_err());
    }

    #[test]
    fn sigma_t_matches_linear_density() {
        let lin = LinearSpec::geometric(0.5, gaussian()).unwrap();
        let t = Frequency::rational_pi(1, 2).unwrap();
        let want = 2.0 * PI * linear_density(&lin, t.value()).unwrap();
        let (est, se) = sigma_t_estimate(&ProcessSpec::Linear(lin), t, 1 << 11, 300, 54).unwrap();
        assert!((est - want).abs() <= 4.0 * se, "sigma_t {est} want {want}");
    }

    #[test]
    fn sigma_t_stable_for_metropolis() {
        use crate::processes::{AcceptFn, BaseDist, MetropolisSpec, ScalarFn};
        let spec = ProcessSpec::Metropolis(MetropolisSpec {
            p: AcceptFn::Const { p: 0.5 },
            nu: BaseDist::Uniform { a: -1.0, b: 1.0 },
            observable: ScalarFn::Identity,
            burn_in: 200,
        });
        let t = Frequency::rational_pi(1, 2).unwrap();
        let mut prev: Option<f64> = None;
        for n in [1usize << 12, 1 << 14, 1 << 16] {
            let (est, _) = sigma_t_estimate(&spec, t, n, 60, 55).unwrap();
            if let Some(p) = prev {
                let ratio = est / p;
                assert!((0.8..=1.25).contains(&ratio), "ratio {ratio} at n={n}");
            }
            prev = Some(est);
        }
    }

    #[test]
    fn autocov_validation() {
        assert!(AutocovSeq::new(vec![1.0, 2.0]).is_err());
        assert!(AutocovSeq::new(vec![1.0, 0.9, 0.5]).is_ok());
        assert!(AutocovSeq::ar1(0.99, 10).is_ok());
        // Indefinite: corr(X0, X2) too small given corr(X0, X1) = 0.9.
        assert!(AutocovSeq::new(vec![1.0, 0.9, 0.4]).is_err());
    }
}
