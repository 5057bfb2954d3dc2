//! Linear processes `X_k = sum_{j=0}^J a_j eps_{k-j}` and functions of
//! them, `X_k = h(sum a_i eps_{k-i}) - E h(...)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    centering_prepass_len, HolderData, InnovationDist, InnovationWindow, ProcessSpec, ScalarFn,
    TimeSeriesWindow,
};
use crate::core::{SeedSpec, StreamRole};
use crate::error::{Error, Result};

/// Relative l2 mass an infinite coefficient tail may lose to truncation.
const TRUNCATION_TAIL: f64 = 1e-8;

/// How a finite coefficient list was obtained from an infinite family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Last retained index `J`.
    pub order: usize,
    /// l2 mass of the discarded tail relative to the full sequence.
    pub tail_ratio: f64,
}

/// A finite-order causal linear filter of iid innovations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSpec {
    pub coeffs: Vec<f64>,
    pub innovation: InnovationDist,
    /// Present when the coefficients came from a truncated infinite family.
    pub truncation: Option<Truncation>,
}

impl LinearSpec {
    pub fn new(coeffs: Vec<f64>, innovation: InnovationDist) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Argument("empty coefficient list".into()));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::Argument("non-finite filter coefficient".into()));
        }
        Ok(LinearSpec {
            coeffs,
            innovation,
            truncation: None,
        })
    }

    /// The AR(1)-type family `a_j = rho^j`, truncated so the discarded
    /// l2-tail is below `1e-8` of the total mass.
    pub fn geometric(rho: f64, innovation: InnovationDist) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::Argument(format!("geometric family needs |rho| < 1, got {rho}")));
        }
        if rho == 0.0 {
            return Self::new(vec![1.0], innovation);
        }
        // Tail ratio after keeping a_0..a_J is rho^{2(J+1)}; pick minimal J.
        let order = ((TRUNCATION_TAIL.ln() / (2.0 * rho.abs().ln())).ceil() as usize).max(1) - 1;
        let coeffs: Vec<f64> = (0..=order).map(|j| rho.powi(j as i32)).collect();
        let tail_ratio = rho.abs().powi(2 * (order as i32 + 1));
        Ok(LinearSpec {
            coeffs,
            innovation,
            truncation: Some(Truncation { order, tail_ratio }),
        })
    }

    /// The long-memory family `a_j = j^{-p}` for `j >= 1` (`a_0 = 0`),
    /// truncated at an explicit order since the l2-tail decays slowly.
    pub fn power_law(p: f64, order: usize, innovation: InnovationDist) -> Result<Self> {
        if !(p > 0.5) {
            return Err(Error::Argument(format!(
                "power-law family needs p > 0.5 for square summability, got {p}"
            )));
        }
        if order < 1 {
            return Err(Error::Argument("power-law truncation order must be >= 1".into()));
        }
        let mut coeffs = vec![0.0];
        coeffs.extend((1..=order).map(|j| (j as f64).powf(-p)));
        let mass: f64 = coeffs.iter().map(|a| a * a).sum();
        // Integral bound on the discarded tail sum_{j>J} j^{-2p}.
        let tail = (order as f64).powf(1.0 - 2.0 * p) / (2.0 * p - 1.0);
        Ok(LinearSpec {
            coeffs,
            innovation,
            truncation: Some(Truncation {
                order,
                tail_ratio: tail / (mass + tail),
            }),
        })
    }

    /// Filter order `J` (last coefficient index).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `A(e^{it}) = sum_j a_j e^{ijt}`.
    pub fn transfer_at(&self, t: f64) -> Complex64 {
        let z = Complex64::new(t.cos(), t.sin());
        // Horner in z.
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    /// `sum_j a_j^2`, so `var(X_0) = sigma^2 * l2_mass`.
    pub fn l2_mass(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() {
            return Err(Error::Argument("empty coefficient list".into()));
        }
        self.innovation.validate()
    }
}

/// A scalar function of a linear process, with declared Hölder data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionOfLinearSpec {
    pub base: LinearSpec,
    pub h: ScalarFn,
    pub holder: HolderData,
}

impl FunctionOfLinearSpec {
    pub fn new(base: LinearSpec, h: ScalarFn) -> Self {
        let holder = h.holder();
        FunctionOfLinearSpec { base, h, holder }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()
    }
}

/// Draw `eps_{1-J} .. eps_n` and apply the filter; the innovation window is
/// retained so the martingale decomposition can be reconstructed exactly.
fn filter_values(spec: &LinearSpec, seed: SeedSpec, n: usize) -> (InnovationWindow, Vec<f64>) {
    let j_max = spec.order();
    let mut rng = seed.rng();
    let innovations: Vec<f64> = (0..n + j_max)
        .map(|_| spec.innovation.sample(&mut rng))
        .collect();
    let window = InnovationWindow {
        first_index: 1 - j_max as i64,
        values: innovations,
    };
    let values = (1..=n as i64)
        .map(|k| {
            spec.coeffs
                .iter()
                .enumerate()
                .map(|(j, &a)| a * window.at(k - j as i64))
                .sum()
        })
        .collect();
    (window, values)
}

pub fn gen_linear(spec: &LinearSpec, seed: SeedSpec, n: usize) -> Result<TimeSeriesWindow> {
    spec.validate()?;
    let (innovations, values) = filter_values(spec, seed, n);
    Ok(TimeSeriesWindow {
        values,
        innovations: Some(innovations),
        spec: ProcessSpec::Linear(spec.clone()),
        seed,
        // Centered innovations make the filter output centered already.
        centering: 0.0,
        truncation: spec.truncation,
    })
}

pub fn gen_function_of_linear(
    spec: &FunctionOfLinearSpec,
    seed: SeedSpec,
    n: usize,
) -> Result<TimeSeriesWindow> {
    spec.validate()?;
    // Pre-pass Monte Carlo estimate of E h(sum a_i eps_{-i}) on an
    // independent stream; exact expectations are not available in general.
    let prepass = centering_prepass_len(n);
    let (_, pre) = filter_values(&spec.base, seed.with_role(StreamRole::Centering), prepass);
    let mut mean = 0.0;
    for (k, &y) in pre.iter().enumerate() {
        let v = spec.h.eval(y);
        if !v.is_finite() {
            return Err(Error::Generation(format!(
                "observable returned non-finite value at centering index {k}"
            )));
        }
        mean += v;
    }
    mean /= prepass as f64;

    let (innovations, interior) = filter_values(&spec.base, seed, n);
    let mut values = Vec::with_capacity(n);
    for (k, &y) in interior.iter().enumerate() {
        let v = spec.h.eval(y);
        if !v.is_finite() {
            return Err(Error::Generation(format!(
                "observable returned non-finite value at index {}",
                k + 1
            )));
        }
        values.push(v - mean);
    }
    Ok(TimeSeriesWindow {
        values,
        innovations: Some(innovations),
        spec: ProcessSpec::FunctionOfLinear(spec.clone()),
        seed,
        centering: mean,
        truncation: spec.base.truncation,
    })
}

/// Recompute the values of a linear window from its stored innovations.
/// Equality with `window.values` is exact (same arithmetic path).
pub fn reconstruct_linear(window: &TimeSeriesWindow) -> Result<Vec<f64>> {
    let inn = window
        .innovations
        .as_ref()
        .ok_or_else(|| Error::Argument("window stores no innovations".into()))?;
    let identity;
    let spec = match &window.spec {
        ProcessSpec::Linear(s) => s,
        ProcessSpec::Iid { innovation } => {
            identity = LinearSpec::new(vec![1.0], *innovation)?;
            &identity
        }
        other => return Err(Error::Argument(format!("not a linear window: {other:?}"))),
    };
    Ok((1..=window.len() as i64)
        .map(|k| {
            spec.coeffs
                .iter()
                .enumerate()
                .map(|(j, &a)| a * inn.at(k - j as i64))
                .sum()
        })
        .collect())
}

/// Spot-check the declared Hölder modulus on `pairs` random pairs in
/// `[-m, m]`: `|h(x) - h(y)| <= C |x-y|^gamma m^alpha + 1e-9`.
pub fn holder_spot_check(
    spec: &FunctionOfLinearSpec,
    m: f64,
    pairs: usize,
    seed: SeedSpec,
) -> Result<()> {
    use rand::Rng;
    let mut rng = seed.rng();
    let HolderData { gamma, alpha, c } = spec.holder;
    for _ in 0..pairs {
        let x = m * (2.0 * rng.random::<f64>() - 1.0);
        let y = m * (2.0 * rng.random::<f64>() - 1.0);
        let lhs = (spec.h.eval(x) - spec.h.eval(y)).abs();
        let rhs = c * (x - y).abs().powf(gamma) * m.powf(alpha) + 1e-9;
        if lhs > rhs {
            return Err(Error::Data(format!(
                "Hölder bound violated at ({x}, {y}): {lhs} > {rhs}"
            )));
        }
    }
    Ok(())
}
