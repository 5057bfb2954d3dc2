//! Markov chains driven by the intermittent interval map
//! `T_gamma(x) = x (1 + (2x)^gamma)` on `[0, 1/2)`, `2x - 1` on `[1/2, 1]`.
//!
//! The chain with transition kernel `L_gamma` (the Perron–Frobenius
//! operator of `T_gamma` with respect to its invariant measure `nu_gamma`)
//! is realized by reversing a stationary forward orbit: for a stationary
//! window the reversed orbit has exactly the law of the `L_gamma`-chain, so
//! the generator never needs the invariant density.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{centering_prepass_len, ProcessSpec, ScalarFn, TimeSeriesWindow};
use crate::core::{SeedSpec, StreamRole};
use crate::error::{Error, Result};

/// Parameters of the intermittent-map chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntermittentSpec {
    /// Neutral-fixed-point exponent, in `(0, 1)`.
    pub gamma: f64,
    /// Orbit length discarded to whiten the uniform start; `>= 10^4`
    /// recommended (mixing is only polynomial).
    pub burn_in: usize,
    pub observable: ScalarFn,
}

impl IntermittentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Argument(format!(
                "intermittent gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// One application of `T_gamma`. Note `x (1 + 2^gamma x^gamma)
/// = x (1 + (2x)^gamma)`.
pub fn intermittent_map(gamma: f64, x: f64) -> f64 {
    if x < 0.5 {
        x * (1.0 + (2.0 * x).powf(gamma))
    } else {
        2.0 * x - 1.0
    }
}

fn forward_orbit(gamma: f64, burn_in: usize, n: usize, seed: SeedSpec) -> Vec<f64> {
    let mut rng = seed.rng();
    let mut x: f64 = rng.random();
    for _ in 0..burn_in {
        x = intermittent_map(gamma, x);
    }
    let mut orbit = Vec::with_capacity(n);
    for _ in 0..n {
        orbit.push(x);
        x = intermittent_map(gamma, x);
    }
    orbit
}

/// Simulate the forward orbit from a burn-in-whitened start and return the
/// reversed window of centered observable values.
pub fn gen_intermittent(
    spec: &IntermittentSpec,
    seed: SeedSpec,
    n: usize,
) -> Result<TimeSeriesWindow> {
    spec.validate()?;
    // nu_gamma(f) estimated by a Birkhoff average over an independent orbit.
    let prepass = centering_prepass_len(n);
    let pre = forward_orbit(
        spec.gamma,
        spec.burn_in,
        prepass,
        seed.with_role(StreamRole::Centering),
    );
    let mean = pre.iter().map(|&x| spec.observable.eval(x)).sum::<f64>() / prepass as f64;

    let orbit = forward_orbit(spec.gamma, spec.burn_in, n, seed);
    let values = orbit
        .iter()
        .rev()
        .map(|&x| spec.observable.eval(x) - mean)
        .collect();
    Ok(TimeSeriesWindow {
        values,
        innovations: None,
        spec: ProcessSpec::Intermittent(*spec),
        seed,
        centering: mean,
        truncation: None,
    })
}
