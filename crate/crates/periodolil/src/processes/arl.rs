//! Autoregressive Lipschitz model `Y_n = h(Y_{n-1}) + eps_n` with the
//! canonical drift from the class `L(C, delta)`.

use serde::{Deserialize, Serialize};

use super::{centering_prepass_len, InnovationDist, ProcessSpec, TimeSeriesWindow};
use crate::core::{SeedSpec, StreamRole};
use crate::error::{Error, Result};

/// Parameters of the ARL chain. The drift is fixed to the canonical member
/// `h(t) = int_0^t (1 - C (1+|s|)^{-delta}) ds` of `L(C, delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArlSpec {
    /// `C` in `(0, 1]`.
    pub c: f64,
    /// `delta` in `[0, 1)`.
    pub delta: f64,
    pub innovation: InnovationDist,
    pub burn_in: usize,
}

impl ArlSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::Argument(format!("ARL C must lie in (0, 1], got {}", self.c)));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::Argument(format!(
                "ARL delta must lie in [0, 1), got {}",
                self.delta
            )));
        }
        self.innovation.validate()
    }
}

/// The canonical drift, evaluated in closed form:
/// `h(t) = sign(t) (|t| - C ((1+|t|)^{1-delta} - 1) / (1-delta))`.
///
/// It is odd, has `h(0) = 0` and `|h'(t)| = 1 - C (1+|t|)^{-delta}` exactly.
pub fn canonical_drift(c: f64, delta: f64, t: f64) -> f64 {
    let a = t.abs();
    let integral = if delta == 0.0 {
        a
    } else {
        ((1.0 + a).powf(1.0 - delta) - 1.0) / (1.0 - delta)
    };
    t.signum() * (a - c * integral)
}

fn iterate(spec: &ArlSpec, seed: SeedSpec, n: usize, skip: usize) -> Result<Vec<f64>> {
    let mut rng = seed.rng();
    let mut y = 0.0f64;
    let mut out = Vec::with_capacity(n);
    for step in 0..skip + n {
        y = canonical_drift(spec.c, spec.delta, y) + spec.innovation.sample(&mut rng);
        if !y.is_finite() {
            return Err(Error::Generation(format!(
                "ARL iteration overflowed at step {step}"
            )));
        }
        if step >= skip {
            out.push(y);
        }
    }
    Ok(out)
}

/// Iterate from `Y_0 = 0`, discard `burn_in` samples, return the centered
/// `Y` window; observables are applied downstream.
pub fn gen_arl(spec: &ArlSpec, seed: SeedSpec, n: usize) -> Result<TimeSeriesWindow> {
    spec.validate()?;
    // The invariant law is symmetric for symmetric innovations, so the mean
    // is 0; still estimate it on an independent stream and record it.
    let prepass = centering_prepass_len(n);
    let pre = iterate(spec, seed.with_role(StreamRole::Centering), prepass, spec.burn_in)?;
    let mean = pre.iter().sum::<f64>() / prepass as f64;

    let raw = iterate(spec, seed, n, spec.burn_in)?;
    Ok(TimeSeriesWindow {
        values: raw.iter().map(|y| y - mean).collect(),
        innovations: None,
        spec: ProcessSpec::Arl(*spec),
        seed,
        centering: mean,
        truncation: None,
    })
}
