//! Perron–Frobenius machinery for the intermittent map: the Lebesgue
//! transfer operator on a uniform grid, its fixed-point (invariant)
//! density, the nu-weighted kernel of the associated Markov chain, and the
//! alpha-dependence coefficients computed from kernel iterates.

use crate::error::{Error, Result};
#[cfg(test)]
use crate::processes::intermittent_map;

/// Piecewise-constant function on the midpoints of `m` uniform subintervals
/// of `[0, 1]`; integration is by the midpoint rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    m: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Argument("grid needs at least 2 cells".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite grid value".into()));
        }
        Ok(GridFunction {
            m: values.len(),
            values,
        })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values((0..m).map(|i| f((i as f64 + 0.5) / m as f64)).collect())
    }

    pub fn constant(m: usize, c: f64) -> Result<Self> {
        Self::from_values(vec![c; m])
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.m as f64
    }

    /// Cell lookup (piecewise-constant evaluation).
    pub fn eval(&self, x: f64) -> f64 {
        let i = ((x * self.m as f64) as usize).min(self.m - 1);
        self.values[i]
    }

    /// Midpoint-rule integral over `[0, 1]`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.m as f64
    }
}

/// Invert the left branch `y (1 + (2y)^gamma) = x` on `[0, 1/2)` by
/// bisection followed by Newton, to absolute tolerance `1e-14`.
pub fn invert_left_branch(gamma: f64, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Argument(format!("left-branch inverse needs x in [0, 1), got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let f = |y: f64| y * (1.0 + (2.0 * y).powf(gamma)) - x;
    let fp = |y: f64| 1.0 + (1.0 + gamma) * (2.0 * y).powf(gamma);
    let (mut lo, mut hi) = (0.0f64, 0.5f64.min(x));
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..20 {
        let step = f(y) / fp(y);
        y -= step;
        y = y.clamp(0.0, 0.5);
        if step.abs() <= 1e-14 {
            return Ok(y);
        }
    }
    Err(Error::Numeric(format!(
        "Newton did not converge for left-branch inverse at x={x}"
    )))
}

/// The Lebesgue transfer operator of `T_gamma`,
/// `(Lf)(x) = f(y_l)/T'(y_l) + f(y_r)/2` with `y_r = (x+1)/2` and `y_l`
/// the left-branch inverse, discretized in cell-averaged (Ulam) form: the
/// average of `Lf` over a grid cell equals the integral of `f` over the
/// cell's two preimage intervals, whose endpoints are precomputed with the
/// Newton inverse. Cell averaging resolves the sub-cell drift near the
/// neutral fixed point, where the pointwise escape `y_l(x) - x ~ x^{1+gamma}`
/// is far smaller than a cell.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    gamma: f64,
    m: usize,
    /// `y_l(e/m)` for `e = 0..=m`.
    left_edges: Vec<f64>,
}

impl TransferOperator {
    /// `m >= 2^10` is required; coarser grids make the neutral-fixed-point
    /// region unresolvable.
    pub fn new(gamma: f64, m: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Argument(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if m < 1 << 10 {
            return Err(Error::Argument(format!("grid size must be >= 2^10, got {m}")));
        }
        let mut left_edges = Vec::with_capacity(m + 1);
        for e in 0..m {
            left_edges.push(invert_left_branch(gamma, e as f64 / m as f64)?);
        }
        left_edges.push(0.5);
        Ok(TransferOperator {
            gamma,
            m,
            left_edges,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    /// One application of the (Lebesgue) transfer operator.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.grid_size() != self.m {
            return Err(Error::Argument(format!(
                "grid mismatch: operator {} vs function {}",
                self.m,
                f.grid_size()
            )));
        }
        let m = self.m;
        let v = f.values();
        let out = (0..m)
            .map(|i| {
                let left = integrate_cells(v, self.left_edges[i], self.left_edges[i + 1]);
                let r_lo = (i as f64 / m as f64 + 1.0) / 2.0;
                let r_hi = ((i + 1) as f64 / m as f64 + 1.0) / 2.0;
                (left + integrate_cells(v, r_lo, r_hi)) * m as f64
            })
            .collect();
        GridFunction::from_values(out)
    }
}

/// Integral of a piecewise-constant grid function over `[a, b]`,
/// `0 <= a <= b <= 1`.
fn integrate_cells(values: &[f64], a: f64, b: f64) -> f64 {
    let m = values.len();
    let scale = m as f64;
    let ja = ((a * scale) as usize).min(m - 1);
    let jb = ((b * scale) as usize).min(m - 1);
    if ja == jb {
        return values[ja] * (b - a);
    }
    let mut acc = values[ja] * ((ja + 1) as f64 / scale - a);
    for v in &values[ja + 1..jb] {
        acc += v / scale;
    }
    acc + values[jb] * (b - jb as f64 / scale)
}

/// Convenience form of [`TransferOperator::apply`] that builds the
/// operator for `gamma` on the grid of `f`.
pub fn transfer_operator_apply(gamma: f64, f: &GridFunction) -> Result<GridFunction> {
    TransferOperator::new(gamma, f.grid_size())?.apply(f)
}

/// Fixed point of the transfer operator by power iteration (normalized to
/// unit integral): the density of the invariant measure `nu_gamma`, which
/// blows up like `x^{-gamma}` near 0.
pub fn invariant_density(
    op: &TransferOperator,
    max_iter: usize,
    tol: f64,
) -> Result<GridFunction> {
    let mut h = GridFunction::constant(op.grid_size(), 1.0)?;
    for _ in 0..max_iter {
        let mut next = op.apply(&h)?;
        let mass = next.integral();
        for v in next.values.iter_mut() {
            *v /= mass;
        }
        let diff = h
            .values()
            .iter()
            .zip(next.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / op.grid_size() as f64;
        h = next;
        if diff <= tol {
            break;
        }
    }
    Ok(h)
}

/// A Markov kernel representable on the grid, with its stationary density.
pub trait GridMarkovKernel {
    fn grid_size(&self) -> usize;
    /// Stationary density with respect to Lebesgue measure on `[0, 1]`.
    fn density(&self) -> &GridFunction;
    /// One kernel application `f -> K f`.
    fn apply(&self, f: &GridFunction) -> Result<GridFunction>;
}

/// The `nu_gamma`-weighted kernel `K f = L(f h) / h` of the intermittent
/// chain, where `h` is the invariant density and `L` the Lebesgue transfer
/// operator; this is the operator satisfying
/// `nu(f . g o T) = nu(K(f) g)`.
pub struct NuKernel<'a> {
    pub op: &'a TransferOperator,
    pub density: &'a GridFunction,
}

impl GridMarkovKernel for NuKernel<'_> {
    fn grid_size(&self) -> usize {
        self.op.grid_size()
    }

    fn density(&self) -> &GridFunction {
        self.density
    }

    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let fh: Vec<f64> = f
            .values()
            .iter()
            .zip(self.density.values())
            .map(|(a, b)| a * b)
            .collect();
        let lfh = self.op.apply(&GridFunction::from_values(fh)?)?;
        GridFunction::from_values(
            lfh.values()
                .iter()
                .zip(self.density.values())
                .map(|(a, b)| a / b)
                .collect(),
        )
    }
}

/// The trivial iid kernel on `[0, 1]` with uniform stationary law:
/// `K f = integral of f`.
pub struct IidGridKernel {
    density: GridFunction,
}

impl IidGridKernel {
    pub fn new(m: usize) -> Result<Self> {
        Ok(IidGridKernel {
            density: GridFunction::constant(m, 1.0)?,
        })
    }
}

impl GridMarkovKernel for IidGridKernel {
    fn grid_size(&self) -> usize {
        self.density.grid_size()
    }

    fn density(&self) -> &GridFunction {
        &self.density
    }

    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        GridFunction::constant(self.grid_size(), f.integral())
    }
}

/// `alpha_Y(k) = sup_u || E(1_{Y_k <= u} | F_0) - F(u) ||_1`, computed as
/// the sup over a `u_points`-point grid of stationary-law quantiles of the
/// density-weighted L1 distance between `K^k 1_{[0,u]}` and its mean.
pub fn alpha_coefficients(
    kernel: &dyn GridMarkovKernel,
    ks: &[usize],
    u_points: usize,
) -> Result<Vec<f64>> {
    if ks.is_empty() || ks.windows(2).any(|w| w[1] <= w[0]) || ks[0] == 0 {
        return Err(Error::Argument(
            "k values must be strictly increasing and positive".into(),
        ));
    }
    if u_points < 8 {
        return Err(Error::Argument("need at least 8 quantile points".into()));
    }
    let m = kernel.grid_size();
    let h = kernel.density();
    let k_max = *ks.last().unwrap();

    // u-grid at quantiles of the stationary law.
    let mut cdf = Vec::with_capacity(m);
    let mut acc = 0.0;
    for &v in h.values() {
        acc += v / m as f64;
        cdf.push(acc);
    }
    let total = acc;
    let mut us = Vec::with_capacity(u_points);
    let mut cell = 0usize;
    for q in 0..u_points {
        let target = total * (q as f64 + 0.5) / u_points as f64;
        while cell + 1 < m && cdf[cell] < target {
            cell += 1;
        }
        let lo = if cell == 0 { 0.0 } else { cdf[cell - 1] };
        let dens = (cdf[cell] - lo).max(1e-300);
        let frac = ((target - lo) / dens).clamp(0.0, 1.0);
        us.push((cell as f64 + frac) / m as f64);
    }

    let mut alphas = vec![0.0f64; ks.len()];
    for &u in &us {
        // Indicator of [0, u] with a fractional boundary cell.
        let mut ind = vec![0.0f64; m];
        let edge = ((u * m as f64) as usize).min(m - 1);
        for v in ind.iter_mut().take(edge) {
            *v = 1.0;
        }
        ind[edge] = (u * m as f64 - edge as f64).clamp(0.0, 1.0);
        let mut g = GridFunction::from_values(ind)?;
        let c_u = g
            .values()
            .iter()
            .zip(h.values())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / m as f64
            / total;
        let mut pos = 0usize;
        for step in 1..=k_max {
            g = kernel.apply(&g)?;
            if pos < ks.len() && step == ks[pos] {
                let dist = g
                    .values()
                    .iter()
                    .zip(h.values())
                    .map(|(a, b)| (a - c_u).abs() * b)
                    .sum::<f64>()
                    / m as f64
                    / total;
                alphas[pos] = alphas[pos].max(dist);
                pos += 1;
            }
        }
    }
    Ok(alphas)
}

/// Single-coefficient convenience form.
pub fn alpha_coefficient(
    kernel: &dyn GridMarkovKernel,
    k: usize,
    u_points: usize,
) -> Result<f64> {
    Ok(alpha_coefficients(kernel, &[k], u_points)?[0])
}

/// Log-log least-squares slope of a grid function over midpoints in
/// `[lo, hi)`; used to read off power-law tails of densities.
pub fn loglog_slope(h: &GridFunction, lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = (0..h.grid_size())
        .filter(|&i| {
            let x = h.midpoint(i);
            (lo..hi).contains(&x) && h.values()[i] > 0.0
        })
        .map(|i| (h.midpoint(i).ln(), h.values()[i].ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Estimator(format!(
            "only {} usable grid points in [{lo}, {hi})",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    Ok(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>())
}

/// An alpha coefficient together with its half-resolution probe.
#[derive(Debug, Clone, Copy)]
pub struct AlphaEstimate {
    pub k: usize,
    pub value: f64,
    /// The same coefficient on a grid of half the size.
    pub coarse: f64,
    /// Set when refinement moved the value by more than 10%.
    pub inconclusive: bool,
}

/// Alpha coefficients of the intermittent chain at the requested lags,
/// with a half-resolution refinement probe.
pub fn alpha_intermittent(
    gamma: f64,
    ks: &[usize],
    m: usize,
    u_points: usize,
) -> Result<Vec<AlphaEstimate>> {
    let run = |m: usize| -> Result<Vec<f64>> {
        let op = TransferOperator::new(gamma, m)?;
        let h = invariant_density(&op, 4000, 1e-11)?;
        alpha_coefficients(
            &NuKernel {
                op: &op,
                density: &h,
            },
            ks,
            u_points,
        )
    };
    let fine = run(m)?;
    let coarse = run(m / 2)?;
    Ok(ks
        .iter()
        .zip(fine.iter().zip(coarse.iter()))
        .map(|(&k, (&value, &coarse))| AlphaEstimate {
            k,
            value,
            coarse,
            inconclusive: (value - coarse).abs() > 0.1 * value.abs().max(1e-12),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn left_branch_inverse_roundtrip() {
        for gamma in [0.1, 0.5, 0.9] {
            for x in [1e-9, 1e-4, 0.3, 0.7, 0.999] {
                let y = invert_left_branch(gamma, x).unwrap();
                assert!((0.0..0.5).contains(&y) || (y - 0.5).abs() < 1e-12);
                let fx = intermittent_map(gamma, y.min(0.5 - 1e-16));
                assert!((fx - x).abs() <= 1e-12, "gamma={gamma} x={x}: T({y}) = {fx}");
            }
        }
    }

    #[test]
    fn conservation_of_integral() {
        let m = 1 << 14;
        for gamma in [0.25, 0.5] {
            let op = TransferOperator::new(gamma, m).unwrap();
            for f in [
                GridFunction::constant(m, 1.0).unwrap(),
                GridFunction::from_fn(m, |x| x).unwrap(),
            ] {
                let lf = op.apply(&f).unwrap();
                let rel = (lf.integral() - f.integral()).abs() / f.integral();
                assert!(rel <= 1e-6, "gamma={gamma}: conservation error {rel}");
            }
        }
    }

    #[test]
    fn doubling_map_limit() {
        // gamma -> 0: the operator approaches the doubling-map operator,
        // whose invariant density is 1, so L1 is within 5e-3 of 1.
        let m = 1 << 14;
        let op = TransferOperator::new(1e-3, m).unwrap();
        let one = GridFunction::constant(m, 1.0).unwrap();
        let l1 = op.apply(&one).unwrap();
        for &v in l1.values() {
            assert!((v - 1.0).abs() <= 5e-3, "L1 = {v}");
        }
    }

    #[test]
    fn invariant_density_tail_exponent() {
        // h_nu(x) <= C x^{-gamma}: log-log slope of the fixed point on the
        // decade [1e-4, 1e-2] is within 0.1 of -gamma.
        let gamma = 0.5;
        let m = 1 << 14;
        let op = TransferOperator::new(gamma, m).unwrap();
        let h = invariant_density(&op, 2000, 1e-12).unwrap();
        let slope = crate::diagnostics::transfer::loglog_slope(&h, 1e-4, 1e-2).unwrap();
        assert!(
            (slope + gamma).abs() <= 0.1,
            "slope {slope}, expected about {}",
            -gamma
        );
    }

    #[test]
    fn duality_on_an_orbit() {
        // nu(f . g o T) = nu(K f . g) with K the nu-weighted kernel,
        // checked against the empirical measure of one long orbit.
        let gamma = 0.5;
        let m = 1 << 13;
        let op = TransferOperator::new(gamma, m).unwrap();
        let h = invariant_density(&op, 3000, 1e-11).unwrap();
        let kernel = NuKernel {
            op: &op,
            density: &h,
        };
        let f = GridFunction::from_fn(m, |x| x).unwrap();
        let kf = kernel.apply(&f).unwrap();
        let g = |x: f64| x * x;

        let mut rng = crate::core::SeedSpec::new(612, 0, crate::core::StreamRole::Innovations).rng();
        let mut x: f64 = rng.random();
        for _ in 0..10_000 {
            x = intermittent_map(gamma, x);
        }
        let n = 1 << 18;
        let mut diffs = Vec::with_capacity(n);
        for _ in 0..n {
            let tx = intermittent_map(gamma, x);
            diffs.push(x * g(tx) - kf.eval(x) * g(x));
            x = tx;
        }
        let mean = diffs.iter().sum::<f64>() / n as f64;
        // Block-means SE over 64 blocks (the orbit is dependent).
        let nb = 64;
        let bl = n / nb;
        let bm: Vec<f64> = (0..nb)
            .map(|b| diffs[b * bl..(b + 1) * bl].iter().sum::<f64>() / bl as f64)
            .collect();
        let bmean = bm.iter().sum::<f64>() / nb as f64;
        let se = (bm.iter().map(|v| (v - bmean) * (v - bmean)).sum::<f64>()
            / (nb as f64 - 1.0)
            / nb as f64)
            .sqrt();
        assert!(mean.abs() <= 4.0 * se, "duality defect {mean} vs se {se}");
    }

    #[test]
    fn alpha_iid_kernel_is_zero() {
        let kernel = IidGridKernel::new(1 << 10).unwrap();
        for k in [1usize, 2, 5] {
            assert_eq!(alpha_coefficient(&kernel, k, 64).unwrap(), 0.0);
        }
    }

    #[test]
    fn alpha_values_lie_in_unit_interval() {
        let gamma = 0.5;
        let op = TransferOperator::new(gamma, 1 << 10).unwrap();
        let h = invariant_density(&op, 1000, 1e-9).unwrap();
        let kernel = NuKernel {
            op: &op,
            density: &h,
        };
        let a = alpha_coefficients(&kernel, &[1, 2, 4], 64).unwrap();
        for v in a {
            assert!((0.0..=1.0).contains(&v), "alpha {v}");
        }
    }

    #[test]
    fn alpha_rejects_bad_lags() {
        let kernel = IidGridKernel::new(1 << 10).unwrap();
        assert!(alpha_coefficients(&kernel, &[], 64).is_err());
        assert!(alpha_coefficients(&kernel, &[2, 2], 64).is_err());
        assert!(alpha_coefficients(&kernel, &[0, 1], 64).is_err());
    }
}
