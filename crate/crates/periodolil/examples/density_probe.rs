use periodolil::diagnostics::{invariant_density, TransferOperator};

fn slope(h: &periodolil::diagnostics::GridFunction, lo: f64, hi: f64) -> f64 {
    let m = h.grid_size();
    let pts: Vec<(f64, f64)> = (0..m)
        .filter(|&i| {
            let x = h.midpoint(i);
            (lo..hi).contains(&x)
        })
        .map(|i| (h.midpoint(i).ln(), h.values()[i].ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>()
}

fn main() {
    for gamma in [0.25f64, 0.5] {
        for m in [1usize << 14, 1 << 16] {
            let op = TransferOperator::new(gamma, m).unwrap();
            for iters in [200usize, 1000, 5000, 20000] {
                let h = invariant_density(&op, iters, 0.0).unwrap();
                println!(
                    "gamma={gamma} m={m} iters={iters}: slope[1e-4,1e-2]={:.4} slope[1e-3,1e-1]={:.4} h(first)={:.3}",
                    slope(&h, 1e-4, 1e-2),
                    slope(&h, 1e-3, 1e-1),
                    h.values()[0]
                );
            }
        }
    }
}
