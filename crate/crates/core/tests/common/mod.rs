#![allow(dead_code)]

use evmix::mixture::{RandomEffectsSpec, HiddenMaSpec, ExtremeModel};

/// Mixed partial `∂ⁿF/∂x_1…∂x_n` by nested central differences, Richardson
/// extrapolated once.
pub fn mixed_partial<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> f64 {
    let raw = |h: f64| {
        let n = x.len();
        let mut acc = 0.0;
        let mut point = x.to_vec();
        for mask in 0..(1u32 << n) {
            let mut sign = 1.0;
            for (i, p) in point.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    *p = x[i] + h;
                } else {
                    *p = x[i] - h;
                    sign = -sign;
                }
            }
            acc += sign * f(&point);
        }
        acc / (2.0 * h).powi(n as i32)
    };
    (4.0 * raw(0.5 * h) - raw(h)) / 3.0
}

/// Difference step for an order-`n` oracle: higher orders lose more digits
/// to cancellation, so they need a wider stencil.
pub fn oracle_step(n: usize) -> f64 {
    if n <= 2 {
        1e-3
    } else {
        1e-2
    }
}

pub fn re_density_oracle(alpha: f64, x: &[f64]) -> f64 {
    let spec = RandomEffectsSpec::new(0.0, 1.0, alpha, vec![x.len()]).unwrap().to_mixture();
    mixed_partial(&|p: &[f64]| spec.joint_cdf(p).unwrap(), x, oracle_step(x.len()))
}

pub fn ma1_density_oracle(b: f64, alpha: f64, x: &[f64]) -> f64 {
    let spec = HiddenMaSpec::ma1(0.0, b, 1.0, alpha, x.len()).unwrap();
    mixed_partial(&|p: &[f64]| spec.joint_cdf(p).unwrap(), x, oracle_step(x.len()))
}

/// Group a flat replicate into consecutive blocks of `size`.
pub fn blocks(row: &[f64], size: usize) -> Vec<Vec<f64>> {
    row.chunks(size).map(|c| c.to_vec()).collect()
}
