//! Nelder–Mead simplex minimization.

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Function evaluations allowed per run (the polishing restart gets its own budget).
    pub max_evals: usize,
    /// Converged once the spread of values over the simplex is below this.
    pub f_tol: f64,
    /// Restart once from the incumbent after convergence.
    pub polish: bool,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 2000,
            f_tol: 1e-8,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an initial simplex of per-coordinate `steps`.
///
/// Non-finite values count as `+∞`, so infeasible points are simply avoided.
/// Uses the dimension-adaptive coefficients of Gao and Han.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let mut first = run(&mut f, x0, steps, opts);
    if opts.polish && first.converged {
        let second = run(&mut f, &first.x, steps, opts);
        first.evals += second.evals;
        if second.value <= first.value {
            first.x = second.x;
            first.value = second.value;
        }
        first.converged = second.converged;
    }
    first
}

fn run<F: FnMut(&[f64]) -> f64>(f: &mut F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if dim == 0 {
        let value = eval(x0, &mut evals);
        return Minimum {
            x: Vec::new(),
            value,
            evals,
            converged: true,
        };
    }
    let d = dim as f64;
    let (reflect, expand, contract, shrink) = (1.0, 1.0 + 2.0 / d, 0.75 - 0.5 / d, 1.0 - 1.0 / d);

    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
    let mut converged = false;

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[dim]);
        if best.is_finite() && worst - best <= opts.f_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / d)
            .collect();
        let toward = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = toward(reflect);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = toward(reflect * expand);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[dim] = xe;
                values[dim] = fe;
            } else {
                simplex[dim] = xr;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = xr;
            values[dim] = fr;
            continue;
        }
        // outside contraction after a poor reflection, inside after a failed one
        let xc = if fr < values[dim] {
            toward(reflect * contract)
        } else {
            toward(-contract)
        };
        let fc = eval(&xc, &mut evals);
        if fc < values[dim].min(fr) {
            simplex[dim] = xc;
            values[dim] = fc;
            continue;
        }
        for i in 1..=dim {
            let moved: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + shrink * (v - b))
                .collect();
            values[i] = eval(&moved, &mut evals);
            simplex[i] = moved;
        }
    }

    let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evals: 5000,
            f_tol: 1e-14,
            polish: true,
        };
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{m:?}");
    }

    #[test]
    fn avoids_infeasible_region() {
        let f = |x: &[f64]| if x[0] <= 0.0 { f64::NAN } else { x[0] - x[0].ln() };
        let m = nelder_mead(f, &[3.0], &[1.0], &NelderMeadOptions::default());
        assert!((m.x[0] - 1.0).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn respects_budget() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let opts = NelderMeadOptions {
            max_evals: 30,
            f_tol: 0.0,
            polish: false,
        };
        let m = nelder_mead(f, &[5.0; 4], &[1.0; 4], &opts);
        assert!(!m.converged);
        assert!(m.evals <= 30 + 4);
    }
}
