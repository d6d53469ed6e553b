//! Derivative-free minimization (Nelder-Mead simplex).

/// Outcome of one simplex run.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Whether the simplex collapsed below the tolerance before the budget ran
    /// out.
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMead {
    /// Edge length of the initial simplex along each axis.
    pub step: f64,
    /// Stop when the spread of values and the simplex size fall below this.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            step: 0.5,
            tolerance: 1e-7,
            max_evaluations: 2000,
        }
    }
}

impl NelderMead {
    pub fn minimize<F>(&self, start: &[f64], mut f: F) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = start.len();
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
            let value = eval(start, &mut evals);
            return Minimum {
                x: Vec::new(),
                value,
                evaluations: evals,
                converged: true,
            };
        }

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(start.to_vec());
        for i in 0..dim {
            let mut v = start.to_vec();
            v[i] += self.step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

        // Dimension-adapted coefficients keep the method effective beyond a
        // handful of variables.
        let d = dim as f64;
        let a = d.max(2.0);
        let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / a, 0.75 - 0.5 / a, 1.0 - 1.0 / a);

        let mut converged = false;
        while evals < self.max_evaluations {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[dim] - values[0];
            let size = simplex[1..]
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread.abs() <= self.tolerance && size <= self.tolerance.sqrt() {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|k| simplex[..dim].iter().map(|v| v[k]).sum::<f64>() / d)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < values[0] {
                let xe = along(gamma);
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
            // Outside contraction when the reflection beat the worst point,
            // inside otherwise.
            let xc = if fr < values[dim] { along(alpha * rho) } else { along(-rho) };
            let fc = eval(&xc, &mut evals);
            if fc < values[dim].min(fr) {
                simplex[dim] = xc;
                values[dim] = fc;
                continue;
            }
            let best = simplex[0].clone();
            for i in 1..=dim {
                for (x, b) in simplex[i].iter_mut().zip(&best) {
                    *x = b + sigma * (*x - b);
                }
                values[i] = eval(&simplex[i], &mut evals);
            }
        }

        let best = (0..=dim)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
            .unwrap_or(0);
        Minimum {
            x: simplex[best].clone(),
            value: values[best],
            evaluations: evals,
            converged,
        }
    }
}
