//! Downhill simplex minimizer with the classic coefficients
//! (reflection 1, expansion 2, contraction ½, shrink ½).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop when f(worst) − f(best) falls below this.
    pub f_tol: f64,
    /// Stop when every vertex lies within this (∞-norm) of the best vertex.
    pub x_tol: f64,
    pub max_iter: usize,
    /// Initial simplex edge per coordinate. `None` uses 5% of |x0ᵢ|, or
    /// 2.5e-4 where x0ᵢ = 0.
    pub initial_step: Option<Vec<f64>>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_iter: 2000,
            initial_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective after each iteration (index 0 is the initial simplex).
    pub history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> Result<f64> {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective {
                value: v,
                point: x.to_vec(),
            })
        }
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
}

/// Minimize `objective` starting from `x0`. Deterministic for a given
/// objective, start and options.
pub fn nelder_mead<F>(objective: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::validation("x0", "dimension must be at least 1"));
    }
    let mut obj = Counted { f: objective, evals: 0 };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), obj.call(x0)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        let h = match &opts.initial_step {
            Some(steps) => steps[i],
            None if x0[i] != 0.0 => 0.05 * x0[i],
            None => 2.5e-4,
        };
        x[i] += h;
        let fx = obj.call(&x)?;
        simplex.push((x, fx));
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        // stable sort keeps ties in insertion order, so runs are reproducible
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push(simplex[0].1);

        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size < opts.x_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        if spread < opts.f_tol {
            // A simplex straddling the minimum can have equal vertex values
            // while still being wide, so probe its centre before stopping.
            let mid = mean_point(&simplex);
            let f_mid = obj.call(&mid)?;
            if f_mid > simplex[0].1 - opts.f_tol {
                converged = true;
                break;
            }
            iterations += 1;
            simplex[n] = (mid, f_mid);
            continue;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }

        let (f_best, f_second, f_worst) = (simplex[0].1, simplex[n - 1].1, simplex[n].1);
        let worst = simplex[n].0.clone();

        let xr = affine(&centroid, &worst, -REFLECT);
        let fr = obj.call(&xr)?;
        if fr < f_best {
            let xe = affine(&centroid, &worst, -EXPAND);
            let fe = obj.call(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < f_worst {
            let xc = affine(&centroid, &xr, CONTRACT);
            let fc = obj.call(&xc)?;
            (xc, fc, fc <= fr)
        } else {
            let xc = affine(&centroid, &worst, CONTRACT);
            let fc = obj.call(&xc)?;
            (xc, fc, fc < f_worst)
        };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = affine(&best, &vertex.0, SHRINK);
            let fx = obj.call(&x)?;
            *vertex = (x, fx);
        }
    }

    let (x, f) = simplex.swap_remove(0);
    Ok(NelderMeadResult {
        x,
        f,
        iterations,
        evaluations: obj.evals,
        converged,
        history,
    })
}

fn mean_point(simplex: &[(Vec<f64>, f64)]) -> Vec<f64> {
    let mut mid = vec![0.0; simplex[0].0.len()];
    for (x, _) in simplex {
        for (m, xi) in mid.iter_mut().zip(x) {
            *m += xi;
        }
    }
    let k = simplex.len() as f64;
    mid.iter_mut().for_each(|m| *m /= k);
    mid
}
