//! Derivative-free and finite-difference quasi-Newton minimisers.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// BFGS with central finite-difference gradients.
    #[default]
    Bfgs,
    NelderMead,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    pub max_iters: usize,
    /// Relative change of the best value over `window` iterations that counts as converged.
    pub ftol: f64,
    pub window: usize,
    pub fd_step: f64,
    pub gtol: f64,
    /// Hard cap on objective evaluations.
    pub max_evaluations: Option<usize>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { max_iters: 500, ftol: 1e-8, window: 5, fd_step: 1e-4, gtol: 1e-7, max_evaluations: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Best value after each iteration, starting with the initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub evaluations: usize,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
    cap: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.cap
    }
}

fn window_converged(trace: &[f64], window: usize, ftol: f64) -> bool {
    if trace.len() <= window {
        return false;
    }
    let last = trace[trace.len() - 1];
    let old = trace[trace.len() - 1 - window];
    (old - last).abs() <= ftol * last.abs().max(1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gradient<F: FnMut(&[f64]) -> f64>(f: &mut Counted<F>, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f.call(&probe);
            probe[k] = x[k] - h;
            let down = f.call(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn minimize<F: FnMut(&[f64]) -> f64>(kind: OptimizerKind, f: F, x0: &[f64], opts: &OptimizerOptions) -> OptimizerOutcome {
    match kind {
        OptimizerKind::Bfgs => minimize_bfgs(f, x0, opts),
        OptimizerKind::NelderMead => minimize_nelder_mead(f, x0, opts),
    }
}

/// BFGS on the inverse Hessian with an Armijo backtracking line search.
pub fn minimize_bfgs<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: &OptimizerOptions) -> OptimizerOutcome {
    let dim = x0.len();
    let mut f = Counted { f, evaluations: 0, cap: opts.max_evaluations.unwrap_or(usize::MAX) };
    let mut x = x0.to_vec();
    let mut fx = f.call(&x);
    let mut trace = vec![fx];
    if dim == 0 {
        return OptimizerOutcome { x, value: fx, trace, iterations: 0, converged: true, evaluations: f.evaluations };
    }
    let mut g = gradient(&mut f, &x, opts.fd_step);
    let identity = |d: usize| {
        let mut m = vec![0.0; d * d];
        for k in 0..d {
            m[k * d + k] = 1.0;
        }
        m
    };
    let mut hinv = identity(dim);
    let mut fresh = true;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters && !f.exhausted() {
        if g.iter().all(|v| v.abs() < opts.gtol) {
            converged = true;
            break;
        }
        let mut d: Vec<f64> = (0..dim).map(|i| -dot(&hinv[i * dim..(i + 1) * dim], &g)).collect();
        let mut slope = dot(&d, &g);
        if slope >= 0.0 {
            hinv = identity(dim);
            fresh = true;
            d = g.iter().map(|v| -v).collect();
            slope = dot(&d, &g);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            let fnew = f.call(&xn);
            if fnew <= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fnew));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        let Some((xn, fnew)) = accepted else {
            if fresh {
                // no descent along the gradient at finite-difference resolution
                converged = true;
                trace.push(fx);
                break;
            }
            hinv = identity(dim);
            fresh = true;
            trace.push(fx);
            continue;
        };
        let gn = gradient(&mut f, &xn, opts.fd_step);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if fresh {
                let scale = sy / dot(&y, &y);
                hinv.iter_mut().for_each(|v| *v *= scale);
                fresh = false;
            }
            let hy: Vec<f64> = (0..dim).map(|i| dot(&hinv[i * dim..(i + 1) * dim], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..dim {
                for j in 0..dim {
                    hinv[i * dim + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        x = xn;
        fx = fnew;
        g = gn;
        trace.push(fx);
        if window_converged(&trace, opts.window, opts.ftol) {
            converged = true;
            break;
        }
    }
    OptimizerOutcome { x, value: fx, trace, iterations, converged, evaluations: f.evaluations }
}

/// Nelder-Mead simplex with the standard reflection, expansion, contraction and shrink steps.
pub fn minimize_nelder_mead<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: &OptimizerOptions) -> OptimizerOutcome {
    let dim = x0.len();
    let mut f = Counted { f, evaluations: 0, cap: opts.max_evaluations.unwrap_or(usize::MAX) };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = f.call(x0);
    simplex.push((x0.to_vec(), v0));
    for k in 0..dim {
        let mut x = x0.to_vec();
        x[k] += if x[k].abs() > 1e-3 { 0.1 * x[k].abs().max(0.25) } else { 0.25 };
        let v = f.call(&x);
        simplex.push((x, v));
    }
    let sort = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    sort(&mut simplex);
    let mut trace = vec![simplex[0].1];
    let mut converged = dim == 0;
    let mut iterations = 0;
    while !converged && iterations < opts.max_iters && !f.exhausted() {
        iterations += 1;
        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(x, _)| x[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = f.call(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f.call(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = f.call(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = f.call(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&entry.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    let v = f.call(&x);
                    *entry = (x, v);
                }
            }
        }
        sort(&mut simplex);
        trace.push(simplex[0].1);
        let spread = simplex[dim].1 - simplex[0].1;
        if window_converged(&trace, opts.window, opts.ftol) && spread.abs() <= opts.ftol * simplex[0].1.abs().max(1.0) {
            converged = true;
        }
    }
    let (x, value) = simplex.swap_remove(0);
    OptimizerOutcome { x, value, trace, iterations, converged, evaluations: f.evaluations }
}
