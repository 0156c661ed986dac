//! Small unconstrained optimizers over `R^n`: BFGS with backtracking line
//! search and a derivative-free compass search.

#[derive(Debug, Clone)]
pub struct OptResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub value_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iter: 500, grad_tol: 1e-10, value_tol: 1e-15 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimize a smooth function given as `x -> (value, gradient)`.
pub fn bfgs<F>(mut f: F, x0: &[f64], opts: BfgsOptions) -> OptResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x);
    if n == 0 || !fx.is_finite() {
        return OptResult { x, value: fx, iterations: 0, grad_norm: 0.0, converged: n == 0 };
    }
    // inverse Hessian approximation, row-major
    let mut h = vec![0.0; n * n];
    let reset = |h: &mut Vec<f64>, scale: f64| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = scale;
        }
    };
    reset(&mut h, 1.0);
    let mut stalled = 0;
    for it in 0..opts.max_iter {
        let gn = norm(&g);
        if gn <= opts.grad_tol {
            return OptResult { x, value: fx, iterations: it, grad_norm: gn, converged: true };
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&d, &g);
        if slope >= 0.0 {
            reset(&mut h, 1.0 / gn.max(1e-300));
            d = g.iter().map(|v| -v / gn).collect();
            slope = dot(&d, &g);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let (ft, gt) = f(&xt);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((xt, ft, gt));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            return OptResult { x, value: fx, iterations: it, grad_norm: gn, converged: gn <= opts.grad_tol * 1e3 };
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if it == 0 {
                reset(&mut h, sy / dot(&y, &y));
            }
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let improvement = fx - fnew;
        x = xn;
        fx = fnew;
        g = gnew;
        if improvement <= opts.value_tol * fx.abs().max(1.0) {
            stalled += 1;
            if stalled >= 3 {
                let gn = norm(&g);
                return OptResult { x, value: fx, iterations: it + 1, grad_norm: gn, converged: true };
            }
        } else {
            stalled = 0;
        }
    }
    let gn = norm(&g);
    OptResult { x, value: fx, iterations: opts.max_iter, grad_norm: gn, converged: gn <= opts.grad_tol }
}

/// Derivative-free pattern search along the coordinate axes.
pub fn compass_search<F>(mut f: F, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> OptResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = step;
    while step > tol && evals < max_evals {
        let mut improved = false;
        'dirs: for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut xt = x.clone();
                xt[i] += sign * step;
                let ft = f(&xt);
                evals += 1;
                if ft < fx {
                    x = xt;
                    fx = ft;
                    improved = true;
                    break 'dirs;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    OptResult { x, value: fx, iterations: evals, grad_norm: step, converged: step <= tol }
}
