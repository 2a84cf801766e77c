//! Derivative-free minimizers.
//!
//! [`nelder_mead`] is the classic simplex method (reflection 1, expansion 2,
//! contraction 0.5, shrink 0.5). [`powell`] is the direction-set method with a
//! golden-section bracket and Brent line minimization along each direction.
//! Both are deterministic and never return a point worse than the start.
//!
//! Box constraints are handled by [`Bound`]: each bounded coordinate is
//! optimized in an unconstrained logit space and mapped back with a sigmoid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Something to minimize. Implemented for every `Fn(&[f64]) -> f64`.
pub trait Objective {
    fn evaluate(&self, x: &[f64]) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64,
{
    fn evaluate(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptOptions {
    /// Stop once the spread of objective values (simplex) or per-sweep decrease (Powell) is below this.
    pub f_tol: f64,
    /// Stop once the simplex size (or Powell step) is below this.
    pub x_tol: f64,
    /// Iteration cap; `None` means `200 * n`.
    pub max_iters: Option<usize>,
    /// Edge length of the initial simplex.
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
}

fn default_initial_step() -> f64 {
    0.1
}

impl Default for OptOptions {
    fn default() -> Self {
        Self { f_tol: 1e-8, x_tol: 1e-8, max_iters: None, initial_step: default_initial_step() }
    }
}

impl OptOptions {
    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(200 * n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NelderMead,
    Powell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub method: Method,
    /// Best objective value after each iteration.
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// Counts evaluations and maps NaN to +inf so comparisons stay total.
struct Counted<'a, O: ?Sized> {
    inner: &'a O,
    calls: std::cell::Cell<usize>,
}

impl<'a, O: Objective + ?Sized> Counted<'a, O> {
    fn new(inner: &'a O) -> Self {
        Self { inner, calls: std::cell::Cell::new(0) }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.calls.set(self.calls.get() + 1);
        let f = self.inner.evaluate(x);
        if f.is_nan() {
            f64::INFINITY
        } else {
            f
        }
    }
}

fn check_start<O: Objective + ?Sized>(obj: &Counted<'_, O>, x0: &[f64]) -> Result<f64> {
    if x0.is_empty() {
        return Err(Error::Argument("cannot optimize over zero parameters".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("initial point is not finite".into()));
    }
    let f0 = obj.inner.evaluate(x0);
    obj.calls.set(obj.calls.get() + 1);
    if !f0.is_finite() {
        return Err(Error::Argument(format!("objective is not finite at the initial point ({f0})")));
    }
    Ok(f0)
}

/// A flat simplex can straddle a minimum (or sit on a plateau edge); the
/// centroid of all vertices tells those cases apart from true convergence.
fn centroid_improves<O: Objective + ?Sized>(obj: &Counted<'_, O>, simplex: &[(Vec<f64>, f64)], f_tol: f64) -> bool {
    let n = simplex[0].0.len();
    let mut c = vec![0.0; n];
    for (v, _) in simplex {
        for (ci, x) in c.iter_mut().zip(v) {
            *ci += x / simplex.len() as f64;
        }
    }
    obj.eval(&c) < simplex[0].1 - f_tol
}

/// Nelder-Mead simplex minimization from `x0`.
pub fn nelder_mead<O: Objective + ?Sized>(obj: &O, x0: &[f64], opts: &OptOptions) -> Result<OptResult> {
    let counted = Counted::new(obj);
    let f0 = check_start(&counted, x0)?;
    let n = x0.len();
    let cap = opts.iteration_cap(n);
    if cap == 0 {
        return Ok(OptResult {
            x_best: x0.to_vec(),
            f_best: f0,
            iterations: 0,
            evaluations: counted.calls.get(),
            converged: false,
            method: Method::NelderMead,
            history: Vec::new(),
        });
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        let f = counted.eval(&v);
        simplex.push((v, f));
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        // Stable sort keeps earlier vertices first on ties, so x0 wins a flat start.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size < opts.x_tol || (spread < opts.f_tol && !centroid_improves(&counted, &simplex, opts.f_tol)) {
            converged = true;
            break;
        }
        if iterations >= cap {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let worst = simplex[n].0.clone();
        let f_worst = simplex[n].1;
        let along = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&worst).map(|(c, w)| c + coef * (c - w)).collect()
        };

        let xr = along(1.0);
        let fr = counted.eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = counted.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc, accept) = if fr < f_worst {
                let xc = along(0.5);
                let fc = counted.eval(&xc);
                let ok = fc <= fr;
                (xc, fc, ok)
            } else {
                let xc = along(-0.5);
                let fc = counted.eval(&xc);
                let ok = fc < f_worst;
                (xc, fc, ok)
            };
            if accept {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    let f = counted.eval(&shrunk);
                    *vertex = (shrunk, f);
                }
            }
        }
        let best = simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        history.push(best);
    }

    let (x_best, f_best) = simplex.swap_remove(0);
    Ok(OptResult {
        x_best,
        f_best,
        iterations,
        evaluations: counted.calls.get(),
        converged,
        method: Method::NelderMead,
        history,
    })
}

const GOLDEN: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;
const LINE_TOL: f64 = 1.5e-8;

/// Brackets a minimum of `phi` starting from steps 0 and 1.
fn bracket<F: Fn(f64) -> f64>(phi: &F, f_at_zero: f64) -> (f64, f64, f64, f64) {
    let (mut a, mut fa) = (0.0, f_at_zero);
    let (mut b, mut fb) = (1.0, phi(1.0));
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + GOLDEN * (b - a);
    let mut fc = phi(c);
    let mut guard = 0;
    while fc < fb && guard < 60 {
        guard += 1;
        let r = (b - a) * (fb - fc);
        let q = (b - c) * (fb - fa);
        let denom = 2.0 * (q - r).abs().max(1e-21) * (q - r).signum();
        let mut u = b - ((b - c) * q - (b - a) * r) / denom;
        let ulim = b + 100.0 * (c - b);
        let fu;
        if (b - u) * (u - c) > 0.0 {
            let f = phi(u);
            if f < fc {
                return (b, u, c, f);
            } else if f > fb {
                return (a, b, u, fb);
            }
            u = c + GOLDEN * (c - b);
            fu = phi(u);
        } else if (c - u) * (u - ulim) > 0.0 {
            let f = phi(u);
            if f < fc {
                b = c;
                c = u;
                u = c + GOLDEN * (c - b);
                fb = fc;
                fc = f;
                fu = phi(u);
            } else {
                fu = f;
            }
        } else if (u - ulim) * (ulim - c) >= 0.0 {
            u = ulim;
            fu = phi(u);
        } else {
            u = c + GOLDEN * (c - b);
            fu = phi(u);
        }
        a = b;
        b = c;
        c = u;
        fa = fb;
        fb = fc;
        fc = fu;
    }
    let _ = fa;
    (a, b, c, fb)
}

/// Brent's method on a bracket `a < b < c` (any order of a, c) with `phi(b) = fb`.
fn brent<F: Fn(f64) -> f64>(phi: &F, a: f64, b: f64, c: f64, fb: f64) -> (f64, f64) {
    let (mut lo, mut hi) = if a < c { (a, c) } else { (c, a) };
    let (mut x, mut w, mut v) = (b, b, b);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let xm = 0.5 * (lo + hi);
        let tol1 = LINE_TOL * x.abs() + 1e-11;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (lo - x) || p >= q * (hi - x)) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { lo - x } else { hi - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = phi(u);
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Minimizes along `dir` from `x`; moves only on strict improvement.
fn line_minimize<O: Objective + ?Sized>(obj: &Counted<'_, O>, x: &mut [f64], fx: &mut f64, dir: &[f64]) {
    if dir.iter().all(|d| *d == 0.0) {
        return;
    }
    let point = |alpha: f64| -> Vec<f64> { x.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect() };
    let phi = |alpha: f64| obj.eval(&point(alpha));
    let (a, b, c, fb) = bracket(&phi, *fx);
    let (alpha, f_alpha) = if fb.is_finite() { brent(&phi, a, b, c, fb) } else { (0.0, *fx) };
    if f_alpha < *fx {
        let moved = point(alpha);
        x.copy_from_slice(&moved);
        *fx = f_alpha;
    }
}

/// Powell's direction-set minimization from `x0`.
pub fn powell<O: Objective + ?Sized>(obj: &O, x0: &[f64], opts: &OptOptions) -> Result<OptResult> {
    let counted = Counted::new(obj);
    let f0 = check_start(&counted, x0)?;
    let n = x0.len();
    let cap = opts.iteration_cap(n);
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut directions: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            d
        })
        .collect();

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cap {
        iterations += 1;
        let x_start = x.clone();
        let f_start = fx;
        let mut biggest = 0;
        let mut delta = 0.0;
        for (i, dir) in directions.iter().enumerate() {
            let before = fx;
            line_minimize(&counted, &mut x, &mut fx, dir);
            if before - fx > delta {
                delta = before - fx;
                biggest = i;
            }
        }
        history.push(fx);

        let step = x.iter().zip(&x_start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if 2.0 * (f_start - fx) <= opts.f_tol * (f_start.abs() + fx.abs()) + 1e-20 || step <= opts.x_tol {
            converged = true;
            break;
        }

        let new_dir: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let extrapolated: Vec<f64> = x.iter().zip(&new_dir).map(|(a, d)| a + d).collect();
        let f_ext = counted.eval(&extrapolated);
        if f_start > f_ext {
            let t = 2.0 * (f_start + f_ext - 2.0 * fx) * (f_start - fx - delta).powi(2)
                - delta * (f_start - f_ext).powi(2);
            if t < 0.0 {
                line_minimize(&counted, &mut x, &mut fx, &new_dir);
                directions[biggest] = directions[n - 1].clone();
                directions[n - 1] = new_dir;
                if let Some(last) = history.last_mut() {
                    *last = fx;
                }
            }
        }
    }

    Ok(OptResult {
        x_best: x,
        f_best: fx,
        iterations,
        evaluations: counted.calls.get(),
        converged,
        method: Method::Powell,
        history,
    })
}

/// Per-coordinate feasible region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Free,
    /// Closed interval, reached asymptotically through a sigmoid.
    Interval(f64, f64),
}

impl Bound {
    pub fn to_internal(&self, x: f64) -> f64 {
        match *self {
            Bound::Free => x,
            Bound::Interval(lo, hi) => {
                let p = ((x - lo) / (hi - lo)).clamp(1e-12, 1.0 - 1e-12);
                (p / (1.0 - p)).ln()
            }
        }
    }

    pub fn to_external(&self, u: f64) -> f64 {
        match *self {
            Bound::Free => u,
            Bound::Interval(lo, hi) => lo + (hi - lo) / (1.0 + (-u).exp()),
        }
    }
}

fn to_external(bounds: &[Bound], u: &[f64]) -> Vec<f64> {
    bounds.iter().zip(u).map(|(b, v)| b.to_external(*v)).collect()
}

/// Result of the Nelder-Mead → Powell chain, reported in external coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub f_start: f64,
    pub runs: Vec<OptResult>,
}

/// Runs Nelder-Mead from `x0`, then Powell from its result, inside `bounds`,
/// and returns the better of the two.
pub fn minimize_chain<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    bounds: &[Bound],
    opts: &OptOptions,
) -> Result<ChainResult> {
    if bounds.len() != x0.len() {
        return Err(Error::Argument(format!(
            "{} bounds supplied for {} parameters",
            bounds.len(),
            x0.len()
        )));
    }
    let u0: Vec<f64> = bounds.iter().zip(x0).map(|(b, v)| b.to_internal(*v)).collect();
    let wrapped = |u: &[f64]| obj.evaluate(&to_external(bounds, u));
    let f_start = wrapped(&u0);

    let mut nm = nelder_mead(&wrapped, &u0, opts)?;
    let mut pw = powell(&wrapped, &nm.x_best, opts)?;
    let (u_best, f_best) = if pw.f_best <= nm.f_best {
        (pw.x_best.clone(), pw.f_best)
    } else {
        (nm.x_best.clone(), nm.f_best)
    };
    nm.x_best = to_external(bounds, &nm.x_best);
    pw.x_best = to_external(bounds, &pw.x_best);
    Ok(ChainResult { x_best: to_external(bounds, &u_best), f_best, f_start, runs: vec![nm, pw] })
}

/// Outcome of [`multistart`], in external coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    /// Objective at the first start.
    pub f_first: f64,
    pub runs: Vec<OptResult>,
}

/// Nelder-Mead from every start inside `bounds`, then Powell from the best point found.
///
/// Starts are clamped just inside their intervals. Each start is itself a
/// candidate, and ties keep the earlier start, so the result is deterministic.
pub fn multistart<O: Objective + ?Sized>(
    obj: &O,
    starts: &[Vec<f64>],
    bounds: &[Bound],
    opts: &OptOptions,
) -> Result<MultiStartResult> {
    if starts.is_empty() {
        return Err(Error::Argument("no starting points".into()));
    }
    let external = |u: &[f64]| to_external(bounds, u);
    let wrapped = |u: &[f64]| obj.evaluate(&external(u));

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut f_first = f64::INFINITY;
    let mut runs = Vec::new();
    for (i, start) in starts.iter().enumerate() {
        if start.len() != bounds.len() {
            return Err(Error::Argument(format!(
                "start {i} has {} coordinates, expected {}",
                start.len(),
                bounds.len()
            )));
        }
        let u0: Vec<f64> = bounds.iter().zip(start).map(|(b, v)| b.to_internal(*v)).collect();
        let f0 = wrapped(&u0);
        if i == 0 {
            f_first = f0;
        }
        if !f0.is_finite() {
            continue;
        }
        if best.as_ref().map_or(true, |b| f0 < b.1) {
            best = Some((u0.clone(), f0));
        }
        let nm = nelder_mead(&wrapped, &u0, opts)?;
        if best.as_ref().map_or(true, |b| nm.f_best < b.1) {
            best = Some((nm.x_best.clone(), nm.f_best));
        }
        runs.push(nm);
    }
    let (mut u_best, mut f_best) =
        best.ok_or_else(|| Error::Fit("no start produced a finite objective".into()))?;
    let pw = powell(&wrapped, &u_best, opts)?;
    if pw.f_best < f_best {
        u_best = pw.x_best.clone();
        f_best = pw.f_best;
    }
    runs.push(pw);
    for r in &mut runs {
        r.x_best = external(&r.x_best);
    }
    Ok(MultiStartResult { x_best: external(&u_best), f_best, f_first, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nm_one_dimensional_quadratic() {
        let r = nelder_mead(&|x: &[f64]| (x[0] - 3.0).powi(2), &[0.0], &OptOptions::default()).unwrap();
        assert_abs_diff_eq!(r.x_best[0], 3.0, epsilon = 1e-4);
        assert!(r.converged);
    }

    #[test]
    fn nm_rosenbrock() {
        let r = nelder_mead(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap();
        assert!(r.f_best < 1e-6, "f = {}", r.f_best);
        assert!(r.iterations <= 400);
    }

    #[test]
    fn nm_zero_budget_returns_start() {
        let opts = OptOptions { max_iters: Some(0), ..Default::default() };
        let r = nelder_mead(&rosenbrock, &[-1.2, 1.0], &opts).unwrap();
        assert_eq!(r.x_best, vec![-1.2, 1.0]);
        assert!(!r.converged);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let f = |x: &[f64]| if x[0] < 1.0 { f64::INFINITY } else { x[0] };
        assert!(matches!(nelder_mead(&f, &[0.0], &OptOptions::default()), Err(Error::Argument(_))));
        assert!(matches!(powell(&f, &[0.0], &OptOptions::default()), Err(Error::Argument(_))));
        assert!(matches!(nelder_mead(&f, &[f64::NAN], &OptOptions::default()), Err(Error::Argument(_))));
    }

    #[test]
    fn powell_separable_quadratic_in_one_sweep() {
        let c = [1.5, -2.0, 0.25, 7.0];
        let f = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let opts = OptOptions { max_iters: Some(1), ..Default::default() };
        let r = powell(&f, &[0.0; 4], &opts).unwrap();
        for (x, target) in r.x_best.iter().zip(&c) {
            assert_abs_diff_eq!(*x, *target, epsilon = 1e-6);
        }
    }

    #[test]
    fn powell_rosenbrock() {
        let r = powell(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap();
        assert!(r.f_best < 1e-6, "f = {}", r.f_best);
    }

    #[test]
    fn powell_constant_function_stays_put() {
        let r = powell(&|_: &[f64]| 4.0, &[0.3, -0.7], &OptOptions::default()).unwrap();
        assert_eq!(r.x_best, vec![0.3, -0.7]);
        assert!(r.converged);
        let r = nelder_mead(&|_: &[f64]| 4.0, &[0.3, -0.7], &OptOptions::default()).unwrap();
        assert_eq!(r.x_best, vec![0.3, -0.7]);
        assert!(r.converged);
    }

    #[test]
    fn history_is_monotone() {
        for r in [
            nelder_mead(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap(),
            powell(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap(),
        ] {
            assert!(r.history.windows(2).all(|w| w[1] <= w[0]), "{:?}", r.method);
        }
    }

    #[test]
    fn deterministic_results() {
        let a = powell(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap();
        let b = powell(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap();
        assert_eq!(a, b);
        let a = nelder_mead(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap();
        let b = nelder_mead(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn translated_problem_translates_solution() {
        let shift = [0.5, -2.0];
        let shifted = |x: &[f64]| rosenbrock(&[x[0] - shift[0], x[1] - shift[1]]);
        let x0 = [-1.2 + shift[0], 1.0 + shift[1]];
        let base = nelder_mead(&rosenbrock, &[-1.2, 1.0], &OptOptions::default()).unwrap();
        let moved = nelder_mead(&shifted, &x0, &OptOptions::default()).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(moved.x_best[i] - shift[i], base.x_best[i], epsilon = 1e-3);
        }
    }

    #[test]
    fn chain_respects_bounds() {
        let bounds = [Bound::Interval(2.0, 5.0), Bound::Free];
        let f = |x: &[f64]| x[0].powi(2) + (x[1] - 1.0).powi(2);
        let r = minimize_chain(&f, &[3.0, 0.0], &bounds, &OptOptions::default()).unwrap();
        assert!(r.x_best[0] >= 2.0 && r.x_best[0] < 2.01, "{:?}", r.x_best);
        assert_abs_diff_eq!(r.x_best[1], 1.0, epsilon = 1e-4);
        assert!(r.f_best <= r.f_start);
    }

    #[test]
    fn multistart_picks_the_better_basin() {
        let f = |x: &[f64]| ((x[0] - 1.0).powi(2) * (x[0] + 2.0).powi(2)) + 0.1 * (x[0] - 1.0).powi(2);
        let bounds = [Bound::Interval(-5.0, 5.0)];
        let r = multistart(&f, &[vec![-2.5], vec![2.0]], &bounds, &OptOptions::default()).unwrap();
        assert_abs_diff_eq!(r.x_best[0], 1.0, epsilon = 1e-4);
        assert!(r.f_best <= r.f_first);
    }

    #[test]
    fn bound_round_trip() {
        let b = Bound::Interval(-1.0, 3.0);
        for x in [-0.5, 0.0, 1.0, 2.9] {
            assert_abs_diff_eq!(b.to_external(b.to_internal(x)), x, epsilon = 1e-10);
        }
    }
}
