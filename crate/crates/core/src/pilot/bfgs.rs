//! Dense BFGS with a strong-Wolfe line search.

use nalgebra::{DMatrix, DVector};

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_BRACKET: usize = 40;
const MAX_ZOOM: usize = 60;

#[derive(Debug, Clone, Copy)]
pub struct BfgsConfig {
    /// Stop when the gradient infinity-norm falls to this value.
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_iters: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Objective at the start point and after every accepted step.
    pub history: Vec<f64>,
    pub termination: Termination,
}

type Eval<'a> = dyn FnMut(&DVector<f64>) -> (f64, DVector<f64>) + 'a;

struct Point {
    alpha: f64,
    f: f64,
    g: DVector<f64>,
    dphi: f64,
}

fn probe(eval: &mut Eval, x: &DVector<f64>, p: &DVector<f64>, alpha: f64) -> Point {
    let (f, g) = eval(&(x + p * alpha));
    let dphi = g.dot(p);
    Point { alpha, f, g, dphi }
}

fn zoom(
    eval: &mut Eval,
    x: &DVector<f64>,
    p: &DVector<f64>,
    f0: f64,
    d0: f64,
    mut lo: Point,
    mut hi: Point,
) -> Option<Point> {
    for _ in 0..MAX_ZOOM {
        // safeguarded quadratic interpolation on [lo, hi] using lo's slope
        let (a_lo, a_hi) = (lo.alpha, hi.alpha);
        let span = a_hi - a_lo;
        let denom = 2.0 * (hi.f - lo.f - lo.dphi * span);
        let mut a = if denom.abs() > 0.0 && denom.is_finite() {
            a_lo - lo.dphi * span * span / denom
        } else {
            f64::NAN
        };
        let (l, h) = if a_lo < a_hi { (a_lo, a_hi) } else { (a_hi, a_lo) };
        let margin = 0.1 * (h - l);
        if !a.is_finite() || a < l + margin || a > h - margin {
            a = 0.5 * (a_lo + a_hi);
        }
        if (h - l) < 1e-16 * h.max(1.0) {
            break;
        }
        let pt = probe(eval, x, p, a);
        if !pt.f.is_finite() || pt.f > f0 + C1 * a * d0 || pt.f >= lo.f {
            hi = pt;
        } else {
            if pt.dphi.abs() <= -C2 * d0 {
                return Some(pt);
            }
            if pt.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = pt;
        }
    }
    // lo always satisfies sufficient decrease; accept it when it moved
    (lo.alpha > 0.0).then_some(lo)
}

fn line_search(eval: &mut Eval, x: &DVector<f64>, p: &DVector<f64>, f0: f64, g0: &DVector<f64>) -> Option<Point> {
    let d0 = g0.dot(p);
    let mut prev = Point {
        alpha: 0.0,
        f: f0,
        g: g0.clone(),
        dphi: d0,
    };
    let mut alpha = 1.0;
    for i in 0..MAX_BRACKET {
        let pt = probe(eval, x, p, alpha);
        if !pt.f.is_finite() {
            // step overshot into overflow; shrink toward the last good point
            alpha = 0.5 * (prev.alpha + alpha);
            continue;
        }
        if pt.f > f0 + C1 * alpha * d0 || (i > 0 && pt.f >= prev.f) {
            return zoom(eval, x, p, f0, d0, prev, pt);
        }
        if pt.dphi.abs() <= -C2 * d0 {
            return Some(pt);
        }
        if pt.dphi >= 0.0 {
            return zoom(eval, x, p, f0, d0, pt, prev);
        }
        prev = pt;
        alpha *= 2.0;
    }
    (prev.alpha > 0.0).then_some(prev)
}

pub fn minimize(eval: &mut Eval, x0: DVector<f64>, cfg: &BfgsConfig) -> BfgsResult {
    let m = x0.len();
    let mut x = x0;
    let (mut f, mut g) = eval(&x);
    let mut history = vec![f];
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return BfgsResult {
            x,
            value: f,
            iterations: 0,
            history,
            termination: Termination::NonFinite,
        };
    }
    let mut h = DMatrix::<f64>::identity(m, m);
    let mut first = true;
    for it in 0..cfg.max_iters {
        if g.amax() <= cfg.grad_tol {
            return BfgsResult {
                x,
                value: f,
                iterations: it,
                history,
                termination: Termination::GradientTolerance,
            };
        }
        let mut p = -(&h * &g);
        if p.dot(&g) >= 0.0 {
            // lost positive definiteness; fall back to steepest descent
            h = DMatrix::identity(m, m);
            p = -g.clone();
        }
        let Some(pt) = line_search(eval, &x, &p, f, &g) else {
            return BfgsResult {
                x,
                value: f,
                iterations: it,
                history,
                termination: Termination::LineSearchFailed,
            };
        };
        let s = &p * pt.alpha;
        let y = &pt.g - &g;
        let sy = s.dot(&y);
        x += &s;
        f = pt.f;
        g = pt.g;
        history.push(f);
        if sy > 1e-12 * s.norm() * y.norm() {
            if first {
                h *= sy / y.dot(&y);
                first = false;
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hy' + hy s') + (rho^2 y'Hy + rho) s s'
            h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
    }
    let termination = if g.amax() <= cfg.grad_tol {
        Termination::GradientTolerance
    } else {
        Termination::MaxIterations
    };
    BfgsResult {
        x,
        value: f,
        iterations: cfg.max_iters,
        history,
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let mut eval = |v: &DVector<f64>| {
            let (a, b) = (v[0], v[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = DVector::from_vec(vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]);
            (f, g)
        };
        let r = minimize(&mut eval, DVector::from_vec(vec![-1.2, 1.0]), &BfgsConfig::default());
        assert_eq!(r.termination, Termination::GradientTolerance);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_converges_fast() {
        let mut eval = |v: &DVector<f64>| {
            let f = v.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x * x).sum::<f64>();
            let g = DVector::from_iterator(v.len(), v.iter().enumerate().map(|(i, x)| 2.0 * (i + 1) as f64 * x));
            (f, g)
        };
        let r = minimize(&mut eval, DVector::from_element(5, 3.0), &BfgsConfig::default());
        assert!(r.value < 1e-12);
        assert!(r.iterations < 50);
    }
}
