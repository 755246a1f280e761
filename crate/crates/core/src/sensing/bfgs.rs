//! Small dense BFGS with a backtracking Armijo line search.

use nalgebra::{SMatrix, SVector};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Smallest step the line search tries before giving up.
    pub min_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            max_iter: 200,
            c1: 1e-4,
            min_step: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Gradient,
    MaxIter,
    /// No step along the search direction decreased the objective; the
    /// iterate is at the floating-point floor of the objective.
    LineSearch,
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsResult<const N: usize> {
    pub x: SVector<f64, N>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub stop: Stop,
}

/// Minimise `f`, which returns the value and gradient at a point.
pub fn minimize<const N: usize, F>(
    mut f: F,
    x0: SVector<f64, N>,
    opts: &BfgsOptions,
) -> BfgsResult<N>
where
    F: FnMut(&SVector<f64, N>) -> (f64, SVector<f64, N>),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut h = SMatrix::<f64, N, N>::identity();
    let mut iterations = 0;
    let mut first = true;
    let stop = loop {
        if g.norm() < opts.grad_tol {
            break Stop::Gradient;
        }
        if iterations >= opts.max_iter {
            break Stop::MaxIter;
        }
        let mut dir = -(h * g);
        if dir.dot(&g) >= 0.0 {
            // Curvature information went bad; restart from steepest descent.
            h = SMatrix::identity();
            dir = -g;
        }
        if first {
            // Scale the very first step so it is not absurdly long.
            let n = dir.norm();
            if n > 0.1 {
                dir *= 0.1 / n;
            }
        }
        let slope = g.dot(&dir);
        let mut step = 1.0;
        let accepted = loop {
            let xn = x + dir * step;
            let (fn_, gn) = f(&xn);
            if fn_.is_finite() && fn_ <= fx + opts.c1 * step * slope {
                break Some((xn, fn_, gn));
            }
            step *= 0.5;
            if step * dir.norm() < opts.min_step {
                break None;
            }
        };
        let Some((xn, fn_, gn)) = accepted else {
            break Stop::LineSearch;
        };
        let s = xn - x;
        let y = gn - g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            if first {
                h = SMatrix::identity() * (sy / y.dot(&y));
            }
            let rho = 1.0 / sy;
            let i = SMatrix::<f64, N, N>::identity();
            let a = i - s * y.transpose() * rho;
            h = a * h * a.transpose() + s * s.transpose() * rho;
        }
        first = false;
        x = xn;
        fx = fn_;
        g = gn;
        iterations += 1;
    };
    BfgsResult {
        x,
        value: fx,
        grad_norm: g.norm(),
        iterations,
        stop,
    }
}
