//! Damped Gauss-Newton (Levenberg-Marquardt) least squares.
//!
//! Each iteration first tries the undamped Gauss-Newton step and keeps it
//! when the quadratic model predicts the actual decrease well (gain ratio at
//! least 0.75). Otherwise it falls back to the Marquardt-scaled damped step
//! with Nielsen's damping update. Linear problems therefore finish in one
//! step, and near a solution convergence is Gauss-Newton fast.

use crate::error::{domain, Error, Result};
use crate::numerics::linalg::{cholesky, cholesky_solve, spd_inverse, Matrix};
use crate::scalar::Real;

/// A vector of residuals as a function of the parameter vector.
pub trait ResidualModel<T: Real> {
    fn residuals(&self, params: &[T]) -> Vec<T>;

    /// Analytic Jacobian (`residuals x params`), when available. Central
    /// finite differences are used otherwise.
    fn jacobian(&self, _params: &[T]) -> Option<Matrix<T>> {
        None
    }
}

impl<T: Real, F> ResidualModel<T> for F
where
    F: Fn(&[T]) -> Vec<T>,
{
    fn residuals(&self, params: &[T]) -> Vec<T> {
        self(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqOptions<T> {
    /// Relative step tolerance.
    pub xtol: T,
    /// Relative cost-change tolerance.
    pub ftol: T,
    /// Gradient tolerance, relative to the gradient at the initial point.
    pub gtol: T,
    pub max_iter: usize,
    /// Initial damping relative to the largest diagonal of `J^T J`.
    pub initial_damping: T,
}

impl<T: Real> Default for LsqOptions<T> {
    fn default() -> Self {
        Self {
            xtol: T::lit(1e-10),
            ftol: T::lit(1e-12),
            gtol: T::lit(1e-8),
            max_iter: 500,
            initial_damping: T::lit(1e-3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient fell below `gtol` times its initial value, or below the
    /// level at which a Gauss-Newton step gains more than `ftol`.
    Gradient,
    /// Relative step below `xtol`.
    Step,
    /// Relative cost decrease below `ftol`.
    Cost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitParam<T> {
    pub name: String,
    pub value: T,
    pub sigma: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub params: Vec<FitParam<T>>,
    /// Weighted sum of squared residuals at the solution.
    pub residual_norm: T,
    pub n_iter: usize,
    /// Set when the final point passes the gradient test.
    pub converged: bool,
    pub termination: Termination,
    /// Gradient infinity norm at the solution, relative to the initial one.
    pub relative_gradient: T,
    /// Residual count minus parameter count.
    pub dof: usize,
}

impl<T: Real> FitResult<T> {
    pub fn values(&self) -> Vec<T> {
        self.params.iter().map(|p| p.value).collect()
    }

    pub fn get(&self, name: &str) -> Option<&FitParam<T>> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<T> {
        self.get(name).map(|p| p.value)
    }

    pub fn sigma(&self, name: &str) -> Option<T> {
        self.get(name).map(|p| p.sigma)
    }

    pub fn with_names(mut self, names: &[&str]) -> Self {
        for (p, n) in self.params.iter_mut().zip(names) {
            p.name = (*n).to_string();
        }
        self
    }

    /// Reduced chi-square, `residual_norm / dof`.
    pub fn reduced_chi_square(&self) -> T {
        if self.dof == 0 {
            T::zero()
        } else {
            self.residual_norm / T::count(self.dof)
        }
    }
}

fn sum_sq<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, &x| s + x * x)
}

fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

fn all_finite<T: Real>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Central-difference Jacobian.
pub fn numeric_jacobian<T: Real, M: ResidualModel<T> + ?Sized>(model: &M, params: &[T], m: usize) -> Matrix<T> {
    let n = params.len();
    let h0 = T::epsilon().cbrt();
    let mut jac = Matrix::zeros(m, n);
    let mut p = params.to_vec();
    for j in 0..n {
        let h = h0 * params[j].abs().max(T::one());
        p[j] = params[j] + h;
        let up = model.residuals(&p);
        p[j] = params[j] - h;
        let down = model.residuals(&p);
        p[j] = params[j];
        let denom = T::lit(2.0) * h;
        for i in 0..m {
            jac.set(i, j, (up[i] - down[i]) / denom);
        }
    }
    jac
}

fn jacobian_of<T: Real, M: ResidualModel<T> + ?Sized>(model: &M, params: &[T], m: usize) -> Matrix<T> {
    match model.jacobian(params) {
        Some(j) => {
            assert_eq!((j.rows(), j.cols()), (m, params.len()), "jacobian shape");
            j
        }
        None => numeric_jacobian(model, params, m),
    }
}

/// Predicted cost decrease of the quadratic model for `step`.
fn predicted_decrease<T: Real>(gram: &Matrix<T>, grad: &[T], step: &[T]) -> T {
    let n = step.len();
    let mut quad = T::zero();
    for i in 0..n {
        for j in 0..n {
            quad = quad + step[i] * gram.get(i, j) * step[j];
        }
    }
    let lin = grad.iter().zip(step).fold(T::zero(), |s, (&g, &d)| s + g * d);
    -(lin + quad / T::lit(2.0))
}

/// Minimises `0.5 * sum r_i(p)^2` starting from `init`.
///
/// Stops on a small gradient, a small relative step, or a small relative
/// cost change. Exceeding `max_iter` is an error carrying the last cost and
/// gradient; so is a damped system that stays singular.
pub fn nonlinear_least_squares<T: Real, M: ResidualModel<T> + ?Sized>(
    model: &M,
    init: &[T],
    options: &LsqOptions<T>,
) -> Result<FitResult<T>> {
    let n = init.len();
    if n == 0 {
        return domain("no parameters to fit");
    }
    let mut p = init.to_vec();
    let mut r = model.residuals(&p);
    let m = r.len();
    if m == 0 {
        return domain("no residuals");
    }
    if !all_finite(&r) {
        return domain("residuals are not finite at the initial point");
    }
    let two = T::lit(2.0);
    let mut cost = sum_sq(&r) / two;
    let mut jac = jacobian_of(model, &p, m);
    let mut gram = jac.gram();
    let mut grad = jac.transpose_mul(&r);
    let g0 = norm_inf(&grad);
    // Small relative to the starting gradient, or a full Gauss-Newton step
    // would lower the cost by less than `ftol` or move the parameters by
    // less than `xtol`. The last case covers starts already at the optimum,
    // where the residuals are rounding noise.
    let grad_ok = |g: &[T], gram: &Matrix<T>, cost: T, p: &[T]| {
        norm_inf(g) <= options.gtol * g0
            || cholesky(gram).is_some_and(|l| {
                let step = cholesky_solve(&l, g);
                let decrement = g.iter().zip(&step).fold(T::zero(), |s, (&a, &b)| s + a * b) / two;
                decrement <= options.ftol * cost
                    || sum_sq(&step).sqrt() <= options.xtol * (sum_sq(p).sqrt() + options.xtol)
            })
    };

    let max_diag = (0..n).fold(T::zero(), |a, i| a.max(gram.get(i, i)));
    let mut lambda = options.initial_damping * max_diag.max(T::min_positive_value());
    let mut nu = two;
    let mut n_iter = 0;
    let mut termination = Termination::Gradient;

    let mut done = g0 == T::zero();
    while !done {
        if n_iter >= options.max_iter {
            return Err(Error::NotConverged {
                iterations: n_iter,
                cost: cost.as_f64(),
                gradient: norm_inf(&grad).as_f64(),
            });
        }
        n_iter += 1;
        let neg_grad: Vec<T> = grad.iter().map(|&g| -g).collect();

        // Undamped Gauss-Newton trial.
        let mut accepted: Option<(Vec<T>, Vec<T>, T)> = None;
        if let Some(l) = cholesky(&gram) {
            let step = cholesky_solve(&l, &neg_grad);
            let trial: Vec<T> = p.iter().zip(&step).map(|(&a, &d)| a + d).collect();
            let r_new = model.residuals(&trial);
            if all_finite(&step) && all_finite(&r_new) {
                let c_new = sum_sq(&r_new) / two;
                let pred = predicted_decrease(&gram, &grad, &step);
                if pred > T::zero() && (cost - c_new) >= T::lit(0.75) * pred {
                    lambda = (lambda / T::lit(10.0)).max(T::min_positive_value());
                    nu = two;
                    accepted = Some((trial, r_new, c_new));
                }
            }
        }

        let mut small_step = false;
        if accepted.is_none() {
            loop {
                let mut damped = gram.clone();
                for i in 0..n {
                    let d = gram.get(i, i).max(T::epsilon() * max_diag.max(T::one()));
                    damped.set(i, i, gram.get(i, i) + lambda * d);
                }
                let step = match cholesky(&damped) {
                    Some(l) => cholesky_solve(&l, &neg_grad),
                    None => vec![T::nan(); n],
                };
                let step_norm = sum_sq(&step).sqrt();
                let p_norm = sum_sq(&p).sqrt();
                if step_norm.is_finite() && step_norm <= options.xtol * (p_norm + options.xtol) {
                    small_step = true;
                    break;
                }
                let trial: Vec<T> = p.iter().zip(&step).map(|(&a, &d)| a + d).collect();
                let r_new = model.residuals(&trial);
                let ok = all_finite(&step) && all_finite(&r_new);
                let c_new = if ok { sum_sq(&r_new) / two } else { T::infinity() };
                let pred = if ok {
                    predicted_decrease(&gram, &grad, &step)
                } else {
                    T::zero()
                };
                let rho = if pred > T::zero() { (cost - c_new) / pred } else { -T::one() };
                if rho > T::zero() {
                    let t = two * rho - T::one();
                    lambda = lambda * (T::one() / T::lit(3.0)).max(T::one() - t * t * t);
                    nu = two;
                    accepted = Some((trial, r_new, c_new));
                    break;
                }
                lambda = lambda * nu;
                nu = nu * two;
                if !lambda.is_finite() || lambda > T::max_value() / T::lit(1e10) {
                    return Err(Error::Singular {
                        lambda: lambda.as_f64(),
                    });
                }
            }
        }

        if small_step {
            termination = Termination::Step;
            break;
        }
        let (trial, r_new, c_new) = accepted.expect("accepted step");
        let step_norm = p
            .iter()
            .zip(&trial)
            .fold(T::zero(), |s, (&a, &b)| s + (b - a) * (b - a))
            .sqrt();
        let p_norm = sum_sq(&p).sqrt();
        let cost_drop = cost - c_new;
        let prev_cost = cost;
        p = trial;
        r = r_new;
        cost = c_new;
        jac = jacobian_of(model, &p, m);
        gram = jac.gram();
        grad = jac.transpose_mul(&r);

        if grad_ok(&grad, &gram, cost, &p) {
            termination = Termination::Gradient;
            done = true;
        } else if step_norm <= options.xtol * (p_norm + options.xtol) {
            termination = Termination::Step;
            done = true;
        } else if cost_drop <= options.ftol * prev_cost {
            termination = Termination::Cost;
            done = true;
        }
    }

    let dof = m.saturating_sub(n);
    let residual_norm = two * cost;
    let scale = if dof > 0 {
        residual_norm / T::count(dof)
    } else {
        T::one()
    };
    let sigmas: Vec<T> = match spd_inverse(&gram) {
        Some(cov) => (0..n).map(|i| (cov.get(i, i) * scale).max(T::zero()).sqrt()).collect(),
        None => vec![T::infinity(); n],
    };
    let relative_gradient = if g0 > T::zero() {
        norm_inf(&grad) / g0
    } else {
        T::zero()
    };
    Ok(FitResult {
        params: p
            .iter()
            .zip(sigmas)
            .enumerate()
            .map(|(i, (&value, sigma))| FitParam {
                name: format!("p{i}"),
                value,
                sigma,
            })
            .collect(),
        residual_norm,
        n_iter,
        converged: grad_ok(&grad, &gram, cost, &p),
        termination,
        relative_gradient,
        dof,
    })
}
