//! Derivative-free COBYLA and gradient-based ADAM.
//!
//! The COBYLA here is Powell's algorithm restricted to the unconstrained case:
//! a simplex of `n + 1` evaluated points defines a linear model, steps of
//! length `rho` are taken along the model's steepest descent, badly shaped
//! simplices are repaired by geometry steps, and `rho` is halved (snapping to
//! `rhoend` once within a factor 1.5) whenever no further progress is made at
//! the current radius.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptStatus {
    Converged,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Point held by the optimiser when it stopped (ADAM's last iterate,
    /// COBYLA's pole vertex).
    pub final_point: Vec<f64>,
    pub n_evaluations: usize,
    /// `(evaluation or step index, objective value)`.
    pub history: Vec<(usize, f64)>,
    pub status: OptStatus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CobylaConfig {
    pub rhobeg: f64,
    pub rhoend: f64,
    pub max_evals: usize,
}

impl Default for CobylaConfig {
    fn default() -> Self {
        Self {
            rhobeg: 1.0,
            rhoend: 1e-4,
            max_evals: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub n_steps: usize,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            n_steps: 1000,
        }
    }
}

/// Counts evaluations, records history and keeps the best point seen.
struct Tracker<F> {
    objective: F,
    max_evals: usize,
    history: Vec<(usize, f64)>,
    best_point: Vec<f64>,
    best_value: f64,
}

impl<F: FnMut(&[f64]) -> f64> Tracker<F> {
    fn exhausted(&self) -> bool {
        self.history.len() >= self.max_evals
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        let value = (self.objective)(x);
        if !value.is_finite() {
            return Err(Error::Objective {
                value,
                point: x.to_vec(),
            });
        }
        self.history.push((self.history.len(), value));
        if value < self.best_value {
            self.best_value = value;
            self.best_point.clear();
            self.best_point.extend_from_slice(x);
        }
        Ok(value)
    }
}

/// Row-major `n x n` matrix.
struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    fn diagonal(n: usize, value: f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = value;
        }
        Self { n, data }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Simplex state. `sim` column `j` is vertex `j` minus the pole; `simi` is its
/// inverse, so row `j` of `simi` is the dual vector of edge `j`.
struct Simplex {
    n: usize,
    pole: Vec<f64>,
    f_pole: f64,
    sim: Square,
    simi: Square,
    f_vertex: Vec<f64>,
}

impl Simplex {
    /// Replaces edge `j` by `dx` and updates the inverse with a rank-one
    /// (Sherman-Morrison) correction.
    fn replace_edge(&mut self, j: usize, dx: &[f64]) {
        let n = self.n;
        for (i, &d) in dx.iter().enumerate() {
            self.sim.set(i, j, d);
        }
        let pivot = dot(self.simi.row(j), dx);
        for i in 0..n {
            let v = self.simi.at(j, i) / pivot;
            self.simi.set(j, i, v);
        }
        let row_j: Vec<f64> = self.simi.row(j).to_vec();
        for k in 0..n {
            if k == j {
                continue;
            }
            let t = dot(self.simi.row(k), dx);
            for i in 0..n {
                let v = self.simi.at(k, i) - t * row_j[i];
                self.simi.set(k, i, v);
            }
        }
    }

    /// Moves the lowest vertex into the pole position.
    fn promote_best(&mut self) {
        let n = self.n;
        let mut best = None;
        let mut f_min = self.f_pole;
        for j in 0..n {
            if self.f_vertex[j] < f_min {
                best = Some(j);
                f_min = self.f_vertex[j];
            }
        }
        let Some(b) = best else { return };
        core::mem::swap(&mut self.f_vertex[b], &mut self.f_pole);
        let shift: Vec<f64> = (0..n).map(|i| self.sim.at(i, b)).collect();
        for i in 0..n {
            self.pole[i] += shift[i];
            for k in 0..n {
                let v = self.sim.at(i, k) - shift[i];
                self.sim.set(i, k, v);
            }
            self.sim.set(i, b, -shift[i]);
        }
        // new row b of the inverse is minus the column sums of the old inverse
        for i in 0..n {
            let s: f64 = (0..n).map(|k| self.simi.at(k, i)).sum();
            self.simi.set(b, i, -s);
        }
    }

    /// Gradient of the linear interpolant through the simplex.
    fn model_gradient(&self) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n];
        for j in 0..n {
            let w = self.f_vertex[j] - self.f_pole;
            for (i, gi) in g.iter_mut().enumerate() {
                *gi += w * self.simi.at(j, i);
            }
        }
        g
    }

    /// Max-abs deviation of `simi * sim` from the identity.
    fn inverse_error(&self) -> f64 {
        let n = self.n;
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut t = if i == j { -1.0 } else { 0.0 };
                for k in 0..n {
                    t += self.simi.at(i, k) * self.sim.at(k, j);
                }
                err = err.max(t.abs());
            }
        }
        err
    }
}

const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

/// Minimises `objective` from `x0` with COBYLA.
///
/// Never calls `objective` more than `cfg.max_evals` times and is fully
/// deterministic.
pub fn cobyla_minimize<F>(objective: F, x0: &[f64], cfg: &CobylaConfig) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::Argument("COBYLA needs at least one variable".into()));
    }
    if !(cfg.rhoend > 0.0 && cfg.rhobeg > cfg.rhoend && cfg.rhobeg.is_finite()) {
        return Err(Error::Argument(alloc::format!(
            "need 0 < rhoend < rhobeg, got rhobeg={} rhoend={}",
            cfg.rhobeg,
            cfg.rhoend
        )));
    }
    if cfg.max_evals < n + 2 {
        return Err(Error::Argument(alloc::format!(
            "max_evals {} is below dimension + 2 = {}",
            cfg.max_evals,
            n + 2
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("x0 contains non-finite values".into()));
    }

    let mut tracker = Tracker {
        objective,
        max_evals: cfg.max_evals,
        history: Vec::with_capacity(cfg.max_evals),
        best_point: x0.to_vec(),
        best_value: f64::INFINITY,
    };

    let mut rho = cfg.rhobeg;
    let f0 = tracker.eval(x0)?;
    let mut s = Simplex {
        n,
        pole: x0.to_vec(),
        f_pole: f0,
        sim: Square::diagonal(n, rho),
        simi: Square::diagonal(n, 1.0 / rho),
        f_vertex: vec![0.0; n],
    };

    // initial simplex; a better vertex immediately becomes the pole
    let mut x = vec![0.0; n];
    for j in 0..n {
        x.copy_from_slice(&s.pole);
        x[j] += rho;
        let f = tracker.eval(&x)?;
        if f < s.f_pole {
            s.f_vertex[j] = s.f_pole;
            s.f_pole = f;
            s.pole[j] = x[j];
            for k in 0..=j {
                s.sim.set(j, k, -rho);
            }
            for k in 0..=j {
                let t: f64 = (k..=j).map(|i| s.simi.at(i, k)).sum();
                s.simi.set(j, k, -t);
            }
        } else {
            s.f_vertex[j] = f;
        }
    }

    let mut trust_branch = true;
    let mut status = OptStatus::Converged;
    let mut iterations = 0usize;
    let mut dx = vec![0.0; n];
    let mut vsig = vec![0.0; n];
    let mut veta = vec![0.0; n];

    'outer: loop {
        s.promote_best();
        iterations += 1;
        // the rank-one updates drift slowly; check the inverse now and then
        if iterations.is_multiple_of(n.max(8)) && s.inverse_error() > 0.1 {
            break;
        }

        let g = s.model_gradient();
        let par_sig = ALPHA * rho;
        let par_eta = BETA * rho;
        let mut acceptable = true;
        for j in 0..n {
            let wsig: f64 = s.simi.row(j).iter().map(|v| v * v).sum();
            let weta: f64 = (0..n).map(|i| s.sim.at(i, j) * s.sim.at(i, j)).sum();
            vsig[j] = 1.0 / libm::sqrt(wsig);
            veta[j] = libm::sqrt(weta);
            if vsig[j] < par_sig || veta[j] > par_eta {
                acceptable = false;
            }
        }

        if !trust_branch && !acceptable {
            // geometry step: replace the worst-shaped edge
            let mut jdrop = None;
            let mut worst = par_eta;
            for j in 0..n {
                if veta[j] > worst {
                    jdrop = Some(j);
                    worst = veta[j];
                }
            }
            if jdrop.is_none() {
                for j in 0..n {
                    if vsig[j] < worst {
                        jdrop = Some(j);
                        worst = vsig[j];
                    }
                }
            }
            let jdrop = jdrop.unwrap_or(0);
            let scale = GAMMA * rho * vsig[jdrop];
            for i in 0..n {
                dx[i] = scale * s.simi.at(jdrop, i);
            }
            // point it downhill according to the model
            if dot(&g, &dx) > 0.0 {
                dx.iter_mut().for_each(|v| *v = -*v);
            }
            s.replace_edge(jdrop, &dx);
            if tracker.exhausted() {
                status = OptStatus::BudgetExhausted;
                break;
            }
            for i in 0..n {
                x[i] = s.pole[i] + dx[i];
            }
            s.f_vertex[jdrop] = tracker.eval(&x)?;
            trust_branch = true;
            continue;
        }

        let g_norm = libm::sqrt(dot(&g, &g));
        let mut shrink = true;
        if g_norm > 0.0 {
            for i in 0..n {
                dx[i] = -rho * g[i] / g_norm;
            }
            let mut predicted = rho * g_norm;
            if tracker.exhausted() {
                status = OptStatus::BudgetExhausted;
                break;
            }
            for i in 0..n {
                x[i] = s.pole[i] + dx[i];
            }
            let f = tracker.eval(&x)?;
            trust_branch = true;
            let mut actual = s.f_pole - f;
            if f == s.f_pole {
                predicted = 0.0;
                actual = 0.0;
            }

            let mut ratio: f64 = if actual <= 0.0 { 1.0 } else { 0.0 };
            let mut jdrop = None;
            let mut sigbar = vec![0.0; n];
            for j in 0..n {
                let t = dot(s.simi.row(j), &dx).abs();
                if t > ratio {
                    jdrop = Some(j);
                    ratio = t;
                }
                sigbar[j] = t * vsig[j];
            }
            let mut edge_max = DELTA * rho;
            let mut far = None;
            for j in 0..n {
                if sigbar[j] >= par_sig || sigbar[j] >= vsig[j] {
                    let mut dist = veta[j];
                    if actual > 0.0 {
                        dist = libm::sqrt(
                            (0..n)
                                .map(|i| {
                                    let e = dx[i] - s.sim.at(i, j);
                                    e * e
                                })
                                .sum(),
                        );
                    }
                    if dist > edge_max {
                        far = Some(j);
                        edge_max = dist;
                    }
                }
            }
            if far.is_some() {
                jdrop = far;
            }
            if let Some(j) = jdrop {
                s.replace_edge(j, &dx);
                s.f_vertex[j] = f;
                if actual > 0.0 && actual >= 0.1 * predicted {
                    shrink = false;
                }
            }
        }

        if shrink {
            if !acceptable {
                trust_branch = false;
                continue 'outer;
            }
            if rho > cfg.rhoend {
                rho *= 0.5;
                if rho <= 1.5 * cfg.rhoend {
                    rho = cfg.rhoend;
                }
                continue 'outer;
            }
            break;
        }
    }

    Ok(OptResult {
        best_point: tracker.best_point,
        best_value: tracker.best_value,
        final_point: s.pole,
        n_evaluations: tracker.history.len(),
        history: tracker.history,
        status,
    })
}

/// ADAM on a function that returns its value and gradient together.
///
/// The value at every iterate is recorded; the final iterate is evaluated
/// once more so the best point covers it too.
pub fn adam_minimize_fused<F>(mut value_and_grad: F, x0: &[f64], cfg: &AdamConfig) -> Result<OptResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    if !(0.0..1.0).contains(&cfg.beta1) || !(0.0..1.0).contains(&cfg.beta2) {
        return Err(Error::Argument(alloc::format!(
            "betas must lie in [0, 1), got {} and {}",
            cfg.beta1,
            cfg.beta2
        )));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut history = Vec::with_capacity(cfg.n_steps + 1);
    let mut best_point = x.clone();
    let mut best_value = f64::INFINITY;
    let mut b1_pow = 1.0;
    let mut b2_pow = 1.0;

    let mut evaluate = |x: &[f64], grad: &mut [f64], step: usize, history: &mut Vec<(usize, f64)>| -> Result<f64> {
        let value = value_and_grad(x, grad);
        if !value.is_finite() {
            return Err(Error::Objective {
                value,
                point: x.to_vec(),
            });
        }
        if let Some(bad) = grad.iter().find(|g| !g.is_finite()) {
            return Err(Error::Objective {
                value: *bad,
                point: x.to_vec(),
            });
        }
        history.push((step, value));
        Ok(value)
    };

    for step in 0..cfg.n_steps {
        let value = evaluate(&x, &mut grad, step, &mut history)?;
        if value < best_value {
            best_value = value;
            best_point.copy_from_slice(&x);
        }
        b1_pow *= cfg.beta1;
        b2_pow *= cfg.beta2;
        for i in 0..n {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let m_hat = m[i] / (1.0 - b1_pow);
            let v_hat = v[i] / (1.0 - b2_pow);
            x[i] -= cfg.learning_rate * m_hat / (libm::sqrt(v_hat) + cfg.epsilon);
        }
    }
    let value = evaluate(&x, &mut grad, cfg.n_steps, &mut history)?;
    if value < best_value {
        best_value = value;
        best_point.copy_from_slice(&x);
    }

    Ok(OptResult {
        best_point,
        best_value,
        final_point: x,
        n_evaluations: history.len(),
        history,
        status: OptStatus::BudgetExhausted,
    })
}

/// ADAM with separate gradient and objective callbacks.
pub fn adam_minimize<G, F>(mut gradient: G, mut objective: F, x0: &[f64], cfg: &AdamConfig) -> Result<OptResult>
where
    G: FnMut(&[f64]) -> Vec<f64>,
    F: FnMut(&[f64]) -> f64,
{
    adam_minimize_fused(
        |x, grad| {
            let g = gradient(x);
            for (dst, src) in grad.iter_mut().zip(g.iter().chain(core::iter::repeat(&f64::NAN))) {
                *dst = *src;
            }
            objective(x)
        },
        x0,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn cobyla_sphere() {
        let cfg = CobylaConfig {
            rhobeg: 0.5,
            rhoend: 1e-6,
            max_evals: 500,
        };
        let r = cobyla_minimize(sphere, &[1.0, 1.0], &cfg).unwrap();
        assert!(r.best_value <= 1e-8, "{r:?}");
        assert!(r.n_evaluations <= 500);
    }

    #[test]
    fn cobyla_cosine() {
        let cfg = CobylaConfig {
            max_evals: 200,
            ..CobylaConfig::default()
        };
        let r = cobyla_minimize(|x| libm::cos(x[0]), &[0.1], &cfg).unwrap();
        assert!((r.best_point[0] - core::f64::consts::PI).abs() < 1e-3, "{r:?}");
        assert_eq!(r.status, OptStatus::Converged);
    }

    #[test]
    fn cobyla_respects_budget() {
        let cfg = CobylaConfig {
            rhobeg: 0.5,
            rhoend: 1e-12,
            max_evals: 37,
        };
        let mut calls = 0;
        let r = cobyla_minimize(
            |x| {
                calls += 1;
                (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
            },
            &[-1.2, 1.0],
            &cfg,
        )
        .unwrap();
        assert_eq!(calls, 37);
        assert_eq!(r.n_evaluations, 37);
        assert_eq!(r.status, OptStatus::BudgetExhausted);
    }

    #[test]
    fn cobyla_best_is_min_of_history() {
        let cfg = CobylaConfig {
            rhobeg: 0.5,
            rhoend: 1e-6,
            max_evals: 300,
        };
        let r = cobyla_minimize(
            |x| libm::sin(3.0 * x[0]) + x[1] * x[1] + 0.1 * x[2],
            &[0.3, 0.2, 0.1],
            &cfg,
        )
        .unwrap();
        let min = r.history.iter().map(|h| h.1).fold(f64::INFINITY, f64::min);
        assert_eq!(min, r.best_value);
        assert!(r.history.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn cobyla_nan_objective() {
        let cfg = CobylaConfig::default();
        let err = cobyla_minimize(|x| if x[0] > 0.5 { f64::NAN } else { x[0] }, &[0.0], &cfg).unwrap_err();
        match err {
            Error::Objective { point, .. } => assert!(point[0] > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cobyla_argument_checks() {
        let bad_rho = CobylaConfig {
            rhobeg: 1e-4,
            rhoend: 1e-2,
            max_evals: 100,
        };
        assert!(cobyla_minimize(sphere, &[1.0], &bad_rho).is_err());
        let tiny = CobylaConfig {
            max_evals: 3,
            ..CobylaConfig::default()
        };
        assert!(cobyla_minimize(sphere, &[1.0, 1.0], &tiny).is_err());
    }

    #[test]
    fn adam_sphere() {
        let cfg = AdamConfig {
            learning_rate: 0.1,
            n_steps: 500,
            ..AdamConfig::default()
        };
        let r = adam_minimize(|x| x.iter().map(|v| 2.0 * v).collect(), sphere, &[1.0, 1.0], &cfg).unwrap();
        assert!(r.best_value <= 1e-6, "{}", r.best_value);
    }

    #[test]
    fn adam_shifted_quadratic() {
        let cfg = AdamConfig {
            learning_rate: 0.05,
            n_steps: 2000,
            ..AdamConfig::default()
        };
        let r = adam_minimize(|x| vec![2.0 * (x[0] - 3.0)], |x| (x[0] - 3.0).powi(2), &[0.0], &cfg).unwrap();
        assert!((r.best_point[0] - 3.0).abs() < 1e-3, "{:?}", r.best_point);
    }

    #[test]
    fn adam_zero_gradient_is_stationary() {
        let cfg = AdamConfig {
            n_steps: 50,
            ..AdamConfig::default()
        };
        let r = adam_minimize(|_| vec![0.0, 0.0], |_| 1.0, &[0.25, -4.0], &cfg).unwrap();
        assert_eq!(r.final_point, [0.25, -4.0]);
    }

    #[test]
    fn adam_rejects_bad_betas() {
        let cfg = AdamConfig {
            beta1: 1.0,
            ..AdamConfig::default()
        };
        assert!(adam_minimize(|_| vec![0.0], |_| 0.0, &[0.0], &cfg).is_err());
    }
}
