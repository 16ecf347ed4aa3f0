// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients and stopping rule of the simplex search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NelderMeadConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once `f_worst - f_best < epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { reflection: 1.0, expansion: 2.0, contraction: 0.5, shrink: 0.5, epsilon: 1e-10, max_iter: 2000 }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.reflection > 0.0
            && self.expansion > self.reflection.max(1.0)
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.epsilon >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid Nelder-Mead coefficients {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub f_best: f64,
    pub f_worst: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Whether the spread criterion was met before `max_iter`.
    pub converged: bool,
}

/// Axis-aligned simplex `x0, x0 + step e_1, ..., x0 + step e_n`.
pub fn coordinate_simplex(x0: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut s = vec![x0.to_vec()];
    for k in 0..x0.len() {
        let mut p = x0.to_vec();
        p[k] += step;
        s.push(p);
    }
    s
}

pub fn nelder_mead<F>(f: F, simplex: Vec<Vec<f64>>, config: &NelderMeadConfig) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    nelder_mead_with_history(f, simplex, config, |_| {})
}

/// Minimizes `f` starting from `simplex` (n+1 points in n dimensions),
/// reporting the simplex state after every ordering step.
pub fn nelder_mead_with_history<F, H>(
    mut f: F,
    simplex: Vec<Vec<f64>>,
    config: &NelderMeadConfig,
    mut history: H,
) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
    H: FnMut(&IterationRecord),
{
    config.validate()?;
    let n = simplex.len().saturating_sub(1);
    if n == 0 || simplex.iter().any(|p| p.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "simplex needs n+1 points of dimension n, got {} points",
            simplex.len()
        )));
    }
    let mut evaluations = 0usize;
    let mut eval = |p: &[f64]| -> Result<f64> {
        evaluations += 1;
        let v = f(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    };
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    for p in simplex {
        let v = eval(&p)?;
        pts.push((p, v));
    }

    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        // a + t (b - a)
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    let mut iter = 0;
    let converged = loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f1 = pts[0].1;
        let fn_ = pts[n - 1].1;
        let fw = pts[n].1;
        history(&IterationRecord { iter, f_best: f1, f_worst: fw, spread: fw - f1 });
        if fw - f1 < config.epsilon {
            break true;
        }
        if iter >= config.max_iter {
            break false;
        }
        iter += 1;

        let mut centroid = vec![0.0; n];
        for (p, _) in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let worst = pts[n].0.clone();
        let cr = combine(&centroid, &worst, -config.reflection);
        let fr = eval(&cr)?;

        if f1 <= fr && fr < fn_ {
            pts[n] = (cr, fr);
            continue;
        }
        if fr < f1 {
            let ce = combine(&centroid, &cr, config.expansion);
            let fe = eval(&ce)?;
            pts[n] = if fe < fr { (ce, fe) } else { (cr, fr) };
            continue;
        }
        if fr < fw {
            let coc = combine(&centroid, &cr, config.contraction);
            let foc = eval(&coc)?;
            if foc <= fr {
                pts[n] = (coc, foc);
                continue;
            }
        } else {
            let cic = combine(&centroid, &worst, config.contraction);
            let fic = eval(&cic)?;
            if fic < fw {
                pts[n] = (cic, fic);
                continue;
            }
        }
        let best = pts[0].0.clone();
        for entry in pts.iter_mut().skip(1) {
            let p = combine(&best, &entry.0, config.shrink);
            let v = eval(&p)?;
            *entry = (p, v);
        }
    };
    let (best_point, best_value) = pts.swap_remove(0);
    Ok(NelderMeadResult { best_point, best_value, iterations: iter, evaluations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let target = [0.3, -1.2, 2.0];
        let f = |x: &[f64]| x.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let cfg = NelderMeadConfig { epsilon: 1e-16, ..Default::default() };
        let r = nelder_mead(f, coordinate_simplex(&[0.0, 0.0, 0.0], 0.5), &cfg).unwrap();
        assert!(r.converged);
        for (a, b) in r.best_point.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rosenbrock_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let cfg = NelderMeadConfig { epsilon: 1e-14, max_iter: 5000, ..Default::default() };
        let r = nelder_mead(f, coordinate_simplex(&[-1.2, 1.0], 0.1), &cfg).unwrap();
        assert!((r.best_point[0] - 1.0).abs() < 1e-3 && (r.best_point[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn epsilon_stop_and_monotone_best() {
        let f = |x: &[f64]| x[0].powi(4) + (x[1] - 1.0).powi(2);
        let cfg = NelderMeadConfig { epsilon: 1e-4, ..Default::default() };
        let mut records = Vec::new();
        let r =
            nelder_mead_with_history(f, coordinate_simplex(&[2.0, 2.0], 1.0), &cfg, |rec| records.push(*rec)).unwrap();
        let last = records.last().unwrap();
        assert!(r.converged && last.spread < 1e-4);
        for w in records.windows(2) {
            assert!(w[1].f_best <= w[0].f_best);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let f = |_: &[f64]| f64::NAN;
        assert!(matches!(
            nelder_mead(f, coordinate_simplex(&[0.0], 1.0), &NelderMeadConfig::default()),
            Err(Error::NonFinite)
        ));
        let bad = NelderMeadConfig { expansion: 0.9, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(nelder_mead(|_| 0.0, vec![vec![0.0]], &NelderMeadConfig::default()).is_err());
    }
}
