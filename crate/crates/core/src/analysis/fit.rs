//! Weighted Levenberg–Marquardt fit of the pump-power curve
//! `R±(P) = L + (1 − L)·exp(±2√(a·P))`.
//!
//! The fit runs over `(L, s)` with `a = s²`, which keeps `a` positive and
//! makes the model linear in `s` inside the exponent. Covariances are
//! reported for `(L, a)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaussian::{linear_to_db, Branch, PumpCurveModel, PumpParams};

const L_MAX: f64 = 1.0 - 1e-9;
const S_MIN: f64 = 1e-12;

/// One measured level. `level` is linear relative noise power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub pump_w: f64,
    pub level: f64,
    pub branch: Branch,
    /// Standard deviation of the level in dB.
    pub sigma_db: f64,
}

impl FitPoint {
    pub fn from_db(pump_w: f64, level_db: f64, branch: Branch, sigma_db: f64) -> Self {
        Self {
            pump_w,
            level: 10f64.powf(level_db / 10.0),
            branch,
            sigma_db,
        }
    }

    fn sigma_linear(&self) -> f64 {
        self.level * std::f64::consts::LN_10 / 10.0 * self.sigma_db
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// One `(L, a)` for both branches.
    #[default]
    Shared,
    /// Each branch fitted on its own.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub coupling: Coupling,
    pub max_iterations: usize,
    /// Initial `L` values; the start with the lowest final cost wins.
    pub l_starts: Vec<f64>,
    /// Relative step size at which the iteration stops.
    pub step_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            coupling: Coupling::Shared,
            max_iterations: 500,
            l_starts: vec![0.05, 0.3, 0.6],
            step_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 3 points at 2 distinct pump powers, got {points} points at {distinct} powers")]
    TooFewPoints { points: usize, distinct: usize },
    #[error("point {index}: {reason}")]
    InvalidPoint { index: usize, reason: &'static str },
    #[error("no convergence after {iterations} iterations (last L = {big_l}, a = {a_coeff}, chi2 = {chi_squared})")]
    NonConvergence {
        iterations: usize,
        big_l: f64,
        a_coeff: f64,
        chi_squared: f64,
    },
}

/// Parameters from one least-squares problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub big_l: f64,
    pub a_coeff: f64,
    /// Covariance of `(L, a)` with absolute sigmas.
    pub covariance: [[f64; 2]; 2],
    /// Of `JᵀWJ` at the optimum, in `(L, s)` coordinates.
    pub condition_number: f64,
    pub chi_squared: f64,
    pub iterations: usize,
    pub points: usize,
}

impl ParamEstimate {
    pub fn sigma_l(&self) -> f64 {
        self.covariance[0][0].sqrt()
    }

    pub fn sigma_a(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }

    pub fn params(&self) -> PumpParams {
        PumpParams {
            big_l: self.big_l,
            a_coeff: self.a_coeff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coupling", rename_all = "snake_case")]
pub enum FitEstimates {
    Shared(ParamEstimate),
    Independent {
        anti_squeezing: ParamEstimate,
        squeezing: ParamEstimate,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResidual {
    pub pump_w: f64,
    pub branch: Branch,
    pub measured_db: f64,
    pub model_db: f64,
    /// `(measured − model) / σ` in linear units.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezeFitResult {
    pub estimates: FitEstimates,
    pub residuals: Vec<FitResidual>,
}

impl SqueezeFitResult {
    /// Shared `L`, or the squeezing-branch value in independent mode.
    pub fn big_l(&self) -> f64 {
        self.primary().big_l
    }

    pub fn a_coeff(&self) -> f64 {
        self.primary().a_coeff
    }

    fn primary(&self) -> &ParamEstimate {
        match &self.estimates {
            FitEstimates::Shared(p) => p,
            FitEstimates::Independent { squeezing, .. } => squeezing,
        }
    }

    pub fn model(&self) -> PumpCurveModel {
        match &self.estimates {
            FitEstimates::Shared(p) => PumpCurveModel::Shared(p.params()),
            FitEstimates::Independent {
                anti_squeezing,
                squeezing,
            } => PumpCurveModel::Independent {
                anti: anti_squeezing.params(),
                squeeze: squeezing.params(),
            },
        }
    }
}

pub fn fit_pump_curve(points: &[FitPoint], opts: &FitOptions) -> Result<SqueezeFitResult, FitError> {
    for (index, p) in points.iter().enumerate() {
        let reason = if !(p.pump_w >= 0.0 && p.pump_w.is_finite()) {
            Some("pump power must be finite and non-negative")
        } else if !(p.level > 0.0 && p.level.is_finite()) {
            Some("level must be positive")
        } else if !(p.sigma_db > 0.0 && p.sigma_db.is_finite()) {
            Some("sigma_db must be positive")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(FitError::InvalidPoint { index, reason });
        }
    }
    check_coverage(points)?;

    let estimates = match opts.coupling {
        Coupling::Shared => FitEstimates::Shared(fit_subset(points, opts)?),
        Coupling::Independent => {
            let split = |b: Branch| -> Vec<FitPoint> {
                points.iter().copied().filter(|p| p.branch == b).collect()
            };
            let anti = split(Branch::AntiSqueezing);
            let sq = split(Branch::Squeezing);
            check_coverage(&anti)?;
            check_coverage(&sq)?;
            FitEstimates::Independent {
                anti_squeezing: fit_subset(&anti, opts)?,
                squeezing: fit_subset(&sq, opts)?,
            }
        }
    };
    let mut result = SqueezeFitResult {
        estimates,
        residuals: Vec::new(),
    };
    let model = result.model();
    result.residuals = points
        .iter()
        .map(|p| {
            let m = model.params(p.branch);
            let y = eval(m.big_l, m.a_coeff.sqrt(), p);
            FitResidual {
                pump_w: p.pump_w,
                branch: p.branch,
                measured_db: linear_to_db(p.level),
                model_db: linear_to_db(y),
                normalized: (p.level - y) / p.sigma_linear(),
            }
        })
        .collect();
    Ok(result)
}

fn check_coverage(points: &[FitPoint]) -> Result<(), FitError> {
    let mut pumps: Vec<f64> = points.iter().map(|p| p.pump_w).collect();
    pumps.sort_by(f64::total_cmp);
    pumps.dedup();
    if points.len() < 3 || pumps.len() < 2 {
        return Err(FitError::TooFewPoints {
            points: points.len(),
            distinct: pumps.len(),
        });
    }
    Ok(())
}

fn eval(l: f64, s: f64, p: &FitPoint) -> f64 {
    l + (1.0 - l) * (2.0 * p.branch.sign() * s * p.pump_w.sqrt()).exp()
}

/// Residuals `(y − R)/σ` and Jacobian rows `∂R/∂(L, s) / σ`.
fn linearize(points: &[FitPoint], l: f64, s: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
    points
        .iter()
        .map(|p| {
            let sig = p.sigma_linear();
            let sq = p.pump_w.sqrt();
            let e = (2.0 * p.branch.sign() * s * sq).exp();
            let r = (p.level - (l + (1.0 - l) * e)) / sig;
            let j = [(1.0 - e) / sig, (1.0 - l) * e * 2.0 * p.branch.sign() * sq / sig];
            (r, j)
        })
        .unzip()
}

fn cost(points: &[FitPoint], l: f64, s: f64) -> f64 {
    points
        .iter()
        .map(|p| ((p.level - eval(l, s, p)) / p.sigma_linear()).powi(2))
        .sum()
}

fn normal_equations(res: &[f64], jac: &[[f64; 2]]) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut a = [[0.0; 2]; 2];
    let mut g = [0.0; 2];
    for (r, j) in res.iter().zip(jac) {
        for u in 0..2 {
            g[u] += j[u] * r;
            for v in 0..2 {
                a[u][v] += j[u] * j[v];
            }
        }
    }
    (a, g)
}

fn solve2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    Some([
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ])
}

fn condition_number(a: [[f64; 2]; 2]) -> f64 {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let hi = 0.5 * tr + disc;
    let lo = 0.5 * tr - disc;
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// `s₀` from `ln((y − L₀)/(1 − L₀)) = ±2s√P`, least squares through the
/// origin, using the anti-squeezing points when there are any.
fn initial_s(points: &[FitPoint], l0: f64) -> f64 {
    let has_anti = points.iter().any(|p| p.branch == Branch::AntiSqueezing);
    let (mut num, mut den) = (0.0, 0.0);
    for p in points {
        if has_anti && p.branch != Branch::AntiSqueezing {
            continue;
        }
        let u = (p.level - l0) / (1.0 - l0);
        if p.pump_w > 0.0 && u > 0.0 {
            let x = 2.0 * p.branch.sign() * p.pump_w.sqrt();
            num += x * u.ln();
            den += x * x;
        }
    }
    let s = if den > 0.0 { num / den } else { 1.0 };
    if s.is_finite() && s > S_MIN {
        s
    } else {
        1.0
    }
}

struct Run {
    l: f64,
    s: f64,
    cost: f64,
    iterations: usize,
    converged: bool,
}

fn run_lm(points: &[FitPoint], l0: f64, opts: &FitOptions) -> Run {
    let mut l = l0.clamp(0.0, L_MAX);
    let mut s = initial_s(points, l);
    let mut c = cost(points, l, s);
    let mut lambda = 1e-3;
    for it in 1..=opts.max_iterations {
        let (res, jac) = linearize(points, l, s);
        let (a, g) = normal_equations(&res, &jac);
        if g[0].abs().max(g[1].abs()) < 1e-14 * (1.0 + c) {
            return Run { l, s, cost: c, iterations: it, converged: true };
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let damped = [
                [a[0][0] * (1.0 + lambda), a[0][1]],
                [a[1][0], a[1][1] * (1.0 + lambda)],
            ];
            let Some(step) = solve2(damped, g) else {
                lambda *= 10.0;
                continue;
            };
            let nl = (l + step[0]).clamp(0.0, L_MAX);
            let ns = (s + step[1]).max(S_MIN);
            let nc = cost(points, nl, ns);
            if nc.is_finite() && nc <= c {
                let rel = ((nl - l).abs() / (l.abs() + 1e-12)).max((ns - s).abs() / s);
                let small_gain = c - nc <= 1e-15 * c;
                l = nl;
                s = ns;
                c = nc;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                if rel < opts.step_tolerance || small_gain || c < 1e-28 {
                    return Run { l, s, cost: c, iterations: it, converged: true };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step at any damping: a stationary point
            return Run { l, s, cost: c, iterations: it, converged: true };
        }
    }
    Run {
        l,
        s,
        cost: c,
        iterations: opts.max_iterations,
        converged: false,
    }
}

fn fit_subset(points: &[FitPoint], opts: &FitOptions) -> Result<ParamEstimate, FitError> {
    let runs: Vec<Run> = opts.l_starts.iter().map(|&l0| run_lm(points, l0, opts)).collect();
    let best = runs
        .iter()
        .filter(|r| r.converged)
        .min_by(|x, y| x.cost.total_cmp(&y.cost));
    let Some(best) = best else {
        let last = runs
            .iter()
            .min_by(|x, y| x.cost.total_cmp(&y.cost))
            .map_or((f64::NAN, f64::NAN, f64::NAN), |r| (r.l, r.s * r.s, r.cost));
        return Err(FitError::NonConvergence {
            iterations: opts.max_iterations,
            big_l: last.0,
            a_coeff: last.1,
            chi_squared: last.2,
        });
    };

    let (_, jac) = linearize(points, best.l, best.s);
    let (info, _) = normal_equations(&vec![0.0; jac.len()], &jac);
    let covariance = match solve2(info, [1.0, 0.0]).zip(solve2(info, [0.0, 1.0])) {
        Some((c0, c1)) => {
            // (L, s) -> (L, a = s²)
            let d = 2.0 * best.s;
            [[c0[0], d * c1[0]], [d * c0[1], d * d * c1[1]]]
        }
        None => [[f64::INFINITY; 2]; 2],
    };
    Ok(ParamEstimate {
        big_l: best.l,
        a_coeff: best.s * best.s,
        covariance,
        condition_number: condition_number(info),
        chi_squared: best.cost,
        iterations: best.iterations,
        points: points.len(),
    })
}
