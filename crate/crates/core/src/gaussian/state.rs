use serde::{Deserialize, Serialize};

use super::GaussianError;

/// Quadrature variance of the vacuum (shot-noise level).
pub const VACUUM_VARIANCE: f64 = 0.5;

const UNCERTAINTY_BOUND: f64 = 0.25;

/// First and second moments of one bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
}

pub fn vacuum() -> GaussianState {
    GaussianState::vacuum()
}

impl GaussianState {
    pub const fn vacuum() -> Self {
        Self {
            mean_x: 0.0,
            mean_p: 0.0,
            var_x: VACUUM_VARIANCE,
            var_p: VACUUM_VARIANCE,
            cov_xp: 0.0,
        }
    }

    /// Builds a state, rejecting covariances that are not positive or that
    /// violate `var_x·var_p − cov_xp² ≥ 1/4`.
    pub fn new(
        mean_x: f64,
        mean_p: f64,
        var_x: f64,
        var_p: f64,
        cov_xp: f64,
    ) -> Result<Self, GaussianError> {
        let state = Self {
            mean_x,
            mean_p,
            var_x,
            var_p,
            cov_xp,
        };
        if !(var_x > 0.0 && var_p > 0.0) {
            return Err(GaussianError::Domain {
                name: "variance",
                value: var_x.min(var_p),
                range: "(0, inf)",
            });
        }
        let det = state.determinant();
        if det < UNCERTAINTY_BOUND * (1.0 - 1e-12) {
            return Err(GaussianError::Unphysical { det });
        }
        Ok(state)
    }

    pub fn determinant(&self) -> f64 {
        self.var_x * self.var_p - self.cov_xp * self.cov_xp
    }

    /// True when the covariance satisfies the uncertainty bound up to a
    /// relative tolerance.
    pub fn is_physical(&self, rel_tol: f64) -> bool {
        self.var_x > 0.0
            && self.var_p > 0.0
            && self.determinant() >= UNCERTAINTY_BOUND * (1.0 - rel_tol)
    }

    /// `Var(X cosθ + P sinθ)`.
    pub fn quadrature_variance(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.var_x + s * s * self.var_p + 2.0 * s * c * self.cov_xp
    }

    /// `⟨X cosθ + P sinθ⟩`.
    pub fn quadrature_mean(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * self.mean_x + s * self.mean_p
    }

    /// Applies the real linear map `(X, P) → M (X, P)`.
    pub(crate) fn linear_map(&self, m: [[f64; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        Self {
            mean_x: a * self.mean_x + b * self.mean_p,
            mean_p: c * self.mean_x + d * self.mean_p,
            var_x: a * a * self.var_x + 2.0 * a * b * self.cov_xp + b * b * self.var_p,
            var_p: c * c * self.var_x + 2.0 * c * d * self.cov_xp + d * d * self.var_p,
            cov_xp: a * c * self.var_x + (a * d + b * c) * self.cov_xp + b * d * self.var_p,
        }
    }

    /// Mixes the state with vacuum on a beamsplitter of transmissivity `eta`.
    pub(crate) fn attenuate(&self, eta: f64) -> Self {
        let amp = eta.sqrt();
        let noise = (1.0 - eta) * VACUUM_VARIANCE;
        Self {
            mean_x: amp * self.mean_x,
            mean_p: amp * self.mean_p,
            var_x: eta * self.var_x + noise,
            var_p: eta * self.var_p + noise,
            cov_xp: eta * self.cov_xp,
        }
    }
}

impl Default for GaussianState {
    fn default() -> Self {
        Self::vacuum()
    }
}
