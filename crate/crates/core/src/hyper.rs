//! Prior hyperparameters and the interval width.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Dim;

/// Gamma prior `(a, b)` on every block rate, symmetric Dirichlet
/// concentrations for the three label vectors, and the interval width `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Gamma shape.
    pub a: f64,
    /// Gamma rate.
    pub b: f64,
    /// Row concentration.
    pub alpha: f64,
    /// Column concentration.
    pub delta: f64,
    /// Time concentration.
    pub gamma: f64,
    /// Interval width.
    pub delta_t: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            alpha: 1.0,
            delta: 1.0,
            gamma: 1.0,
            delta_t: 1.0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("a", self.a),
            ("b", self.b),
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("delta_t", self.delta_t),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidHyperparameter { name, value });
            }
        }
        Ok(())
    }

    /// Dirichlet concentration for the labels of `dim`.
    pub fn concentration(&self, dim: Dim) -> f64 {
        match dim {
            Dim::Row => self.alpha,
            Dim::Col => self.delta,
            Dim::Time => self.gamma,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Hyperparams::default().validate().unwrap();
    }

    #[test]
    fn rejects_non_positive_or_nan() {
        let h = Hyperparams {
            b: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            h.validate(),
            Err(Error::InvalidHyperparameter { name: "b", .. })
        ));
        let h = Hyperparams {
            gamma: f64::NAN,
            ..Default::default()
        };
        assert!(h.validate().is_err());
    }
}
