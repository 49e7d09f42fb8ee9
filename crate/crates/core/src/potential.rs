//! Stationary polynomial potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PhysicalConstants;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Free,
    /// `½ m ω² x²`; the mass is captured at construction.
    Harmonic { omega: f64, mass: f64 },
    /// `Σ c_k x^k`, lowest order first.
    Polynomial { coefficients: Vec<f64> },
}

impl Potential {
    pub fn harmonic(omega: f64, constants: &PhysicalConstants) -> Result<Self> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::InvalidPotential(format!("omega must be finite and non-negative, got {omega}")));
        }
        Ok(Potential::Harmonic { omega, mass: constants.mass })
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("coefficients must be finite".into()));
        }
        Ok(Potential::Polynomial { coefficients })
    }

    /// `λ x⁴`.
    pub fn quartic(lambda: f64) -> Result<Self> {
        Self::polynomial(vec![0.0, 0.0, 0.0, 0.0, lambda])
    }

    /// Equivalent coefficient list (`free` is the empty polynomial).
    pub fn coefficients(&self) -> Vec<f64> {
        match self {
            Potential::Free => Vec::new(),
            Potential::Harmonic { omega, mass } => vec![0.0, 0.0, 0.5 * mass * omega * omega],
            Potential::Polynomial { coefficients } => coefficients.clone(),
        }
    }

    pub fn to_polynomial(&self) -> Potential {
        Potential::Polynomial { coefficients: self.coefficients() }
    }

    /// True when the potential is at most quadratic, so the action is a
    /// quadratic form in the path positions.
    pub fn is_quadratic(&self) -> bool {
        match self {
            Potential::Free | Potential::Harmonic { .. } => true,
            Potential::Polynomial { coefficients } => {
                coefficients.iter().skip(3).all(|&c| c == 0.0)
            }
        }
    }

    /// Same family scaled by `s` (used by the homotopy fallback).
    pub fn scaled(&self, s: f64) -> Potential {
        match self {
            Potential::Free => Potential::Free,
            Potential::Harmonic { omega, mass } => Potential::Harmonic { omega: omega * s.sqrt(), mass: *mass },
            Potential::Polynomial { coefficients } => Potential::Polynomial {
                coefficients: coefficients.iter().map(|c| c * s).collect(),
            },
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Harmonic { omega, mass } => 0.5 * mass * omega * omega * x * x,
            Potential::Polynomial { coefficients } => horner(coefficients, x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Harmonic { omega, mass } => mass * omega * omega * x,
            Potential::Polynomial { coefficients } => {
                let d: Vec<f64> = coefficients
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| k as f64 * c)
                    .collect();
                horner(&d, x)
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Harmonic { omega, mass } => mass * omega * omega,
            Potential::Polynomial { coefficients } => {
                let d: Vec<f64> = coefficients
                    .iter()
                    .enumerate()
                    .skip(2)
                    .map(|(k, c)| (k * (k - 1)) as f64 * c)
                    .collect();
                horner(&d, x)
            }
        }
    }
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub fn eval_potential(p: &Potential, x: f64) -> f64 {
    p.value(x)
}

pub fn eval_potential_derivative(p: &Potential, x: f64) -> f64 {
    p.derivative(x)
}
