//! Entangled value of a symmetric XOR game: the maximum modulus on the unit
//! circle of `Q(λ) = Σ (-1)^{G_j} p_j λ^j`.

use crate::combinatorics::{weights, WeightVector};
use crate::error::{Error, Result};
use crate::game::SymmetricGame;
use crate::trig_max::{certified_max, CircleFunction, Shape};

pub use crate::trig_max::ValueEnclosure;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Signed weighted polynomial `Σ q_j λ^j` with `q_j = ±p_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePolynomial {
    coefficients: Vec<f64>,
}

impl CirclePolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    fn function(&self) -> CircleFunction<'_> {
        CircleFunction::new(&self.coefficients, Shape::Complex)
    }
}

pub fn build_polynomial(g: &SymmetricGame, w: &WeightVector) -> Result<CirclePolynomial> {
    if g.n() != w.n() {
        return Err(Error::DimensionMismatch {
            game: g.n(),
            weights: w.n(),
        });
    }
    let coefficients = w
        .p()
        .iter()
        .zip(g.bits())
        .map(|(&p, &bit)| if bit { -p } else { p })
        .collect();
    Ok(CirclePolynomial { coefficients })
}

/// `|Q(e^{iα})|`.
pub fn eval_magnitude(poly: &CirclePolynomial, angle: f64) -> f64 {
    poly.function().value(angle).norm()
}

pub fn global_max(poly: &CirclePolynomial, tol: f64) -> Result<ValueEnclosure> {
    certified_max(&poly.function(), tol)
}

/// Entangled value (bias convention: win probability minus loss probability).
pub fn entangled_value(g: &SymmetricGame, tol: f64) -> Result<ValueEnclosure> {
    let w = weights(g.n())?;
    global_max(&build_polynomial(g, &w)?, tol)
}

/// `(1 + bias) / 2`.
pub fn win_probability(bias: f64) -> f64 {
    0.5 * (1.0 + bias)
}
