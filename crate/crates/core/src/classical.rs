//! Classical value of a symmetric XOR game.
//!
//! A deterministic player answers `y_i = a_i ⊕ b_i x_i`. The output parity is
//! then `c ⊕ (parity of the inputs of the k players with b_i = 1)` with
//! `c = ⊕ a_i`. Averaging over inputs of weight `j` gives the bias
//!
//! ```text
//! B_k = 2^-n Σ_j (-1)^{G_j} K_k(j),   K_k(j) = Σ_i (-1)^i C(k,i) C(n-k, j-i)
//! ```
//!
//! and the classical value is `max_k |B_k|`, with `c = 1` when that bias is
//! negative. Shared randomness is a mixture of deterministic strategies and
//! cannot do better.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::combinatorics::{binomial, binomial_row, pow2_neg};
use crate::error::{Error, Result};
use crate::game::SymmetricGame;

/// Largest `n` accepted by [`brute_force_value`].
pub const BRUTE_FORCE_MAX_N: usize = 12;

/// `N / 2^n` as a double without overflowing the intermediate.
fn scaled_ratio(numerator: &BigInt, n: usize) -> f64 {
    let shift = n.saturating_sub(1000);
    let top = numerator >> shift;
    top.to_f64().expect("bounded by 2^1000") * pow2_neg(n - shift)
}

/// Rows `K_0 .. K_n` of the Krawtchouk kernel, each the coefficient list of
/// `(1 - z)^k (1 + z)^(n - k)`.
#[derive(Debug, Clone)]
pub struct KrawtchoukTable {
    n: usize,
    rows: Vec<Vec<BigInt>>,
}

impl KrawtchoukTable {
    pub fn new(n: usize) -> Self {
        let mut row: Vec<BigInt> = binomial_row(n)
            .coefficients()
            .iter()
            .map(|c| BigInt::from(c.clone()))
            .collect();
        let mut rows = Vec::with_capacity(n + 1);
        for _ in 0..n {
            rows.push(row.clone());
            // Divide by (1 + z), then multiply by (1 - z).
            let mut quotient = Vec::with_capacity(n);
            let mut prev = BigInt::zero();
            for coeff in &row[..n] {
                let q = coeff - &prev;
                quotient.push(q.clone());
                prev = q;
            }
            debug_assert_eq!(&row[n], &prev);
            let mut next = Vec::with_capacity(n + 1);
            let mut last = BigInt::zero();
            for q in quotient {
                next.push(&q - &last);
                last = q;
            }
            next.push(-last);
            row = next;
        }
        rows.push(row);
        Self { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, k: usize) -> &[BigInt] {
        &self.rows[k]
    }
}

/// `K_k(j)` by the defining alternating sum.
pub fn krawtchouk(n: usize, k: usize, j: usize) -> BigInt {
    let mut total = BigInt::zero();
    for i in 0..=k.min(j) {
        let term = BigInt::from(binomial(k, i) * binomial(n - k, j - i));
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn signed_sum(g: &SymmetricGame, row: &[BigInt]) -> BigInt {
    let mut acc = BigInt::zero();
    for (k, &bit) in row.iter().zip(g.bits()) {
        if bit {
            acc -= k;
        } else {
            acc += k;
        }
    }
    acc
}

/// Bias `B_k` of the strategy class with `k` input-dependent players and `c = 0`.
pub fn krawtchouk_bias(g: &SymmetricGame, k: usize) -> Result<f64> {
    let n = g.n();
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    let row: Vec<BigInt> = (0..=n).map(|j| krawtchouk(n, k, j)).collect();
    Ok(scaled_ratio(&signed_sum(g, &row), n))
}

/// All biases `B_0 .. B_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasProfile {
    pub n: usize,
    pub biases: Vec<f64>,
    numerators: Vec<BigInt>,
}

pub fn bias_profile(g: &SymmetricGame) -> BiasProfile {
    bias_profile_with(g, &KrawtchoukTable::new(g.n()))
}

pub fn bias_profile_with(g: &SymmetricGame, table: &KrawtchoukTable) -> BiasProfile {
    assert_eq!(g.n(), table.n(), "table built for a different n");
    let numerators: Vec<BigInt> = (0..=g.n()).map(|k| signed_sum(g, table.row(k))).collect();
    let biases = numerators
        .iter()
        .map(|num| scaled_ratio(num, g.n()))
        .collect();
    BiasProfile {
        n: g.n(),
        biases,
        numerators,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalValue {
    pub value: f64,
    /// Number of players whose answer depends on their input.
    pub best_k: usize,
    /// Constant parity offset; true when the best bias is negative.
    pub best_c: bool,
}

impl BiasProfile {
    /// Largest `|B_k|`, ties to the smallest `k`. Compared on exact numerators.
    pub fn best(&self) -> ClassicalValue {
        let mut best_k = 0;
        for k in 1..self.numerators.len() {
            if self.numerators[k].abs() > self.numerators[best_k].abs() {
                best_k = k;
            }
        }
        ClassicalValue {
            value: self.biases[best_k].abs(),
            best_k,
            best_c: self.numerators[best_k].sign() == Sign::Minus,
        }
    }
}

pub fn classical_value(g: &SymmetricGame) -> ClassicalValue {
    bias_profile(g).best()
}

/// Same as [`classical_value`] but reuses a precomputed kernel table.
pub fn classical_value_with(g: &SymmetricGame, table: &KrawtchoukTable) -> ClassicalValue {
    bias_profile_with(g, table).best()
}

/// Classical value by enumerating every deterministic strategy on every input.
///
/// A strategy is `(a, b) ∈ {0,1}^n × {0,1}^n`. The offsets `a` enter only
/// through the global sign `(-1)^{⊕a}`, so for each `b` both signs are tried
/// and the bias is summed over all `2^n` input vectors.
pub fn brute_force_value(g: &SymmetricGame) -> Result<f64> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    let inputs = 1u32 << n;
    let target: Vec<u32> = g.bits().iter().map(|&b| b as u32).collect();
    let mut best = i64::MIN;
    for b in 0..inputs {
        for c in 0..2u32 {
            let mut total = 0i64;
            for x in 0..inputs {
                let parity = c ^ ((b & x).count_ones() & 1);
                if parity == target[x.count_ones() as usize] {
                    total += 1;
                } else {
                    total -= 1;
                }
            }
            best = best.max(total);
        }
    }
    Ok(best as f64 / inputs as f64)
}
