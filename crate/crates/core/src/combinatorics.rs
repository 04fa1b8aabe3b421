//! Exact binomial machinery.
//!
//! Rows of binomial coefficients, their power sums, and the floating-point
//! input-weight distribution `p_j = C(n, j) / 2^n` used by every game value.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `n` for which [`weights`] is defined. `2^-1024` sits at the
/// bottom of the double-precision range.
pub const MAX_FLOAT_N: usize = 1024;

/// Row `n` of Pascal's triangle, `C(n, 0) ..= C(n, n)`, in exact integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialRow {
    n: usize,
    coefficients: Vec<BigUint>,
}

impl BinomialRow {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[BigUint] {
        &self.coefficients
    }

    pub fn get(&self, k: usize) -> Option<&BigUint> {
        self.coefficients.get(k)
    }
}

/// Computes row `n` with the multiplicative formula `C(n,k+1) = C(n,k)(n-k)/(k+1)`.
/// Each division is exact.
pub fn binomial_row(n: usize) -> BinomialRow {
    let mut coefficients = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    coefficients.push(c.clone());
    for k in 0..n {
        c = c * BigUint::from(n - k) / BigUint::from(k + 1);
        coefficients.push(c.clone());
    }
    BinomialRow { n, coefficients }
}

/// Exact `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// `2^-n` as an exact double, including the subnormal tail up to `n = 1074`.
pub(crate) fn pow2_neg(n: usize) -> f64 {
    assert!(n <= 1074, "2^-{n} underflows to zero");
    if n <= 1022 {
        f64::from_bits(((1023 - n) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (1074 - n))
    }
}

/// Natural logarithm of a positive big integer, accurate to a few ulps.
pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("finite below 2^1000").ln()
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().expect("64-bit value");
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Input-weight distribution for `n` players given uniformly random inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    n: usize,
    p: Vec<f64>,
}

impl WeightVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }
}

/// `p_j = C(n, j) / 2^n` for `j = 0..=n`.
///
/// Built by the recurrence `p_{j+1} = p_j (n - j) / (j + 1)` from `p_0 = 2^-n`
/// and then mirrored, so `p_j == p_{n-j}` holds bit for bit.
pub fn weights(n: usize) -> Result<WeightVector> {
    if n > MAX_FLOAT_N {
        return Err(Error::OverflowOrUnderflow {
            n,
            max: MAX_FLOAT_N,
        });
    }
    let mut p = Vec::with_capacity(n + 1);
    let mut current = pow2_neg(n);
    p.push(current);
    for j in 0..n {
        current = current * (n - j) as f64 / (j + 1) as f64;
        p.push(current);
    }
    for j in (n / 2 + 1)..=n {
        p[j] = p[n - j];
    }
    Ok(WeightVector { n, p })
}

/// `R = Σ C(n,m)^2` and `T = Σ C(n,m)^4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSums {
    pub n: usize,
    pub r: BigUint,
    pub t: BigUint,
}

pub fn power_sums(n: usize) -> PowerSums {
    let row = binomial_row(n);
    let mut r = BigUint::zero();
    let mut t = BigUint::zero();
    for c in row.coefficients() {
        let sq = c * c;
        t += &sq * &sq;
        r += sq;
    }
    // Vandermonde: Σ C(n,m)^2 = C(2n, n).
    assert_eq!(
        r,
        binomial(2 * n, n),
        "Vandermonde identity failed at n = {n}"
    );
    PowerSums { n, r, t }
}

/// Outcome of the fourth-power concentration bound `T/R^2 <= (4/3) n^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma5Outcome {
    pub n: usize,
    pub ratio: BigRational,
    pub holds: bool,
}

/// Checks `T_n / R_n^2 <= (4/3) n^{-1/2}` exactly by comparing
/// `9 n T^2 <= 16 R^4` in integers.
pub fn lemma5_check(n: usize) -> Result<Lemma5Outcome> {
    if n == 0 {
        return Err(Error::InvalidArgument("lemma 5 requires n >= 1".into()));
    }
    let PowerSums { r, t, .. } = power_sums(n);
    let r2 = &r * &r;
    let lhs = BigUint::from(9u32) * BigUint::from(n) * &t * &t;
    let rhs = BigUint::from(16u32) * &r2 * &r2;
    let ratio = BigRational::new(t.into(), r2.into());
    Ok(Lemma5Outcome {
        n,
        ratio,
        holds: lhs <= rhs,
    })
}
