//! Numerical bench for the random cosine sums `P_n(x) = Σ r_m ε_m cos(mx)`
//! with binomial coefficients `r_m` and independent fair signs `ε_m`.
//!
//! Coefficients are stored pre-scaled by `2^-n`, so `P_n` lives on the same
//! scale as the game polynomials and every threshold is scaled the same way.

use std::f64::consts::TAU;

use crate::combinatorics::weights;
use crate::ensemble::norm_factor;
use crate::error::{Error, Result};
use crate::game::{SampleDescriptor, SymmetricGame};
use crate::trig_max::{certified_max, CircleFunction, Shape, ValueEnclosure};

/// Lower-bound constant `1 / (4√3)`.
pub const C1: f64 = 0.144_337_567_297_406_43;
/// Upper-bound constant.
pub const C2: f64 = 2.0;

/// Enclosure width used for sampled maxima on the `2^-n` scale.
pub const SAMPLE_TOL: f64 = 1e-10;

/// `P(x) = Σ_m ε_m c_m cos(mx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RademacherCosinePoly {
    signs: Vec<i8>,
    coefficients: Vec<f64>,
    scale: f64,
    signed: Vec<f64>,
}

impl RademacherCosinePoly {
    /// Binomial coefficients `C(n, m) 2^-n` with the given signs.
    pub fn binomial(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidArgument("need at least one sign".into()));
        }
        let n = signs.len() - 1;
        let w = weights(n)?;
        let scale = crate::combinatorics::pow2_neg(n);
        Self::build(signs, w.p().to_vec(), scale)
    }

    /// Arbitrary real coefficients; `scale` is reported as 1.
    pub fn with_coefficients(signs: Vec<i8>, coefficients: Vec<f64>) -> Result<Self> {
        if signs.len() != coefficients.len() || signs.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} signs for {} coefficients",
                signs.len(),
                coefficients.len()
            )));
        }
        Self::build(signs, coefficients, 1.0)
    }

    /// Signs `ε_m = (-1)^{G_m}` read off a game's bit list.
    pub fn from_game(g: &SymmetricGame) -> Result<Self> {
        Self::binomial(g.bits().iter().map(|&b| if b { -1 } else { 1 }).collect())
    }

    fn build(signs: Vec<i8>, coefficients: Vec<f64>, scale: f64) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("sign {bad} is not ±1")));
        }
        let signed = signs
            .iter()
            .zip(&coefficients)
            .map(|(&s, &c)| s as f64 * c)
            .collect();
        Ok(Self {
            signs,
            coefficients,
            scale,
            signed,
        })
    }

    pub fn n(&self) -> usize {
        self.signs.len() - 1
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Factor relating stored coefficients to the integer binomials (`2^-n`).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same signs, coefficients multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> Self {
        let coefficients = self.coefficients.iter().map(|c| c * s).collect();
        Self::build(self.signs.clone(), coefficients, self.scale * s)
            .expect("signs already validated")
    }

    fn function(&self) -> CircleFunction<'_> {
        CircleFunction::new(&self.signed, Shape::Cosine)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.function().value(x).re
    }
}

/// `∫_0^1 exp(λ Σ c_m φ_{m+1}(t)) dt = Π cosh(λ c_m)`, summed in log space.
pub fn exact_mgf(c: &[f64], lambda: f64) -> f64 {
    c.iter().map(|&cm| ln_cosh(lambda * cm)).sum::<f64>().exp()
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBoundReport {
    pub lambda: f64,
    /// `Σ c_m^2`
    pub c: f64,
    /// `Σ c_m^4`
    pub d: f64,
    pub mgf: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// `exp(λ²C/2 - λ⁴D) <= Π cosh(λ c_m) <= exp(λ²C/2)`.
pub fn lemma1_check(c: &[f64], lambda: f64) -> MomentBoundReport {
    let sum2: f64 = c.iter().map(|x| x * x).sum();
    let sum4: f64 = c.iter().map(|x| x.powi(4)).sum();
    let l2 = lambda * lambda;
    let mgf = exact_mgf(c, lambda);
    let lower = (0.5 * l2 * sum2 - l2 * l2 * sum4).exp();
    let upper = (0.5 * l2 * sum2).exp();
    // One part in 10^12 absorbs rounding when a bound is tight (e.g. λ = 0).
    let eps = 1e-12;
    let holds = lower <= mgf * (1.0 + eps) && mgf <= upper * (1.0 + eps);
    MomentBoundReport {
        lambda,
        c: sum2,
        d: sum4,
        mgf,
        lower,
        upper,
        holds,
    }
}

/// `M = max_x |P(x)|` as a certified enclosure on the stored scale.
pub fn max_abs_rademacher_poly(p: &RademacherCosinePoly, tol: f64) -> Result<ValueEnclosure> {
    certified_max(&p.function(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelInterval {
    pub lo: f64,
    pub hi: f64,
    /// `max |P|` used for the level.
    pub max: f64,
    pub ok: bool,
}

impl LevelInterval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// The maximal interval around the maximizer on which `|P| >= θ M`.
///
/// Walks outward from the argmax in steps; a step is accepted only when a
/// curvature bound proves `|P|` stays above the level on it, otherwise it is
/// halved. The first crossing is located by bisection. `ok` reports whether
/// the length reaches `(1 - θ) / n`.
pub fn level_interval(p: &RademacherCosinePoly, theta: f64) -> Result<LevelInterval> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    let f = p.function();
    let abs_sum: f64 = p.signed.iter().map(|c| c.abs()).sum();
    if abs_sum == 0.0 {
        return Err(Error::DegeneratePolynomial);
    }
    let enc = certified_max(&f, 1e-10 * abs_sum)?;
    let max = enc.lower;
    let level = theta * max;
    let n = p.n().max(1);
    // |P''| <= Σ m^2 |a_m|
    let curvature: f64 = p
        .signed
        .iter()
        .enumerate()
        .map(|(m, a)| (m * m) as f64 * a.abs())
        .sum();
    let x0 = enc.argmax_angle;
    let abs_at = |x: f64| f.value(x).re.abs();
    let base_step = ((1.0 - theta) / (8.0 * n as f64)).min(TAU / 64.0);

    let walk = |dir: f64| -> f64 {
        let mut t = 0.0;
        let mut vt = abs_at(x0);
        let mut pt = f.value(x0).re.signum();
        loop {
            if t >= TAU {
                return TAU;
            }
            let mut step = base_step.min(TAU - t);
            loop {
                let t1 = t + step;
                let p1 = f.value(x0 + dir * t1).re;
                if p1.abs() < level || p1.signum() != pt {
                    // A crossing lies in (t, t1]; bisect on |P| - level.
                    let (mut a, mut b) = (t, t1);
                    for _ in 0..200 {
                        let mid = 0.5 * (a + b);
                        if mid <= a || mid >= b {
                            break;
                        }
                        let pm = f.value(x0 + dir * mid).re;
                        if pm.abs() >= level && pm.signum() == pt {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    return a;
                }
                // P keeps its sign at both ends; bound the dip in between.
                let dip = vt.min(p1.abs()) - curvature * step * step / 8.0;
                if dip >= level || step < 1e-13 {
                    t = t1;
                    vt = p1.abs();
                    pt = p1.signum();
                    break;
                }
                step *= 0.5;
            }
        }
    };
    let right = walk(1.0);
    let left = if right >= TAU { 0.0 } else { walk(-1.0) };
    let (lo, hi) = if right + left >= TAU {
        (x0 - left, x0 - left + TAU)
    } else {
        (x0 - left, x0 + right)
    };
    let ok = hi - lo >= (1.0 - theta) / n as f64;
    Ok(LevelInterval { lo, hi, max, ok })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaleyZygmundOutcome {
    pub empirical: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `Pr[φ >= δA] >= (1 - δ)^2 A^2 / B` checked on samples of `φ`, with
/// three-standard-error slack for the finite sample.
pub fn paley_zygmund_check(
    samples: &[f64],
    a: f64,
    b: f64,
    delta: f64,
) -> Result<PaleyZygmundOutcome> {
    let fail = |msg: String| Err(Error::PreconditionViolated(msg));
    if samples.is_empty() {
        return fail("no samples".into());
    }
    if !(delta > 0.0 && delta < 1.0) {
        return fail(format!("delta = {delta} is outside (0, 1)"));
    }
    if !(a > 0.0) {
        return fail(format!("A = {a} must be positive"));
    }
    if let Some(x) = samples.iter().find(|&&x| !(x >= 0.0)) {
        return fail(format!("sample {x} is negative"));
    }
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let mean_sq = samples.iter().map(|x| x * x).sum::<f64>() / count;
    let rel = 1e-12;
    if mean < a * (1.0 - rel) {
        return fail(format!("sample mean {mean} is below A = {a}"));
    }
    if mean_sq > b * (1.0 + rel) {
        return fail(format!("sample second moment {mean_sq} exceeds B = {b}"));
    }
    let threshold = delta * a;
    let empirical = samples.iter().filter(|&&x| x >= threshold).count() as f64 / count;
    let bound = (1.0 - delta).powi(2) * a * a / b;
    let holds = empirical >= bound - 3.0 * (bound / count).sqrt();
    Ok(PaleyZygmundOutcome {
        empirical,
        bound,
        holds,
    })
}

/// Midpoint of the certified `M_n` on the `2^-n` scale for one sign sample.
pub fn sampled_max(n: usize, desc: SampleDescriptor, tol: f64) -> Result<f64> {
    let g = crate::game::sample_game(n, desc)?;
    let p = RademacherCosinePoly::from_game(&g)?;
    Ok(max_abs_rademacher_poly(&p, tol)?.midpoint())
}

/// Per-sample `M_n` values (scaled by `2^-n`) for indices `0..samples`.
pub fn rademacher_max_samples(
    n: usize,
    samples: usize,
    master_seed: u64,
    tol: f64,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| sampled_max(n, SampleDescriptor::new(master_seed, i), tol))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventFrequencies {
    pub n: usize,
    pub samples: usize,
    /// Fraction with `M_n >= C1 √(R_n ln n)`.
    pub freq_lower: f64,
    /// Fraction with `M_n <= C2 √(R_n ln n)`.
    pub freq_upper: f64,
}

fn frequencies(n: usize, values: &[f64]) -> Result<EventFrequencies> {
    let unit = norm_factor(n)?;
    let count = values.len() as f64;
    let lower = values.iter().filter(|&&m| m >= C1 * unit).count() as f64 / count;
    let upper = values.iter().filter(|&&m| m <= C2 * unit).count() as f64 / count;
    Ok(EventFrequencies {
        n,
        samples: values.len(),
        freq_lower: lower,
        freq_upper: upper,
    })
}

/// Empirical frequencies of the two threshold events over random sign vectors.
pub fn theorem_event_frequency(
    n: usize,
    samples: usize,
    master_seed: u64,
) -> Result<EventFrequencies> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    norm_factor(n)?;
    let values = rademacher_max_samples(n, samples, master_seed, SAMPLE_TOL)?;
    frequencies(n, &values)
}

/// Same frequencies over all `2^(n+1)` sign vectors.
pub fn theorem_event_frequency_exhaustive(n: usize) -> Result<EventFrequencies> {
    const LIMIT: usize = 16;
    if n > LIMIT {
        return Err(Error::TooLarge { n, limit: LIMIT });
    }
    norm_factor(n)?;
    let values = (0..1u64 << (n + 1))
        .map(|mask| {
            let signs = (0..=n)
                .map(|m| if (mask >> m) & 1 == 1 { -1 } else { 1 })
                .collect();
            let p = RademacherCosinePoly::binomial(signs)?;
            Ok(max_abs_rademacher_poly(&p, SAMPLE_TOL)?.midpoint())
        })
        .collect::<Result<Vec<f64>>>()?;
    frequencies(n, &values)
}

/// Pass/fail tally of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepSummary {
    pub checked: usize,
    pub failures: usize,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.failures == 0
    }

    fn record(&mut self, ok: bool) {
        self.checked += 1;
        self.failures += usize::from(!ok);
    }
}

/// `λ = -4, -3.75, ..., 4`.
pub fn lambda_grid() -> Vec<f64> {
    (-16..=16).map(|i| i as f64 * 0.25).collect()
}

fn unit_interval(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Random coefficient vector of length 1..=24 with entries in `[-1, 1)`.
pub fn random_coefficients(desc: SampleDescriptor) -> Vec<f64> {
    let len = 1 + (desc.word(1) % 24) as usize;
    (0..len)
        .map(|i| 2.0 * unit_interval(desc.word(i as u64 + 2)) - 1.0)
        .collect()
}

/// Moment bounds over the λ grid for binomial rows `0..=max_n` (scaled by
/// `2^-n`) and `random_vectors` random coefficient vectors.
pub fn lemma1_sweep(max_n: usize, random_vectors: usize, master_seed: u64) -> Result<SweepSummary> {
    let mut summary = SweepSummary::default();
    let grid = lambda_grid();
    for n in 0..=max_n {
        let c = weights(n)?;
        for &l in &grid {
            summary.record(lemma1_check(c.p(), l).holds);
        }
    }
    for i in 0..random_vectors as u64 {
        let c = random_coefficients(SampleDescriptor::new(master_seed, i));
        for &l in &grid {
            summary.record(lemma1_check(&c, l).holds);
        }
    }
    Ok(summary)
}

/// Level-interval checks on `instances` random binomial sums with
/// `n` drawn from `1..=max_n` and `θ` cycling through 0.3, 0.6, 0.9.
pub fn lemma3_sweep(instances: usize, max_n: usize, master_seed: u64) -> Result<SweepSummary> {
    use rayon::prelude::*;
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be positive".into()));
    }
    const THETAS: [f64; 3] = [0.3, 0.6, 0.9];
    let oks = (0..instances as u64)
        .into_par_iter()
        .map(|i| {
            let pick = SampleDescriptor::new(!master_seed, i).word(1);
            let n = 1 + (pick % max_n as u64) as usize;
            let g = crate::game::sample_game(n, SampleDescriptor::new(master_seed, i))?;
            let p = RademacherCosinePoly::from_game(&g)?;
            Ok(level_interval(&p, THETAS[i as usize % 3])?.ok)
        })
        .collect::<Result<Vec<bool>>>()?;
    let mut summary = SweepSummary::default();
    for ok in oks {
        summary.record(ok);
    }
    Ok(summary)
}

/// Paley-Zygmund on samples of `M_n / (2^-n √(R_n ln n))`, with `A` and `B`
/// the sample first and second moments, for `δ` in {0.25, 0.5, 0.75}.
pub fn lemma4_sweep(
    n: usize,
    samples: usize,
    master_seed: u64,
) -> Result<Vec<(f64, PaleyZygmundOutcome)>> {
    let unit = norm_factor(n)?;
    let values: Vec<f64> = rademacher_max_samples(n, samples, master_seed, SAMPLE_TOL)?
        .into_iter()
        .map(|m| m / unit)
        .collect();
    let count = values.len() as f64;
    let a = values.iter().sum::<f64>() / count;
    let b = values.iter().map(|x| x * x).sum::<f64>() / count;
    [0.25, 0.5, 0.75]
        .into_iter()
        .map(|delta| Ok((delta, paley_zygmund_check(&values, a, b, delta)?)))
        .collect()
}
