//! Certified global maximization of `|f|` on the circle, where `f` is either a
//! complex polynomial `Σ a_j e^{ijx}` or a real cosine sum `Σ a_j cos(jx)`.
//!
//! The engine works on `S = |f|^2`, a real trigonometric polynomial:
//!
//! 1. `S` is sampled on `m` equispaced points with one FFT.
//! 2. A global cap follows from the grid-norm inequality
//!    `max S <= max_k S(x_k) / cos(d π / m)`, `d` the degree of `S`, `m > 2d`.
//! 3. Grid local maxima that could still hold the global maximum are polished
//!    by Newton on `S'`, safeguarded by bisection inside the bracketing cells.
//! 4. Every cell whose bound `max(S(a), S(b)) + K w^2 / 8` (with `K >= sup |S''|`)
//!    exceeds the best value found is split until the bound gap meets the
//!    tolerance. If the split budget runs out the grid is doubled.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Grids larger than this give up with [`Error::ToleranceNotReached`].
pub const MAX_GRID: usize = 1 << 22;

const SPLIT_BUDGET: usize = 200_000;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Certified bracket on a global maximum of `|f|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueEnclosure {
    pub lower: f64,
    pub upper: f64,
    /// Smallest angle in `[0, 2π)` attaining the refined maximum; `|f|` there is `lower`.
    pub argmax_angle: f64,
    /// Number of equispaced points in the final grid.
    pub grid_size: usize,
}

impl ValueEnclosure {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// Multiplies both bounds by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            lower: self.lower * s,
            upper: self.upper * s,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Shape {
    /// `f(x) = Σ a_j e^{ijx}`
    Complex,
    /// `f(x) = Σ a_j cos(jx)`
    Cosine,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CircleFunction<'a> {
    coeffs: &'a [f64],
    shape: Shape,
}

pub(crate) fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl<'a> CircleFunction<'a> {
    pub(crate) fn new(coeffs: &'a [f64], shape: Shape) -> Self {
        Self { coeffs, shape }
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Degree of `S = |f|^2` as a trigonometric polynomial.
    fn square_degree(&self) -> usize {
        match self.shape {
            Shape::Complex => self.degree(),
            Shape::Cosine => 2 * self.degree(),
        }
    }

    fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|a| a.abs()).sum()
    }

    /// `f(x)` as a complex number (imaginary part zero for cosine sums).
    pub(crate) fn value(&self, x: f64) -> Complex64 {
        let x = normalize_angle(x);
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &a) in self.coeffs.iter().enumerate() {
            let (s, c) = (j as f64 * x).sin_cos();
            re += a * c;
            im += a * s;
        }
        match self.shape {
            Shape::Complex => Complex64::new(re, im),
            Shape::Cosine => Complex64::new(re, 0.0),
        }
    }

    pub(crate) fn square(&self, x: f64) -> f64 {
        self.value(x).norm_sqr()
    }

    /// `(S, S', S'')` at `x`.
    fn square_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let x = normalize_angle(x);
        let (mut f, mut f1, mut f2) = (
            Complex64::default(),
            Complex64::default(),
            Complex64::default(),
        );
        for (j, &a) in self.coeffs.iter().enumerate() {
            let jf = j as f64;
            let (s, c) = (jf * x).sin_cos();
            let e = match self.shape {
                Shape::Complex => Complex64::new(c, s),
                Shape::Cosine => Complex64::new(c, 0.0),
            };
            let d = match self.shape {
                Shape::Complex => Complex64::new(-s, c),
                Shape::Cosine => Complex64::new(-s, 0.0),
            };
            f += a * e;
            f1 += a * jf * d;
            f2 -= a * jf * jf * e;
        }
        let s0 = f.norm_sqr();
        let s1 = 2.0 * (f1 * f.conj()).re;
        let s2 = 2.0 * (f2 * f.conj()).re + 2.0 * f1.norm_sqr();
        (s0, s1, s2)
    }

    /// Upper bound on `sup |S''|` given `sup |f| <= fmax`.
    ///
    /// Complex case: `S = |Q|^2` with `Q = e^{-icx} f`, `c = n/2`, so
    /// `|S''| <= 2 μ_2 fmax + 2 μ_1^2` with `μ_k = Σ |j - c|^k |a_j|`.
    /// Cosine case uses the same bound with `c = 0`.
    fn curvature_bound(&self, fmax: f64) -> f64 {
        let center = match self.shape {
            Shape::Complex => self.degree() as f64 / 2.0,
            Shape::Cosine => 0.0,
        };
        let (mut mu1, mut mu2) = (0.0, 0.0);
        for (j, &a) in self.coeffs.iter().enumerate() {
            let dj = (j as f64 - center).abs();
            mu1 += dj * a.abs();
            mu2 += dj * dj * a.abs();
        }
        (2.0 * mu2 * fmax + 2.0 * mu1 * mu1) * (1.0 + 1e-12)
    }

    /// `S` at `x_k = 2πk/m`, `k = 0..m`.
    fn grid_squares(&self, m: usize) -> Vec<f64> {
        debug_assert!(m > self.degree());
        let mut buf = vec![Complex64::default(); m];
        for (slot, &a) in buf.iter_mut().zip(self.coeffs) {
            *slot = Complex64::new(a, 0.0);
        }
        let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m));
        fft.process(&mut buf);
        match self.shape {
            Shape::Complex => buf.iter().map(|z| z.norm_sqr()).collect(),
            Shape::Cosine => buf.iter().map(|z| z.re * z.re).collect(),
        }
    }

    /// Allowance for rounding in computed values of `S`.
    fn rounding_slack(&self, m: usize, fmax: f64) -> f64 {
        let terms = (self.coeffs.len() as f64) + (m as f64).log2();
        let ef = 16.0 * terms * f64::EPSILON * self.abs_sum();
        ef * (2.0 * fmax + ef)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    a: f64,
    b: f64,
    sa: f64,
    sb: f64,
    bound: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Newton on `S'` inside `[a, b]` where `S'(a) >= 0 >= S'(b)`; falls back to
/// bisection whenever the step leaves the bracket or `S''` is not negative.
fn refine_peak(f: &CircleFunction<'_>, mut a: f64, mut b: f64, start: f64) -> (f64, f64) {
    let mut x = start;
    let mut best = (x, f.square(x));
    for _ in 0..200 {
        let (s0, s1, s2) = f.square_derivatives(x);
        if s0 > best.1 {
            best = (x, s0);
        }
        if s1 == 0.0 {
            break;
        }
        if s1 > 0.0 {
            a = x;
        } else {
            b = x;
        }
        if b - a <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
        let newton = if s2 < 0.0 { x - s1 / s2 } else { f64::NAN };
        let next = if newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
        x = next;
    }
    let s = f.square(x);
    if s > best.1 {
        best = (x, s);
    }
    best
}

/// Certified enclosure of `max_x |f(x)|` to within `tol`.
pub(crate) fn certified_max(f: &CircleFunction<'_>, tol: f64) -> Result<ValueEnclosure> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if f.coeffs.iter().all(|&a| a == 0.0) {
        return Err(Error::DegeneratePolynomial);
    }
    let n = f.degree();
    let d = f.square_degree();
    let triangle = f.abs_sum();
    let mut m = (8 * n + 1).max(64);
    let mut last_gap = f64::INFINITY;
    while m <= MAX_GRID {
        match certify_on_grid(f, m, d, triangle, tol) {
            Ok(enc) => return Ok(enc),
            Err(gap) => {
                last_gap = gap;
                m *= 2;
            }
        }
    }
    Err(Error::ToleranceNotReached {
        tol,
        gap: last_gap,
        max_grid: MAX_GRID,
    })
}

fn certify_on_grid(
    f: &CircleFunction<'_>,
    m: usize,
    d: usize,
    triangle: f64,
    tol: f64,
) -> std::result::Result<ValueEnclosure, f64> {
    let h = TAU / m as f64;
    let grid = f.grid_squares(m);
    let (kmax, smax) =
        grid.iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, s)| if s > acc.1 { (k, s) } else { acc },
            );

    let slack = f.rounding_slack(m, triangle);
    let cap = (smax / (PI * d as f64 / m as f64).cos() + slack).min(triangle * triangle + slack);
    let fmax = cap.sqrt();
    let curvature = f.curvature_bound(fmax);
    let cell_excess = curvature * h * h / 8.0 + slack;

    let xs = |k: usize| k as f64 * h;
    let at = |k: isize| grid[k.rem_euclid(m as isize) as usize];

    let mut best = (xs(kmax), smax);
    let target = |best_s: f64| tol * best_s.max(0.0).sqrt();

    // Polish grid local maxima in descending order while they can still matter.
    let mut locals: Vec<usize> = (0..m)
        .filter(|&k| {
            let k = k as isize;
            at(k) >= at(k - 1) && at(k) >= at(k + 1)
        })
        .collect();
    locals.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]).then(i.cmp(&j)));
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for &k in &locals {
        if grid[k] + cell_excess <= best.1 + target(best.1) {
            break;
        }
        let x = xs(k);
        let (a, b) = (x - h, x + h);
        let (_, da, _) = f.square_derivatives(a);
        let (_, db, _) = f.square_derivatives(b);
        let peak = if da >= 0.0 && db <= 0.0 {
            refine_peak(f, a, b, x)
        } else {
            (x, grid[k])
        };
        if peak.1 > best.1 {
            best = peak;
        }
        peaks.push(peak);
    }

    // Branch and bound over the cells that can still beat the best value.
    let mut heap = BinaryHeap::new();
    let mut pruned = f64::NEG_INFINITY;
    for k in 0..m {
        let (sa, sb) = (grid[k], grid[(k + 1) % m]);
        let cell = Cell {
            a: xs(k),
            b: xs(k) + h,
            sa,
            sb,
            bound: sa.max(sb) + cell_excess,
        };
        if cell.bound > best.1 + target(best.1) {
            heap.push(cell);
        } else {
            pruned = pruned.max(cell.bound);
        }
    }
    let mut splits = 0usize;
    let upper_sq = loop {
        let Some(top) = heap.peek().copied() else {
            break pruned.max(best.1);
        };
        if top.bound <= best.1 + target(best.1) {
            break top.bound.max(pruned).max(best.1);
        }
        if splits >= SPLIT_BUDGET {
            return Err(top.bound.max(0.0).sqrt() - best.1.max(0.0).sqrt());
        }
        heap.pop();
        splits += 1;
        let mid = 0.5 * (top.a + top.b);
        let w = 0.5 * (top.b - top.a);
        if w <= 0.0 || mid <= top.a || mid >= top.b {
            return Err(top.bound.max(0.0).sqrt() - best.1.max(0.0).sqrt());
        }
        let sm = f.square(mid);
        if sm > best.1 {
            best = (mid, sm);
        }
        let excess = curvature * w * w / 8.0 + slack;
        for child in [
            Cell {
                a: top.a,
                b: mid,
                sa: top.sa,
                sb: sm,
                bound: top.sa.max(sm) + excess,
            },
            Cell {
                a: mid,
                b: top.b,
                sa: sm,
                sb: top.sb,
                bound: sm.max(top.sb) + excess,
            },
        ] {
            if child.bound > best.1 + target(best.1) {
                heap.push(child);
            } else {
                pruned = pruned.max(child.bound);
            }
        }
    };
    let upper_sq = upper_sq.min(cap);

    // Ties go to the smallest angle among near-equal peaks.
    let tie = 0.25 * target(best.1);
    if !peaks.iter().any(|p| p.1 >= best.1 - tie) {
        peaks.push(best);
    }
    let argmax = peaks
        .iter()
        .filter(|p| p.1 >= best.1 - tie)
        .map(|p| normalize_angle(p.0))
        .fold(f64::INFINITY, f64::min);
    let lower = f.value(argmax).norm();
    let upper = upper_sq
        .max(lower * lower)
        .sqrt()
        .min(triangle * (1.0 + 4.0 * f64::EPSILON));
    let upper = upper.max(lower);
    if upper - lower > tol {
        return Err(upper - lower);
    }
    Ok(ValueEnclosure {
        lower,
        upper,
        argmax_angle: argmax,
        grid_size: m,
    })
}
