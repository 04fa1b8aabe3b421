//! Monte Carlo ensembles of random games.
//!
//! Every sample is a pure function of `(n, master_seed, index)`. Per-index
//! results land in an index-ordered buffer and are reduced sequentially with
//! compensated summation, so the statistics do not depend on the worker count.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::classical::{classical_value_with, KrawtchoukTable};
use crate::combinatorics::{ln_biguint, power_sums};
use crate::error::{Error, Result};
use crate::game::{sample_game, SampleDescriptor, SymmetricGame};
use crate::quantum::entangled_value;
use crate::sz::{C1, C2};

/// Exact CSV header of ensemble and figure tables.
pub const CSV_HEADER: [&str; 11] = [
    "n",
    "samples",
    "seed",
    "norm_factor",
    "mean_ratio",
    "std_ratio",
    "min_ratio",
    "max_ratio",
    "frac_in_bounds",
    "mean_classical",
    "mean_gap",
];

/// `√(C(2n, n) ln n) / 2^n`, evaluated in log space.
pub fn norm_factor(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "n = {n}: ln n must be positive (n >= 2)"
        )));
    }
    let central = power_sums(n).r;
    let log =
        0.5 * (ln_biguint(&central) + (n as f64).ln().ln()) - n as f64 * std::f64::consts::LN_2;
    Ok(log.exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub samples: usize,
    pub master_seed: u64,
    pub tol: f64,
    pub workers: usize,
    /// Also compute the classical value of every game.
    pub classical: bool,
}

impl EnsembleConfig {
    pub fn new(n: usize, samples: usize, master_seed: u64) -> Self {
        Self {
            n,
            samples,
            master_seed,
            tol: crate::quantum::DEFAULT_TOL,
            workers: 1,
            classical: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("ensembles need n >= 2".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub norm_factor: f64,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub frac_in_bounds: f64,
    pub mean_classical: Option<f64>,
    /// Mean of entangled / classical value.
    pub mean_gap: Option<f64>,
}

/// Outcome for one game of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOutcome {
    pub value: f64,
    pub ratio: f64,
    pub classical: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(job))
}

fn evaluate(
    games: impl Fn(u64) -> Result<SymmetricGame> + Sync,
    count: u64,
    n: usize,
    tol: f64,
    classical: bool,
    workers: usize,
) -> Result<Vec<SampleOutcome>> {
    let norm = norm_factor(n)?;
    let table = classical.then(|| KrawtchoukTable::new(n));
    with_workers(workers, || {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let g = games(i)?;
                let value = entangled_value(&g, tol)?.midpoint();
                let classical = table.as_ref().map(|t| classical_value_with(&g, t).value);
                Ok(SampleOutcome {
                    value,
                    ratio: value / norm,
                    classical,
                })
            })
            .collect()
    })?
}

/// Per-index outcomes of a sampled ensemble, in index order.
pub fn ensemble_outcomes(cfg: &EnsembleConfig) -> Result<Vec<SampleOutcome>> {
    cfg.validate()?;
    let (n, seed) = (cfg.n, cfg.master_seed);
    evaluate(
        |i| sample_game(n, SampleDescriptor::new(seed, i)),
        cfg.samples as u64,
        n,
        cfg.tol,
        cfg.classical,
        cfg.workers,
    )
}

pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleStats> {
    let outcomes = ensemble_outcomes(cfg)?;
    aggregate(cfg.n, cfg.master_seed, &outcomes)
}

/// Enumerates all `2^(n+1)` games instead of sampling; `samples` and `seed`
/// in the result are `2^(n+1)` and 0.
pub fn run_exhaustive(
    n: usize,
    tol: f64,
    classical: bool,
    workers: usize,
) -> Result<EnsembleStats> {
    const LIMIT: usize = 20;
    if n > LIMIT {
        return Err(Error::TooLarge { n, limit: LIMIT });
    }
    let cfg = EnsembleConfig {
        n,
        samples: 1 << (n + 1),
        master_seed: 0,
        tol,
        workers,
        classical,
    };
    cfg.validate()?;
    let outcomes = evaluate(
        |mask| SymmetricGame::new((0..=n).map(|j| (mask >> j) & 1 == 1).collect()),
        cfg.samples as u64,
        n,
        tol,
        classical,
        workers,
    )?;
    aggregate(n, 0, &outcomes)
}

/// Reduces outcomes in index order.
pub fn aggregate(n: usize, seed: u64, outcomes: &[SampleOutcome]) -> Result<EnsembleStats> {
    if outcomes.is_empty() {
        return Err(Error::InvalidArgument("no outcomes to aggregate".into()));
    }
    let count = outcomes.len() as f64;
    let mut sum = KahanSum::default();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut inside = 0usize;
    for o in outcomes {
        sum.add(o.ratio);
        min = min.min(o.ratio);
        max = max.max(o.ratio);
        if (C1..=2.0 * C2).contains(&o.ratio) {
            inside += 1;
        }
    }
    let mean = sum.sum / count;
    let mut dev = KahanSum::default();
    for o in outcomes {
        dev.add((o.ratio - mean).powi(2));
    }
    let std = if outcomes.len() > 1 {
        (dev.sum / (count - 1.0)).sqrt()
    } else {
        0.0
    };

    let (mean_classical, mean_gap) = if outcomes.iter().all(|o| o.classical.is_some()) {
        let mut c = KahanSum::default();
        let mut gap = KahanSum::default();
        for o in outcomes {
            let cv = o.classical.expect("checked above");
            c.add(cv);
            gap.add(o.value / cv);
        }
        (Some(c.sum / count), Some(gap.sum / count))
    } else {
        (None, None)
    };

    Ok(EnsembleStats {
        n,
        samples: outcomes.len(),
        seed,
        norm_factor: norm_factor(n)?,
        // Rounding can leave the mean a hair outside [min, max] for constant data.
        mean_ratio: mean.clamp(min, max),
        std_ratio: std,
        min_ratio: min,
        max_ratio: max,
        frac_in_bounds: inside as f64 / count,
        mean_classical,
        mean_gap,
    })
}

/// One ensemble per `n`, all with the same master seed.
pub fn figure1_series(
    n_values: &[usize],
    samples: usize,
    master_seed: u64,
    tol: f64,
    workers: usize,
    classical: bool,
) -> Result<Vec<EnsembleStats>> {
    n_values
        .iter()
        .map(|&n| {
            run_ensemble(&EnsembleConfig {
                n,
                samples,
                master_seed,
                tol,
                workers,
                classical,
            })
        })
        .collect()
}

/// Per-sample check of `C1 · norm <= Val_Q <= 2 C2 · norm`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub n: usize,
    pub samples: usize,
    pub norm_factor: f64,
    /// `(lower side holds, upper side holds)` for each sample index.
    pub indicators: Vec<(bool, bool)>,
    pub frac_lower: f64,
    pub frac_upper: f64,
    pub fraction: f64,
}

impl BoundsReport {
    pub fn passes(&self, threshold: f64) -> bool {
        self.fraction >= threshold
    }
}

/// Default pass threshold; `None` below `n = 50`, where only fractions are reported.
pub fn default_bounds_threshold(n: usize) -> Option<f64> {
    (n >= 50).then_some(0.99)
}

pub fn verify_bounds(
    n: usize,
    samples: usize,
    master_seed: u64,
    tol: f64,
    workers: usize,
) -> Result<BoundsReport> {
    let cfg = EnsembleConfig {
        n,
        samples,
        master_seed,
        tol,
        workers,
        classical: false,
    };
    let outcomes = ensemble_outcomes(&cfg)?;
    let indicators: Vec<(bool, bool)> = outcomes
        .iter()
        .map(|o| (o.ratio >= C1, o.ratio <= 2.0 * C2))
        .collect();
    let count = samples as f64;
    let frac = |pred: &dyn Fn(&(bool, bool)) -> bool| {
        indicators.iter().filter(|i| pred(i)).count() as f64 / count
    };
    Ok(BoundsReport {
        n,
        samples,
        norm_factor: norm_factor(n)?,
        frac_lower: frac(&|i| i.0),
        frac_upper: frac(&|i| i.1),
        fraction: frac(&|i| i.0 && i.1),
        indicators,
    })
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Writes the header and one row per stats record.
pub fn write_csv<W: Write>(rows: &[EnsembleStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.samples.to_string(),
            r.seed.to_string(),
            fmt_float(r.norm_factor),
            fmt_float(r.mean_ratio),
            fmt_float(r.std_ratio),
            fmt_float(r.min_ratio),
            fmt_float(r.max_ratio),
            fmt_float(r.frac_in_bounds),
            fmt_opt(r.mean_classical),
            fmt_opt(r.mean_gap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[EnsembleStats]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Parses a table written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<EnsembleStats>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let missing: Vec<String> = CSV_HEADER
        .iter()
        .filter(|h| !headers.iter().any(|x| x == **h))
        .map(|h| h.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing));
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .expect("checked above")
    };
    let bad =
        |field: &str, value: &str| Error::InvalidArgument(format!("bad {field} value {value:?}"));
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let get = |name: &str| record.get(col(name)).unwrap_or("");
        let float = |name: &str| get(name).parse::<f64>().map_err(|_| bad(name, get(name)));
        let opt = |name: &str| -> Result<Option<f64>> {
            match get(name) {
                "" => Ok(None),
                v => v.parse().map(Some).map_err(|_| bad(name, v)),
            }
        };
        rows.push(EnsembleStats {
            n: get("n").parse().map_err(|_| bad("n", get("n")))?,
            samples: get("samples")
                .parse()
                .map_err(|_| bad("samples", get("samples")))?,
            seed: get("seed").parse().map_err(|_| bad("seed", get("seed")))?,
            norm_factor: float("norm_factor")?,
            mean_ratio: float("mean_ratio")?,
            std_ratio: float("std_ratio")?,
            min_ratio: float("min_ratio")?,
            max_ratio: float("max_ratio")?,
            frac_in_bounds: float("frac_in_bounds")?,
            mean_classical: opt("mean_classical")?,
            mean_gap: opt("mean_gap")?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binomial;
    use num_bigint::BigUint;
    use num_traits::ToPrimitive;

    #[test]
    fn norm_factor_examples() {
        assert!((norm_factor(2).unwrap() - 0.509_833_495_084_404_5).abs() < 1e-12);
        assert!((norm_factor(4).unwrap() - (70.0 * 4f64.ln()).sqrt() / 16.0).abs() < 1e-15);
        assert!((norm_factor(4).unwrap() - 0.615_682).abs() < 1e-6);
        assert!(norm_factor(1).is_err());
    }

    #[test]
    fn norm_factor_relative_error() {
        for n in 2..=64usize {
            // C(2n, n) / 4^n exactly as a double, then the rest in floating point.
            let c = binomial(2 * n, n);
            let scaled = c.to_f64().unwrap() / (BigUint::from(1u8) << (2 * n)).to_f64().unwrap();
            let reference = (scaled * (n as f64).ln()).sqrt();
            let rel = ((norm_factor(n).unwrap() - reference) / reference).abs();
            assert!(rel <= 1e-12, "n={n} rel={rel}");
        }
    }

    #[test]
    fn norm_factor_asymptotics() {
        let n = 512.0f64;
        let approx = (n.ln() / (std::f64::consts::PI * n).sqrt()).sqrt();
        let ratio = norm_factor(512).unwrap() / approx;
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn exhaustive_n2() {
        let stats = run_exhaustive(2, 1e-9, true, 1).unwrap();
        assert_eq!(stats.samples, 8);
        let norm = norm_factor(2).unwrap();
        // all-zero and all-one games reach value 1
        assert!((stats.max_ratio - 1.0 / norm).abs() < 1e-8);
        assert!(stats.min_ratio <= stats.mean_ratio && stats.mean_ratio <= stats.max_ratio);
        assert!(stats.mean_classical.is_some());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = EnsembleConfig::new(12, 64, 42);
        cfg.classical = true;
        let one = run_ensemble(&cfg).unwrap();
        cfg.workers = 3;
        let three = run_ensemble(&cfg).unwrap();
        assert_eq!(csv_string(&[one]).unwrap(), csv_string(&[three]).unwrap());
    }

    #[test]
    fn complementing_games_keeps_mean() {
        let n = 6;
        let base = ensemble_outcomes(&EnsembleConfig::new(n, 40, 5)).unwrap();
        let comp = evaluate(
            |i| Ok(sample_game(n, SampleDescriptor::new(5, i))?.complement()),
            40,
            n,
            1e-9,
            false,
            1,
        )
        .unwrap();
        let a = aggregate(n, 5, &base).unwrap();
        let b = aggregate(n, 5, &comp).unwrap();
        assert_eq!(a.mean_ratio, b.mean_ratio);
    }

    #[test]
    fn csv_round_trip() {
        let mut cfg = EnsembleConfig::new(8, 20, 1);
        let plain = run_ensemble(&cfg).unwrap();
        cfg.classical = true;
        let with_classical = run_ensemble(&cfg).unwrap();
        let rows = vec![plain, with_classical];
        let text = csv_string(&rows).unwrap();
        assert!(text.starts_with(&(CSV_HEADER.join(",") + "\n")));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn csv_missing_columns() {
        let err = read_csv("n,samples\n2,3\n".as_bytes()).unwrap_err();
        match err {
            Error::MissingColumns(cols) => assert!(cols.contains(&"mean_ratio".to_string())),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bounds_report_small_n() {
        let r = verify_bounds(2, 16, 3, 1e-9, 1).unwrap();
        assert_eq!(r.indicators.len(), 16);
        assert!(r.fraction <= r.frac_lower.min(r.frac_upper));
        assert!(r.passes(0.0));
        assert_eq!(default_bounds_threshold(2), None);
        assert_eq!(default_bounds_threshold(100), Some(0.99));
    }

    #[test]
    fn config_validation() {
        assert!(run_ensemble(&EnsembleConfig::new(1, 10, 0)).is_err());
        assert!(run_ensemble(&EnsembleConfig::new(4, 0, 0)).is_err());
    }
}
