//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use symxor::classical::{
    brute_force_value, classical_value, classical_value_with, KrawtchoukTable,
};
use symxor::combinatorics::{binomial_row, lemma5_check, weights};
use symxor::ensemble::{ensemble_outcomes, read_csv, EnsembleConfig};
use symxor::game::{sample_game, SampleDescriptor, SymmetricGame};
use symxor::quantum::{build_polynomial, entangled_value, DEFAULT_TOL};
use symxor::sz::{
    exact_mgf, lambda_grid, lemma1_sweep, lemma3_sweep, theorem_event_frequency, C1, C2,
};

const BIN: &str = env!("CARGO_BIN_EXE_symxor");

type Check<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn run_cli(args: &[&str]) -> (bool, String, Duration) {
    let start = Instant::now();
    let out = Command::new(BIN).args(args).output().expect("spawn symxor");
    let elapsed = start.elapsed();
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        elapsed,
    )
}

fn field(stdout: &str, key: &str) -> Option<f64> {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key)?.trim().parse().ok())
}

#[allow(clippy::approx_constant)]
fn chsh_quantum() -> Verdict {
    let (ok, out, elapsed) = run_cli(&["value", "2:001"]);
    let bias = field(&out, "bias ");
    let win = field(&out, "win_probability ");
    let (Some(bias), Some(win)) = (bias, win) else {
        return verdict(false, format!("unparseable output: {out:?}"));
    };
    let pass = ok
        && (bias - 0.707106781).abs() <= 1e-8
        && (win - 0.85355339).abs() <= 1e-8
        && elapsed < Duration::from_millis(10);
    verdict(
        pass,
        format!("bias {bias:.12}, win {win:.12}, {elapsed:?} (process)"),
    )
}

fn chsh_classical() -> Verdict {
    let (ok, out, elapsed) = run_cli(&["classical", "2:001"]);
    let value = field(&out, "value ");
    let win = field(&out, "win_probability ");
    let lib = classical_value(&SymmetricGame::chsh()).value;
    let pass = ok
        && value == Some(0.5)
        && win == Some(0.75)
        && lib == 0.5
        && elapsed < Duration::from_millis(10);
    verdict(
        pass,
        format!("value {value:?}, win {win:?}, {elapsed:?} (process)"),
    )
}

fn classical_oracle() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for n in 1..=5usize {
        let table = KrawtchoukTable::new(n);
        for mask in 0..(1u32 << (n + 1)) {
            let g = SymmetricGame::new((0..=n).map(|j| (mask >> j) & 1 == 1).collect()).unwrap();
            worst = worst.max(
                (classical_value_with(&g, &table).value - brute_force_value(&g).unwrap()).abs(),
            );
            checked += 1;
        }
    }
    let tables: Vec<KrawtchoukTable> = (6..=10).map(KrawtchoukTable::new).collect();
    for i in 0..1000u64 {
        let n = 6 + (i % 5) as usize;
        let g = sample_game(n, SampleDescriptor::new(31, i)).unwrap();
        worst = worst.max(
            (classical_value_with(&g, &tables[n - 6]).value - brute_force_value(&g).unwrap()).abs(),
        );
        checked += 1;
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-12 && elapsed < Duration::from_secs(60),
        format!("{checked} games, max deviation {worst:e}, {elapsed:?}"),
    )
}

/// Max of `|Σ q_j λ^j|` over `points` equally spaced angles, by Horner.
fn dense_grid_max(q: &[f64], points: usize) -> f64 {
    let mut best = 0.0f64;
    for k in 0..points {
        let (s, c) = (TAU * k as f64 / points as f64).sin_cos();
        let (mut re, mut im) = (0.0, 0.0);
        for &a in q.iter().rev() {
            let r = re * c - im * s + a;
            im = re * s + im * c;
            re = r;
        }
        best = best.max((re * re + im * im).sqrt());
    }
    best
}

fn quantum_oracle() -> Verdict {
    const POINTS: usize = 1_000_000;
    let start = Instant::now();
    let h = TAU / POINTS as f64;
    let (mut failures, mut max_width) = (0, 0.0f64);
    for i in 0..1000u64 {
        let n = 2 + (i % 39) as usize;
        let g = sample_game(n, SampleDescriptor::new(41, i)).unwrap();
        let q = build_polynomial(&g, &weights(n).unwrap()).unwrap();
        let enc = entangled_value(&g, DEFAULT_TOL).unwrap();
        let dense = dense_grid_max(q.coefficients(), POINTS);
        // A grid can only undershoot the true maximum. The deficit is at most
        // sup|f''| (h/2)^2 / 2 with sup|f''| <= Σ (j - n/2)^2 |q_j|.
        let mu2: f64 = q
            .coefficients()
            .iter()
            .enumerate()
            .map(|(j, a)| (j as f64 - n as f64 / 2.0).powi(2) * a.abs())
            .sum();
        let deficit = mu2 * h * h / 8.0 + 1e-13;
        max_width = max_width.max(enc.width());
        if !(dense <= enc.upper && enc.lower <= dense + deficit && enc.width() <= 1e-9) {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures == 0 && elapsed < Duration::from_secs(300),
        format!("1000 games, {failures} failures, max width {max_width:e}, {elapsed:?}"),
    )
}

fn fourth_power_bound() -> Verdict {
    let start = Instant::now();
    let failures: Vec<usize> = (1..=200)
        .filter(|&n| !lemma5_check(n).unwrap().holds)
        .collect();
    let elapsed = start.elapsed();
    verdict(
        failures.is_empty() && elapsed < Duration::from_secs(5),
        format!("failures {failures:?}, {elapsed:?}"),
    )
}

fn mgf_by_enumeration(c: &[f64], lambda: f64) -> f64 {
    let terms = 1u64 << c.len();
    let total: f64 = (0..terms)
        .map(|mask| {
            let s: f64 = c
                .iter()
                .enumerate()
                .map(|(m, &cm)| if (mask >> m) & 1 == 1 { -cm } else { cm })
                .sum();
            (lambda * s).exp()
        })
        .sum();
    total / terms as f64
}

fn mgf_bounds() -> Verdict {
    let start = Instant::now();
    let sweep = lemma1_sweep(64, 100, 0).unwrap();
    let mut worst = 0.0f64;
    for n in 0..=12usize {
        let scale = 0.5f64.powi(n as i32);
        let c: Vec<f64> = binomial_row(n)
            .coefficients()
            .iter()
            .map(|b| b.to_string().parse::<f64>().unwrap() * scale)
            .collect();
        for lambda in lambda_grid() {
            let exact = exact_mgf(&c, lambda);
            let brute = mgf_by_enumeration(&c, lambda);
            worst = worst.max((exact - brute).abs() / brute);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        sweep.passed() && worst <= 1e-10 && elapsed < Duration::from_secs(30),
        format!(
            "{} bound checks, {} failures, mgf relative deviation {worst:e}, {elapsed:?}",
            sweep.checked, sweep.failures
        ),
    )
}

fn level_intervals() -> Verdict {
    let start = Instant::now();
    let s = lemma3_sweep(1000, 50, 0).unwrap();
    let elapsed = start.elapsed();
    verdict(
        s.passed() && s.checked == 1000 && elapsed < Duration::from_secs(120),
        format!(
            "{} instances, {} failures, {elapsed:?}",
            s.checked, s.failures
        ),
    )
}

fn event_frequencies() -> Verdict {
    let start = Instant::now();
    let f = theorem_event_frequency(100, 2000, 0).unwrap();
    let elapsed = start.elapsed();
    verdict(
        f.freq_lower >= 0.99 && f.freq_upper >= 0.99 && elapsed < Duration::from_secs(300),
        format!(
            "freq(M >= {C1:.6} norm) = {}, freq(M <= {C2} norm) = {}, {elapsed:?}",
            f.freq_lower, f.freq_upper
        ),
    )
}

fn bounds_fraction() -> Verdict {
    let (ok, out, elapsed) = run_cli(&["verify-bounds", "--n", "100", "--samples", "2000"]);
    let fraction = field(&out, "fraction ");
    let pass = ok && fraction.is_some_and(|f| f >= 0.99) && elapsed < Duration::from_secs(600);
    verdict(pass, format!("fraction {fraction:?}, {elapsed:?}"))
}

fn figure1(dir: &Path) -> Verdict {
    let csv = dir.join("fig1.csv");
    let (ok, _, elapsed) = run_cli(&[
        "figure1",
        "--n-list",
        "10,20,30,40,50,60,70,80,90,100",
        "--samples",
        "1000",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let rows = match std::fs::File::open(&csv)
        .map_err(symxor::Error::from)
        .and_then(read_csv)
    {
        Ok(rows) => rows,
        Err(e) => return verdict(false, format!("cannot read CSV: {e}")),
    };
    let mean = |n: usize| rows.iter().find(|r| r.n == n).map(|r| r.mean_ratio);
    let (Some(m10), Some(m100)) = (mean(10), mean(100)) else {
        return verdict(false, "missing rows");
    };
    let pass =
        ok && m10 > m100 && (0.80..=0.95).contains(&m100) && elapsed < Duration::from_secs(900);
    verdict(
        pass,
        format!("mean_ratio(10) = {m10:.6}, mean_ratio(100) = {m100:.6}, {elapsed:?}"),
    )
}

fn median_gap(n: usize) -> f64 {
    let cfg = EnsembleConfig {
        classical: true,
        ..EnsembleConfig::new(n, 200, 0)
    };
    let mut ratios: Vec<f64> = ensemble_outcomes(&cfg)
        .unwrap()
        .iter()
        .map(|o| o.value / o.classical.unwrap())
        .collect();
    ratios.sort_by(f64::total_cmp);
    0.5 * (ratios[99] + ratios[100])
}

fn gap_direction() -> Verdict {
    let start = Instant::now();
    let (m8, m64) = (median_gap(8), median_gap(64));
    let elapsed = start.elapsed();
    verdict(
        m64 > m8 && elapsed < Duration::from_secs(600),
        format!("median ratio n=8: {m8:.6}, n=64: {m64:.6}, {elapsed:?}"),
    )
}

fn determinism(dir: &Path) -> Verdict {
    let mut files = Vec::new();
    for (run, workers) in [(0, "1"), (1, "1"), (2, "3")] {
        let ens = dir.join(format!("ens{run}.csv"));
        let fig = dir.join(format!("fig{run}.csv"));
        let a = run_cli(&[
            "ensemble",
            "--n",
            "40",
            "--samples",
            "300",
            "--seed",
            "9",
            "--classical",
            "--workers",
            workers,
            "--csv",
            ens.to_str().unwrap(),
        ]);
        let b = run_cli(&[
            "figure1",
            "--n-list",
            "5,17,33",
            "--samples",
            "200",
            "--seed",
            "9",
            "--workers",
            workers,
            "--csv",
            fig.to_str().unwrap(),
        ]);
        let c = run_cli(&[
            "ensemble",
            "--n",
            "6",
            "--exhaustive",
            "--classical",
            "--workers",
            workers,
        ]);
        if !(a.0 && b.0 && c.0) {
            return verdict(false, "a CSV command failed");
        }
        files.push((
            std::fs::read(&ens).unwrap(),
            std::fs::read(&fig).unwrap(),
            c.1.into_bytes(),
        ));
    }
    let same = files.windows(2).all(|w| w[0] == w[1]);
    verdict(
        same,
        "ensemble, figure1 and exhaustive CSV across 2 reruns and workers 1/3",
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Check> = vec![
        ("1 CHSH entangled value", Box::new(chsh_quantum)),
        ("2 CHSH classical value", Box::new(chsh_classical)),
        ("3 classical oracle equivalence", Box::new(classical_oracle)),
        (
            "4 certified enclosure vs dense grid",
            Box::new(quantum_oracle),
        ),
        (
            "5 binomial fourth-power bound",
            Box::new(fourth_power_bound),
        ),
        ("6 moment generating function bounds", Box::new(mgf_bounds)),
        ("7 level interval", Box::new(level_intervals)),
        ("8 threshold event frequencies", Box::new(event_frequencies)),
        ("9 bound fraction", Box::new(bounds_fraction)),
        ("10 normalized mean trend", Box::new(|| figure1(dir.path()))),
        ("11 gap direction", Box::new(gap_direction)),
        ("12 CSV determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let v = check();
        failed += usize::from(!v.ok);
        println!(
            "{} {name}: {}",
            if v.ok { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
