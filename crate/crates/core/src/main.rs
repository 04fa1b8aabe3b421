use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use symxor::classical::classical_value;
use symxor::combinatorics::lemma5_check;
use symxor::ensemble::{
    default_bounds_threshold, figure1_series, run_ensemble, run_exhaustive, verify_bounds,
    write_csv, EnsembleConfig, EnsembleStats,
};
use symxor::game::{format_game, parse_game, sample_game, SampleDescriptor};
use symxor::plot::emit_plot_script;
use symxor::quantum::{entangled_value, win_probability, DEFAULT_TOL};
use symxor::sz::{lemma1_sweep, lemma3_sweep, lemma4_sweep, theorem_event_frequency, C1, C2};
use symxor::Error;

#[derive(Parser)]
#[command(
    name = "symxor",
    version,
    about = "Values of n-player symmetric XOR games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entangled value of one game, e.g. `value 2:001`.
    Value {
        game: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Classical value of one game.
    Classical { game: String },
    /// Print sampled games in canonical form.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: u64,
    },
    /// Statistics of the normalized entangled value over random games.
    Ensemble {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        classical: bool,
        /// Enumerate all 2^(n+1) games instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// One ensemble row per n.
    Figure1 {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        classical: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Fraction of games with C1·norm <= value <= 2·C2·norm.
    VerifyBounds {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pass threshold; defaults to 0.99 for n >= 50, report-only below.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Numerical checks of the moment, level-set, Paley-Zygmund and binomial bounds.
    SzCheck {
        /// 1, 3, 4, 5 or `theorems`; all when omitted.
        #[arg(long)]
        lemma: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a matplotlib script for a figure1 CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn emit_csv(rows: &[EnsembleStats], path: Option<&PathBuf>) -> symxor::Result<()> {
    match path {
        Some(p) => write_csv(rows, BufWriter::new(File::create(p)?)),
        None => write_csv(rows, io::stdout().lock()),
    }
}

fn pass_line(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn sz_check(
    lemma: Option<&str>,
    n: Option<usize>,
    samples: Option<usize>,
    seed: u64,
) -> symxor::Result<Outcome> {
    let want = |key: &str| lemma.is_none_or(|l| l == key);
    if let Some(l) = lemma {
        if !["1", "3", "4", "5", "theorems"].contains(&l) {
            return Err(Error::InvalidArgument(format!(
                "unknown lemma {l:?}; use 1, 3, 4, 5 or theorems"
            )));
        }
    }
    let mut all = true;
    if want("1") {
        let s = lemma1_sweep(n.unwrap_or(64), samples.unwrap_or(100), seed)?;
        all &= pass_line(
            "lemma 1 moment bounds",
            s.passed(),
            format!("{} checks, {} failures", s.checked, s.failures),
        );
    }
    if want("3") {
        let s = lemma3_sweep(samples.unwrap_or(1000), n.unwrap_or(50), seed)?;
        all &= pass_line(
            "lemma 3 level interval",
            s.passed(),
            format!("{} instances, {} failures", s.checked, s.failures),
        );
    }
    if want("4") {
        for (delta, r) in lemma4_sweep(n.unwrap_or(50), samples.unwrap_or(1000), seed)? {
            all &= pass_line(
                &format!("lemma 4 Paley-Zygmund delta={delta}"),
                r.holds,
                format!("empirical {:.6} vs bound {:.6}", r.empirical, r.bound),
            );
        }
    }
    if want("5") {
        let max_n = n.unwrap_or(200);
        let failures: Vec<usize> = (1..=max_n)
            .filter(|&k| !lemma5_check(k).is_ok_and(|o| o.holds))
            .collect();
        all &= pass_line(
            "lemma 5 T/R^2 <= (4/3) n^-1/2",
            failures.is_empty(),
            format!("n = 1..={max_n}, failures at {failures:?}"),
        );
    }
    if want("theorems") {
        let tn = n.unwrap_or(100);
        let f = theorem_event_frequency(tn, samples.unwrap_or(2000), seed)?;
        println!(
            "INFO theorem events n={tn}: freq(M >= C1 sqrt(R ln n)) = {:.6}, freq(M <= C2 sqrt(R ln n)) = {:.6} (C1 = {C1:.6}, C2 = {C2})",
            f.freq_lower, f.freq_upper
        );
    }
    Ok(if all { Outcome::Pass } else { Outcome::Fail })
}

fn run(cli: Cli) -> symxor::Result<Outcome> {
    match cli.command {
        Command::Value { game, tol } => {
            let g = parse_game(&game)?;
            let enc = entangled_value(&g, tol)?;
            let bias = enc.midpoint();
            println!("game {}", format_game(&g));
            println!("bias {bias:.12}");
            println!("win_probability {:.12}", win_probability(bias));
            println!("argmax_angle {:.12}", enc.argmax_angle);
            println!("enclosure [{:.15}, {:.15}]", enc.lower, enc.upper);
        }
        Command::Classical { game } => {
            let g = parse_game(&game)?;
            let v = classical_value(&g);
            println!("game {}", format_game(&g));
            println!("value {}", v.value);
            println!("win_probability {}", win_probability(v.value));
            println!("best_k {}", v.best_k);
            println!("best_c {}", u8::from(v.best_c));
        }
        Command::Sample { n, seed, count } => {
            let mut out = BufWriter::new(io::stdout().lock());
            for i in 0..count {
                writeln!(
                    out,
                    "{}",
                    format_game(&sample_game(n, SampleDescriptor::new(seed, i))?)
                )?;
            }
            out.flush()?;
        }
        Command::Ensemble {
            n,
            samples,
            seed,
            classical,
            exhaustive,
            workers,
            tol,
            csv,
        } => {
            let stats = if exhaustive {
                run_exhaustive(n, tol, classical, workers)?
            } else {
                run_ensemble(&EnsembleConfig {
                    n,
                    samples,
                    master_seed: seed,
                    tol,
                    workers,
                    classical,
                })?
            };
            emit_csv(std::slice::from_ref(&stats), csv.as_ref())?;
            if csv.is_some() {
                println!(
                    "n={} samples={} mean_ratio={:.6} std_ratio={:.6} frac_in_bounds={:.6}",
                    stats.n, stats.samples, stats.mean_ratio, stats.std_ratio, stats.frac_in_bounds
                );
            }
        }
        Command::Figure1 {
            n_list,
            samples,
            seed,
            csv,
            classical,
            workers,
            tol,
        } => {
            let rows = figure1_series(&n_list, samples, seed, tol, workers, classical)?;
            emit_csv(&rows, Some(&csv))?;
            for r in &rows {
                println!(
                    "n={:>4} mean_ratio={:.6} std_ratio={:.6}",
                    r.n, r.mean_ratio, r.std_ratio
                );
            }
        }
        Command::VerifyBounds {
            n,
            samples,
            seed,
            threshold,
            workers,
            tol,
        } => {
            let report = verify_bounds(n, samples, seed, tol, workers)?;
            println!("n {n}");
            println!("samples {samples}");
            println!("norm_factor {:.17e}", report.norm_factor);
            println!("frac_lower {:.6}", report.frac_lower);
            println!("frac_upper {:.6}", report.frac_upper);
            println!("fraction {:.6}", report.fraction);
            match threshold.or(default_bounds_threshold(n)) {
                Some(t) => {
                    let ok = report.passes(t);
                    println!(
                        "{} fraction {:.6} vs threshold {t}",
                        if ok { "PASS" } else { "FAIL" },
                        report.fraction
                    );
                    if !ok {
                        return Ok(Outcome::Fail);
                    }
                }
                None => println!("REPORT-ONLY n < 50: no pass/fail claim"),
            }
        }
        Command::SzCheck {
            lemma,
            n,
            samples,
            seed,
        } => return sz_check(lemma.as_deref(), n, samples, seed),
        Command::Plot { csv, out } => {
            emit_plot_script(&csv, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
