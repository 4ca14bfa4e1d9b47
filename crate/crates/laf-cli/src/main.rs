//! `laf` — desk-scale experiment runner for large additive prime functions.
//!
//! Exit codes: 0 = all embedded assertions passed (recovered cache
//! corruption only warns), 1 = at least one embedded assertion failed,
//! 2 = configuration or I/O error (nothing is written in that case).

mod config;
mod registry;
mod run;

use clap::Parser;

/// Streams n = 1..x_max once and writes one CSV + JSON report per selected
/// experiment, comparing exact desk-scale sums against their predicted
/// asymptotic values.
#[derive(Parser, Debug)]
#[command(name = "laf", version, about)]
struct Cli {
    /// List the experiment catalog (id, anchor, summary) and exit.
    #[arg(long)]
    list: bool,

    /// Comma-separated experiment ids, or "all".
    #[arg(long)]
    experiments: Option<String>,

    /// Largest n streamed; accepts scientific notation like 1e7.
    #[arg(long = "x-max", value_name = "N")]
    x_max: Option<String>,

    /// Sample points: comma list ("1e4,1e6") or geometric "start:ratio:count".
    #[arg(long = "x-samples", value_name = "SPEC")]
    x_samples: Option<String>,

    /// Sieve segment length in records (output is identical for any value).
    #[arg(long = "segment-size", value_name = "N")]
    segment_size: Option<String>,

    /// Directory for the binary segment cache; omit to disable caching.
    #[arg(long = "cache-dir", value_name = "DIR")]
    cache_dir: Option<String>,

    /// Sieve worker threads, >= 1 (output is identical at any count).
    #[arg(long, value_name = "N")]
    threads: Option<String>,

    /// Output directory for the CSV/JSON reports (default: laf-out).
    #[arg(long, value_name = "DIR")]
    out: Option<String>,

    /// Flat key=value config file; env vars LAF_* override it, flags override both.
    #[arg(long, value_name = "FILE")]
    config: Option<String>,
}

fn flag_layer(cli: &Cli) -> config::Layer {
    config::Layer {
        experiments: cli.experiments.clone(),
        x_max: cli.x_max.clone(),
        x_samples: cli.x_samples.clone(),
        segment_size: cli.segment_size.clone(),
        cache_dir: cli.cache_dir.clone(),
        threads: cli.threads.clone(),
        out: cli.out.clone(),
        config: cli.config.clone(),
    }
}

fn run_cli(cli: &Cli) -> i32 {
    if cli.list {
        print!("{}", registry::catalog());
        return 0;
    }
    let cfg = match config::resolve(flag_layer(cli), |k| std::env::var(k).ok()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    match run::run(&cfg) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.failures.is_empty() {
                0
            } else {
                for f in &outcome.failures {
                    eprintln!("assertion failed: {f}");
                }
                eprintln!("{} embedded assertion(s) failed", outcome.failures.len());
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run_cli(&cli));
}
