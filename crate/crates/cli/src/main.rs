use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mrset::evalexpr::{EvalConfig, QueryMode};
use mrset_cli::bench::{self, BenchConfig, Shape};
use mrset_cli::index::{self, BuildOptions};
use mrset_cli::{input, CliError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mrset", version, about = "Exact set expression queries over preprocessed integer sets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    General,
    Intersect,
}

#[derive(Subcommand)]
enum Cmd {
    /// Preprocess an element file into an index directory.
    Build {
        /// Newline-separated decimal integers (or 8-byte LE records with --binary).
        input: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Key width in bits.
        #[arg(long)]
        w: Option<u32>,
        /// Simulated word width in bits (64, 128, 256 or 512).
        #[arg(long = "W")]
        word_bits: Option<u32>,
        /// 32 hex digits or a decimal u64.
        #[arg(long)]
        seed: Option<String>,
        /// Resolution constant stored with the index.
        #[arg(long = "C")]
        c: Option<u32>,
        #[arg(long)]
        binary: bool,
    },
    /// Evaluate an expression such as "(A & (B | C))".
    Query {
        dir: PathBuf,
        #[arg(long)]
        expr: String,
        /// Print a JSON stats record to stderr.
        #[arg(long)]
        stats: bool,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
        /// Fixed resolution instead of the formula.
        #[arg(long)]
        r: Option<u32>,
        /// Override the stored resolution constant.
        #[arg(long = "C")]
        c: Option<u32>,
        #[arg(long)]
        no_rewrite: bool,
        #[arg(long)]
        no_reduce: bool,
    },
    /// Run an operation-count sweep and print JSON lines.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "16384,32768")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        overlap: f64,
        #[arg(long, value_enum, default_value = "and")]
        shape: Shape,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long = "W", value_delimiter = ',', default_value = "64,128,256,512")]
        widths: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        w: u32,
        #[arg(long = "C", default_value_t = mrset::multires::DEFAULT_C)]
        c: u32,
        #[arg(long)]
        rewrite: bool,
        /// Fail unless the cost trends hold.
        #[arg(long)]
        check: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Build {
            input: path,
            name,
            out,
            w,
            word_bits,
            seed,
            c,
            binary,
        } => {
            let opts = BuildOptions {
                w,
                word_bits,
                seed: seed.as_deref().map(input::parse_seed).transpose()?,
                c,
                binary,
            };
            let rep = index::build(&path, &name, &out, &opts)?;
            eprintln!(
                "built {name}: n1={} dedup={} -> {}",
                rep.n1,
                rep.dedup,
                rep.path.display()
            );
        }
        Cmd::Query {
            dir,
            expr,
            stats,
            mode,
            r,
            c,
            no_rewrite,
            no_reduce,
        } => {
            let cfg = EvalConfig {
                c: c.unwrap_or(mrset::multires::DEFAULT_C),
                resolution: r,
                mode: match mode {
                    Mode::Auto => QueryMode::Auto,
                    Mode::General => QueryMode::General,
                    Mode::Intersect => QueryMode::Intersect,
                },
                rewrite: !no_rewrite,
                reduce: !no_reduce,
            };
            let (result, st) = index::query(&dir, &expr, &cfg, c.is_some())?;
            let mut out = BufWriter::new(io::stdout().lock());
            for x in &result {
                writeln!(out, "{x}").map_err(stdout_err)?;
            }
            out.flush().map_err(stdout_err)?;
            if stats {
                eprintln!("{}", serde_json::to_string(&st).expect("stats serialize"));
            }
        }
        Cmd::Bench {
            sizes,
            overlap,
            shape,
            m,
            widths,
            trials,
            seed,
            w,
            c,
            rewrite,
            check,
        } => {
            let cfg = BenchConfig {
                sizes,
                overlap,
                shape,
                m,
                widths,
                trials,
                seed,
                w,
                c,
                rewrite,
            };
            let cells = bench::run(&cfg)?;
            let mut out = BufWriter::new(io::stdout().lock());
            let header = json!({
                "type": "header",
                "config": &cfg,
                "trial_seeds": "ChaCha8 of the root seed, stream = trial index",
            });
            writeln!(out, "{header}").map_err(stdout_err)?;
            for c in &cells {
                let mut v = serde_json::to_value(c).expect("cell serializes");
                v["type"] = json!("cell");
                writeln!(out, "{v}").map_err(stdout_err)?;
            }
            out.flush().map_err(stdout_err)?;
            if check {
                let bad = bench::check(&cells);
                if !bad.is_empty() {
                    return Err(CliError::Check(bad.join("; ")));
                }
            }
        }
    }
    Ok(())
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
