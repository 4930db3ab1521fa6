use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use resurge_cli::acceptance;
use resurge_cli::cache::KernelCache;
use resurge_cli::commands::{self, Command, EXIT_FAILED, EXIT_INVALID, EXIT_OK};
use resurge_cli::config::RunConfig;
use resurge_cli::write_outcome;

#[derive(Parser)]
#[command(name = "resurge", version, about = "Écalle–Voronin invariants of parabolic germs from resurgent residua")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override m_list (comma separated).
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    m: Option<Vec<i64>>,
    #[arg(long, global = true)]
    kmax: Option<usize>,
    /// Working precision in bits.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Residua S_k, S^Γ_ω and A_{-m} for every m.
    Invariants,
    /// Horn-map Fourier coefficients from the dynamical oracle.
    Oracle,
    /// Residua against the oracle, with PASS/FAIL per invariant.
    Compare,
    /// CSV of the continued Φ̂_k along Γ̃.
    Profile {
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Criteria to run (comma separated); all by default.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
    },
}

fn load(cli: &Cli) -> Result<RunConfig, String> {
    let path = cli.config.as_ref().ok_or("--config is required")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut cfg = RunConfig::from_json(&text).map_err(|e| e.to_string())?;
    if let Some(m) = &cli.m {
        cfg.m_list = m.clone();
    }
    if let Some(k) = cli.kmax {
        cfg.k_max = k;
    }
    if let Some(p) = cli.precision {
        cfg.precision_bits = p;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match &cli.cmd {
        Cmd::Selftest { only } => {
            let ids = only.clone().unwrap_or_else(|| (1..=acceptance::COUNT).collect());
            let mut ok = true;
            for id in ids {
                let r = acceptance::run(id);
                ok &= r.pass;
                println!("{}", r.line());
            }
            return ExitCode::from(if ok { EXIT_OK } else { EXIT_FAILED } as u8);
        }
        Cmd::Invariants => Command::Invariants,
        Cmd::Oracle => Command::Oracle,
        Cmd::Compare => Command::Compare,
        Cmd::Profile { .. } => Command::Profile,
    };
    let k = if let Cmd::Profile { k } = cli.cmd { k } else { 0 };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    let out = cli.out.clone().or_else(|| cfg.output.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("resurge-out"));
    let cache = KernelCache::for_output(&out);
    let outcome = match commands::run(cmd, &cfg, &cache, k) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    if let Err(e) = write_outcome(&out, &outcome) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return ExitCode::from(EXIT_FAILED as u8);
    }
    if !cli.quiet {
        summarize(&outcome);
        println!("wrote {}", out.join("record.json").display());
    }
    for f in &outcome.record.failures {
        eprintln!("failure: {f}");
    }
    ExitCode::from(outcome.exit as u8)
}

fn summarize(o: &commands::Outcome) {
    for r in &o.record.residua {
        println!("m = {:>3}  A_{} = [{}, {}]  (S sum err {:.1e}, Λ = {:.3})", r.m, -r.m, r.a[0], r.a[1], r.sum_err, r.lambda_fit);
    }
    for f in &o.record.oracle {
        println!("oracle {:?}: const = [{}, {}], {} modes above floor {:.1e}", f.side, f.const_term[0], f.const_term[1], f.a.len(), f.residual_floor);
    }
    for c in &o.record.comparison {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] A_{}: rel. diff {:?} (tol {:e})", c.index, c.rel_diff, c.tol);
    }
}
