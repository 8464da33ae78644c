use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use xxbath_cli::{load, output, preset_names, run, CliError, Overrides, TableCache};

/// Simulate qubits coupled to periodic XX spin-chain baths.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    /// Preset name (e.g. fig4) or path to a TOML config.
    target: Option<String>,
    /// Output directory (default: out/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare against the dense oracle (N <= 8) and write verify.txt.
    #[arg(long)]
    verify: bool,
    /// Integration step in gt units.
    #[arg(long)]
    dt: Option<f64>,
    /// Final time in gt units.
    #[arg(long)]
    gt_max: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// List the stock presets and exit.
    #[arg(long)]
    list_presets: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simulate: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: Args) -> Result<(), CliError> {
    if args.list_presets {
        for name in preset_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let target = args
        .target
        .ok_or_else(|| CliError::Usage("missing <preset|config-path>; see --list-presets".into()))?;
    if args.threads == Some(0) {
        return Err(CliError::usage("--threads", "must be at least 1"));
    }
    let overrides = Overrides {
        out: args.out,
        verify: args.verify,
        dt: args.dt,
        gt_max: args.gt_max,
    };
    let exp = load(&target, &overrides)?;
    let result = run(&exp, &TableCache::from_env(), args.threads)?;
    let files = output::render(&result);
    for path in output::write(&exp.out_dir, &files)? {
        println!("{}", path.display());
    }
    eprintln!("max norm drift {:.3e}", result.max_norm_drift());
    let failures = result.verification_failures();
    if !failures.is_empty() {
        let points: Vec<String> = failures.iter().map(|p| format!("h={} J={}", p.point.h, p.point.j)).collect();
        return Err(CliError::Verification(format!("oracle mismatch at {}", points.join(", "))));
    }
    Ok(())
}
