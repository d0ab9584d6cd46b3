use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod config;
mod output;
mod run;

#[derive(Parser)]
#[command(name = "stasis", version, about = "Singular oscillatory integrals: expansions, bounds and decay experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file
    Run {
        config: PathBuf,
        /// Also write a log-log SVG plot
        #[arg(long)]
        plot: bool,
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (default: current directory)
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List the built-in amplitudes and phases
    Catalog,
}

fn run(config: PathBuf, plot: bool, jobs: Option<usize>, out: PathBuf) -> Result<Option<bool>> {
    let cfg = config::load(&config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        anyhow::ensure!(n > 0, "--jobs must be at least 1");
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("cannot start worker threads")?;
    let outcome = pool.install(|| run::run(&cfg))?;

    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    for (suffix, table) in &outcome.tables {
        let path = out.join(format!("{}{suffix}.csv", cfg.output));
        output::write_atomic(&path, &table.render())?;
        println!("wrote {}", path.display());
    }
    if plot {
        if let Some((title, x, y, series)) = &outcome.plot {
            let path = out.join(format!("{}.svg", cfg.output));
            output::write_atomic(&path, &output::loglog_svg(title, x, y, series))?;
            println!("wrote {}", path.display());
        }
    }
    for line in &outcome.summary {
        println!("{line}");
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog => {
            print!("{}", stasis_core::catalog::catalog_list());
            ExitCode::SUCCESS
        }
        Command::Run { config, plot, jobs, out } => match run(config, plot, jobs, out) {
            Ok(Some(false)) => ExitCode::from(2),
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
