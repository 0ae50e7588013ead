use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use toboggan_susy::cli::{self, Command, Invocation};
use toboggan_susy::exec;

#[derive(Debug, Parser)]
#[command(name = "toboggan-susy", version, about = "Contour supersymmetry checks, spectra and path classes")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Strict JSON job description.
    #[arg(long)]
    config: PathBuf,
    /// Directory for reports and samples.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let threads = std::env::var(cli::THREADS_ENV).ok();
    let outcome = cli::thread_cap(threads.as_deref()).and_then(|cap| {
        if let Some(n) = cap {
            exec::configure_threads(n);
        }
        cli::run(&Invocation {
            command: args.command,
            config: args.config,
            out: args.out,
            seed: args.seed,
        })
    });
    match outcome {
        Ok((files, passed)) => {
            for f in files {
                println!("{}", f.display());
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
