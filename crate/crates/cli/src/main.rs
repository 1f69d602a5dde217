use clap::Parser;
use quench_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            if let Some(report) = &summary.report {
                print!("{report}");
            }
            eprintln!("wrote {} rows to {}", summary.rows, summary.out.display());
            if cli.verify {
                eprintln!("verified {} rows", summary.verified_rows);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
