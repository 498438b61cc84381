use clap::Parser;
use medsumm_cli::{run, Cli, EXIT_CHECK, EXIT_INPUT};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            for r in &outcome.reports {
                print!("{}", r.text);
            }
            if let Some(msg) = outcome.check_failure {
                eprintln!("check failed: {msg}");
                std::process::exit(EXIT_CHECK);
            }
        }
        Err(e) => {
            eprintln!("medsumm-kit: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
