use clap::Parser;
use cocycle_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(run) => {
            if !cli.quiet {
                print!("{}", run.summary());
            }
            if let Some(msg) = run.failure_message() {
                eprintln!("error: {msg}");
            }
            run.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
