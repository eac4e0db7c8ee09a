use clap::Parser;
use mfpotts_cli::{execute, Cli};

fn main() {
    // clap exits with status 2 on malformed arguments
    let cli = Cli::parse();
    let code = match execute(&cli).and_then(|o| o.write().map(|_| o)) {
        Ok(o) => {
            for n in &o.notes {
                eprintln!("{n}");
            }
            if let Some(f) = &o.failure {
                eprintln!("{f}");
            }
            o.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
