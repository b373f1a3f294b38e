use clap::Parser;

use qcrb_core::cli::{run, RunManifest};

fn main() {
    let manifest = RunManifest::parse();
    match run(&manifest) {
        Ok(outcome) => {
            for path in &outcome.written {
                println!("{}", path.display());
            }
            if let Some(message) = &outcome.violation {
                eprintln!("qcrb: invariant violated: {message}");
            }
            std::process::exit(outcome.exit_code());
        }
        Err(e) => {
            eprintln!("qcrb: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
