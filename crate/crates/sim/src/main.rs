use clap::Parser;
use tangram_sim::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(msg) => println!("{msg}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
