use clap::Parser;
use inversions_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => println!("{out}"),
        Err(e) => {
            eprintln!("invcount: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
