//! Entry point of the `conv-regions` binary.

use clap::Parser;

use conv_regions_cli::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(error) = execute(cli) {
        eprintln!("{}", error.to_json());
        std::process::exit(error.exit_code());
    }
}
