use clap::Parser;
use cone_schauder::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
