use clap::Parser;

fn main() {
    std::process::exit(qres::cli::run(qres::cli::Cli::parse()));
}
