use clap::Parser;

fn main() {
    let cli = tvfilter::cli::Cli::parse();
    std::process::exit(tvfilter::cli::run(cli));
}
