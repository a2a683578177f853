use clap::Parser;

fn main() {
    let cli = mimoy::cli::Cli::parse();
    std::process::exit(mimoy::cli::run(cli));
}
