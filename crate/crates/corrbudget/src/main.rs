use clap::Parser;

fn main() {
    let cli = corrbudget::cli::Cli::parse();
    std::process::exit(corrbudget::cli::run(cli));
}
