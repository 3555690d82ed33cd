use clap::Parser;

fn main() {
    let cli = costdr::cli::Cli::parse();
    if let Err(e) = costdr::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
