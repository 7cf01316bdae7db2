use clap::Parser;

fn main() {
    let cli = nupbr_cli::Cli::parse();
    std::process::exit(nupbr_cli::run(&cli));
}
