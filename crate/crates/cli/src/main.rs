use clap::Parser;

fn main() {
    let cli = ratcon_cli::Cli::parse();
    if let Err(f) = ratcon_cli::run(&cli) {
        eprintln!("error: {}", f.message());
        std::process::exit(f.exit_code());
    }
}
