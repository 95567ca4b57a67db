use clap::Parser;

fn main() {
    let cli = sigprice_cli::Cli::parse();
    if let Err(e) = sigprice_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
