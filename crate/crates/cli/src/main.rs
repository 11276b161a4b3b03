use clap::Parser;

fn main() {
    let cli = geodecomp_cli::Cli::parse();
    if let Err(e) = geodecomp_cli::run(cli) {
        eprintln!("geodecomp: {e}");
        std::process::exit(e.exit_code());
    }
}
