use clap::Parser;
use spla_cli::bench::run_cli;
use spla_cli::config::Flags;

fn main() {
    let flags = Flags::parse();
    let code = run_cli(
        flags,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
