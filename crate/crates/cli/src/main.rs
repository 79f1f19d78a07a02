use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = resilmap_cli::Cli::parse();
    if let Err(e) = resilmap_cli::run(cli) {
        eprintln!("resilmap: {e}");
        std::process::exit(e.exit_code());
    }
}
