fn main() {
    env_logger::init();
    if let Err(e) = supplyfrag_cli::configure_threads() {
        eprintln!("supplyfrag: {e}");
        std::process::exit(e.exit_code());
    }
    std::process::exit(supplyfrag_cli::run(std::env::args_os()));
}
