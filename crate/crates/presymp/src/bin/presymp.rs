fn main() {
    let seed = std::env::var("PRESYMP_SEED").ok();
    let code = presymp::io_cli::main_with(std::env::args_os(), seed.as_deref(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
