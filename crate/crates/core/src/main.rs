fn main() {
    let code = depbound::cli::run(std::env::args_os());
    std::process::exit(code);
}
