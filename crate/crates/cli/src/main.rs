fn main() {
    let code = optomech_cli::run(std::env::args_os(), &mut std::io::stderr());
    std::process::exit(code);
}
