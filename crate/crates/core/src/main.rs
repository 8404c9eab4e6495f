fn main() {
    let mut stdout = std::io::stdout().lock();
    std::process::exit(lipuncert::cli::run(std::env::args_os(), &mut stdout));
}
