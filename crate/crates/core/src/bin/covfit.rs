fn main() {
    if let Err(e) = covfit::cli::run(std::env::args_os()) {
        eprintln!("covfit: {}", e.message.trim_end());
        std::process::exit(e.code);
    }
}
