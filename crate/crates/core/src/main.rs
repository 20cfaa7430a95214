fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(pmframe::cli::run(&args));
}
