fn main() {
    std::process::exit(stlb::cli::run(std::env::args_os()));
}
