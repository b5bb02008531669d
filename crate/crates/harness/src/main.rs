fn main() {
    std::process::exit(perispline_harness::cli::run(std::env::args_os()));
}
