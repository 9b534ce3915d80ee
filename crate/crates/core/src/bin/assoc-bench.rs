fn main() {
    std::process::exit(assoc_bench::cli::run(std::env::args_os()));
}
