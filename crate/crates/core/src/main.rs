fn main() {
    std::process::exit(pareto_forge::cli::run(std::env::args_os()));
}
