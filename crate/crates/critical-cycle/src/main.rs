fn main() {
    std::process::exit(critical_cycle::cli::run());
}
