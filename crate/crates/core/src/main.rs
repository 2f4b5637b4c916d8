fn main() {
    std::process::exit(qspeed::cli::run());
}
