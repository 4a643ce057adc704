fn main() {
    std::process::exit(sohq::cli::main());
}
