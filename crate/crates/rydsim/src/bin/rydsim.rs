fn main() {
    std::process::exit(rydsim::cli::main_entry());
}
