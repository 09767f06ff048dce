fn main() {
    std::process::exit(susyprop::cli::main_entry());
}
