fn main() {
    std::process::exit(msan::cli::main_entry());
}
