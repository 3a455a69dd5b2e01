fn main() {
    std::process::exit(multibump::cli::main_from(std::env::args_os()));
}
