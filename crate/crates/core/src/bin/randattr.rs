fn main() {
    std::process::exit(randattr::cli::main_with(std::env::args_os()));
}
