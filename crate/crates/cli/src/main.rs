fn main() {
    std::process::exit(dito::main_with_args(std::env::args_os()));
}
