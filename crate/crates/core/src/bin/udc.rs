fn main() {
    std::process::exit(cifc_udc::cli::run(std::env::args_os()));
}
