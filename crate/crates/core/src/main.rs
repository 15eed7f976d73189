fn main() {
    env_logger::init();
    std::process::exit(ardc::cli::run(std::env::args_os()));
}
