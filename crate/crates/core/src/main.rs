fn main() {
    env_logger::init();
    std::process::exit(phonotact::cli::run(std::env::args_os()));
}
