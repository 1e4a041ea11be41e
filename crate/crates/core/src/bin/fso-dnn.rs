fn main() {
    std::process::exit(fso_dnn::harness::cli::run(std::env::args_os()));
}
