fn main() {
    std::process::exit(slice_admission::cli::run(std::env::args_os()));
}
