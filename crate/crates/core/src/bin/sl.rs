fn main() {
    std::process::exit(sl::cli::dispatch(std::env::args_os()));
}
