fn main() {
    std::process::exit(mpsl::run(std::env::args_os()));
}
