fn main() {
    std::process::exit(qlab::run(std::env::args_os()));
}
