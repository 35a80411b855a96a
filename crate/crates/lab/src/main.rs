fn main() {
    std::process::exit(henon_lab::run(std::env::args_os()));
}
