fn main() {
    std::process::exit(dynlat::cli::run(std::env::args_os()));
}
