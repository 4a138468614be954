fn main() {
    std::process::exit(vortex_lattice::cli::run(std::env::args_os()));
}
