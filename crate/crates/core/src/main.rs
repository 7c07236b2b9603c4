fn main() {
    std::process::exit(qd_cluster::cli::run(std::env::args_os()));
}
