fn main() {
    std::process::exit(seqbell::cli::run(std::env::args_os()));
}
