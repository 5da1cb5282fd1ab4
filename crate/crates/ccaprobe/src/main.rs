fn main() {
    std::process::exit(ccaprobe::cli::main());
}
