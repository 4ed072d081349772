fn main() {
    std::process::exit(stagcalc::cli::main());
}
