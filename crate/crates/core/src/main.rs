fn main() {
    std::process::exit(crowdfs::cli::main_entry());
}
