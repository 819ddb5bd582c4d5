fn main() -> std::process::ExitCode {
    finite_ibm::cli::main()
}
