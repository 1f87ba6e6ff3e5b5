fn main() -> std::process::ExitCode {
    omega_pe::cli::main_entry()
}
