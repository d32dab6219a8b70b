fn main() -> std::process::ExitCode {
    cantor_normal::cli::main_entry()
}
