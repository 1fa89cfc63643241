fn main() -> std::process::ExitCode {
    convex_reflector::cli::main()
}
