fn main() -> std::process::ExitCode {
    eikonal_twoscale::cli::main()
}
