fn main() -> std::process::ExitCode {
    iqme_cli::run(std::env::args_os())
}
