fn main() -> std::process::ExitCode {
    let code = phaseret::harness::cli_main(std::env::args_os());
    std::process::ExitCode::from(code as u8)
}
