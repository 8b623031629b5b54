fn main() -> std::process::ExitCode {
    msk_collide::cli::run()
}
