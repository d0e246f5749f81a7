fn main() {
    std::process::exit(oce_rl::experiment::cli_dispatch(std::env::args_os()));
}
