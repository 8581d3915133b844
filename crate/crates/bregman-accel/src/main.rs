/// Restore the default SIGPIPE disposition so that piping output into a
/// consumer that exits early (`verify | head`) terminates this process
/// quietly, as Unix filters conventionally do, instead of panicking on a
/// closed stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    std::process::exit(bregman_accel::cli::run_cli());
}
