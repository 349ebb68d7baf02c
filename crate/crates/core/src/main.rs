use std::io::IsTerminal;

fn main() {
    let color =
        std::env::var_os(ris_vlc::cli::NO_COLOR_ENV).is_none() && std::io::stdout().is_terminal();
    let code = ris_vlc::cli::run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
        color,
    );
    std::process::exit(code);
}
