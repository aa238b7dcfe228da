use clap::Parser;

fn main() {
    let cli = ovmf::cli::Cli::parse();
    std::process::exit(ovmf::cli::main_with(cli));
}
