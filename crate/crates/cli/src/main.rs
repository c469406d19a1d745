use clap::Parser;

fn main() {
    let cli = wavemap_cli::Cli::parse();
    let code = wavemap_cli::execute(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
