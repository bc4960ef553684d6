//! Drive the command-line interface from code: print the resolved default
//! configuration, then run the constants subcommand with a radial signal
//! supplied through a config file.

fn run(args: &[&str]) -> i32 {
    noisyroots::cli::main_with_args(std::iter::once("noisyroots").chain(args.iter().copied()))
}

fn main() -> std::io::Result<()> {
    let code = run(&["--emit-config", "constants"]);
    eprintln!("emit-config exited with {code}");

    let path = std::env::temp_dir().join("noisyroots_radial.json");
    std::fs::write(
        &path,
        r#"{ "signal": { "kind": "radial", "r": 1.0 }, "m": [1, 2, 4, 8] }"#,
    )?;
    let code = run(&["--config", path.to_str().unwrap(), "--format", "csv", "constants"]);
    eprintln!("constants exited with {code}");
    std::fs::remove_file(path)
}
