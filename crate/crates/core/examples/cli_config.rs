//! Driving the command-line front end from code with a TOML configuration.
//!
//! cargo run --release --example cli_config

use deffuant_lab::cli::main_with_args;

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("deffuant-cli-example");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        r#"seed = 42
runs = 200
graph = "complete:10"
space = "box:1:l2"
dist = "uniform"
tau = 0.8
mu = 0.5
taus = [0.6, 0.8, 1.0]
"#,
    )?;
    let config = config.to_string_lossy().into_owned();
    let out = dir.join("out").to_string_lossy().into_owned();

    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    for cmd in ["bound", "sweep"] {
        println!("$ deffuant {cmd} --config {config}");
        let code = main_with_args(["deffuant", cmd, "--config", &config, "--out", &out], &mut stdout, &mut stderr);
        println!("exit code {code}\n");
    }
    // flags win over the file
    let code = main_with_args(["deffuant", "bound", "--config", &config, "--tau", "0.45"], &mut stdout, &mut stderr);
    println!("exit code {code}; files in {out}");
    Ok(())
}
