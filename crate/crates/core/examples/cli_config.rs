//! Drive the command-line runner from a JSON config file.

use std::fs;

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("gordonlab-example");
    fs::create_dir_all(&dir)?;
    let cfg = dir.join("rp.json");
    fs::write(
        &cfg,
        r#"{"subcommand": "rp-search", "system": "rotation", "alpha": ["golden"], "omega": [0], "epsilon": 0.01, "r": 2, "qmax": 100}"#,
    )?;
    let code = gordonlab::cli::run(["gordonlab", "--config", cfg.to_str().unwrap()]);
    println!("exit code {code}");
    Ok(())
}
