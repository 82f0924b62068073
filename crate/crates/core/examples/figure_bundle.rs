//! Drive the command-line front end: write a reduced fig3 bundle (data and
//! theory curves for several observed fractions) into a run directory.
//!
//!     cargo run --release --example figure_bundle -- [out-dir]

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "runs/example-fig3".into());
    let code = missing_levels::cli::main_with_args([
        "missing-levels",
        "--seed",
        "3",
        "--phi",
        "1,0.85,0.7",
        "--out",
        &out,
        "figure",
        "fig3",
        "--dim",
        "100",
        "--count",
        "60",
    ]);
    if code == 0 {
        let manifest = std::path::Path::new(&out).join("manifest.toml");
        println!("manifest: {}", manifest.display());
    }
    std::process::exit(code);
}
