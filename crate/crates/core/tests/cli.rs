use std::fs;
use std::path::Path;

use missing_levels::cli::main_with_args;
use missing_levels::spectra::io::{read_curve, read_levels};

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("missing-levels").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> toml::Table {
    fs::read_to_string(dir.join("manifest.toml"))
        .unwrap()
        .parse()
        .unwrap()
}

fn sample(out: &Path, seed: &str) {
    let code = run(&[
        "--seed",
        seed,
        "--out",
        s(out),
        "rmt-sample",
        "--class",
        "gue",
        "--dim",
        "40",
        "--count",
        "4",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn rmt_sample_writes_manifest_and_levels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rmt");
    sample(&out, "5");
    let m = manifest(&out);
    assert_eq!(m["command"].as_str(), Some("rmt-sample"));
    assert_eq!(m["global"]["seed"].as_integer(), Some(5));
    assert_eq!(m["args"]["dim"].as_integer(), Some(40));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 5);
    let (seq, _) = read_levels(out.join("levels/member_0003.csv")).unwrap();
    assert_eq!(seq.len(), 20);
    assert!(out.join("inputs/ensemble.toml").exists());
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    sample(&a, "11");
    sample(&b, "11");
    sample(&c, "12");
    let f = "levels/member_0001.csv";
    assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    assert_ne!(fs::read(a.join(f)).unwrap(), fs::read(c.join(f)).unwrap());

    for (dir, threads) in [(&a, "1"), (&b, "2")] {
        let code = run(&[
            "--seed",
            "3",
            "--threads",
            threads,
            "--phi",
            "0.8",
            "--out",
            s(&dir.join("dec")),
            "decimate",
            "--input",
            s(&a.join("levels")),
        ]);
        assert_eq!(code, 0);
    }
    let f = "dec/levels/phi_0.80/member_0002.csv";
    assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
}

#[test]
fn decimating_at_one_keeps_every_level() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    sample(&src, "2");
    let out = dir.path().join("dec");
    assert_eq!(
        run(&[
            "--phi",
            "1",
            "--out",
            s(&out),
            "decimate",
            "--input",
            s(&src.join("levels"))
        ]),
        0
    );
    for i in 0..4 {
        let name = format!("member_{i:04}.csv");
        let (a, _) = read_levels(src.join("levels").join(&name)).unwrap();
        let (b, _) = read_levels(out.join("levels/phi_1.00").join(&name)).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(b.phi(), Some(1.0));
    }
}

#[test]
fn stats_then_fit_phi() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    sample(&src, "4");
    let stats = dir.path().join("stats");
    let code = run(&[
        "--out",
        s(&stats),
        "stats",
        "--input",
        s(&src.join("levels")),
        "--measure",
        "sigma2",
        "--l-max",
        "2",
    ]);
    assert_eq!(code, 0);
    let (curve, meta) = read_curve(stats.join("curves/sigma2.csv")).unwrap();
    assert_eq!(meta.get("measure").map(String::as_str), Some("sigma2"));
    assert_eq!(curve.len(), 20);
    assert!(curve.y().iter().all(|y| y.is_finite() && *y >= 0.0));

    let fit = dir.path().join("fit");
    let code = run(&[
        "--out",
        s(&fit),
        "fit-phi",
        "--input",
        s(&stats.join("curves/sigma2.csv")),
        "--class",
        "gue",
    ]);
    assert_eq!(code, 0);
    let t: toml::Table = fs::read_to_string(fit.join("fit_phi.toml"))
        .unwrap()
        .parse()
        .unwrap();
    let phi = t["phi"].as_float().unwrap();
    assert!(phi > 0.0 && phi <= 1.0);
}

#[test]
fn theory_curve_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("th");
    let code = run(&[
        "--phi",
        "1,0.8",
        "--out",
        s(&out),
        "theory-curve",
        "--class",
        "gse",
        "--measure",
        "sigma2",
        "--x-max",
        "1",
    ]);
    assert_eq!(code, 0);
    let (c, _) = read_curve(out.join("curves/sigma2-theory_0.80.csv")).unwrap();
    assert_eq!(c.len(), 20);
    assert!(out.join("curves/sigma2-theory_1.00.csv").exists());
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(run(&["--out", s(&out), "rmt-sample", "--dim", "0"]), 2);
    assert_eq!(run(&["--phi", "1.5", "--out", s(&out), "theory-curve"]), 2);
    assert_eq!(
        run(&[
            "--out",
            s(&out),
            "decimate",
            "--input",
            s(&dir.path().join("missing"))
        ]),
        2
    );
    assert_eq!(run(&["rmt-sample", "--no-such-flag"]), 2);
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[nonsense]\nx = 1\n").unwrap();
    assert_eq!(
        run(&["--config", s(&cfg), "--out", s(&out), "rmt-sample"]),
        2
    );
}

#[test]
fn unconstrained_fit_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    fs::write(
        &input,
        "# measure: sigma2\n# class: gue\nx,y,err\n1e-9,1e-9,1\n",
    )
    .unwrap();
    let code = run(&[
        "--out",
        s(&dir.path().join("fit")),
        "fit-phi",
        "--input",
        s(&input),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn precedence_flag_env_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "seed = 30\n\n[rmt-sample]\nclass = \"gue\"\ndim = 30\ncount = 2\n",
    )
    .unwrap();
    let seed_of = |out: &Path| manifest(out)["global"]["seed"].as_integer().unwrap();

    let a = dir.path().join("a");
    assert_eq!(run(&["--config", s(&cfg), "--out", s(&a), "rmt-sample"]), 0);
    assert_eq!(seed_of(&a), 30);
    assert_eq!(manifest(&a)["args"]["dim"].as_integer(), Some(30));

    // The only test touching the environment.
    std::env::set_var("SPECTRAL_SEED", "20");
    let env_out = dir.path().join("from_env");
    std::env::set_var("SPECTRAL_OUT", s(&env_out));
    let code_env = run(&["--config", s(&cfg), "rmt-sample"]);
    let b = dir.path().join("b");
    let code_flag = run(&[
        "--config",
        s(&cfg),
        "--seed",
        "10",
        "--out",
        s(&b),
        "rmt-sample",
        "--dim",
        "32",
    ]);
    std::env::remove_var("SPECTRAL_SEED");
    std::env::remove_var("SPECTRAL_OUT");

    assert_eq!(code_env, 0);
    assert_eq!(seed_of(&env_out), 20);
    assert_eq!(code_flag, 0);
    assert_eq!(seed_of(&b), 10);
    assert_eq!(manifest(&b)["args"]["dim"].as_integer(), Some(32));
}
