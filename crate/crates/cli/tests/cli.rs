use std::path::Path;
use std::process::{Command, Output};

use quench_cli::operator_file::{load_operator_file, save_operator_file};
use quench_core::{xy_chain, HermitianOperator};

fn quench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn lz_sweep_defaults_and_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let a = quench(dir.path(), &["lz-sweep", "--out", "a.csv", "--verify"]);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = quench(dir.path(), &["lz-sweep", "--out", "b.csv", "--threads", "1"]);
    assert!(b.status.success(), "{}", stderr(&b));
    let ta = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(ta, std::fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().next(), Some("g0,beta,sigma_scaled,lcl_scaled,lqu_scaled"));
    assert_eq!(text.lines().count(), 1 + 4 * 201);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "lz-sweep");
    assert_eq!(meta["seed"], 0);
    assert_eq!(meta["params"]["b"], 0.01);
    assert_eq!(meta["library_version"], quench_core::VERSION);
    assert!(meta["verified_rows"].as_u64().unwrap() >= 8);
    assert!(meta["timestamp_unix"].as_u64().is_some());
}

#[test]
fn config_file_values_yield_to_flags_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("lz.toml"),
        "experiment = \"lz-sweep\"\nout = \"from_file.csv\"\nseed = 4\nbetas = [1.0]\n[grid]\nstart = 0.0\nstop = 1.0\npoints = 11\n",
    )
    .unwrap();
    let o = quench(dir.path(), &["lz-sweep", "--config", "lz.toml", "--seed", "9", "--set", "grid.points=3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&dir.path().join("from_file.csv"));
    assert_eq!(r.len(), 3);
    assert_eq!(r[1][0].parse::<f64>().unwrap(), 0.5);
    let meta = std::fs::read_to_string(dir.path().join("from_file.csv.meta.json")).unwrap();
    assert!(meta.contains("\"seed\": 9"));

    let o = quench(dir.path(), &["lz-sweep", "--config", "lz.toml", "--out", "flag.csv"]);
    assert!(o.status.success());
    assert!(dir.path().join("flag.csv").exists());
}

#[test]
fn field_sweep_reproduces_the_high_temperature_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let o = quench(
        dir.path(),
        &["xy-field-sweep", "--out", "f.csv", "--set", "gammas=[1.0]", "--set", "betas=[0.1]", "--set", "grid.points=21", "--verify"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&dir.path().join("f.csv"));
    assert_eq!(r.len(), 21);
    for row in r {
        let g0: f64 = row[0].parse().unwrap();
        let lqu: f64 = row[4].parse().unwrap();
        assert_eq!(row[2], "inf");
        assert_eq!(row[8], "thermodynamic");
        let plateau = xy_chain::ising_plateau(g0);
        assert!((lqu - plateau).abs() < 0.02 * plateau, "g0 = {g0}: {lqu}");
    }
}

#[test]
fn anisotropy_and_finite_size_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = quench(dir.path(), &["xy-anisotropy-sweep", "--out", "a.csv", "--set", "grid.points=20", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(rows(&dir.path().join("a.csv")).len(), 4 * 4 * 20);

    let o = quench(dir.path(), &["ising-finite-n", "--out", "n.csv", "--set", "grid.points=9", "--set", "sizes=[8, 16]", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&dir.path().join("n.csv"));
    assert_eq!(r.len(), 3 * 9);
    for row in &r[..9] {
        let g0: f64 = row[0].parse().unwrap();
        assert_eq!(row[2], "8");
        assert_eq!(row[6].is_empty(), g0.abs() == 1.0, "{row:?}");
    }
    assert!(r[18..].iter().all(|row| row[2] == "inf" && row[8] == "small_beta"));
}

#[test]
fn tpm_run_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str, seed: &'static str| {
        ["tpm-run", "--out", out, "--seed", seed, "--set", "samples=20000", "--verify"]
    };
    let a = quench(dir.path(), &args("a.csv", "3"));
    assert!(a.status.success(), "{}", stderr(&a));
    let b = quench(dir.path(), &args("b.csv", "3"));
    assert!(b.status.success(), "{}", stderr(&b));
    let c = quench(dir.path(), &args("c.csv", "4"));
    assert!(c.status.success(), "{}", stderr(&c));
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
    assert_eq!(read("a.csv.report.txt"), read("b.csv.report.txt"));
    let report = String::from_utf8(read("a.csv.report.txt")).unwrap();
    assert!(report.contains("n_samples = 20000"));
    assert!(report.contains("postselected_lambda_cl = "));
    assert_eq!(String::from_utf8_lossy(&a.stdout), report);
    assert_eq!(std::str::from_utf8(&read("a.csv")).unwrap().lines().next(), Some("i,j,prob_or_count,w,sigma,lcl,lqu"));

    let e = quench(dir.path(), &["tpm-run", "--out", "e.csv", "--verify"]);
    assert!(e.status.success(), "{}", stderr(&e));
    let total: f64 = rows(&dir.path().join("e.csv")).iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn generic_quench_from_operator_files() {
    let dir = tempfile::tempdir().unwrap();
    save_operator_file(&dir.path().join("h0.txt"), &HermitianOperator::pauli_z()).unwrap();
    save_operator_file(&dir.path().join("h1.txt"), &HermitianOperator::pauli_x()).unwrap();
    std::fs::write(dir.path().join("q.toml"), "h0 = \"h0.txt\"\nh1 = \"h1.txt\"\ndg = 0.0\nbetas = [0.5, 2.0]\n").unwrap();
    let o = quench(dir.path(), &["generic-quench", "--config", "q.toml", "--out", "zero.csv", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for row in rows(&dir.path().join("zero.csv")) {
        assert!(row[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0), "{row:?}");
    }

    let o = quench(dir.path(), &["generic-quench", "--config", "q.toml", "--set", "dg=0.01", "--out", "b.csv", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&dir.path().join("b.csv"));
    let sigma: f64 = r[1][1].parse().unwrap();
    let remainder: f64 = r[1][4].parse().unwrap();
    assert!(sigma > 0.0 && remainder.abs() < 1e-2 * sigma);

    std::fs::write(dir.path().join("eye.txt"), "3\n1 0 0\n0 1+0i 0\n0 0 1\n").unwrap();
    assert_eq!(load_operator_file(&dir.path().join("eye.txt")).unwrap().matrix(), HermitianOperator::identity(3).matrix());
}

#[test]
fn operator_files_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("op.txt");
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    for h in [HermitianOperator::pauli_x(), HermitianOperator::pauli_y(), HermitianOperator::random(&mut rng, 5)] {
        save_operator_file(&path, &h).unwrap();
        let back = load_operator_file(&path).unwrap();
        for (a, b) in h.matrix().iter().zip(back.matrix().iter()) {
            assert_eq!((a.re.to_bits(), a.im.to_bits()), (b.re.to_bits(), b.im.to_bits()));
        }
    }
}

#[test]
fn exit_codes_distinguish_input_and_numeric_failures() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "2\n1 0\n0\n").unwrap();
    std::fs::write(dir.path().join("x.txt"), "2\n0 1\n1 0\n").unwrap();
    let o = quench(dir.path(), &["generic-quench", "--set", "h0=bad.txt", "--set", "h1=x.txt", "--set", "dg=0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.txt:3"), "{}", stderr(&o));

    std::fs::write(dir.path().join("nh.txt"), "2\n0 1\n2 0\n").unwrap();
    let o = quench(dir.path(), &["generic-quench", "--set", "h0=nh.txt", "--set", "h1=x.txt", "--set", "dg=0.1"]);
    assert_eq!(o.status.code(), Some(2));

    for args in [
        vec!["lz-sweep", "--set", "b=-1"],
        vec!["lz-sweep", "--set", "bogus=1"],
        vec!["lz-sweep", "--set", "betas=[]"],
        vec!["lz-sweep", "--set", "grid.points=0"],
        vec!["xy-field-sweep", "--set", "evaluation=extended"],
        vec!["tpm-run", "--set", "model=operators"],
        vec!["lz-sweep", "--config", "missing.toml"],
        vec!["lz-sweep", "--threads", "0"],
    ] {
        let o = quench(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }

    let gapless = [
        "xy-field-sweep",
        "--set",
        "gammas=[0.0]",
        "--set",
        "evaluation=finite_n",
        "--set",
        "n=2",
        "--set",
        "grid.points=1",
        "--set",
        "grid.start=0.0",
        "--set",
        "betas=[0.0]",
    ];
    let o = quench(dir.path(), &gapless);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
