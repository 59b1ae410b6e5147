use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dnapix"))
}

fn lena() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/lena512.pgm")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// A small PGM derived from Lena's top-left corner.
fn small_image(dir: &Path) -> PathBuf {
    let g = dnapix::pgm::read(lena()).unwrap();
    let (w, h) = (96, 80);
    let pixels = (0..w * h).map(|i| g.pixels[(i / w) * g.width + i % w + 200 * g.width + 200]).collect();
    let path = dir.join("small.pgm");
    dnapix::pgm::write(&path, &dnapix::pgm::GrayImage { width: w, height: h, pixels }).unwrap();
    path
}

fn field(out: &str, key: &str) -> String {
    out.lines().find_map(|l| l.strip_prefix(&format!("{key}: "))).unwrap_or_else(|| panic!("{key} missing in {out}")).to_string()
}

#[test]
fn noiseless_pipeline_matches_quantization_only() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let d = |p: &str| dir.path().join(p).display().to_string();
    let img_s = img.display().to_string();

    let enc = run(&["encode", &img_s, "-r", "2.0", "-o", &d("out")]);
    assert!(enc.status.success(), "{}", String::from_utf8_lossy(&enc.stderr));
    let expected = field(&stdout(&enc), "expected_psnr_db");

    let sim = run(&[
        "simulate", &d("out/oligos.fasta"), "--meta", &d("out/meta.toml"), "--coverage", "10", "--p-sub", "0",
        "--p-ins", "0", "--p-del", "0", "--seed", "4", "-o", &d("reads.fasta"),
    ]);
    assert!(sim.status.success());

    let dec = run(&["decode", &d("reads.fasta"), &d("out/meta.toml"), "-o", &d("rec.pgm"), "--original", &img_s]);
    assert!(dec.status.success(), "{}", String::from_utf8_lossy(&dec.stderr));
    let out = stdout(&dec);
    assert_eq!(field(&out, "psnr_db"), expected);
    assert_eq!(field(&out, "missing_chunks"), "0");

    let met = run(&["metrics", &img_s, &d("rec.pgm"), &d("out/oligos.fasta"), "--meta", &d("out/meta.toml")]);
    assert!(met.status.success());
    assert_eq!(field(&stdout(&met), "psnr_db"), expected);
}

#[test]
fn primers_are_trimmed_from_synthesized_records() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let d = |p: &str| dir.path().join(p).display().to_string();
    assert!(run(&["encode", &img.display().to_string(), "-b", "20000", "-o", &d("out")]).status.success());
    // decode the synthesized oligos directly
    let dec = run(&["--json", "decode", &d("out/oligos.fasta"), &d("out/meta.toml"), "-o", &d("rec.pgm")]);
    assert!(dec.status.success());
    let v: serde_json::Value = serde_json::from_slice(&dec.stdout).unwrap();
    assert_eq!(v["missing_chunks"], 0);
    assert_eq!(v["rejected"]["length"], 0);
}

#[test]
fn encoding_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path()).display().to_string();
    let d = |p: &str| dir.path().join(p).display().to_string();
    assert!(run(&["encode", &img, "-r", "2.5", "-o", &d("a")]).status.success());
    assert!(run(&["encode", &img, "-r", "2.5", "-o", &d("b")]).status.success());
    for f in ["oligos.fasta", "meta.toml"] {
        assert_eq!(std::fs::read(dir.path().join("a").join(f)).unwrap(), std::fs::read(dir.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn codebook_dump_lists_doublets() {
    let out = run(&["codebook-dump", "-k", "10"]);
    assert!(out.status.success());
    let words: Vec<String> = stdout(&out)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(words.len(), 10);
    assert_eq!(&words[..3], ["AT", "AC", "AG"]);
}

#[test]
fn rd_sweep_table_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path()).display().to_string();
    let table = dir.path().join("sweep.tsv");
    let out = run(&["rd-sweep", &img, "--rates", "3.5,1.8,2.6", "-o", &table.display().to_string()]);
    assert!(out.status.success());
    let rows: Vec<(f64, f64)> = std::fs::read_to_string(&table)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split('\t').map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(w[0].0 < w[1].0 && w[0].1 >= w[1].1, "{rows:?}");
    }
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[encode]\nlevels = 2\nseed = 99\n").unwrap();
    let img = small_image(dir.path()).display().to_string();
    let out_dir = dir.path().join("o").display().to_string();
    let o = run(&["--config", &cfg.display().to_string(), "encode", &img, "-r", "2", "-o", &out_dir]);
    assert!(o.status.success());
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("levels = 2") && stderr.contains("seed = 99"));
    let meta = std::fs::read_to_string(dir.path().join("o/meta.toml")).unwrap();
    assert!(meta.contains("levels = 2"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["encode", "x.pgm", "-o", "y"]).status.code(), Some(1));
    assert_eq!(run(&["codebook-dump", "-k", "0"]).status.code(), Some(2));
    assert_eq!(run(&["metrics", "/nonexistent/a.pgm", "/nonexistent/b.pgm"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "encode = 3").unwrap();
    assert_eq!(run(&["--config", &bad.display().to_string(), "codebook-dump", "-k", "4"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
