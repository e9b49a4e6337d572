use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hbd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbd"))
        .args(args)
        .output()
        .expect("spawn hbd")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate(dir: &Path, count: &str) {
    let o = hbd(&[
        "generate",
        "--count",
        count,
        "--seed",
        "7",
        "--max-n",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_solve_and_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), "2");
    let inst = tmp.path().join("instance_7.json");
    assert!(inst.exists() && tmp.path().join("instance_8.json").exists());
    let inst = inst.to_str().unwrap();

    let report = tmp.path().join("report.json");
    let o = hbd(&[
        "solve",
        "--instance",
        inst,
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("status: "), "{out}");
    assert!(out.contains("qubits per iteration"));
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed.is_object());

    let o = hbd(&[
        "solve",
        "--instance",
        inst,
        "--conversion",
        "exp",
        "--multicut",
        "5,3",
    ]);
    assert!(o.status.success());
    let o = hbd(&[
        "solve",
        "--instance",
        inst,
        "--backend",
        "sa",
        "--penalties",
        "manual",
        "--sweeps",
        "200",
        "--seed",
        "3",
    ]);
    assert!(o.status.success());

    let o = hbd(&["oracle", "--instance", inst]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object() || v.is_string());
}

#[test]
fn bench_output_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let insts = tmp.path().join("insts");
    generate(&insts, "4");
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = hbd(&[
            "bench",
            "--instances",
            insts.to_str().unwrap(),
            "--variants",
            "HBD_S_C,HBD_E_M,HBD_S_C_MC",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a");
    let b = run("b");
    for f in ["results.csv", "summary.json", "records.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let csv = fs::read_to_string(a.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 3);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), "1");
    let inst = tmp.path().join("instance_7.json");
    let inst = inst.to_str().unwrap();

    assert_eq!(hbd(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        hbd(&["solve", "--instance", inst, "--multicut", "2,3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        hbd(&["solve", "--instance", inst, "--epsilon", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        hbd(&[
            "bench",
            "--instances",
            tmp.path().to_str().unwrap(),
            "--variants",
            "NOPE",
            "--out",
            tmp.path().join("o").to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
    let missing = tmp.path().join("missing.json");
    assert_eq!(
        hbd(&["solve", "--instance", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    fs::write(tmp.path().join("bad.json"), "{not json").unwrap();
    assert_eq!(
        hbd(&[
            "oracle",
            "--instance",
            tmp.path().join("bad.json").to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(hbd(&["--help"]).status.code(), Some(0));
}
