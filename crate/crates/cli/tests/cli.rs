use std::path::Path;
use std::process::Command;

fn emdf(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_emdf")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "emdf {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_decompose_forecast_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("series.csv");
    emdf(&["synth", "--count", "2", "--length", "80", "--seed", "4", "--out", p(&data)]);
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 3);

    let imfs = dir.path().join("imfs.csv");
    emdf(&["decompose", "--input", p(&data), "--series", "syn002", "--end-condition", "sbm", "--out", p(&imfs)]);
    let imf_text = std::fs::read_to_string(&imfs).unwrap();
    let header = imf_text.lines().next().unwrap();
    assert!(header.starts_with("t,value,imf1") && header.ends_with(",residue"), "{header}");
    assert_eq!(imf_text.lines().count(), 81);

    let out = emdf(&[
        "forecast", "--input", p(&data), "--model", "rato", "--horizon", "6", "--holdout", "6",
        "--swarm-size", "3", "--pso-iterations", "2",
    ]);
    let f = String::from_utf8(out.stdout).unwrap();
    assert_eq!(f.lines().next().unwrap(), "step,time,forecast,actual");
    assert_eq!(f.lines().count(), 7);

    let cfg = dir.path().join("exp.conf");
    std::fs::write(
        &cfg,
        format!(
            "input = {}\nholdout = 6\nhorizons = 1,6\nreplications = 3\nmodels = sbm,svr\nswarm_size = 3\npso_iterations = 2\nfolds = 5\nformat = csv\n",
            p(&data)
        ),
    )
    .unwrap();
    let outdir = dir.path().join("report");
    // flags override the file
    emdf(&["experiment", "--config", p(&cfg), "--replications", "2", "--format", "json", "--out", p(&outdir)]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["replications"], 2);
    assert_eq!(report["records"].as_array().unwrap().len(), 2 * 2 * 2 * 2);
    assert!(outdir.join("rank_chain.txt").exists());
}

#[test]
fn bad_arguments_fail() {
    let out = Command::new(env!("CARGO_BIN_EXE_emdf"))
        .args(["decompose", "--input", "/nonexistent.csv"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_emdf"))
        .args(["experiment", "--models", "bogus", "--input", "x.csv"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
