use std::path::Path;
use std::process::{Command, Output};

fn udmis(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udmis"))
        .args(args)
        .current_dir(cwd)
        .env("UDMIS_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> serde_json::Value {
    let out = udmis(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn end_to_end_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let files = ok(
        &[
            "gen-graphs",
            "--n",
            "6,8",
            "--count",
            "2",
            "--seed",
            "4",
            "--out-dir",
            "g",
        ],
        cwd,
    );
    assert_eq!(files.as_array().unwrap().len(), 4);

    let exact = ok(&["solve-exact", "--graph", "g/udg_n8_0.txt"], cwd);
    let size = exact["size"].as_u64().unwrap();
    assert_eq!(exact["witness"].as_array().unwrap().len() as u64, size);

    let h = udmis(
        &[
            "run-heuristic",
            "--graph",
            "g/udg_n8_0.txt",
            "--d",
            "10",
            "--repeat",
            "3",
            "--exact",
        ],
        cwd,
    );
    assert!(h.status.success());
    let lines: Vec<serde_json::Value> = String::from_utf8(h.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    for r in &lines {
        assert_eq!(r["ratio"].as_f64(), Some(1.0));
        assert_eq!(r["solution_size"].as_u64(), Some(size));
    }

    std::fs::create_dir(cwd.join("d")).unwrap();
    for (k, g) in ["g/udg_n6_0.txt", "g/udg_n6_1.txt", "g/udg_n8_0.txt"]
        .iter()
        .enumerate()
    {
        let out = format!("d/{k}.json");
        let st = udmis(
            &[
                "simulate", "--graph", g, "--gamma", "3", "--tf", "1.2", "--ntraj", "10", "--out",
                &out,
            ],
            cwd,
        );
        assert!(
            st.status.success(),
            "{}",
            String::from_utf8_lossy(&st.stderr)
        );
    }
    let sim: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cwd.join("d/2.json")).unwrap()).unwrap();
    assert_eq!(sim["points"].as_array().unwrap().len(), 8);
    let total: f64 = sim["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(sim["e_target"].as_f64().unwrap() < 0.0);
    assert!(sim["ratio"].as_f64().unwrap() > 0.0);

    let corr = ok(&["analyze-corr", "--dists", "d", "--delta-r", "0.04"], cwd);
    assert!(corr["xi"].as_f64().unwrap() > 0.0);

    let opt = ok(
        &[
            "optimize-tf",
            "--graph",
            "g/udg_n6_0.txt",
            "--gamma",
            "3",
            "--max-iters",
            "4",
            "--ntraj",
            "5",
        ],
        cwd,
    );
    assert!(opt["history"].as_array().unwrap().len() <= 4);

    std::fs::write(
        cwd.join("s.csv"),
        "n_atoms,n_shots,max_ratio\n8,1,0.8\n8,10,0.9\n12,10,0.88\n16,100,0.9\n",
    )
    .unwrap();
    let fit_out = udmis(
        &[
            "fit-extrap",
            "--samples",
            "s.csv",
            "--alpha-sat",
            "0.8",
            "--gamma",
            "0.3",
        ],
        cwd,
    );
    assert!(fit_out.status.success());
    std::fs::write(cwd.join("q.json"), &fit_out.stdout).unwrap();
    let fit: serde_json::Value = serde_json::from_slice(&fit_out.stdout).unwrap();
    let p = &fit["predictions"][0];
    assert_eq!(p["n_atoms"].as_f64(), Some(8000.0));
    assert!(p["lower"].as_f64().unwrap() <= p["upper"].as_f64().unwrap());

    let sess = ok(
        &[
            "budget-run",
            "--graphs",
            "g",
            "--d",
            "0,2",
            "--budget",
            "0.2",
            "--exact-timeout-s",
            "5",
            "--dists",
            "d/2.json",
            "--out",
            "sess",
        ],
        cwd,
    );
    assert_eq!(sess["records"].as_u64(), Some(9));
    assert_eq!(sess["quantum"].as_u64(), Some(1));
    let records = udmis_core::harness::read_records(cwd.join("sess/records.jsonl")).unwrap();
    assert_eq!(records.len(), 9);
    assert!(records.iter().all(|r| r.validate().is_ok()));
    let q = records.iter().find(|r| r.n_shots.is_some()).unwrap();
    assert_eq!(q.n_shots, Some(1));
    assert_eq!(q.model_time_s, Some(0.2));
    assert!(cwd.join("sess/manifest.json").exists());

    let rep = ok(
        &[
            "breakeven",
            "--records",
            "sess/records.jsonl",
            "--quantum",
            "q.json",
            "--budget",
            "2",
            "--out-prefix",
            "rep",
        ],
        cwd,
    );
    assert!(rep["corner"].is_object());
    let csv = std::fs::read_to_string(cwd.join("rep.csv")).unwrap();
    assert!(csv.contains("frontier,"));
    assert!(csv.contains("quantum,gamma=0.3"));
}

#[test]
fn bound_check_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = udmis(
        &["bound-check", "--sizes", "16,64", "--shots", "1,10,100"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "size,n_shots,alpha,gaussian,holds,scaled_excess,half_log_n"
    );
    assert_eq!(lines.len(), 7);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(4) == Some("true")));
}

#[test]
fn fixture_breakeven_corner() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"[{"d":0,"max_n":5000,"ratio":0.8},{"d":5,"max_n":8500,"ratio":0.93},{"d":8,"max_n":8000,"ratio":0.95},{"d":15,"max_n":400,"ratio":0.98}]"#,
    )
    .unwrap();
    let rep = ok(
        &["breakeven", "--classical", "c.json", "--budget", "2"],
        dir.path(),
    );
    assert_eq!(rep["corner"]["max_n"].as_u64(), Some(8000));
    assert_eq!(rep["corner"]["ratio"].as_f64(), Some(0.95));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    assert_eq!(udmis(&["no-such-command"], cwd).status.code(), Some(2));
    assert_eq!(udmis(&["solve-exact"], cwd).status.code(), Some(2));
    assert_eq!(
        udmis(&["solve-exact", "--graph", "missing.txt"], cwd)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        udmis(&["bound-check", "--shots", "0"], cwd).status.code(),
        Some(2)
    );
    std::fs::write(cwd.join("bad.txt"), "not a graph\n").unwrap();
    assert_eq!(
        udmis(&["solve-exact", "--graph", "bad.txt"], cwd)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(udmis(&["--help"], cwd).status.code(), Some(0));

    // Too dense to place: infeasible.
    let gen = udmis(
        &[
            "gen-graphs",
            "--n",
            "50",
            "--nu",
            "40",
            "--r",
            "0.5",
            "--out-dir",
            "g",
        ],
        cwd,
    );
    assert_eq!(gen.status.code(), Some(3));

    ok(&["gen-graphs", "--n", "8", "--out", "g"], cwd);
    let tiny = udmis(
        &[
            "budget-run",
            "--graphs",
            "g",
            "--d",
            "15",
            "--budget",
            "1e-12",
            "--out",
            "s",
        ],
        cwd,
    );
    assert_eq!(tiny.status.code(), Some(3));

    let g8 = "g/udg_n8_0.txt";
    assert_eq!(
        udmis(&["solve-exact", "--graph", g8, "--timeout-ms", "0"], cwd)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        udmis(&["simulate", "--graph", g8, "--readout", "0.1"], cwd)
            .status
            .code(),
        Some(2)
    );
    let sim = udmis(
        &[
            "simulate",
            "--graph",
            g8,
            "--gamma",
            "0",
            "--readout",
            "0.01,0.05",
            "--out",
            "x.json",
        ],
        cwd,
    );
    assert!(
        sim.status.success(),
        "{}",
        String::from_utf8_lossy(&sim.stderr)
    );
    let shots = udmis(
        &[
            "budget-run",
            "--graphs",
            "g",
            "--d",
            "0",
            "--budget",
            "0.1",
            "--dists",
            "x.json",
            "--out",
            "s",
        ],
        cwd,
    );
    assert_eq!(shots.status.code(), Some(3));
}
