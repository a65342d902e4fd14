use std::path::Path;
use std::process::{Command, Output};

use ecd_core::bounds::{optimize_t, BoundInputs, BoundKind, Fhat};
use ecd_core::io::channel_from_json;
use ecd_core::operator::{partial_trace, ComplexMatrix, Factor};
use ecd_core::thermo::FhatOscillator;
use serde_json::Value;

fn ecd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecd"))
        .args(args)
        .env_remove("ECD_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn write_zoo(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full = vec!["zoo"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    stdout(&ecd(&full));
    path.to_str().unwrap().to_string()
}

#[test]
fn zoo_attenuator_file_parses_back_to_a_channel() {
    let text = stdout(&ecd(&["zoo", "attenuator", "--d", "8", "--eta", "0.7"]));
    let ch = channel_from_json(&text).unwrap();
    assert_eq!((ch.in_dim(), ch.out_dim()), (8, 8));
    // trace preservation shows up as an identity input marginal of the Choi matrix
    let marginal = partial_trace(ch.choi(), (8, 8), Factor::Second).unwrap();
    assert!((marginal - ComplexMatrix::identity(8, 8)).norm() < 1e-12);
}

#[test]
fn zoo_oscillator_emits_a_hamiltonian() {
    let text = stdout(&ecd(&["zoo", "oscillator", "--d", "3", "--hbar-omega", "2"]));
    let h = ecd_core::io::hamiltonian_from_json(&text).unwrap();
    assert_eq!(h.eigenvalues(), &[1.0, 3.0, 5.0]);
}

#[test]
fn ecd_norm_of_zero_map_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let id = write_zoo(dir.path(), "id.json", &["identity", "--d", "3"]);
    let doc = json(&ecd(&[
        "ecd-norm",
        "--phi",
        &id,
        "--psi",
        &id,
        "--E",
        "1e6",
        "--restarts",
        "2",
    ]));
    assert_eq!(doc["result"]["lower"], 0.0);
    assert_eq!(doc["result"]["upper"], 0.0);
}

#[test]
fn single_channel_has_unit_norm() {
    let dir = tempfile::tempdir().unwrap();
    let att = write_zoo(dir.path(), "att.json", &["attenuator", "--d", "3", "--eta", "0.4"]);
    let doc = json(&ecd(&["ecd-norm", "--phi", &att, "--E", "1", "--restarts", "2"]));
    let lower = doc["result"]["lower"].as_f64().unwrap();
    let upper = doc["result"]["upper"].as_f64().unwrap();
    assert!((lower - 1.0).abs() < 1e-9 && lower <= upper + 1e-12);
}

#[test]
fn results_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_zoo(dir.path(), "a.json", &["attenuator", "--d", "4", "--eta", "0.7"]);
    let b = write_zoo(dir.path(), "b.json", &["phase-rotation", "--d", "4", "--theta", "0.3"]);
    let args = [
        "ecd-norm",
        "--phi",
        &a,
        "--psi",
        &b,
        "--E",
        "1.2",
        "--restarts",
        "6",
        "--seed",
        "17",
        "--witness",
    ];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_ecd"))
            .args(args)
            .env("ECD_THREADS", threads)
            .output()
            .unwrap()
    };
    let first = stdout(&run("1"));
    assert_eq!(first, stdout(&run("1")));
    assert_eq!(first, stdout(&run("4")));
    assert!(first.contains("\"seed\": 17"));
}

#[test]
fn bound_output_matches_library_bit_for_bit() {
    let doc = json(&ecd(&[
        "bound",
        "chi",
        "--optimize-t",
        "--eps",
        "0.1",
        "--fhat",
        "osc:1:1",
        "--E",
        "1",
    ]));
    let fhat = Fhat::Oscillator(FhatOscillator::uniform(1, 1.0).unwrap());
    let lib = optimize_t(BoundKind::Chi, &BoundInputs::new(0.1, 1.0, 1.0, fhat)).unwrap();
    let r = &doc["result"];
    assert_eq!(r["t_used"].as_f64().unwrap(), lib.t_used);
    assert_eq!(r["total"].as_f64().unwrap(), lib.total);
    assert_eq!(r["main_term"].as_f64().unwrap(), lib.main_term);
    assert_eq!(r["g_term"].as_f64().unwrap(), lib.g_term);
    assert_eq!(r["h2_term"].as_f64().unwrap(), lib.h2_term);
    // the optimize-t subcommand is the same computation
    let again = json(&ecd(&[
        "optimize-t",
        "chi",
        "--eps",
        "0.1",
        "--fhat",
        "osc:1:1",
        "--E",
        "1",
    ]));
    assert_eq!(again["result"], doc["result"]);
}

#[test]
fn bound_sweep_is_csv_with_echoed_flags() {
    let text = stdout(&ecd(&[
        "bound",
        "qmi",
        "--sweep",
        "5",
        "--eps",
        "0.2",
        "--E",
        "2",
        "--n",
        "3",
        "--fhat",
        "osc:2:1:2",
        "--seed",
        "4",
    ]));
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    for needle in [
        "# seed=4",
        "# eps=0.2",
        "# E=2.0",
        "# n=3",
        "# fhat=osc:2:1:2",
        "# kind=qmi",
    ] {
        assert!(header.contains(&needle), "missing {needle} in {header:?}");
    }
    let rows: Vec<&str> = text.lines().skip(header.len()).collect();
    assert_eq!(rows[0], "t,total,main,g,h2");
    assert_eq!(rows.len(), 6);
    let last_t: f64 = rows[5].split(',').next().unwrap().parse().unwrap();
    assert_eq!(last_t, 2.5);
}

#[test]
fn exit_codes_distinguish_validation_from_infeasibility() {
    let dir = tempfile::tempdir().unwrap();
    let id = write_zoo(dir.path(), "id.json", &["identity", "--d", "2"]);
    let id3 = write_zoo(dir.path(), "id3.json", &["identity", "--d", "3"]);

    // E at the ground energy of the default oscillator
    let out = ecd(&["ecd-norm", "--phi", &id, "--E", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ground energy"));

    let out = ecd(&["ecd-norm", "--phi", &id, "--psi", &id3, "--E", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"in_dim": 1, "out_dim": 1, "kraus": [[[[0.5, 0]]]]}"#).unwrap();
    let out = ecd(&["diamond", "--phi", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace preserving"));

    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(ecd(&["diamond", "--map", bad.to_str().unwrap()]).status.code(), Some(2));

    let out = ecd(&[
        "bound", "chi", "--t", "10", "--eps", "0.1", "--fhat", "osc:1:1", "--E", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        ecd(&["bound", "chi", "--eps", "0.1", "--fhat", "osc:1:1", "--E", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ecd(&["zoo", "attenuator", "--d", "4", "--eta", "1.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn strong_convergence_column_is_monotone() {
    let text = stdout(&ecd(&[
        "experiment",
        "strong-convergence",
        "--d",
        "16",
        "--E",
        "2",
        "--thetas",
        "0.5,0.25,0.1,0.05",
        "--restarts",
        "4",
    ]));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("theta,ecd_lower,ecd_upper"));
    let lower: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(lower.len(), 4);
    assert!(lower.windows(2).all(|w| w[1] < w[0]), "{lower:?}");
}

#[test]
fn entropic_commands_on_files() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("ens.json");
    std::fs::write(
        &ens,
        r#"{"probs": [0.5, 0.5], "states": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]]}"#,
    )
    .unwrap();
    let doc = json(&ecd(&["chi", "--ensemble", ens.to_str().unwrap()]));
    assert!((doc["result"]["chi"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);

    let dep = write_zoo(dir.path(), "dep.json", &["depolarize", "--d", "2"]);
    let doc = json(&ecd(&["chi", "--ensemble", ens.to_str().unwrap(), "--channel", &dep]));
    assert!(doc["result"]["chi"].as_f64().unwrap().abs() < 1e-12);

    // maximally entangled two-qubit state
    let bell = dir.path().join("bell.json");
    let h = [0.5, 0.0];
    let z = [0.0, 0.0];
    let m = serde_json::json!({ "matrix": [[h, z, z, h], [z, z, z, z], [z, z, z, z], [h, z, z, h]] });
    std::fs::write(&bell, m.to_string()).unwrap();
    let doc = json(&ecd(&["qmi", "--state", bell.to_str().unwrap(), "--dims", "2,2"]));
    assert!((doc["result"]["qmi"].as_f64().unwrap() - 2.0 * 2f64.ln()).abs() < 1e-10);

    let doc = json(&ecd(&["energy-gain", "--channel", &dep, "--E", "1"]));
    // the vacuum depolarizer outputs the ground state at energy 1/2 = k E
    assert!((doc["result"]["k"].as_f64().unwrap() - 0.5).abs() < 1e-8);
}
