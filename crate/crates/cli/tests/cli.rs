// Copyright 2026 The stokescell authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.


use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokescell"))
        .args(args)
        .env_remove("STOKESCELL_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn shape(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn regime_worked_example() {
    let o = run(&["regime", "--dim", "3", "--eps", "0.1", "--eta", "0.01"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("sigma_eps=1 ") && s.contains("regime=critical"), "{s}");
    let o = run(&["regime", "--dim", "2", "--eps", "0.1", "--eta", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn regime_emits_effective_model() {
    let dir = TempDir::new().unwrap();
    let disk = shape(dir.path(), "disk.json", r#"{"dim":2,"kind":"disk","radius":0.25}"#);
    let out = dir.path().join("out");
    let o = run(&["regime", "--dim", "2", "--eps", "0.01", "--eta", "0.1", "--shape", disk.to_str().unwrap(), "--n", "64", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("effective_model.json")).unwrap()).unwrap();
    assert_eq!(v["model"], "darcy");
    assert!((v["M"][0][0].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() <= 1e-12);
}

#[test]
fn capacity_of_disk() {
    let dir = TempDir::new().unwrap();
    let disk = shape(dir.path(), "disk.json", r#"{"dim":2,"kind":"disk","radius":0.25}"#);
    let out = dir.path().join("out");
    let o = run(&["capacity", "--shape", disk.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("capacity.json")).unwrap()).unwrap();
    let m = v["M"][0][0].as_f64().unwrap();
    assert!((m - 4.0 * std::f64::consts::PI).abs() <= 1e-12);
    // A_T = (1/4π)(1/2 - log a) I
    let a = (0.5 - 0.25f64.ln()) / (4.0 * std::f64::consts::PI);
    assert!((v["A_T"][1][1].as_f64().unwrap() - a).abs() <= 1e-10);
    let table = std::fs::read_to_string(out.join("capacity_convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn capacity_of_sphere() {
    let dir = TempDir::new().unwrap();
    let sphere = shape(dir.path(), "sphere.json", r#"{"dim":3,"kind":"sphere","radius":0.25}"#);
    let o = run(&["capacity", "--shape", sphere.to_str().unwrap(), "--n", "12x24"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let end = s.find("n,A_T_change").unwrap();
    let v: serde_json::Value = serde_json::from_str(&s[..end]).unwrap();
    let target = 2.0 / (3.0 * std::f64::consts::PI);
    assert!((v["A_T"][2][2].as_f64().unwrap() - target).abs() <= 5e-3 * target);
}

#[test]
fn input_errors_exit_one() {
    let o = run(&["capacity", "--shape", "/no/such/shape.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/shape.json"));
    let dir = TempDir::new().unwrap();
    let big = shape(dir.path(), "big.json", r#"{"dim":2,"kind":"disk","radius":0.45}"#);
    assert_eq!(run(&["capacity", "--shape", big.to_str().unwrap()]).status.code(), Some(1));
    let disk = shape(dir.path(), "disk.json", r#"{"dim":2,"kind":"disk","radius":0.25}"#);
    let d = disk.to_str().unwrap();
    assert_eq!(run(&["capacity", "--shape", d, "--tol", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["capacity", "--shape", d, "--n", "abc"]).status.code(), Some(1));
    assert_eq!(run(&["cell", "--shape", d, "--etas", "0.1,1.5"]).status.code(), Some(1));
    assert_eq!(run(&["cell", "--shape", d, "--dim", "3"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn green_selftest_passes() {
    for dim in ["2", "3"] {
        let o = run(&["green-selftest", "--dim", dim]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let s = stdout(&o);
        assert!(s.starts_with("x,y,z,alpha_variation,fourier_deviation"));
        if dim == "2" {
            for line in s.lines().skip(1).take(5) {
                let f: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
                assert!(f <= 1e-8);
            }
        }
    }
}

#[test]
fn jumps_invariant_exit_codes() {
    let dir = TempDir::new().unwrap();
    let kite = shape(dir.path(), "kite.json", r#"{"dim":2,"kind":"kite","scale":0.3}"#);
    let k = kite.to_str().unwrap();
    assert!(run(&["jumps", "--shape", k, "--n", "256"]).status.success());
    // an unattainable tolerance is a numerical-invariant failure
    assert_eq!(run(&["jumps", "--shape", k, "--n", "256", "--tol", "1e-16"]).status.code(), Some(2));
}

#[test]
fn cell_output_is_thread_independent() {
    let dir = TempDir::new().unwrap();
    let ell = shape(dir.path(), "ellipse.json", r#"{"dim":2,"kind":"ellipse","semi_axes":[0.3,0.2]}"#);
    let e = ell.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run(&["--threads", "1", "cell", "--shape", e, "--n", "64", "--etas", "0.1,0.01", "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(env!("CARGO_BIN_EXE_stokescell"))
        .args(["cell", "--shape", e, "--n", "64", "--etas", "0.1,0.01", "--out", b.to_str().unwrap()])
        .env("STOKESCELL_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    let ta = std::fs::read(a.join("cell.csv")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("cell.csv")).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("d,eta,k,avg_chi_minus_ATek,avg_omega,grad_norm,g_mean,g_fluct_norm,boundary_residual\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 2);
}

#[test]
fn planar_rates() {
    let dir = TempDir::new().unwrap();
    let ell = shape(dir.path(), "ellipse.json", r#"{"dim":2,"kind":"ellipse","semi_axes":[0.3,0.2]}"#);
    let out = dir.path().join("out");
    let o = run(&["rates", "--shape", ell.to_str().unwrap(), "--n", "128", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("rates_summary.json")).unwrap()).unwrap();
    assert_eq!(v[0]["checks"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn sphere_rates_within_windows() {
    let dir = TempDir::new().unwrap();
    let sphere = shape(dir.path(), "sphere.json", r#"{"dim":3,"kind":"sphere","radius":0.25}"#);
    let o = run(&["rates", "--dim", "3", "--shape", sphere.to_str().unwrap(), "--n", "8x16", "--etas", "0.05,0.1,0.2"]);
    let s = stdout(&o);
    assert!(o.status.success(), "{s}");
    assert!(!s.contains("FAIL"));
    // the centred sphere has no measurable pressure mean
    assert!(s.lines().any(|l| l.contains("q_mean") && l.ends_with("SKIP")), "{s}");
}
