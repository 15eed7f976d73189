use std::process::{Command, Output};

use serde_json::Value;

fn ardc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ardc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("valid JSON on stdout")
}

fn header(text: &str) -> &str {
    text.lines().next().expect("non-empty CSV")
}

#[test]
fn solve_json_has_the_report_keys() {
    let o = ardc(&["solve", "--problem", "bremer237", "--lambda", "1e3", "--n-ricc", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let obj = v.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
    keys.sort();
    assert_eq!(keys, ["eps_floor", "kappa", "options", "problem", "stats", "steps"]);
    assert_eq!(v["problem"]["name"], "bremer237");
    assert_eq!(v["stats"]["n_s_osc"]["accepted"], 2);
    for k in ["n_s_osc", "n_s_slo", "n_s_tot", "n_f", "n_ls"] {
        assert!(v["stats"].get(k).is_some(), "missing stats.{k}");
    }
    let step = &v["steps"][0];
    for k in [
        "kind",
        "t_i",
        "h",
        "accepted",
        "iterations_or_halvings",
        "u_end",
        "du_end",
        "res_or_err",
    ] {
        assert!(step.get(k).is_some(), "missing steps[0].{k}");
    }
    assert_eq!(step["kind"], "oscillatory");
}

#[test]
fn solve_csv_headers() {
    let o = ardc(&["solve", "--problem", "tone", "--omega", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        header(&stdout(&o)),
        "kind,t_i,h,accepted,iterations_or_halvings,re_u,im_u,re_du,im_du,res_or_err"
    );
    let o = ardc(&[
        "solve",
        "--problem",
        "tone",
        "--omega",
        "3",
        "--dense",
        "0:1:4",
        "--format",
        "csv",
    ]);
    let text = stdout(&o);
    assert_eq!(header(&text), "t,re_u,im_u,re_du,im_du");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn dense_output_writes_a_thousand_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dense.csv");
    let omega = 250.0;
    let o = ardc(&[
        "solve",
        "--problem",
        "tone",
        "--omega",
        "250",
        "--dense",
        "0:1:1000",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        let u: f64 = rec[1].parse().unwrap();
        let du: f64 = rec[3].parse().unwrap();
        assert!((u - (omega * t).cos()).abs() < 1e-10, "t = {t}");
        assert!((du + omega * (omega * t).sin()).abs() < 1e-10 * omega);
        rows += 1;
    }
    assert_eq!(rows, 1000);
}

#[test]
fn dense_json_is_present_only_when_requested() {
    let o = ardc(&["solve", "--problem", "tone", "--omega", "2", "--dense", "0:1:3"]);
    let v = json(&o);
    assert_eq!(v["dense"].as_array().unwrap().len(), 3);
    let o = ardc(&["solve", "--problem", "tone", "--omega", "2"]);
    assert!(json(&o).get("dense").is_none());
}

#[test]
fn exit_codes() {
    assert_eq!(ardc(&["--help"]).status.code(), Some(0));
    assert_eq!(ardc(&["--version"]).status.code(), Some(0));
    assert_eq!(ardc(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        ardc(&["solve", "--problem", "bremer237", "--lambda", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ardc(&["solve", "--problem", "tone", "--n-ricc", "100"]).status.code(),
        Some(1)
    );
    assert_eq!(ardc(&["solve", "--dense", "1:2"]).status.code(), Some(1));

    let o = ardc(&["solve", "--problem", "legendre", "--nu", "10", "--t1", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["error"], "domain");
    assert!(v["message"].as_str().unwrap().contains("1.5"));

    let o = ardc(&["solve", "--problem", "tone", "--omega", "1", "--eps", "1e-30"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"], "step_underflow");
}

#[test]
fn experiment_csv_headers() {
    let o = ardc(&["residual-demo", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(header(&stdout(&o)), "series,omega_max,omega_const,j,res_norm");

    let o = ardc(&[
        "benchmark",
        "--problem",
        "bremer237",
        "--values",
        "1e2",
        "--reps",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        header(&text),
        "param,error,t_solve,n_s_osc_attempted,n_s_osc_accepted,n_s_slo_attempted,n_s_slo_accepted,\
         n_s_tot_attempted,n_s_tot_accepted,n_f,n_ls"
    );
    assert_eq!(text.lines().count(), 2);

    let o = ardc(&["convergence", "--t1", "1e4", "--eps", "1e-8", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(header(&text), "t1,eps,achieved,floor,within");
    assert!(text.lines().nth(1).unwrap().ends_with(",true"));

    let o = ardc(&["theorem-check", "--values", "0.25:0.2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        header(&text),
        "t,rho,eta1,eta2,eta3,eta4,k_max,j,r,bound,observed,holds"
    );
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn experiment_json_shapes() {
    let v = json(&ardc(&["residual-demo", "--values", "100,1000"]));
    let series = v["series"].as_array().unwrap();
    // one Burst curve and one roundoff model per peak frequency
    assert_eq!(series.len(), 4);
    assert_eq!(v["n"], 16);

    let v = json(&ardc(&[
        "theorem-check",
        "--problem",
        "tone",
        "--omega",
        "50",
        "--values",
        "0.5:0.2",
    ]));
    let check = &v["checks"][0]["check"];
    assert_eq!(check["rows"][0]["bound"], 0.0);
    assert_eq!(check["rows"][0]["observed"], 0.0);
}
