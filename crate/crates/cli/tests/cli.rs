use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gvc_carbon::estimators::{fgls_ar1, RegressionSpec};
use gvc_carbon::ingest::{parse_emissions, parse_icio};
use gvc_carbon::mrio::{build_coefficients, EmbodiedAccounts, EmissionIntensity};
use gvc_carbon::report::{prepare_panel, Inputs};
use serde_json::Value;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

fn gvc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gvc"))
        .args(args)
        .env_remove("GVC_DATA_DIR")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn bundled(args: &[&str]) -> Output {
    let dir = data_dir();
    let mut all = vec!["--data-dir", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    gvc(&all)
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "status {:?}\nstderr: {}",
        o.status,
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_tables(o: &Output) -> Vec<Value> {
    serde_json::Deserializer::from_str(&stdout(o))
        .into_iter::<Value>()
        .map(Result::unwrap)
        .collect()
}

fn labels(t: &Value) -> Vec<String> {
    t["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["label"].as_str().unwrap().to_string())
        .collect()
}

fn cells(t: &Value, label: &str) -> Vec<String> {
    let row = t["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["label"] == label)
        .unwrap();
    row["cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn model_tables_have_six_coefficients_wald_and_cross_sections() {
    for (model, gvc_label) in [("model1", "Forward GVC"), ("model2", "Backward GVC")] {
        let t = &json_tables(&bundled(&["--format", "json", "regress", model]))[0];
        let l = labels(t);
        assert_eq!(l.len(), 8, "{l:?}");
        assert_eq!(l[0], gvc_label);
        assert_eq!(l[1], format!("({gvc_label})²"));
        assert_eq!(&l[2..6], &["GDP", "MFG", "STR", "TO"]);
        assert_eq!(l[6], "Wald Chi Square");
        assert_eq!(l[7], "No. of Cross Sections");
        assert_eq!(cells(t, "No. of Cross Sections"), vec!["16"]);
        assert_eq!(
            t["columns"],
            serde_json::json!(["Explanatory Variables", "Coefficient"])
        );
    }
}

#[test]
fn subsample_tables_split_eight_and_eight() {
    let t = &json_tables(&bundled(&["--format", "json", "regress", "table7"]))[0];
    assert_eq!(
        t["columns"],
        serde_json::json!(["Dep Variable:", "OECD", "NON OECD", "ALL EME's"])
    );
    let l = labels(t);
    assert_eq!(l.len(), 1 + 5 + 3 + 3);
    assert_eq!(cells(t, "No. of Observations"), vec!["192", "192", "384"]);
    assert_eq!(cells(t, "No. of Cross-Sections"), vec!["8", "8", "16"]);
    assert_eq!(cells(t, "Backward GVC*POP DENSITY")[0], "");
}

#[test]
fn fixed_effects_footer() {
    let t = &json_tables(&bundled(&["--format", "json", "regress", "table8"]))[0];
    let l = labels(t);
    assert_eq!(
        &l[l.len() - 5..],
        &[
            "Wald Chi Square",
            "Fixed Time Effects",
            "No. of Observations",
            "No. of Cross sections",
            "No of time periods"
        ]
    );
    assert_eq!(
        cells(t, "No of time periods"),
        vec!["24", "No of time periods", "24"]
    );
    assert_eq!(
        cells(t, "Fixed Time Effects"),
        vec!["Yes", "Fixed Time Effects", "Yes"]
    );
    assert_eq!(
        cells(t, "Forward Participation")[1],
        "Backward Participation"
    );
}

#[test]
fn dynamic_table_rows() {
    let t = &json_tables(&bundled(&["--format", "json", "regress", "table9"]))[0];
    let l = labels(t);
    let expected = [
        "Domestic Emissions",
        "Lagged",
        "Manufacturing share",
        "First Difference",
        "GDP Per Capita",
        "First Difference",
        "Trade openness",
        "First Difference",
        "Forward Participation",
        "First Difference",
        "Stringency Index",
        "First Difference",
        "Constant",
        "Wald Chi Square",
        "Overall R square",
        "No. of Observations",
    ];
    assert_eq!(l, expected);
    // one period lost to the lag, one to the instrument depth
    assert_eq!(cells(t, "No. of Observations"), vec!["336", "", "336"]);
}

#[test]
fn cd_stats_corr_and_rank_shapes() {
    let cd = &json_tables(&bundled(&["--format", "json", "cd-test"]))[0];
    assert_eq!(
        cd["columns"],
        serde_json::json!(["Model", "Avg Absolute Correlation", "Pesaran Statistic"])
    );
    assert_eq!(labels(cd).len(), 2);

    let st = &json_tables(&bundled(&["--format", "json", "stats"]))[0];
    assert_eq!(
        st["columns"],
        serde_json::json!(["Variable", "Obs", "Mean", "Std. Dev.", "Min", "Max"])
    );
    assert_eq!(labels(st).len(), 10);
    for r in st["rows"].as_array().unwrap() {
        assert_eq!(r["cells"][0], "384");
        assert_eq!(
            r["cells"][1]
                .as_str()
                .unwrap()
                .split('.')
                .nth(1)
                .unwrap()
                .len(),
            6
        );
    }
    let one = &json_tables(&bundled(&["--format", "json", "stats", "--vars", "GDP"]))[0];
    assert_eq!(labels(one), vec!["GDP Per Capita"]);

    let corr = json_tables(&bundled(&["--format", "json", "corr"]));
    assert_eq!(corr.len(), 2);
    assert_eq!(labels(&corr[1])[0], "Backward Participation");

    let ranks = json_tables(&bundled(&["--format", "json", "rank"]));
    assert_eq!(ranks.len(), 2);
    assert_eq!(ranks[0]["id"], "ranks_1995");
    assert_eq!(ranks[1]["id"], "ranks_2018");
    assert_eq!(ranks[0]["columns"].as_array().unwrap().len(), 5);
    assert_eq!(
        labels(&ranks[1]),
        (1..=16).map(|i| i.to_string()).collect::<Vec<_>>()
    );
}

#[test]
fn check_mode_passes_on_pinned_values_and_fails_on_published_ones() {
    let dir = data_dir();
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let pinned = dir.join("expectations/report.csv");
    let ok = bundled(&["--out", out, "--check", pinned.to_str().unwrap(), "report"]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(String::from_utf8_lossy(&ok.stderr).contains("0 failed"));

    let published = dir.join("../expectations/published/model1.csv");
    let bad = bundled(&["--check", published.to_str().unwrap(), "regress", "model1"]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("FAIL model1/log_TO/model.coef"));
}

#[test]
fn configuration_errors_exit_two() {
    let o = gvc(&["--config", "/nonexistent/config.toml", "cd-test"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gvc(&["cd-test"]);
    assert_eq!(o.status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[data]\nfirst_year = 2000\nlast_year = 2001\n[sample]\ncountries = []\n",
    )
    .unwrap();
    assert_eq!(
        gvc(&["--config", cfg.to_str().unwrap(), "stats"])
            .status
            .code(),
        Some(2)
    );
}

fn write_panel_config(dir: &Path, panel_csv: &str, countries: &[&str]) -> PathBuf {
    std::fs::write(dir.join("panel.csv"), panel_csv).unwrap();
    let list = countries
        .iter()
        .map(|c| format!("\"{c}\""))
        .collect::<Vec<_>>()
        .join(", ");
    let cfg = dir.join("config.toml");
    std::fs::write(
        &cfg,
        format!("[data]\npanel = \"panel.csv\"\nfirst_year = 2000\nlast_year = 2003\n[sample]\ncountries = [{list}]\n"),
    )
    .unwrap();
    cfg
}

#[test]
fn rank_deficiency_exits_three() {
    // MFG = 10 * GDP, so log MFG is log GDP plus one: collinear with the intercept
    let mut csv = String::from("country,year,DOM_CO2,FWD_GVC,GDP,MFG,ESI,TO\n");
    for (u, c) in ["AAA", "BBB", "CCC"].iter().enumerate() {
        for t in 0..4 {
            let g = 1.0 + (u * 4 + t) as f64 * 0.37 % 1.3;
            let f = 2.0 + ((u + 1) * (t + 2)) as f64 % 3.1;
            csv.push_str(&format!(
                "{c},{},{},{f},{g},{},{},{}\n",
                2000 + t,
                1.5 + 0.2 * t as f64 + u as f64,
                10.0 * g,
                1.0 + 0.1 * (t * u) as f64,
                3.0 + (t as f64).sin().abs()
            ));
        }
    }
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_panel_config(tmp.path(), &csv, &["AAA", "BBB", "CCC"]);
    let o = gvc(&["--config", cfg.to_str().unwrap(), "cd-test"]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank deficient"));
}

#[test]
fn one_country_rank_is_trivial() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = "country,year,DOM_CO2\nAAA,2000,1\nAAA,2001,2\nAAA,2002,3\nAAA,2003,4\n";
    let cfg = write_panel_config(tmp.path(), csv, &["AAA"]);
    let t = &json_tables(&gvc(&[
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "rank",
        "--indicator",
        "DOM_CO2",
        "--year",
        "2002",
    ]))[0];
    assert_eq!(labels(t), vec!["1"]);
    assert_eq!(cells(t, "1"), vec!["AAA", "3.000000"]);
}

const TOY_ICIO: &str = "#icio,1\n#year,2000\n#countries,AAA,BBB\n#industries,D10T12,D24\n\
row,AAA_D10T12,AAA_D24,BBB_D10T12,BBB_D24,FD_AAA,FD_BBB,OUTPUT\n\
AAA_D10T12,10,5,4,2,60,19,100\n\
AAA_D24,8,20,3,6,30,13,80\n\
BBB_D10T12,2,4,15,10,9,80,120\n\
BBB_D24,5,1,12,25,4,103,150\n";

const TOY_EMISSIONS: &str =
    "country,industry,emissions\nAAA,D10T12,30\nAAA,D24,64\nBBB,D10T12,12\nBBB,D24,90\n";

const AUTARKY_ICIO: &str = "#icio,1\n#year,2000\n#countries,AAA,BBB\n#industries,D10T12\n\
row,AAA_D10T12,BBB_D10T12,FD_AAA,FD_BBB,OUTPUT\n\
AAA_D10T12,20,0,80,0,100\n\
BBB_D10T12,0,30,0,70,100\n";

fn run_embodied(icio: &str, emissions: &str) -> (String, tempfile::TempDir) {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("icio_2000.csv"), icio).unwrap();
    std::fs::write(tmp.path().join("emissions_2000.csv"), emissions).unwrap();
    let cfg = tmp.path().join("config.toml");
    std::fs::write(
        &cfg,
        "[data]\nicio = \"icio_{year}.csv\"\nemissions = \"emissions_{year}.csv\"\nfirst_year = 2000\nlast_year = 2000\n\
         [sample]\ncountries = [\"AAA\", \"BBB\"]\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = gvc(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "embodied",
    ]);
    stdout(&o);
    (
        std::fs::read_to_string(out.join("embodied/embodied_2000.csv")).unwrap(),
        tmp,
    )
}

fn parse_accounts(text: &str) -> BTreeMap<(String, String), Vec<f64>> {
    text.lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                (f[0].to_string(), f[1].to_string()),
                f[2..].iter().map(|v| v.parse().unwrap()).collect(),
            )
        })
        .collect()
}

#[test]
fn embodied_output_matches_library() {
    let (text, _tmp) = run_embodied(TOY_ICIO, TOY_EMISSIONS);
    assert!(text.starts_with("#conservation,"));
    let rows = parse_accounts(&text);
    let icio = parse_icio(TOY_ICIO).unwrap();
    let e = parse_emissions(TOY_EMISSIONS, &icio).unwrap();
    let intensity = EmissionIntensity::from_emissions(&e, icio.output()).unwrap();
    let model = build_coefficients(&icio)
        .unwrap()
        .leontief_inverse()
        .unwrap();
    let acc = EmbodiedAccounts::compute(&icio, &model, &intensity).unwrap();
    for (country, inds) in &acc.countries {
        for (ind, a) in acc.industries.iter().zip(inds) {
            let got = &rows[&(country.clone(), ind.clone())];
            assert_eq!(
                got,
                &vec![
                    a.gross_exports,
                    a.domestic_co2,
                    a.foreign_co2,
                    a.forward_gvc,
                    a.backward_gvc
                ]
            );
        }
    }
    assert!(rows.contains_key(&("BBB".to_string(), "TOTAL".to_string())));
}

#[test]
fn autarkic_world_has_zero_indicators() {
    let (text, _tmp) = run_embodied(
        AUTARKY_ICIO,
        "country,industry,emissions\nAAA,D10T12,5\nBBB,D10T12,7\n",
    );
    for v in parse_accounts(&text).values() {
        assert!(v.iter().all(|x| *x == 0.0), "{v:?}");
    }
}

#[test]
fn bundled_run_writes_24_yearly_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bundled(&["--out", tmp.path().to_str().unwrap(), "embodied"]);
    stdout(&o);
    let n = std::fs::read_dir(tmp.path().join("embodied"))
        .unwrap()
        .count();
    assert_eq!(n, 24);
}

fn tree(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn report_bundles_are_byte_identical_outside_the_timestamp() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    stdout(&bundled(&["--out", a.path().to_str().unwrap(), "report"]));
    stdout(&bundled(&["--out", b.path().to_str().unwrap(), "report"]));
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (name, body) in &ta {
        if name == "manifest.json" {
            let strip = |s: &str| {
                s.lines()
                    .filter(|l| !l.contains("generated_unix"))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            assert_eq!(strip(body), strip(&tb[name]));
        } else {
            assert_eq!(body, &tb[name], "{name}");
        }
    }
    let manifest: Value = serde_json::from_str(&ta["manifest.json"]).unwrap();
    assert_eq!(manifest["tables"].as_array().unwrap().len(), 12);
    assert!(manifest["tables"]
        .as_array()
        .unwrap()
        .iter()
        .all(|t| !t["sources"].as_array().unwrap().is_empty()));
    assert!(ta.contains_key("plot_data.csv"));
}

#[test]
fn report_cell_recomputes_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&bundled(&["--out", tmp.path().to_str().unwrap(), "report"]));
    let t: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("model2.json")).unwrap())
            .unwrap();
    let cell = t["rows"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r["values"].as_array().unwrap().iter())
        .find(|v| v["row"] == "log_MFG" && v["column"] == "model.coef")
        .unwrap()["value"]
        .as_f64()
        .unwrap();

    let inputs = Inputs::load(&data_dir().join("config.toml"), None).unwrap();
    let panel = prepare_panel(
        &inputs.level_panel().unwrap(),
        inputs.config.model.log_base,
        None,
    )
    .unwrap();
    let spec = RegressionSpec::new(
        "log_FOR_CO2",
        &[
            "log_BWD_GVC",
            "log_BWD_GVC_sq",
            "log_GDP",
            "log_MFG",
            "log_ESI",
            "log_TO",
        ],
    );
    let direct = fgls_ar1(&panel, &spec).unwrap();
    assert_eq!(cell, direct.coef("log_MFG").unwrap());
}
