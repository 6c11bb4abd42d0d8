//! Writes the bundled synthetic dataset and its expectation files.
//!
//! ```text
//! cargo run -p gvc-carbon --example gen_synthetic -- data/synthetic
//! ```

use std::path::PathBuf;

use gvc_carbon::ingest::write_atomic;
use gvc_carbon::report::{Inputs, ReportBundle};
use gvc_carbon::synth::{bundled_files, bundled_world, BUNDLED_SEED};

/// (table, row, column) cells pinned by the expectation file.
const PINNED: &[(&str, &str, &str)] = &[
    ("model1", "log_FWD_GVC", "model.coef"),
    ("model1", "log_FWD_GVC_sq", "model.coef"),
    ("model1", "log_GDP", "model.coef"),
    ("model1", "log_MFG", "model.coef"),
    ("model1", "log_ESI", "model.coef"),
    ("model1", "log_TO", "model.coef"),
    ("model1", "wald", "model"),
    ("model2", "log_BWD_GVC", "model.coef"),
    ("model2", "log_TO", "model.coef"),
    ("model2", "wald", "model"),
    ("table8", "log_FWD_GVC", "domestic.coef"),
    ("table8", "log_BWD_GVC", "foreign.coef"),
    ("table9", "L.log_DOM_CO2", "domestic.coef"),
    ("table9", "L.log_FOR_CO2", "foreign.coef"),
    ("table9", "r_squared", "domestic"),
    ("cd_test", "domestic", "cd"),
    ("cd_test", "domestic", "avg_abs_corr"),
    ("cd_test", "foreign", "cd"),
    ("descriptives", "log_FWD_GVC", "mean"),
    ("descriptives", "log_FWD_GVC", "obs"),
];

fn expectations(bundle: &ReportBundle) -> String {
    let mut out = String::from("table,row,column,expected,tolerance\n");
    for (t, r, c) in PINNED {
        let v = bundle
            .table(t)
            .and_then(|tab| tab.lookup(r, c))
            .unwrap_or_else(|| panic!("{t}/{r}/{c} missing"));
        out.push_str(&format!(
            "{t},{r},{c},{v:.9},{:e}\n",
            1e-6 * v.abs().max(1.0)
        ));
    }
    out
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "data/synthetic".into()),
    );
    let world = bundled_world(BUNDLED_SEED);
    for (rel, body) in bundled_files(&world) {
        write_atomic(&dir.join(rel), &body)?;
    }
    let bundle = Inputs::load(&dir.join("config.toml"), None)?.report()?;
    write_atomic(&dir.join("expectations/report.csv"), &expectations(&bundle))?;
    println!("wrote {} ({} tables checked)", dir.display(), PINNED.len());
    Ok(())
}
