use std::collections::BTreeMap;

use super::{RegressionResult, INTERCEPT};

/// `**` at the 5% level, `*` at the 10% level.
pub fn significance_stars(p: f64) -> &'static str {
    if p <= 0.05 {
        "**"
    } else if p <= 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Styling {
    /// Decimals for coefficients.
    pub decimals: usize,
    /// Decimals for p-values.
    pub p_decimals: usize,
    /// Display labels by coefficient name; unlisted names print as-is.
    pub labels: BTreeMap<String, String>,
    /// Coefficients to print, in order. Empty means all slopes in result order.
    pub order: Vec<String>,
    pub show_intercept: bool,
    /// Drop period dummies from the printed rows.
    pub hide_time_dummies: bool,
}

impl Default for Styling {
    fn default() -> Self {
        Self {
            decimals: 2,
            p_decimals: 2,
            labels: BTreeMap::new(),
            order: Vec::new(),
            show_intercept: false,
            hide_time_dummies: true,
        }
    }
}

impl Styling {
    pub fn label(mut self, name: &str, label: &str) -> Self {
        self.labels.insert(name.into(), label.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedRow {
    pub name: String,
    pub label: String,
    pub estimate: f64,
    pub p_value: f64,
    /// Coefficient with stars, e.g. `0.22**`.
    pub coefficient: String,
    pub stars: &'static str,
    /// P-value in brackets, e.g. `(0.24)`.
    pub bracket: String,
}

impl RenderedRow {
    pub fn cell(&self) -> String {
        format!("{} {}", self.coefficient, self.bracket)
    }
}

pub fn render_model(result: &RegressionResult, styling: &Styling) -> Vec<RenderedRow> {
    let names: Vec<String> = if styling.order.is_empty() {
        result
            .names
            .iter()
            .filter(|n| {
                n.as_str() != INTERCEPT && !(styling.hide_time_dummies && n.starts_with("year_"))
            })
            .cloned()
            .chain(
                styling
                    .show_intercept
                    .then(|| INTERCEPT.to_string())
                    .filter(|c| result.names.contains(c)),
            )
            .collect()
    } else {
        styling
            .order
            .iter()
            .filter(|n| result.index_of(n).is_some())
            .cloned()
            .collect()
    };
    names
        .into_iter()
        .map(|name| {
            let i = result.index_of(&name).expect("filtered above");
            let (b, p) = (result.beta[i], result.p_values[i]);
            let stars = significance_stars(p);
            RenderedRow {
                label: styling
                    .labels
                    .get(&name)
                    .cloned()
                    .unwrap_or_else(|| name.clone()),
                coefficient: format!("{}{stars}", fmt_fixed(b, styling.decimals)),
                bracket: format!("({})", fmt_fixed(p, styling.p_decimals)),
                name,
                estimate: b,
                p_value: p,
                stars,
            }
        })
        .collect()
}

/// Fixed-point rendering without a negative zero.
pub(crate) fn fmt_fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}
