use std::fmt::Write as _;

use serde::Serialize;

use super::{PairAccuracy, RegressionMetrics};

/// Everything `eval` and `pairs` report. Sections that were not computed
/// are absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub machine_pairs: Option<PairAccuracy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub human_pairs: Option<PairAccuracy>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"))
}

impl EvalReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Plain-text table for the terminal.
    pub fn render(&self, per_gender: bool) -> String {
        let mut s = String::new();
        if let Some(r) = &self.regression {
            let _ = writeln!(s, "Pearson r on {} test records", r.n_test);
            let _ = writeln!(
                s,
                "  {:<10} {:>8}",
                "overall",
                format!("{:.4}", r.pearson_overall)
            );
            if per_gender {
                let _ = writeln!(
                    s,
                    "  {:<10} {:>8}  (n={})",
                    "male",
                    opt(r.pearson_male),
                    r.n_male
                );
                let _ = writeln!(
                    s,
                    "  {:<10} {:>8}  (n={})",
                    "female",
                    opt(r.pearson_female),
                    r.n_female
                );
            }
        }
        if let Some(m) = &self.machine_pairs {
            let human = self.human_pairs.as_ref();
            let _ = writeln!(
                s,
                "Pair accuracy: machine {:.4} over {} pairs{}",
                m.overall,
                m.n_pairs,
                human.map_or(String::new(), |h| format!(
                    ", human {:.4} over {} answers",
                    h.overall, h.n_pairs
                ))
            );
            let _ = writeln!(
                s,
                "  {:<14} {:>6} {:>5} {:>9} {:>9}",
                "category", "bucket", "n", "machine", "human"
            );
            for c in &m.by_cell {
                let h = human
                    .and_then(|h| {
                        h.by_cell
                            .iter()
                            .find(|x| x.category == c.category && x.bucket == c.bucket)
                    })
                    .map(|x| format!("{:.3}", x.accuracy))
                    .unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    s,
                    "  {:<14} {:>6} {:>5} {:>9.3} {:>9}",
                    c.category.as_str(),
                    c.bucket.map_or("all".into(), |b| b.to_string()),
                    c.n,
                    c.accuracy,
                    h
                );
            }
            for c in &m.by_category {
                let _ = writeln!(
                    s,
                    "  {:<14} {:>6} {:>5} {:>9.3}",
                    c.category.as_str(),
                    "all",
                    c.n,
                    c.accuracy
                );
            }
        }
        s
    }
}
