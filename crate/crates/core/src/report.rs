//! Evaluation reports: a serializable record plus fixed-width text tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metrics::{ApTable, ConfusionMatrix, Prf1Report};
use crate::panel::{signed_2dp, Comparison};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpottingReport {
    pub videos: usize,
    pub ground_truths: usize,
    pub detections: usize,
    pub fps: f64,
    pub ap: ApTable,
}

fn fmt_delta(d: f64) -> String {
    // Integral tolerances print as "1s", others keep their decimals.
    if d.fract() == 0.0 {
        format!("{d:.0}s")
    } else {
        format!("{d}s")
    }
}

/// Per-class AP by tolerance, with mean rows and columns.
pub fn render_ap_table(t: &ApTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<8}", "class");
    for &d in &t.deltas {
        let _ = write!(out, "{:>8}", format!("@{}", fmt_delta(d)));
    }
    let _ = writeln!(out, "{:>8}", "mean");
    for (c, row) in t.classes.iter().zip(&t.ap) {
        let _ = write!(out, "{:<8}", c.as_str());
        for v in row {
            let _ = write!(out, "{v:>8.2}");
        }
        let _ = writeln!(out, "{:>8.2}", t.class_mean[t.classes.iter().position(|x| x == c).unwrap_or(0)]);
    }
    let _ = write!(out, "{:<8}", "mAP");
    for v in &t.map_per_delta {
        let _ = write!(out, "{v:>8.2}");
    }
    let _ = writeln!(out, "{:>8.2}", t.grand_mean);
    out
}

pub fn render_spotting(r: &SpottingReport) -> String {
    let mut out = format!(
        "videos {}  ground truths {}  detections {}  fps {}\n",
        r.videos, r.ground_truths, r.detections, r.fps
    );
    out.push_str(&render_ap_table(&r.ap));
    out
}

pub fn render_prf1(r: &Prf1Report) -> String {
    let mut out = format!("{:<12}{:>10}{:>10}{:>10}{:>9}\n", "class", "precision", "recall", "f1", "support");
    for m in &r.per_class {
        let _ = writeln!(out, "{:<12}{:>10.2}{:>10.2}{:>10.2}{:>9}", m.label.as_str(), m.precision, m.recall, m.f1, m.support);
    }
    let _ = writeln!(out, "macro-F1 {:.2}  accuracy {:.2}  n {}", r.macro_f1, r.accuracy, r.total);
    out
}

pub fn render_confusion(cm: &ConfusionMatrix, normalized: &[Vec<f64>]) -> String {
    let mut out = format!("{:<12}", "gt \\ pred");
    for c in &cm.classes {
        let _ = write!(out, "{:>12}", c.as_str());
    }
    out.push('\n');
    for (i, c) in cm.classes.iter().enumerate() {
        let _ = write!(out, "{:<12}", c.as_str());
        for j in 0..cm.classes.len() {
            let _ = write!(out, "{:>12}", format!("{} ({:.2})", cm.counts[i][j], normalized[i][j]));
        }
        out.push('\n');
    }
    out
}

/// AI row, human row and the signed difference, then both confusion matrices.
pub fn render_comparison(c: &Comparison) -> String {
    let mut out = format!(
        "positive class {}  videos {}\n{:<8}{:>10}{:>10}{:>10}{:>10}\n",
        c.positive, c.videos, "", "precision", "recall", "f1", "accuracy"
    );
    for (name, s) in [("AI", &c.ai_summary), ("Humans", &c.human_summary)] {
        let _ = writeln!(out, "{name:<8}{:>10.2}{:>10.2}{:>10.2}{:>10.2}", s.precision, s.recall, s.f1, s.accuracy);
    }
    let d = &c.delta;
    let _ = writeln!(
        out,
        "{:<8}{:>10}{:>10}{:>10}{:>10}",
        "Delta",
        signed_2dp(d.precision),
        signed_2dp(d.recall),
        signed_2dp(d.f1),
        signed_2dp(d.accuracy)
    );
    out.push_str("\nAI\n");
    out.push_str(&render_confusion(&c.ai_confusion, &c.ai_confusion_normalized));
    out.push_str("\nHumans\n");
    out.push_str(&render_confusion(&c.human_confusion, &c.human_confusion_normalized));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{confusion, prf1};
    use crate::ClassLabel::{Dreb as D, Oreb as O};

    #[test]
    fn ap_table_layout() {
        let t = ApTable {
            deltas: vec![1.0, 2.0, 0.5],
            classes: vec![D, O],
            ap: vec![vec![0.5, 1.0, 0.0], vec![1.0, 1.0, 1.0]],
            map_per_delta: vec![0.75, 1.0, 0.5],
            class_mean: vec![0.5, 1.0],
            grand_mean: 0.75,
        };
        let s = render_ap_table(&t);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "class        @1s     @2s   @0.5s    mean");
        assert_eq!(lines[1], "DREB        0.50    1.00    0.00    0.50");
        assert_eq!(lines[3], "mAP         0.75    1.00    0.50    0.75");
    }

    #[test]
    fn prf1_layout() {
        let cm = confusion(&[D, O, O], &[D, O, D], &[D, O]).unwrap();
        let s = render_prf1(&prf1(&cm));
        assert!(s.lines().nth(1).unwrap().starts_with("DREB              1.00      0.50      0.67        2"));
        assert!(s.contains("accuracy 0.67"));
        let c = render_confusion(&cm, &cm.row_normalized());
        assert!(c.lines().nth(1).unwrap().contains("1 (0.50)"));
    }
}
