//! Report emission: JSON, CSV tables and SVG bar charts with whiskers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::experiment::ExperimentReport;

pub const SUMMARY_HEADER: &str = "setting,n,mean_reward,std_reward,mean_improvement,std_improvement";

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub setting: String,
    pub n: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_improvement: f64,
    pub std_improvement: f64,
}

impl SummaryRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.setting, self.n, self.mean_reward, self.std_reward, self.mean_improvement, self.std_improvement
        )
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SUMMARY_HEADER) {
        return Err(HarnessError::Config("summary csv: unexpected header".into()));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| HarnessError::Config(format!("summary csv: bad number `{s}`: {e}")))
    };
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(HarnessError::Config(format!("summary csv: expected 6 fields in `{l}`")));
            }
            Ok(SummaryRow {
                setting: f[0].to_string(),
                n: f[1]
                    .parse()
                    .map_err(|e| HarnessError::Config(format!("summary csv: bad count `{}`: {e}", f[1])))?,
                mean_reward: num(f[2])?,
                std_reward: num(f[3])?,
                mean_improvement: num(f[4])?,
                std_improvement: num(f[5])?,
            })
        })
        .collect()
}

pub fn summary_rows(report: &ExperimentReport) -> Vec<SummaryRow> {
    report
        .summary
        .iter()
        .map(|s| SummaryRow {
            setting: s.setting.to_string(),
            n: s.run_means.len(),
            mean_reward: s.mean_reward,
            std_reward: s.std_reward,
            mean_improvement: s.mean_improvement,
            std_improvement: s.std_improvement,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bar {
    pub label: String,
    pub value: f64,
    /// Half-length of the whisker.
    pub err: f64,
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;
const COLORS: [&str; 5] = ["#8c8c8c", "#e377c2", "#bcbd22", "#1f77b4", "#2ca02c"];

/// A bar chart with one bar per entry and symmetric whiskers.
pub fn bar_chart_svg(title: &str, y_label: &str, bars: &[Bar]) -> String {
    let lo = bars.iter().map(|b| b.value - b.err).fold(0.0f64, f64::min);
    let hi = bars.iter().map(|b| b.value + b.err).fold(0.0f64, f64::max);
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let (lo, hi) = (lo - 0.05 * span, hi + 0.05 * span);
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let y = |v: f64| MARGIN_T + (hi - v) / (hi - lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(y_label)
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#e0e0e0"/>"##,
            WIDTH - MARGIN_R
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            MARGIN_L - 6.0,
            yy + 4.0
        );
    }
    let y0 = y(0.0);
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN_L}" y1="{y0:.1}" x2="{:.1}" y2="{y0:.1}" stroke="#000"/>"##,
        WIDTH - MARGIN_R
    );
    let slot = plot_w / bars.len().max(1) as f64;
    for (i, b) in bars.iter().enumerate() {
        let cx = MARGIN_L + slot * (i as f64 + 0.5);
        let bw = slot * 0.6;
        let (top, bottom) = if b.value >= 0.0 { (y(b.value), y0) } else { (y0, y(b.value)) };
        let _ = writeln!(
            s,
            r#"<rect class="bar" x="{:.1}" y="{top:.1}" width="{bw:.1}" height="{:.1}" fill="{}"><title>{}: {:.4}</title></rect>"#,
            cx - bw / 2.0,
            bottom - top,
            COLORS[i % COLORS.len()],
            escape(&b.label),
            b.value
        );
        let (w1, w2) = (y(b.value + b.err), y(b.value - b.err));
        let _ = writeln!(
            s,
            r##"<line class="whisker" x1="{cx:.1}" y1="{w1:.1}" x2="{cx:.1}" y2="{w2:.1}" stroke="#000"/>"##
        );
        for w in [w1, w2] {
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{w:.1}" x2="{:.1}" y2="{w:.1}" stroke="#000"/>"##,
                cx - 6.0,
                cx + 6.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_B + 18.0,
            escape(&b.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

/// Writes the summary table and both charts; shared by synthetic and human
/// reports. `offset` is added to rewards in the reward chart only.
pub(crate) fn emit_summary(dir: &Path, rows: &[SummaryRow], offset: f64, what: &str) -> Result<Vec<PathBuf>> {
    let csv = dir.join("report.csv");
    write(&csv, &summary_csv(rows))?;
    let reward_bars: Vec<Bar> = rows
        .iter()
        .map(|r| Bar {
            label: r.setting.clone(),
            value: r.mean_reward + offset,
            err: r.std_reward,
        })
        .collect();
    let imp_bars: Vec<Bar> = rows
        .iter()
        .map(|r| Bar {
            label: r.setting.clone(),
            value: r.mean_improvement,
            err: r.std_improvement,
        })
        .collect();
    let reward = dir.join("charts").join("reward.svg");
    write(
        &reward,
        &bar_chart_svg(&format!("{what}: evaluation reward"), &format!("reward + {offset}"), &reward_bars),
    )?;
    let imp = dir.join("charts").join("improvement.svg");
    write(&imp, &bar_chart_svg(&format!("{what}: reward improvement"), "improvement", &imp_bars))?;
    Ok(vec![csv, reward, imp])
}

/// Writes `report.json`, `report.csv`, `runs.csv`, `comparisons.csv` and
/// `charts/*.svg` under `dir`.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let json = dir.join("report.json");
    write_json(&json, report)?;
    let what = match report.config.student {
        crate::StudentKind::Reversing => "reversing student",
        crate::StudentKind::HalfTrained => "half-trained student",
    };
    let mut files = vec![json];
    files.extend(emit_summary(dir, &summary_rows(report), report.config.reward_offset, what)?);

    let mut runs = String::from("seed,setting,mean_reward,improvement,success_rate,practice_pairs\n");
    for o in &report.seeds {
        for s in &o.settings {
            let _ = writeln!(
                runs,
                "{},{},{},{},{},{}",
                o.seed, s.setting, s.mean_reward, s.improvement, s.success_rate, s.practice_pairs
            );
        }
    }
    let runs_path = dir.join("runs.csv");
    write(&runs_path, &runs)?;
    files.push(runs_path);

    let mut cmp = String::from("a,b,statistic,p_two_sided,p_greater,seeds_p_greater_below_0.05\n");
    for c in &report.comparisons {
        let sig = c.per_seed_p_greater.iter().filter(|&&p| p < 0.05).count();
        match &c.across_seeds {
            Some(w) => {
                let _ = writeln!(cmp, "{},{},{},{},{},{sig}", c.a, c.b, w.statistic, w.p_two_sided, w.p_greater);
            }
            None => {
                let _ = writeln!(cmp, "{},{},,,,{sig}", c.a, c.b);
            }
        }
    }
    let cmp_path = dir.join("comparisons.csv");
    write(&cmp_path, &cmp)?;
    files.push(cmp_path);
    Ok(files)
}
