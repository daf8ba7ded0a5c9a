//! Monte Carlo benchmark: replicates x methods, criteria tables, boxplot data
//! and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SimConfig;
use crate::error::{Error, Result};
use crate::measures::{score_all, MeasureKind, MeasureOptions};
use crate::screening::{aggregate, cutoff, evaluate_at, CriteriaTable, ScreeningResult};
use crate::simgen::{gen_study, MULTIVARIATE_TRUE, UNIVARIATE_TRUE};

/// `(min, q1, median, q3, max)` with linearly interpolated quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn quantile_sorted(s: &[f64], p: f64) -> f64 {
    let h = (s.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

pub fn five_number(xs: &[f64]) -> Result<FiveNumber> {
    if xs.is_empty() || xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("five-number summary needs finite, nonempty input".into()));
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(FiveNumber {
        min: s[0],
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
        max: s[s.len() - 1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: MeasureKind,
    pub criteria: CriteriaTable,
    /// Minimum model size per replicate.
    pub model_sizes: Vec<usize>,
    pub model_size_summary: FiveNumber,
    /// `true_ranks[r][t]`: rank of true feature `t` in replicate `r`.
    pub true_ranks: Vec<Vec<usize>>,
    pub rank_summaries: Vec<FiveNumber>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: SimConfig,
    pub options: MeasureOptions,
    pub methods: Vec<MeasureKind>,
    pub cutoff: usize,
    /// 0-based true feature indices.
    pub true_features: Vec<usize>,
    pub results: Vec<MethodReport>,
    /// Excluded from `report.json`; written to `timing.json` instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkOptions {
    pub measures: MeasureOptions,
    pub cutoff_override: Option<usize>,
}

fn true_features(cfg: &SimConfig) -> Vec<usize> {
    if cfg.study.is_multivariate() {
        MULTIVARIATE_TRUE.to_vec()
    } else {
        UNIVARIATE_TRUE.to_vec()
    }
}

/// Checks every method against the study's extents before any work.
pub fn check_methods(cfg: &SimConfig, methods: &[MeasureKind]) -> Result<()> {
    cfg.validate()?;
    for m in methods {
        m.check_dims(cfg.d, cfg.q).map_err(|_| {
            Error::Config(format!(
                "{m} cannot handle multivariate predictors or response; study {} has d = {}, q = {}",
                cfg.study, cfg.d, cfg.q
            ))
        })?;
    }
    Ok(())
}

/// Runs `cfg.replicates` replicates; every method scores the same generated
/// instance within a replicate.
pub fn run_benchmark(cfg: &SimConfig, methods: &[MeasureKind], opts: &BenchmarkOptions) -> Result<BenchmarkReport> {
    check_methods(cfg, methods)?;
    let start = Instant::now();
    let s = opts.cutoff_override.unwrap_or_else(|| cutoff(cfg.n));
    let per_rep: Vec<Vec<ScreeningResult>> = if methods.is_empty() {
        Vec::new()
    } else {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| -> Result<Vec<ScreeningResult>> {
                let inst = gen_study(cfg, r)?;
                let out = methods
                    .iter()
                    .map(|&m| {
                        let table = score_all(&inst.x, &inst.y, m, &opts.measures)?;
                        evaluate_at(&table, &inst.true_set, s)
                    })
                    .collect::<Result<Vec<_>>>()?;
                log::info!("replicate {} of {} done", r + 1, cfg.replicates);
                Ok(out)
            })
            .collect::<Result<_>>()?
    };
    let results = methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let rs: Vec<ScreeningResult> = per_rep.iter().map(|v| v[mi].clone()).collect();
            summarize(method, &rs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkReport {
        config: cfg.clone(),
        options: opts.measures,
        methods: methods.to_vec(),
        cutoff: s,
        true_features: true_features(cfg),
        results,
        wall_time_secs: Some(start.elapsed().as_secs_f64()),
    })
}

fn summarize(method: MeasureKind, rs: &[ScreeningResult]) -> Result<MethodReport> {
    let criteria = aggregate(rs)?;
    let model_sizes: Vec<usize> = rs.iter().map(|r| r.model_size).collect();
    let sizes: Vec<f64> = model_sizes.iter().map(|&v| v as f64).collect();
    let true_ranks: Vec<Vec<usize>> = rs.iter().map(|r| r.true_ranks.clone()).collect();
    let rank_summaries = (0..criteria.true_features.len())
        .map(|t| five_number(&true_ranks.iter().map(|r| r[t] as f64).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MethodReport {
        method,
        criteria,
        model_size_summary: five_number(&sizes)?,
        model_sizes,
        true_ranks,
        rank_summaries,
    })
}

fn feature_label(j: usize) -> String {
    format!("X{}", j + 1)
}

pub fn criteria_csv(r: &BenchmarkReport) -> String {
    let mut out = String::from("method");
    for &j in &r.true_features {
        let _ = write!(out, ",P_s({})", feature_label(j));
    }
    out.push_str(",P_a\n");
    for m in &r.results {
        out.push_str(m.method.name());
        for p in &m.criteria.p_s {
            let _ = write!(out, ",{p}");
        }
        let _ = writeln!(out, ",{}", m.criteria.p_a);
    }
    out
}

pub fn model_size_csv(r: &BenchmarkReport) -> String {
    let reps = r.results.first().map_or(0, |m| m.model_sizes.len());
    let mut out = String::from("method");
    for i in 0..reps {
        let _ = write!(out, ",rep{}", i + 1);
    }
    out.push('\n');
    for m in &r.results {
        out.push_str(m.method.name());
        for s in &m.model_sizes {
            let _ = write!(out, ",{s}");
        }
        out.push('\n');
    }
    out
}

pub fn ranks_csv(r: &BenchmarkReport) -> String {
    let mut out = String::from("method,replicate");
    for &j in &r.true_features {
        let _ = write!(out, ",{}", feature_label(j));
    }
    out.push('\n');
    for m in &r.results {
        for (i, ranks) in m.true_ranks.iter().enumerate() {
            let _ = write!(out, "{},{}", m.method.name(), i + 1);
            for v in ranks {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

/// Canonical `report.json` text (no wall time).
pub fn report_json(r: &BenchmarkReport) -> Result<String> {
    let stripped = BenchmarkReport {
        wall_time_secs: None,
        ..r.clone()
    };
    let mut s = serde_json::to_string_pretty(&stripped)?;
    s.push('\n');
    Ok(s)
}

pub fn load_report(path: &Path) -> Result<BenchmarkReport> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes `criteria.csv`, `model_size.csv`, `ranks.csv`, `report.json`,
/// `boxplot_S.svg`, `boxplot_ranks.svg` and, when known, `timing.json`.
pub fn emit_report(r: &BenchmarkReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = vec![
        ("criteria.csv", criteria_csv(r)),
        ("model_size.csv", model_size_csv(r)),
        ("ranks.csv", ranks_csv(r)),
        ("report.json", report_json(r)?),
        ("boxplot_S.svg", boxplot_model_size(r)),
        ("boxplot_ranks.svg", boxplot_ranks(r)),
    ];
    if let Some(t) = r.wall_time_secs {
        files.push(("timing.json", format!("{{\"wall_time_secs\": {t}}}\n")));
    }
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

struct BoxSeries {
    label: String,
    summary: FiveNumber,
}

fn svg_boxplot(title: &str, y_label: &str, series: &[BoxSeries]) -> String {
    let (w_box, pad_l, pad_r, pad_t, pad_b, plot_h) = (48.0, 70.0, 20.0, 40.0, 110.0, 320.0);
    let width = pad_l + pad_r + w_box * series.len().max(1) as f64;
    let height = pad_t + plot_h + pad_b;
    let lo = 0.0f64;
    let hi = series.iter().map(|s| s.summary.max).fold(1.0f64, f64::max);
    let y = |v: f64| pad_t + plot_h * (1.0 - (v - lo) / (hi - lo));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, width / 2.0);
    let _ = writeln!(
        out,
        r#"<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{}" stroke="black"/>"#,
        pad_t + plot_h
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.0}</text>"#,
            pad_l - 6.0,
            y(v) + 4.0,
            v
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{y_label}</text>"#,
        pad_t + plot_h / 2.0,
        pad_t + plot_h / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let cx = pad_l + w_box * (i as f64 + 0.5);
        let f = &s.summary;
        let half = w_box * 0.3;
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
            y(f.max),
            y(f.min)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="lightsteelblue" stroke="black"/>"#,
            cx - half,
            y(f.q3),
            2.0 * half,
            (y(f.q1) - y(f.q3)).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y(f.median),
            cx + half,
            y(f.median)
        );
        let ly = pad_t + plot_h + 10.0;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{ly:.1}" transform="rotate(60 {cx:.1} {ly:.1})">{}</text>"#,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn boxplot_model_size(r: &BenchmarkReport) -> String {
    let series: Vec<BoxSeries> = r
        .results
        .iter()
        .map(|m| BoxSeries {
            label: m.method.name().to_string(),
            summary: m.model_size_summary,
        })
        .collect();
    svg_boxplot(&format!("Minimum model size, study {}", r.config.study), "S", &series)
}

pub fn boxplot_ranks(r: &BenchmarkReport) -> String {
    let mut series = Vec::new();
    for m in &r.results {
        for (t, s) in m.rank_summaries.iter().enumerate() {
            series.push(BoxSeries {
                label: format!("{} {}", m.method.name(), feature_label(r.true_features[t])),
                summary: *s,
            });
        }
    }
    svg_boxplot(&format!("Rank of true predictors, study {}", r.config.study), "rank", &series)
}
