//! cBioPortal-style profile and clinical-sample parsing, platform alignment
//! and the real-data top-k study.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{PredictorArray, ResponseBlock};
use crate::error::{Error, Result};
use crate::measures::{score_all, MeasureKind, MeasureOptions};
use crate::screening::{cutoff, intersect_selections, rank_features, ScoreTable};

const SYMBOL: &str = "Hugo_Symbol";
const ENTREZ: &str = "Entrez_Gene_Id";
const SAMPLE_ID: &str = "SAMPLE_ID";
/// Annotation columns that are neither symbol, Entrez id nor samples.
const IGNORED_ANNOTATIONS: [&str; 1] = ["Cytoband"];

/// A genes x samples profile; missing cells are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneMatrix {
    pub name: String,
    pub genes: Vec<String>,
    pub entrez: Option<Vec<String>>,
    pub samples: Vec<String>,
    pub values: Array2<f64>,
    /// Data rows skipped because their symbol was empty.
    pub skipped_rows: usize,
}

impl GeneMatrix {
    pub fn new(name: impl Into<String>, genes: Vec<String>, samples: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (genes.len(), samples.len()) {
            return Err(Error::Argument(format!(
                "{} genes x {} samples but values are {:?}",
                genes.len(),
                samples.len(),
                values.dim()
            )));
        }
        if genes.iter().any(|g| g.is_empty()) {
            return Err(Error::Argument("empty gene symbol".into()));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::Argument("infinite profile value".into()));
        }
        Ok(Self {
            name: name.into(),
            genes,
            entrez: None,
            samples,
            values,
            skipped_rows: 0,
        })
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    /// Tab-separated text in the input format; numbers use the shortest
    /// representation that parses back to the same value.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(SYMBOL);
        if self.entrez.is_some() {
            let _ = write!(out, "\t{ENTREZ}");
        }
        for s in &self.samples {
            let _ = write!(out, "\t{s}");
        }
        out.push('\n');
        for (i, g) in self.genes.iter().enumerate() {
            out.push_str(g);
            if let Some(e) = &self.entrez {
                let _ = write!(out, "\t{}", e[i]);
            }
            for v in self.values.row(i) {
                if v.is_nan() {
                    out.push_str("\tNA");
                } else {
                    let _ = write!(out, "\t{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Yields `(1-based line number, fields)` for non-comment, non-blank lines.
fn table_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
        .map(|(i, l)| (i, l.split('\t').map(str::trim).collect()))
}

fn parse_cell(cell: &str) -> Option<std::result::Result<f64, ()>> {
    if cell.is_empty() || cell.eq_ignore_ascii_case("NA") || cell.eq_ignore_ascii_case("NaN") {
        return None;
    }
    Some(cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

pub fn parse_profile(path: &Path) -> Result<GeneMatrix> {
    let text = fs::read_to_string(path)?;
    parse_profile_str(&text, path)
}

/// Parses profile text; `path` is used for the matrix name and diagnostics.
pub fn parse_profile_str(text: &str, path: &Path) -> Result<GeneMatrix> {
    let mut lines = table_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| format_err(path, 0, "no header row"))?;
    let sym_col = header
        .iter()
        .position(|h| *h == SYMBOL)
        .ok_or_else(|| format_err(path, hline, format!("header has no {SYMBOL} column")))?;
    let entrez_col = header.iter().position(|h| *h == ENTREZ);
    let mut samples = Vec::new();
    let mut sample_cols = Vec::new();
    let mut seen = HashSet::new();
    for (c, h) in header.iter().enumerate() {
        if c == sym_col || Some(c) == entrez_col || IGNORED_ANNOTATIONS.contains(h) {
            continue;
        }
        if h.is_empty() {
            return Err(format_err(path, hline, format!("empty sample id in column {}", c + 1)));
        }
        if !seen.insert(*h) {
            return Err(format_err(path, hline, format!("duplicate sample column '{h}'")));
        }
        samples.push(h.to_string());
        sample_cols.push(c);
    }
    let width = header.len();
    let mut genes = Vec::new();
    let mut entrez = Vec::new();
    let mut values = Vec::new();
    let mut skipped_rows = 0;
    for (ln, fields) in lines {
        if fields.len() != width {
            return Err(format_err(
                path,
                ln,
                format!("row has {} fields, header has {width}", fields.len()),
            ));
        }
        if fields[sym_col].is_empty() {
            skipped_rows += 1;
            continue;
        }
        for &c in &sample_cols {
            let v = match parse_cell(fields[c]) {
                None => f64::NAN,
                Some(Ok(v)) => v,
                Some(Err(())) => {
                    return Err(format_err(
                        path,
                        ln,
                        format!("unparsable value '{}' in column '{}'", fields[c], header[c]),
                    ))
                }
            };
            values.push(v);
        }
        genes.push(fields[sym_col].to_string());
        if let Some(e) = entrez_col {
            entrez.push(fields[e].to_string());
        }
    }
    if skipped_rows > 0 {
        log::warn!("{}: skipped {skipped_rows} rows with an empty {SYMBOL}", path.display());
    }
    let values = Array2::from_shape_vec((genes.len(), samples.len()), values).expect("row widths checked");
    Ok(GeneMatrix {
        name: stem(path),
        genes,
        entrez: entrez_col.map(|_| entrez),
        samples,
        values,
        skipped_rows,
    })
}

/// Sample id to TMB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClinicalTable {
    pub tmb_column: String,
    pub samples: Vec<String>,
    pub tmb: Vec<f64>,
    /// Rows dropped because their TMB was missing, unparsable or negative.
    pub dropped: usize,
}

impl ClinicalTable {
    pub fn new(tmb_column: impl Into<String>, samples: Vec<String>, tmb: Vec<f64>) -> Result<Self> {
        if samples.len() != tmb.len() {
            return Err(Error::Argument(format!("{} samples but {} TMB values", samples.len(), tmb.len())));
        }
        if tmb.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Argument("TMB values must be finite and nonnegative".into()));
        }
        let unique: HashSet<&String> = samples.iter().collect();
        if unique.len() != samples.len() {
            return Err(Error::Argument("duplicate clinical sample ids".into()));
        }
        Ok(Self {
            tmb_column: tmb_column.into(),
            samples,
            tmb,
            dropped: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, sample: &str) -> Option<f64> {
        self.samples.iter().position(|s| s == sample).map(|i| self.tmb[i])
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("{SAMPLE_ID}\t{}\n", self.tmb_column);
        for (s, v) in self.samples.iter().zip(&self.tmb) {
            let _ = writeln!(out, "{s}\t{v}");
        }
        out
    }
}

pub fn parse_clinical(path: &Path, tmb_column: &str) -> Result<ClinicalTable> {
    let text = fs::read_to_string(path)?;
    parse_clinical_str(&text, path, tmb_column)
}

pub fn parse_clinical_str(text: &str, path: &Path, tmb_column: &str) -> Result<ClinicalTable> {
    let mut lines = table_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| format_err(path, 0, "no header row"))?;
    let available = || header.join(", ");
    let id_col = header
        .iter()
        .position(|h| *h == SAMPLE_ID)
        .ok_or_else(|| format_err(path, hline, format!("no {SAMPLE_ID} column; available: {}", available())))?;
    let tmb_col = header.iter().position(|h| *h == tmb_column).ok_or_else(|| {
        format_err(
            path,
            hline,
            format!("TMB column '{tmb_column}' not found; available: {}", available()),
        )
    })?;
    let mut samples = Vec::new();
    let mut tmb = Vec::new();
    let mut seen = HashSet::new();
    let mut dropped = 0;
    for (ln, fields) in lines {
        if fields.len() != header.len() {
            return Err(format_err(
                path,
                ln,
                format!("row has {} fields, header has {}", fields.len(), header.len()),
            ));
        }
        let id = fields[id_col];
        if id.is_empty() {
            return Err(format_err(path, ln, "empty sample id"));
        }
        if !seen.insert(id) {
            return Err(format_err(path, ln, format!("duplicate sample id '{id}'")));
        }
        match parse_cell(fields[tmb_col]) {
            Some(Ok(v)) if v >= 0.0 => {
                samples.push(id.to_string());
                tmb.push(v);
            }
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} rows without a usable {tmb_column}", path.display());
    }
    Ok(ClinicalTable {
        tmb_column: tmb_column.to_string(),
        samples,
        tmb,
        dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Impute {
    /// Drop genes with any missing value.
    #[default]
    Drop,
    /// Fill missing values with the gene's median over retained samples on
    /// that platform.
    Median,
}

impl std::str::FromStr for Impute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "drop" => Ok(Self::Drop),
            "median" => Ok(Self::Median),
            other => Err(Error::Config(format!("unknown imputation '{other}' (drop|median)"))),
        }
    }
}

/// Gene and sample counts after each alignment stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentStats {
    pub genes_per_platform: Vec<usize>,
    pub duplicates_dropped: Vec<usize>,
    pub common_genes: usize,
    pub common_samples: usize,
    pub genes_with_missing: usize,
    pub cells_imputed: usize,
    pub final_genes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiOmicsDataset {
    pub x: PredictorArray,
    pub y: ResponseBlock,
    pub genes: Vec<String>,
    pub samples: Vec<String>,
    pub platforms: Vec<String>,
    pub stats: AlignmentStats,
}

impl MultiOmicsDataset {
    /// Splits the dataset back into per-platform profiles.
    pub fn to_profiles(&self) -> Vec<GeneMatrix> {
        self.platforms
            .iter()
            .enumerate()
            .map(|(k, name)| GeneMatrix {
                name: name.clone(),
                genes: self.genes.clone(),
                entrez: None,
                samples: self.samples.clone(),
                values: self.x.values().index_axis(ndarray::Axis(0), k).t().to_owned(),
                skipped_rows: 0,
            })
            .collect()
    }

    pub fn to_clinical(&self, tmb_column: &str) -> ClinicalTable {
        ClinicalTable {
            tmb_column: tmb_column.to_string(),
            samples: self.samples.clone(),
            tmb: self.y.values().column(0).to_vec(),
            dropped: 0,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn unique_rows(m: &GeneMatrix) -> (HashMap<&str, usize>, usize) {
    let mut count: HashMap<&str, usize> = HashMap::new();
    for g in &m.genes {
        *count.entry(g).or_default() += 1;
    }
    let dup = count.values().filter(|&&c| c > 1).map(|&c| c).sum();
    let rows = m
        .genes
        .iter()
        .enumerate()
        .filter(|(_, g)| count[g.as_str()] == 1)
        .map(|(i, g)| (g.as_str(), i))
        .collect();
    (rows, dup)
}

/// Builds the `d x n x p` dataset from profiles and clinical data.
pub fn align(profiles: &[GeneMatrix], clinical: &ClinicalTable, impute: Impute) -> Result<MultiOmicsDataset> {
    if profiles.is_empty() {
        return Err(Error::Argument("align needs at least one profile".into()));
    }
    let mut stats = AlignmentStats {
        genes_per_platform: profiles.iter().map(|m| m.genes.len()).collect(),
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(profiles.len());
    for m in profiles {
        let (r, dup) = unique_rows(m);
        stats.duplicates_dropped.push(dup);
        rows.push(r);
    }
    let mut genes: BTreeSet<&str> = rows[0].keys().copied().collect();
    for r in &rows[1..] {
        genes.retain(|g| r.contains_key(g));
    }
    stats.common_genes = genes.len();

    let clinical_ids: HashSet<&str> = clinical.samples.iter().map(String::as_str).collect();
    let mut samples: BTreeSet<&str> = profiles[0].samples.iter().map(String::as_str).collect();
    for m in profiles {
        let own: HashSet<&str> = m.samples.iter().map(String::as_str).collect();
        samples.retain(|s| own.contains(s));
    }
    samples.retain(|s| clinical_ids.contains(s));
    stats.common_samples = samples.len();
    let fail = |stats: &AlignmentStats| {
        Error::Alignment(format!(
            "genes per platform {:?}, duplicates dropped {:?}, common genes {}, common samples {}, genes with missing values {}, remaining genes {}",
            stats.genes_per_platform,
            stats.duplicates_dropped,
            stats.common_genes,
            stats.common_samples,
            stats.genes_with_missing,
            stats.final_genes
        ))
    };
    if genes.is_empty() || samples.is_empty() {
        return Err(fail(&stats));
    }

    let samples: Vec<&str> = samples.into_iter().collect();
    let cols: Vec<Vec<usize>> = profiles
        .iter()
        .map(|m| {
            let pos: HashMap<&str, usize> = m.samples.iter().enumerate().map(|(j, s)| (s.as_str(), j)).collect();
            samples.iter().map(|s| pos[s]).collect()
        })
        .collect();

    // per platform, per kept gene, the n retained values
    let mut kept_genes = Vec::new();
    let mut columns: Vec<Vec<Vec<f64>>> = vec![Vec::new(); profiles.len()];
    for g in genes {
        let mut blocks: Vec<Vec<f64>> = profiles
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let row = m.values.row(rows[k][g]);
                cols[k].iter().map(|&j| row[j]).collect()
            })
            .collect();
        let missing: usize = blocks.iter().flatten().filter(|v| v.is_nan()).count();
        if missing > 0 {
            stats.genes_with_missing += 1;
            if impute == Impute::Drop {
                continue;
            }
            let mut usable = true;
            for b in &mut blocks {
                let present: Vec<f64> = b.iter().copied().filter(|v| !v.is_nan()).collect();
                if present.is_empty() {
                    usable = false;
                    break;
                }
                let med = median(present);
                b.iter_mut().filter(|v| v.is_nan()).for_each(|v| *v = med);
            }
            if !usable {
                continue;
            }
            stats.cells_imputed += missing;
        }
        kept_genes.push(g.to_string());
        for (k, b) in blocks.into_iter().enumerate() {
            columns[k].push(b);
        }
    }
    stats.final_genes = kept_genes.len();
    if kept_genes.is_empty() {
        return Err(fail(&stats));
    }
    let (n, p) = (samples.len(), kept_genes.len());
    let platforms: Vec<Array2<f64>> = columns
        .iter()
        .map(|cs| Array2::from_shape_fn((n, p), |(i, j)| cs[j][i]))
        .collect();
    let tmb: Vec<f64> = samples
        .iter()
        .map(|s| clinical.get(s).expect("sample is in clinical"))
        .collect();
    Ok(MultiOmicsDataset {
        x: PredictorArray::from_platforms(&platforms)?,
        y: ResponseBlock::from_vector(tmb)?,
        genes: kept_genes,
        samples: samples.into_iter().map(str::to_string).collect(),
        platforms: profiles.iter().map(|m| m.name.clone()).collect(),
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedGene {
    pub gene: String,
    pub utility: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSelection {
    pub method: MeasureKind,
    pub selected: Vec<SelectedGene>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealStudyReport {
    pub platforms: Vec<String>,
    pub subjects: usize,
    pub genes: usize,
    pub k: usize,
    pub options: MeasureOptions,
    pub alignment: AlignmentStats,
    pub selections: Vec<MethodSelection>,
    /// Genes selected by every method, lexicographic.
    pub intersection: Vec<String>,
}

/// Scores every gene block against TMB for each method, keeps the top `k`
/// (default `cutoff(n)`) genes and intersects the selections.
pub fn run_real_study(
    ds: &MultiOmicsDataset,
    methods: &[MeasureKind],
    opts: &MeasureOptions,
    k: Option<usize>,
) -> Result<RealStudyReport> {
    let d = ds.x.platforms();
    for m in methods {
        m.check_dims(d, 1)?;
    }
    let n = ds.x.subjects();
    let k = k.unwrap_or_else(|| cutoff(n)).min(ds.genes.len());
    let mut selections = Vec::with_capacity(methods.len());
    for &m in methods {
        let table: ScoreTable = score_all(&ds.x, &ds.y, m, opts)?;
        let u = table.utilities();
        let selected = rank_features(&table)
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(r, j)| SelectedGene {
                gene: ds.genes[j].clone(),
                utility: u[j],
                rank: r + 1,
            })
            .collect();
        log::info!("{m}: scored {} genes", u.len());
        selections.push(MethodSelection { method: m, selected });
    }
    let sets: Vec<Vec<String>> = selections
        .iter()
        .map(|s| s.selected.iter().map(|g| g.gene.clone()).collect())
        .collect();
    Ok(RealStudyReport {
        platforms: ds.platforms.clone(),
        subjects: n,
        genes: ds.genes.len(),
        k,
        options: *opts,
        alignment: ds.stats.clone(),
        intersection: intersect_selections(&sets),
        selections,
    })
}

fn selection_file_name(m: MeasureKind) -> String {
    format!("selection_{}.csv", m.name())
}

/// Writes `selection_<method>.csv`, `intersection.csv` and `real_study.json`.
pub fn emit_real_study(r: &RealStudyReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    for s in &r.selections {
        let mut body = String::from("gene,utility,rank\n");
        for g in &s.selected {
            let _ = writeln!(body, "{},{},{}", g.gene, g.utility, g.rank);
        }
        files.insert(selection_file_name(s.method), body);
    }
    let mut inter = String::from("gene\n");
    for g in &r.intersection {
        let _ = writeln!(inter, "{g}");
    }
    files.insert("intersection.csv".into(), inter);
    let mut json = serde_json::to_string_pretty(r)?;
    json.push('\n');
    files.insert("real_study.json".into(), json);
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> PathBuf {
        PathBuf::from(format!("{name}.txt"))
    }

    #[test]
    fn profile_with_na_and_entrez() {
        let text = "#meta\nHugo_Symbol\tEntrez_Gene_Id\tS1\tS2\nA\t1\t0.5\tNA\nB\t2\t-1\t2\nC\t3\t\t0\n";
        let m = parse_profile_str(text, &p("cna")).unwrap();
        assert_eq!(m.name, "cna");
        assert_eq!(m.values.dim(), (3, 2));
        assert_eq!(m.missing_count(), 2);
        assert_eq!(m.entrez.as_ref().unwrap(), &["1", "2", "3"]);
        let back = parse_profile_str(&m.to_tsv(), &p("cna")).unwrap();
        assert_eq!(back.to_tsv(), m.to_tsv());
    }

    #[test]
    fn profile_errors_carry_lines() {
        let missing = parse_profile_str("#c\nGene\tS1\nA\t1\n", &p("x")).unwrap_err();
        assert!(missing.to_string().contains(":2:"), "{missing}");
        let ragged = parse_profile_str("Hugo_Symbol\tS1\tS2\nA\t1\t2\nB\t1\n", &p("x")).unwrap_err();
        assert!(ragged.to_string().contains(":3:"), "{ragged}");
        assert!(parse_profile_str("Hugo_Symbol\tS1\tS1\nA\t1\t2\n", &p("x")).is_err());
        assert!(parse_profile_str("Hugo_Symbol\tS1\nA\tabc\n", &p("x")).is_err());
    }

    #[test]
    fn clinical_drops_unusable_rows() {
        let text = "#a\n#b\nPATIENT_ID\tSAMPLE_ID\tTMB\nP1\tS1\t3.5\nP2\tS2\tNA\nP3\tS3\t-1\n";
        let c = parse_clinical_str(text, &p("clin"), "TMB").unwrap();
        assert_eq!(c.samples, vec!["S1"]);
        assert_eq!(c.dropped, 2);
        let err = parse_clinical_str(text, &p("clin"), "TMB_NONSYNONYMOUS").unwrap_err();
        assert!(err.to_string().contains("PATIENT_ID, SAMPLE_ID, TMB"), "{err}");
    }

    fn gm(name: &str, genes: &[&str], samples: &[&str], v: &[f64]) -> GeneMatrix {
        GeneMatrix::new(
            name,
            genes.iter().map(|s| s.to_string()).collect(),
            samples.iter().map(|s| s.to_string()).collect(),
            Array2::from_shape_vec((genes.len(), samples.len()), v.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn clin(samples: &[&str]) -> ClinicalTable {
        let tmb = (0..samples.len()).map(|i| i as f64 + 1.0).collect();
        ClinicalTable::new("TMB", samples.iter().map(|s| s.to_string()).collect(), tmb).unwrap()
    }

    #[test]
    fn align_intersects_and_sorts() {
        let a = gm("a", &["G3", "G1", "G2"], &["S2", "S1", "S3"], &[1., 2., 3., 4., 5., 6., 7., 8., 9.]);
        let b = gm("b", &["G1", "G3", "G4"], &["S1", "S2"], &[10., 11., 12., 13., 14., 15.]);
        let ds = align(&[a, b], &clin(&["S1", "S2", "S9"]), Impute::Drop).unwrap();
        assert_eq!(ds.genes, vec!["G1", "G3"]);
        assert_eq!(ds.samples, vec!["S1", "S2"]);
        // platform a, subject S1, gene G3 is row 0 col 1
        assert_eq!(ds.x.values()[[0, 0, 1]], 2.0);
        assert_eq!(ds.x.values()[[1, 0, 0]], 10.0);
        assert_eq!(ds.x.values()[[1, 1, 1]], 13.0);
        let again = align(&ds.to_profiles(), &ds.to_clinical("TMB"), Impute::Drop).unwrap();
        assert_eq!(again.x, ds.x);
        assert_eq!(again.genes, ds.genes);
    }

    #[test]
    fn align_duplicates_and_missing() {
        let nan = f64::NAN;
        let a = gm("a", &["A", "B", "B", "C"], &["S1", "S2", "S3"], &[1., 2., 3., 4., 5., 6., 7., 8., 9., nan, 1., 3.]);
        let c = clin(&["S1", "S2", "S3"]);
        let dropped = align(&[a.clone()], &c, Impute::Drop).unwrap();
        assert_eq!(dropped.genes, vec!["A"]);
        assert_eq!(dropped.stats.duplicates_dropped, vec![2]);
        let imputed = align(&[a], &c, Impute::Median).unwrap();
        assert_eq!(imputed.genes, vec!["A", "C"]);
        assert_eq!(imputed.x.values()[[0, 0, 1]], 2.0);
        let none = align(&[gm("z", &["A"], &["Q"], &[1.0])], &c, Impute::Drop).unwrap_err();
        assert!(none.to_string().contains("common samples 0"), "{none}");
    }
}
