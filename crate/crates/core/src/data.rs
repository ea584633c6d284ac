//! Dataset representation, file ingestion, standardization, and synthetic
//! Gaussian designs.
//!
//! A [`Dataset`] stores the design matrix column-wise (dense or sparse per
//! column) together with labels in `{-1,+1}` and cached squared column norms.
//! It is immutable after construction and safe to share across threads.
//!
//! Random generation is backed by ChaCha8 with explicit stream separation so
//! that the feature matrix (stream 0), training labels (stream 1), and
//! validation labels (stream 2) are independent draws that reproduce
//! bit-identically across platforms for a given seed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One feature column, stored dense or as (row index, value) pairs.
#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Dense(Vec<f64>),
    Sparse {
        /// Strictly increasing row indices of the nonzero entries.
        indices: Vec<u32>,
        values: Vec<f64>,
    },
}

impl Column {
    pub fn is_dense(&self) -> bool {
        matches!(self, Column::Dense(_))
    }

    pub fn nnz(&self) -> usize {
        match self {
            Column::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
            Column::Sparse { values, .. } => values.len(),
        }
    }

    pub fn sq_norm(&self) -> f64 {
        match self {
            Column::Dense(v) => v.iter().map(|x| x * x).sum(),
            Column::Sparse { values, .. } => values.iter().map(|x| x * x).sum(),
        }
    }

    /// `out += a * x` over the column entries.
    pub fn axpy(&self, a: f64, out: &mut [f64]) {
        match self {
            Column::Dense(v) => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += a * x;
                }
            }
            Column::Sparse { indices, values } => {
                for (&k, &x) in indices.iter().zip(values) {
                    out[k as usize] += a * x;
                }
            }
        }
    }

    /// Visits every structurally stored entry as `(row, value)`.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            Column::Dense(v) => {
                for (k, &x) in v.iter().enumerate() {
                    f(k, x);
                }
            }
            Column::Sparse { indices, values } => {
                for (&k, &x) in indices.iter().zip(values) {
                    f(k as usize, x);
                }
            }
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        match self {
            Column::Dense(v) => v.clone(),
            Column::Sparse { indices, values } => {
                let mut out = vec![0.0; n];
                for (&k, &x) in indices.iter().zip(values) {
                    out[k as usize] = x;
                }
                out
            }
        }
    }

    fn len(&self, n: usize) -> usize {
        match self {
            Column::Dense(v) => v.len(),
            Column::Sparse { indices, .. } => {
                // Sparse columns are valid for any n past the largest index;
                // report n if indices fit, otherwise the offending length.
                match indices.last() {
                    Some(&last) if last as usize >= n => last as usize + 1,
                    _ => n,
                }
            }
        }
    }
}

/// Immutable design matrix with labels and cached column norms.
#[derive(Clone, Debug)]
pub struct Dataset {
    n: usize,
    p: usize,
    columns: Vec<Column>,
    y: Vec<f64>,
    col_sq_norms: Vec<f64>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        let p = columns.len();
        if n == 0 {
            return Err(Error::NoRows);
        }
        if p == 0 {
            return Err(Error::InvalidSpec("dataset needs at least one feature".into()));
        }
        for (row, &v) in y.iter().enumerate() {
            if v != 1.0 && v != -1.0 {
                return Err(Error::BadLabel {
                    row: row + 1,
                    value: format!("{v}"),
                });
            }
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len(n) != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: col.len(n),
                });
            }
            if let Column::Sparse { indices, .. } = col {
                if indices.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidSpec(format!(
                        "column {} has non-increasing sparse indices",
                        j + 1
                    )));
                }
            }
        }
        let col_sq_norms = columns.iter().map(Column::sq_norm).collect();
        Ok(Dataset {
            n,
            p,
            columns,
            y,
            col_sq_norms,
        })
    }

    /// Builds a dense dataset from row-major features.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::NoRows);
        }
        let p = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: p,
                    got: r.len(),
                });
            }
        }
        let columns = (0..p)
            .map(|j| Column::Dense(rows.iter().map(|r| r[j]).collect()))
            .collect();
        Dataset::new(columns, y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn col_sq_norms(&self) -> &[f64] {
        &self.col_sq_norms
    }

    pub fn col_sq_norm(&self, j: usize) -> f64 {
        self.col_sq_norms[j]
    }

    pub fn has_sparse_columns(&self) -> bool {
        self.columns.iter().any(|c| !c.is_dense())
    }

    /// Scores `X beta` for a sparse coefficient vector of (index, value) pairs.
    pub fn scores(&self, beta: &[(usize, f64)]) -> Vec<f64> {
        let mut u = vec![0.0; self.n];
        for &(j, b) in beta {
            if b != 0.0 {
                self.columns[j].axpy(b, &mut u);
            }
        }
        u
    }

    /// Scores `X beta` for a dense coefficient vector.
    pub fn scores_dense(&self, beta: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.n];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                self.columns[j].axpy(b, &mut u);
            }
        }
        u
    }

    /// Returns a copy with a penalized all-ones column appended as feature
    /// `p+1`. The column is subject to the same penalties as every other
    /// coordinate; no unpenalized intercept is fitted anywhere.
    pub fn with_constant_column(&self) -> Dataset {
        let mut columns = self.columns.clone();
        columns.push(Column::Dense(vec![1.0; self.n]));
        Dataset::new(columns, self.y.clone()).expect("appending a column preserves validity")
    }
}

fn map_label(raw: &str, row: usize) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::BadLabel {
            row,
            value: raw.trim().to_string(),
        })?;
    if v == 1.0 || v == -1.0 || v == 0.0 {
        Ok(v)
    } else {
        Err(Error::BadLabel {
            row,
            value: raw.trim().to_string(),
        })
    }
}

/// Applies the 0 -> -1 encoding after checking the file does not mix the
/// {0,1} and {-1,+1} conventions.
fn finalize_labels(mut y: Vec<f64>, zero_rows: &[usize], neg_rows: &[usize]) -> Result<Vec<f64>> {
    if !zero_rows.is_empty() && !neg_rows.is_empty() {
        let row = zero_rows[0].max(neg_rows[0]);
        return Err(Error::BadLabel {
            row,
            value: "mixed 0 and -1 label encodings".into(),
        });
    }
    for v in &mut y {
        if *v == 0.0 {
            *v = -1.0;
        }
    }
    Ok(y)
}

/// Loads a comma-separated file; `label_column` is the 0-based index of the
/// label field. Labels may use `{-1,+1}` or `{0,1}` (0 maps to -1).
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, label_column: usize) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(|e| Error::Csv {
            row: 0,
            msg: e.to_string(),
        })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y_raw: Vec<f64> = Vec::new();
    let mut zero_rows = Vec::new();
    let mut neg_rows = Vec::new();
    let mut width = None;

    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + 1;
        let rec = rec.map_err(|e| Error::Csv {
            row,
            msg: e.to_string(),
        })?;
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::RaggedRow {
                row,
                expected: w,
                got: rec.len(),
            });
        }
        if label_column >= w {
            return Err(Error::InvalidSpec(format!(
                "label column {label_column} out of range for {w} fields"
            )));
        }
        let label = map_label(&rec[label_column], row)?;
        if label == 0.0 {
            zero_rows.push(row);
        } else if label == -1.0 {
            neg_rows.push(row);
        }
        y_raw.push(label);
        let mut feats = Vec::with_capacity(w - 1);
        for (col, field) in rec.iter().enumerate() {
            if col == label_column {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Csv {
                row,
                msg: format!("column {}: cannot parse '{}' as a number", col + 1, field),
            })?;
            feats.push(v);
        }
        rows.push(feats);
    }
    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    let y = finalize_labels(y_raw, &zero_rows, &neg_rows)?;
    Dataset::from_rows(&rows, y)
}

/// Loads an SVMLight/LIBSVM text file: `<label> <idx>:<val> ...` with
/// 1-based, strictly increasing indices per line. `p` is the largest index
/// seen anywhere in the file; columns are stored sparse.
pub fn load_svmlight(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);

    let mut y_raw = Vec::new();
    let mut zero_rows = Vec::new();
    let mut neg_rows = Vec::new();
    let mut lines: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut p = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().ok_or(Error::SvmLight {
            line: lineno,
            msg: "missing label".into(),
        })?;
        let row = lines.len() + 1;
        let label = map_label(label_tok, row).map_err(|_| Error::SvmLight {
            line: lineno,
            msg: format!("label '{label_tok}' not in {{-1,+1}} or {{0,1}}"),
        })?;
        if label == 0.0 {
            zero_rows.push(row);
        } else if label == -1.0 {
            neg_rows.push(row);
        }
        y_raw.push(label);

        let mut entries = Vec::new();
        let mut last_idx = 0usize;
        for tok in tokens {
            let (i_str, v_str) = tok.split_once(':').ok_or(Error::SvmLight {
                line: lineno,
                msg: format!("token '{tok}' is not index:value"),
            })?;
            let i: usize = i_str.parse().map_err(|_| Error::SvmLight {
                line: lineno,
                msg: format!("cannot parse index '{i_str}'"),
            })?;
            let v: f64 = v_str.parse().map_err(|_| Error::SvmLight {
                line: lineno,
                msg: format!("cannot parse value '{v_str}'"),
            })?;
            if i == 0 {
                return Err(Error::SvmLight {
                    line: lineno,
                    msg: "indices are 1-based".into(),
                });
            }
            if i <= last_idx {
                return Err(Error::IndicesNotIncreasing { line: lineno });
            }
            last_idx = i;
            p = p.max(i);
            entries.push((i - 1, v));
        }
        lines.push(entries);
    }

    if lines.is_empty() {
        return Err(Error::NoRows);
    }
    if p == 0 {
        return Err(Error::InvalidSpec("no feature indices seen".into()));
    }
    let y = finalize_labels(y_raw, &zero_rows, &neg_rows)?;

    let mut idx_per_col: Vec<Vec<u32>> = vec![Vec::new(); p];
    let mut val_per_col: Vec<Vec<f64>> = vec![Vec::new(); p];
    for (row, entries) in lines.iter().enumerate() {
        for &(j, v) in entries {
            idx_per_col[j].push(row as u32);
            val_per_col[j].push(v);
        }
    }
    let columns = idx_per_col
        .into_iter()
        .zip(val_per_col)
        .map(|(indices, values)| Column::Sparse { indices, values })
        .collect();
    Dataset::new(columns, y)
}

/// Writes a dataset in SVMLight format. Exact zeros are not written, so this
/// is inverse to [`load_svmlight`] only for datasets whose stored entries are
/// all nonzero.
pub fn write_svmlight(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d.n()];
    for j in 0..d.p() {
        d.column(j).for_each_nonzero(|k, x| {
            if x != 0.0 {
                rows[k].push((j, x));
            }
        });
    }
    for (row, y) in rows.iter().zip(d.y()) {
        let mut entries = row.clone();
        entries.sort_by_key(|e| e.0);
        write!(w, "{}", if *y > 0.0 { "+1" } else { "-1" })?;
        for (j, v) in entries {
            write!(w, " {}:{}", j + 1, v)?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Standardize {
    None,
    UnitL2,
    CenterAndUnitL2,
}

/// Returns a standardized copy; the input is untouched. Zero columns are
/// left unchanged. Centering requires dense storage.
pub fn standardize(d: &Dataset, mode: Standardize) -> Result<Dataset> {
    match mode {
        Standardize::None => Ok(d.clone()),
        Standardize::UnitL2 => {
            let columns = (0..d.p())
                .map(|j| {
                    let norm = d.col_sq_norm(j).sqrt();
                    scale_column(d.column(j), norm)
                })
                .collect();
            Dataset::new(columns, d.y().to_vec())
        }
        Standardize::CenterAndUnitL2 => {
            if d.has_sparse_columns() {
                return Err(Error::CenterOnSparse);
            }
            let columns = (0..d.p())
                .map(|j| {
                    let mut v = d.column(j).to_dense(d.n());
                    let mean = v.iter().sum::<f64>() / d.n() as f64;
                    for x in &mut v {
                        *x -= mean;
                    }
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    scale_column(&Column::Dense(v), norm)
                })
                .collect();
            Dataset::new(columns, d.y().to_vec())
        }
    }
}

fn scale_column(col: &Column, norm: f64) -> Column {
    if norm == 0.0 {
        return col.clone();
    }
    match col {
        Column::Dense(v) => Column::Dense(v.iter().map(|x| x / norm).collect()),
        Column::Sparse { indices, values } => Column::Sparse {
            indices: indices.clone(),
            values: values.iter().map(|x| x / norm).collect(),
        },
    }
}

/// Population correlation structure of the synthetic Gaussian design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "kebab-case")]
pub enum Correlation {
    Identity,
    /// `Sigma_ij = rho^|i-j|`, generated by the AR(1) recursion.
    Exponential(f64),
    /// `Sigma_ij = c` off-diagonal, generated by a shared factor.
    Equicorrelated(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResponseModel {
    /// `P(y=1|x) = 1 / (1 + exp(-s <beta, x>))`.
    BernoulliLogistic { s: f64 },
    /// `y = sign(<beta, x> + eps)` with `Var(X beta) / Var(eps) = snr`.
    SignNoise { snr: f64 },
}

/// Specification of a synthetic instance; serializes to/from
/// `{n, p, correlation: {kind, param}, k_dagger, s | snr, response_model}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub correlation: Correlation,
    pub k_dagger: usize,
    pub response_model: ResponseModel,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    n: usize,
    p: usize,
    correlation: Correlation,
    k_dagger: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr: Option<f64>,
    response_model: String,
}

impl TryFrom<SpecRepr> for SyntheticSpec {
    type Error = String;

    fn try_from(r: SpecRepr) -> std::result::Result<Self, String> {
        let response_model = match r.response_model.as_str() {
            "bernoulli-logistic" => ResponseModel::BernoulliLogistic {
                s: r.s.ok_or("bernoulli-logistic requires field 's'")?,
            },
            "sign-noise" => ResponseModel::SignNoise {
                snr: r.snr.ok_or("sign-noise requires field 'snr'")?,
            },
            other => return Err(format!("unknown response_model '{other}'")),
        };
        Ok(SyntheticSpec {
            n: r.n,
            p: r.p,
            correlation: r.correlation,
            k_dagger: r.k_dagger,
            response_model,
        })
    }
}

impl From<SyntheticSpec> for SpecRepr {
    fn from(s: SyntheticSpec) -> SpecRepr {
        let (name, sv, snr) = match s.response_model {
            ResponseModel::BernoulliLogistic { s } => ("bernoulli-logistic", Some(s), None),
            ResponseModel::SignNoise { snr } => ("sign-noise", None, Some(snr)),
        };
        SpecRepr {
            n: s.n,
            p: s.p,
            correlation: s.correlation,
            k_dagger: s.k_dagger,
            s: sv,
            snr,
            response_model: name.to_string(),
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidSpec("n and p must be positive".into()));
        }
        if self.k_dagger == 0 || self.k_dagger > self.p {
            return Err(Error::InvalidSpec(format!(
                "k_dagger must lie in [1, p]; got {}",
                self.k_dagger
            )));
        }
        match self.correlation {
            Correlation::Exponential(rho) => {
                if !(0.0..1.0).contains(&rho) {
                    return Err(Error::InvalidSpec(format!("rho must be in [0,1); got {rho}")));
                }
            }
            Correlation::Equicorrelated(c) => {
                if !(0.0..1.0).contains(&c) {
                    return Err(Error::InvalidSpec(format!("c must be in [0,1); got {c}")));
                }
            }
            Correlation::Identity => {}
        }
        match self.response_model {
            ResponseModel::BernoulliLogistic { s } => {
                if s <= 0.0 {
                    return Err(Error::InvalidSpec(format!("s must be positive; got {s}")));
                }
            }
            ResponseModel::SignNoise { snr } => {
                if snr <= 0.0 {
                    return Err(Error::InvalidSpec(format!("snr must be positive; got {snr}")));
                }
            }
        }
        Ok(())
    }
}

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The planted coefficient vector: ones at `k` equi-spaced indices.
pub fn equispaced_support(p: usize, k: usize) -> Vec<usize> {
    (0..k).map(|l| l * p / k).collect()
}

fn gen_row(correlation: Correlation, p: usize, rng: &mut ChaCha8Rng, row: &mut [f64]) {
    match correlation {
        Correlation::Identity => {
            for x in row.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
        }
        Correlation::Exponential(rho) => {
            let scale = (1.0 - rho * rho).sqrt();
            let mut prev: f64 = rng.sample(StandardNormal);
            row[0] = prev;
            for x in row.iter_mut().skip(1) {
                let eps: f64 = rng.sample(StandardNormal);
                prev = rho * prev + scale * eps;
                *x = prev;
            }
        }
        Correlation::Equicorrelated(c) => {
            let z: f64 = rng.sample(StandardNormal);
            let (a, b) = (c.sqrt(), (1.0 - c).sqrt());
            for x in row.iter_mut() {
                let eps: f64 = rng.sample(StandardNormal);
                *x = a * z + b * eps;
            }
        }
    }
    let _ = p;
}

/// Population variance of `<beta, x>` under the given correlation.
fn margin_variance(correlation: Correlation, beta: &[f64]) -> f64 {
    let nz: Vec<(usize, f64)> = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(i, b)| (i, *b))
        .collect();
    let sq: f64 = nz.iter().map(|(_, b)| b * b).sum();
    match correlation {
        Correlation::Identity => sq,
        Correlation::Exponential(rho) => {
            let mut total = 0.0;
            for &(i, bi) in &nz {
                for &(j, bj) in &nz {
                    total += bi * bj * rho.powi((i as i32 - j as i32).abs());
                }
            }
            total
        }
        Correlation::Equicorrelated(c) => {
            let sum: f64 = nz.iter().map(|(_, b)| *b).sum();
            (1.0 - c) * sq + c * sum * sum
        }
    }
}

fn draw_labels(
    margins: &[f64],
    model: ResponseModel,
    correlation: Correlation,
    beta: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    match model {
        ResponseModel::BernoulliLogistic { s } => margins
            .iter()
            .map(|&m| {
                let prob = 1.0 / (1.0 + (-s * m).exp());
                let u: f64 = rng.random();
                if u < prob {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect(),
        ResponseModel::SignNoise { snr } => {
            let sigma = (margin_variance(correlation, beta) / snr).sqrt();
            margins
                .iter()
                .map(|&m| {
                    let eps: f64 = rng.sample(StandardNormal);
                    if m + sigma * eps >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect()
        }
    }
}

/// Generates a synthetic instance. Returns the dataset and the planted
/// coefficient vector `beta_dagger` (length `p`, ones at equi-spaced
/// indices). Pure function of `(spec, seed)`.
pub fn gen_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<(Dataset, Vec<f64>)> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);

    let mut beta = vec![0.0; p];
    for i in equispaced_support(p, spec.k_dagger) {
        beta[i] = 1.0;
    }

    let mut rng_x = rng_stream(seed, 0);
    let mut cols = vec![vec![0.0; n]; p];
    let mut row = vec![0.0; p];
    let mut margins = vec![0.0; n];
    for i in 0..n {
        gen_row(spec.correlation, p, &mut rng_x, &mut row);
        let mut m = 0.0;
        for (j, &x) in row.iter().enumerate() {
            cols[j][i] = x;
            if beta[j] != 0.0 {
                m += beta[j] * x;
            }
        }
        margins[i] = m;
    }

    let mut rng_y = rng_stream(seed, 1);
    let y = draw_labels(&margins, spec.response_model, spec.correlation, &beta, &mut rng_y);

    let columns = cols.into_iter().map(Column::Dense).collect();
    Ok((Dataset::new(columns, y)?, beta))
}

/// Draws a fresh outcome vector on the same feature matrix (fixed design),
/// independent of the training labels. Deterministic given `seed`.
pub fn gen_validation_response(
    d: &Dataset,
    beta_dagger: &[f64],
    spec: &SyntheticSpec,
    seed: u64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if beta_dagger.len() != d.p() {
        return Err(Error::LengthMismatch {
            expected: d.p(),
            got: beta_dagger.len(),
        });
    }
    let margins = d.scores_dense(beta_dagger);
    let mut rng = rng_stream(seed, 2);
    Ok(draw_labels(
        &margins,
        spec.response_model,
        spec.correlation,
        beta_dagger,
        &mut rng,
    ))
}
