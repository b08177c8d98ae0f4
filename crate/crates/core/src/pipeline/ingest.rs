use super::PipelineError;
use crate::ppca::CompositionMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

/// Reference level used for `MINE_TYPE` when none is declared.
pub const DEFAULT_MINE_TYPE_REFERENCE: &str = "Sand and Gravel";

/// Rows whose composition block misses 100 by more than this are rejected.
pub const COMPOSITION_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalColumn {
    pub name: String,
    /// Omitted level. Defaults to "Sand and Gravel" for `MINE_TYPE` and to
    /// the alphabetically first level otherwise.
    #[serde(default)]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    Log,
    Log1p,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericColumn {
    pub name: String,
    #[serde(default)]
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub response_col: String,
    #[serde(default)]
    pub exposure_col: Option<String>,
    #[serde(default)]
    pub categorical_cols: Vec<CategoricalColumn>,
    #[serde(default)]
    pub numeric_cols: Vec<NumericColumn>,
    #[serde(default)]
    pub composition_cols: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestWarning {
    pub row: usize,
    pub message: String,
}

/// Encoded covariates (no intercept), response, offsets and the raw
/// composition block.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedData {
    pub y: Vec<u64>,
    pub covariates: DMatrix<f64>,
    pub covariate_names: Vec<String>,
    /// `ln(exposure)` per row when an exposure column is declared.
    pub offset: Option<Vec<f64>>,
    /// Percentages, rows renormalized to 100.
    pub composition: Option<CompositionMatrix>,
    pub composition_names: Vec<String>,
    pub warnings: Vec<IngestWarning>,
}

impl IngestedData {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

pub fn ingest(path: &Path, schema: &DatasetSchema) -> Result<IngestedData, PipelineError> {
    let file = File::open(path).map_err(|e| {
        PipelineError::schema(None, format!("cannot open {}: {e}", path.display()))
    })?;
    ingest_reader(file, schema)
}

fn parse_f64(raw: &str, row: usize, col: &str) -> Result<f64, PipelineError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| PipelineError::schema(Some(row), format!("{col}: '{raw}' is not a number")))
}

fn parse_count(raw: &str, row: usize, col: &str) -> Result<u64, PipelineError> {
    let t = raw.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v = parse_f64(t, row, col)?;
    if v < 0.0 {
        return Err(PipelineError::schema(Some(row), format!("{col}: negative count {v}")));
    }
    if v.fract() != 0.0 {
        return Err(PipelineError::schema(Some(row), format!("{col}: non-integer count {v}")));
    }
    Ok(v as u64)
}

/// Reads a headed CSV and encodes it per `schema`. Row numbers in errors
/// and warnings count data rows from 1.
pub fn ingest_reader<R: Read>(reader: R, schema: &DatasetSchema) -> Result<IngestedData, PipelineError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
    let col = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| PipelineError::schema(None, format!("missing column '{name}'")))
    };
    let response = col(&schema.response_col)?;
    let exposure = schema.exposure_col.as_deref().map(col).transpose()?;
    let categorical: Vec<usize> = schema.categorical_cols.iter().map(|c| col(&c.name)).collect::<Result<_, _>>()?;
    let numeric: Vec<usize> = schema.numeric_cols.iter().map(|c| col(&c.name)).collect::<Result<_, _>>()?;
    let composition: Vec<usize> = schema.composition_cols.iter().map(|c| col(c)).collect::<Result<_, _>>()?;

    let mut y = Vec::new();
    let mut offset = Vec::new();
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); categorical.len()];
    let mut numbers: Vec<Vec<f64>> = Vec::new();
    let mut comp_rows: Vec<Vec<f64>> = Vec::new();
    let mut warnings = Vec::new();

    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = |j: usize| record.get(j).unwrap_or("");
        y.push(parse_count(field(response), row, &schema.response_col)?);
        if let (Some(j), Some(name)) = (exposure, &schema.exposure_col) {
            let e = parse_f64(field(j), row, name)?;
            if e <= 0.0 {
                return Err(PipelineError::schema(Some(row), format!("{name}: nonpositive exposure {e}")));
            }
            offset.push(e.ln());
        }
        for (k, &j) in categorical.iter().enumerate() {
            levels[k].push(field(j).trim().to_string());
        }
        let mut nums = Vec::with_capacity(numeric.len());
        for (spec, &j) in schema.numeric_cols.iter().zip(&numeric) {
            let v = parse_f64(field(j), row, &spec.name)?;
            let t = match spec.transform {
                Transform::None => v,
                Transform::Log if v > 0.0 => v.ln(),
                Transform::Log1p if v > -1.0 => v.ln_1p(),
                _ => {
                    return Err(PipelineError::schema(
                        Some(row),
                        format!("{}: {v} outside the domain of its transform", spec.name),
                    ))
                }
            };
            nums.push(t);
        }
        numbers.push(nums);
        if !composition.is_empty() {
            let mut parts = Vec::with_capacity(composition.len());
            for (name, &j) in schema.composition_cols.iter().zip(&composition) {
                let v = parse_f64(field(j), row, name)?;
                if v < 0.0 {
                    return Err(PipelineError::schema(Some(row), format!("{name}: negative share {v}")));
                }
                parts.push(v);
            }
            let sum: f64 = parts.iter().sum();
            let miss = (sum - 100.0).abs();
            if miss > COMPOSITION_TOLERANCE {
                return Err(PipelineError::schema(
                    Some(row),
                    format!("composition sums to {sum}, more than {COMPOSITION_TOLERANCE} from 100"),
                ));
            }
            if miss > 1e-6 {
                warnings.push(IngestWarning {
                    row,
                    message: format!("composition sums to {sum}; renormalized to 100"),
                });
                parts.iter_mut().for_each(|v| *v *= 100.0 / sum);
            }
            comp_rows.push(parts);
        }
    }
    let m = y.len();
    if m == 0 {
        return Err(PipelineError::schema(None, "no data rows"));
    }

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    for (spec, values) in schema.categorical_cols.iter().zip(&levels) {
        let distinct: BTreeSet<&str> = values.iter().map(String::as_str).collect();
        let reference = match &spec.reference {
            Some(r) => r.clone(),
            None if spec.name == "MINE_TYPE" => DEFAULT_MINE_TYPE_REFERENCE.to_string(),
            None => distinct.iter().next().map(|s| s.to_string()).unwrap_or_default(),
        };
        if !distinct.contains(reference.as_str()) {
            return Err(PipelineError::schema(
                None,
                format!("{}: reference level '{reference}' does not occur", spec.name),
            ));
        }
        for level in distinct.iter().filter(|l| **l != reference) {
            names.push(format!("{}_{}", spec.name, level));
            columns.push(values.iter().map(|v| f64::from(u8::from(v == level))).collect());
        }
    }
    for (k, spec) in schema.numeric_cols.iter().enumerate() {
        names.push(spec.name.clone());
        columns.push(numbers.iter().map(|r| r[k]).collect());
    }
    let flat: Vec<f64> = columns.concat();
    let covariates = DMatrix::from_column_slice(m, columns.len(), &flat);

    let composition = if comp_rows.is_empty() {
        None
    } else {
        Some(CompositionMatrix::from_rows(&comp_rows).map_err(|e| PipelineError::schema(None, e.to_string()))?)
    };
    for w in &warnings {
        log::warn!("row {}: {}", w.row, w.message);
    }
    Ok(IngestedData {
        y,
        covariates,
        covariate_names: names,
        offset: exposure.map(|_| offset),
        composition,
        composition_names: schema.composition_cols.clone(),
        warnings,
    })
}
