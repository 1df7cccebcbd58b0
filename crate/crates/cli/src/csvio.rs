//! CSV files for traces, sweeps, cooling curves and calibration data.
//!
//! Every file starts with a block of `# key: value` lines. `schema_version`,
//! `kind` and `units` are mandatory; `units` lists `column=unit` for every
//! column. Then comes the column-name row and the data. Numbers are written
//! in the shortest form that reads back to the same `f64`, and the reader
//! accepts only plain decimal or exponent notation.

use optomech::{CoolingResult, SweepMode, SweepResult};
use optomech::{hertz, PsdUnit, SpectrumTrace, SweepPoint};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unit mismatch in column `{column}`: expected {expected}, found {found}")]
    Unit {
        column: String,
        expected: String,
        found: String,
    },
    #[error("{0}")]
    Schema(String),
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// A parsed file before interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub kind: String,
    /// `(column, unit)` in file order.
    pub columns: Vec<(String, String)>,
    /// Header entries other than the three mandatory ones.
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// 1-based line in the file.
    pub line: usize,
    pub fields: Vec<String>,
}

impl Document {
    pub fn new(kind: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            kind: kind.to_string(),
            columns: columns.iter().map(|(c, u)| (c.to_string(), u.to_string())).collect(),
            meta: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        let v = value.to_string().replace(['\n', '\r'], " ");
        self.meta.push((key.to_string(), v));
        self
    }

    pub fn push(&mut self, fields: Vec<String>) {
        self.rows.push(Row { line: 0, fields });
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str, CsvError> {
        self.get(key)
            .ok_or_else(|| CsvError::Schema(format!("header entry `{key}` is missing")))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema_version: {SCHEMA_VERSION}\n# kind: {}\n", self.kind));
        let units: Vec<String> = self.columns.iter().map(|(c, u)| format!("{c}={u}")).collect();
        out.push_str(&format!("# units: {}\n", units.join(", ")));
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|(c, _)| c)).expect("in-memory write");
        for r in &self.rows {
            w.write_record(&r.fields).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields"));
        out
    }

    pub fn parse(text: &str) -> Result<Self, CsvError> {
        let mut header = Vec::new();
        let mut body_start = 0;
        let mut header_lines = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix('#') else {
                break;
            };
            header_lines += 1;
            body_start += line.len();
            let rest = rest.trim();
            let Some((k, v)) = rest.split_once(':') else {
                return Err(CsvError::Format {
                    line: header_lines,
                    message: format!("header line is not `key: value`: {rest}"),
                });
            };
            header.push((k.trim().to_string(), v.trim().to_string()));
        }
        let take = |key: &str| {
            header
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| CsvError::Schema(format!("header entry `{key}` is missing")))
        };
        let version = take("schema_version")?;
        if version != SCHEMA_VERSION.to_string() {
            return Err(CsvError::Schema(format!(
                "unsupported schema_version {version}, expected {SCHEMA_VERSION}"
            )));
        }
        let kind = take("kind")?;
        let units_line = take("units")?;
        let mut columns = Vec::new();
        for item in units_line.split(',') {
            let Some((c, u)) = item.split_once('=') else {
                return Err(CsvError::Schema(format!("malformed units entry `{}`", item.trim())));
            };
            columns.push((c.trim().to_string(), u.trim().to_string()));
        }
        let meta = header
            .into_iter()
            .filter(|(k, _)| !matches!(k.as_str(), "schema_version" | "kind" | "units"))
            .collect();

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(&text.as_bytes()[body_start..]);
        let mut records = reader.records();
        let names = match records.next() {
            Some(r) => r.map_err(|e| csv_error(e, header_lines))?,
            None => return Err(CsvError::Schema("column-name row is missing".into())),
        };
        let names: Vec<&str> = names.iter().map(str::trim).collect();
        let declared: Vec<&str> = columns.iter().map(|(c, _)| c.as_str()).collect();
        if names != declared {
            return Err(CsvError::Format {
                line: header_lines + 1,
                message: format!("columns {names:?} do not match the units line {declared:?}"),
            });
        }
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| csv_error(e, header_lines))?;
            let line = header_lines + rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != columns.len() {
                return Err(CsvError::Format {
                    line,
                    message: format!("expected {} fields, found {}", columns.len(), rec.len()),
                });
            }
            rows.push(Row {
                line,
                fields: rec.iter().map(|f| f.trim().to_string()).collect(),
            });
        }
        Ok(Self {
            kind,
            columns,
            meta,
            rows,
        })
    }

    /// Checks the kind and that the columns and units are exactly `expected`.
    pub fn expect(&self, kind: &str, expected: &[(&str, &str)]) -> Result<(), CsvError> {
        if self.kind != kind {
            return Err(CsvError::Schema(format!("expected a `{kind}` file, found `{}`", self.kind)));
        }
        for (name, unit) in expected {
            match self.columns.iter().find(|(c, _)| c == name) {
                None => return Err(CsvError::Schema(format!("column `{name}` is missing"))),
                Some((_, u)) if u != unit => {
                    return Err(CsvError::Unit {
                        column: name.to_string(),
                        expected: unit.to_string(),
                        found: u.clone(),
                    })
                }
                _ => {}
            }
        }
        if self.columns.len() != expected.len() {
            return Err(CsvError::Schema(format!(
                "expected {} columns, found {}",
                expected.len(),
                self.columns.len()
            )));
        }
        Ok(())
    }
}

fn csv_error(e: csv::Error, offset: usize) -> CsvError {
    let line = e.position().map_or(0, |p| p.line() as usize) + offset;
    CsvError::Format {
        line,
        message: e.to_string(),
    }
}

/// Shortest decimal that reads back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

/// Plain decimal or exponent notation; no locale separators, no `inf`/`nan`.
pub fn is_plain_number(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

struct Cells<'a> {
    doc: &'a Document,
    row: &'a Row,
}

impl Cells<'_> {
    fn raw(&self, column: &str) -> &str {
        let idx = self.doc.columns.iter().position(|(c, _)| c == column).expect("column checked");
        &self.row.fields[idx]
    }

    fn err(&self, column: &str, message: String) -> CsvError {
        CsvError::Format {
            line: self.row.line,
            message: format!("column `{column}`: {message}"),
        }
    }

    fn f64(&self, column: &str) -> Result<f64, CsvError> {
        let s = self.raw(column);
        if !is_plain_number(s) {
            return Err(self.err(column, format!("`{s}` is not a number")));
        }
        s.parse().map_err(|_| self.err(column, format!("`{s}` is not a number")))
    }

    fn opt_f64(&self, column: &str) -> Result<Option<f64>, CsvError> {
        if self.raw(column).is_empty() {
            Ok(None)
        } else {
            self.f64(column).map(Some)
        }
    }

    fn bool(&self, column: &str) -> Result<bool, CsvError> {
        match self.raw(column) {
            "true" => Ok(true),
            "false" => Ok(false),
            s => Err(self.err(column, format!("`{s}` is not true/false"))),
        }
    }
}

fn meta_f64(doc: &Document, key: &str) -> Result<f64, CsvError> {
    let s = doc.require(key)?;
    if !is_plain_number(s) {
        return Err(CsvError::Schema(format!("header `{key}`: `{s}` is not a number")));
    }
    s.parse().map_err(|_| CsvError::Schema(format!("header `{key}`: `{s}` is not a number")))
}

fn cells(doc: &Document) -> impl Iterator<Item = Cells<'_>> {
    doc.rows.iter().map(move |row| Cells { doc, row })
}

// ---- spectra -------------------------------------------------------------

pub const TRACE_KIND: &str = "spectrum";

fn trace_columns(unit: PsdUnit) -> [(&'static str, &'static str); 2] {
    [("freq", "Hz"), ("psd", unit.symbol())]
}

pub fn trace_document(trace: &SpectrumTrace) -> Document {
    let mut doc = Document::new(TRACE_KIND, &trace_columns(trace.unit()))
        .meta("n_avg", trace.n_avg())
        .meta("seed", trace.seed().map_or_else(|| "none".to_string(), |s| s.to_string()))
        .meta("provenance", &trace.provenance);
    for (f, s) in trace.freq_hz().iter().zip(trace.psd()) {
        doc.push(vec![num(*f), num(*s)]);
    }
    doc
}

/// Reads a trace; with `expected` set, a trace in another PSD unit is a
/// unit error.
pub fn read_trace(text: &str, expected: Option<PsdUnit>) -> Result<SpectrumTrace, CsvError> {
    let doc = Document::parse(text)?;
    let found = doc
        .columns
        .iter()
        .find(|(c, _)| c == "psd")
        .map(|(_, u)| u.clone())
        .ok_or_else(|| CsvError::Schema("column `psd` is missing".into()))?;
    let unit = match expected {
        Some(u) => u,
        None => PsdUnit::from_symbol(&found).ok_or_else(|| CsvError::Unit {
            column: "psd".into(),
            expected: format!("{} or {}", PsdUnit::Displacement.symbol(), PsdUnit::CavityFrequency.symbol()),
            found: found.clone(),
        })?,
    };
    doc.expect(TRACE_KIND, &trace_columns(unit))?;
    let n_avg: usize = doc
        .require("n_avg")?
        .parse()
        .map_err(|_| CsvError::Schema("header `n_avg` is not a positive integer".into()))?;
    let seed = match doc.get("seed").unwrap_or("none") {
        "none" => None,
        s => Some(s.parse().map_err(|_| CsvError::Schema(format!("header `seed`: `{s}` is not an integer")))?),
    };
    let mut f = Vec::with_capacity(doc.rows.len());
    let mut s = Vec::with_capacity(doc.rows.len());
    for c in cells(&doc) {
        f.push(c.f64("freq")?);
        s.push(c.f64("psd")?);
    }
    let trace = SpectrumTrace::new(f, s, unit, n_avg).map_err(|e| CsvError::Schema(e.to_string()))?;
    Ok(trace
        .with_seed(seed)
        .with_provenance(doc.get("provenance").unwrap_or_default()))
}

// ---- detuning sweeps -----------------------------------------------------

pub const SWEEP_KIND: &str = "sweep";

const SWEEP_COLUMNS: [(&str, &str); 9] = [
    ("detuning", "Hz"),
    ("photons", "1"),
    ("Gamma", "Hz"),
    ("Omega", "Hz"),
    ("gamma_m", "Hz"),
    ("T_m", "K"),
    ("occupancy", "1"),
    ("regenerative", "bool"),
    ("multistable", "bool"),
];

/// A detuning sweep as stored on disk: ordinary frequencies in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub mode: SweepMode,
    /// W.
    pub power: f64,
    /// Hz per photon.
    pub kerr: f64,
    pub rows: Vec<SweepTableRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTableRow {
    pub detuning: f64,
    pub photons: f64,
    pub gamma: f64,
    pub omega: f64,
    pub gamma_m: f64,
    pub t_m: Option<f64>,
    pub occupancy: Option<f64>,
    pub regenerative: bool,
    pub multistable: bool,
}

fn mode_name(m: SweepMode) -> &'static str {
    match m {
        SweepMode::ConstCirculating => "const_circulating",
        SweepMode::ConstIncident => "const_incident",
    }
}

impl SweepTable {
    pub fn from_result(r: &SweepResult) -> Self {
        Self {
            mode: r.mode,
            power: r.power,
            kerr: hertz(r.kerr),
            rows: r
                .rows
                .iter()
                .map(|x| SweepTableRow {
                    detuning: hertz(x.detuning),
                    photons: x.photons,
                    gamma: hertz(x.gamma),
                    omega: hertz(x.omega),
                    gamma_m: hertz(x.gamma_m),
                    t_m: x.t_m,
                    occupancy: x.occupancy,
                    regenerative: x.regenerative,
                    multistable: x.multistable,
                })
                .collect(),
        }
    }

    /// Fit input in angular units.
    pub fn points(&self) -> Vec<SweepPoint> {
        self.rows
            .iter()
            .map(|r| SweepPoint {
                detuning: optomech::angular(r.detuning),
                gamma_m: optomech::angular(r.gamma_m),
                freq_shift: optomech::angular(r.omega),
            })
            .collect()
    }

    pub fn document(&self) -> Document {
        let mut doc = Document::new(SWEEP_KIND, &SWEEP_COLUMNS)
            .meta("mode", mode_name(self.mode))
            .meta("power_W", num(self.power))
            .meta("kerr_Hz_per_photon", num(self.kerr));
        for r in &self.rows {
            doc.push(vec![
                num(r.detuning),
                num(r.photons),
                num(r.gamma),
                num(r.omega),
                num(r.gamma_m),
                opt_num(r.t_m),
                opt_num(r.occupancy),
                r.regenerative.to_string(),
                r.multistable.to_string(),
            ]);
        }
        doc
    }

    pub fn from_document(doc: &Document) -> Result<Self, CsvError> {
        doc.expect(SWEEP_KIND, &SWEEP_COLUMNS)?;
        let mode = match doc.require("mode")? {
            "const_circulating" => SweepMode::ConstCirculating,
            "const_incident" => SweepMode::ConstIncident,
            m => return Err(CsvError::Schema(format!("unknown sweep mode `{m}`"))),
        };
        let rows = cells(doc)
            .map(|c| {
                Ok(SweepTableRow {
                    detuning: c.f64("detuning")?,
                    photons: c.f64("photons")?,
                    gamma: c.f64("Gamma")?,
                    omega: c.f64("Omega")?,
                    gamma_m: c.f64("gamma_m")?,
                    t_m: c.opt_f64("T_m")?,
                    occupancy: c.opt_f64("occupancy")?,
                    regenerative: c.bool("regenerative")?,
                    multistable: c.bool("multistable")?,
                })
            })
            .collect::<Result<Vec<_>, CsvError>>()?;
        Ok(Self {
            mode,
            power: meta_f64(doc, "power_W")?,
            kerr: meta_f64(doc, "kerr_Hz_per_photon")?,
            rows,
        })
    }
}

// ---- cooling curves ------------------------------------------------------

pub const COOLING_KIND: &str = "cooling";

const COOLING_COLUMNS: [(&str, &str); 9] = [
    ("P_c", "W"),
    ("detuning", "Hz"),
    ("Gamma", "Hz"),
    ("gamma_m", "Hz"),
    ("gamma_m0", "Hz"),
    ("T_0", "K"),
    ("T_m", "K"),
    ("occupancy", "1"),
    ("floor", "m^2/Hz"),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingTableRow {
    pub p_c: f64,
    pub detuning: f64,
    pub gamma: f64,
    pub gamma_m: f64,
    pub gamma_m0: f64,
    pub t0: f64,
    pub t_m: f64,
    pub occupancy: f64,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingTable {
    pub rows: Vec<CoolingTableRow>,
}

impl CoolingTable {
    pub fn from_result(r: &CoolingResult) -> Self {
        Self {
            rows: r
                .rows
                .iter()
                .map(|x| CoolingTableRow {
                    p_c: x.p_c,
                    detuning: hertz(x.detuning),
                    gamma: hertz(x.gamma),
                    gamma_m: hertz(x.gamma_m),
                    gamma_m0: hertz(x.gamma_m0),
                    t0: x.t0,
                    t_m: x.t_m,
                    occupancy: x.occupancy,
                    floor: x.floor,
                })
                .collect(),
        }
    }

    pub fn document(&self) -> Document {
        let mut doc = Document::new(COOLING_KIND, &COOLING_COLUMNS);
        for r in &self.rows {
            doc.push(
                [r.p_c, r.detuning, r.gamma, r.gamma_m, r.gamma_m0, r.t0, r.t_m, r.occupancy, r.floor]
                    .iter()
                    .map(|v| num(*v))
                    .collect(),
            );
        }
        doc
    }

    pub fn from_document(doc: &Document) -> Result<Self, CsvError> {
        doc.expect(COOLING_KIND, &COOLING_COLUMNS)?;
        let rows = cells(doc)
            .map(|c| {
                Ok(CoolingTableRow {
                    p_c: c.f64("P_c")?,
                    detuning: c.f64("detuning")?,
                    gamma: c.f64("Gamma")?,
                    gamma_m: c.f64("gamma_m")?,
                    gamma_m0: c.f64("gamma_m0")?,
                    t0: c.f64("T_0")?,
                    t_m: c.f64("T_m")?,
                    occupancy: c.f64("occupancy")?,
                    floor: c.f64("floor")?,
                })
            })
            .collect::<Result<Vec<_>, CsvError>>()?;
        Ok(Self { rows })
    }
}

// ---- coupling calibration ------------------------------------------------

pub const CALIBRATION_KIND: &str = "calibration";

const CALIBRATION_COLUMNS: [(&str, &str); 3] = [("T", "K"), ("mean_square_freq", "Hz^2"), ("sigma", "Hz^2")];

pub fn calibration_document(points: &[optomech::CalibrationPoint]) -> Document {
    let mut doc = Document::new(CALIBRATION_KIND, &CALIBRATION_COLUMNS);
    for p in points {
        doc.push(vec![num(p.temperature), num(p.mean_square_freq), opt_num(p.sigma)]);
    }
    doc
}

pub fn read_calibration(doc: &Document) -> Result<Vec<optomech::CalibrationPoint>, CsvError> {
    doc.expect(CALIBRATION_KIND, &CALIBRATION_COLUMNS)?;
    cells(doc)
        .map(|c| {
            Ok(optomech::CalibrationPoint {
                temperature: c.f64("T")?,
                mean_square_freq: c.f64("mean_square_freq")?,
                sigma: c.opt_f64("sigma")?,
            })
        })
        .collect()
}
