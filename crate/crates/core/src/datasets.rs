//! Embedded measurement table, curve CSV ingestion and JSON report output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::quantities::{
    ConcentrationWtPct, FieldVPerUm, GainDb, LengthM, PowerMw, TemperatureC, TransmittanceRatio,
    WavelengthNm,
};
use crate::ris_device::{CurveAxis, DeviceGeometry, LcMixture, RisDevice, TransmittanceCurve};
use crate::tuning::Table1Row;

/// Incident power the embedded table was computed for.
pub const TABLE_INPUT_POWER_MW: f64 = 6.0;

/// Embedded dataset identifiers, in table order.
pub const EMBEDDED_IDS: [&str; 4] = ["3t2mb-4", "3t2mb-8", "3t2mb-4-tnf", "3t2mb-8-tnf"];

const TABLE_FIELDS: [f64; 12] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2];

struct Block {
    id: &'static str,
    host_wt_pct: f64,
    tnf: bool,
    emerged_mw: [f64; 12],
    gain_db: [f64; 12],
    range_m: [f64; 12],
}

// 4/8 wt% 3T-2MB with and without TNF, 30 °C, 10 µm cell, 6 mW in.
// Values are verbatim, including the gain row that disagrees with P_e.
const TABLE1: [Block; 4] = [
    Block {
        id: "3t2mb-4",
        host_wt_pct: 4.0,
        tnf: false,
        emerged_mw: [
            6.0012, 6.0027, 6.0033, 6.0037, 6.0040, 6.0040, 6.0040, 6.0040, 6.0038, 6.0038, 6.0037,
            6.0036,
        ],
        gain_db: [
            0.0009, 0.0015, 0.0018, 0.0020, 0.0018, 0.0017, 0.0017, 0.0014, 0.0013, 0.0013, 0.0013,
            0.0012,
        ],
        range_m: [
            0.20, 0.45, 0.56, 0.63, 0.67, 0.68, 0.68, 0.67, 0.65, 0.64, 0.63, 0.61,
        ],
    },
    Block {
        id: "3t2mb-8",
        host_wt_pct: 8.0,
        tnf: false,
        // printed with an "nW" header; the values are mW
        emerged_mw: [
            6.0012, 6.0033, 6.0048, 6.0056, 6.0062, 6.0064, 6.0064, 6.0063, 6.0061, 6.0056, 6.0056,
            6.0054,
        ],
        gain_db: [
            0.0009, 0.0020, 0.0024, 0.0027, 0.0029, 0.0029, 0.0029, 0.0029, 0.0028, 0.0027, 0.0027,
            0.0026,
        ],
        // "1,04" in print
        range_m: [
            0.20, 0.55, 0.81, 0.94, 1.04, 1.08, 1.07, 1.06, 1.03, 0.94, 0.94, 0.91,
        ],
    },
    Block {
        id: "3t2mb-4-tnf",
        host_wt_pct: 4.0,
        tnf: true,
        emerged_mw: [
            6.0006, 6.0030, 6.0045, 6.0072, 6.0105, 6.0150, 6.0180, 6.0204, 6.0240, 6.0240, 6.0265,
            6.0271,
        ],
        gain_db: [
            0.0004, 0.0022, 0.0026, 0.0033, 0.0039, 0.0065, 0.0078, 0.0083, 0.0087, 0.0087, 0.0091,
            0.0087,
        ],
        range_m: [
            0.10, 0.51, 0.76, 1.21, 1.77, 2.53, 3.03, 3.43, 4.04, 4.04, 4.44, 4.54,
        ],
    },
    Block {
        id: "3t2mb-8-tnf",
        host_wt_pct: 8.0,
        tnf: true,
        emerged_mw: [
            6.0006, 6.0045, 6.0105, 6.0150, 6.0174, 6.0240, 6.0271, 6.0319, 6.0367, 6.0367, 6.0373,
            6.0391,
        ],
        gain_db: [
            0.0004, 0.0022, 0.0033, 0.0052, 0.0076, 0.0109, 0.0130, 0.0148, 0.0174, 0.0174, 0.0191,
            0.0195,
        ],
        range_m: [
            0.10, 0.76, 1.77, 2.53, 2.93, 4.04, 4.54, 5.35, 6.16, 6.16, 6.26, 6.56,
        ],
    },
];

/// All 48 rows of the embedded table, block by block, in increasing field.
pub fn embedded_table1() -> Vec<Table1Row> {
    TABLE1
        .iter()
        .flat_map(|b| {
            (0..12).map(move |i| Table1Row {
                mixture: b.id.to_string(),
                e0: FieldVPerUm::new(TABLE_FIELDS[i]).unwrap(),
                p_e: PowerMw::new(b.emerged_mw[i]).unwrap(),
                listed_gain: GainDb::new(b.gain_db[i]).unwrap(),
                listed_range: LengthM::new(b.range_m[i]).unwrap(),
            })
        })
        .collect()
}

fn block(id: &str) -> Option<&'static Block> {
    TABLE1.iter().find(|b| b.id == id)
}

/// Field-axis curve with knots at the tabulated fields and `T = P_e / 6 mW`.
pub fn embedded_curve(id: &str) -> Result<TransmittanceCurve> {
    let b = block(id).ok_or_else(|| Error::UnknownDevice(id.to_string()))?;
    let points: Vec<_> = TABLE_FIELDS
        .iter()
        .zip(b.emerged_mw)
        .map(|(&e0, p)| {
            (
                e0,
                TransmittanceRatio::new(p / TABLE_INPUT_POWER_MW).unwrap(),
            )
        })
        .collect();
    TransmittanceCurve::new(CurveAxis::Field, &points, format!("embedded:{id}"))
}

fn default_mixture(host_wt_pct: f64, tnf: bool) -> LcMixture {
    let sensitizer = tnf.then(|| ("TNF".to_string(), ConcentrationWtPct::new(0.01).unwrap()));
    let mixture = LcMixture::new(
        "3T-2MB",
        ConcentrationWtPct::new(host_wt_pct).unwrap(),
        sensitizer,
        TemperatureC::new(30.0).unwrap(),
        WavelengthNm::new(450.0).unwrap(),
    )
    .unwrap();
    if tnf {
        mixture.with_note(
            "TNF concentration is labelled 0.01 wt% in the table and 0.1 wt% in the body text",
        )
    } else {
        mixture
    }
}

/// One of the four embedded devices, 10 µm thick with default geometry.
pub fn embedded_device(id: &str) -> Result<RisDevice> {
    let b = block(id).ok_or_else(|| Error::UnknownDevice(id.to_string()))?;
    RisDevice::new(
        b.id,
        default_mixture(b.host_wt_pct, b.tnf),
        DeviceGeometry::default(),
        embedded_curve(id)?,
    )
}

/// Resolve an embedded id, or else load a field curve CSV with default geometry.
pub fn resolve_device(spec: &str) -> Result<RisDevice> {
    if block(spec).is_some() {
        return embedded_device(spec);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::UnknownDevice(spec.to_string()));
    }
    let curve = load_curve_csv(path, CurveAxis::Field)?;
    let mixture = LcMixture::new(
        "custom",
        ConcentrationWtPct::ZERO,
        None,
        TemperatureC::new(30.0)?,
        WavelengthNm::new(450.0)?,
    )?;
    RisDevice::new(spec, mixture, DeviceGeometry::default(), curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DependentColumn {
    Ratio,
    Percent,
}

const DEPENDENT_HEADERS: [&str; 2] = ["transmittance_ratio", "transmittance_percent"];

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load a two-column transmittance curve.
///
/// The header must name `expected` as the independent variable and either
/// `transmittance_ratio` or `transmittance_percent`; percent values are
/// divided by 100. Lines starting with `#` are skipped.
pub fn load_curve_csv(path: &Path, expected: CurveAxis) -> Result<TransmittanceCurve> {
    let text = read_file(path)?;
    parse_curve_csv(&text, path, expected)
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn row_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Row {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn parse_curve_csv(text: &str, path: &Path, expected: CurveAxis) -> Result<TransmittanceCurve> {
    let mut reader = csv_reader(text);
    let expected_msg = format!(
        "expected header '{},{}' or '{},{}'",
        expected.header(),
        DEPENDENT_HEADERS[0],
        expected.header(),
        DEPENDENT_HEADERS[1]
    );
    let headers = reader
        .headers()
        .map_err(|e| format_err(path, format!("{e}; {expected_msg}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != expected.header() {
        return Err(format_err(
            path,
            format!(
                "unrecognised header '{}'; {expected_msg}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let dependent = match &headers[1] {
        "transmittance_ratio" => DependentColumn::Ratio,
        "transmittance_percent" => DependentColumn::Percent,
        other => {
            return Err(format_err(
                path,
                format!("unrecognised column '{other}'; {expected_msg}"),
            ))
        }
    };

    let mut points: Vec<(f64, TransmittanceRatio)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| row_err(path, row, e.to_string()))?;
        if record.len() != 2 {
            return Err(row_err(
                path,
                row,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let parse = |i: usize| -> Result<f64> {
            let v: f64 = record[i]
                .parse()
                .map_err(|_| row_err(path, row, format!("'{}' is not a number", &record[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(row_err(
                    path,
                    row,
                    format!("'{}' is not finite", &record[i]),
                ))
            }
        };
        let x = parse(0)?;
        let raw = parse(1)?;
        if let Some(&(prev, _)) = points.last() {
            if x <= prev {
                return Err(row_err(
                    path,
                    row,
                    format!(
                        "{} = {x} does not increase (previous {prev})",
                        expected.header()
                    ),
                ));
            }
        }
        if raw <= 0.0 {
            return Err(row_err(
                path,
                row,
                format!("transmittance {raw} must be positive"),
            ));
        }
        let ratio = match dependent {
            DependentColumn::Ratio => TransmittanceRatio::new(raw),
            DependentColumn::Percent => TransmittanceRatio::from_percent(raw),
        }
        .map_err(|e| row_err(path, row, e.to_string()))?;
        points.push((x, ratio));
    }
    if points.is_empty() {
        return Err(format_err(path, "no data rows"));
    }
    TransmittanceCurve::new(expected, &points, path.display().to_string())
}

/// Curve as CSV text in ratio form. Loading it back gives identical knots.
pub fn curve_to_csv(curve: &TransmittanceCurve) -> String {
    let mut out = format!("{},transmittance_ratio\n", curve.axis().header());
    for (x, t) in curve.points() {
        out.push_str(&format!("{x},{}\n", t.value()));
    }
    out
}

pub fn write_curve_csv(curve: &TransmittanceCurve, path: &Path) -> Result<()> {
    write_atomic(path, curve_to_csv(curve).as_bytes())
}

const ROW_HEADERS: [&str; 5] = ["mixture", "e0_v_per_um", "pe_mw", "gain_db", "range_m"];

/// Rows in `mixture,e0_v_per_um,pe_mw,gain_db,range_m` form.
pub fn load_table_rows_csv(path: &Path) -> Result<Vec<Table1Row>> {
    let text = read_file(path)?;
    let mut reader = csv_reader(&text);
    let headers = reader
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .clone();
    if headers.iter().ne(ROW_HEADERS) {
        return Err(format_err(
            path,
            format!("expected header '{}'", ROW_HEADERS.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| row_err(path, row, e.to_string()))?;
        if record.len() != ROW_HEADERS.len() {
            return Err(row_err(
                path,
                row,
                format!("expected 5 fields, found {}", record.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|_| {
                row_err(
                    path,
                    row,
                    format!("{}: '{}' is not a number", ROW_HEADERS[i], &record[i]),
                )
            })
        };
        let wrap = |e: Error| row_err(path, row, e.to_string());
        rows.push(Table1Row {
            mixture: record[0].to_string(),
            e0: FieldVPerUm::new(num(1)?).map_err(wrap)?,
            p_e: PowerMw::new(num(2)?).map_err(wrap)?,
            listed_gain: GainDb::new(num(3)?).map_err(wrap)?,
            listed_range: LengthM::new(num(4)?).map_err(wrap)?,
        });
    }
    Ok(rows)
}

pub const SCHEMA_VERSION: &str = "1";

/// `{value, unit}` pair; the only place numbers appear in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: &'static str,
}

pub fn quantity(value: f64, unit: &'static str) -> Result<Value> {
    if !value.is_finite() {
        return Err(Error::domain("report", format!("non-finite {unit} value")));
    }
    Ok(serde_json::to_value(Quantity { value, unit }).expect("quantity serializes"))
}

/// Structured output of one CLI command.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportDocument {
    schema_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    command: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    inputs: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    results: BTreeMap<String, Value>,
}

impl ReportDocument {
    pub fn empty() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            ..Self::default()
        }
    }

    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: Some(command.into()),
            ..Self::empty()
        }
    }

    pub fn input(&mut self, key: &str, value: Value) -> &mut Self {
        self.inputs.insert(key.to_string(), value);
        self
    }

    pub fn result(&mut self, key: &str, value: Value) -> &mut Self {
        self.results.insert(key.to_string(), value);
        self
    }

    pub fn inputs(&self) -> &BTreeMap<String, Value> {
        &self.inputs
    }

    pub fn results(&self) -> &BTreeMap<String, Value> {
        &self.results
    }

    /// Checks the published report rules: every number sits in a
    /// `{value, unit}` object with a string unit.
    pub fn validate(&self) -> Result<()> {
        let v = serde_json::to_value(self).expect("report serializes");
        validate_report_value(&v)
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        Ok(s)
    }
}

/// Validate an already-parsed report document.
pub fn validate_report_value(v: &Value) -> Result<()> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::domain("report", "top level must be an object"))?;
    if obj.get("schema_version").and_then(Value::as_str) != Some(SCHEMA_VERSION) {
        return Err(Error::domain("report", "schema_version \"1\" is required"));
    }
    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "schema_version" | "command" | "inputs" | "results"
        ) {
            return Err(Error::domain(
                "report",
                format!("unexpected top-level key '{key}'"),
            ));
        }
    }
    if let Some(c) = obj.get("command") {
        if !c.is_string() {
            return Err(Error::domain("report", "command must be a string"));
        }
    }
    for section in ["inputs", "results"] {
        if let Some(s) = obj.get(section) {
            if !s.is_object() {
                return Err(Error::domain(
                    "report",
                    format!("{section} must be an object"),
                ));
            }
            check_numbers(s, section)?;
        }
    }
    Ok(())
}

fn is_quantity(map: &Map<String, Value>) -> bool {
    map.len() == 2
        && map.get("unit").is_some_and(Value::is_string)
        && map
            .get("value")
            .and_then(Value::as_f64)
            .is_some_and(f64::is_finite)
}

fn check_numbers(v: &Value, at: &str) -> Result<()> {
    match v {
        Value::Number(_) => Err(Error::domain(
            "report",
            format!("{at}: bare number; quantities must be {{value, unit}} objects"),
        )),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .try_for_each(|(i, x)| check_numbers(x, &format!("{at}[{i}]"))),
        Value::Object(map) if is_quantity(map) => Ok(()),
        Value::Object(map) => map
            .iter()
            .try_for_each(|(k, x)| check_numbers(x, &format!("{at}.{k}"))),
        _ => Ok(()),
    }
}

/// Write through a sibling temp file so a failed run leaves no partial output.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp: PathBuf = path.to_path_buf();
    let name = path
        .file_name()
        .map(|n| format!(".{}.tmp", n.to_string_lossy()))
        .unwrap_or_else(|| ".report.tmp".to_string());
    tmp.set_file_name(name);
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

/// Serialize `doc` deterministically to `path`.
pub fn write_report(doc: &ReportDocument, path: &Path) -> Result<()> {
    write_atomic(path, doc.to_json()?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn parse(text: &str, axis: CurveAxis) -> Result<TransmittanceCurve> {
        parse_curve_csv(text, Path::new("test.csv"), axis)
    }

    #[test]
    fn table_shape_and_golden_rows() {
        let rows = embedded_table1();
        assert_eq!(rows.len(), 48);
        let first = &rows[0];
        assert_eq!(first.mixture, "3t2mb-4");
        assert_eq!(first.e0.value(), 0.1);
        assert_eq!(first.p_e.value(), 6.0012);
        assert_eq!(first.listed_gain.value(), 0.0009);
        assert_eq!(first.listed_range.value(), 0.20);
        let last = rows.last().unwrap();
        assert_eq!(last.mixture, "3t2mb-8-tnf");
        assert_eq!(last.e0.value(), 1.2);
        assert_eq!(last.p_e.value(), 6.0391);
        assert_eq!(last.listed_gain.value(), 0.0195);
        assert_eq!(last.listed_range.value(), 6.56);
        for id in EMBEDDED_IDS {
            assert_eq!(rows.iter().filter(|r| r.mixture == id).count(), 12);
        }
        assert!(rows.iter().all(|r| r.p_e.value() >= 6.0));
    }

    #[test]
    fn embedded_curves_are_the_table_knots() {
        let rows = embedded_table1();
        for id in EMBEDDED_IDS {
            let dev = embedded_device(id).unwrap();
            assert_eq!(dev.curve.len(), 12);
            for r in rows.iter().filter(|r| r.mixture == id) {
                let t = crate::ris_device::transmittance_at(&dev.curve, r.e0).unwrap();
                assert_eq!(t.value(), r.p_e.value() / 6.0);
            }
        }
        assert!(matches!(
            embedded_device("nope"),
            Err(Error::UnknownDevice(_))
        ));
    }

    #[test]
    fn tnf_devices_carry_both_labels() {
        let dev = embedded_device("3t2mb-8-tnf").unwrap();
        assert_eq!(dev.mixture.sensitizer.as_deref(), Some("TNF"));
        assert_eq!(dev.mixture.sensitizer_wt_pct.value(), 0.01);
        assert!(dev.mixture.notes[0].contains("0.1 wt%"));
        assert!(embedded_device("3t2mb-4")
            .unwrap()
            .mixture
            .sensitizer
            .is_none());
    }

    #[test]
    fn percent_header_divides_by_100() {
        let c = parse(
            "# digitised\ne0_v_per_um,transmittance_percent\n0.1,100.02\n0.2,100.045\n",
            CurveAxis::Field,
        )
        .unwrap();
        let pts: Vec<_> = c.points().map(|(x, t)| (x, t.value())).collect();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].1 - 1.0002).abs() < 1e-15);
        assert!((pts[1].1 - 1.00045).abs() < 1e-15);
    }

    #[test]
    fn zero_ratio_is_a_value_error() {
        let err = parse(
            "e0_v_per_um,transmittance_ratio\n0.1,1.0\n0.2,0\n",
            CurveAxis::Field,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");
    }

    #[test]
    fn decreasing_field_is_an_order_error() {
        let err = parse(
            "e0_v_per_um,transmittance_ratio\n0.2,1.0\n0.1,1.0\n",
            CurveAxis::Field,
        )
        .unwrap_err();
        match err {
            Error::Row { row, message, .. } => {
                assert_eq!(row, 2);
                assert!(message.contains("does not increase"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_header_names_expected() {
        let err = parse("field,transmittance\n0.1,1\n", CurveAxis::Field).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("e0_v_per_um,transmittance_ratio"), "{msg}");
        // axis mismatch
        assert!(parse(
            "wavelength_nm,transmittance_ratio\n450,0.9\n",
            CurveAxis::Field
        )
        .is_err());
        let c = parse(
            "wavelength_nm,transmittance_ratio\n450,0.9\n",
            CurveAxis::Wavelength,
        )
        .unwrap();
        assert_eq!(c.axis(), CurveAxis::Wavelength);
        let c = parse(
            "concentration_wt_pct,transmittance_percent\n0.5,80\n1.0,70\n",
            CurveAxis::Concentration,
        )
        .unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn empty_report_has_schema_only() {
        let json = ReportDocument::empty().to_json().unwrap();
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v, json!({"schema_version": "1"}));
    }

    #[test]
    fn validation_rejects_bare_numbers() {
        let mut doc = ReportDocument::new("x");
        doc.result("ok", quantity(1.0, "m").unwrap());
        assert!(doc.validate().is_ok());
        doc.result("bad", json!(3.0));
        assert!(doc.validate().is_err());
        assert!(quantity(f64::NAN, "m").is_err());
        assert!(validate_report_value(&json!({"schema_version": "2"})).is_err());
    }

    #[test]
    fn report_keys_are_sorted() {
        let mut doc = ReportDocument::new("fit-air");
        doc.result("zeta_air_db_per_m", quantity(0.0043, "dB/m").unwrap());
        doc.result("rows_used", quantity(48.0, "count").unwrap());
        let json = doc.to_json().unwrap();
        let a = json.find("rows_used").unwrap();
        let b = json.find("zeta_air_db_per_m").unwrap();
        assert!(a < b);
        assert!(json.starts_with("{\n  \"schema_version\": \"1\""));
    }
}
