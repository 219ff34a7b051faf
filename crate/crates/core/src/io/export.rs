use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::IoError;
use crate::control::RunRecord;
use crate::supervisor::Verdict;

pub const EXPORT_SIGNIFICANT_DIGITS: usize = 9;

/// Rounds to nine significant digits so exported numbers do not depend on
/// the last bits of floating-point evaluation order.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", EXPORT_SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

fn normalize(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_significant).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(normalize),
        Value::Object(map) => map.values_mut().for_each(normalize),
        _ => {}
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("record serializes")
}

fn object(kind: &str, interval: u64, tti: u64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("type".into(), json!(kind));
    m.insert("interval".into(), json!(interval));
    m.insert("tti".into(), json!(tti));
    m
}

/// The export objects for one decision interval, in emission order:
/// telemetry, decision, then audit and rollback entries when they apply.
pub fn record_values(r: &RunRecord) -> Vec<Value> {
    let mut out = Vec::new();

    let mut telemetry = object("telemetry", r.interval, r.tti);
    telemetry.insert("window".into(), to_value(&r.report.window));
    telemetry.insert("cells".into(), to_value(&r.report.cells));
    telemetry.insert("network".into(), to_value(&r.report.network));
    out.push(Value::Object(telemetry));

    let mut decision = object("decision", r.interval, r.tti);
    decision.insert("reward".into(), to_value(&r.reward));
    decision.insert("proposed".into(), to_value(&r.proposed));
    decision.insert("verdict".into(), to_value(&r.verdict));
    decision.insert("shadow".into(), to_value(&r.shadow));
    decision.insert("applied".into(), json!(r.applied));
    decision.insert("checkpoint_id".into(), json!(r.checkpoint_id));
    decision.insert("rollback".into(), json!(r.rollback.is_some()));
    decision.insert("diagnostics".into(), to_value(&r.diagnostics));
    decision.insert("anomalies".into(), to_value(&r.anomalies));
    decision.insert("load_forecast_bps".into(), json!(r.load_forecast_bps));
    out.push(Value::Object(decision));

    if !matches!(r.verdict, Verdict::Approved) {
        let mut audit = object("audit", r.interval, r.tti);
        audit.insert("event".into(), json!("verdict"));
        audit.insert("verdict".into(), to_value(&r.verdict));
        out.push(Value::Object(audit));
    }
    if let Some(s) = r.shadow.as_ref().filter(|s| !s.passed()) {
        let mut audit = object("audit", r.interval, r.tti);
        audit.insert("event".into(), json!("shadow_fail"));
        audit.insert("shadow".into(), to_value(s));
        out.push(Value::Object(audit));
    }
    if let Some(id) = r.checkpoint_id {
        let mut audit = object("audit", r.interval, r.tti);
        audit.insert("event".into(), json!("checkpoint"));
        audit.insert("checkpoint_id".into(), json!(id));
        out.push(Value::Object(audit));
    }
    if let Some(a) = &r.rollback {
        let mut rb = object("rollback", r.interval, r.tti);
        rb.insert("audit".into(), to_value(a));
        out.push(Value::Object(rb));
    }
    for v in &mut out {
        normalize(v);
    }
    out
}

/// Serialized lines (without terminators) for one record. Keys come out
/// sorted because `serde_json::Map` is ordered.
pub fn record_lines(r: &RunRecord) -> Vec<String> {
    record_values(r).iter().map(|v| serde_json::to_string(v).expect("value serializes")).collect()
}

/// Line-delimited record sink.
pub struct ExportWriter<W: Write> {
    out: W,
}

impl<W: Write> ExportWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write_record(&mut self, r: &RunRecord) -> std::io::Result<()> {
        for line in record_lines(r) {
            self.out.write_all(line.as_bytes())?;
            self.out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn export_records(records: &[RunRecord], path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = ExportWriter::new(BufWriter::new(file));
    for r in records {
        w.write_record(r).map_err(|e| IoError::io(path, e))?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}
