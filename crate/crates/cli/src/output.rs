//! CSV and JSON encodings of a [`ResultTable`].

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::sweep::ResultTable;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn emit(table: &ResultTable, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => emit_csv(table),
        Format::Json => emit_json(table),
    }
}

fn emit_csv(table: &ResultTable) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| format_number(x)))
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn emit_json(table: &ResultTable) -> Vec<u8> {
    let config: Map<String, Value> = table
        .metadata
        .config
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let columns: Vec<Value> = table
        .columns
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let values: Vec<Value> = table.rows.iter().map(|r| json!(r[j])).collect();
            json!({ "name": name, "values": values })
        })
        .collect();
    let doc = json!({
        "metadata": {
            "config": config,
            "version": table.metadata.version,
            "kappa": table.metadata.kappa,
        },
        "columns": columns,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("JSON of plain numbers and strings");
    bytes.push(b'\n');
    bytes
}

/// Metadata for a CSV file, as a config document that reproduces the run.
pub fn metadata_text(table: &ResultTable) -> String {
    let mut s = format!(
        "# wqed {}\n# kappa = {}\n",
        table.metadata.version,
        format_number(table.metadata.kappa)
    );
    for (k, v) in &table.metadata.config {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}
