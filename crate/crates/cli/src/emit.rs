//! CSV and JSON encodings of a [`RunReport`]. Both are byte-deterministic.

use crate::config::Format;
use crate::report::RunReport;

pub const CSV_HEADER: &str = "scenario,kind,i1,i2,i3,i4,value";

/// One row per table cell, matrix entry, CHSH value, scalar and residual.
///
/// Indices are one-based; unused index columns are empty. Values use the
/// shortest representation that round-trips.
pub fn to_csv(report: &RunReport) -> String {
    let scenario = report.spec.scenario.name();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut row = |kind: &str, indices: &[usize], value: f64| {
        assert!(indices.len() <= 4, "at most four index columns");
        let mut record = vec![scenario.to_string(), kind.to_string()];
        record.extend((0..4).map(|slot| {
            indices
                .get(slot)
                .map_or(String::new(), |i| (i + 1).to_string())
        }));
        record.push(format!("{value:?}"));
        writer.write_record(&record).expect("in-memory write");
    };

    for table in &report.tables {
        for (flat, &value) in table.values.iter().enumerate() {
            row(&table.kind, &table.indices(flat), value);
        }
    }
    for matrix in &report.matrices {
        for (part, entries) in [("re", &matrix.re), ("im", &matrix.im)] {
            let kind = format!("{}_{part}", matrix.name);
            for (r, line) in entries.iter().enumerate() {
                for (c, &value) in line.iter().enumerate() {
                    row(&kind, &[r, c], value);
                }
            }
        }
    }
    for (i, point) in report.chsh.iter().enumerate() {
        row("chsh_entangled", &[i], point.entangled);
        row("chsh_factorized", &[i], point.factorized);
    }
    for scalar in &report.scalars {
        row(&scalar.name, &[], scalar.value);
    }
    for check in &report.checks {
        row(&format!("residual_{}", check.name), &[], check.residual);
    }
    let body = writer.into_inner().expect("in-memory flush");
    format!(
        "{CSV_HEADER}\n{}",
        String::from_utf8(body).expect("ascii rows")
    )
}

pub fn to_json(report: &RunReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Csv => to_csv(report),
        Format::Json => to_json(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, RawSettings};
    use crate::report::run;

    fn report(pairs: &[(&str, &str)]) -> RunReport {
        let mut raw = RawSettings::default();
        for (k, v) in pairs {
            raw.set(k, *v, *k);
        }
        run(&parse_config(None, &raw).unwrap()).unwrap()
    }

    #[test]
    fn csv_rows_have_seven_columns() {
        let csv = to_csv(&report(&[("scenario", "bell-ancilla")]));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        for line in lines {
            assert_eq!(line.split(',').count(), 7, "{line}");
        }
    }

    #[test]
    fn csv_indices_are_one_based() {
        let csv = to_csv(&report(&[("scenario", "pair-correlations")]));
        let rows: Vec<&str> = csv.lines().skip(1).take(4).collect();
        for (row, prefix) in rows.iter().zip(["1,1,,,", "1,2,,,", "2,1,,,", "2,2,,,"]) {
            assert!(
                row.starts_with(&format!("pair-correlations,pair_joint,{prefix}")),
                "{row}"
            );
        }
        let value: f64 = rows[0].rsplit(',').next().unwrap().parse().unwrap();
        assert!((value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn csv_values_round_trip() {
        let original = report(&[
            ("scenario", "bell-ancilla"),
            ("theta1", "1.5707963267948966"),
        ]);
        let csv = to_csv(&original);
        let cells: Vec<f64> = original
            .tables
            .iter()
            .flat_map(|t| t.values.clone())
            .collect();
        let parsed: Vec<f64> = csv
            .lines()
            .skip(1)
            .take(cells.len())
            .map(|line| line.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(parsed, cells);
    }

    #[test]
    fn json_round_trips() {
        let original = report(&[("scenario", "bell"), ("samples", "100"), ("seed", "3")]);
        let back: RunReport = serde_json::from_str(&to_json(&original)).unwrap();
        assert_eq!(back, original);
    }
}
