//! Parsing of numeric inputs: sample CSVs and value lists.

use std::path::Path;

use eigengap::Dataset;

use crate::Failure;

/// Reads an `n × p` CSV of samples: no header, one sample per row.
pub fn read_samples(path: &Path) -> Result<Dataset, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    Failure::usage(format!(
                        "{}: row {}, column {}: '{cell}' is not a number",
                        path.display(),
                        i + 1,
                        j + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Failure::usage(format!("{}: no samples", path.display())));
    }
    Ok(Dataset::from_rows(&rows)?)
}

/// Comma-separated numbers, e.g. `3,1,2`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, Failure> {
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::usage(format!("'{t}' is not a finite number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(Failure::usage("empty list of values"));
    }
    Ok(values)
}

/// A list given inline, or the path of a file holding one.
pub fn read_values(arg: &str) -> Result<Vec<f64>, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        parse_list(&text)
    } else {
        parse_list(arg)
    }
}

/// `[2,2,2]`, with shortest round-trip formatting of each entry.
pub fn format_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", items.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("3, 1,2").ok().unwrap(), vec![3.0, 1.0, 2.0]);
        assert_eq!(parse_list("-1.5\n2").ok().unwrap(), vec![-1.5, 2.0]);
        assert!(parse_list("1,x").is_err());
        assert!(parse_list("1,inf").is_err());
        assert!(parse_list(" , ").is_err());
        assert_eq!(format_list(&[2.0, 2.0, 0.5]), "[2,2,0.5]");
    }
}
