use crate::error::{Error, Result};
use crate::series::Series;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Series shorter than this are skipped on load.
pub const MIN_SERIES_LENGTH: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSeries {
    pub id: String,
    pub series: Series,
}

/// Reads one series per row (`id,v1,v2,...`) after a header row.
pub fn load_series(path: &Path) -> Result<Vec<NamedSeries>> {
    let text = std::fs::read_to_string(path)?;
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<Vec<NamedSeries>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut rows = 0;
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        let mut cells: Vec<&str> = rec.iter().map(str::trim).collect();
        while cells.last() == Some(&"") {
            cells.pop();
        }
        if cells.is_empty() {
            continue;
        }
        rows += 1;
        let id = cells[0].to_string();
        let values = cells[1..]
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row,
                        column: j + 2,
                        message: format!("'{c}' is not a finite number"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < MIN_SERIES_LENGTH {
            log::warn!(
                "series '{id}' (row {row}) has {} observations, fewer than {MIN_SERIES_LENGTH}; skipped",
                values.len()
            );
            continue;
        }
        out.push(NamedSeries {
            id,
            series: Series::new(values)?,
        });
    }
    if rows == 0 {
        log::warn!("no series rows found");
    }
    Ok(out)
}

/// Writes series in the format [`load_series`] reads.
pub fn write_series_csv(path: &Path, series: &[NamedSeries]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let width = series.iter().map(|s| s.series.len()).max().unwrap_or(0);
    let mut header = String::from("id");
    for t in 1..=width {
        header.push_str(&format!(",t{t}"));
    }
    writeln!(w, "{header}")?;
    for s in series {
        let mut line = s.id.clone();
        for v in s.series.values() {
            line.push_str(&format!(",{v}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}
