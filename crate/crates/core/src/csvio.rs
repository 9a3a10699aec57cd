//! Two-column numeric CSV reading shared by unit tables and sample files.

use crate::error::{Error, Result};

/// Parses `a,b` rows. Lines starting with `#` are comments; a leading
/// non-numeric row is treated as a header.
pub fn read_pairs(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() < 2 {
            return Err(Error::Data(format!(
                "row {} has {} column(s), expected 2",
                i + 1,
                rec.len()
            )));
        }
        let a = rec[0].parse::<f64>();
        let b = rec[1].parse::<f64>();
        match (a, b) {
            (Ok(a), Ok(b)) => out.push((a, b)),
            _ if i == 0 && out.is_empty() => continue,
            _ => {
                return Err(Error::Data(format!(
                    "row {}: cannot parse '{}', '{}' as numbers",
                    i + 1,
                    &rec[0],
                    &rec[1]
                )))
            }
        }
    }
    Ok(out)
}
