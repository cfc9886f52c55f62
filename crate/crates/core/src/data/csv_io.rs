use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, Schema};
use crate::error::{Error, Result};

/// Name of the final, binary response column.
pub const RESPONSE_COLUMN: &str = "switch";

/// Load a dataset from a CSV file whose header is the schema's feature
/// names followed by `switch`. Row numbers in errors count data rows from 1.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let p = schema.features.len();

    for name in &header {
        if name != RESPONSE_COLUMN && !schema.features.iter().any(|s| &s.name == name) {
            return Err(Error::Schema(format!("unknown column {name:?}")));
        }
    }
    let expected: Vec<&str> = schema
        .features
        .iter()
        .map(|s| s.name.as_str())
        .chain(std::iter::once(RESPONSE_COLUMN))
        .collect();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(h, e)| h != e) {
        return Err(Error::Schema(format!(
            "header {:?} does not match expected {:?}",
            header, expected
        )));
    }

    let mut values = Vec::new();
    let mut response = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != p + 1 {
            return Err(Error::Schema(format!(
                "row {row} has {} fields, expected {}",
                record.len(),
                p + 1
            )));
        }
        for (t, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let column = &header[t];
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row,
                    column: column.clone(),
                });
            }
            let x: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row,
                column: column.clone(),
                value: cell.to_string(),
            })?;
            if t < p {
                values.push(x);
            } else if x == 0.0 || x == 1.0 {
                response.push(x as u8);
            } else {
                return Err(Error::ResponseNotBinary { row, value: x });
            }
        }
    }
    Dataset::from_flat(schema.features.clone(), values, response, schema.segment_keys.clone())
}

/// Write `data` in the same layout `read_csv` expects. Values use the
/// shortest representation that parses back to the identical f64.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = data.specs().iter().map(|s| s.name.as_str()).collect();
    header.push(RESPONSE_COLUMN);
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for (row, &y) in data.rows().zip(data.response()) {
        record.clear();
        record.extend(row.iter().map(|x| format!("{x}")));
        record.push(y.to_string());
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSpec;

    fn schema() -> Schema {
        Schema::new(vec![FeatureSpec::continuous("x1", ""), FeatureSpec::continuous("x2", "")])
    }

    #[test]
    fn reads_small_file() {
        let text = "x1,x2,switch\n1,2,0\n3,4.5,1\n-1,0,1\n";
        let d = read_csv(text.as_bytes(), &schema()).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.row(1), &[3.0, 4.5]);
        assert_eq!(d.response(), &[0, 1, 1]);
        assert_eq!(d.spec(0).observed_min, -1.0);
    }

    #[test]
    fn response_must_be_binary() {
        let text = "x1,x2,switch\n1,2,0\n3,4,2\n";
        let err = read_csv(text.as_bytes(), &schema()).unwrap_err();
        assert!(err.to_string().contains("response not binary"), "{err}");
    }

    #[test]
    fn empty_cell_names_row() {
        let text = "x1,x2,switch\n1,2,0\n1,2,0\n1,2,0\n1,2,0\n1,,0\n";
        let err = read_csv(text.as_bytes(), &schema()).unwrap_err();
        match err {
            Error::MissingValue { row, column } => {
                assert_eq!(row, 5);
                assert_eq!(column, "x2");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_numeric_and_unknown_column_rejected() {
        let text = "x1,x2,switch\n1,abc,0\n";
        assert!(matches!(read_csv(text.as_bytes(), &schema()), Err(Error::NonNumeric { row: 1, .. })));
        let text = "x1,zz,switch\n1,2,0\n";
        let err = read_csv(text.as_bytes(), &schema()).unwrap_err();
        assert!(err.to_string().contains("unknown column"), "{err}");
    }

    #[test]
    fn write_then_read_is_identity() {
        let d = Dataset::new(
            schema().features,
            vec![vec![0.1 + 0.2, 1e-17], vec![std::f64::consts::PI, -2.5]],
            vec![1, 0],
            vec![],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &schema()).unwrap();
        assert_eq!(back, d);
    }
}
