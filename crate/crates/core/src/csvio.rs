//! Thin helpers over the `csv` crate for the small tabular files we write.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Serialises rows (with a header derived from the field names).
pub(crate) fn to_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

/// Parses rows, requiring the header to list exactly `columns`.
pub(crate) fn from_str<T: DeserializeOwned>(text: &str, columns: &[&str], what: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::format(what, e))?;
    if header.iter().ne(columns.iter().copied()) {
        return Err(Error::format(what, format!("expected header `{}`", columns.join(","))));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::format(what, format!("row {i}: {e}"))))
        .collect()
}
