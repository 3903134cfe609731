//! Comment-headed CSV: `# key: value` provenance lines, then a plain CSV body.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

impl Table {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        let mut meta = BTreeMap::new();
        meta.insert("schema".to_string(), schema.to_string());
        Self {
            meta,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn schema(&self) -> Option<&str> {
        self.meta.get("schema").map(String::as_str)
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        assert!(!value.contains('\n'), "meta values are single-line");
        self.meta.insert(key.to_string(), value);
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column {name}")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("{name}: not a number: {s}")))
            })
            .collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let body = w
            .into_inner()
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(body).expect("utf-8 input"));
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let (k, v) = line[1..]
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("bad header line {line}")))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let columns = r
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(String::from)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|x| x.iter().map(String::from).collect())
                    .map_err(csv_err)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            meta,
            columns,
            rows,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = Table::new("demo/1", &["a", "b"]);
        t.set_meta("seed", 7);
        t.push(vec!["1".into(), "x,y".into()]);
        t.push(vec!["2.5e-3".into(), "z".into()]);
        let s = t.to_csv_string().unwrap();
        assert!(s.starts_with("# schema: demo/1\n# seed: 7\na,b\n"));
        let back = Table::parse(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.numeric_column("a").unwrap(), vec![1.0, 2.5e-3]);
        assert!(back.numeric_column("b").is_err());
        assert!(back.column("c").is_err());
    }
}
