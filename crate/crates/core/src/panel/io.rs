//! CSV ingestion and export (RFC 4180, header row required).

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;

use super::{IncomeGroup, Panel};
use crate::error::{Error, Result};
use crate::num::Scalar;

/// Column layout of a panel CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PanelLayout {
    /// `entity,year,variable,value`, one row per cell.
    #[default]
    Long,
    /// `entity,year,<var1>,...,<varK>`, one row per entity-year.
    Wide,
}

impl FromStr for PanelLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "long" => Ok(PanelLayout::Long),
            "wide" => Ok(PanelLayout::Wide),
            other => Err(Error::InvalidParameter(format!(
                "unknown layout `{other}` (expected long or wide)"
            ))),
        }
    }
}

/// A loaded panel plus cell accounting.
#[derive(Debug, Clone)]
pub struct LoadedPanel<T: Scalar> {
    pub panel: Panel<T>,
    /// Empty value cells in the file.
    pub blank_cells: usize,
    /// Non-empty cells that did not parse as a finite number.
    pub unparseable_cells: usize,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv {
        path: None,
        message: e.to_string(),
    }
}

fn find_column(headers: &csv::StringRecord, names: &[&str]) -> Result<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
        .ok_or_else(|| Error::MissingColumn(names[0].to_string()))
}

enum Cell<T> {
    Blank,
    Bad,
    Value(T),
}

fn parse_cell<T: Scalar>(raw: &str) -> Cell<T> {
    let s = raw.trim();
    if s.is_empty() {
        return Cell::Blank;
    }
    match s.parse::<T>() {
        Ok(v) if v.as_f64().is_finite() => Cell::Value(v),
        _ => Cell::Bad,
    }
}

fn parse_year(raw: &str, line: u64) -> Result<i32> {
    raw.trim().parse::<i32>().map_err(|_| Error::Csv {
        path: None,
        message: format!("line {line}: year `{raw}` is not an integer"),
    })
}

fn intern(names: &mut Vec<String>, index: &mut HashMap<String, usize>, name: &str) -> usize {
    if let Some(&i) = index.get(name) {
        return i;
    }
    names.push(name.to_string());
    index.insert(name.to_string(), names.len() - 1);
    names.len() - 1
}

/// Reads a panel from any CSV source.
pub fn read_panel<T: Scalar, R: Read>(reader: R, layout: PanelLayout) -> Result<LoadedPanel<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::Headers).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let entity_col = find_column(&headers, &["entity", "country"])?;
    let year_col = find_column(&headers, &["year"])?;

    let mut entities = Vec::new();
    let mut entity_ix = HashMap::new();
    let mut variables = Vec::new();
    let mut variable_ix = HashMap::new();
    // (entity, year, variable) -> cell
    let mut cells: HashMap<(usize, i32, usize), Option<T>> = HashMap::new();
    let (mut blank, mut bad) = (0usize, 0usize);

    let mut record_cell = |cell: Cell<T>| match cell {
        Cell::Blank => {
            blank += 1;
            None
        }
        Cell::Bad => {
            bad += 1;
            None
        }
        Cell::Value(v) => Some(v),
    };

    match layout {
        PanelLayout::Long => {
            let var_col = find_column(&headers, &["variable"])?;
            let val_col = find_column(&headers, &["value"])?;
            for rec in rdr.records() {
                let rec = rec.map_err(csv_err)?;
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                let entity = rec.get(entity_col).unwrap_or("").trim();
                let year = parse_year(rec.get(year_col).unwrap_or(""), line)?;
                let var = rec.get(var_col).unwrap_or("").trim();
                let e = intern(&mut entities, &mut entity_ix, entity);
                let v = intern(&mut variables, &mut variable_ix, var);
                let cell = record_cell(parse_cell(rec.get(val_col).unwrap_or("")));
                if cells.insert((e, year, v), cell).is_some() {
                    return Err(Error::DuplicateRow {
                        entity: entity.to_string(),
                        year,
                        variable: Some(var.to_string()),
                    });
                }
            }
        }
        PanelLayout::Wide => {
            let var_cols: Vec<usize> = (0..headers.len())
                .filter(|&c| c != entity_col && c != year_col)
                .collect();
            if var_cols.is_empty() {
                return Err(Error::MissingColumn("<variable>".into()));
            }
            for &c in &var_cols {
                intern(&mut variables, &mut variable_ix, headers[c].trim());
            }
            let mut rows = std::collections::HashSet::new();
            for rec in rdr.records() {
                let rec = rec.map_err(csv_err)?;
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                let entity = rec.get(entity_col).unwrap_or("").trim();
                let year = parse_year(rec.get(year_col).unwrap_or(""), line)?;
                let e = intern(&mut entities, &mut entity_ix, entity);
                if !rows.insert((e, year)) {
                    return Err(Error::DuplicateRow {
                        entity: entity.to_string(),
                        year,
                        variable: None,
                    });
                }
                for (v, &c) in var_cols.iter().enumerate() {
                    let cell = record_cell(parse_cell(rec.get(c).unwrap_or("")));
                    cells.insert((e, year, v), cell);
                }
            }
        }
    }

    let (first, last) = match (
        cells.keys().map(|k| k.1).min(),
        cells.keys().map(|k| k.1).max(),
    ) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InsufficientData("panel file has no data rows".into())),
    };
    let years: Vec<i32> = (first..=last).collect();
    if bad > 0 {
        warn!("{bad} unparseable numeric cells treated as missing");
    }
    let panel = Panel::from_fn(entities, years.clone(), variables, |i, y, v| {
        cells.get(&(i, years[y], v)).copied().flatten()
    })?;
    Ok(LoadedPanel {
        panel,
        blank_cells: blank,
        unparseable_cells: bad,
    })
}

/// Loads a panel CSV from disk.
pub fn load_panel<T: Scalar>(path: impl AsRef<Path>, layout: PanelLayout) -> Result<LoadedPanel<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel(BufReader::new(file), layout).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Csv { message, .. } => Error::Csv {
            path: Some(path.to_path_buf()),
            message,
        },
        other => other,
    }
}

/// Writes every grid cell; absent cells are written as empty fields.
pub fn write_panel<T: Scalar, W: Write>(panel: &Panel<T>, writer: W, layout: PanelLayout) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let fmt = |c: Option<T>| c.map(|v| v.to_string()).unwrap_or_default();
    match layout {
        PanelLayout::Long => {
            w.write_record(["entity", "year", "variable", "value"]).map_err(csv_err)?;
            for (i, e) in panel.entities().iter().enumerate() {
                for (y, year) in panel.years().iter().enumerate() {
                    for (v, var) in panel.variables().iter().enumerate() {
                        w.write_record([e.as_str(), &year.to_string(), var.as_str(), &fmt(panel.get(i, y, v))])
                            .map_err(csv_err)?;
                    }
                }
            }
        }
        PanelLayout::Wide => {
            let mut header = vec!["entity".to_string(), "year".to_string()];
            header.extend(panel.variables().iter().cloned());
            w.write_record(&header).map_err(csv_err)?;
            for (i, e) in panel.entities().iter().enumerate() {
                for (y, year) in panel.years().iter().enumerate() {
                    let mut row = vec![e.clone(), year.to_string()];
                    row.extend((0..panel.n_vars()).map(|v| fmt(panel.get(i, y, v))));
                    w.write_record(&row).map_err(csv_err)?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::Csv {
        path: None,
        message: e.to_string(),
    })
}

/// Saves a panel CSV to disk.
pub fn save_panel<T: Scalar>(panel: &Panel<T>, path: impl AsRef<Path>, layout: PanelLayout) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_panel(panel, BufWriter::new(file), layout)
}

/// Reads an `entity,label` income-group map. The label column is the
/// first of `label`, `group`, `income_group` present.
pub fn read_groups<R: Read>(reader: R) -> Result<BTreeMap<String, IncomeGroup>> {
    read_groups_column(reader, None)
}

/// [`read_groups`] with an explicit label column name.
pub fn read_groups_column<R: Read>(reader: R, column: Option<&str>) -> Result<BTreeMap<String, IncomeGroup>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let entity_col = find_column(&headers, &["entity", "country"])?;
    let label_col = match column {
        Some(c) => find_column(&headers, &[c])?,
        None => find_column(&headers, &["label", "group", "income_group"])?,
    };
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let entity = rec.get(entity_col).unwrap_or("").trim().to_string();
        let raw = rec.get(label_col).unwrap_or("").trim();
        if raw.is_empty() {
            continue;
        }
        let label: IncomeGroup = raw.parse()?;
        if let Some(prev) = out.insert(entity.clone(), label) {
            if prev != label {
                return Err(Error::InvalidPanel(format!(
                    "entity `{entity}` mapped to both {prev} and {label}"
                )));
            }
        }
    }
    Ok(out)
}

pub fn load_groups(path: impl AsRef<Path>, column: Option<&str>) -> Result<BTreeMap<String, IncomeGroup>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_groups_column(BufReader::new(file), column).map_err(|e| with_path(e, path))
}

pub fn write_groups<W: Write>(groups: &BTreeMap<String, IncomeGroup>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["entity", "label"]).map_err(csv_err)?;
    for (e, g) in groups {
        w.write_record([e.as_str(), g.short()]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Csv {
        path: None,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LONG: &str = "entity,year,variable,value
a,2000,x,1
a,2000,y,2
a,2001,x,3
a,2001,y,4
a,2002,x,5
a,2002,y,6
b,2000,x,7
b,2000,y,8
b,2001,x,9
b,2001,y,10
b,2002,x,11
b,2002,y,12
";

    #[test]
    fn long_file_loads_complete() {
        let lp: LoadedPanel<f64> = read_panel(LONG.as_bytes(), PanelLayout::Long).unwrap();
        assert_eq!(lp.panel.dims(), (2, 3, 2));
        assert_eq!(lp.panel.missing_count(), 0);
        assert_eq!(lp.panel.get(1, 2, 1), Some(12.0));
    }

    #[test]
    fn blank_cell_is_single_missing() {
        let text = LONG.replace("b,2001,x,9", "b,2001,x,");
        let lp: LoadedPanel<f64> = read_panel(text.as_bytes(), PanelLayout::Long).unwrap();
        assert_eq!(lp.panel.dims(), (2, 3, 2));
        assert_eq!(lp.panel.missing_count(), 1);
        assert_eq!(lp.blank_cells, 1);
        assert_eq!(lp.panel.get(1, 1, 0), None);
    }

    #[test]
    fn unparseable_cells_are_counted() {
        let text = LONG.replace("b,2001,x,9", "b,2001,x,n/a");
        let lp: LoadedPanel<f64> = read_panel(text.as_bytes(), PanelLayout::Long).unwrap();
        assert_eq!(lp.unparseable_cells, 1);
        assert_eq!(lp.panel.missing_count(), 1);
    }

    #[test]
    fn duplicate_rows_fail() {
        let text = format!("{LONG}a,2000,x,99\n");
        match read_panel::<f64, _>(text.as_bytes(), PanelLayout::Long) {
            Err(Error::DuplicateRow { entity, year, .. }) => {
                assert_eq!(entity, "a");
                assert_eq!(year, 2000);
            }
            other => panic!("{other:?}"),
        }
        let wide = "entity,year,x\na,2000,1\na,2000,2\n";
        assert!(matches!(
            read_panel::<f64, _>(wide.as_bytes(), PanelLayout::Wide),
            Err(Error::DuplicateRow { .. })
        ));
    }

    #[test]
    fn missing_column_is_named() {
        let text = "entity,year,variable\na,2000,x\n";
        match read_panel::<f64, _>(text.as_bytes(), PanelLayout::Long) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "value"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_year_is_an_error() {
        let text = "entity,year,variable,value\na,20x0,x,1\n";
        assert!(read_panel::<f64, _>(text.as_bytes(), PanelLayout::Long).is_err());
    }

    #[test]
    fn wide_matches_long() {
        let wide = "entity,year,x,y\na,2000,1,2\na,2001,3,4\na,2002,5,6\nb,2000,7,8\nb,2001,9,10\nb,2002,11,12\n";
        let w: LoadedPanel<f64> = read_panel(wide.as_bytes(), PanelLayout::Wide).unwrap();
        let l: LoadedPanel<f64> = read_panel(LONG.as_bytes(), PanelLayout::Long).unwrap();
        assert_eq!(w.panel, l.panel);
    }

    #[test]
    fn year_gap_becomes_missing_rows() {
        let text = "entity,year,x\na,2000,1\na,2002,3\n";
        let lp: LoadedPanel<f64> = read_panel(text.as_bytes(), PanelLayout::Wide).unwrap();
        assert_eq!(lp.panel.years(), &[2000, 2001, 2002]);
        assert_eq!(lp.panel.get(0, 1, 0), None);
    }

    #[test]
    fn groups_round_trip() {
        let text = "entity,label\na,High income\nb,LMIC\n";
        let g = read_groups(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_groups(&g, &mut buf).unwrap();
        assert_eq!(read_groups(buf.as_slice()).unwrap(), g);
    }

    proptest! {
        #[test]
        fn write_then_read_is_bit_exact(
            cells in proptest::collection::vec(proptest::option::of(-1e12f64..1e12), 3 * 4 * 2),
            wide in any::<bool>(),
        ) {
            let panel = Panel::new(
                vec!["e1".into(), "e2".into(), "e3".into()],
                vec![1990, 1991, 1992, 1993],
                vec!["u".into(), "w".into()],
                cells,
            ).unwrap();
            let layout = if wide { PanelLayout::Wide } else { PanelLayout::Long };
            let mut buf = Vec::new();
            write_panel(&panel, &mut buf, layout).unwrap();
            let back: LoadedPanel<f64> = read_panel(buf.as_slice(), layout).unwrap();
            prop_assert_eq!(back.panel, panel);
        }
    }
}
