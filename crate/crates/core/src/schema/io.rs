use std::io::{Read, Write};

use super::{
    format_real, CapacitanceFrame, Dataset, DatasetMeta, ForceLevel, NodeCoord, Samples, Schema,
    SingleContactSample, StretchRatio, TwoContactSample, FEATURES,
};
use crate::error::{Error, Result};

const FEATURE_COLUMNS: [&str; FEATURES] = [
    "cx1", "cx2", "cx3", "cx4", "cx5", "cx6", "cx7", "cx8", "cx9", "cx10", "cy1", "cy2", "cy3",
    "cy4", "cy5", "cy6", "cy7", "cy8", "cy9", "cy10",
];

pub const SINGLE_HEADER: [&str; 4] = ["force_n", "node_x", "node_y", "lambda"];
pub const TWO_HEADER: [&str; 6] = ["f1_n", "x1", "y1", "f2_n", "x2", "y2"];

fn header(schema: Schema) -> Vec<&'static str> {
    let labels: &[&str] = match schema {
        Schema::SingleContact => &SINGLE_HEADER,
        Schema::TwoContact => &TWO_HEADER,
    };
    FEATURE_COLUMNS.iter().chain(labels).copied().collect()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

fn push_frame(row: &mut Vec<String>, frame: &CapacitanceFrame) {
    row.extend(frame.features().iter().map(|v| format_real(*v)));
}

/// Writes the CSV table to `csv_sink` and the TOML metadata record to
/// `meta_sink`.
pub fn write_dataset<W: Write, M: Write>(
    ds: &Dataset,
    csv_sink: W,
    mut meta_sink: M,
) -> Result<()> {
    ds.check_schema()?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(csv_sink);
    w.write_record(header(ds.schema())).map_err(csv_err)?;
    let mut row = Vec::with_capacity(ds.schema().row_width());
    match &ds.samples {
        Samples::Single(samples) => {
            for s in samples {
                row.clear();
                push_frame(&mut row, &s.frame);
                row.push(format_real(s.force.newtons()));
                row.push(s.node.x().to_string());
                row.push(s.node.y().to_string());
                row.push(format_real(s.stretch.value()));
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        Samples::Two(samples) => {
            for s in samples {
                row.clear();
                push_frame(&mut row, &s.frame);
                for (f, n) in [(s.force1, s.node1), (s.force2, s.node2)] {
                    row.push(format_real(f.newtons()));
                    row.push(n.x().to_string());
                    row.push(n.y().to_string());
                }
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    let meta = toml::to_string(&ds.meta).map_err(|e| Error::Serde(e.to_string()))?;
    meta_sink.write_all(meta.as_bytes())?;
    meta_sink.flush()?;
    Ok(())
}

struct Row<'a> {
    line: u64,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn parse_err(&self, message: String) -> Error {
        Error::Parse {
            line: self.line,
            message,
        }
    }

    fn real(&self, i: usize) -> Result<f64> {
        let field = &self.record[i];
        field
            .trim()
            .parse()
            .map_err(|_| self.parse_err(format!("column {} is not a number: {field:?}", i + 1)))
    }

    fn coord(&self, i: usize) -> Result<u8> {
        let field = &self.record[i];
        field.trim().parse().map_err(|_| {
            self.parse_err(format!(
                "column {} is not a terminal number: {field:?}",
                i + 1
            ))
        })
    }

    fn frame(&self) -> Result<CapacitanceFrame> {
        let mut v = [0.0; FEATURES];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = self.real(i)?;
        }
        CapacitanceFrame::from_features(&v).map_err(|e| self.invalid(e))
    }

    fn node(&self, i: usize) -> Result<NodeCoord> {
        NodeCoord::new(self.coord(i)?, self.coord(i + 1)?).map_err(|e| self.invalid(e))
    }

    fn invalid(&self, e: Error) -> Error {
        match e {
            Error::Validation(m) => Error::Validation(format!("line {}: {m}", self.line)),
            other => other,
        }
    }
}

fn records<R: Read>(source: R) -> impl Iterator<Item = Result<(u64, csv::StringRecord)>> {
    let rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    rdr.into_records().map(|r| {
        let rec = r.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        Ok((line, rec))
    })
}

/// Reads a dataset written by [`write_dataset`]. The schema is inferred from
/// the header width (24 or 26 columns); `meta_source` is the optional TOML
/// sidecar.
pub fn read_dataset<R: Read, M: Read>(source: R, meta_source: Option<M>) -> Result<Dataset> {
    let mut rows = records(source);
    let (hline, head) = rows.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing header row".into(),
    })??;
    let schema = match head.len() {
        24 => Schema::SingleContact,
        26 => Schema::TwoContact,
        n => {
            return Err(Error::Parse {
                line: hline,
                message: format!("header has {n} columns; expected 24 or 26"),
            })
        }
    };
    let expected = header(schema);
    if head.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: hline,
            message: format!("unexpected header; expected {}", expected.join(",")),
        });
    }

    let meta = match meta_source {
        Some(mut m) => {
            let mut text = String::new();
            m.read_to_string(&mut text)?;
            let meta: DatasetMeta =
                toml::from_str(&text).map_err(|e| Error::Serde(format!("metadata: {e}")))?;
            if meta.schema != schema {
                return Err(Error::Schema(format!(
                    "metadata declares {} but the table is {}",
                    meta.schema.name(),
                    schema.name()
                )));
            }
            meta
        }
        None => DatasetMeta::unknown(schema),
    };

    let width = schema.row_width();
    let mut single = Vec::new();
    let mut two = Vec::new();
    for rec in rows {
        let (line, record) = rec?;
        let row = Row {
            line,
            record: &record,
        };
        if record.len() != width {
            return Err(row.parse_err(format!(
                "row has {} columns; expected {width}",
                record.len()
            )));
        }
        let frame = row.frame()?;
        let force = |i: usize| -> Result<ForceLevel> {
            ForceLevel::new(row.real(i)?).map_err(|e| row.invalid(e))
        };
        match schema {
            Schema::SingleContact => {
                let stretch =
                    StretchRatio::new(row.real(FEATURES + 3)?).map_err(|e| row.invalid(e))?;
                let s = SingleContactSample::new(
                    frame,
                    force(FEATURES)?,
                    row.node(FEATURES + 1)?,
                    stretch,
                )
                .map_err(|e| row.invalid(e))?;
                single.push(s);
            }
            Schema::TwoContact => {
                let s = TwoContactSample::new(
                    frame,
                    force(FEATURES)?,
                    row.node(FEATURES + 1)?,
                    force(FEATURES + 3)?,
                    row.node(FEATURES + 4)?,
                )
                .map_err(|e| row.invalid(e))?;
                two.push(s);
            }
        }
    }
    let samples = match schema {
        Schema::SingleContact => Samples::Single(single),
        Schema::TwoContact => Samples::Two(two),
    };
    Ok(Dataset { meta, samples })
}

/// Writes bare frames (header `cx1..cy10`).
pub fn write_frames<W: Write>(frames: &[CapacitanceFrame], sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(FEATURE_COLUMNS).map_err(csv_err)?;
    let mut row = Vec::with_capacity(FEATURES);
    for f in frames {
        row.clear();
        push_frame(&mut row, f);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads frames from a table whose first 20 columns are `cx1..cy10`; any
/// label columns after them (as in dataset files) are ignored.
pub fn read_frames<R: Read>(source: R) -> Result<Vec<CapacitanceFrame>> {
    let mut rows = records(source);
    let (hline, head) = rows.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing header row".into(),
    })??;
    if head.len() < FEATURES
        || head
            .iter()
            .take(FEATURES)
            .map(str::trim)
            .ne(FEATURE_COLUMNS.iter().copied())
    {
        return Err(Error::Parse {
            line: hline,
            message: "frames header must start with cx1..cx10,cy1..cy10".into(),
        });
    }
    let width = head.len();
    let mut out = Vec::new();
    for rec in rows {
        let (line, record) = rec?;
        let row = Row {
            line,
            record: &record,
        };
        if record.len() != width {
            return Err(row.parse_err(format!(
                "row has {} columns; expected {width}",
                record.len()
            )));
        }
        out.push(row.frame()?);
    }
    Ok(out)
}
