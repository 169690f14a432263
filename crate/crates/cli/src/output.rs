use std::io::Write;

use serde_json::Value;

/// What a command produced: the JSON document plus a human/CSV view of it.
pub struct Report {
    pub json: Value,
    pub view: View,
}

pub enum View {
    Fields(Vec<(String, String)>),
    Table { headers: Vec<String>, rows: Vec<Vec<String>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
    Csv,
}

/// Ten significant digits; comparisons never go through this.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    // exponent after rounding, so 0.99999999999 counts as magnitude 0
    let sci = format!("{x:.9e}");
    let mag: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..10).contains(&mag) {
        let decimals = (9 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn fields<const N: usize>(items: [(&str, String); N]) -> View {
    View::Fields(items.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

pub fn write(out: &mut dyn Write, report: &Report, format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report.json)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            match &report.view {
                View::Fields(items) => {
                    w.write_record(["field", "value"])?;
                    for (k, v) in items {
                        w.write_record([k, v])?;
                    }
                }
                View::Table { headers, rows } => {
                    w.write_record(headers)?;
                    for r in rows {
                        w.write_record(r)?;
                    }
                }
            }
            w.flush()
        }
        Format::Human => match &report.view {
            View::Fields(items) => {
                let width = items.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in items {
                    writeln!(out, "{k:<width$}  {v}")?;
                }
                Ok(())
            }
            View::Table { headers, rows } => {
                let mut widths: Vec<usize> = headers.iter().map(String::len).collect();
                for r in rows {
                    for (w, cell) in widths.iter_mut().zip(r) {
                        *w = (*w).max(cell.len());
                    }
                }
                let line = |cells: &[String]| {
                    let parts: Vec<String> =
                        cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
                    parts.join("  ").trim_end().to_string()
                };
                writeln!(out, "{}", line(headers))?;
                for r in rows {
                    writeln!(out, "{}", line(r))?;
                }
                Ok(())
            }
        },
    }
}
