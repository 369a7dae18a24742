use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use flate2::read::GzDecoder;

use super::{DataError, RawDataset};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// `label idx:val ...` with 1-based indices.
    #[default]
    LibSvm,
    /// Header row, then one sample per row with the label in the last column.
    Csv,
}

impl Format {
    /// `.csv` (optionally followed by `.gz`) is CSV; anything else is LIBSVM.
    pub fn from_path(path: &Path) -> Format {
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        let name = name.strip_suffix(".gz").unwrap_or(&name);
        if name.ends_with(".csv") {
            Format::Csv
        } else {
            Format::LibSvm
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::LibSvm => "libsvm",
            Format::Csv => "csv",
        })
    }
}

impl FromStr for Format {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "libsvm" | "svmlight" | "svm" => Ok(Format::LibSvm),
            "csv" => Ok(Format::Csv),
            other => Err(DataError::UnknownFormat(other.to_string())),
        }
    }
}

fn parse_value<T: Scalar>(tok: &str, line: usize) -> Result<T, DataError> {
    let v = T::from_str_radix(tok, 10).map_err(|_| DataError::Parse {
        line,
        msg: format!("`{tok}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(DataError::Parse {
            line,
            msg: format!("`{tok}` is not finite"),
        });
    }
    Ok(v)
}

/// Parses LIBSVM text. The dimension is `declared_p` when given, otherwise the largest
/// index seen. Blank lines and `#` comments are skipped.
pub fn parse_libsvm<T: Scalar, R: BufRead>(
    reader: R,
    declared_p: Option<usize>,
) -> Result<RawDataset<T>, DataError> {
    let mut sparse: Vec<Vec<(usize, T)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label = parse_value::<T>(tokens.next().expect("nonempty line"), line_no)?;
        let mut entries = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| DataError::Parse {
                line: line_no,
                msg: format!("expected `index:value`, got `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| DataError::Parse {
                line: line_no,
                msg: format!("bad feature index `{idx}`"),
            })?;
            if idx == 0 {
                return Err(DataError::Parse {
                    line: line_no,
                    msg: "feature indices are 1-based; found index 0".into(),
                });
            }
            if let Some(p) = declared_p {
                if idx > p {
                    return Err(DataError::IndexOutOfRange {
                        line: line_no,
                        index: idx,
                        p,
                    });
                }
            }
            max_index = max_index.max(idx);
            entries.push((idx - 1, parse_value::<T>(val, line_no)?));
        }
        sparse.push(entries);
        labels.push(label);
    }
    let p = declared_p.unwrap_or(max_index);
    let samples = sparse
        .into_iter()
        .map(|entries| {
            let mut dense = vec![T::zero(); p];
            for (i, v) in entries {
                dense[i] = v;
            }
            dense
        })
        .collect();
    Ok(RawDataset {
        samples,
        labels,
        p,
        source: None,
        format: Format::LibSvm,
    })
}

/// Writes nonzero entries in LIBSVM form; parsing the output with the same `p`
/// reproduces the dataset exactly.
pub fn write_libsvm<T: Scalar, W: Write>(raw: &RawDataset<T>, mut out: W) -> std::io::Result<()> {
    for (x, y) in raw.samples.iter().zip(&raw.labels) {
        write!(out, "{y}")?;
        for (i, v) in x.iter().enumerate() {
            if *v != T::zero() {
                write!(out, " {}:{v}", i + 1)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parses CSV with a header row; the last column is the label.
pub fn parse_csv<T: Scalar, R: Read>(reader: R) -> Result<RawDataset<T>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let width = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .len();
    if width < 2 {
        return Err(DataError::Parse {
            line: 1,
            msg: "need at least one feature column and a label column".into(),
        });
    }
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            csv_error(e, line)
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(DataError::Parse {
                line,
                msg: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let values = rec
            .iter()
            .map(|f| parse_value::<T>(f, line))
            .collect::<Result<Vec<T>, _>>()?;
        let (x, y) = values.split_at(width - 1);
        samples.push(x.to_vec());
        labels.push(y[0]);
    }
    Ok(RawDataset {
        samples,
        labels,
        p: width - 1,
        source: None,
        format: Format::Csv,
    })
}

fn csv_error(e: csv::Error, line: usize) -> DataError {
    DataError::Parse {
        line,
        msg: e.to_string(),
    }
}

/// Reads a dataset file, decompressing `*.gz`. The format is inferred from the file
/// name when not given.
pub fn load<T: Scalar>(
    path: &Path,
    format: Option<Format>,
    declared_p: Option<usize>,
) -> Result<RawDataset<T>, DataError> {
    let format = format.unwrap_or_else(|| Format::from_path(path));
    let file = File::open(path)?;
    let gz = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    let reader: Box<dyn Read> = if gz {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let mut raw = match format {
        Format::LibSvm => parse_libsvm(BufReader::new(reader), declared_p)?,
        Format::Csv => parse_csv(reader)?,
    };
    if let (Format::Csv, Some(p)) = (format, declared_p) {
        if raw.p != p {
            return Err(DataError::InvalidArgument(format!(
                "CSV has {} feature columns, expected {p}",
                raw.p
            )));
        }
    }
    raw.source = Some(path.to_path_buf());
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn libsvm(text: &str, p: Option<usize>) -> Result<RawDataset<f64>, DataError> {
        parse_libsvm(text.as_bytes(), p)
    }

    #[test]
    fn libsvm_examples() {
        let d = libsvm("1 1:0.5 3:2.0\n", Some(3)).unwrap();
        assert_eq!(d.samples, vec![vec![0.5, 0.0, 2.0]]);
        assert_eq!(d.labels, vec![1.0]);
        let d = libsvm("-1 2:1\n", Some(4)).unwrap();
        assert_eq!(d.samples, vec![vec![0.0, 1.0, 0.0, 0.0]]);
        assert_eq!(d.labels, vec![-1.0]);
        let d = libsvm("1\n", Some(2)).unwrap();
        assert_eq!(d.samples, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn libsvm_infers_dimension() {
        let d = libsvm("# header\n1 2:1\n\n0 5:3 # trailing\n", None).unwrap();
        assert_eq!(d.p, 5);
        assert_eq!(d.len(), 2);
        assert_eq!(d.samples[1][4], 3.0);
    }

    #[test]
    fn libsvm_errors_carry_line() {
        let line_of = |r: Result<RawDataset<f64>, DataError>| match r {
            Err(DataError::Parse { line, .. }) | Err(DataError::IndexOutOfRange { line, .. }) => line,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(line_of(libsvm("1 1:1\n1 0:2\n", None)), 2);
        assert_eq!(line_of(libsvm("1 1:1\n\n1 2:x\n", None)), 3);
        assert_eq!(line_of(libsvm("abc 1:1\n", None)), 1);
        assert_eq!(line_of(libsvm("1 1\n", None)), 1);
        assert_eq!(line_of(libsvm("1 4:1\n", Some(3))), 1);
    }

    #[test]
    fn libsvm_round_trip() {
        let text = "1 1:0.5 3:2\n-1 2:0.1 4:-7.25e-3\n3\n";
        let a = libsvm(text, None).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&a, &mut buf).unwrap();
        let b = libsvm(std::str::from_utf8(&buf).unwrap(), Some(a.p)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_parse() {
        let d: RawDataset<f64> = parse_csv("a,b,label\n1,2,1\n0.5, 0 ,-1\n".as_bytes()).unwrap();
        assert_eq!(d.p, 2);
        assert_eq!(d.samples, vec![vec![1.0, 2.0], vec![0.5, 0.0]]);
        assert_eq!(d.labels, vec![1.0, -1.0]);
        let e = parse_csv::<f64, _>("a,label\n1,1\nz,1\n".as_bytes()).unwrap_err();
        assert!(matches!(e, DataError::Parse { line: 3, .. }), "{e:?}");
        assert!(parse_csv::<f64, _>("a,label\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn format_inference() {
        assert_eq!(Format::from_path(Path::new("x/train.CSV.gz")), Format::Csv);
        assert_eq!(Format::from_path(Path::new("a9a")), Format::LibSvm);
        assert_eq!(Format::from_path(Path::new("w8a.libsvm.gz")), Format::LibSvm);
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
    }

    #[test]
    fn load_gzip() {
        use flate2::write::GzEncoder;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::default());
        enc.write_all(b"f1,f2,y\n3,4,1\n").unwrap();
        enc.finish().unwrap();
        let d: RawDataset<f64> = load(&path, None, None).unwrap();
        assert_eq!(d.samples, vec![vec![3.0, 4.0]]);
        assert_eq!(d.format, Format::Csv);
        assert_eq!(d.source.as_deref(), Some(path.as_path()));
    }
}
