//! Feature-matrix files: a little-endian binary container and an equivalent
//! plain-CSV form, both round-tripping f64 payloads exactly.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! magic      9 bytes  "CCAPROBE1"
//! dtype      u8       1 = f64
//! has_labels u8       0 | 1
//! has_seed   u8       0 | 1
//! rows       u64
//! cols       u64
//! name_len   u16      sensor-name byte count
//! name       UTF-8 bytes
//! seed       u64      present iff has_seed
//! payload    rows·cols f64, row-major
//! labels     rows u32, present iff has_labels
//! ```
//!
//! The CSV form starts with one header line
//! `CCAPROBE1,rows=R,cols=C,has_labels=B,sensor=NAME,seed=S` (`seed=none`
//! when absent) followed by one comma-separated row per sample, the label
//! appended last when present. Values print in shortest-roundtrip form, so
//! CSV and binary decode to identical bits.
//!
//! Heads ride the same container: an n_c×(n+1) matrix whose final column is
//! the bias.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::heads::LinearHead;
use crate::linalg::Matrix;

pub const MAGIC: &[u8; 9] = b"CCAPROBE1";
const DTYPE_F64: u8 = 1;

/// A feature matrix with optional labels and provenance, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub matrix: Matrix,
    pub labels: Option<Vec<u32>>,
    /// Sensor (or artifact) name; no commas or line breaks.
    pub sensor: String,
    /// Seed the data was generated from, when known.
    pub seed: Option<u64>,
}

impl FeatureFile {
    pub fn new(matrix: Matrix, sensor: impl Into<String>) -> FeatureFile {
        FeatureFile {
            matrix,
            labels: None,
            sensor: sensor.into(),
            seed: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> FeatureFile {
        self.labels = Some(labels);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> FeatureFile {
        self.seed = Some(seed);
        self
    }

    /// Labels as class indices.
    pub fn labels_usize(&self) -> Option<Vec<usize>> {
        self.labels
            .as_ref()
            .map(|l| l.iter().map(|&v| v as usize).collect())
    }

    fn validate(&self, path: &Path) -> Result<()> {
        if self.matrix.nrows() == 0 || self.matrix.ncols() == 0 {
            return Err(corrupt(path, "empty matrix"));
        }
        if self.matrix.iter().any(|v| !v.is_finite()) {
            return Err(corrupt(path, "non-finite matrix entries"));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.matrix.nrows() {
                return Err(corrupt(path, "label count does not match row count"));
            }
        }
        if self.sensor.contains(',') || self.sensor.contains('\n') || self.sensor.contains('\r') {
            return Err(Error::InvalidArgument(format!(
                "sensor name {:?} must not contain commas or line breaks",
                self.sensor
            )));
        }
        Ok(())
    }
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::Corrupt {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Writes the binary form.
pub fn save_binary(ff: &FeatureFile, path: &Path) -> Result<()> {
    ff.validate(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&[DTYPE_F64])?;
    w.write_all(&[u8::from(ff.labels.is_some())])?;
    w.write_all(&[u8::from(ff.seed.is_some())])?;
    w.write_all(&(ff.matrix.nrows() as u64).to_le_bytes())?;
    w.write_all(&(ff.matrix.ncols() as u64).to_le_bytes())?;
    let name = ff.sensor.as_bytes();
    if name.len() > u16::MAX as usize {
        return Err(Error::InvalidArgument("sensor name too long".into()));
    }
    w.write_all(&(name.len() as u16).to_le_bytes())?;
    w.write_all(name)?;
    if let Some(seed) = ff.seed {
        w.write_all(&seed.to_le_bytes())?;
    }
    for v in ff.matrix.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    if let Some(labels) = &ff.labels {
        for &l in labels {
            w.write_all(&l.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the binary form; truncation or a bad magic is a corruption error,
/// never partial data.
pub fn load_binary(path: &Path) -> Result<FeatureFile> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 9];
    read_exact(&mut r, &mut magic, path)?;
    if &magic != MAGIC {
        return Err(corrupt(path, "bad magic (not a feature file?)"));
    }
    let mut flags = [0u8; 3];
    read_exact(&mut r, &mut flags, path)?;
    let [dtype, has_labels, has_seed] = flags;
    if dtype != DTYPE_F64 {
        return Err(corrupt(path, format!("unsupported dtype {dtype}")));
    }
    if has_labels > 1 || has_seed > 1 {
        return Err(corrupt(path, "malformed header flags"));
    }
    let rows = read_u64(&mut r, path)? as usize;
    let cols = read_u64(&mut r, path)? as usize;
    if rows == 0 || cols == 0 || rows.saturating_mul(cols) > (1 << 32) {
        return Err(corrupt(path, format!("implausible shape {rows}x{cols}")));
    }
    let mut len = [0u8; 2];
    read_exact(&mut r, &mut len, path)?;
    let name_len = u16::from_le_bytes(len) as usize;
    let mut name = vec![0u8; name_len];
    read_exact(&mut r, &mut name, path)?;
    let sensor = String::from_utf8(name).map_err(|_| corrupt(path, "sensor name not UTF-8"))?;
    let seed = if has_seed == 1 {
        Some(read_u64(&mut r, path)?)
    } else {
        None
    };

    let mut data = Vec::with_capacity(rows * cols);
    let mut buf = [0u8; 8];
    for _ in 0..rows * cols {
        read_exact(&mut r, &mut buf, path)?;
        data.push(f64::from_le_bytes(buf));
    }
    let matrix = Matrix::from_shape_vec((rows, cols), data)
        .map_err(|e| corrupt(path, format!("shape error: {e}")))?;
    let labels = if has_labels == 1 {
        let mut out = Vec::with_capacity(rows);
        let mut lbuf = [0u8; 4];
        for _ in 0..rows {
            read_exact(&mut r, &mut lbuf, path)?;
            out.push(u32::from_le_bytes(lbuf));
        }
        Some(out)
    } else {
        None
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(corrupt(path, "trailing bytes after payload"));
    }
    let ff = FeatureFile {
        matrix,
        labels,
        sensor,
        seed,
    };
    ff.validate(path)?;
    Ok(ff)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            corrupt(path, "truncated file")
        } else {
            Error::Io(e)
        }
    })
}

fn read_u64<R: Read>(r: &mut R, path: &Path) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf, path)?;
    Ok(u64::from_le_bytes(buf))
}

/// Writes the CSV form.
pub fn save_csv(ff: &FeatureFile, path: &Path) -> Result<()> {
    ff.validate(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    let seed = match ff.seed {
        Some(s) => s.to_string(),
        None => "none".into(),
    };
    writeln!(
        w,
        "CCAPROBE1,rows={},cols={},has_labels={},sensor={},seed={}",
        ff.matrix.nrows(),
        ff.matrix.ncols(),
        u8::from(ff.labels.is_some()),
        ff.sensor,
        seed
    )?;
    for (i, row) in ff.matrix.rows().into_iter().enumerate() {
        let mut line = row.iter().map(|v| v.to_string()).collect::<Vec<_>>();
        if let Some(labels) = &ff.labels {
            line.push(labels[i].to_string());
        }
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the CSV form.
pub fn load_csv(path: &Path) -> Result<FeatureFile> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| corrupt(path, "empty file"))??;
    let mut fields = header.split(',');
    if fields.next() != Some("CCAPROBE1") {
        return Err(corrupt(path, "bad CSV header (not a feature file?)"));
    }
    let mut rows = None;
    let mut cols = None;
    let mut has_labels = None;
    let mut sensor = None;
    let mut seed = None;
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| corrupt(path, format!("malformed header field {field:?}")))?;
        match key {
            "rows" => rows = Some(parse_usize(value, path)?),
            "cols" => cols = Some(parse_usize(value, path)?),
            "has_labels" => has_labels = Some(value == "1"),
            "sensor" => sensor = Some(value.to_string()),
            "seed" => {
                seed = if value == "none" {
                    None
                } else {
                    Some(value.parse::<u64>().map_err(|_| {
                        corrupt(path, format!("bad seed {value:?}"))
                    })?)
                }
            }
            other => return Err(corrupt(path, format!("unknown header key {other:?}"))),
        }
    }
    let rows = rows.ok_or_else(|| corrupt(path, "header missing rows"))?;
    let cols = cols.ok_or_else(|| corrupt(path, "header missing cols"))?;
    let has_labels = has_labels.ok_or_else(|| corrupt(path, "header missing has_labels"))?;
    let sensor = sensor.ok_or_else(|| corrupt(path, "header missing sensor"))?;

    let mut matrix = Matrix::zeros((rows, cols));
    let mut labels = if has_labels { Some(Vec::with_capacity(rows)) } else { None };
    let mut count = 0usize;
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if count >= rows {
            return Err(corrupt(path, "more data rows than the header declares"));
        }
        let parts: Vec<&str> = line.split(',').collect();
        let expect = cols + usize::from(has_labels);
        if parts.len() != expect {
            return Err(corrupt(
                path,
                format!("row {count} has {} fields, expected {expect}", parts.len()),
            ));
        }
        for (j, part) in parts.iter().take(cols).enumerate() {
            matrix[[count, j]] = part
                .parse::<f64>()
                .map_err(|_| corrupt(path, format!("bad number {part:?} in row {count}")))?;
        }
        if let Some(labels) = labels.as_mut() {
            labels.push(parts[cols].parse::<u32>().map_err(|_| {
                corrupt(path, format!("bad label {:?} in row {count}", parts[cols]))
            })?);
        }
        count += 1;
    }
    if count != rows {
        return Err(corrupt(
            path,
            format!("{count} data rows, header declares {rows}"),
        ));
    }
    let ff = FeatureFile {
        matrix,
        labels,
        sensor,
        seed,
    };
    ff.validate(path)?;
    Ok(ff)
}

fn parse_usize(value: &str, path: &Path) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| corrupt(path, format!("bad integer {value:?}")))
}

/// Dispatches on the `.csv` extension, binary otherwise.
pub fn save(ff: &FeatureFile, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        save_csv(ff, path)
    } else {
        save_binary(ff, path)
    }
}

/// Dispatches on the `.csv` extension, binary otherwise.
pub fn load(path: &Path) -> Result<FeatureFile> {
    if path.extension().is_some_and(|e| e == "csv") {
        load_csv(path)
    } else {
        load_binary(path)
    }
}

/// Stores a head as an n_c×(n+1) feature file, bias in the last column.
pub fn save_head(head: &LinearHead, path: &Path) -> Result<()> {
    let (nc, n) = (head.n_classes(), head.input_dim());
    let mut packed = Matrix::zeros((nc, n + 1));
    packed.slice_mut(ndarray::s![.., ..n]).assign(&head.weights);
    packed.column_mut(n).assign(&head.bias);
    save(&FeatureFile::new(packed, "head"), path)
}

/// Loads a head stored by [`save_head`].
pub fn load_head(path: &Path) -> Result<LinearHead> {
    let ff = load(path)?;
    let cols = ff.matrix.ncols();
    if cols < 2 {
        return Err(corrupt(path, "head file needs at least one weight column"));
    }
    let n = cols - 1;
    let weights = ff.matrix.slice(ndarray::s![.., ..n]).to_owned();
    let bias: Array1<f64> = ff.matrix.column(n).to_owned();
    LinearHead::new(weights, bias)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("ccaprobe-ff-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn random_ff(seed: u64, labels: bool) -> FeatureFile {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = rng.gen_range(1..20);
        let cols = rng.gen_range(1..10);
        let mut m = Matrix::zeros((rows, cols));
        for v in m.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal) * 10f64.powi(rng.gen_range(-8..8));
        }
        let mut ff = FeatureFile::new(m, "sensor-x").with_seed(seed);
        if labels {
            ff = ff.with_labels((0..rows as u32).collect());
        }
        ff
    }

    #[test]
    fn binary_round_trip_is_bitwise() {
        for seed in [1u64, 2, 3] {
            let ff = random_ff(seed, seed % 2 == 0);
            let path = tmp(&format!("rt-{seed}.bin"));
            save_binary(&ff, &path).unwrap();
            let back = load_binary(&path).unwrap();
            assert_eq!(ff, back);
        }
    }

    #[test]
    fn csv_matches_binary_values() {
        let ff = random_ff(9, true);
        let bin = tmp("x.bin");
        let csv = tmp("x.csv");
        save_binary(&ff, &bin).unwrap();
        save_csv(&ff, &csv).unwrap();
        let from_bin = load_binary(&bin).unwrap();
        let from_csv = load_csv(&csv).unwrap();
        assert_eq!(from_bin, from_csv);
        for (a, b) in from_bin.matrix.iter().zip(from_csv.matrix.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_file_is_a_corruption_error() {
        let ff = random_ff(4, true);
        let path = tmp("trunc.bin");
        save_binary(&ff, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        match load_binary(&path) {
            Err(Error::Corrupt { .. }) => {}
            other => panic!("expected corruption error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let path = tmp("magic.bin");
        std::fs::write(&path, b"NOTAFILE--------------------").unwrap();
        assert!(matches!(load_binary(&path), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let ff = random_ff(5, false);
        let path = tmp("trail.bin");
        save_binary(&ff, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_binary(&path), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn head_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut w = Matrix::zeros((3, 5));
        let mut b = Array1::zeros(3);
        for v in w.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for v in b.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let head = LinearHead::new(w, b).unwrap();
        let path = tmp("head.bin");
        save_head(&head, &path).unwrap();
        let back = load_head(&path).unwrap();
        assert_eq!(head.weights, back.weights);
        assert_eq!(head.bias, back.bias);
    }

    #[test]
    fn comma_in_sensor_name_is_rejected() {
        let ff = FeatureFile::new(Matrix::eye(2), "a,b");
        assert!(save_csv(&ff, &tmp("comma.csv")).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// Both encodings round-trip arbitrary finite payloads bit-exactly.
        #[test]
        fn round_trip_any_payload(
            values in proptest::collection::vec(-1e100_f64..1e100, 1..40),
            cols in 1usize..6,
            labeled in any::<bool>(),
        ) {
            let rows = values.len().div_ceil(cols);
            let mut m = Matrix::zeros((rows, cols));
            for (i, v) in values.iter().enumerate() {
                m[[i / cols, i % cols]] = *v;
            }
            let mut ff = FeatureFile::new(m, "p");
            if labeled {
                ff = ff.with_labels(vec![7; rows]);
            }
            let bin = tmp(&format!("prop-{rows}-{cols}-{labeled}.bin"));
            let csv = tmp(&format!("prop-{rows}-{cols}-{labeled}.csv"));
            save_binary(&ff, &bin).unwrap();
            save_csv(&ff, &csv).unwrap();
            let b = load_binary(&bin).unwrap();
            let c = load_csv(&csv).unwrap();
            prop_assert_eq!(&b, &ff);
            for (x, y) in c.matrix.iter().zip(ff.matrix.iter()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
