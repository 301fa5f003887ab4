//! Binary dataset format and CSV export.
//!
//! Layout (little-endian throughout):
//!
//! ```text
//! magic  b"MONO"
//! u8     version (0x01)
//! u32    n
//! u64    sample count
//! u64    seed
//! u64    attempts
//! f64    neg_tol
//! per sample: u8 label (0/1), n*n f64 entries row-major
//! ```
//!
//! Round trips are bit-exact on entries and labels. `sample_id` is not
//! stored; loading assigns sequential ids.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use monotone_core::datagen::{Dataset, DatasetMeta, LabeledSample, GENERATOR_VERSION};
use monotone_core::linalg::SquareMatrix;

use crate::error::LabError;

const MAGIC: [u8; 4] = *b"MONO";
const VERSION: u8 = 0x01;

pub fn save_dataset(d: &Dataset, path: &Path) -> Result<(), LabError> {
    let file = File::create(path).map_err(LabError::io(path))?;
    let mut w = BufWriter::new(file);
    let mut write = |bytes: &[u8]| w.write_all(bytes).map_err(LabError::io(path));
    write(&MAGIC)?;
    write(&[VERSION])?;
    write(&(d.n as u32).to_le_bytes())?;
    write(&(d.samples.len() as u64).to_le_bytes())?;
    write(&d.meta.seed.to_le_bytes())?;
    write(&d.meta.attempts.to_le_bytes())?;
    write(&d.meta.neg_tol.to_le_bytes())?;
    for s in &d.samples {
        write(&[u8::from(s.monotone)])?;
        for v in s.matrix.entries() {
            write(&v.to_le_bytes())?;
        }
    }
    w.flush().map_err(LabError::io(path))
}

struct Reader<'a> {
    r: BufReader<File>,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn exact<const N: usize>(&mut self) -> Result<[u8; N], LabError> {
        let mut buf = [0u8; N];
        self.r.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                LabError::Format(format!("{}: truncated file", self.path.display()))
            } else {
                LabError::Io {
                    path: self.path.to_path_buf(),
                    source: e,
                }
            }
        })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8, LabError> {
        Ok(self.exact::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32, LabError> {
        Ok(u32::from_le_bytes(self.exact::<4>()?))
    }

    fn u64(&mut self) -> Result<u64, LabError> {
        Ok(u64::from_le_bytes(self.exact::<8>()?))
    }

    fn f64(&mut self) -> Result<f64, LabError> {
        Ok(f64::from_le_bytes(self.exact::<8>()?))
    }
}

pub fn load_dataset(path: &Path) -> Result<Dataset, LabError> {
    let file = File::open(path).map_err(LabError::io(path))?;
    let mut r = Reader {
        r: BufReader::new(file),
        path,
    };
    let magic = r.exact::<4>()?;
    if magic != MAGIC {
        return Err(LabError::Format(format!(
            "{}: bad magic {magic:02x?}",
            path.display()
        )));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(LabError::Format(format!(
            "{}: unsupported version {version}",
            path.display()
        )));
    }
    let n = r.u32()? as usize;
    if !(2..=64).contains(&n) {
        return Err(LabError::DimensionMismatch(format!(
            "{}: matrix dimension {n} outside supported range",
            path.display()
        )));
    }
    let count = r.u64()? as usize;
    let seed = r.u64()?;
    let attempts = r.u64()?;
    let neg_tol = r.f64()?;

    let mut samples = Vec::with_capacity(count);
    let mut monotone_count = 0usize;
    for i in 0..count {
        let label = match r.u8()? {
            0 => false,
            1 => true,
            other => {
                return Err(LabError::Format(format!(
                    "{}: sample {i} has label byte {other}",
                    path.display()
                )))
            }
        };
        let mut entries = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            entries.push(r.f64()?);
        }
        let matrix = SquareMatrix::new(n, entries)
            .map_err(|e| LabError::Format(format!("{}: sample {i}: {e}", path.display())))?;
        if label {
            monotone_count += 1;
        }
        samples.push(LabeledSample {
            matrix,
            monotone: label,
            sample_id: i as u64,
        });
    }
    // Trailing garbage means the header count was inconsistent.
    let mut probe = [0u8; 1];
    match r.r.read(&mut probe) {
        Ok(0) => {}
        Ok(_) => {
            return Err(LabError::DimensionMismatch(format!(
                "{}: file longer than its declared {count} samples",
                path.display()
            )))
        }
        Err(e) => {
            return Err(LabError::Io {
                path: path.to_path_buf(),
                source: e,
            })
        }
    }
    let non_monotone_count = count - monotone_count;
    Ok(Dataset {
        n,
        samples,
        meta: DatasetMeta {
            seed,
            attempts,
            neg_tol,
            monotone_count,
            non_monotone_count,
            generator_version: GENERATOR_VERSION,
        },
    })
}

/// CSV export: `id,label,a_1_1,...,a_n_n` with 1-based indices.
pub fn export_csv(d: &Dataset, path: &Path) -> Result<(), LabError> {
    let file = File::create(path).map_err(LabError::io(path))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("id,label");
    for i in 1..=d.n {
        for j in 1..=d.n {
            header.push_str(&format!(",a_{i}_{j}"));
        }
    }
    header.push('\n');
    w.write_all(header.as_bytes()).map_err(LabError::io(path))?;
    for s in &d.samples {
        let mut line = format!("{},{}", s.sample_id, u8::from(s.monotone));
        for v in s.matrix.entries() {
            line.push(',');
            line.push_str(&format!("{v}"));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}
