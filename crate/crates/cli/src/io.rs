//! File formats: the TNSR1 dense tensor container, observation CSVs and
//! result CSVs.
//!
//! TNSR1 layout: magic bytes `TNSR1\n`, one ASCII header line
//! `k d_1 d_2 ... d_k\n`, then `d_1*...*d_k` little-endian IEEE f64
//! values in storage order (last index fastest). Round-trips are
//! bit-exact.
//!
//! Observation CSV layout: header `i_0,...,i_{k-1},y`, one observation
//! per row, 0-based indices, `y` in shortest round-trip decimal form.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use lrtc_core::{Dataset, MultiIndex, Tensor};

const MAGIC: &[u8; 6] = b"TNSR1\n";
const MAX_TENSOR_ENTRIES: u64 = 1 << 31;

pub fn write_tensor(path: &Path, t: &Tensor) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC)?;
    let dims: Vec<String> = t.dims().iter().map(|d| d.to_string()).collect();
    writeln!(w, "{} {}", t.order(), dims.join(" "))?;
    for v in t.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)
        .with_context(|| format!("reading magic of {}", path.display()))?;
    if &magic != MAGIC {
        bail!("{}: bad magic, not a TNSR1 file", path.display());
    }
    let mut header = String::new();
    r.read_line(&mut header)
        .with_context(|| format!("reading header of {}", path.display()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.is_empty() {
        bail!("{}: empty header", path.display());
    }
    let k: usize = fields[0].parse().context("parsing tensor order")?;
    if fields.len() != k + 1 {
        bail!(
            "{}: header promises {} dims but carries {}",
            path.display(),
            k,
            fields.len() - 1
        );
    }
    let dims: Vec<usize> = fields[1..]
        .iter()
        .map(|f| f.parse::<usize>().context("parsing dimension"))
        .collect::<Result<_>>()?;
    let mut total: u64 = 1;
    for &d in &dims {
        if d == 0 {
            bail!("{}: zero-extent mode", path.display());
        }
        total = total
            .checked_mul(d as u64)
            .filter(|&t| t <= MAX_TENSOR_ENTRIES)
            .with_context(|| format!("{}: dimension product overflows", path.display()))?;
    }
    let mut values = Vec::with_capacity(total as usize);
    let mut buf = [0u8; 8];
    for i in 0..total {
        r.read_exact(&mut buf)
            .with_context(|| format!("{}: payload truncated at entry {i}", path.display()))?;
        values.push(f64::from_le_bytes(buf));
    }
    if r.read(&mut buf[..1])? != 0 {
        bail!("{}: trailing bytes after payload", path.display());
    }
    Ok(Tensor::new(dims, values)?)
}

fn obs_header(k: usize) -> String {
    let mut cols: Vec<String> = (0..k).map(|j| format!("i_{j}")).collect();
    cols.push("y".into());
    cols.join(",")
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", obs_header(data.dims().len()))?;
    for (omega, y) in data.obs() {
        let coords: Vec<String> = omega.coords().iter().map(|c| c.to_string()).collect();
        writeln!(w, "{},{}", coords.join(","), y)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path, dims: &[usize]) -> Result<Dataset> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let r = BufReader::new(file);
    let k = dims.len();
    let expected_header = obs_header(k);
    let mut obs = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if lineno == 0 {
            if line.trim_end() != expected_header {
                bail!(
                    "{}: header {:?} does not match expected {:?}",
                    path.display(),
                    line.trim_end(),
                    expected_header
                );
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != k + 1 {
            bail!(
                "{}:{}: expected {} fields, got {}",
                path.display(),
                lineno + 1,
                k + 1,
                fields.len()
            );
        }
        let coords: Vec<usize> = fields[..k]
            .iter()
            .map(|f| {
                f.parse::<usize>()
                    .with_context(|| format!("{}:{}: bad index {f:?}", path.display(), lineno + 1))
            })
            .collect::<Result<_>>()?;
        let y: f64 = fields[k].parse().with_context(|| {
            format!(
                "{}:{}: bad value {:?}",
                path.display(),
                lineno + 1,
                fields[k]
            )
        })?;
        obs.push((MultiIndex::new(coords), y));
    }
    Ok(Dataset::new(dims.to_vec(), obs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lrtc_core::obs::{full_dataset, sample_dataset, NoiseSpec};
    use lrtc_core::rng::stream_rng;
    use rand::Rng;

    fn random_tensor(dims: &[usize], seed: u64) -> Tensor {
        let mut rng = stream_rng(seed, 0);
        let len: usize = dims.iter().product();
        let vals: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        Tensor::new(dims.to_vec(), vals).unwrap()
    }

    #[test]
    fn tensor_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tnsr");
        let t = random_tensor(&[3, 4, 2], 11);
        write_tensor(&path, &t).unwrap();
        let back = read_tensor(&path).unwrap();
        assert_eq!(back.dims(), t.dims());
        for (a, b) in back.values().iter().zip(t.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn tensor_read_rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tnsr");
        std::fs::write(&path, b"NOPE!\n2 2 2\n").unwrap();
        assert!(read_tensor(&path).is_err());
    }

    #[test]
    fn tensor_read_rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.tnsr");
        let mut f = File::create(&path).unwrap();
        f.write_all(MAGIC).unwrap();
        writeln!(f, "2 2 2").unwrap();
        f.write_all(&1.0f64.to_le_bytes()).unwrap(); // 1 of 4 values
        drop(f);
        let err = read_tensor(&path).unwrap_err();
        assert!(format!("{err:#}").contains("truncated"), "{err:#}");
    }

    #[test]
    fn tensor_read_rejects_header_payload_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("extra.tnsr");
        let mut f = File::create(&path).unwrap();
        f.write_all(MAGIC).unwrap();
        writeln!(f, "2 2 2").unwrap();
        for _ in 0..5 {
            f.write_all(&0.5f64.to_le_bytes()).unwrap();
        }
        drop(f);
        assert!(read_tensor(&path).is_err());
    }

    #[test]
    fn tensor_read_rejects_dim_overflow() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("huge.tnsr");
        let mut f = File::create(&path).unwrap();
        f.write_all(MAGIC).unwrap();
        writeln!(f, "3 9000000 9000000 9000000").unwrap();
        drop(f);
        let err = read_tensor(&path).unwrap_err();
        assert!(format!("{err:#}").contains("overflow"), "{err:#}");
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        let t = random_tensor(&[3, 2, 4], 5);
        let mut rng = stream_rng(2, 1);
        let data = sample_dataset(&t, 50, &NoiseSpec::new(0.3).unwrap(), &mut rng).unwrap();
        write_dataset(&path, &data).unwrap();
        let back = read_dataset(&path, t.dims()).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn dataset_single_row_and_range_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        std::fs::write(&path, "i_0,i_1,y\n1,0,0.25\n").unwrap();
        let data = read_dataset(&path, &[2, 2]).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data.obs()[0].1, 0.25);

        // index equal to the extent is out of range (0-based)
        std::fs::write(&path, "i_0,i_1,y\n2,0,0.25\n").unwrap();
        assert!(read_dataset(&path, &[2, 2]).is_err());

        // header mismatch
        std::fs::write(&path, "a,b,y\n0,0,0.25\n").unwrap();
        assert!(read_dataset(&path, &[2, 2]).is_err());
    }

    #[test]
    fn dataset_values_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exact.csv");
        let t = random_tensor(&[2, 2], 7);
        let data = full_dataset(&t);
        write_dataset(&path, &data).unwrap();
        let back = read_dataset(&path, t.dims()).unwrap();
        for ((_, a), (_, b)) in back.obs().iter().zip(data.obs()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
