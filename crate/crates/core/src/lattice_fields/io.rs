//! Text grid format for [`FieldSample`].
//!
//! ```text
//! # {"format":"ntcp-field","version":1,"d":2,"n":1,"seed":7,"model":{...}}
//! 0,1,0
//! 1,1,0
//! 0,0,1
//! ```
//!
//! The first line is `# ` followed by a JSON header. Each following line is
//! one row along the last axis (`2n + 1` comma-separated values); rows come
//! in row-major order of the leading axes. Values are written in the
//! shortest form that parses back to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cube::LatticeCube;
use super::model::FieldModel;
use super::sample::FieldSample;
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "ntcp-field";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    d: usize,
    n: usize,
    seed: u64,
    model: FieldModel,
}

pub fn encode_sample(sample: &FieldSample) -> String {
    let header = Header {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        d: sample.cube.d,
        n: sample.cube.n,
        seed: sample.seed,
        model: sample.model,
    };
    let mut out = String::with_capacity(sample.len() * 3 + 128);
    out.push_str("# ");
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for row in sample.values.chunks(sample.cube.side()) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn decode_sample(text: &str) -> Result<FieldSample> {
    let mut lines = text.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty sample file".into()))?;
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Format("missing '# ' header line".into()))?;
    let header: Header =
        serde_json::from_str(json).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.format != FORMAT_TAG || header.version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    let cube = LatticeCube::new(header.d, header.n)?;
    if header.model.dim != cube.d {
        return Err(Error::Format("header model dimension disagrees with d".into()));
    }
    let side = cube.side();
    let mut values = Vec::with_capacity(cube.len());
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let before = values.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {row}: bad value {field:?}")))?;
            values.push(v);
        }
        if values.len() - before != side {
            return Err(Error::Format(format!(
                "row {row} has {} values, expected {side}",
                values.len() - before
            )));
        }
    }
    FieldSample::from_values(cube, values, header.model, header.seed).map_err(|e| match e {
        Error::Shape(msg) => Error::Format(msg),
        other => other,
    })
}

pub fn write_sample(path: &Path, sample: &FieldSample) -> Result<()> {
    fs::write(path, encode_sample(sample)).map_err(|e| Error::io(path, e))
}

pub fn read_sample(path: &Path) -> Result<FieldSample> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_sample(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_fields::model::FieldKind;
    use crate::lattice_fields::sample::sample_field;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let m = FieldModel::iid(2, 0.5).unwrap();
        let s = FieldSample::from_values(
            LatticeCube::new(2, 1).unwrap(),
            vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            m,
            7,
        )
        .unwrap();
        let text = encode_sample(&s);
        let body: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(body, vec!["0,1,0", "1,1,0", "0,0,1"]);
        assert!(text.starts_with("# {\"format\":\"ntcp-field\",\"version\":1,\"d\":2,\"n\":1,\"seed\":7,"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(decode_sample(""), Err(Error::Format(_))));
        assert!(matches!(decode_sample("0,1\n"), Err(Error::Format(_))));
        let m = FieldModel::iid(1, 0.5).unwrap();
        let s = FieldSample::from_values(LatticeCube::new(1, 1).unwrap(), vec![0.0, 1.0, 1.0], m, 1).unwrap();
        let text = encode_sample(&s);
        let short = text.replace("0,1,1", "0,1");
        assert!(matches!(decode_sample(&short), Err(Error::Format(_))));
        let bad = text.replace("0,1,1", "0,x,1");
        assert!(matches!(decode_sample(&bad), Err(Error::Format(_))));
        let out_of_range = text.replace("0,1,1", "0,2,1");
        assert!(matches!(decode_sample(&out_of_range), Err(Error::Format(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let m = FieldModel::new(3, FieldKind::MovingWindowLevels { radius: 1, theta: 0.3, levels: 7 }).unwrap();
        let s = sample_field(&m, LatticeCube::new(3, 4).unwrap(), u64::MAX).unwrap();
        write_sample(&path, &s).unwrap();
        assert_eq!(read_sample(&path).unwrap(), s);
        assert!(matches!(read_sample(&dir.path().join("missing")), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn bit_exact_round_trip(values in proptest::collection::vec(0.0f64..=1.0, 25), seed in any::<u64>()) {
            let m = FieldModel::iid(2, 0.5).unwrap();
            let s = FieldSample::from_values(LatticeCube::new(2, 2).unwrap(), values, m, seed).unwrap();
            let back = decode_sample(&encode_sample(&s)).unwrap();
            prop_assert_eq!(
                back.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                s.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            prop_assert_eq!(back, s);
        }
    }
}
