//! CSV serialization of sampled paths and grid masks.
//!
//! Path format: header `t,role,payload...`. Vector role uses one column
//! per coordinate (`t,role,c0,c1,...`); set and measure roles use a
//! single JSON payload column. Floats are written with 17 significant
//! digits so every value round-trips bit-exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{input_err, Result};
use crate::metric::{FiniteMeasure, FiniteSet, MetricValue, Role, VectorPoint};
use crate::path::{GridMask, SampledPath};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(serde::Serialize, Deserialize)]
struct MeasurePayload {
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

pub fn write_path_csv(path: &SampledPath, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match path.role() {
        Role::Vector => {
            let mut header = vec!["t".to_string(), "role".to_string()];
            header.extend((0..path.dim()).map(|i| format!("c{i}")));
            w.write_record(&header)?;
            for i in 0..path.len() {
                let MetricValue::Vector(v) = path.value(i) else { unreachable!() };
                let mut rec = vec![fmt(path.time(i)), "vector".to_string()];
                rec.extend(v.coords().iter().map(|c| fmt(*c)));
                w.write_record(&rec)?;
            }
        }
        Role::Set => {
            w.write_record(["t", "role", "payload"])?;
            for i in 0..path.len() {
                let MetricValue::Set(s) = path.value(i) else { unreachable!() };
                let pts: Vec<&[f64]> = s.points().iter().map(|p| p.coords()).collect();
                w.write_record([fmt(path.time(i)), "set".to_string(), serde_json::to_string(&pts)?])?;
            }
        }
        Role::Measure => {
            w.write_record(["t", "role", "payload"])?;
            for i in 0..path.len() {
                let MetricValue::Measure(m) = path.value(i) else { unreachable!() };
                let payload = MeasurePayload {
                    support: m.support().iter().map(|p| p.coords().to_vec()).collect(),
                    weights: m.weights().to_vec(),
                };
                w.write_record([
                    fmt(path.time(i)),
                    "measure".to_string(),
                    serde_json::to_string(&payload)?,
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_path_csv(input: impl Read) -> Result<SampledPath> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 3 || &header[0] != "t" || &header[1] != "role" {
        return input_err("path CSV needs header t,role,payload...");
    }
    let mut times: Vec<f64> = Vec::new();
    let mut values: Vec<MetricValue> = Vec::new();
    let mut role: Option<Role> = None;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return input_err("ragged CSV record");
        }
        let t: f64 = rec[0]
            .parse()
            .map_err(|_| crate::error::Error::Format(format!("bad time value {:?}", &rec[0])))?;
        let row_role = match &rec[1] {
            "vector" => Role::Vector,
            "set" => Role::Set,
            "measure" => Role::Measure,
            other => return input_err(format!("unknown role {other:?}")),
        };
        match role {
            None => role = Some(row_role),
            Some(r0) if r0 != row_role => return input_err("mixed roles in one path file"),
            _ => {}
        }
        let value = match row_role {
            Role::Vector => {
                let mut coords = Vec::with_capacity(rec.len() - 2);
                for c in rec.iter().skip(2) {
                    coords.push(c.parse().map_err(|_| {
                        crate::error::Error::Format(format!("bad coordinate {c:?}"))
                    })?);
                }
                MetricValue::Vector(VectorPoint::new(coords)?)
            }
            Role::Set => {
                let pts: Vec<Vec<f64>> = serde_json::from_str(&rec[2])?;
                let pts = pts
                    .into_iter()
                    .map(VectorPoint::new)
                    .collect::<Result<Vec<_>>>()?;
                MetricValue::Set(FiniteSet::new(pts)?)
            }
            Role::Measure => {
                let payload: MeasurePayload = serde_json::from_str(&rec[2])?;
                let support = payload
                    .support
                    .into_iter()
                    .map(VectorPoint::new)
                    .collect::<Result<Vec<_>>>()?;
                MetricValue::Measure(FiniteMeasure::new(support, payload.weights)?)
            }
        };
        times.push(t);
        values.push(value);
    }
    grid_from_times(&times).and_then(|(t0, h)| SampledPath::new(t0, h, values))
}

/// Reconstructs (t0, h) from the written time column and validates
/// uniformity. h is taken from the full span to avoid amplifying the
/// rounding of a single step.
fn grid_from_times(times: &[f64]) -> Result<(f64, f64)> {
    if times.len() < 2 {
        return input_err("path needs at least 2 samples");
    }
    let t0 = times[0];
    let n = times.len();
    let h = (times[n - 1] - t0) / (n - 1) as f64;
    if !(h.is_finite() && h > 0.0) {
        return input_err("time column is not increasing");
    }
    for (i, t) in times.iter().enumerate() {
        if (t - (t0 + i as f64 * h)).abs() > 1e-6 * h {
            return input_err(format!("non-uniform time grid at row {i}"));
        }
    }
    Ok((t0, h))
}

pub fn write_mask_csv(mask: &GridMask, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "mask"])?;
    for (i, flag) in mask.flags().iter().enumerate() {
        let t = mask.t0() + i as f64 * mask.h();
        w.write_record([fmt(t), if *flag { "1".into() } else { "0".to_string() }])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_mask_csv(input: impl Read) -> Result<GridMask> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() != 2 || &header[0] != "t" || &header[1] != "mask" {
        return input_err("mask CSV needs header t,mask");
    }
    let mut times = Vec::new();
    let mut flags = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let t: f64 = rec[0]
            .parse()
            .map_err(|_| crate::error::Error::Format(format!("bad time value {:?}", &rec[0])))?;
        let flag = match &rec[1] {
            "0" => false,
            "1" => true,
            other => return input_err(format!("mask flag must be 0 or 1, got {other:?}")),
        };
        times.push(t);
        flags.push(flag);
    }
    grid_from_times(&times).and_then(|(t0, h)| GridMask::new(t0, h, flags))
}

pub fn write_path_file(path: &SampledPath, file: impl AsRef<Path>) -> Result<()> {
    write_path_csv(path, File::create(file)?)
}

pub fn read_path_file(file: impl AsRef<Path>) -> Result<SampledPath> {
    read_path_csv(File::open(file)?)
}

pub fn write_mask_file(mask: &GridMask, file: impl AsRef<Path>) -> Result<()> {
    write_mask_csv(mask, File::create(file)?)
}

pub fn read_mask_file(file: impl AsRef<Path>) -> Result<GridMask> {
    read_mask_csv(File::open(file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn roundtrip(path: &SampledPath) -> SampledPath {
        let mut buf = Vec::new();
        write_path_csv(path, &mut buf).unwrap();
        read_path_csv(buf.as_slice()).unwrap()
    }

    #[test]
    fn vector_roundtrip_bit_exact() {
        let values: Vec<MetricValue> = (0..50)
            .map(|i| {
                let t = 0.37 + i as f64 * 0.013;
                MetricValue::Vector(
                    VectorPoint::new(vec![t.sin(), (1.0 / 3.0) * t, -t.exp()]).unwrap(),
                )
            })
            .collect();
        let path = SampledPath::new(-3.2, 0.013, values).unwrap();
        let back = roundtrip(&path);
        assert_eq!(back.values(), path.values());
        assert_eq!(back.t0(), path.t0());
        assert!((back.h() - path.h()).abs() <= 1e-15 * path.h());
    }

    #[test]
    fn set_roundtrip_bit_exact() {
        let values: Vec<MetricValue> = (0..20)
            .map(|i| {
                let x = (i as f64) / 7.0;
                MetricValue::Set(
                    FiniteSet::new(vec![
                        VectorPoint::new(vec![x, -x]).unwrap(),
                        VectorPoint::new(vec![x + 1.0, x * x]).unwrap(),
                    ])
                    .unwrap(),
                )
            })
            .collect();
        let path = SampledPath::new(0.0, 0.5, values).unwrap();
        assert_eq!(roundtrip(&path).values(), path.values());
    }

    #[test]
    fn measure_roundtrip_bit_exact() {
        let values: Vec<MetricValue> = (0..20)
            .map(|i| {
                let x = (i as f64) * 0.1 + 0.01;
                let w0 = 0.25 + 0.5 * (x.sin() * 0.5 + 0.5) * 0.5;
                MetricValue::Measure(
                    FiniteMeasure::new(
                        vec![
                            VectorPoint::new(vec![x]).unwrap(),
                            VectorPoint::new(vec![x + 2.0]).unwrap(),
                        ],
                        vec![w0, 1.0 - w0],
                    )
                    .unwrap(),
                )
            })
            .collect();
        let path = SampledPath::new(1.0, 0.25, values).unwrap();
        assert_eq!(roundtrip(&path).values(), path.values());
    }

    #[test]
    fn mask_roundtrip() {
        let flags: Vec<bool> = (0..40).map(|i| i % 3 == 0).collect();
        let mask = GridMask::new(0.5, 0.05, flags).unwrap();
        let mut buf = Vec::new();
        write_mask_csv(&mask, &mut buf).unwrap();
        let back = read_mask_csv(buf.as_slice()).unwrap();
        assert_eq!(back.flags(), mask.flags());
        assert_eq!(back.t0(), mask.t0());
    }

    #[test]
    fn rejects_bad_header_and_mixed_roles() {
        let bad = "time,role,c0\n0,vector,1\n1,vector,2\n";
        assert!(read_path_csv(bad.as_bytes()).is_err());
        let mixed = "t,role,payload\n0,set,[[1.0]]\n1,measure,\"{\"\"support\"\":[[0.0]],\"\"weights\"\":[1.0]}\"\n";
        assert!(matches!(
            read_path_csv(mixed.as_bytes()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn rejects_non_uniform_grid() {
        let bad = "t,role,c0\n0,vector,1\n1,vector,2\n2.5,vector,3\n";
        assert!(read_path_csv(bad.as_bytes()).is_err());
    }
}
