//! CSV input and output: samples (`x,y`) and sampled estimates (`t,value`).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::SampledFunction;
use crate::model::Sample;

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize)]
struct EstimateRow {
    t: f64,
    value: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

pub fn write_sample<W: Write>(sample: &Sample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (&x, &y) in sample.xs.iter().zip(&sample.ys) {
        w.serialize(SampleRow { x, y }).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `x,y` sample. The rows must sit on the design `i/n` in order.
pub fn read_sample<R: Read>(input: R) -> Result<Sample> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y"] {
        return Err(Error::Csv(format!("expected header `x,y`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for row in r.deserialize::<SampleRow>() {
        let row = row.map_err(csv_err)?;
        xs.push(row.x);
        ys.push(row.y);
    }
    let sample = Sample::from_responses(ys, None)?;
    let n = sample.n as f64;
    if let Some(i) = xs.iter().zip(&sample.xs).position(|(a, b)| (a - b).abs() > 1e-9 / n.max(1.0) + 1e-12) {
        return Err(Error::Csv(format!(
            "row {} has x = {}, expected the design point {}",
            i + 1,
            xs[i],
            sample.xs[i]
        )));
    }
    Ok(sample)
}

pub fn write_estimate<W: Write>(est: &SampledFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (&t, &value) in est.grid.iter().zip(&est.values) {
        w.serialize(EstimateRow { t, value }).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One value per line under the given header.
pub fn write_column<W: Write>(header: &str, values: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([header]).map_err(csv_err)?;
    for v in values {
        w.write_record([v.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
