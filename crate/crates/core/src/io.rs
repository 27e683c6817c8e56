//! File formats: parameter and report JSON, spectrum/plot/step CSV, and the
//! `fmin,fmax,n` / `nx1,nx2,nx3,nr` argument strings.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::impedance::{log_grid, ImpedanceSpectrum};
use crate::oracle::{Mesh, StepTrace};
use crate::params::{validate, FullCellParameters, GroupedParameters};

pub const SCHEMA_VERSION: &str = "1";

pub const SPECTRUM_HEADER: [&str; 3] = ["freq_hz", "re_ohm", "im_ohm"];
pub const PLOT_HEADER: [&str; 6] = [
    "freq_hz",
    "re_ohm",
    "neg_im_ohm",
    "mag_ohm",
    "phase_deg",
    "log10_freq_hz",
];
pub const STEP_HEADER: [&str; 2] = ["time_s", "voltage_v"];

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes `value` as a JSON object with `schema_version` added.
pub fn to_document<T: Serialize>(value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    match &mut v {
        Value::Object(map) => {
            map.insert("schema_version".into(), Value::String(SCHEMA_VERSION.into()));
            Ok(v)
        }
        _ => Err(Error::Schema("document root must be an object".into())),
    }
}

/// Inverse of [`to_document`]. A missing `schema_version` is tolerated,
/// a different one is not.
pub fn from_document<T: DeserializeOwned>(mut v: Value) -> Result<T> {
    let Value::Object(map) = &mut v else {
        return Err(Error::Schema("document root must be an object".into()));
    };
    strip_version(map)?;
    serde_json::from_value(v).map_err(|e| Error::Schema(e.to_string()))
}

fn strip_version(map: &mut Map<String, Value>) -> Result<()> {
    match map.remove("schema_version") {
        None => Ok(()),
        Some(Value::String(s)) if s == SCHEMA_VERSION => Ok(()),
        Some(other) => Err(Error::Schema(format!(
            "unsupported schema_version {other}, expected \"{SCHEMA_VERSION}\""
        ))),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &to_document(value)?)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let v: Value = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    from_document(v)
}

/// Reads and validates a physical parameter record.
pub fn read_full_parameters(path: &Path) -> Result<FullCellParameters> {
    let p: FullCellParameters = read_json(path)?;
    validate(&p).into_result()?;
    Ok(p)
}

pub fn read_grouped_parameters(path: &Path) -> Result<GroupedParameters> {
    let g: GroupedParameters = read_json(path)?;
    g.validate()?;
    Ok(g)
}

pub fn write_spectrum_to<W: Write>(w: W, spec: &ImpedanceSpectrum) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let weights = spec.weights();
    let mut header = SPECTRUM_HEADER.to_vec();
    if weights.is_some() {
        header.push("weight");
    }
    out.write_record(&header)?;
    for (i, (f, z)) in spec.freqs().iter().zip(spec.z()).enumerate() {
        let mut row = vec![fmt(*f), fmt(z.re), fmt(z.im)];
        if let Some(w) = weights {
            row.push(fmt(w[i]));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Rows may come in any frequency order; the result is sorted.
pub fn read_spectrum_from<R: Read>(r: R) -> Result<ImpedanceSpectrum> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let weighted = match header.as_slice() {
        [a, b, c] if [a, b, c] == SPECTRUM_HEADER => false,
        [a, b, c, d] if [a, b, c] == SPECTRUM_HEADER && d == "weight" => true,
        _ => {
            return Err(Error::Schema(format!(
                "spectrum header must be freq_hz,re_ohm,im_ohm[,weight], got {}",
                header.join(",")
            )))
        }
    };
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            let field = rec.get(k).unwrap_or("");
            f64::from_str(field)
                .map_err(|_| Error::Schema(format!("row {}: {} = {field:?} is not a number", line + 1, header[k])))
        };
        let w = if weighted { Some(num(3)?) } else { None };
        points.push((num(0)?, Complex64::new(num(1)?, num(2)?), w));
    }
    if points.is_empty() {
        return Err(Error::Empty("spectrum"));
    }
    ImpedanceSpectrum::from_unsorted(points)
}

pub fn write_spectrum(path: &Path, spec: &ImpedanceSpectrum) -> Result<()> {
    write_spectrum_to(File::create(path)?, spec)
}

pub fn read_spectrum(path: &Path) -> Result<ImpedanceSpectrum> {
    read_spectrum_from(BufReader::new(File::open(path)?))
}

/// Nyquist (`re`, `−im`) and Bode (magnitude, phase) columns.
pub fn write_plot_to<W: Write>(w: W, spec: &ImpedanceSpectrum) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PLOT_HEADER)?;
    for (f, z) in spec.freqs().iter().zip(spec.z()) {
        out.write_record([
            fmt(*f),
            fmt(z.re),
            fmt(-z.im),
            fmt(z.norm()),
            fmt(z.arg().to_degrees()),
            fmt(f.log10()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_step_to<W: Write>(w: W, trace: &StepTrace) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(STEP_HEADER)?;
    for (t, v) in trace.times.iter().zip(&trace.voltage) {
        out.write_record([fmt(*t), fmt(*v)])?;
    }
    out.flush()?;
    Ok(())
}

/// `fmin,fmax,n`, log-spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        if !(self.f_min > 0.0 && self.f_min < self.f_max) || self.points < 2 {
            return Err(Error::InvalidOption(format!(
                "need 0 < f_min < f_max and points >= 2, got {},{},{}",
                self.f_min, self.f_max, self.points
            )));
        }
        log_grid(self.f_min, self.f_max, self.points)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidOption(format!("expected fmin,fmax,n, got {s:?}"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b, n] = parts.as_slice() else { return Err(bad()) };
        let g = GridSpec {
            f_min: a.parse().map_err(|_| bad())?,
            f_max: b.parse().map_err(|_| bad())?,
            points: n.parse().map_err(|_| bad())?,
        };
        g.frequencies()?;
        Ok(g)
    }
}

impl FromStr for Mesh {
    type Err = Error;

    /// `nx1,nx2,nx3,nr`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidOption(format!("expected nx1,nx2,nx3,nr, got {s:?}"));
        let v = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let [a, b, c, r] = v.as_slice() else { return Err(bad()) };
        Mesh::new([*a, *b, *c], *r)
    }
}
