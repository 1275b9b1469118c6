//! Text formats: the profile grammar, profile files and the CSV tables.
//!
//! Floats are written with 12 significant digits in the style of C's `%.12g`.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::floquet::SpectralKind;
use crate::profile::FieldProfile;
use crate::scalar::Scalar;
use crate::spectrum::{ButterflyRow, GraphSpectrum, MeasureRow};

pub const BANDS_HEADER: [&str; 4] = ["n", "kind", "lo", "hi"];
pub const BUTTERFLY_HEADER: [&str; 7] = ["p", "q", "theta", "n", "lo", "hi", "kind"];
pub const MEASURE_HEADER: [&str; 4] = ["p", "q", "total_measure", "box_dimension"];

const SIG_DIGITS: usize = 12;

/// `%.12g`.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn kind_label(kind: SpectralKind) -> &'static str {
    match kind {
        SpectralKind::AbsolutelyContinuous => "band",
        SpectralKind::PurePoint => "point",
    }
}

pub fn parse_kind(s: &str) -> Result<SpectralKind> {
    match s {
        "band" => Ok(SpectralKind::AbsolutelyContinuous),
        "point" => Ok(SpectralKind::PurePoint),
        _ => Err(Error::Parse(format!("unknown kind {s:?}"))),
    }
}

/// Argument of `--profile`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    Periodic(Vec<Scalar>),
    File(PathBuf),
}

/// `periodic:v1,v2,...` or `file:<path>`.
pub fn parse_profile_spec(spec: &str) -> Result<ProfileSource> {
    if let Some(list) = spec.strip_prefix("periodic:") {
        let values = list.split(',').map(str::parse::<Scalar>).collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Empty("periodic profile"));
        }
        return Ok(ProfileSource::Periodic(values));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        if path.is_empty() {
            return Err(Error::Parse("empty profile path".into()));
        }
        return Ok(ProfileSource::File(PathBuf::from(path)));
    }
    Err(Error::Parse(format!(
        "profile must be periodic:<values> or file:<path>, got {spec:?}"
    )))
}

/// One `A_j` per line after a `# range lo hi` header. Other `#` lines and
/// blank lines are ignored.
pub fn parse_profile_file(text: &str) -> Result<FieldProfile> {
    let mut range: Option<(i64, i64)> = None;
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("range") {
                if range.is_some() {
                    return Err(Error::Parse(format!("line {}: duplicate range header", lineno + 1)));
                }
                let mut num = || -> Result<i64> {
                    words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("line {}: bad range header", lineno + 1)))
                };
                let (lo, hi) = (num()?, num()?);
                if words.next().is_some() {
                    return Err(Error::Parse(format!(
                        "line {}: trailing text in range header",
                        lineno + 1
                    )));
                }
                if lo > hi {
                    return Err(Error::InvalidRange { lo, hi });
                }
                range = Some((lo, hi));
            }
            continue;
        }
        if range.is_none() {
            return Err(Error::Parse(format!(
                "line {}: value before the range header",
                lineno + 1
            )));
        }
        let v: Scalar = line
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        values.push(v);
    }
    let (lo, hi) = range.ok_or_else(|| Error::Parse("missing '# range lo hi' header".into()))?;
    let expected = hi
        .checked_sub(lo)
        .and_then(|d| usize::try_from(d).ok())
        .and_then(|d| d.checked_add(1))
        .ok_or(Error::InvalidRange { lo, hi })?;
    if values.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: values.len(),
        });
    }
    FieldProfile::explicit(lo, values)
}

pub fn load_profile(spec: &str) -> Result<FieldProfile> {
    match parse_profile_spec(spec)? {
        ProfileSource::Periodic(values) => FieldProfile::periodic(values),
        ProfileSource::File(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            parse_profile_file(&text)
        }
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("ASCII output")
}

fn record<I, S>(w: &mut csv::Writer<Vec<u8>>, fields: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).expect("writing to memory cannot fail");
}

/// `bands.csv` for the parts of a graph spectrum.
pub fn write_bands_csv(spectrum: &GraphSpectrum) -> String {
    let mut w = writer();
    record(&mut w, BANDS_HEADER);
    for part in &spectrum.parts {
        for i in &part.intervals {
            record(
                &mut w,
                [
                    part.n.to_string(),
                    kind_label(part.kind).into(),
                    format_g(i.lo),
                    format_g(i.hi),
                ],
            );
        }
    }
    finish(w)
}

pub fn write_butterfly_csv(rows: &[ButterflyRow]) -> String {
    let mut w = writer();
    record(&mut w, BUTTERFLY_HEADER);
    for r in rows {
        record(
            &mut w,
            [
                r.p.to_string(),
                r.q.to_string(),
                format_g(r.theta.to_f64()),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                format_g(r.lo),
                format_g(r.hi),
                kind_label(r.kind).into(),
            ],
        );
    }
    finish(w)
}

pub fn write_measure_csv(rows: &[MeasureRow]) -> String {
    let mut w = writer();
    record(&mut w, MEASURE_HEADER);
    for r in rows {
        record(
            &mut w,
            [
                r.p.to_string(),
                r.q.to_string(),
                format_g(r.total_measure),
                format_g(r.box_dimension),
            ],
        );
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandsRecord {
    pub n: usize,
    pub kind: SpectralKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyRecord {
    pub p: i64,
    pub q: i64,
    pub theta: f64,
    pub n: Option<usize>,
    pub lo: f64,
    pub hi: f64,
    pub kind: SpectralKind,
}

fn records<const N: usize>(text: &str, header: [&str; N]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = r.records();
    let head = rows
        .next()
        .ok_or(Error::Empty("csv table"))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    if head.iter().ne(header.iter().copied()) {
        return Err(Error::Parse(format!("expected header {}", header.join(","))));
    }
    let mut out = Vec::new();
    for (k, row) in rows.enumerate() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        if row.len() != N {
            return Err(Error::Parse(format!(
                "row {}: expected {N} fields, got {}",
                k + 1,
                row.len()
            )));
        }
        out.push(row);
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    row[i]
        .parse()
        .map_err(|_| Error::Parse(format!("bad {name} field {:?}", &row[i])))
}

fn finite(row: &csv::StringRecord, i: usize, name: &str) -> Result<f64> {
    let x: f64 = field(row, i, name)?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("{name} must be finite")));
    }
    Ok(x)
}

fn check_interval(kind: SpectralKind, lo: f64, hi: f64) -> Result<()> {
    if lo > hi {
        return Err(Error::Parse(format!("lo {lo} exceeds hi {hi}")));
    }
    if kind == SpectralKind::PurePoint && lo != hi {
        return Err(Error::Parse("point rows must have lo = hi".into()));
    }
    Ok(())
}

pub fn read_bands_csv(text: &str) -> Result<Vec<BandsRecord>> {
    records(text, BANDS_HEADER)?
        .iter()
        .map(|r| {
            let kind = parse_kind(&r[1])?;
            let (lo, hi) = (finite(r, 2, "lo")?, finite(r, 3, "hi")?);
            check_interval(kind, lo, hi)?;
            Ok(BandsRecord {
                n: field(r, 0, "n")?,
                kind,
                lo,
                hi,
            })
        })
        .collect()
}

pub fn read_butterfly_csv(text: &str) -> Result<Vec<ButterflyRecord>> {
    records(text, BUTTERFLY_HEADER)?
        .iter()
        .map(|r| {
            let kind = parse_kind(&r[6])?;
            let (lo, hi) = (finite(r, 4, "lo")?, finite(r, 5, "hi")?);
            check_interval(kind, lo, hi)?;
            let q: i64 = field(r, 1, "q")?;
            if q < 1 {
                return Err(Error::Parse(format!("q must be positive, got {q}")));
            }
            Ok(ButterflyRecord {
                p: field(r, 0, "p")?,
                q,
                theta: finite(r, 2, "theta")?,
                n: if r[3].is_empty() { None } else { Some(field(r, 3, "n")?) },
                lo,
                hi,
                kind,
            })
        })
        .collect()
}

pub fn read_measure_csv(text: &str) -> Result<Vec<MeasureRow>> {
    records(text, MEASURE_HEADER)?
        .iter()
        .map(|r| {
            let total_measure = finite(r, 2, "total_measure")?;
            if total_measure < 0.0 {
                return Err(Error::Parse("negative measure".into()));
            }
            Ok(MeasureRow {
                p: field(r, 0, "p")?,
                q: field(r, 1, "q")?,
                total_measure,
                box_dimension: finite(r, 3, "box_dimension")?,
            })
        })
        .collect()
}
