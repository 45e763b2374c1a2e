//! Point cloud, label and per-point table readers and writers.
//!
//! Supported formats: whitespace-separated XYZ text (`#` comments), ASCII
//! PLY 1.0, one-label-per-line text files and a few small CSV tables that
//! let pipeline stages hand data to each other through files. All floats are
//! written in shortest round-trip form, so write→read is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::features::FeatureVector;
use crate::sampling::{SampleRecord, TrainingEntry, TrainingSet};
use crate::{Class, Error, LabelVector, Point3, PointCloud, Result};

/// Fixed palette for classified output.
pub const LEAF_RGB: [u8; 3] = [0, 200, 0];
pub const WOOD_RGB: [u8; 3] = [139, 69, 19];

pub fn class_rgb(c: Class) -> [u8; 3] {
    match c {
        Class::Leaf => LEAF_RGB,
        Class::Wood => WOOD_RGB,
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid number {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// Reads an XYZ text cloud: one point per non-empty, non-`#` line, extra
/// columns after the third ignored.
pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let mut xyz = [0.0; 3];
        for v in xyz.iter_mut() {
            let tok = toks
                .next()
                .ok_or_else(|| Error::parse(path, i + 1, "expected at least 3 columns"))?;
            *v = parse_f64(path, i + 1, tok)?;
        }
        points.push(Point3::from(xyz));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    PointCloud::new(points)
}

pub fn write_xyz(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(cloud.len() * 40);
    for p in cloud.iter() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    write_text(path.as_ref(), &out)
}

#[derive(Debug)]
enum PlyProperty {
    Scalar { name: String, float: bool },
    List,
}

#[derive(Debug)]
struct PlyElement {
    name: String,
    count: usize,
    props: Vec<PlyProperty>,
}

fn is_float_type(t: &str) -> Option<bool> {
    match t {
        "float" | "double" | "float32" | "float64" => Some(true),
        "char" | "uchar" | "short" | "ushort" | "int" | "uint" | "int8" | "uint8" | "int16"
        | "uint16" | "int32" | "uint32" => Some(false),
        _ => None,
    }
}

/// Reads an ASCII PLY file. Returns the `vertex` positions and, when the
/// vertex element carries an integer `label` property, the labels
/// (1 = leaf, 0 = wood).
pub fn read_ply(path: impl AsRef<Path>) -> Result<(PointCloud, Option<LabelVector>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    // Header is ASCII even for binary files; only decode as much as needed
    // to find the format line before insisting on UTF-8.
    let header_end = find_subslice(&bytes, b"end_header").ok_or_else(|| {
        Error::parse(path, 1, "missing end_header")
    })?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::parse(path, 1, "header is not valid text"))?;

    let mut lines = header.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(Error::parse(path, 1, "missing 'ply' magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    for (i, raw) in lines {
        let ln = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, ver] => {
                if *fmt != "ascii" {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        what: format!("{fmt} PLY (only ascii is supported)"),
                    });
                }
                if *ver != "1.0" {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        what: format!("PLY version {ver}"),
                    });
                }
                saw_format = true;
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::parse(path, ln, format!("bad element count {count:?}")))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            ["property", "list", _, _, _] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(path, ln, "property before element"))?;
                el.props.push(PlyProperty::List);
            }
            ["property", ty, name] => {
                let float = is_float_type(ty)
                    .ok_or_else(|| Error::parse(path, ln, format!("unknown property type {ty:?}")))?;
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(path, ln, "property before element"))?;
                el.props.push(PlyProperty::Scalar {
                    name: name.to_string(),
                    float,
                });
            }
            _ => return Err(Error::parse(path, ln, format!("unrecognized header line {raw:?}"))),
        }
    }
    if !saw_format {
        return Err(Error::parse(path, 2, "missing format line"));
    }

    let vertex_pos = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::parse(path, 1, "no vertex element"))?;
    let vertex = &elements[vertex_pos];
    let find = |want: &str| {
        vertex.props.iter().position(
            |p| matches!(p, PlyProperty::Scalar { name, .. } if name == want),
        )
    };
    let (ix, iy, iz) = match (find("x"), find("y"), find("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(Error::parse(path, 1, "vertex element lacks x/y/z properties"));
        }
    };
    let ilabel = find("label");
    if let Some(li) = ilabel {
        if matches!(vertex.props[li], PlyProperty::Scalar { float: true, .. }) {
            return Err(Error::parse(path, 1, "label property must be an integer type"));
        }
    }
    if vertex.props.iter().any(|p| matches!(p, PlyProperty::List)) {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            what: "list properties on vertex element".into(),
        });
    }

    let header_lines = header.lines().count() + 1;
    let body = std::str::from_utf8(&bytes[header_end + b"end_header".len()..])
        .map_err(|_| Error::parse(path, header_lines, "body is not valid text"))?;
    // Skip the remainder of the end_header line.
    let body = body.split_once('\n').map(|(_, rest)| rest).unwrap_or("");

    let mut body_lines = body
        .lines()
        .enumerate()
        .map(|(i, l)| (header_lines + i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut points = Vec::with_capacity(vertex.count);
    let mut labels = ilabel.map(|_| Vec::with_capacity(vertex.count));
    for (ei, el) in elements.iter().enumerate() {
        for _ in 0..el.count {
            let (ln, line) = body_lines.next().ok_or_else(|| {
                Error::parse(
                    path,
                    header_lines,
                    format!("element '{}' declares {} entries but data ended early", el.name, el.count),
                )
            })?;
            if ei != vertex_pos {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != vertex.props.len() {
                return Err(Error::parse(
                    path,
                    ln,
                    format!("expected {} values, found {}", vertex.props.len(), toks.len()),
                ));
            }
            points.push(Point3::new(
                parse_f64(path, ln, toks[ix])?,
                parse_f64(path, ln, toks[iy])?,
                parse_f64(path, ln, toks[iz])?,
            ));
            if let (Some(li), Some(labels)) = (ilabel, labels.as_mut()) {
                let code: i64 = toks[li]
                    .parse()
                    .map_err(|_| Error::parse(path, ln, format!("invalid label {:?}", toks[li])))?;
                let class = Class::from_code(code)
                    .ok_or_else(|| Error::parse(path, ln, format!("invalid label {code}")))?;
                labels.push(class);
            }
        }
    }
    if let Some((ln, _)) = body_lines.next() {
        return Err(Error::parse(path, ln, "more data lines than declared element counts"));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    Ok((PointCloud::new(points)?, labels.map(LabelVector)))
}

fn find_subslice(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

/// Writes an ASCII PLY with per-vertex colors (leaf green, wood brown) and
/// the integer class label.
pub fn write_classified_ply(
    cloud: &PointCloud,
    labels: &LabelVector,
    path: impl AsRef<Path>,
) -> Result<()> {
    labels.check_len(cloud.len())?;
    let mut out = String::with_capacity(cloud.len() * 48 + 256);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str(
        "property double x\nproperty double y\nproperty double z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\n\
         property uchar label\nend_header\n",
    );
    for (p, &c) in cloud.iter().zip(labels.iter()) {
        let [r, g, b] = class_rgb(c);
        let _ = writeln!(out, "{} {} {} {r} {g} {b} {}", p.x, p.y, p.z, c.code());
    }
    write_text(path.as_ref(), &out)
}

/// Reads a cloud by extension: `.ply` goes through [`read_ply`], anything
/// else is treated as XYZ text.
pub fn read_cloud(path: impl AsRef<Path>) -> Result<(PointCloud, Option<LabelVector>)> {
    let path = path.as_ref();
    let is_ply = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("ply"))
        .unwrap_or(false);
    if is_ply {
        read_ply(path)
    } else {
        Ok((read_xyz(path)?, None))
    }
}

/// Reads a label file: one `0`/`1` per line, line i labels point i.
/// `expected` checks the count against a known cloud size.
pub fn read_labels(path: impl AsRef<Path>, expected: Option<usize>) -> Result<LabelVector> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let text = text.trim_end();
    if text.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let tok = line.trim();
        let class = tok
            .parse::<i64>()
            .ok()
            .and_then(Class::from_code)
            .ok_or_else(|| Error::parse(path, i + 1, format!("invalid label {tok:?}")))?;
        labels.push(class);
    }
    let labels = LabelVector(labels);
    if let Some(n) = expected {
        if labels.len() != n {
            return Err(Error::parse(
                path,
                labels.len(),
                format!("{} labels but {n} points", labels.len()),
            ));
        }
    }
    Ok(labels)
}

pub fn write_labels(labels: &LabelVector, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 2);
    for c in labels.iter() {
        out.push(if *c == Class::Leaf { '1' } else { '0' });
        out.push('\n');
    }
    write_text(path.as_ref(), &out)
}

/// Reads labels from either a label text file or a labeled PLY.
pub fn read_labels_any(path: impl AsRef<Path>, expected: Option<usize>) -> Result<LabelVector> {
    let path = path.as_ref();
    if path.extension().map(|e| e.eq_ignore_ascii_case("ply")).unwrap_or(false) {
        let (cloud, labels) = read_ply(path)?;
        let labels = labels.ok_or_else(|| {
            Error::parse(path, 1, "PLY has no label property")
        })?;
        if let Some(n) = expected {
            labels.check_len(n)?;
        }
        debug_assert_eq!(cloud.len(), labels.len());
        Ok(labels)
    } else {
        read_labels(path, expected)
    }
}

pub const FEATURES_HEADER: &str = "x,y,z,c_lambda,rho";

pub fn write_features_csv(features: &[FeatureVector], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(features.len() * 80);
    out.push_str(FEATURES_HEADER);
    out.push('\n');
    for f in features {
        let _ = writeln!(out, "{},{},{},{},{}", f.x, f.y, f.z, f.c_lambda, f.rho);
    }
    write_text(path.as_ref(), &out)
}

fn csv_rows<'a>(
    path: &'a Path,
    text: &'a str,
    header: &str,
) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)> + 'a> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some(_) => return Err(Error::parse(path, 1, format!("expected header {header:?}"))),
        None => return Err(Error::EmptyInput(path.to_path_buf())),
    }
    Ok(lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect())))
}

fn expect_cols(path: &Path, ln: usize, cols: &[&str], n: usize) -> Result<()> {
    if cols.len() != n {
        return Err(Error::parse(path, ln, format!("expected {n} columns, found {}", cols.len())));
    }
    Ok(())
}

pub fn read_features_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (ln, cols) in csv_rows(path, &text, FEATURES_HEADER)? {
        expect_cols(path, ln, &cols, 5)?;
        out.push(FeatureVector {
            x: parse_f64(path, ln, cols[0])?,
            y: parse_f64(path, ln, cols[1])?,
            z: parse_f64(path, ln, cols[2])?,
            c_lambda: parse_f64(path, ln, cols[3])?,
            rho: parse_f64(path, ln, cols[4])?,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    Ok(out)
}

fn parse_class(path: &Path, ln: usize, tok: &str) -> Result<Class> {
    match tok {
        "leaf" | "1" => Ok(Class::Leaf),
        "wood" | "0" => Ok(Class::Wood),
        _ => Err(Error::parse(path, ln, format!("invalid class {tok:?}"))),
    }
}

fn parse_index(path: &Path, ln: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(path, ln, format!("invalid point index {tok:?}")))
}

pub const SAMPLES_HEADER: &str = "point_index,sigma,class";

/// Sample-audit table: one row per selected training point.
pub fn write_samples_csv(records: &[SampleRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 32);
    out.push_str(SAMPLES_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{},{}", r.index, r.sigma, r.class.name());
    }
    write_text(path.as_ref(), &out)
}

pub fn read_samples_csv(path: impl AsRef<Path>) -> Result<Vec<SampleRecord>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (ln, cols) in csv_rows(path, &text, SAMPLES_HEADER)? {
        expect_cols(path, ln, &cols, 3)?;
        out.push(SampleRecord {
            index: parse_index(path, ln, cols[0])?,
            sigma: parse_f64(path, ln, cols[1])?,
            class: parse_class(path, ln, cols[2])?,
        });
    }
    Ok(out)
}

pub const TRAINING_HEADER: &str = "point_index,class,x,y,z,c_lambda,rho";

pub fn write_training_csv(ts: &TrainingSet, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(ts.len() * 96);
    out.push_str(TRAINING_HEADER);
    out.push('\n');
    for e in ts.entries() {
        let f = &e.features;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.index,
            e.class.name(),
            f.x,
            f.y,
            f.z,
            f.c_lambda,
            f.rho
        );
    }
    write_text(path.as_ref(), &out)
}

/// Reads a training table. Unlike [`TrainingSet::new`] this accepts a
/// single-class table so that the training stage can report it.
pub fn read_training_csv(path: impl AsRef<Path>) -> Result<Vec<TrainingEntry>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (ln, cols) in csv_rows(path, &text, TRAINING_HEADER)? {
        expect_cols(path, ln, &cols, 7)?;
        out.push(TrainingEntry {
            index: parse_index(path, ln, cols[0])?,
            class: parse_class(path, ln, cols[1])?,
            features: FeatureVector {
                x: parse_f64(path, ln, cols[2])?,
                y: parse_f64(path, ln, cols[3])?,
                z: parse_f64(path, ln, cols[4])?,
                c_lambda: parse_f64(path, ln, cols[5])?,
                rho: parse_f64(path, ln, cols[6])?,
            },
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    Ok(out)
}
