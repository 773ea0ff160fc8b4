//! Binary little-endian PLY in the layout used by Gaussian splatting
//! checkpoints: `x y z nx ny nz f_dc_0..2 f_rest_* opacity scale_0..2 rot_0..3`.
//!
//! Opacity is stored as a logit and scales as natural logs. `f_rest` is
//! channel-major: coefficient `k` (k >= 1) of channel `c` lives at
//! `f_rest_{c * (K - 1) + k - 1}` for `K` coefficients per channel.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{sh_coeff_count, Gaussian3D, Scene, MAX_SH_DEGREE};
use crate::error::{Error, Result};
use crate::Real;

/// Largest opacity representable after the logit round trip.
const MAX_STORED_OPACITY: f64 = 1.0 - 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScalarKind {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarKind {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read(self, r: &mut impl Read) -> std::io::Result<f64> {
        Ok(match self {
            Self::I8 => r.read_i8()? as f64,
            Self::U8 => r.read_u8()? as f64,
            Self::I16 => r.read_i16::<LittleEndian>()? as f64,
            Self::U16 => r.read_u16::<LittleEndian>()? as f64,
            Self::I32 => r.read_i32::<LittleEndian>()? as f64,
            Self::U32 => r.read_u32::<LittleEndian>()? as f64,
            Self::F32 => r.read_f32::<LittleEndian>()? as f64,
            Self::F64 => r.read_f64::<LittleEndian>()?,
        })
    }
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<(String, ScalarKind)>,
}

fn parse_header(reader: &mut impl BufRead) -> Result<Vec<Element>> {
    let mut line = String::new();
    let mut next_line = |line: &mut String| -> Result<()> {
        line.clear();
        let n = reader
            .read_line(line)
            .map_err(|e| Error::Format(format!("reading ply header: {e}")))?;
        if n == 0 {
            return Err(Error::Format("ply header ended before end_header".into()));
        }
        Ok(())
    };

    next_line(&mut line)?;
    if line.trim_end() != "ply" {
        return Err(Error::Format("missing 'ply' magic line".into()));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    loop {
        next_line(&mut line)?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["end_header"] => break,
            ["format", "binary_little_endian", _] => saw_format = true,
            ["format", other, ..] => {
                return Err(Error::Format(format!(
                    "unsupported ply format '{other}' (need binary_little_endian)"
                )))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::Format(format!("bad element count '{count}'")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", ..] => {
                return Err(Error::Format("list properties are not supported".into()))
            }
            ["property", kind, name] => {
                let kind = ScalarKind::parse(kind)
                    .ok_or_else(|| Error::Format(format!("unknown property type '{kind}'")))?;
                let element = elements
                    .last_mut()
                    .ok_or_else(|| Error::Format("property before any element".into()))?;
                element.properties.push((name.to_string(), kind));
            }
            _ => {
                return Err(Error::Format(format!(
                    "unrecognized header line '{}'",
                    line.trim_end()
                )))
            }
        }
    }
    if !saw_format {
        return Err(Error::Format("missing format line".into()));
    }
    Ok(elements)
}

pub fn load_ply<T: Real>(path: &Path) -> Result<Scene<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ply(&mut BufReader::new(file))
}

pub fn read_ply<T: Real>(reader: &mut impl BufRead) -> Result<Scene<T>> {
    let elements = parse_header(reader)?;
    let truncated = |e: std::io::Error| Error::Format(format!("truncated ply body: {e}"));

    let mut vertex_rows: Option<(Vec<Vec<f64>>, &Element)> = None;
    for element in &elements {
        if element.name == "vertex" {
            let mut rows = Vec::with_capacity(element.count);
            for _ in 0..element.count {
                let mut row = Vec::with_capacity(element.properties.len());
                for (_, kind) in &element.properties {
                    row.push(kind.read(reader).map_err(truncated)?);
                }
                rows.push(row);
            }
            vertex_rows = Some((rows, element));
        } else {
            let stride: usize = element.properties.iter().map(|(_, k)| k.size()).sum();
            let mut skip = reader.take((stride * element.count) as u64);
            std::io::copy(&mut skip, &mut std::io::sink()).map_err(truncated)?;
        }
    }
    let (rows, vertex) =
        vertex_rows.ok_or_else(|| Error::Format("no 'vertex' element".into()))?;

    let columns: HashMap<&str, usize> = vertex
        .properties
        .iter()
        .enumerate()
        .map(|(i, (name, _))| (name.as_str(), i))
        .collect();
    let column = |name: &str| -> Result<usize> {
        columns
            .get(name)
            .copied()
            .ok_or_else(|| Error::Format(format!("missing vertex property '{name}'")))
    };

    let pos = [column("x")?, column("y")?, column("z")?];
    let dc = [column("f_dc_0")?, column("f_dc_1")?, column("f_dc_2")?];
    let opacity = column("opacity")?;
    let scale = [column("scale_0")?, column("scale_1")?, column("scale_2")?];
    let rot = [
        column("rot_0")?,
        column("rot_1")?,
        column("rot_2")?,
        column("rot_3")?,
    ];
    let rest_count = columns.keys().filter(|k| k.starts_with("f_rest_")).count();
    let degree = (0..=MAX_SH_DEGREE)
        .find(|&d| 3 * (sh_coeff_count(d) - 1) == rest_count)
        .ok_or_else(|| {
            Error::Format(format!(
                "{rest_count} f_rest properties do not match any SH degree <= {MAX_SH_DEGREE}"
            ))
        })?;
    let rest: Vec<usize> = (0..rest_count)
        .map(|i| column(&format!("f_rest_{i}")))
        .collect::<Result<_>>()?;
    let per_channel = sh_coeff_count(degree) - 1;

    let mut gaussians = Vec::with_capacity(rows.len());
    for (index, row) in rows.iter().enumerate() {
        let finite = |field: &'static str, cols: &[usize]| -> Result<()> {
            if cols.iter().all(|&c| row[c].is_finite()) {
                Ok(())
            } else {
                Err(Error::Validation {
                    index,
                    field,
                    message: "is not finite".into(),
                })
            }
        };
        finite("center", &pos)?;
        finite("sh", &dc)?;
        finite("sh", &rest)?;
        finite("opacity", &[opacity])?;
        finite("scale", &scale)?;
        finite("rotation", &rot)?;

        let mut sh = Vec::with_capacity(per_channel + 1);
        sh.push(dc.map(|c| T::lit(row[c])));
        for k in 0..per_channel {
            sh.push([0, 1, 2].map(|c| T::lit(row[rest[c * per_channel + k]])));
        }
        gaussians.push(Gaussian3D {
            center: pos.map(|c| T::lit(row[c])),
            scale: scale.map(|c| T::lit(row[c].exp())),
            rotation: rot.map(|c| T::lit(row[c])),
            opacity: T::lit(logistic(row[opacity])),
            sh,
        });
    }
    Scene::new(gaussians, degree)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.min(MAX_STORED_OPACITY);
    (p / (1.0 - p)).ln()
}

pub fn write_ply<T: Real>(scene: &Scene<T>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_ply(scene, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_ply<T: Real>(scene: &Scene<T>, w: &mut impl Write) -> std::io::Result<()> {
    let per_channel = sh_coeff_count(scene.sh_degree) - 1;
    writeln!(w, "ply")?;
    writeln!(w, "format binary_little_endian 1.0")?;
    writeln!(w, "element vertex {}", scene.len())?;
    for name in ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"] {
        writeln!(w, "property float {name}")?;
    }
    for i in 0..3 * per_channel {
        writeln!(w, "property float f_rest_{i}")?;
    }
    writeln!(w, "property float opacity")?;
    for i in 0..3 {
        writeln!(w, "property float scale_{i}")?;
    }
    for i in 0..4 {
        writeln!(w, "property float rot_{i}")?;
    }
    writeln!(w, "end_header")?;

    let put = |w: &mut dyn Write, v: f64| w.write_f32::<LittleEndian>(v as f32);
    for g in &scene.gaussians {
        for v in g.center {
            put(w, v.as_f64())?;
        }
        for _ in 0..3 {
            put(w, 0.0)?;
        }
        for v in g.sh[0] {
            put(w, v.as_f64())?;
        }
        for c in 0..3 {
            for k in 1..=per_channel {
                put(w, g.sh[k][c].as_f64())?;
            }
        }
        put(w, logit(g.opacity.as_f64()))?;
        for v in g.scale {
            put(w, v.as_f64().ln())?;
        }
        for v in g.rotation {
            put(w, v.as_f64())?;
        }
    }
    Ok(())
}
