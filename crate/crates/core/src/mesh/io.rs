//! OBJ and binary little-endian PLY mesh import/export.
//!
//! OBJ carries positions (with the common per-vertex color extension),
//! normals and faces in fixed 9-decimal notation, so files are byte-stable
//! across runs. PLY stores positions and normals as doubles and colors as
//! 8-bit RGB; positions and normals round-trip bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::real::Real;

use super::trimesh::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            other => Err(Error::invalid(format!(
                "unsupported mesh extension {:?}; use .obj or .ply",
                other.unwrap_or("")
            ))),
        }
    }
}

pub fn save_mesh<T: Real>(path: &Path, mesh: &TriMesh<T>) -> Result<()> {
    let format = MeshFormat::from_path(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Obj => write_obj(&mut w, mesh),
        MeshFormat::Ply => write_ply(&mut w, mesh),
    }
}

pub fn load_mesh<T: Real>(path: &Path) -> Result<TriMesh<T>> {
    let format = MeshFormat::from_path(path)?;
    let file = File::open(path)?;
    let display = path.display().to_string();
    match format {
        MeshFormat::Obj => read_obj(BufReader::new(file), &display),
        MeshFormat::Ply => read_ply(BufReader::new(file), &display),
    }
}

pub fn write_obj<T: Real>(w: &mut impl Write, mesh: &TriMesh<T>) -> Result<()> {
    mesh.validate()?;
    for (i, v) in mesh.vertices.iter().enumerate() {
        write!(w, "v {:.9} {:.9} {:.9}", v[0].as_f64(), v[1].as_f64(), v[2].as_f64())?;
        if let Some(colors) = &mesh.colors {
            let c = colors[i];
            write!(w, " {:.9} {:.9} {:.9}", c[0].as_f64(), c[1].as_f64(), c[2].as_f64())?;
        }
        writeln!(w)?;
    }
    if let Some(normals) = &mesh.normals {
        for n in normals {
            writeln!(w, "vn {:.9} {:.9} {:.9}", n[0].as_f64(), n[1].as_f64(), n[2].as_f64())?;
        }
    }
    let with_normals = mesh.normals.is_some();
    for f in &mesh.faces {
        if with_normals {
            writeln!(
                w,
                "f {}//{} {}//{} {}//{}",
                f[0] + 1, f[0] + 1, f[1] + 1, f[1] + 1, f[2] + 1, f[2] + 1
            )?;
        } else {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
    }
    Ok(())
}

pub fn read_obj<T: Real>(r: impl BufRead, path: &str) -> Result<TriMesh<T>> {
    let mut mesh = TriMesh::default();
    let mut colors = Vec::new();
    let mut normals = Vec::new();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let vals: Vec<f64> = tokens
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(lineno, format!("bad vertex number: {e}")))?;
                match vals.len() {
                    3 => mesh.vertices.push([T::of(vals[0]), T::of(vals[1]), T::of(vals[2])]),
                    6 => {
                        mesh.vertices.push([T::of(vals[0]), T::of(vals[1]), T::of(vals[2])]);
                        colors.push([T::of(vals[3]), T::of(vals[4]), T::of(vals[5])]);
                    }
                    n => return Err(parse_err(lineno, format!("vertex has {n} values, want 3 or 6"))),
                }
            }
            Some("vn") => {
                let vals: Vec<f64> = tokens
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(lineno, format!("bad normal number: {e}")))?;
                if vals.len() != 3 {
                    return Err(parse_err(lineno, "normal needs 3 values".into()));
                }
                normals.push([T::of(vals[0]), T::of(vals[1]), T::of(vals[2])]);
            }
            Some("f") => {
                let mut indices = [0u32; 3];
                let mut count = 0;
                for tok in tokens {
                    if count == 3 {
                        return Err(parse_err(lineno, "only triangle faces are supported".into()));
                    }
                    // Accept v, v//vn and v/vt/vn references; only the
                    // vertex index is kept.
                    let vref = tok.split('/').next().unwrap_or("");
                    let one_based: i64 = vref
                        .parse()
                        .map_err(|e| parse_err(lineno, format!("bad face index {tok:?}: {e}")))?;
                    if one_based < 1 {
                        return Err(parse_err(lineno, "face indices must be positive".into()));
                    }
                    indices[count] = (one_based - 1) as u32;
                    count += 1;
                }
                if count != 3 {
                    return Err(parse_err(lineno, "only triangle faces are supported".into()));
                }
                mesh.faces.push(indices);
            }
            // Comments, groups, materials and blank lines are ignored.
            _ => {}
        }
    }
    if !colors.is_empty() {
        if colors.len() != mesh.vertices.len() {
            return Err(parse_err(0, "some vertices have colors and some do not".into()));
        }
        mesh.colors = Some(colors);
    }
    if !normals.is_empty() {
        if normals.len() != mesh.vertices.len() {
            return Err(parse_err(0, "normal count does not match vertex count".into()));
        }
        mesh.normals = Some(normals);
    }
    mesh.validate()?;
    Ok(mesh)
}

pub fn write_ply<T: Real>(w: &mut impl Write, mesh: &TriMesh<T>) -> Result<()> {
    mesh.validate()?;
    writeln!(w, "ply")?;
    writeln!(w, "format binary_little_endian 1.0")?;
    writeln!(w, "element vertex {}", mesh.vertices.len())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    if mesh.normals.is_some() {
        writeln!(w, "property double nx")?;
        writeln!(w, "property double ny")?;
        writeln!(w, "property double nz")?;
    }
    if mesh.colors.is_some() {
        writeln!(w, "property uchar red")?;
        writeln!(w, "property uchar green")?;
        writeln!(w, "property uchar blue")?;
    }
    writeln!(w, "element face {}", mesh.faces.len())?;
    writeln!(w, "property list uchar uint vertex_indices")?;
    writeln!(w, "end_header")?;
    for (i, v) in mesh.vertices.iter().enumerate() {
        for x in v {
            w.write_all(&x.as_f64().to_le_bytes())?;
        }
        if let Some(normals) = &mesh.normals {
            for x in &normals[i] {
                w.write_all(&x.as_f64().to_le_bytes())?;
            }
        }
        if let Some(colors) = &mesh.colors {
            for x in &colors[i] {
                w.write_all(&[quantize_channel(x.as_f64())])?;
            }
        }
    }
    for f in &mesh.faces {
        w.write_all(&[3u8])?;
        for idx in f {
            w.write_all(&idx.to_le_bytes())?;
        }
    }
    Ok(())
}

fn quantize_channel(x: f64) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn read_ply<T: Real>(mut r: impl BufRead, path: &str) -> Result<TriMesh<T>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut lineno = 0usize;
    let mut read_line = |r: &mut dyn BufRead| -> Result<String> {
        let mut s = String::new();
        if r.read_line(&mut s)? == 0 {
            return Err(Error::Parse {
                path: path.to_string(),
                line: lineno,
                message: "unexpected end of header".into(),
            });
        }
        lineno += 1;
        Ok(s.trim_end().to_string())
    };

    if read_line(&mut r)? != "ply" {
        return Err(parse_err(1, "missing ply magic".into()));
    }
    if read_line(&mut r)? != "format binary_little_endian 1.0" {
        return Err(parse_err(2, "only binary_little_endian 1.0 is supported".into()));
    }

    let mut vertex_count = None;
    let mut face_count = None;
    let mut vertex_props: Vec<String> = Vec::new();
    let mut in_vertex_element = false;
    loop {
        let line = read_line(&mut r)?;
        if line == "end_header" {
            break;
        }
        if line.starts_with("comment") {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["element", "vertex", n] => {
                vertex_count = Some(n.parse::<usize>().map_err(|e| parse_err(0, e.to_string()))?);
                in_vertex_element = true;
            }
            ["element", "face", n] => {
                face_count = Some(n.parse::<usize>().map_err(|e| parse_err(0, e.to_string()))?);
                in_vertex_element = false;
            }
            ["property", "list", "uchar", "uint", "vertex_indices"] if !in_vertex_element => {}
            ["property", ty, name] if in_vertex_element => {
                vertex_props.push(format!("{ty} {name}"));
            }
            _ => return Err(parse_err(0, format!("unsupported header line {line:?}"))),
        }
    }
    let vertex_count = vertex_count.ok_or_else(|| parse_err(0, "missing vertex element".into()))?;
    let face_count = face_count.ok_or_else(|| parse_err(0, "missing face element".into()))?;

    let base = ["double x", "double y", "double z"];
    let normal_props = ["double nx", "double ny", "double nz"];
    let color_props = ["uchar red", "uchar green", "uchar blue"];
    let mut expected: Vec<&str> = base.to_vec();
    let has_normals = vertex_props.len() >= 6 && vertex_props[3..6] == normal_props;
    if has_normals {
        expected.extend(normal_props);
    }
    let has_colors = vertex_props.len() == expected.len() + 3
        && vertex_props[expected.len()..] == color_props;
    if has_colors {
        expected.extend(color_props);
    }
    if vertex_props != expected {
        return Err(parse_err(0, format!("unsupported vertex layout {vertex_props:?}")));
    }

    let mut mesh = TriMesh::default();
    let mut colors = Vec::new();
    let mut normals = Vec::new();
    let mut f64_buf = [0u8; 8];
    let mut read_f64 = |r: &mut dyn BufRead| -> Result<f64> {
        r.read_exact(&mut f64_buf)?;
        Ok(f64::from_le_bytes(f64_buf))
    };
    for _ in 0..vertex_count {
        let x = read_f64(&mut r)?;
        let y = read_f64(&mut r)?;
        let z = read_f64(&mut r)?;
        mesh.vertices.push([T::of(x), T::of(y), T::of(z)]);
        if has_normals {
            let nx = read_f64(&mut r)?;
            let ny = read_f64(&mut r)?;
            let nz = read_f64(&mut r)?;
            normals.push([T::of(nx), T::of(ny), T::of(nz)]);
        }
        if has_colors {
            let mut rgb = [0u8; 3];
            r.read_exact(&mut rgb)?;
            colors.push([
                T::of(rgb[0] as f64 / 255.0),
                T::of(rgb[1] as f64 / 255.0),
                T::of(rgb[2] as f64 / 255.0),
            ]);
        }
    }
    for _ in 0..face_count {
        let mut n = [0u8; 1];
        r.read_exact(&mut n)?;
        if n[0] != 3 {
            return Err(parse_err(0, format!("face with {} vertices; only triangles", n[0])));
        }
        let mut idx = [0u32; 3];
        for slot in &mut idx {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            *slot = u32::from_le_bytes(b);
        }
        mesh.faces.push(idx);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(parse_err(0, "trailing bytes after face data".into()));
    }
    if has_normals {
        mesh.normals = Some(normals);
    }
    if has_colors {
        mesh.colors = Some(colors);
    }
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn sample_mesh() -> TriMesh<f64> {
        TriMesh {
            vertices: vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            faces: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
            colors: Some(vec![
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.5019607843137255, 0.5019607843137255, 0.5019607843137255],
            ]),
            normals: None,
        }
    }

    #[test]
    fn obj_round_trip() {
        let mut mesh = sample_mesh();
        mesh.compute_vertex_normals();
        let mut buf = Vec::new();
        write_obj(&mut buf, &mesh).unwrap();
        let back: TriMesh<f64> = read_obj(Cursor::new(&buf), "mem.obj").unwrap();
        assert_eq!(back.faces, mesh.faces);
        assert_eq!(back.vertices.len(), mesh.vertices.len());
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            for axis in 0..3 {
                assert!((a[axis] - b[axis]).abs() < 1e-9);
            }
        }
        assert!(back.colors.is_some());
        assert!(back.normals.is_some());
    }

    #[test]
    fn obj_output_is_byte_stable() {
        let mesh = sample_mesh();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_obj(&mut a, &mesh).unwrap();
        write_obj(&mut b, &mesh).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ply_round_trip_is_bit_exact_for_geometry() {
        let mut mesh = sample_mesh();
        mesh.vertices[1] = [0.1 + 0.2, std::f64::consts::PI, -1.0e-17];
        mesh.compute_vertex_normals();
        let mut buf = Vec::new();
        write_ply(&mut buf, &mesh).unwrap();
        let back: TriMesh<f64> = read_ply(Cursor::new(&buf), "mem.ply").unwrap();
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.normals, mesh.normals);
        assert_eq!(back.faces, mesh.faces);
        // Colors survive a save/load/save cycle unchanged once quantized.
        let mut buf2 = Vec::new();
        write_ply(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn ply_rejects_trailing_bytes() {
        let mut buf = Vec::new();
        write_ply(&mut buf, &sample_mesh()).unwrap();
        buf.push(0);
        assert!(read_ply::<f64>(Cursor::new(&buf), "mem.ply").is_err());
    }

    #[test]
    fn obj_reports_line_numbers() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 oops\n";
        let err = read_obj::<f64>(Cursor::new(src), "bad.obj").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn obj_rejects_quad_faces() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n";
        assert!(read_obj::<f64>(Cursor::new(src), "quad.obj").is_err());
    }

    #[test]
    fn save_and_load_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = sample_mesh();
        for name in ["m.obj", "m.ply"] {
            let path = dir.path().join(name);
            save_mesh(&path, &mesh).unwrap();
            let back: TriMesh<f64> = load_mesh(&path).unwrap();
            assert_eq!(back.faces, mesh.faces);
        }
        assert!(MeshFormat::from_path(Path::new("m.stl")).is_err());
    }
}
