//! Golden-file checks pinning the mesh serialization formats. If one of
//! these fails, the on-disk format changed and downstream tooling breaks.

use triplane_core::mesh::io::{read_obj, read_ply, write_obj, write_ply};
use triplane_core::mesh::TriMesh;

const OBJ_GOLDEN: &[u8] = include_bytes!("data/unit_triangle.obj");
const PLY_GOLDEN: &[u8] = include_bytes!("data/unit_triangle.ply");

fn unit_triangle() -> TriMesh<f64> {
    TriMesh {
        vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        faces: vec![[0, 1, 2]],
        colors: None,
        normals: None,
    }
}

#[test]
fn obj_writer_matches_golden_bytes() {
    let mut buf = Vec::new();
    write_obj(&mut buf, &unit_triangle()).unwrap();
    assert_eq!(buf, OBJ_GOLDEN);
}

#[test]
fn ply_writer_matches_golden_bytes() {
    let mut buf = Vec::new();
    write_ply(&mut buf, &unit_triangle()).unwrap();
    assert_eq!(buf, PLY_GOLDEN);
}

#[test]
fn golden_files_parse_back_to_the_same_mesh() {
    let expect = unit_triangle();
    let obj: TriMesh<f64> = read_obj(std::io::Cursor::new(OBJ_GOLDEN), "unit_triangle.obj").unwrap();
    assert_eq!(obj.vertices, expect.vertices);
    assert_eq!(obj.faces, expect.faces);
    let ply: TriMesh<f64> = read_ply(std::io::Cursor::new(PLY_GOLDEN), "unit_triangle.ply").unwrap();
    assert_eq!(ply.vertices, expect.vertices);
    assert_eq!(ply.faces, expect.faces);
}
