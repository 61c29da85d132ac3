use std::path::Path;

use sdfem::msh::{parse_msh, read_msh, write_msh, MshError};
use sdfem_core::bench::BenchmarkId;
use sdfem_core::{EdgeClass, Marker, Subdomain};

// Darcy square [0,1]^2 below a Stokes square [0,1]x[1,2].
const TWO_SQUARES_V4: &str = r#"$MeshFormat
4.1 0 8
$EndMeshFormat
$PhysicalNames
5
1 3 "interface"
1 4 "lid"
1 5 "wall"
2 1 "stokes"
2 2 "darcy"
$EndPhysicalNames
$Entities
0 3 2 0
1 0 1 0 1 1 0 1 3 0
2 0 2 0 1 2 0 1 4 0
3 0 0 0 1 2 0 1 5 0
1 0 0 0 1 1 0 1 2 0
2 0 1 0 1 2 0 1 1 0
$EndEntities
$Nodes
1 6 1 6
2 1 0 6
1
2
3
4
5
6
0 0 0
1 0 0
1 1 0
0 1 0
0 2 0
1 2 0
$EndNodes
$Elements
5 10 1 10
1 1 1 1
1 3 4
1 2 1 1
2 5 6
1 3 1 4
3 1 2
4 2 3
5 4 1
6 3 6
2 1 2 2
7 1 2 3
8 1 3 4
2 2 2 2
9 4 3 6
10 4 6 5
$EndElements
"#;

fn two_squares_v2(tri_tag: &str, interface_line: &str) -> String {
    format!(
        r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
3
2 1 "stokes"
2 2 "darcy"
1 3 "interface"
$EndPhysicalNames
$Nodes
6
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
5 0 2 0
6 1 2 0
$EndNodes
$Elements
5
1 1 2 3 3 {interface_line}
2 2 2 2 2 1 2 3
3 2 2 2 2 1 3 4
4 2 2 {tri_tag} {tri_tag} 4 3 6
5 2 2 1 1 4 6 5
$EndElements
"#
    )
}

#[test]
fn written_meshes_read_back_identically() {
    for (id, level) in [(BenchmarkId::Ex1, 1), (BenchmarkId::Ex2, 0), (BenchmarkId::Ex3, 0)] {
        let mesh = id.mesh(level).unwrap();
        let back = parse_msh(&write_msh(&mesh)).unwrap();
        assert_eq!(back, mesh, "{id:?}");
    }
}

#[test]
fn bundled_cavity_mesh_is_the_default_example3_mesh() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cavity.msh");
    let mesh = read_msh(&path).unwrap();
    assert_eq!(mesh, BenchmarkId::Ex3.mesh(2).unwrap());
}

#[test]
fn version4_file_with_entities() {
    let mesh = parse_msh(TWO_SQUARES_V4).unwrap();
    assert_eq!(mesh.n_vertices(), 6);
    assert_eq!(mesh.n_triangles(), 4);
    let count = |c: EdgeClass| mesh.edges.iter().filter(|e| e.class == c).count();
    assert_eq!(count(EdgeClass::Interface), 1);
    assert_eq!(count(EdgeClass::BoundaryStokes), 3);
    assert_eq!(count(EdgeClass::BoundaryDarcy), 3);
    let lid: Vec<_> = mesh.edges.iter().filter(|e| e.marker == Marker::Lid).collect();
    assert_eq!(lid.len(), 1);
    assert!(lid[0].vertices.iter().all(|&v| mesh.vertices[v][1] == 2.0));
    assert_eq!(mesh.triangles.iter().filter(|t| t.subdomain == Subdomain::Stokes).count(), 2);
    // same mesh through the 2.2 reader
    let v2 = parse_msh(&two_squares_v2("1", "3 4")).unwrap();
    assert_eq!(v2.vertices, mesh.vertices);
    assert_eq!(v2.n_triangles(), mesh.n_triangles());
}

#[test]
fn unsupported_formats_are_named() {
    let v3 = TWO_SQUARES_V4.replacen("4.1 0 8", "3.0 0 8", 1);
    assert!(matches!(parse_msh(&v3), Err(MshError::UnsupportedVersion(v)) if v == "3.0"));
    let bin = TWO_SQUARES_V4.replacen("4.1 0 8", "4.1 1 8", 1);
    assert!(matches!(parse_msh(&bin), Err(MshError::Binary)));
    let quad = two_squares_v2("1", "3 4").replacen("5 2 2 1 1 4 6 5", "5 3 2 1 1 4 6 5 1", 1);
    assert!(matches!(parse_msh(&quad), Err(MshError::UnsupportedElement(3))));
    assert!(matches!(parse_msh("$MeshFormat\n2.2 0"), Err(MshError::Syntax(_))));
}

#[test]
fn untagged_triangles_and_unknown_nodes_are_rejected() {
    assert!(matches!(parse_msh(&two_squares_v2("0", "3 4")), Err(MshError::UntaggedTriangle(2))));
    let bad = two_squares_v2("1", "3 4").replacen("1 1 4 6 5", "1 1 4 6 9", 1);
    assert!(matches!(parse_msh(&bad), Err(MshError::UnknownNode(9))));
}

#[test]
fn interface_lines_must_separate_the_subdomains() {
    // an outer wall tagged as interface
    match parse_msh(&two_squares_v2("1", "1 2")) {
        Err(MshError::NonMatchingInterface(a, b)) => assert_eq!((a, b), ([0.0, 0.0], [1.0, 0.0])),
        other => panic!("{other:?}"),
    }
}

#[test]
fn hanging_interface_nodes_are_reported_with_coordinates() {
    // the Stokes side splits the interface at (0.5, 1), the Darcy side does not
    let text = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
2 1 "stokes"
2 2 "darcy"
$EndPhysicalNames
$Nodes
6
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
5 0.5 1 0
6 0.5 2 0
$EndNodes
$Elements
4
1 2 2 2 2 1 2 3
2 2 2 2 2 1 3 4
3 2 2 1 1 4 5 6
4 2 2 1 1 5 3 6
$EndElements
"#;
    match parse_msh(text) {
        Err(MshError::NonMatchingInterface(a, b)) => {
            let pts = [a, b];
            assert!(pts.contains(&[0.5, 1.0]) || pts.contains(&[0.0, 1.0]) || pts.contains(&[1.0, 1.0]), "{pts:?}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = read_msh(Path::new("/nonexistent/mesh.msh")).unwrap_err();
    assert!(matches!(err, MshError::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/mesh.msh"));
}
