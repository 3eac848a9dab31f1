//! End-to-end runs of the command-line driver.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treeplex"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("treeplex-cli-{}-{}", std::process::id(), name));
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn generate_refine_verify_pipeline() {
    let mesh = tmp("tri.plexdag");
    let refined = tmp("tri-refined.plexdag");
    let out = run(&[
        "generate",
        "--dim",
        "2",
        "--simplex",
        "--cells",
        "2x2",
        "-o",
        mesh.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&mesh).unwrap();
    assert!(text.starts_with("plexdag 1\n"));

    let out = run(&[
        "refine-cell",
        mesh.to_str().unwrap(),
        "--cell",
        "0",
        "-o",
        refined.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    for element in ["p1", "p2"] {
        let out = run(&["verify", refined.to_str().unwrap(), "--element", element]);
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "{element}: {stdout}");
        assert!(stdout.contains("PASS"), "{element}: {stdout}");
        assert!(stdout.contains("global size"));
        assert!(stdout.contains("mode 0"));
    }

    // element/mesh mismatch is a usage error
    let out = run(&["verify", refined.to_str().unwrap(), "--element", "q1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_unit_square_counts() {
    let mesh = tmp("square.plexdag");
    run(&[
        "generate",
        "--dim",
        "2",
        "--simplex",
        "--cells",
        "1x1",
        "-o",
        mesh.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&mesh).unwrap();
    assert!(text.contains("counts 2 5 4"));
}

#[test]
fn forest_pipeline_2d_and_3d() {
    for dim in ["2", "3"] {
        let mesh = tmp(&format!("forest{dim}.plexdag"));
        let out = run(&[
            "forest",
            "--dim",
            dim,
            "--refine-pattern",
            "corner:2",
            "--balance",
            "-o",
            mesh.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let out = run(&["verify", mesh.to_str().unwrap(), "--element", "q1"]);
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "dim {dim}: {stdout}");
        assert!(stdout.contains("PASS"));
    }
}

#[test]
fn export_vtk_and_info() {
    let mesh = tmp("hexes.plexdag");
    let vtk = tmp("hexes.vtk");
    run(&[
        "generate",
        "--dim",
        "3",
        "--hypercube",
        "--cells",
        "1x1x1",
        "-o",
        mesh.to_str().unwrap(),
    ]);
    let out = run(&[
        "export",
        mesh.to_str().unwrap(),
        "--format",
        "vtk",
        "-o",
        vtk.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&vtk).unwrap();
    assert!(text.starts_with("# vtk DataFile Version 2.0\n"));
    assert!(text.contains("CELL_TYPES 1\n12\n"));

    let out = run(&["info", mesh.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("strata: 1/6/12/8, constrained points: 0"));
    assert!(stdout.contains("duality: conformal"));
}

#[test]
fn info_reports_nonconformal_overlay() {
    let mesh = tmp("quads.plexdag");
    let refined = tmp("quads-refined.plexdag");
    run(&[
        "generate",
        "--dim",
        "2",
        "--hypercube",
        "--cells",
        "2x2",
        "-o",
        mesh.to_str().unwrap(),
    ]);
    run(&[
        "refine-cell",
        mesh.to_str().unwrap(),
        "--cell",
        "0",
        "-o",
        refined.to_str().unwrap(),
    ]);
    let out = run(&["info", refined.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("constrained points: 6"));
    assert!(stdout.contains("duality: one-sided"));
}

#[test]
fn info_on_the_three_triangle_fixture() {
    // a mesh with a custom reference tree still prints its overlay summary
    let mesh = tmp("fig5.plexdag");
    let plex = treeplex::samples::three_triangle_nonconformal();
    std::fs::write(&mesh, treeplex::mesh_io::write_dag(&plex)).unwrap();
    let out = run(&["info", mesh.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success());
    assert!(stdout.contains("strata: 3/7/6, constrained points: 3"));
    assert!(stdout.contains("duality: one-sided"));
}

#[test]
fn deterministic_output() {
    let a = tmp("det-a.plexdag");
    let b = tmp("det-b.plexdag");
    for f in [&a, &b] {
        run(&[
            "forest",
            "--dim",
            "2",
            "--refine-pattern",
            "corner:3",
            "--balance",
            "-o",
            f.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "identical inputs must give byte-identical files"
    );
}

#[test]
fn usage_errors_exit_2() {
    // unknown flag
    let out = run(&["generate", "--dim", "2", "--cells", "1x1"]);
    assert_eq!(out.status.code(), Some(2));
    // both shapes
    let out = run(&[
        "generate",
        "--dim",
        "2",
        "--simplex",
        "--hypercube",
        "--cells",
        "1x1",
        "-o",
        "x",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // bad cells spec
    let out = run(&[
        "generate",
        "--dim",
        "2",
        "--simplex",
        "--cells",
        "1x1x1",
        "-o",
        "x",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // unknown element
    let out = run(&["verify", "nofile", "--element", "p9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_runtime_error() {
    let out = run(&["info", "does-not-exist.plexdag"]);
    assert_eq!(out.status.code(), Some(1));
}
