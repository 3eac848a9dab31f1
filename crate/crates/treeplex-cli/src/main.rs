//! Command-line driver: mesh generation, single-cell tree refinement,
//! forest conversion, verification and export. Every subcommand composes
//! library operations; exit codes are 0 (pass), 1 (verification failure or
//! runtime error), 2 (usage).

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;
use std::sync::Arc;
use treeplex::assembly::{
    assemble_symmetric_gradient, max_mode_residual, null_space_test, rigid_body_modes,
    NULL_SPACE_TOL,
};
use treeplex::constraints::build_constraint_matrix;
use treeplex::element::ReferenceElement;
use treeplex::forest::Forest;
use treeplex::mesh_io::{read_dag_named, write_dag, write_vtk};
use treeplex::meshgen::box_mesh;
use treeplex::refine::refine_cell;
use treeplex::reftree::ReferenceTree;
use treeplex::section::{GlobalSection, Section};
use treeplex::{Plex, PointId};

#[derive(Parser)]
#[command(name = "treeplex", version, about = "Non-conformal mesh toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ShapeFlags {
    /// simplicial cells (triangles / tetrahedra)
    #[arg(long, conflicts_with = "hypercube")]
    simplex: bool,
    /// tensor cells (quadrilaterals / hexahedra)
    #[arg(long)]
    hypercube: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a conformal box mesh.
    Generate {
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        shape: ShapeFlags,
        /// cells per direction, e.g. 2x2 or 2x1x1
        #[arg(long)]
        cells: String,
        #[arg(short, long)]
        output: String,
    },
    /// Hierarchically refine a single cell of a conformal mesh.
    RefineCell {
        file: String,
        #[arg(long)]
        cell: usize,
        #[arg(short, long)]
        output: String,
    },
    /// Assemble the symmetric-gradient operator and test that rigid-body
    /// modes lie in its null space.
    Verify {
        file: String,
        /// p1|p2|q1|q2
        #[arg(long)]
        element: String,
    },
    /// Generate a quadtree/octree forest and convert it to a mesh.
    Forest {
        #[arg(long)]
        dim: usize,
        /// `corner[:L]` or `uniform:L`
        #[arg(long = "refine-pattern", default_value = "corner")]
        refine_pattern: String,
        /// enforce 2:1 balance before conversion
        #[arg(long)]
        balance: bool,
        #[arg(short, long)]
        output: String,
    },
    /// Export a mesh file to another format.
    Export {
        file: String,
        /// only "vtk" is supported
        #[arg(long)]
        format: String,
        #[arg(short, long)]
        output: String,
    },
    /// Print strata sizes, overlay summary and the duality-check result.
    Info { file: String },
}

fn parse_cells(spec: &str, dim: usize) -> Result<Vec<usize>, String> {
    let parts: Vec<usize> = spec
        .split('x')
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| format!("bad cell count '{t}'"))
        })
        .collect::<Result<_, _>>()?;
    if parts.len() != dim || parts.contains(&0) {
        return Err(format!("--cells {spec} does not match --dim {dim}"));
    }
    Ok(parts)
}

/// Load a DAG file, attaching the overlay. When the tree block names one of
/// the built-in reference trees it is resolved and the childIDs validated;
/// otherwise the overlay is attached as-is (enough for info/export, not for
/// constraint construction).
fn load_mesh(path: &str) -> Result<Plex, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let (mut plex, entries, name) = read_dag_named(&text).map_err(|e| format!("{path}: {e}"))?;
    if !entries.is_empty() {
        match ReferenceTree::by_name(&name) {
            Ok(rt) => {
                plex.set_reference_tree(Arc::new(rt));
                plex.set_tree(&entries)
                    .map_err(|e| format!("{path}: {e}"))?;
            }
            Err(_) => {
                plex.set_tree_unvalidated(&entries)
                    .map_err(|e| format!("{path}: {e}"))?;
            }
        }
    }
    Ok(plex)
}

fn save(path: &str, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{path}: {e}"))
}

enum Outcome {
    Ok,
    VerifyFailed,
    Usage(String),
    Runtime(String),
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Generate {
            dim,
            shape,
            cells,
            output,
        } => {
            if shape.simplex == shape.hypercube {
                return Outcome::Usage("choose exactly one of --simplex/--hypercube".into());
            }
            let cells = match parse_cells(&cells, dim) {
                Ok(c) => c,
                Err(e) => return Outcome::Usage(e),
            };
            match box_mesh(dim, shape.simplex, &cells) {
                Ok(plex) => match save(&output, &write_dag(&plex)) {
                    Ok(()) => {
                        let (cs, ce) = plex.height_stratum(0).unwrap();
                        println!(
                            "wrote {} ({} cells, {} points)",
                            output,
                            ce - cs,
                            plex.num_points()
                        );
                        Outcome::Ok
                    }
                    Err(e) => Outcome::Runtime(e),
                },
                Err(e) => Outcome::Usage(e.to_string()),
            }
        }
        Command::RefineCell { file, cell, output } => {
            let plex = match load_mesh(&file) {
                Ok(p) => p,
                Err(e) => return Outcome::Runtime(e),
            };
            let (cs, ce) = plex.height_stratum(0).unwrap();
            if cell < cs || cell >= ce {
                return Outcome::Usage(format!("--cell {cell} is not a cell (range {cs}..{ce})"));
            }
            let simplex = match plex.point_shape(PointId(cell)) {
                Ok(s) => s.is_simplex(),
                Err(e) => return Outcome::Runtime(e.to_string()),
            };
            let reftree = match ReferenceTree::default_tree(plex.dim(), simplex) {
                Ok(rt) => Arc::new(rt),
                Err(e) => return Outcome::Runtime(e.to_string()),
            };
            match refine_cell(&plex, PointId(cell), reftree) {
                Ok(refined) => match save(&output, &write_dag(&refined)) {
                    Ok(()) => {
                        let n = refined
                            .tree()
                            .map(|t| t.constrained_points().len())
                            .unwrap_or(0);
                        println!("wrote {output} ({n} constrained points)");
                        Outcome::Ok
                    }
                    Err(e) => Outcome::Runtime(e),
                },
                Err(e) => Outcome::Runtime(e.to_string()),
            }
        }
        Command::Verify { file, element } => {
            let (want_simplex, degree) = match element.as_str() {
                "p1" => (true, 1),
                "p2" => (true, 2),
                "q1" => (false, 1),
                "q2" => (false, 2),
                other => return Outcome::Usage(format!("unknown element '{other}'")),
            };
            let plex = match load_mesh(&file) {
                Ok(p) => p,
                Err(e) => return Outcome::Runtime(e),
            };
            let (cs, ce) = plex.height_stratum(0).unwrap();
            if cs == ce {
                return Outcome::Usage("mesh has no cells".into());
            }
            let shape = match plex.point_shape(PointId(cs)) {
                Ok(s) => s,
                Err(e) => return Outcome::Runtime(e.to_string()),
            };
            if shape.is_simplex() != want_simplex {
                return Outcome::Usage(format!(
                    "element {element} does not match the mesh cell shape"
                ));
            }
            let dim = plex.dim();
            let elem = ReferenceElement::new(shape, degree, dim).unwrap();
            let section = match Section::from_element(&plex, &elem) {
                Ok(s) => s,
                Err(e) => return Outcome::Runtime(e.to_string()),
            };
            let gsection = GlobalSection::new(&plex, &section);
            let constrained: usize = (0..plex.num_points())
                .filter(|&p| gsection.is_constrained(PointId(p)))
                .map(|p| section.dof(PointId(p)))
                .sum();
            println!("global size: {}", gsection.size);
            println!("constrained dofs: {constrained}");
            let c = match build_constraint_matrix(&plex, &section, &gsection, &elem) {
                Ok(c) => c,
                Err(e) => return Outcome::Runtime(e.to_string()),
            };
            let e = match assemble_symmetric_gradient(&plex, &elem, &section, &gsection, &c) {
                Ok(m) => m,
                Err(e) => return Outcome::Runtime(e.to_string()),
            };
            let modes = rigid_body_modes(&plex, &elem, &gsection).unwrap();
            let norm_e = e.inf_norm();
            for (k, m) in modes.iter().enumerate() {
                let r = e.mul_vec(m);
                let rn = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let mn = m.iter().map(|v| v.abs()).fold(0.0, f64::max);
                println!(
                    "mode {k}: max residual {:.3e}",
                    rn / (norm_e * mn).max(f64::MIN_POSITIVE)
                );
            }
            let res = max_mode_residual(&e, &modes);
            if null_space_test(&e, &modes) {
                println!(
                    "PASS ({} modes, max relative residual {res:.3e} <= {NULL_SPACE_TOL:.0e})",
                    modes.len()
                );
                Outcome::Ok
            } else {
                println!(
                    "FAIL ({} modes, max relative residual {res:.3e} > {NULL_SPACE_TOL:.0e})",
                    modes.len()
                );
                Outcome::VerifyFailed
            }
        }
        Command::Forest {
            dim,
            refine_pattern,
            balance,
            output,
        } => {
            let forest = match build_forest(dim, &refine_pattern) {
                Ok(f) => f,
                Err(e) => return Outcome::Usage(e),
            };
            let forest = if balance {
                forest.balance_2to1()
            } else {
                forest
            };
            match forest.convert_to_plex() {
                Ok(plex) => match save(&output, &write_dag(&plex)) {
                    Ok(()) => {
                        let (cs, ce) = plex.height_stratum(0).unwrap();
                        println!(
                            "wrote {} ({} leaves, {} constrained points)",
                            output,
                            ce - cs,
                            plex.tree()
                                .map(|t| t.constrained_points().len())
                                .unwrap_or(0)
                        );
                        Outcome::Ok
                    }
                    Err(e) => Outcome::Runtime(e),
                },
                Err(e) => Outcome::Runtime(e.to_string()),
            }
        }
        Command::Export {
            file,
            format,
            output,
        } => {
            if format != "vtk" {
                return Outcome::Usage(format!("unsupported format '{format}'"));
            }
            let plex = match load_mesh(&file) {
                Ok(p) => p,
                Err(e) => return Outcome::Runtime(e),
            };
            match write_vtk(&plex, None) {
                Ok(text) => match save(&output, &text) {
                    Ok(()) => Outcome::Ok,
                    Err(e) => Outcome::Runtime(e),
                },
                Err(e) => Outcome::Runtime(e.to_string()),
            }
        }
        Command::Info { file } => {
            let plex = match load_mesh(&file) {
                Ok(p) => p,
                Err(e) => return Outcome::Runtime(e),
            };
            let counts: Vec<String> = plex
                .strata()
                .iter()
                .map(|&(a, b)| (b - a).to_string())
                .collect();
            let constrained = plex
                .tree()
                .map(|t| t.constrained_points().len())
                .unwrap_or(0);
            println!("points: {}", plex.num_points());
            println!("dim: {}", plex.dim());
            println!(
                "strata: {}, constrained points: {}",
                counts.join("/"),
                constrained
            );
            let duality = check_duality(&plex);
            println!("duality: {duality}");
            Outcome::Ok
        }
    }
}

fn build_forest(dim: usize, pattern: &str) -> Result<Forest, String> {
    let (kind, level) = match pattern.split_once(':') {
        Some((k, l)) => (k, l.parse::<u32>().map_err(|_| format!("bad level '{l}'"))?),
        None => (pattern, 3),
    };
    match kind {
        "corner" => Forest::corner_refined(dim, level).map_err(|e| e.to_string()),
        "uniform" => Forest::uniform(dim, level).map_err(|e| e.to_string()),
        other => Err(format!("unknown refine pattern '{other}'")),
    }
}

fn check_duality(plex: &Plex) -> String {
    let mut broken = 0usize;
    for p in 0..plex.num_points() {
        let p = PointId(p);
        for &(q, _) in plex.cone(p).unwrap() {
            if !plex.support(q).unwrap().contains(&p) {
                return "violated (cone without matching support)".into();
            }
        }
        for &q in plex.support(p).unwrap() {
            if !plex.cone(q).unwrap().iter().any(|&(r, _)| r == p) {
                broken += 1;
            }
        }
    }
    if broken == 0 {
        "conformal (cone/support dual)".into()
    } else {
        format!("one-sided ({broken} support entries without cone arrows)")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Outcome::Ok => ExitCode::from(0),
        Outcome::VerifyFailed => ExitCode::from(1),
        Outcome::Usage(msg) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Outcome::Runtime(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
