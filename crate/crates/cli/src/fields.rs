//! Face-field input files and structured-grid field dumps.
//!
//! Both formats are specified in `docs/field-formats.md`.

use std::fmt::Write as _;
use std::path::Path;

use vpp_core::geometry::{sample_chi, Obstacle};
use vpp_core::mesh::{curl, divergence, CellField, Grid, VelocityField};
use vpp_core::vpp::FlowState;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FaceFile {
    pub velocity: VelocityField,
    pub pressure: Option<CellField>,
}

/// Parses a face-field file for `grid`. Wall-normal components are
/// zeroed, so only interior normal faces carry data.
pub fn parse_face_file(text: &str, grid: &Grid) -> std::result::Result<FaceFile, String> {
    let mut tokens = text.lines().enumerate().flat_map(|(k, line)| {
        let data = line.split('#').next().unwrap_or("");
        data.split_whitespace().map(move |t| (k + 1, t))
    });
    let mut expect = |word: &str| match tokens.next() {
        Some((_, t)) if t == word => Ok(()),
        Some((line, t)) => Err(format!("line {line}: expected `{word}`, found `{t}`")),
        None => Err(format!("unexpected end of file, expected `{word}`")),
    };
    expect("faces")?;
    let mut next_number = |what: &str| -> std::result::Result<(usize, f64), String> {
        match tokens.next() {
            Some((line, t)) => t
                .parse::<f64>()
                .map(|v| (line, v))
                .map_err(|_| format!("line {line}: expected a number for {what}, found `{t}`")),
            None => Err(format!("unexpected end of file reading {what}")),
        }
    };
    let (line, nx) = next_number("nx")?;
    let (_, ny) = next_number("ny")?;
    if nx != grid.nx() as f64 || ny != grid.ny() as f64 {
        return Err(format!(
            "line {line}: file is for a {nx}x{ny} grid, config has {}x{}",
            grid.nx(),
            grid.ny()
        ));
    }

    let mut tokens = tokens.peekable();
    let mut section = |name: &str, count: usize| -> std::result::Result<Option<Vec<f64>>, String> {
        match tokens.peek() {
            Some((_, t)) if *t == name => {
                tokens.next();
            }
            Some((line, t)) => return Err(format!("line {line}: expected `{name}`, found `{t}`")),
            None => return Ok(None),
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            match tokens.next() {
                Some((line, t)) => {
                    let v: f64 = t.parse().map_err(|_| {
                        format!("line {line}: expected a number in `{name}`, found `{t}`")
                    })?;
                    if !v.is_finite() {
                        return Err(format!("line {line}: non-finite value in `{name}`"));
                    }
                    out.push(v);
                }
                None => {
                    return Err(format!(
                        "`{name}` needs {count} values, found {}",
                        out.len()
                    ))
                }
            }
        }
        Ok(Some(out))
    };
    let u = section("u", grid.n_u())?.ok_or("missing `u` section")?;
    let v = section("v", grid.n_v())?.ok_or("missing `v` section")?;
    let p = section("p", grid.n_cells())?;
    if let Some((line, t)) = tokens.next() {
        return Err(format!(
            "line {line}: unexpected `{t}` after the last section"
        ));
    }
    let mut velocity = VelocityField::zeros(*grid);
    velocity.u = u;
    velocity.v = v;
    velocity.zero_normal_boundary();
    let pressure = match p {
        Some(values) => Some(CellField::from_values(*grid, values).map_err(|e| e.to_string())?),
        None => None,
    };
    Ok(FaceFile { velocity, pressure })
}

pub fn read_face_file(path: &Path, grid: &Grid, field: &str) -> Result<FaceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_face_file(&text, grid)
        .map_err(|r| CliError::invalid(field, format!("{}: {r}", path.display())))
}

/// Face-field file text for `velocity` and, optionally, `pressure`.
pub fn format_face_file(velocity: &VelocityField, pressure: Option<&CellField>) -> String {
    let g = velocity.grid();
    let mut out = format!("faces {} {}\n", g.nx(), g.ny());
    let mut block = |name: &str, values: &[f64], per_row: usize| {
        out.push_str(name);
        out.push('\n');
        for row in values.chunks(per_row) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    };
    block("u", &velocity.u, g.nx() + 1);
    block("v", &velocity.v, g.nx());
    if let Some(p) = pressure {
        block("p", &p.values, g.nx());
    }
    out
}

fn scalars(out: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    let _ = writeln!(out, "SCALARS {name} double 1");
    out.push_str("LOOKUP_TABLE default\n");
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
}

/// Legacy-VTK ASCII structured grid with cell and node data of `state`.
pub fn format_vtk(state: &FlowState, obstacle: &Obstacle) -> vpp_core::Result<String> {
    let g = *state.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "vpp step {} t {:e}", state.n, state.t);
    out.push_str("ASCII\nDATASET STRUCTURED_GRID\n");
    let _ = writeln!(out, "DIMENSIONS {} {} 1", nx + 1, ny + 1);
    let _ = writeln!(out, "POINTS {} double", g.n_nodes());
    for j in 0..=ny {
        for i in 0..=nx {
            let (x, y) = g.node_position(i, j);
            let _ = writeln!(out, "{x:e} {y:e} 0e0");
        }
    }
    let _ = writeln!(out, "CELL_DATA {}", g.n_cells());
    scalars(&mut out, "pressure", state.p.cells().values.iter().copied());
    scalars(
        &mut out,
        "divergence",
        divergence(&state.v).values.into_iter(),
    );
    if obstacle.is_present() {
        let chi = sample_chi(obstacle, state.t, &g)?;
        scalars(&mut out, "chi", chi.values.into_iter());
    }
    out.push_str("VECTORS velocity double\n");
    for j in 0..ny {
        for i in 0..nx {
            let (u, v) = state.v.cell_value(i, j);
            let _ = writeln!(out, "{u:e} {v:e} 0e0");
        }
    }
    let _ = writeln!(out, "POINT_DATA {}", g.n_nodes());
    scalars(&mut out, "vorticity", curl(&state.v).values.into_iter());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vpp_core::manufactured::random_solenoidal;
    use vpp_core::mesh::PressureField;

    #[test]
    fn face_file_round_trips_bit_exactly() {
        let g = Grid::new(5, 3, 1.0, 0.6).unwrap();
        let v = random_solenoidal(&g, 4);
        let p = CellField::from_fn(g, |x, y| x - y * y);
        let text = format_face_file(&v, Some(&p));
        let f = parse_face_file(&text, &g).unwrap();
        assert_eq!(f.velocity, v);
        assert_eq!(f.pressure.unwrap(), p);
        let f = parse_face_file(&format_face_file(&v, None), &g).unwrap();
        assert!(f.pressure.is_none());
    }

    #[test]
    fn face_file_errors_name_the_line() {
        let g = Grid::new(2, 2, 1.0, 1.0).unwrap();
        let good = "# comment\nfaces 2 2\nu\n0 1 0\n0 1 0\nv\n0 0\n0 0\n0 0 # trailing\n";
        assert!(parse_face_file(good, &g).is_ok());
        let err = parse_face_file("faces 2 2\nu\n0 x 0\n", &g).unwrap_err();
        assert!(err.starts_with("line 3"), "{err}");
        let err = parse_face_file("faces 3 2\n", &g).unwrap_err();
        assert!(err.contains("3x2"), "{err}");
        assert!(parse_face_file("faces 2 2\nu\n0 1 0 0 1 0\nv\n0 0 0\n", &g).is_err());
        assert!(parse_face_file("faces 2 2\nu\n0 1 0 0 1 0\nv\n0 0 0 0 0 0\n7\n", &g).is_err());
    }

    #[test]
    fn wall_normal_values_are_dropped() {
        let g = Grid::new(2, 2, 1.0, 1.0).unwrap();
        let f = parse_face_file("faces 2 2\nu\n5 1 5 5 2 5\nv\n3 3 0 0 3 3\n", &g).unwrap();
        assert_eq!(f.velocity.u, vec![0.0, 1.0, 0.0, 0.0, 2.0, 0.0]);
        assert_eq!(f.velocity.v, vec![0.0; 6]);
    }

    #[test]
    fn vtk_layout() {
        let g = Grid::new(2, 2, 1.0, 0.5).unwrap();
        let s = FlowState::initial(VelocityField::zeros(g), PressureField::zeros(g));
        let text = format_vtk(&s, &Obstacle::none(1.0)).unwrap();
        let expected = "# vtk DataFile Version 3.0\n\
vpp step 0 t 0e0\n\
ASCII\n\
DATASET STRUCTURED_GRID\n\
DIMENSIONS 3 3 1\n\
POINTS 9 double\n\
0e0 0e0 0e0\n5e-1 0e0 0e0\n1e0 0e0 0e0\n\
0e0 2.5e-1 0e0\n5e-1 2.5e-1 0e0\n1e0 2.5e-1 0e0\n\
0e0 5e-1 0e0\n5e-1 5e-1 0e0\n1e0 5e-1 0e0\n\
CELL_DATA 4\n\
SCALARS pressure double 1\nLOOKUP_TABLE default\n0e0\n0e0\n0e0\n0e0\n\
SCALARS divergence double 1\nLOOKUP_TABLE default\n0e0\n0e0\n0e0\n0e0\n\
VECTORS velocity double\n0e0 0e0 0e0\n0e0 0e0 0e0\n0e0 0e0 0e0\n0e0 0e0 0e0\n\
POINT_DATA 9\n\
SCALARS vorticity double 1\nLOOKUP_TABLE default\n0e0\n0e0\n0e0\n0e0\n0e0\n0e0\n0e0\n0e0\n0e0\n";
        assert_eq!(text, expected);
    }
}
