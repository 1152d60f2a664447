//! CSV exports of nodal fields, cell strains and solver history, and a
//! legacy-VTK structured grid.

use super::{read_text, write_text, IoError};
use crate::constitutive::Material;
use crate::functional::CellState;
use crate::grid::{Configuration, PlateGrid};
use crate::so3::{Rotation, Vec3};
use crate::solver::HistoryEntry;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One node of `fields.csv`. `Q` is written row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub i: usize,
    pub j: usize,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    #[serde(rename = "Q11")]
    pub q11: f64,
    #[serde(rename = "Q12")]
    pub q12: f64,
    #[serde(rename = "Q13")]
    pub q13: f64,
    #[serde(rename = "Q21")]
    pub q21: f64,
    #[serde(rename = "Q22")]
    pub q22: f64,
    #[serde(rename = "Q23")]
    pub q23: f64,
    #[serde(rename = "Q31")]
    pub q31: f64,
    #[serde(rename = "Q32")]
    pub q32: f64,
    #[serde(rename = "Q33")]
    pub q33: f64,
}

const FIELD_HEADER: [&str; 16] = [
    "i", "j", "x1", "x2", "y1", "y2", "y3", "Q11", "Q12", "Q13", "Q21", "Q22", "Q23", "Q31", "Q32", "Q33",
];

/// One cell of `strains.csv`: center, `E` and `K` in stacked (column-major)
/// order and the two energy densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainRecord {
    pub i: usize,
    pub j: usize,
    pub x1: f64,
    pub x2: f64,
    #[serde(rename = "E11")]
    pub e11: f64,
    #[serde(rename = "E21")]
    pub e21: f64,
    #[serde(rename = "E31")]
    pub e31: f64,
    #[serde(rename = "E12")]
    pub e12: f64,
    #[serde(rename = "E22")]
    pub e22: f64,
    #[serde(rename = "E32")]
    pub e32: f64,
    #[serde(rename = "K11")]
    pub k11: f64,
    #[serde(rename = "K21")]
    pub k21: f64,
    #[serde(rename = "K31")]
    pub k31: f64,
    #[serde(rename = "K12")]
    pub k12: f64,
    #[serde(rename = "K22")]
    pub k22: f64,
    #[serde(rename = "K32")]
    pub k32: f64,
    pub w_membrane: f64,
    pub w_bending: f64,
}

impl StrainRecord {
    pub fn strain(&self) -> [f64; 6] {
        [self.e11, self.e21, self.e31, self.e12, self.e22, self.e32]
    }

    pub fn bending(&self) -> [f64; 6] {
        [self.k11, self.k21, self.k31, self.k12, self.k22, self.k32]
    }
}

const HISTORY_HEADER: [&str; 7] = ["iteration", "total", "membrane", "bending", "load_potential", "grad_norm", "step"];

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| IoError::invalid(path, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::invalid(path, e.to_string()))?;
    std::fs::write(path, bytes).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn read_csv<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>, IoError> {
    let text = read_text(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let found = r.headers().map_err(|e| IoError::invalid(path, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(IoError::invalid(
            path,
            format!("header must be {:?}, found {:?}", header, found.iter().collect::<Vec<_>>()),
        ));
    }
    r.deserialize()
        .enumerate()
        .map(|(k, row)| row.map_err(|e| IoError::invalid(path, format!("data row {}: {e}", k + 1))))
        .collect()
}

pub fn write_fields(path: &Path, grid: &PlateGrid, config: &Configuration) -> Result<(), IoError> {
    config.check_shape(grid).map_err(|e| IoError::invalid(path, e.to_string()))?;
    write_csv(
        path,
        (0..grid.node_count()).map(|n| {
            let (i, j) = grid.node_ij(n);
            let x = grid.reference_position(n);
            let y = config.y[n];
            let q = config.q[n].to_row_major();
            FieldRecord {
                i,
                j,
                x1: x.x,
                x2: x.y,
                y1: y.x,
                y2: y.y,
                y3: y.z,
                q11: q[0][0],
                q12: q[0][1],
                q13: q[0][2],
                q21: q[1][0],
                q22: q[1][1],
                q23: q[1][2],
                q31: q[2][0],
                q32: q[2][1],
                q33: q[2][2],
            }
        }),
    )
}

/// Reads `fields.csv` back and checks it against `grid`: node order and
/// reference coordinates must match and every `Q` must be a rotation.
pub fn read_fields(path: &Path, grid: &PlateGrid) -> Result<Configuration, IoError> {
    let rows: Vec<FieldRecord> = read_csv(path, &FIELD_HEADER)?;
    if rows.len() != grid.node_count() {
        return Err(IoError::invalid(
            path,
            format!("{} data rows, grid has {} nodes", rows.len(), grid.node_count()),
        ));
    }
    let [l1, l2] = grid.lengths();
    let tol = 1e-12 * l1.max(l2);
    let mut config = Configuration::reference(grid);
    for (n, r) in rows.iter().enumerate() {
        let row = n + 1;
        if (r.i, r.j) != grid.node_ij(n) {
            return Err(IoError::invalid(path, format!("data row {row}: expected node {:?}", grid.node_ij(n))));
        }
        let x = grid.reference_position(n);
        if (r.x1 - x.x).abs() > tol || (r.x2 - x.y).abs() > tol {
            return Err(IoError::invalid(path, format!("data row {row}: reference position does not match the grid")));
        }
        let y = Vec3::new(r.y1, r.y2, r.y3);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(IoError::invalid(path, format!("data row {row}: non-finite position")));
        }
        config.y[n] = y;
        let rows3 = [[r.q11, r.q12, r.q13], [r.q21, r.q22, r.q23], [r.q31, r.q32, r.q33]];
        config.q[n] = Rotation::from_row_major(&rows3).map_err(|e| IoError::invalid(path, format!("data row {row}: {e}")))?;
    }
    Ok(config)
}

pub fn write_strains(path: &Path, grid: &PlateGrid, config: &Configuration, material: &Material) -> Result<(), IoError> {
    let state = CellState::evaluate(grid, config, material, false).map_err(|e| IoError::invalid(path, e.to_string()))?;
    write_csv(
        path,
        state.cells.iter().zip(&state.energy).enumerate().map(|(c, (k, w))| {
            let (i, j) = grid.cell_ij(c);
            let [x1, x2] = grid.cell_center(c);
            let e = k.strain.stacked();
            let b = k.bending.stacked();
            StrainRecord {
                i,
                j,
                x1,
                x2,
                e11: e[0],
                e21: e[1],
                e31: e[2],
                e12: e[3],
                e22: e[4],
                e32: e[5],
                k11: b[0],
                k21: b[1],
                k31: b[2],
                k12: b[3],
                k22: b[4],
                k32: b[5],
                w_membrane: w.membrane,
                w_bending: w.bending,
            }
        }),
    )
}

pub fn read_strains(path: &Path) -> Result<Vec<StrainRecord>, IoError> {
    let mut header = vec!["i", "j", "x1", "x2"];
    header.extend(["E11", "E21", "E31", "E12", "E22", "E32", "K11", "K21", "K31", "K12", "K22", "K32"]);
    header.extend(["w_membrane", "w_bending"]);
    read_csv(path, &header)
}

pub fn write_history(path: &Path, history: &[HistoryEntry]) -> Result<(), IoError> {
    if history.is_empty() {
        return write_text(path, &(HISTORY_HEADER.join(",") + "\n"));
    }
    write_csv(path, history)
}

pub fn read_history(path: &Path) -> Result<Vec<HistoryEntry>, IoError> {
    read_csv(path, &HISTORY_HEADER)
}

/// Contents of a legacy-VTK structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub title: String,
    pub dimensions: [usize; 3],
    pub points: Vec<Vec3>,
    /// Point-data vector fields in file order.
    pub vectors: Vec<(String, Vec<Vec3>)>,
}

/// Deformed positions as `POINTS`, with the displacement and the three
/// directors as point-data vectors.
pub fn write_vtk(path: &Path, grid: &PlateGrid, config: &Configuration) -> Result<(), IoError> {
    use std::fmt::Write;
    config.check_shape(grid).map_err(|e| IoError::invalid(path, e.to_string()))?;
    let nn = grid.node_count();
    let [n1, n2] = grid.nodes();
    let mut s = String::new();
    let push = |s: &mut String, v: &Vec3| {
        let _ = writeln!(s, "{:e} {:e} {:e}", v.x, v.y, v.z);
    };
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nplate6 deformed configuration\nASCII\nDATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {n1} {n2} 1\nPOINTS {nn} double");
    for y in &config.y {
        push(&mut s, y);
    }
    let _ = writeln!(s, "POINT_DATA {nn}\nVECTORS displacement double");
    for n in 0..nn {
        push(&mut s, &config.displacement(grid, n));
    }
    for k in 0..3 {
        let _ = writeln!(s, "VECTORS d{} double", k + 1);
        for q in &config.q {
            push(&mut s, &q.director(k));
        }
    }
    write_text(path, &s)
}

/// Parses the subset of the legacy format that [`write_vtk`] emits.
pub fn read_vtk(path: &Path) -> Result<VtkData, IoError> {
    let text = read_text(path)?;
    let bad = |m: &str| IoError::invalid(path, m.to_string());
    let mut lines = text.lines();
    if !lines.next().is_some_and(|l| l.starts_with("# vtk DataFile Version")) {
        return Err(bad("missing legacy VTK header"));
    }
    let title = lines.next().ok_or_else(|| bad("missing title"))?.to_string();
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut expect = |word: &str| match tokens.next() {
        Some(t) if t == word => Ok(()),
        other => Err(bad(&format!("expected {word}, found {other:?}"))),
    };
    expect("ASCII")?;
    expect("DATASET")?;
    expect("STRUCTURED_GRID")?;
    expect("DIMENSIONS")?;
    let rest: Vec<&str> = text.lines().skip(2).flat_map(str::split_whitespace).skip(4).collect();
    let mut it = rest.into_iter();
    let usize_tok = |it: &mut std::vec::IntoIter<&str>| -> Result<usize, IoError> {
        it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("expected an integer"))
    };
    let dimensions = [usize_tok(&mut it)?, usize_tok(&mut it)?, usize_tok(&mut it)?];
    let count = dimensions.iter().product::<usize>();
    let read_vectors = |it: &mut std::vec::IntoIter<&str>| -> Result<Vec<Vec3>, IoError> {
        (0..count)
            .map(|_| {
                let mut c = [0.0; 3];
                for v in &mut c {
                    *v = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("expected a number"))?;
                }
                Ok(Vec3::from(c))
            })
            .collect()
    };
    if it.next() != Some("POINTS") {
        return Err(bad("expected POINTS"));
    }
    if usize_tok(&mut it)? != count || it.next() != Some("double") {
        return Err(bad("POINTS count or type does not match DIMENSIONS"));
    }
    let points = read_vectors(&mut it)?;
    let mut vectors = Vec::new();
    match it.next() {
        None => {}
        Some("POINT_DATA") => {
            if usize_tok(&mut it)? != count {
                return Err(bad("POINT_DATA count does not match DIMENSIONS"));
            }
            while let Some(t) = it.next() {
                if t != "VECTORS" {
                    return Err(bad(&format!("unsupported section {t}")));
                }
                let name = it.next().ok_or_else(|| bad("missing vector name"))?.to_string();
                if it.next() != Some("double") {
                    return Err(bad("vector data must be double"));
                }
                vectors.push((name, read_vectors(&mut it)?));
            }
        }
        Some(t) => return Err(bad(&format!("unsupported section {t}"))),
    }
    Ok(VtkData {
        title,
        dimensions,
        points,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::tests::{plate, random_configuration};

    fn setup() -> (tempfile::TempDir, PlateGrid, Configuration) {
        let grid = PlateGrid::clamped_square(1.0, 4, 0.1).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
        let config = random_configuration(&grid, &mut rng, 0.3);
        (tempfile::tempdir().unwrap(), grid, config)
    }

    #[test]
    fn fields_round_trip_bitwise() {
        let (dir, grid, config) = setup();
        let p = dir.path().join("fields.csv");
        write_fields(&p, &grid, &config).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("i,j,x1,x2,y1,y2,y3,Q11,Q12,Q13,Q21,Q22,Q23,Q31,Q32,Q33\n"));
        assert_eq!(read_fields(&p, &grid).unwrap(), config);
    }

    #[test]
    fn corrupted_fields_are_rejected() {
        let (dir, grid, config) = setup();
        let p = dir.path().join("fields.csv");
        write_fields(&p, &grid, &config).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();

        let mut bad_q = lines.clone();
        let mut cells: Vec<String> = bad_q[3].split(',').map(String::from).collect();
        cells[7] = "2.0".into();
        bad_q[3] = cells.join(",");
        std::fs::write(&p, bad_q.join("\n")).unwrap();
        assert!(read_fields(&p, &grid).unwrap_err().to_string().contains("data row 3"));

        lines.pop();
        std::fs::write(&p, lines.join("\n")).unwrap();
        assert!(read_fields(&p, &grid).unwrap_err().to_string().contains("15 data rows"));

        std::fs::write(&p, "i,j\n0,0\n").unwrap();
        assert!(read_fields(&p, &grid).unwrap_err().to_string().contains("header"));

        std::fs::write(&p, text.replacen("0,0,0", "0,0,zero", 1)).unwrap();
        assert!(read_fields(&p, &grid).is_err());
    }

    #[test]
    fn strains_and_history_round_trip() {
        let (dir, grid, config) = setup();
        let p = dir.path().join("strains.csv");
        write_strains(&p, &grid, &config, &plate()).unwrap();
        let rows = read_strains(&p).unwrap();
        let state = CellState::evaluate(&grid, &config, &plate(), false).unwrap();
        assert_eq!(rows.len(), grid.cell_count());
        for (r, c) in rows.iter().zip(&state.cells) {
            assert_eq!(r.strain(), c.strain.stacked());
            assert_eq!(r.bending(), c.bending.stacked());
        }
        let h = vec![
            HistoryEntry {
                iteration: 0,
                total: 1.0 / 3.0,
                membrane: 0.5,
                bending: 1e-300,
                load_potential: -2.5e-7,
                grad_norm: 1e-9,
                step: 0.0,
            },
            HistoryEntry {
                iteration: 1,
                total: 0.1,
                membrane: 0.2,
                bending: 0.3,
                load_potential: 0.4,
                grad_norm: 0.5,
                step: 0.25,
            },
        ];
        let p = dir.path().join("history.csv");
        write_history(&p, &h).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("iteration,total,membrane,bending,load_potential,grad_norm,step\n"));
        assert_eq!(read_history(&p).unwrap(), h);
        write_history(&p, &[]).unwrap();
        assert!(read_history(&p).unwrap().is_empty());
    }

    #[test]
    fn vtk_round_trip() {
        let (dir, grid, config) = setup();
        let p = dir.path().join("fields.vtk");
        write_vtk(&p, &grid, &config).unwrap();
        let v = read_vtk(&p).unwrap();
        assert_eq!(v.dimensions, [4, 4, 1]);
        assert_eq!(v.points, config.y);
        let names: Vec<_> = v.vectors.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["displacement", "d1", "d2", "d3"]);
        for (n, q) in config.q.iter().enumerate() {
            assert_eq!(v.vectors[3].1[n], q.director(2));
        }
        std::fs::write(&p, "# vtk DataFile Version 3.0\nt\nBINARY\n").unwrap();
        assert!(read_vtk(&p).is_err());
    }
}
