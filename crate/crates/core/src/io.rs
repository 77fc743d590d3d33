//! Text formats: OBJ meshes of parameter grids, curvature and graph CSVs.
//! Numbers are written with 17 significant digits so that every value
//! reads back bit-for-bit.

use std::collections::BTreeSet;
use std::io::Write;

use thiserror::Error;

use crate::geomcore::{curvature_scalars, fundamental_forms, GeomError, ParamPatch, Vec3};
use crate::graphflow::{FlowError, GraphFunction, Grid2};
use crate::numerics::fmt17;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing `# minsurf grid` header")]
    MissingHeader,
    #[error("samples do not form a uniform grid: {0}")]
    NotAGrid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

const HEADER: &str = "# minsurf grid";

/// OBJ text: the grid header, `v`, `vn`, then two triangles per cell with
/// 1-based `v//vn` indices.
pub fn write_obj<W: Write>(patch: &ParamPatch, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "{HEADER} {} {} {} {} {} {} {}",
        patch.ns(),
        patch.nt(),
        u8::from(patch.periodic_t()),
        fmt17(patch.s0()),
        fmt17(patch.ds()),
        fmt17(patch.t0()),
        fmt17(patch.dt())
    )?;
    for p in patch.points() {
        writeln!(w, "v {} {} {}", fmt17(p.x), fmt17(p.y), fmt17(p.z))?;
    }
    for n in patch.vertex_normals() {
        writeln!(w, "vn {} {} {}", fmt17(n.x), fmt17(n.y), fmt17(n.z))?;
    }
    for (i, j, jn) in patch.cells() {
        let a = patch.index(i, j) + 1;
        let b = patch.index(i + 1, j) + 1;
        let c = patch.index(i + 1, jn) + 1;
        let d = patch.index(i, jn) + 1;
        writeln!(w, "f {a}//{a} {b}//{b} {c}//{c}")?;
        writeln!(w, "f {a}//{a} {c}//{c} {d}//{d}")?;
    }
    Ok(())
}

pub fn obj_string(patch: &ParamPatch) -> String {
    let mut buf = Vec::new();
    write_obj(patch, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, FormatError> {
    let tok = tok.ok_or_else(|| FormatError::Parse {
        line,
        msg: "missing number".into(),
    })?;
    tok.parse().map_err(|_| FormatError::Parse {
        line,
        msg: format!("bad number `{tok}`"),
    })
}

/// Rebuilds the patch from an OBJ written by [`write_obj`]. Normals and
/// faces are implied by the grid and ignored.
pub fn read_obj(text: &str) -> Result<ParamPatch, FormatError> {
    let mut header = None;
    let mut points = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if let Some(rest) = raw.strip_prefix(HEADER) {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 7 {
                return Err(FormatError::Parse {
                    line,
                    msg: "grid header needs ns nt periodic s0 ds t0 dt".into(),
                });
            }
            let int = |s: &str| {
                s.parse::<usize>().map_err(|_| FormatError::Parse {
                    line,
                    msg: format!("bad integer `{s}`"),
                })
            };
            let (ns, nt, periodic) = (int(toks[0])?, int(toks[1])?, int(toks[2])?);
            let nums: Vec<f64> = toks[3..]
                .iter()
                .map(|t| parse_f64(Some(t), line))
                .collect::<Result<_, _>>()?;
            header = Some((ns, nt, periodic == 1, nums));
        } else if let Some(rest) = raw.strip_prefix("v ") {
            let mut it = rest.split_whitespace();
            let x = parse_f64(it.next(), line)?;
            let y = parse_f64(it.next(), line)?;
            let z = parse_f64(it.next(), line)?;
            points.push(Vec3::new(x, y, z));
        }
    }
    let (ns, nt, periodic, nums) = header.ok_or(FormatError::MissingHeader)?;
    Ok(ParamPatch::new(
        ns,
        nt,
        (nums[0], nums[1]),
        (nums[2], nums[3]),
        periodic,
        points,
    )?)
}

/// Writes `header` and rows of numbers with 17 significant digits.
pub fn write_csv<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), FormatError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for row in rows {
        wr.write_record(row.iter().map(|v| fmt17(*v)))?;
    }
    wr.flush()?;
    Ok(())
}

/// `s,t,x,y,z,H,K,A2` at every node where curvature is defined.
pub fn write_curvature_csv<W: Write>(patch: &ParamPatch, w: W) -> Result<(), FormatError> {
    let curv = curvature_scalars(&fundamental_forms(patch)?);
    let rows = curv.iter().map(|(i, j, c)| {
        let (s, t) = patch.param(i, j);
        let p = patch.point(i, j);
        vec![s, t, p.x, p.y, p.z, c.h, c.k, c.a2]
    });
    write_csv(w, &["s", "t", "x", "y", "z", "H", "K", "A2"], rows)
}

/// `x,y,u` in grid order (`x` slowest).
pub fn write_graph_csv<W: Write>(u: &GraphFunction, w: W) -> Result<(), FormatError> {
    let g = u.grid;
    let rows = (0..g.nx).flat_map(move |i| (0..g.ny).map(move |j| vec![g.x(i), g.y(j), u.at(i, j)]));
    write_csv(w, &["x", "y", "u"], rows)
}

fn axis(values: &BTreeSet<u64>, name: &str) -> Result<(f64, f64, usize), FormatError> {
    let v: Vec<f64> = values.iter().map(|b| f64::from_bits(*b)).collect();
    let mut v = v;
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n < 5 {
        return Err(FormatError::NotAGrid(format!("{n} distinct {name} values, need 5")));
    }
    let h = (v[n - 1] - v[0]) / (n - 1) as f64;
    for (k, x) in v.iter().enumerate() {
        if (x - (v[0] + k as f64 * h)).abs() > 1e-9 * h.max(1.0) {
            return Err(FormatError::NotAGrid(format!("{name} values are not evenly spaced")));
        }
    }
    Ok((v[0], v[n - 1], n))
}

/// Reads `x,y,u` rows in any order; they must cover a uniform grid.
pub fn read_graph_csv(text: &str) -> Result<GraphFunction, FormatError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| FormatError::Parse {
            line: 1,
            msg: format!("missing column `{name}`"),
        })
    };
    let (cx, cy, cu) = (col("x")?, col("y")?, col("u")?);
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        rows.push((
            parse_f64(rec.get(cx), line)?,
            parse_f64(rec.get(cy), line)?,
            parse_f64(rec.get(cu), line)?,
        ));
    }
    let xs: BTreeSet<u64> = rows.iter().map(|r| r.0.to_bits()).collect();
    let ys: BTreeSet<u64> = rows.iter().map(|r| r.1.to_bits()).collect();
    let (x0, x1, nx) = axis(&xs, "x")?;
    let (y0, y1, ny) = axis(&ys, "y")?;
    if rows.len() != nx * ny {
        return Err(FormatError::NotAGrid(format!(
            "{} rows for a {nx}x{ny} grid",
            rows.len()
        )));
    }
    let grid = Grid2::new((x0, x1), (y0, y1), nx, ny)?;
    let mut u = vec![f64::NAN; grid.len()];
    for (x, y, v) in rows {
        let i = ((x - x0) / grid.dx).round() as usize;
        let j = ((y - y0) / grid.dy).round() as usize;
        u[grid.index(i, j)] = v;
    }
    if u.iter().any(|v| v.is_nan()) {
        return Err(FormatError::NotAGrid("duplicate grid nodes".into()));
    }
    Ok(GraphFunction::new(grid, u)?)
}
