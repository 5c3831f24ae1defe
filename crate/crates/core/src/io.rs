//! CSV and JSON serialisation. Floats are written with 17 significant digits
//! so that a write/read round trip is bit-exact and outputs are byte-stable.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::bergman::{KernelSample, OrthoBasis};
use crate::bicomplex::Bicomplex;
use crate::calculus::GridFunction;
use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::main_vekua::BoundaryData;

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {field:?}")))
}

fn record_floats(record: &csv::StringRecord, width: usize) -> Result<Vec<f64>> {
    if record.len() != width {
        let line = record.position().map_or(0, |p| p.line());
        return Err(Error::Parse(format!("line {line}: expected {width} columns, found {}", record.len())));
    }
    record.iter().map(parse_f64).collect()
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Parse(format!("expected header {}, found {}", expected.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    Ok(())
}

fn push_bicomplex(row: &mut Vec<String>, w: Bicomplex) {
    row.extend([w.sc.re, w.sc.im, w.vec.re, w.vec.im].map(fmt_f64));
}

pub const GRID_FUNCTION_HEADER: [&str; 6] = ["x", "y", "sc_re", "sc_im", "vec_re", "vec_im"];

pub fn write_grid_function(out: impl Write, w: &GridFunction) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(GRID_FUNCTION_HEADER)?;
    for (z, v) in w.grid().nodes().iter().zip(w.values()) {
        let mut row = vec![fmt_f64(z.re), fmt_f64(z.im)];
        push_bicomplex(&mut row, *v);
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a grid function written for `grid`; the node coordinates must
/// match row by row.
pub fn read_grid_function(input: impl Read, grid: &Arc<Grid>) -> Result<GridFunction> {
    let mut rd = csv::Reader::from_reader(input);
    check_header(&mut rd, &GRID_FUNCTION_HEADER)?;
    let tol = 1e-9 * grid.h();
    let mut values = Vec::with_capacity(grid.len());
    for record in rd.records() {
        let r = record_floats(&record?, 6)?;
        let k = values.len();
        if k >= grid.len() || (grid.node(k) - Complex64::new(r[0], r[1])).norm() > tol {
            return Err(Error::GridMismatch);
        }
        values.push(Bicomplex::from_parts(r[2], r[3], r[4], r[5]));
    }
    if values.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    GridFunction::new(grid, values)
}

pub fn save_grid_function(path: &Path, w: &GridFunction) -> Result<()> {
    write_grid_function(fs::File::create(path)?, w)
}

pub fn load_grid_function(path: &Path, grid: &Arc<Grid>) -> Result<GridFunction> {
    read_grid_function(fs::File::open(path)?, grid)
}

pub const BICOMPLEX_HEADER: [&str; 4] = ["sc_re", "sc_im", "vec_re", "vec_im"];

pub fn write_bicomplex(out: impl Write, values: &[Bicomplex]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(BICOMPLEX_HEADER)?;
    for v in values {
        let mut row = Vec::with_capacity(4);
        push_bicomplex(&mut row, *v);
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_bicomplex(input: impl Read) -> Result<Vec<Bicomplex>> {
    let mut rd = csv::Reader::from_reader(input);
    check_header(&mut rd, &BICOMPLEX_HEADER)?;
    rd.records()
        .map(|r| {
            let r = record_floats(&r?, 4)?;
            Ok(Bicomplex::from_parts(r[0], r[1], r[2], r[3]))
        })
        .collect()
}

/// Boundary samples; the first column is named `theta` on disks and `arc`
/// on rectangles.
pub fn write_boundary(out: impl Write, param_name: &str, data: &BoundaryData) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record([param_name, "value_re", "value_im"])?;
    for (s, v) in data.params.iter().zip(&data.values) {
        wr.write_record([fmt_f64(*s), fmt_f64(v.re), fmt_f64(v.im)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_boundary(input: impl Read) -> Result<BoundaryData> {
    let mut rd = csv::Reader::from_reader(input);
    {
        let header = rd.headers()?;
        let ok = header.len() == 3
            && matches!(header[0].trim(), "theta" | "arc")
            && header[1].trim() == "value_re"
            && header[2].trim() == "value_im";
        if !ok {
            return Err(Error::Parse("expected header theta|arc,value_re,value_im".into()));
        }
    }
    let mut params = Vec::new();
    let mut values = Vec::new();
    for record in rd.records() {
        let r = record_floats(&record?, 3)?;
        params.push(r[0]);
        values.push(Complex64::new(r[1], r[2]));
    }
    BoundaryData::new(params, values)
}

pub const KERNEL_HEADER: [&str; 12] = [
    "z_re", "z_im", "zeta_re", "zeta_im", "K_sc_re", "K_sc_im", "K_vec_re", "K_vec_im", "L_sc_re", "L_sc_im",
    "L_vec_re", "L_vec_im",
];

pub fn write_kernel_samples(out: impl Write, samples: &[KernelSample]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(KERNEL_HEADER)?;
    for s in samples {
        let mut row = [s.z.re, s.z.im, s.zeta.re, s.zeta.im].map(fmt_f64).to_vec();
        push_bicomplex(&mut row, s.k);
        push_bicomplex(&mut row, s.l);
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_kernel_samples(input: impl Read) -> Result<Vec<KernelSample>> {
    let mut rd = csv::Reader::from_reader(input);
    check_header(&mut rd, &KERNEL_HEADER)?;
    rd.records()
        .map(|r| {
            let r = record_floats(&r?, 12)?;
            Ok(KernelSample {
                z: Complex64::new(r[0], r[1]),
                zeta: Complex64::new(r[2], r[3]),
                k: Bicomplex::from_parts(r[4], r[5], r[6], r[7]),
                l: Bicomplex::from_parts(r[8], r[9], r[10], r[11]),
            })
        })
        .collect()
}

pub fn write_grid_dump(out: impl Write, grid: &Grid) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["x", "y"])?;
    for z in grid.nodes() {
        wr.write_record([fmt_f64(z.re), fmt_f64(z.im)])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads whitespace- or comma-separated `re im` pairs, one point per line.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_points(mut input: impl Read) -> Result<Vec<Complex64>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        match fields.as_slice() {
            [re, im] => out.push(Complex64::new(parse_f64(re)?, parse_f64(im)?)),
            _ => return Err(Error::Parse(format!("line {}: expected `re,im`, found {line:?}", i + 1))),
        }
    }
    Ok(out)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct ArchiveMember {
    file: String,
    source_index: usize,
    residual: f64,
}

#[derive(Serialize)]
struct ArchiveManifest<'a> {
    domain: &'a crate::domain::DomainSpec,
    members: Vec<ArchiveMember>,
    dropped: &'a [usize],
    gram_residual: f64,
}

/// Writes `member_XXX.csv` for every basis element plus `manifest.json`.
pub fn write_basis_archive(dir: &Path, basis: &OrthoBasis) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut members = Vec::with_capacity(basis.len());
    for (i, m) in basis.members.iter().enumerate() {
        let file = format!("member_{i:03}.csv");
        save_grid_function(&dir.join(&file), m)?;
        members.push(ArchiveMember {
            file,
            source_index: basis.kept[i],
            residual: basis.member_residuals[i],
        });
    }
    let manifest = ArchiveManifest {
        domain: basis.grid().spec(),
        members,
        dropped: &basis.dropped,
        gram_residual: basis.gram_residual,
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::build(Domain::unit_disk(), 12).unwrap())
    }

    #[test]
    fn grid_function_round_trip_is_bit_exact() {
        let g = grid();
        let w = GridFunction::from_fn(&g, |z| Bicomplex::new(z.exp() / 3.0, Complex64::new(z.re.sin(), 1e-300)));
        let mut buf = Vec::new();
        write_grid_function(&mut buf, &w).unwrap();
        let back = read_grid_function(buf.as_slice(), &g).unwrap();
        assert_eq!(back.values(), w.values());
        let mut again = Vec::new();
        write_grid_function(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn grid_function_on_other_grid_is_rejected() {
        let g = grid();
        let mut buf = Vec::new();
        write_grid_function(&mut buf, &GridFunction::zeros(&g)).unwrap();
        let other = Arc::new(Grid::build(Domain::unit_disk(), 14).unwrap());
        assert!(matches!(read_grid_function(buf.as_slice(), &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn malformed_rows_report_line() {
        let text = "sc_re,sc_im,vec_re,vec_im\n1,2,3,4\n1,2,x,4\n";
        let err = read_bicomplex(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("not a number"), "{err}");
        let text = "sc_re,sc_im,vec_re,vec_im\n1,2,3\n";
        assert!(read_bicomplex(text.as_bytes()).is_err());
    }

    #[test]
    fn boundary_and_kernel_round_trips() {
        let d = BoundaryData::new(vec![0.0, 1.0], vec![Complex64::new(0.1, 0.2), Complex64::new(-3.0, 0.0)]).unwrap();
        let mut buf = Vec::new();
        write_boundary(&mut buf, "theta", &d).unwrap();
        assert_eq!(read_boundary(buf.as_slice()).unwrap(), d);

        let s = KernelSample {
            z: Complex64::new(0.1, 0.0),
            zeta: Complex64::new(0.0, -0.2),
            k: Bicomplex::from_parts(1.0, 2.0, 3.0, 4.0),
            l: Bicomplex::from_parts(-1.0, 0.5, 0.25, 1.0 / 3.0),
        };
        let mut buf = Vec::new();
        write_kernel_samples(&mut buf, &[s]).unwrap();
        assert_eq!(read_kernel_samples(buf.as_slice()).unwrap(), vec![s]);

        let mut empty = Vec::new();
        write_kernel_samples(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), KERNEL_HEADER.join(","));
    }

    #[test]
    fn points_accept_commas_and_blank_lines() {
        let pts = read_points("0.1, 0.2\n\n# note\n-0.3 0\n".as_bytes()).unwrap();
        assert_eq!(pts, vec![Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.0)]);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(parse_f64(&fmt_f64(0.1)).unwrap(), 0.1);
    }
}
