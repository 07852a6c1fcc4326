//! Command-line front end: link documents, subcommands and exit codes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::charmap::sample_vl;
use crate::error::Error;
use crate::geometry::{CurveS3, Link3, Orientation, Quat, Vec3, MIN_SAMPLES};
use crate::invariants::{milnor_mu, milnor_mu_checked, InvariantReport};
use crate::torus::{phi2_eval, phi_eval};

pub const DOCUMENT_VERSION: u32 = 1;
pub const DEFAULT_GRID: usize = 64;
/// Environment variable capping the worker pool; `0` or unset means one
/// thread per core.
pub const THREADS_ENV: &str = "LINKHEL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "linkhel", version, about = "Linking numbers and Milnor's triple linking number of links in S3")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pairwise linking numbers and, when they vanish, the triple linking number.
    Compute {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Also compute at half the grid and report the difference.
        #[arg(long)]
        check_convergence: bool,
        #[arg(long)]
        json: bool,
    },
    /// Write the sampled field V_L as CSV.
    Field {
        input: PathBuf,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate the truncated fundamental solution on the 2- or 3-torus.
    Phi {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        dim: u8,
        #[arg(long)]
        truncation: usize,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in reference links.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// Print the entry names.
    List,
    /// Print an entry as a link document.
    Dump { name: String },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("unknown catalog entry '{0}'")]
    UnknownCatalog(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    /// 1 for unreadable input or bad arguments, 2 for degenerate geometry,
    /// 3 when the triple linking number is refused.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io { .. } | CliError::UnknownCatalog(_) | CliError::Usage(_) => 1,
            CliError::Compute(Error::NonzeroLinking { .. }) => 3,
            CliError::Compute(Error::InvalidGrid { .. } | Error::GridTooLarge { .. }) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

/// Space the samples of a component live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    S3,
    R3,
}

/// One trigonometric coefficient: the four coordinates of `c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffEntry {
    pub k: i64,
    pub re: [f64; 4],
    pub im: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub space: Space,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<CoeffEntry>>,
    pub orientation: i32,
}

/// JSON description of a three-component link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDocument {
    pub version: u32,
    pub components: Vec<ComponentDoc>,
}

impl LinkDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: LinkDocument = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("invalid link document: {e}")))?;
        if doc.version != DOCUMENT_VERSION {
            return Err(CliError::Parse(format!(
                "field `version`: unsupported version {}, expected {DOCUMENT_VERSION}",
                doc.version
            )));
        }
        if doc.components.len() != 3 {
            return Err(CliError::Parse(format!(
                "field `components`: expected exactly 3 components, got {}",
                doc.components.len()
            )));
        }
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Coefficient form of a link; converting back yields identical curves.
    pub fn from_link(link: &Link3) -> Self {
        let components = link
            .components()
            .iter()
            .map(|c| {
                let k0 = c.degree() as i64;
                let coeffs = c
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(slot, v)| CoeffEntry {
                        k: slot as i64 - k0,
                        re: v.map(|z| z.re),
                        im: v.map(|z| z.im),
                    })
                    .collect();
                ComponentDoc {
                    space: Space::S3,
                    samples: None,
                    coeffs: Some(coeffs),
                    orientation: c.orientation().as_i32(),
                }
            })
            .collect();
        Self {
            version: DOCUMENT_VERSION,
            components,
        }
    }

    pub fn to_link(&self) -> Result<Link3, CliError> {
        let mut curves = Vec::with_capacity(3);
        for (i, comp) in self.components.iter().enumerate() {
            curves.push(comp.to_curve(i)?);
        }
        let [x, y, z]: [CurveS3; 3] = curves.try_into().expect("three components checked in parse");
        Ok(Link3::new(x, y, z)?)
    }
}

impl ComponentDoc {
    fn to_curve(&self, index: usize) -> Result<CurveS3, CliError> {
        let field = |name: &str| format!("components[{index}].{name}");
        let orientation = Orientation::from_sign(self.orientation)
            .ok_or_else(|| CliError::Parse(format!("field `{}`: must be 1 or -1, got {}", field("orientation"), self.orientation)))?;
        match (&self.samples, &self.coeffs) {
            (Some(samples), None) => {
                if samples.len() < MIN_SAMPLES {
                    return Err(CliError::Parse(format!(
                        "field `{}`: need at least {MIN_SAMPLES} samples, got {}",
                        field("samples"),
                        samples.len()
                    )));
                }
                let dim = match self.space {
                    Space::S3 => 4,
                    Space::R3 => 3,
                };
                if let Some(j) = samples.iter().position(|p| p.len() != dim) {
                    return Err(CliError::Parse(format!(
                        "field `{}[{j}]`: expected {dim} coordinates for space {:?}, got {}",
                        field("samples"),
                        self.space,
                        samples[j].len()
                    )));
                }
                let curve = match self.space {
                    Space::S3 => {
                        let pts: Vec<Quat> = samples.iter().map(|p| Quat::new(p[0], p[1], p[2], p[3])).collect();
                        CurveS3::from_samples(&pts, orientation)?
                    }
                    Space::R3 => {
                        let pts: Vec<Vec3> = samples.iter().map(|p| [p[0], p[1], p[2]]).collect();
                        CurveS3::from_r3_samples(&pts, orientation)?
                    }
                };
                Ok(curve)
            }
            (None, Some(coeffs)) => {
                if self.space != Space::S3 {
                    return Err(CliError::Parse(format!("field `{}`: coefficients are only accepted for space S3", field("coeffs"))));
                }
                let k0 = (coeffs.len() / 2) as i64;
                if coeffs.len() % 2 == 0 {
                    return Err(CliError::Parse(format!(
                        "field `{}`: expected an odd number of coefficients, got {}",
                        field("coeffs"),
                        coeffs.len()
                    )));
                }
                if let Some(j) = coeffs.iter().enumerate().position(|(j, c)| c.k != j as i64 - k0) {
                    return Err(CliError::Parse(format!(
                        "field `{}[{j}].k`: expected wave number {}, got {}",
                        field("coeffs"),
                        j as i64 - k0,
                        coeffs[j].k
                    )));
                }
                let data: Vec<[Complex64; 4]> = coeffs
                    .iter()
                    .map(|c| [0, 1, 2, 3].map(|i| Complex64::new(c.re[i], c.im[i])))
                    .collect();
                Ok(CurveS3::from_coeffs(data, orientation).expect("odd length checked"))
            }
            _ => Err(CliError::Parse(format!(
                "component {index}: exactly one of `samples` and `coeffs` must be given"
            ))),
        }
    }
}

/// Error object printed with `--json` when the computation is refused or fails.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linking: Option<[i64; 3]>,
}

impl ErrorReport {
    fn from_error(err: &Error) -> Self {
        let (kind, linking) = match err {
            Error::NonzeroLinking { p, q, r } => ("nonzero_linking", Some([*p, *q, *r])),
            Error::NearDegenerateTriple { .. } => ("near_degenerate_triple", None),
            Error::DegenerateDegree { .. } => ("degenerate_degree", None),
            Error::InvalidGrid { .. } | Error::GridTooLarge { .. } => ("invalid_grid", None),
            _ => ("degenerate_input", None),
        };
        Self {
            error: kind.into(),
            message: err.to_string(),
            linking,
        }
    }
}

/// Runs the `compute` pipeline on a parsed link.
pub fn compute_report(link: &Link3, grid: usize, check_convergence: bool) -> crate::Result<InvariantReport> {
    if check_convergence {
        milnor_mu_checked(link, grid)
    } else {
        milnor_mu(link, grid)
    }
}

pub fn format_report(report: &InvariantReport) -> String {
    let mut s = String::new();
    let r = report;
    s += &format!("p = {}\nq = {}\nr = {}\n", r.p, r.q, r.r);
    s += &format!(
        "degree residuals = {:.3e}, {:.3e}, {:.3e}\n",
        r.deg_residuals[0], r.deg_residuals[1], r.deg_residuals[2]
    );
    s += &format!("nu = {:.12}\nmu = {:.12}\nmu residual = {:.3e}\n", r.nu, r.mu, r.mu_residual);
    s += &format!("grid = {}\n", r.grid_n);
    if let (Some(n), Some(mu), Some(d), Some(ok)) = (r.coarse_grid_n, r.mu_coarse, r.convergence_delta, r.converged) {
        s += &format!("coarse grid = {n}\nmu coarse = {mu:.12}\n|mu - mu coarse| = {d:.3e}\nconverged = {ok}\n");
    }
    for w in &r.warnings {
        s += &format!("warning: {w}\n");
    }
    s
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `x,y,phi` (or `x,y,z,phi`) rows on the `grid^dim` lattice of
/// spacing `2π/grid`, first coordinate fastest.
pub fn write_phi_table<W: Write>(mut out: W, dim: u8, truncation: usize, grid: usize) -> io::Result<()> {
    let h = std::f64::consts::TAU / grid as f64;
    if dim == 2 {
        writeln!(out, "x,y,phi")?;
        for b in 0..grid {
            for a in 0..grid {
                let (x, y) = (h * a as f64, h * b as f64);
                writeln!(out, "{},{},{}", x, y, phi2_eval(x, y, truncation))?;
            }
        }
    } else {
        writeln!(out, "x,y,z,phi")?;
        for c in 0..grid {
            for b in 0..grid {
                for a in 0..grid {
                    let p = [h * a as f64, h * b as f64, h * c as f64];
                    writeln!(out, "{},{},{},{}", p[0], p[1], p[2], phi_eval(p, truncation))?;
                }
            }
        }
    }
    Ok(())
}

/// Executes a parsed command, writing results to `stdout`.
pub fn run<W: Write>(cli: Cli, stdout: &mut W) -> Result<(), CliError> {
    let out_err = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match cli.command {
        Command::Compute {
            input,
            grid,
            check_convergence,
            json,
        } => {
            let link = LinkDocument::read(&input)?.to_link()?;
            match compute_report(&link, grid, check_convergence) {
                Ok(report) => {
                    if json {
                        serde_json::to_writer_pretty(&mut *stdout, &report).expect("report serializes");
                        writeln!(stdout).map_err(out_err)?;
                    } else {
                        write!(stdout, "{}", format_report(&report)).map_err(out_err)?;
                    }
                    Ok(())
                }
                Err(err) => {
                    if json {
                        serde_json::to_writer_pretty(&mut *stdout, &ErrorReport::from_error(&err)).expect("report serializes");
                        writeln!(stdout).map_err(out_err)?;
                    }
                    Err(err.into())
                }
            }
        }
        Command::Field { input, grid, out } => {
            let link = LinkDocument::read(&input)?.to_link()?;
            let field = sample_vl(&link, grid)?;
            let mut w = create(&out)?;
            field.write_csv(&mut w).map_err(io_err(&out))?;
            w.flush().map_err(io_err(&out))
        }
        Command::Phi {
            dim,
            truncation,
            grid,
            out,
        } => {
            if truncation == 0 {
                return Err(CliError::Usage("--truncation must be at least 1".into()));
            }
            if grid == 0 {
                return Err(CliError::Usage("--grid must be at least 1".into()));
            }
            let mut w = create(&out)?;
            write_phi_table(&mut w, dim, truncation, grid).map_err(io_err(&out))?;
            w.flush().map_err(io_err(&out))
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                for name in catalog::names() {
                    writeln!(stdout, "{name}").map_err(out_err)?;
                }
                Ok(())
            }
            CatalogAction::Dump { name } => {
                let entry = catalog::by_name(&name).ok_or(CliError::UnknownCatalog(name))?;
                serde_json::to_writer_pretty(&mut *stdout, &LinkDocument::from_link(&entry.link)).expect("document serializes");
                writeln!(stdout).map_err(out_err)
            }
        },
    }
}

/// Reads [`THREADS_ENV`]; `Ok(None)` means use the default pool.
pub fn thread_limit() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips_exactly() {
        for entry in catalog::list() {
            let doc = LinkDocument::from_link(&entry.link);
            let text = serde_json::to_string(&doc).unwrap();
            let back = LinkDocument::parse(&text).unwrap().to_link().unwrap();
            assert_eq!(back, entry.link);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Parse("x".into()).exit_code(), 1);
        assert_eq!(CliError::UnknownCatalog("x".into()).exit_code(), 1);
        assert_eq!(CliError::Compute(Error::NonzeroLinking { p: 0, q: 0, r: 1 }).exit_code(), 3);
        assert_eq!(CliError::Compute(Error::DegenerateCurve { norm: 0.0 }).exit_code(), 2);
    }

    #[test]
    fn parse_errors_name_the_field() {
        let err = LinkDocument::parse(r#"{"version": 1, "components": []}"#).unwrap_err();
        assert!(err.to_string().contains("components"), "{err}");

        let comp = r#"{"space": "R3", "samples": [[0,0,0],[1,0,0],[0,1,0],[1,1,0],[2,0,0],[0,2,0],[2,2,0],[3,0]], "orientation": 1}"#;
        let text = format!(r#"{{"version": 1, "components": [{comp}, {comp}, {comp}]}}"#);
        let err = LinkDocument::parse(&text).unwrap().to_link().unwrap_err();
        assert!(err.to_string().contains("components[0].samples[7]"), "{err}");

        let err = LinkDocument::parse("{\n  \"version\": 1,\n  \"components\": [\n    {\"space\": \"S4\"}\n  ]\n}").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn orientation_must_be_a_sign() {
        let mut doc = LinkDocument::from_link(&catalog::unlink().link);
        doc.components[1].orientation = 2;
        let err = doc.to_link().unwrap_err();
        assert!(err.to_string().contains("components[1].orientation"), "{err}");
    }

    #[test]
    fn phi_table_shape() {
        let mut buf = Vec::new();
        write_phi_table(&mut buf, 2, 3, 4).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert_eq!(text.lines().next(), Some("x,y,phi"));
    }
}
