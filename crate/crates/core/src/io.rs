//! Field files, run configurations and manifests.
//!
//! Field file layout, all little-endian:
//!
//! ```text
//! "CHQF" | version u32 = 1 | dim u8 | dim × n u32 | half_width f64 | n^dim × f64
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::Choquard;
use crate::params::ProblemParams;
use crate::scalar::Real;
use crate::solvers::{
    solve_ground_state_ngf, solve_petviashvili, SolveReport, SolverKind, SolverOptions, SymmetrySpec,
};
use crate::spectral::{ConvolutionMode, Field, Grid, Spectral};

pub const MAGIC: &[u8; 4] = b"CHQF";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode_field<T: Real>(field: &Field<T>) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(17 + 4 * g.dim() + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(g.dim() as u8);
    for _ in 0..g.dim() {
        out.extend_from_slice(&(g.points_per_dim() as u32).to_le_bytes());
    }
    out.extend_from_slice(&g.half_width().to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    out
}

/// Reads little-endian words off the front of a byte slice.
struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(Error::Format("truncated file".into()));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_field(bytes: &[u8]) -> Result<Field<f64>> {
    let mut c = Cursor(bytes);
    if c.take(4).map_err(|_| Error::Format("bad magic".into()))? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = c.take(1)?[0] as usize;
    let dims = (0..dim).map(|_| c.u32()).collect::<Result<Vec<_>>>()?;
    if dims.is_empty() || dims.iter().any(|&d| d != dims[0]) {
        return Err(Error::Format(format!("unsupported dims {dims:?}")));
    }
    let half_width = c.f64()?;
    let grid = Grid::new(dim, dims[0] as usize, half_width)
        .map_err(|e| Error::Format(format!("bad grid header: {e}")))?;
    if c.0.len() != 8 * grid.len() {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            c.0.len(),
            8 * grid.len()
        )));
    }
    let values = (0..grid.len()).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    Field::new(grid, values).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_field<T: Real>(path: impl AsRef<Path>, field: &Field<T>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_field(field))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_field(&bytes)
}

/// `key = value` lines; `#` starts a comment. Later keys override earlier ones.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidOption(format!("line {}: expected key = value", no + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn parse_symmetry(text: &str) -> Result<Option<SymmetrySpec>> {
    let bad = || Error::InvalidOption(format!("symmetry `{text}`"));
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a.trim().parse::<usize>().map_err(|_| bad())?)),
        None => (text, None),
    };
    Ok(match (name.trim(), arg) {
        ("none", None) => None,
        ("radial", None) => Some(SymmetrySpec::Radial),
        ("block_radial", Some(m)) => Some(SymmetrySpec::BlockRadial(m)),
        ("odd_swap", Some(m)) => Some(SymmetrySpec::OddSwap(m)),
        _ => return Err(bad()),
    })
}

pub fn symmetry_name(spec: Option<SymmetrySpec>) -> String {
    match spec {
        None => "none".into(),
        Some(SymmetrySpec::Radial) => "radial".into(),
        Some(SymmetrySpec::BlockRadial(m)) => format!("block_radial:{m}"),
        Some(SymmetrySpec::OddSwap(m)) => format!("odd_swap:{m}"),
    }
}

/// Everything needed to reproduce one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub n: usize,
    pub half_width: f64,
    pub solver: SolverKind,
    /// Target mass for the gradient flow.
    pub rho: f64,
    pub options: SolverOptions,
    pub mode: ConvolutionMode,
    /// Number of Hessian eigenvalues to certify; 0 skips the spectrum.
    pub morse_k: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        const KEYS: [&str; 18] = [
            "dim", "s", "alpha", "p", "omega", "n", "L", "solver", "rho", "dt", "max_iter", "tol",
            "seed", "noise", "symmetry", "mode", "morse_k", "out",
        ];
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::InvalidOption(format!("unknown key `{k}`")));
        }
        fn get<V: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: Option<V>) -> Result<V> {
            match map.get(key) {
                Some(v) => v.parse().map_err(|_| Error::InvalidOption(format!("{key} = {v}"))),
                None => default.ok_or_else(|| Error::InvalidOption(format!("missing key `{key}`"))),
            }
        }
        let d = SolverOptions::default();
        let params = ProblemParams::new(
            get(map, "dim", None)?,
            get(map, "s", None)?,
            get(map, "alpha", None)?,
            get(map, "p", None)?,
            get(map, "omega", Some(1.0))?,
        )?;
        let solver = match map.get("solver").map(String::as_str).unwrap_or("petviashvili") {
            "petviashvili" => SolverKind::Petviashvili,
            "ngf" => SolverKind::Ngf,
            other => return Err(Error::InvalidOption(format!("solver `{other}`"))),
        };
        let mode = match map.get("mode").map(String::as_str).unwrap_or("free") {
            "free" => ConvolutionMode::FreeSpacePadded,
            "periodic" => ConvolutionMode::PeriodicMultiplier,
            other => return Err(Error::InvalidOption(format!("mode `{other}`"))),
        };
        let options = SolverOptions {
            dt: get(map, "dt", Some(d.dt))?,
            max_iter: get(map, "max_iter", Some(d.max_iter))?,
            tol: get(map, "tol", Some(d.tol))?,
            seed: get(map, "seed", Some(d.seed))?,
            noise: get(map, "noise", Some(d.noise))?,
            symmetry: parse_symmetry(map.get("symmetry").map(String::as_str).unwrap_or("none"))?,
        };
        let cfg = Self {
            params,
            n: get(map, "n", None)?,
            half_width: get(map, "L", None)?,
            solver,
            rho: get(map, "rho", Some(1.0))?,
            options,
            mode,
            morse_k: get(map, "morse_k", Some(0))?,
            out: map.get("out").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.options.validate()?;
        if let Some(spec) = self.options.symmetry {
            spec.validate(self.params.dim)?;
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidOption(format!("rho = {}", self.rho)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.params.dim, self.n, self.half_width)
    }

    /// Canonical `key = value` text; parsing it gives back `self`.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let o = &self.options;
        let mut t = String::new();
        let _ = writeln!(t, "dim = {}\ns = {:?}\nalpha = {:?}\np = {:?}\nomega = {:?}", p.dim, p.s, p.alpha, p.p, p.omega);
        let _ = writeln!(t, "n = {}\nL = {:?}", self.n, self.half_width);
        let solver = match self.solver {
            SolverKind::Ngf => "ngf",
            SolverKind::Petviashvili => "petviashvili",
        };
        let mode = match self.mode {
            ConvolutionMode::FreeSpacePadded => "free",
            ConvolutionMode::PeriodicMultiplier => "periodic",
        };
        let _ = writeln!(t, "solver = {solver}\nrho = {:?}\nmode = {mode}", self.rho);
        let _ = writeln!(
            t,
            "dt = {:?}\nmax_iter = {}\ntol = {:?}\nseed = {}\nnoise = {:?}\nsymmetry = {}",
            o.dt,
            o.max_iter,
            o.tol,
            o.seed,
            o.noise,
            symmetry_name(o.symmetry)
        );
        let _ = writeln!(t, "morse_k = {}", self.morse_k);
        if let Some(out) = &self.out {
            let _ = writeln!(t, "out = {}", out.display());
        }
        t
    }

    /// Runs the configured solver. The certificate includes the Hessian
    /// spectrum when `morse_k > 0` and `p ≥ 2`.
    pub fn execute(&self) -> Result<SolveReport<f64>> {
        let grid = self.grid()?;
        let spectral = Spectral::<f64>::new(grid);
        let model = Choquard::new(&spectral, self.params).with_mode(self.mode);
        let mut report = match self.solver {
            SolverKind::Ngf => solve_ground_state_ngf(&model, self.rho, &self.options)?,
            SolverKind::Petviashvili => solve_petviashvili(&model, &self.options)?,
        };
        if self.morse_k > 0 && self.params.p >= 2.0 {
            if let Some(cert) = report.certificate.as_mut() {
                let opts = crate::analysis::MorseOptions { k: self.morse_k, ..Default::default() };
                cert.morse =
                    Some(crate::analysis::morse_spectrum(&model, &report.field, cert.lambda, &opts)?);
            }
        }
        Ok(report)
    }
}

/// `v<crate version>`, with the output of `git describe` appended when it
/// was available at build time.
pub fn version_string() -> String {
    match option_env!("CHOQUARD_GIT_DESCRIBE") {
        Some(d) if !d.is_empty() => format!("v{}-{d}", env!("CARGO_PKG_VERSION")),
        _ => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

/// Written next to every output so a run can be repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: Vec<String>,
    pub seed: Option<u64>,
    /// Canonical configuration text, when the command ran from one.
    pub config_text: Option<String>,
    pub config: Option<RunConfig>,
}

impl Manifest {
    pub fn new(command: Vec<String>, config: Option<&RunConfig>) -> Self {
        Self {
            version: version_string(),
            command,
            seed: config.map(|c| c.options.seed),
            config_text: config.map(RunConfig::to_text),
            config: config.cloned(),
        }
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        write_json(dir.as_ref().join("manifest.json"), self)
    }
}

pub fn write_json<V: Serialize>(path: impl AsRef<Path>, value: &V) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes `field.chqf`, `report.json`, `certificate.json` and `history.csv`.
pub fn write_run(dir: impl AsRef<Path>, report: &SolveReport<f64>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_field(dir.join("field.chqf"), &report.field)?;
    write_json(dir.join("report.json"), report)?;
    if let Some(cert) = &report.certificate {
        write_json(dir.join("certificate.json"), cert)?;
    }
    let mut csv = String::from("iteration,energy,residual\n");
    for h in &report.history {
        let _ = writeln!(csv, "{},{:e},{:e}", h.iteration, h.energy, h.residual);
    }
    fs::write(dir.join("history.csv"), csv)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial::gaussian_mixture;

    #[test]
    fn field_roundtrip_is_bit_exact() {
        let g = Grid::new(2, 16, 3.5).unwrap();
        let u = gaussian_mixture::<f64>(g, 9);
        let back = decode_field(&encode_field(&u)).unwrap();
        assert_eq!(back.grid(), u.grid());
        assert!(back.values().iter().zip(u.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn header_layout() {
        let g = Grid::new(1, 8, 2.0).unwrap();
        let bytes = encode_field(&Field::<f64>::zeros(g));
        assert_eq!(&bytes[..4], b"CHQF");
        assert_eq!(bytes[4..8], [1, 0, 0, 0]);
        assert_eq!(bytes[8], 1);
        assert_eq!(bytes[9..13], [8, 0, 0, 0]);
        assert_eq!(f64::from_le_bytes(bytes[13..21].try_into().unwrap()), 2.0);
        assert_eq!(bytes.len(), 21 + 64);
    }

    #[test]
    fn malformed_files() {
        let g = Grid::new(1, 8, 2.0).unwrap();
        let bytes = encode_field(&Field::<f64>::zeros(g));
        let format_err = |b: &[u8]| matches!(decode_field(b), Err(Error::Format(_)));
        assert!(format_err(&bytes[..bytes.len() - 3]));
        assert!(format_err(&bytes[..10]));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(format_err(&extra));
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(format_err(&magic));
        let mut v2 = bytes.clone();
        v2[4] = 2;
        match decode_field(&v2) {
            Err(Error::Format(m)) => assert!(m.contains("unsupported version")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_roundtrip_and_errors() {
        let text = "# ground state\ndim = 1\ns = 0.4\nalpha = 0.5\np = 2 # quadratic\nn = 128\nL = 20\n\
                    solver = ngf\nrho = 1.5\nsymmetry = radial\nseed = 4\n";
        let cfg = RunConfig::from_text(text).unwrap();
        assert_eq!(cfg.solver, SolverKind::Ngf);
        assert_eq!(cfg.options.symmetry, Some(SymmetrySpec::Radial));
        assert_eq!(cfg.params.omega, 1.0);
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);

        assert!(RunConfig::from_text("dim = 1\ns = 0.4\nalpha = 0.5\nn = 64\nL = 5\n").is_err());
        assert!(RunConfig::from_text(&format!("{text}colour = red\n")).is_err());
        assert!(RunConfig::from_text(&format!("{text}symmetry = odd_swap:1\n")).is_err());
        assert!(RunConfig::from_text(&format!("{text}n = 7\n")).is_err());
        assert!(RunConfig::from_text("dim 1\n").is_err());
    }
}
