//! Built-in systems: a low-thrust spacecraft in orbital elements and an
//! octocopter (rotational and level-mode translational dynamics), plus three
//! small hand-checkable fixtures.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{IntegratorSystem, ModelError};

/// Earth's gravitational parameter, m³/s².
pub const MU_EARTH: f64 = 3.986e14;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}` (see catalog-list)")]
    Unknown(String),
    #[error("orbital elements out of domain: {0}")]
    Domain(String),
    #[error("invalid octocopter parameter: {0}")]
    Params(String),
    #[error("bad yaw angle `{0}`")]
    Yaw(String),
    #[error("cannot read elements file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed elements file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Classical orbital elements. Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitalElements {
    /// Semi-major axis in km.
    pub a: f64,
    pub e: f64,
    pub i: f64,
    pub raan: f64,
    pub argp: f64,
    pub mean_anomaly: f64,
}

/// Elements as stored on disk: `a` in km, angles in degrees.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ElementsFile {
    pub a_km: f64,
    pub e: f64,
    pub i_deg: f64,
    pub raan_deg: f64,
    pub argp_deg: f64,
    pub mean_anomaly_deg: f64,
}

impl From<ElementsFile> for OrbitalElements {
    fn from(f: ElementsFile) -> Self {
        OrbitalElements::from_degrees(f.a_km, f.e, f.i_deg, f.raan_deg, f.argp_deg, f.mean_anomaly_deg)
    }
}

impl OrbitalElements {
    pub fn from_degrees(a_km: f64, e: f64, i: f64, raan: f64, argp: f64, mean_anomaly: f64) -> Self {
        OrbitalElements {
            a: a_km,
            e,
            i: i.to_radians(),
            raan: raan.to_radians(),
            argp: argp.to_radians(),
            mean_anomaly: mean_anomaly.to_radians(),
        }
    }

    pub fn to_file(self) -> ElementsFile {
        ElementsFile {
            a_km: self.a,
            e: self.e,
            i_deg: self.i.to_degrees(),
            raan_deg: self.raan.to_degrees(),
            argp_deg: self.argp.to_degrees(),
            mean_anomaly_deg: self.mean_anomaly.to_degrees(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let f: ElementsFile = serde_json::from_str(&text).map_err(|source| CatalogError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(f.into())
    }

    /// Rejects elements where the control matrix has a pole.
    pub fn validate(&self) -> Result<(), CatalogError> {
        const TRIG_TOL: f64 = 1e-9;
        let all = [self.a, self.e, self.i, self.raan, self.argp, self.mean_anomaly];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(CatalogError::Domain("non-finite element".into()));
        }
        if self.a <= 0.0 {
            return Err(CatalogError::Domain(format!("a = {} must be positive", self.a)));
        }
        if !(1e-6..1.0).contains(&self.e) {
            return Err(CatalogError::Domain(format!("e = {} outside [1e-6, 1)", self.e)));
        }
        if !(self.i > 0.0 && self.i < PI) || self.i.sin().abs() < TRIG_TOL {
            return Err(CatalogError::Domain(format!("i = {} rad outside (0, π)", self.i)));
        }
        if self.argp.sin().abs() < TRIG_TOL || self.argp.cos().abs() < TRIG_TOL {
            return Err(CatalogError::Domain(format!(
                "ω = {} rad makes tan ω or cot ω singular",
                self.argp
            )));
        }
        Ok(())
    }
}

/// Initial orbit of the raising maneuver.
pub const ORBIT_INITIAL: ElementsFile = ElementsFile {
    a_km: 6678.0,
    e: 0.67,
    i_deg: 20.0,
    raan_deg: 20.0,
    argp_deg: 20.0,
    mean_anomaly_deg: 20.0,
};

/// Target orbit of the raising maneuver.
pub const ORBIT_TARGET: ElementsFile = ElementsFile {
    a_km: 7345.0,
    e: 0.737,
    i_deg: 22.0,
    raan_deg: 22.0,
    argp_deg: 22.0,
    mean_anomaly_deg: 20.0,
};

/// Target distance used with the printed spacecraft matrix (km, –, degrees).
pub const SPACECRAFT_MANEUVER: [f64; 6] = [667.0, 0.067, 2.0, 2.0, 2.0, 2.0];

#[rustfmt::skip]
const SPACECRAFT_PRINTED: [[f64; 14]; 6] = [
    [0.0, 0.0, 0.0, 18314.0, 40583.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.1, -3.4, 2.3, -0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -5.2, 3.8, -0.9, -0.7, 0.2],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -5.5, 4.0, -0.9, 5.6, -1.9],
    [3.0, -2.7, 0.0, 0.0, 0.0, 0.0, 0.0, 4.7, -1.0, 5.2, -3.8, 1.3, -5.6, 1.9],
    [-12.3, 7.2, -0.9, 0.0, 0.0, 0.0, 0.0, -3.5, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0],
];

fn spacecraft_labels() -> Vec<String> {
    (1..=14).map(|j| format!("f{j}")).collect()
}

fn unit_box(n: usize) -> (DVector<f64>, DVector<f64>) {
    (DVector::from_element(n, -1.0), DVector::from_element(n, 1.0))
}

/// The published 6×14 spacecraft matrix (entries ×1e-6), inputs in `[−1, 1]`.
pub fn spacecraft_printed() -> IntegratorSystem {
    let b = DMatrix::from_fn(6, 14, |i, j| SPACECRAFT_PRINTED[i][j] * 1e-6);
    let (lo, hi) = unit_box(14);
    IntegratorSystem::new("spacecraft-printed", 1, b, lo, hi)
        .and_then(|s| s.with_labels(spacecraft_labels()))
        .expect("printed spacecraft matrix is valid")
}

/// The five blocks of the averaged variational equations, without the `√(a/μ)` factor.
struct Blocks {
    b1: DMatrix<f64>,
    b2: DMatrix<f64>,
    b3: DMatrix<f64>,
    b4: DMatrix<f64>,
    b5: DMatrix<f64>,
}

fn blocks(el: &OrbitalElements) -> Blocks {
    let (a, e, i, w) = (el.a, el.e, el.i, el.argp);
    let s = (1.0 - e * e).sqrt();
    let (sw, cw, tw) = (w.sin(), w.cos(), w.tan());
    let csc_i = 1.0 / i.sin();
    let cot_i = i.cos() / i.sin();

    let b1 = DMatrix::from_row_slice(2, 4, &[
        a * e, 2.0 * a * s, 0.0, 0.0,
        0.5 * (1.0 - e * e), -1.5 * e * s, s, -0.25 * e * s,
    ]);
    let common = [-3.0 * e / (2.0 * s), (1.0 + e * e) / (2.0 * s), -e / (4.0 * s)];
    let inner = DMatrix::from_row_slice(2, 5, &[
        common[0], common[1], common[2], -0.5 * tw, 0.25 * e * tw,
        common[0], common[1], common[2], 0.5 / tw, -0.25 * e / tw,
    ]);
    let b2 = DMatrix::from_diagonal(&DVector::from_vec(vec![cw, sw * csc_i])) * inner;
    let b3 = DMatrix::from_row_slice(2, 3, &[
        s, -s / (2.0 * e), 0.0,
        -3.0, 1.5 * e + 0.5 / e, -0.5 * e * e,
    ]);
    let b4 = DMatrix::from_row_slice(2, 2, &[
        (2.0 - e * e) / (2.0 * e), -0.25,
        -(2.0 - e * e) / (2.0 * e) * s, 0.25 * s,
    ]);
    let b5 = cot_i
        * DMatrix::from_row_slice(2, 5, &[
            1.5 * e * sw / s, -0.5 * (1.0 + e * e) * sw / s, 0.25 * e * sw / s, -0.5, 0.25 * e,
            0.0, 0.0, 0.0, 0.0, 0.0,
        ]);
    Blocks { b1, b2, b3, b4, b5 }
}

/// Block placement `(block, row, col)` inside the 6×14 matrix.
const LAYOUT: [(usize, usize, usize); 5] = [(0, 0, 3), (1, 2, 9), (2, 4, 0), (3, 4, 7), (4, 4, 9)];

fn assemble(el: &OrbitalElements) -> DMatrix<f64> {
    let bl = blocks(el);
    let parts = [&bl.b1, &bl.b2, &bl.b3, &bl.b4, &bl.b5];
    let mut m = DMatrix::zeros(6, 14);
    for (k, r, c) in LAYOUT {
        let p = parts[k];
        m.view_mut((r, c), p.shape()).copy_from(p);
    }
    // `a` stays in km both here and inside B₁.
    (el.a / MU_EARTH).sqrt() * m
}

/// Control matrix at `el` from the averaged variational equations; inputs in `[−1, 1]`.
pub fn spacecraft_bbar(el: &OrbitalElements) -> Result<IntegratorSystem, CatalogError> {
    el.validate()?;
    let b = assemble(el);
    let (lo, hi) = unit_box(14);
    Ok(IntegratorSystem::new("spacecraft-appendix", 1, b, lo, hi)?.with_labels(spacecraft_labels())?)
}

/// Ratio of the reconstructed to the printed matrix, per block.
#[derive(Clone, Debug, Serialize)]
pub struct BlockScale {
    pub block: &'static str,
    /// Median of entrywise ratios over entries whose printed magnitude exceeds 0.1e-6.
    pub median_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

pub fn block_scale_ratios(el: &OrbitalElements) -> Result<Vec<BlockScale>, CatalogError> {
    el.validate()?;
    let rec = assemble(el);
    let printed = spacecraft_printed();
    let names = ["B1", "B2", "B3", "B4", "B5"];
    let bl = blocks(el);
    let shapes = [bl.b1.shape(), bl.b2.shape(), bl.b3.shape(), bl.b4.shape(), bl.b5.shape()];
    let mut out = Vec::new();
    for (k, r, c) in LAYOUT {
        let (h, w) = shapes[k];
        let mut ratios = Vec::new();
        for i in r..r + h {
            for j in c..c + w {
                let p = printed.b_bar()[(i, j)];
                if p.abs() > 0.1e-6 && rec[(i, j)] != 0.0 {
                    ratios.push(rec[(i, j)] / p);
                }
            }
        }
        ratios.sort_by(f64::total_cmp);
        out.push(BlockScale {
            block: names[k],
            median_ratio: ratios.get(ratios.len() / 2).copied(),
            min_ratio: ratios.first().copied(),
            max_ratio: ratios.last().copied(),
        });
    }
    Ok(out)
}

/// Physical parameters of the octocopter. `omega_max` in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OctocopterParams {
    pub l: f64,
    pub m: f64,
    pub ix: f64,
    pub iy: f64,
    pub iz: f64,
    pub k_thrust: f64,
    pub d_drag: f64,
    pub i_rotor: f64,
    pub omega_max: f64,
    pub b: f64,
    pub g: f64,
    pub tau: f64,
}

impl Default for OctocopterParams {
    fn default() -> Self {
        OctocopterParams {
            l: 0.4,
            m: 1.64,
            ix: 0.044,
            iy: 0.044,
            iz: 0.088,
            k_thrust: 1e-5,
            d_drag: 0.3e-6,
            i_rotor: 9e-5,
            // 8000 rpm
            omega_max: 8000.0 * 2.0 * PI / 60.0,
            b: 0.64,
            g: 9.81,
            tau: 0.1,
        }
    }
}

impl OctocopterParams {
    pub fn validate(&self) -> Result<(), CatalogError> {
        let fields = [
            ("l", self.l),
            ("m", self.m),
            ("ix", self.ix),
            ("iy", self.iy),
            ("iz", self.iz),
            ("k_thrust", self.k_thrust),
            ("d_drag", self.d_drag),
            ("i_rotor", self.i_rotor),
            ("omega_max", self.omega_max),
            ("b", self.b),
            ("g", self.g),
            ("tau", self.tau),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(CatalogError::Params(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Largest thrust of one propeller, `kω_max²`.
    pub fn max_thrust(&self) -> f64 {
        self.k_thrust * self.omega_max * self.omega_max
    }
}

fn prop_labels() -> Vec<String> {
    (1..=8).map(|j| format!("prop{j}")).collect()
}

/// Angular accelerations from squared propeller speeds `ω_i² ∈ [0, ω_max²]`.
pub fn octocopter_rotational(p: &OctocopterParams) -> Result<IntegratorSystem, CatalogError> {
    p.validate()?;
    let b = p.b;
    #[rustfmt::skip]
    let pattern = DMatrix::from_row_slice(3, 8, &[
        -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, b, -b,
        0.0, 1.0, 0.0, -1.0, b, -b, 0.0, 0.0,
        -1.0, 1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0,
    ]);
    let gains = DVector::from_vec(vec![
        p.l * p.k_thrust / p.ix,
        p.l * p.k_thrust / p.iy,
        p.d_drag / p.iz,
    ]);
    let m = DMatrix::from_diagonal(&gains) * pattern;
    let w2 = p.omega_max * p.omega_max;
    Ok(IntegratorSystem::new(
        "octocopter-rot",
        1,
        m,
        DVector::zeros(8),
        DVector::from_element(8, w2),
    )?
    .with_labels(prop_labels())?)
}

/// `R(ψ, 0, 0)`: rotation about the vertical axis.
pub fn yaw_rotation(psi: f64) -> DMatrix<f64> {
    let (s, c) = psi.sin_cos();
    DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])
}

/// Level-mode translational accelerations. Inputs are thrusts, with the
/// hover share `mg/4` subtracted from the four vertical propellers.
pub fn octocopter_translational(p: &OctocopterParams, psi: f64) -> Result<IntegratorSystem, CatalogError> {
    p.validate()?;
    if !psi.is_finite() {
        return Err(CatalogError::Yaw(psi.to_string()));
    }
    let b = p.b;
    #[rustfmt::skip]
    let b_trans = DMatrix::from_row_slice(3, 8, &[
        0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0,
        1.0, 1.0, 1.0, 1.0, b, b, b, b,
    ]);
    let m = yaw_rotation(psi) * b_trans / p.m;
    let hover = p.m * p.g / 4.0;
    let fmax = p.max_thrust();
    let lo = DVector::from_fn(8, |i, _| if i < 4 { -hover } else { 0.0 });
    let hi = DVector::from_fn(8, |i, _| if i < 4 { fmax - hover } else { fmax });
    Ok(IntegratorSystem::new(format!("octocopter-trans:{}", psi.to_degrees()), 1, m, lo, hi)?
        .with_labels(prop_labels())?)
}

/// `B̄ = [[1, 0, 1], [0, 1, 0]]`, columns in `[−2, 2]`, `[−2, 2]`, `[−1, 1]`.
pub fn toy1() -> IntegratorSystem {
    IntegratorSystem::new(
        "toy1",
        1,
        DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]),
        DVector::from_vec(vec![-2.0, -2.0, -1.0]),
        DVector::from_vec(vec![2.0, 2.0, 1.0]),
    )
    .expect("toy1")
}

/// `B̄ = [[1, −1]]`, columns in `[−1, 3]` and `[0, 1]`.
pub fn toy2() -> IntegratorSystem {
    IntegratorSystem::new(
        "toy2",
        1,
        DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
        DVector::from_vec(vec![-1.0, 0.0]),
        DVector::from_vec(vec![3.0, 1.0]),
    )
    .expect("toy2")
}

pub fn toy3() -> IntegratorSystem {
    IntegratorSystem::new(
        "toy3",
        1,
        DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.5]),
        DVector::from_element(4, -1.0),
        DVector::from_element(4, 1.0),
    )
    .expect("toy3")
}

/// Looks up a catalog entry by name.
pub fn resolve(name: &str) -> Result<IntegratorSystem, CatalogError> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    match (head, arg) {
        ("spacecraft-printed", None) => Ok(spacecraft_printed()),
        ("spacecraft-appendix", None) => spacecraft_bbar(&ORBIT_INITIAL.into()),
        ("spacecraft-appendix", Some(path)) => spacecraft_bbar(&OrbitalElements::load(path)?),
        ("octocopter-rot", None) => octocopter_rotational(&OctocopterParams::default()),
        ("octocopter-trans", arg) => {
            let deg = match arg {
                None => 0.0,
                Some(s) => s
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CatalogError::Yaw(s.to_string()))?,
            };
            octocopter_translational(&OctocopterParams::default(), deg.to_radians())
        }
        ("toy1", None) => Ok(toy1()),
        ("toy2", None) => Ok(toy2()),
        ("toy3", None) => Ok(toy3()),
        _ => Err(CatalogError::Unknown(name.to_string())),
    }
}

/// Catalog names with one-line descriptions.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("spacecraft-printed", "6x14 low-thrust spacecraft, published matrix, inputs in [-1, 1]"),
        (
            "spacecraft-appendix[:<elements.json>]",
            "spacecraft rebuilt from orbital elements (default: initial orbit)",
        ),
        ("octocopter-rot", "3x8 octocopter angular accelerations, inputs ω² in [0, ω_max²]"),
        ("octocopter-trans[:<psi-deg>]", "3x8 octocopter level-mode translation at yaw psi"),
        ("toy1", "2x3 fixture, lose column 3"),
        ("toy2", "1x2 fixture, lose column 2"),
        ("toy3", "2x4 fixture, lose columns 3 and 4"),
    ]
}
