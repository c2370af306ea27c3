//! Plane-wave modes of a periodic cubic box.
//!
//! A mode function is the complex 3-vector that multiplies the annihilation
//! operator (sign `+`) or the creation operator (sign `-`) in the field
//! expansion. Every mode function has the form `g * exp(i(q.r - nu t))` with a
//! constant prefactor `g`, so derivatives are exact multiplications.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::tensor::{C64, I, ZERO};

pub type CVec3 = [C64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldKind {
    E,
    B,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    /// Positive-frequency part, carries annihilation operators.
    Plus,
    /// Negative-frequency part, carries creation operators.
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FieldKind::E => "E",
            FieldKind::B => "B",
            FieldKind::A => "A",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
    T,
}

impl Axis {
    pub const SPATIAL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn spatial(i: usize) -> Axis {
        Self::SPATIAL[i]
    }

    pub fn index(self) -> Option<usize> {
        match self {
            Axis::X => Some(0),
            Axis::Y => Some(1),
            Axis::Z => Some(2),
            Axis::T => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub r: [f64; 3],
    pub t: f64,
}

impl SpacetimePoint {
    pub const ORIGIN: SpacetimePoint = SpacetimePoint {
        r: [0.0; 3],
        t: 0.0,
    };

    pub fn new(r: [f64; 3], t: f64) -> Self {
        Self { r, t }
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().all(|x| x.is_finite()) && self.t.is_finite()
    }

    pub fn shifted(&self, axis: Axis, h: f64) -> Self {
        let mut p = *self;
        match axis.index() {
            Some(i) => p.r[i] += h,
            None => p.t += h,
        }
        p
    }

    pub fn time_shifted(&self, dt: f64) -> Self {
        self.shifted(Axis::T, dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeConvention {
    /// `sqrt(2 pi hbar omega / L^3)`, Gaussian units.
    #[default]
    Physical,
    /// Amplitude 1 for every mode.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub n: [i32; 3],
    pub pol: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub n: [i32; 3],
    pub k: Vector3<f64>,
    pub omega: f64,
    pub pol_index: u8,
    pub pol: Vector3<f64>,
    pub amplitude: f64,
    c: f64,
}

impl Mode {
    pub fn khat(&self) -> Vector3<f64> {
        self.k / self.k.norm()
    }

    /// Wavevector and frequency of the mode function: `(k, omega)` for `+`,
    /// `(-k, -omega)` for `-`.
    pub fn wave(&self, sign: Sign) -> (Vector3<f64>, f64) {
        let s = sign.factor();
        (self.k * s, self.omega * s)
    }

    /// Integer lattice vector of the exponent, `n` for `+` and `-n` for `-`.
    pub fn lattice(&self, sign: Sign) -> [i32; 3] {
        match sign {
            Sign::Plus => self.n,
            Sign::Minus => [-self.n[0], -self.n[1], -self.n[2]],
        }
    }

    /// Constant prefactor `g` of the mode function (its value at r = 0, t = 0).
    pub fn prefactor(&self, field: FieldKind, sign: Sign) -> CVec3 {
        let (dir, scale) = match field {
            FieldKind::E => (self.pol, I * self.amplitude),
            FieldKind::B => (self.khat().cross(&self.pol), I * self.amplitude),
            FieldKind::A => (
                self.pol,
                C64::new(self.c * self.amplitude / self.omega, 0.0),
            ),
        };
        let g = [scale * dir.x, scale * dir.y, scale * dir.z];
        match sign {
            Sign::Plus => g,
            Sign::Minus => [g[0].conj(), g[1].conj(), g[2].conj()],
        }
    }

    /// `exp(i(q.r - nu t))` for the given sign.
    pub fn phase(&self, sign: Sign, p: &SpacetimePoint) -> C64 {
        let (q, nu) = self.wave(sign);
        let arg = q.x * p.r[0] + q.y * p.r[1] + q.z * p.r[2] - nu * p.t;
        C64::from_polar(1.0, arg)
    }

    /// Multiplier applied by a derivative along `axis`: `i q_axis` or `-i nu`.
    pub fn derivative_factor(&self, sign: Sign, axis: Axis) -> C64 {
        let (q, nu) = self.wave(sign);
        match axis.index() {
            Some(i) => I * q[i],
            None => -I * nu,
        }
    }
}

/// Evaluates a mode function at a spacetime point.
pub fn mode_function(mode: &Mode, field: FieldKind, sign: Sign, p: &SpacetimePoint) -> CVec3 {
    let g = mode.prefactor(field, sign);
    let ph = mode.phase(sign, p);
    [g[0] * ph, g[1] * ph, g[2] * ph]
}

/// Exact derivative of a mode function along one spacetime axis.
pub fn mode_derivative(
    mode: &Mode,
    field: FieldKind,
    sign: Sign,
    p: &SpacetimePoint,
    axis: Axis,
) -> CVec3 {
    let f = mode_function(mode, field, sign, p);
    let d = mode.derivative_factor(sign, axis);
    [f[0] * d, f[1] * d, f[2] * d]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSetParams {
    pub box_length: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub convention: AmplitudeConvention,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    params: ModeSetParams,
    entries: Vec<ModeEntry>,
    modes: Vec<Mode>,
}

impl ModeSet {
    pub fn new(params: ModeSetParams, entries: &[ModeEntry]) -> Result<Self> {
        let valid = |x: f64| x.is_finite() && x > 0.0;
        if !valid(params.box_length) || !valid(params.c) || !valid(params.hbar) {
            return Err(LabError::InvalidArgument(
                "box_length, c and hbar must be finite and positive".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut modes = Vec::with_capacity(entries.len());
        for e in entries {
            if e.n == [0, 0, 0] {
                return Err(LabError::ZeroWavevector);
            }
            if e.pol != 1 && e.pol != 2 {
                return Err(LabError::InvalidArgument(format!(
                    "polarization index {} must be 1 or 2",
                    e.pol
                )));
            }
            if !seen.insert((e.n, e.pol)) {
                return Err(LabError::DuplicateMode { n: e.n, pol: e.pol });
            }
            modes.push(build_mode(&params, *e));
        }
        Ok(Self {
            params,
            entries: entries.to_vec(),
            modes,
        })
    }

    pub fn params(&self) -> &ModeSetParams {
        &self.params
    }

    pub fn entries(&self) -> &[ModeEntry] {
        &self.entries
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn box_length(&self) -> f64 {
        self.params.box_length
    }

    pub fn c(&self) -> f64 {
        self.params.c
    }

    pub fn hbar(&self) -> f64 {
        self.params.hbar
    }

    /// Shortest wavelength in the set.
    pub fn min_wavelength(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| 2.0 * PI / m.k.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest integer wavenumber component in the set.
    pub fn max_lattice_component(&self) -> i32 {
        self.modes
            .iter()
            .flat_map(|m| m.n.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Sub-set holding a single mode, with the same box parameters.
    pub fn singleton(&self, index: usize) -> ModeSet {
        ModeSet {
            params: self.params,
            entries: vec![self.entries[index]],
            modes: vec![self.modes[index].clone()],
        }
    }
}

pub fn build_mode_set(
    box_length: f64,
    entries: &[ModeEntry],
    c: f64,
    convention: AmplitudeConvention,
) -> Result<ModeSet> {
    ModeSet::new(
        ModeSetParams {
            box_length,
            c,
            hbar: 1.0,
            convention,
        },
        entries,
    )
}

fn build_mode(params: &ModeSetParams, e: ModeEntry) -> Mode {
    let n = Vector3::new(e.n[0] as f64, e.n[1] as f64, e.n[2] as f64);
    let k = n * (2.0 * PI / params.box_length);
    let omega = params.c * k.norm();
    let zhat = Vector3::z();
    let (p1, p2) = if e.n[0] == 0 && e.n[1] == 0 {
        (Vector3::x(), Vector3::y())
    } else {
        let p1 = k.cross(&zhat).normalize();
        let p2 = k.cross(&p1).normalize();
        (p1, p2)
    };
    let pol = if e.pol == 1 { p1 } else { p2 };
    let amplitude = match params.convention {
        AmplitudeConvention::Unit => 1.0,
        AmplitudeConvention::Physical => {
            (2.0 * PI * params.hbar * omega / params.box_length.powi(3)).sqrt()
        }
    };
    Mode {
        n: e.n,
        k,
        omega,
        pol_index: e.pol,
        pol,
        amplitude,
        c: params.c,
    }
}

/// Curl of a mode function at a point, from exact derivatives.
pub fn mode_curl(mode: &Mode, field: FieldKind, sign: Sign, p: &SpacetimePoint) -> CVec3 {
    let d: Vec<CVec3> = Axis::SPATIAL
        .iter()
        .map(|&a| mode_derivative(mode, field, sign, p, a))
        .collect();
    // (curl f)_j = eps_jkl d_k f_l
    [
        d[1][2] - d[2][1],
        d[2][0] - d[0][2],
        d[0][1] - d[1][0],
    ]
}

pub fn mode_divergence(mode: &Mode, field: FieldKind, sign: Sign, p: &SpacetimePoint) -> C64 {
    (0..3).fold(ZERO, |acc, i| {
        acc + mode_derivative(mode, field, sign, p, Axis::spatial(i))[i]
    })
}
