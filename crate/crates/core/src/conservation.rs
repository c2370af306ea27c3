//! Densities, fluxes and residuals of the differential and integral
//! conservation identities of the second-order correlation tensors.
//!
//! Every residual is reported relative to a scale built from the named
//! constituent tensors (E, H, M, N), never from the combined tensors alone,
//! so that fields which cancel to rounding level are judged on the size of
//! their parts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::correlators::{
    combine_named, correlator_field, named_tensors, slot1_curl, slot1_derivative,
    slot1_divergence, slot1_inverse_curl_with_reference, CombinedTensors, ConventionTag,
    CorrelatorField, NamedTensors,
};
use crate::error::{LabError, Result};
use crate::mode_basis::{Axis, FieldKind, ModeSet, SpacetimePoint};
use crate::oracle::{convergence_order, ConvergenceFit};
use crate::quantum_state::{DensityOperator, FockSpace};
use crate::tensor::{CTensor, C64, EPSILON_TERMS, ONE, ZERO};
use crate::wave_sum::{Region, WaveSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    Eq7,
    Eq8,
    Eq9,
    Eq10,
    Eq11,
    Eq12,
    Eq13,
    Eq14,
    Eq15,
    Eq16,
    Eq17,
    Eq18,
    Eq2Slotwise,
    Eq3Slotwise,
    Eq23,
    Eq27,
    Eq36,
    Eq24,
    Eq28,
    Eq29,
    Eq35,
    Eq35Helicity,
    Eq23Fd,
    CrosscheckDense,
    CrosscheckCoherent,
    CrosscheckWick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Curl,
    Divergence,
    Slotwise,
    Continuity,
    Integral,
    Potential,
    Angular,
    Helicity,
    FiniteDifference,
    Crosscheck,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 26] = [
        IdentityKind::Eq7,
        IdentityKind::Eq8,
        IdentityKind::Eq9,
        IdentityKind::Eq10,
        IdentityKind::Eq11,
        IdentityKind::Eq12,
        IdentityKind::Eq13,
        IdentityKind::Eq14,
        IdentityKind::Eq15,
        IdentityKind::Eq16,
        IdentityKind::Eq17,
        IdentityKind::Eq18,
        IdentityKind::Eq2Slotwise,
        IdentityKind::Eq3Slotwise,
        IdentityKind::Eq23,
        IdentityKind::Eq27,
        IdentityKind::Eq36,
        IdentityKind::Eq24,
        IdentityKind::Eq28,
        IdentityKind::Eq29,
        IdentityKind::Eq35,
        IdentityKind::Eq35Helicity,
        IdentityKind::Eq23Fd,
        IdentityKind::CrosscheckDense,
        IdentityKind::CrosscheckCoherent,
        IdentityKind::CrosscheckWick,
    ];

    pub fn name(self) -> &'static str {
        use IdentityKind::*;
        match self {
            Eq7 => "eq7",
            Eq8 => "eq8",
            Eq9 => "eq9",
            Eq10 => "eq10",
            Eq11 => "eq11",
            Eq12 => "eq12",
            Eq13 => "eq13",
            Eq14 => "eq14",
            Eq15 => "eq15",
            Eq16 => "eq16",
            Eq17 => "eq17",
            Eq18 => "eq18",
            Eq2Slotwise => "eq2_slotwise",
            Eq3Slotwise => "eq3_slotwise",
            Eq23 => "eq23",
            Eq27 => "eq27",
            Eq36 => "eq36",
            Eq24 => "eq24",
            Eq28 => "eq28",
            Eq29 => "eq29",
            Eq35 => "eq35",
            Eq35Helicity => "eq35_helicity",
            Eq23Fd => "eq23_fd",
            CrosscheckDense => "crosscheck_dense",
            CrosscheckCoherent => "crosscheck_coherent",
            CrosscheckWick => "crosscheck_wick",
        }
    }

    pub fn parse(s: &str) -> Option<IdentityKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn description(self) -> &'static str {
        use IdentityKind::*;
        match self {
            Eq7 => "curl E + (1/c) dt N = 0",
            Eq8 => "curl M + (1/c) dt H = 0",
            Eq9 => "curl N - (1/c) dt E = 0",
            Eq10 => "curl H - (1/c) dt M = 0",
            Eq11 => "div E = 0 (slot 1)",
            Eq12 => "div H = 0 (slot 1)",
            Eq13 => "div M = 0 (slot 1)",
            Eq14 => "div N = 0 (slot 1)",
            Eq15 => "curl Ebb - (1/c) dt Sbb = 0",
            Eq16 => "curl Sbb + (1/c) dt Ebb = 0",
            Eq17 => "div Ebb = 0 (slot 1)",
            Eq18 => "div Sbb = 0 (slot 1)",
            Eq2Slotwise => "curl <E- X> + (1/c) dt <B- X> = 0 for each fixed string X",
            Eq3Slotwise => "curl <B- X> - (1/c) dt <E- X> = 0 for each fixed string X",
            Eq23 => "dt W + div T = 0 (energy continuity)",
            Eq27 => "dt Tm_i + s d_p Wstress_pi = 0 (momentum continuity)",
            Eq36 => "dt L_p + s d_k M_pk = 0 (angular momentum continuity)",
            Eq24 => "d/dt int_V W + flux_S(T) = 0",
            Eq28 => "d/dt int_V Tm_i + s flux_S(Wstress_.i) = 0",
            Eq29 => "Ebb = curl A with div A = 0 (tensor potential)",
            Eq35 => "L_total = L_orbital + L_spin",
            Eq35Helicity => "helicity flip negates L_spin_z",
            Eq23Fd => "dt W + div T by central differences of dense traces; fitted order in window",
            CrosscheckDense => "plane-wave correlator = dense trace of explicit operator products",
            CrosscheckCoherent => "trace path = coherent factorization (coherent states)",
            CrosscheckWick => "trace path = Gaussian pairing sum (thermal states)",
        }
    }

    pub fn family(self) -> Family {
        use IdentityKind::*;
        match self {
            Eq7 | Eq8 | Eq9 | Eq10 | Eq15 | Eq16 => Family::Curl,
            Eq11 | Eq12 | Eq13 | Eq14 | Eq17 | Eq18 => Family::Divergence,
            Eq2Slotwise | Eq3Slotwise => Family::Slotwise,
            Eq23 | Eq27 | Eq36 => Family::Continuity,
            Eq24 | Eq28 => Family::Integral,
            Eq29 => Family::Potential,
            Eq35 => Family::Angular,
            Eq35Helicity => Family::Helicity,
            Eq23Fd => Family::FiniteDifference,
            CrosscheckDense | CrosscheckCoherent | CrosscheckWick => Family::Crosscheck,
        }
    }

    /// Whether a failing residual counts against the suite.
    pub fn verdict_mode(self, convention: ConventionTag) -> VerdictMode {
        match (self.family(), convention) {
            (
                Family::Divergence
                | Family::Slotwise
                | Family::Potential
                | Family::Angular
                | Family::Crosscheck,
                _,
            ) => {
                VerdictMode::PassFail
            }
            (_, ConventionTag::Derivation13) => VerdictMode::PassFail,
            (_, ConventionTag::Printed22) => VerdictMode::ReportedOnly,
        }
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdentityId {
    pub kind: IdentityKind,
    pub convention: ConventionTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictMode {
    PassFail,
    ReportedOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportedOnly,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::ReportedOnly => "reported_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub point_index: usize,
    pub residual: f64,
    pub scale: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: IdentityId,
    /// Distinguishes several reports of one identity, such as the two volumes
    /// of an integral balance.
    pub variant: Option<String>,
    pub entries: Vec<ResidualEntry>,
    pub residual_norm: f64,
    pub scale: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub sign_flipped: bool,
    pub printed_sign_relative: Option<f64>,
    pub flags: Vec<String>,
    pub details: Vec<Detail>,
}

impl ResidualReport {
    pub fn from_entries(id: IdentityId, entries: Vec<ResidualEntry>, tolerance: f64) -> Self {
        let residual_norm = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
        let scale = entries.iter().map(|e| e.scale).fold(0.0, f64::max);
        let mut r = Self {
            identity: id,
            variant: None,
            entries,
            residual_norm,
            scale,
            relative: relative(residual_norm, scale),
            tolerance,
            verdict: Verdict::Pass,
            sign_flipped: false,
            printed_sign_relative: None,
            flags: Vec::new(),
            details: Vec::new(),
        };
        r.judge(true);
        r
    }

    /// Sets the verdict from `relative` and an extra condition.
    pub fn judge(&mut self, extra_ok: bool) {
        let ok = self.relative <= self.tolerance && extra_ok;
        self.verdict = match self.identity.kind.verdict_mode(self.identity.convention) {
            VerdictMode::ReportedOnly => Verdict::ReportedOnly,
            VerdictMode::PassFail if ok => Verdict::Pass,
            VerdictMode::PassFail => Verdict::Fail,
        };
    }

    pub fn detail(&mut self, name: impl Into<String>, value: f64) {
        self.details.push(Detail {
            name: name.into(),
            value,
        });
    }

    pub fn detail_value(&self, name: &str) -> Option<f64> {
        self.details.iter().find(|d| d.name == name).map(|d| d.value)
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    /// Identity name with the variant suffix, as used in flat tables.
    pub fn label(&self) -> String {
        match &self.variant {
            Some(v) => format!("{}[{v}]", self.identity.kind.name()),
            None => self.identity.kind.name().to_string(),
        }
    }
}

/// `residual / scale`; the absolute residual when the scale vanishes.
pub fn relative(residual: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        residual / scale
    } else {
        residual
    }
}

pub fn entry(point_index: usize, residual: f64, scale: f64) -> ResidualEntry {
    ResidualEntry {
        point_index,
        residual,
        scale,
        relative: relative(residual, scale),
    }
}

/// Tolerances per identity family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Continuity, integral balance, angular split and helicity checks.
    pub analytic: f64,
    /// Curl, divergence and slot-wise identities.
    pub identity: f64,
    /// Tensor potential reconstruction.
    pub potential: f64,
    /// Accepted window for fitted finite-difference orders.
    pub fd_order_window: [f64; 2],
    pub path: f64,
    pub coherent: f64,
    pub wick: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            analytic: 1e-10,
            identity: 1e-12,
            potential: 1e-13,
            fd_order_window: [1.8, 2.2],
            path: 1e-12,
            coherent: 1e-10,
            wick: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn for_kind(&self, kind: IdentityKind) -> f64 {
        match kind.family() {
            Family::Curl | Family::Divergence | Family::Slotwise => self.identity,
            Family::Potential => self.potential,
            _ => self.analytic,
        }
    }
}

/// Scalar, vector and rank-2 densities as plane-wave sums in slot 1.
#[derive(Debug, Clone)]
pub struct DensityFields {
    pub w: WaveSum,
    pub flow: [WaveSum; 3],
    pub momentum: [WaveSum; 3],
    pub stress: [[WaveSum; 3]; 3],
}

impl DensityFields {
    pub fn new(combined: &CombinedTensors, c: f64) -> Self {
        let (e, s) = (&combined.ebb, &combined.sbb);
        let grid = |f: &CorrelatorField, g: &CorrelatorField| -> [[WaveSum; 3]; 3] {
            std::array::from_fn(|p| std::array::from_fn(|i| WaveSum::bilinear(f, p, g, i)))
        };
        let ee = grid(e, e);
        let ss = grid(s, s);
        let se = grid(s, e);
        let mut w = WaveSum::zero();
        for l in 0..3 {
            w.add_scaled(&ee[l][l], 1.0);
            w.add_scaled(&ss[l][l], 1.0);
        }
        let x: [[WaveSum; 3]; 3] = std::array::from_fn(|l| std::array::from_fn(|j| se[l][j].re2()));
        let mut flow: [WaveSum; 3] = Default::default();
        let mut momentum: [WaveSum; 3] = Default::default();
        for &(a, b, cc, sgn) in &EPSILON_TERMS {
            flow[a].add_scaled(&x[b][cc], c * sgn);
            momentum[a].add_scaled(&x[b][cc], sgn / c);
        }
        let stress = std::array::from_fn(|p| {
            std::array::from_fn(|i| {
                let mut v = ee[p][i].re2();
                v.add_scaled(&ss[p][i].re2(), 1.0);
                if p == i {
                    v.add_scaled(&w, -1.0);
                }
                v
            })
        });
        Self {
            w,
            flow,
            momentum,
            stress,
        }
    }
}

/// Densities evaluated at one slot-1 point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBundle {
    pub w: f64,
    pub flow: [f64; 3],
    pub momentum: [f64; 3],
    pub stress: [[f64; 3]; 3],
    pub angular: [f64; 3],
    /// Largest discarded imaginary part, relative to the constituent scale.
    pub imaginary_residual: f64,
    /// Largest `|W_pi - W_ip|`, relative to the constituent scale.
    pub asymmetry: f64,
}

/// Norms of the named tensors and their slot-1 derivatives at one point.
#[derive(Debug, Clone, Copy)]
struct ConstituentNorms {
    /// `|E| + |H|`
    energy: f64,
    /// `|M| + |N|`
    flow: f64,
    /// Sum of time-derivative norms.
    dt: f64,
    /// Sum of spatial-derivative norms over the three axes.
    dx: f64,
}

impl ConstituentNorms {
    fn amplitude(&self) -> f64 {
        self.energy + self.flow
    }

    fn bilinear(&self) -> f64 {
        self.amplitude() * self.amplitude()
    }
}

/// Everything derived from one state under one convention at fixed slots 2..4.
pub struct Analysis<'a> {
    rho: &'a DensityOperator,
    space: &'a FockSpace,
    ms: &'a ModeSet,
    fixed_points: Vec<SpacetimePoint>,
    pub named: NamedTensors,
    pub combined: CombinedTensors,
    pub densities: DensityFields,
    /// `[field][axis]` with fields E, H, M, N and axes x, y, z, t.
    named_derivatives: Vec<Vec<CorrelatorField>>,
}

const ALL_AXES: [Axis; 4] = [Axis::X, Axis::Y, Axis::Z, Axis::T];

impl<'a> Analysis<'a> {
    pub fn new(
        convention: ConventionTag,
        rho: &'a DensityOperator,
        space: &'a FockSpace,
        ms: &'a ModeSet,
        fixed_points: &[SpacetimePoint],
    ) -> Result<Self> {
        let named = named_tensors(convention, rho, space, ms, fixed_points)?;
        let combined = combine_named(&named);
        let densities = DensityFields::new(&combined, ms.c());
        let named_derivatives = named
            .all()
            .iter()
            .map(|f| ALL_AXES.iter().map(|&a| slot1_derivative(f, a)).collect())
            .collect();
        Ok(Self {
            rho,
            space,
            ms,
            fixed_points: fixed_points.to_vec(),
            named,
            combined,
            densities,
            named_derivatives,
        })
    }

    pub fn convention(&self) -> ConventionTag {
        self.named.convention
    }

    pub fn mode_set(&self) -> &ModeSet {
        self.ms
    }

    fn id(&self, kind: IdentityKind) -> IdentityId {
        IdentityId {
            kind,
            convention: self.convention(),
        }
    }

    fn norms(&self, p: &SpacetimePoint) -> ConstituentNorms {
        let all = self.named.all();
        let value = |i: usize| all[i].evaluate(p).norm();
        let der = |i: usize, a: usize| self.named_derivatives[i][a].evaluate(p).norm();
        let dt = (0..4).map(|i| der(i, 3)).sum();
        let dx = (0..4).map(|i| (0..3).map(|a| der(i, a)).sum::<f64>()).sum();
        ConstituentNorms {
            energy: value(0) + value(1),
            flow: value(2) + value(3),
            dt,
            dx,
        }
    }

    pub fn density_bundle(&self, p: &SpacetimePoint, r0: [f64; 3]) -> DensityBundle {
        let d = &self.densities;
        let scale = self.norms(p).bilinear() * self.ms.c().max(1.0 / self.ms.c());
        let mut imag = 0.0f64;
        let mut real = |z: C64| {
            imag = imag.max(z.im.abs());
            z.re
        };
        let w = real(d.w.evaluate(p));
        let flow = std::array::from_fn(|k| real(d.flow[k].evaluate(p)));
        let momentum: [f64; 3] = std::array::from_fn(|k| real(d.momentum[k].evaluate(p)));
        let stress: [[f64; 3]; 3] =
            std::array::from_fn(|a| std::array::from_fn(|b| real(d.stress[a][b].evaluate(p))));
        let x: [f64; 3] = std::array::from_fn(|j| p.r[j] - r0[j]);
        let mut angular = [0.0; 3];
        for &(a, j, i, s) in &EPSILON_TERMS {
            angular[a] += s * x[j] * momentum[i];
        }
        let mut asym = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                asym = asym.max((stress[a][b] - stress[b][a]).abs());
            }
        }
        DensityBundle {
            w,
            flow,
            momentum,
            stress,
            angular,
            imaginary_residual: relative(imag, scale),
            asymmetry: relative(asym, scale),
        }
    }

    /// Curl-type identities: slot-1 curl and time-derivative systems.
    pub fn curl_residual(&self, kind: IdentityKind, points: &[SpacetimePoint], tol: f64) -> Result<ResidualReport> {
        let c = self.ms.c();
        let [e, h, m, n] = self.named.all();
        let k = 1.0 / c;
        let curl = |f: &CorrelatorField, s: f64| slot1_curl(f).scaled(C64::new(s, 0.0));
        let dt = |f: &CorrelatorField, s: f64| slot1_derivative(f, Axis::T).scaled(C64::new(s, 0.0));
        let groups: Vec<Vec<CorrelatorField>> = match kind {
            IdentityKind::Eq7 => vec![vec![curl(e, 1.0), dt(n, k)]],
            IdentityKind::Eq8 => vec![vec![curl(m, 1.0), dt(h, k)]],
            IdentityKind::Eq9 => vec![vec![curl(n, 1.0), dt(e, -k)]],
            IdentityKind::Eq10 => vec![vec![curl(h, 1.0), dt(m, -k)]],
            IdentityKind::Eq15 => vec![vec![curl(e, 1.0), curl(h, 1.0), dt(m, -k), dt(n, k)]],
            IdentityKind::Eq16 => vec![vec![curl(m, 1.0), curl(n, -1.0), dt(e, k), dt(h, k)]],
            IdentityKind::Eq2Slotwise | IdentityKind::Eq3Slotwise => {
                let mut out = Vec::new();
                for (fe, fb) in self.slotwise_pairs()? {
                    out.push(if kind == IdentityKind::Eq2Slotwise {
                        vec![curl(&fe, 1.0), dt(&fb, k)]
                    } else {
                        vec![curl(&fb, 1.0), dt(&fe, -k)]
                    });
                }
                out
            }
            _ => {
                return Err(LabError::InvalidPairing {
                    id: kind.name().into(),
                    convention: self.convention().name().into(),
                })
            }
        };
        let entries = points
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let mut residual = 0.0f64;
                let mut scale = 0.0f64;
                for group in &groups {
                    let mut sum = CTensor::zeros(4);
                    for term in group {
                        let v = term.evaluate(p);
                        scale = scale.max(v.norm());
                        sum.add_scaled(&v, ONE);
                    }
                    residual = residual.max(sum.norm());
                }
                entry(idx, residual, scale)
            })
            .collect();
        Ok(ResidualReport::from_entries(self.id(kind), entries, tol))
    }

    /// For each distinct fixed operator string X among the named patterns,
    /// the pair `(<E- X>, <B- X>)`.
    fn slotwise_pairs(&self) -> Result<Vec<(CorrelatorField, CorrelatorField)>> {
        let mut rests: Vec<String> = Vec::new();
        let mut out = Vec::new();
        for pattern in self.convention().patterns() {
            let rest: String = pattern.to_string()[2..].to_string();
            if rests.contains(&rest) {
                continue;
            }
            rests.push(rest);
            let build = |field| {
                correlator_field(
                    self.rho,
                    self.space,
                    self.ms,
                    &pattern.with_first_field(field),
                    &self.fixed_points,
                )
            };
            out.push((build(FieldKind::E)?, build(FieldKind::B)?));
        }
        Ok(out)
    }

    /// Divergence identities, judged termwise on the coefficient tensors.
    pub fn divergence_residual(&self, kind: IdentityKind, points: &[SpacetimePoint], tol: f64) -> Result<ResidualReport> {
        let [e, h, m, n] = self.named.all();
        let (field, parts): (CorrelatorField, Vec<&CorrelatorField>) = match kind {
            IdentityKind::Eq11 => (e.clone(), vec![e]),
            IdentityKind::Eq12 => (h.clone(), vec![h]),
            IdentityKind::Eq13 => (m.clone(), vec![m]),
            IdentityKind::Eq14 => (n.clone(), vec![n]),
            IdentityKind::Eq17 => (self.combined.ebb.clone(), vec![e, h]),
            IdentityKind::Eq18 => (self.combined.sbb.clone(), vec![m, n]),
            _ => {
                return Err(LabError::InvalidPairing {
                    id: kind.name().into(),
                    convention: self.convention().name().into(),
                })
            }
        };
        let div = slot1_divergence(&field);
        let gradients: Vec<Vec<CorrelatorField>> = parts
            .iter()
            .map(|f| Axis::SPATIAL.iter().map(|&a| slot1_derivative(f, a)).collect())
            .collect();
        let entries = points
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let residual = div.evaluate(p).norm();
                let scale = gradients
                    .iter()
                    .flat_map(|g| g.iter().map(|d| d.evaluate(p).norm()))
                    .fold(0.0, f64::max);
                entry(idx, residual, scale)
            })
            .collect();
        let mut report = ResidualReport::from_entries(self.id(kind), entries, tol);
        let term_residual = field.max_divergence();
        let term_scale = parts.iter().map(|f| f.max_gradient_scale()).fold(0.0, f64::max);
        let termwise = relative(term_residual, term_scale);
        report.detail("pointwise_relative", report.relative);
        report.detail("termwise_residual", term_residual);
        report.detail("termwise_scale", term_scale);
        report.residual_norm = term_residual;
        report.scale = term_scale;
        report.relative = termwise;
        report.judge(true);
        Ok(report)
    }

    /// Pointwise residual vectors of a continuity identity for flux sign `s`.
    fn continuity_entries(
        &self,
        kind: IdentityKind,
        points: &[SpacetimePoint],
        r0: [f64; 3],
        s: f64,
    ) -> Vec<ResidualEntry> {
        let d = &self.densities;
        let c = self.ms.c();
        let dt_w = d.w.derivative(Axis::T);
        let div_flow: Vec<WaveSum> = (0..3).map(|k| d.flow[k].derivative(Axis::spatial(k))).collect();
        let dt_mom: Vec<WaveSum> = d.momentum.iter().map(|m| m.derivative(Axis::T)).collect();
        // div_stress[i][p] = d_p W_pi
        let div_stress: Vec<Vec<WaveSum>> = (0..3)
            .map(|i| (0..3).map(|p| d.stress[p][i].derivative(Axis::spatial(p))).collect())
            .collect();
        points
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let n = self.norms(p);
                let amp = n.amplitude();
                match kind {
                    IdentityKind::Eq23 => {
                        let divergence: C64 = div_flow.iter().map(|f| f.evaluate(p)).sum();
                        let r = dt_w.evaluate(p) + divergence * s;
                        entry(idx, r.norm(), 2.0 * amp * (n.dt + c * n.dx))
                    }
                    IdentityKind::Eq27 | IdentityKind::Eq36 => {
                        let ds: [C64; 3] = std::array::from_fn(|i| {
                            div_stress[i].iter().map(|f| f.evaluate(p)).sum::<C64>()
                        });
                        let dm: [C64; 3] = std::array::from_fn(|i| dt_mom[i].evaluate(p));
                        let scale27 = 2.0 * amp * (n.dt / c + 3.0 * n.dx);
                        if kind == IdentityKind::Eq27 {
                            let r: f64 = (0..3).map(|i| (dm[i] + ds[i] * s).norm_sqr()).sum();
                            entry(idx, r.sqrt(), scale27)
                        } else {
                            let x: [f64; 3] = std::array::from_fn(|j| p.r[j] - r0[j]);
                            let stress: [[C64; 3]; 3] = std::array::from_fn(|a| {
                                std::array::from_fn(|b| d.stress[a][b].evaluate(p))
                            });
                            let mut r = [ZERO; 3];
                            for &(a, j, i, e) in &EPSILON_TERMS {
                                // d_k M_ak = eps_aji (delta_jk W_ik + x_j d_k W_ik)
                                r[a] += (dm[i] * x[j] + (stress[i][j] + ds[i] * x[j]) * s) * e;
                            }
                            let radius = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                            let scale = radius * scale27 + 6.0 * n.bilinear();
                            let res: f64 = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                            entry(idx, res, scale)
                        }
                    }
                    _ => unreachable!("continuity kind"),
                }
            })
            .collect()
    }

    /// Continuity identities with the printed flux sign, falling back to the
    /// opposite sign when only that one closes.
    pub fn continuity_residual(
        &self,
        kind: IdentityKind,
        points: &[SpacetimePoint],
        r0: [f64; 3],
        tol: f64,
    ) -> Result<ResidualReport> {
        if kind.family() != Family::Continuity {
            return Err(LabError::InvalidPairing {
                id: kind.name().into(),
                convention: self.convention().name().into(),
            });
        }
        let printed = ResidualReport::from_entries(
            self.id(kind),
            self.continuity_entries(kind, points, r0, 1.0),
            tol,
        );
        let flipped = ResidualReport::from_entries(
            self.id(kind),
            self.continuity_entries(kind, points, r0, -1.0),
            tol,
        );
        Ok(choose_sign(printed, flipped))
    }

    /// Integral balances over the full periodic box or the lower half box.
    pub fn integral_balance(
        &self,
        kind: IdentityKind,
        volume: Volume,
        times: &[f64],
        fd_step: f64,
        tol: &Tolerances,
    ) -> Result<ResidualReport> {
        if kind.family() != Family::Integral {
            return Err(LabError::InvalidPairing {
                id: kind.name().into(),
                convention: self.convention().name().into(),
            });
        }
        if times.len() < 3 {
            return Err(LabError::TooFewSamples {
                need: 3,
                got: times.len(),
            });
        }
        let length = self.ms.box_length();
        let d = &self.densities;
        // Components of the conserved density and of its flux vector.
        let (density, flux): (Vec<&WaveSum>, Vec<[WaveSum; 3]>) = match kind {
            IdentityKind::Eq24 => (vec![&d.w], vec![d.flow.clone()]),
            _ => (
                d.momentum.iter().collect(),
                (0..3)
                    .map(|i| std::array::from_fn(|p| d.stress[p][i].clone()))
                    .collect(),
            ),
        };
        let id = self.id(kind);
        let tolerance = tol.analytic;
        match volume {
            Volume::FullBox => {
                let values: Vec<Vec<C64>> = times
                    .iter()
                    .map(|&t| {
                        density
                            .iter()
                            .map(|w| w.integrate(&Region::FULL, length, None, t))
                            .collect()
                    })
                    .collect();
                let magnitude = values
                    .iter()
                    .map(|v| vector_norm(v))
                    .fold(0.0, f64::max);
                let entries = values
                    .iter()
                    .enumerate()
                    .map(|(idx, v)| {
                        let drift: Vec<C64> = v.iter().zip(&values[0]).map(|(a, b)| a - b).collect();
                        entry(idx, vector_norm(&drift), magnitude)
                    })
                    .collect();
                let mut report = ResidualReport::from_entries(id, entries, tolerance);
                report.variant = Some("full_box".into());
                let periodic_flux = times
                    .iter()
                    .flat_map(|&t| {
                        flux.iter()
                            .map(move |f| WaveSum::outward_flux(f, &Region::FULL, length, None, t).norm())
                    })
                    .fold(0.0, f64::max);
                report.detail("periodic_flux", periodic_flux);
                Ok(report)
            }
            Volume::HalfBox => {
                let region = Region::HALF_Z;
                let evaluate = |s: f64, h: Option<f64>| -> Vec<ResidualEntry> {
                    times
                        .iter()
                        .enumerate()
                        .map(|(idx, &t)| {
                            let mut res = 0.0;
                            let mut scale = 0.0f64;
                            for (w, f) in density.iter().zip(&flux) {
                                let rate = match h {
                                    None => w.derivative(Axis::T).integrate(&region, length, None, t),
                                    Some(h) => {
                                        (w.integrate(&region, length, None, t + h)
                                            - w.integrate(&region, length, None, t - h))
                                            / (2.0 * h)
                                    }
                                };
                                let fl = WaveSum::outward_flux(f, &region, length, None, t);
                                res += (rate + fl * s).norm_sqr();
                                scale = scale.max(rate_bound(w, &region, length)).max(flux_bound(f, length));
                            }
                            entry(idx, res.sqrt(), scale)
                        })
                        .collect()
                };
                let printed = ResidualReport::from_entries(id, evaluate(1.0, None), tolerance);
                let flipped = ResidualReport::from_entries(id, evaluate(-1.0, None), tolerance);
                let mut report = choose_sign(printed, flipped);
                report.variant = Some("half_box".into());
                let s = if report.sign_flipped { -1.0 } else { 1.0 };
                let steps = [fd_step, fd_step / 2.0, fd_step / 4.0];
                let mut samples = Vec::new();
                for (k, &h) in steps.iter().enumerate() {
                    let fd = ResidualReport::from_entries(id, evaluate(s, Some(h)), tolerance);
                    report.detail(format!("fd_mismatch_h{k}"), fd.relative);
                    samples.push((h, fd.relative));
                }
                report.detail("fd_step", fd_step);
                let order_ok = match convergence_order(&samples)? {
                    ConvergenceFit::Order(order) => {
                        report.detail("fd_order", order);
                        order >= tol.fd_order_window[0] && order <= tol.fd_order_window[1]
                    }
                    ConvergenceFit::FloorReached => {
                        report.flags.push("floor_reached".into());
                        true
                    }
                };
                report.judge(order_ok);
                Ok(report)
            }
        }
    }

    /// Divergence-free tensor potential of `Ebb`.
    pub fn tensor_potential(&self) -> Result<CorrelatorField> {
        let reference = self.named.e.coefficient_scale().max(self.named.h.coefficient_scale());
        slot1_inverse_curl_with_reference(&self.combined.ebb, reference)
    }

    pub fn potential_residual(&self, tol: f64) -> Result<ResidualReport> {
        let a = self.tensor_potential()?;
        let back = slot1_curl(&a);
        let diff = back.combine(&self.combined.ebb, -ONE, "diff");
        let curl_residual = diff
            .terms()
            .iter()
            .map(|t| t.coeff.norm())
            .fold(0.0, f64::max);
        let scale = self.named.e.coefficient_scale().max(self.named.h.coefficient_scale());
        let div_residual = a.max_divergence();
        let entries = vec![entry(0, curl_residual, scale), entry(1, div_residual, scale)];
        let mut report = ResidualReport::from_entries(self.id(IdentityKind::Eq29), entries, tol);
        report.detail("curl_relative", relative(curl_residual, scale));
        report.detail("divergence_relative", relative(div_residual, scale));
        Ok(report)
    }

    /// Integrated angular momentum and its orbital, spin and boundary parts at
    /// slot-1 time `t`.
    pub fn angular_split(&self, r0: [f64; 3], t: f64) -> Result<AngularSplit> {
        let length = self.ms.box_length();
        let c = self.ms.c();
        let region = Region::FULL;
        let a = self.tensor_potential()?;
        let s = &self.combined.sbb;
        let grad_a: Vec<CorrelatorField> =
            Axis::SPATIAL.iter().map(|&ax| slot1_derivative(&a, ax)).collect();
        // q[t][i] = S_t A*_i + cc
        let q: [[WaveSum; 3]; 3] =
            std::array::from_fn(|tt| std::array::from_fn(|i| WaveSum::bilinear(s, tt, &a, i).re2()));
        // o[i] = S_l d_i A*_l + cc
        let o: [WaveSum; 3] = std::array::from_fn(|i| {
            let mut sum = WaveSum::zero();
            for l in 0..3 {
                sum.add_scaled(&WaveSum::bilinear(s, l, &grad_a[i], l), 1.0);
            }
            sum.re2()
        });
        let mom = &self.densities.momentum;
        let moment = |f: &WaveSum, j: usize| -> C64 {
            f.integrate(&region, length, Some(j), t) - f.integrate(&region, length, None, t) * r0[j]
        };
        let mut total = [ZERO; 3];
        let mut orbital = [ZERO; 3];
        let mut spin = [ZERO; 3];
        let mut boundary = [ZERO; 3];
        for &(p, j, i, e) in &EPSILON_TERMS {
            total[p] += moment(&mom[i], j) * e;
            orbital[p] += moment(&o[i], j) * (e / c);
            spin[p] += q[j][i].integrate(&region, length, None, t) * (e / c);
            let column: [WaveSum; 3] = std::array::from_fn(|tt| q[tt][i].clone());
            let flux = WaveSum::outward_flux(&column, &region, length, Some(j), t)
                - WaveSum::outward_flux(&column, &region, length, None, t) * r0[j];
            boundary[p] -= flux * (e / c);
        }
        let re = |v: [C64; 3]| v.map(|z| z.re);
        let imag = [total, orbital, spin, boundary]
            .iter()
            .flat_map(|v| v.iter().map(|z| z.im.abs()))
            .fold(0.0, f64::max);
        Ok(AngularSplit {
            total: re(total),
            orbital: re(orbital),
            spin: re(spin),
            boundary: re(boundary),
            imaginary: imag,
        })
    }

    pub fn angular_residual(&self, r0: [f64; 3], t: f64, tol: f64) -> Result<ResidualReport> {
        let split = self.angular_split(r0, t)?;
        let mut report = ResidualReport::from_entries(
            self.id(IdentityKind::Eq35),
            vec![entry(
                0,
                split.split_residual(),
                vector_len(&split.total).max(f64::EPSILON),
            )],
            tol,
        );
        report.detail("closure_with_boundary", split.closure_relative());
        for (name, v) in [
            ("total", split.total),
            ("orbital", split.orbital),
            ("spin", split.spin),
            ("boundary", split.boundary),
        ] {
            for (ax, x) in ["x", "y", "z"].iter().zip(v) {
                report.detail(format!("{name}_{ax}"), x);
            }
        }
        Ok(report)
    }
}

/// Settles the flux sign of a continuity-type report.
fn choose_sign(printed: ResidualReport, flipped: ResidualReport) -> ResidualReport {
    let printed_relative = printed.relative;
    let use_flipped = printed.relative > printed.tolerance && flipped.relative <= flipped.tolerance;
    let mut report = if use_flipped { flipped } else { printed };
    report.sign_flipped = use_flipped;
    report.printed_sign_relative = Some(printed_relative);
    report
}

fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vector_len(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Majorant of `|int_V dt f|`.
fn rate_bound(f: &WaveSum, region: &Region, length: f64) -> f64 {
    let volume: f64 = (0..3).map(|a| (region.hi[a] - region.lo[a]) * length).product();
    volume * f.terms.iter().map(|w| w.coeff.norm() * w.nu.abs()).sum::<f64>()
}

/// Majorant of the boundary flux over the six faces of a box sub-region.
fn flux_bound(f: &[WaveSum; 3], length: f64) -> f64 {
    let area = length * length;
    2.0 * area
        * f.iter()
            .map(|s| s.terms.iter().map(|w| w.coeff.norm()).sum::<f64>())
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Volume {
    FullBox,
    HalfBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSplit {
    pub total: [f64; 3],
    pub orbital: [f64; 3],
    pub spin: [f64; 3],
    /// Surface term of the orbital/spin rearrangement.
    pub boundary: [f64; 3],
    /// Largest discarded imaginary part.
    pub imaginary: f64,
}

impl AngularSplit {
    /// `|L_total - L_orbital - L_spin|`.
    pub fn split_residual(&self) -> f64 {
        let d: [f64; 3] = std::array::from_fn(|i| self.total[i] - self.orbital[i] - self.spin[i]);
        vector_len(&d)
    }

    /// `|L_total - L_orbital - L_spin - L_boundary|` relative to the largest part.
    pub fn closure_relative(&self) -> f64 {
        let d: [f64; 3] = std::array::from_fn(|i| {
            self.total[i] - self.orbital[i] - self.spin[i] - self.boundary[i]
        });
        let scale = [self.total, self.orbital, self.spin, self.boundary]
            .iter()
            .map(vector_len)
            .fold(f64::EPSILON, f64::max);
        vector_len(&d) / scale
    }
}

/// Compares the spin z-components of a state and its helicity-flipped partner.
pub fn helicity_report(
    convention: ConventionTag,
    original: &AngularSplit,
    flipped: &AngularSplit,
    tol: f64,
) -> ResidualReport {
    let residual = (original.spin[2] + flipped.spin[2]).abs();
    let scale = original.spin[2].abs().max(flipped.spin[2].abs());
    let mut report = ResidualReport::from_entries(
        IdentityId {
            kind: IdentityKind::Eq35Helicity,
            convention,
        },
        vec![entry(0, residual, scale)],
        tol,
    );
    report.detail("spin_z", original.spin[2]);
    report.detail("flipped_spin_z", flipped.spin[2]);
    report
}

/// Curl or divergence residual for one identity id, building the analysis on the fly.
#[allow(clippy::too_many_arguments)]
pub fn curl_divergence_residual(
    id: IdentityId,
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    fixed_points: &[SpacetimePoint],
    sample_points: &[SpacetimePoint],
    tol: f64,
) -> Result<ResidualReport> {
    let analysis = Analysis::new(id.convention, rho, space, ms, fixed_points)?;
    match id.kind.family() {
        Family::Curl | Family::Slotwise => analysis.curl_residual(id.kind, sample_points, tol),
        Family::Divergence => analysis.divergence_residual(id.kind, sample_points, tol),
        _ => Err(LabError::InvalidPairing {
            id: id.kind.name().into(),
            convention: id.convention.name().into(),
        }),
    }
}

/// Box centre, the default angular-momentum reference origin.
pub fn box_center(ms: &ModeSet) -> [f64; 3] {
    [0.5 * ms.box_length(); 3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_basis::{build_mode_set, AmplitudeConvention, ModeEntry};
    use crate::quantum_state::{make_state, StateSpec};
    use std::f64::consts::PI;

    fn two_mode(c: f64) -> (FockSpace, ModeSet) {
        let ms = build_mode_set(
            2.0 * PI,
            &[ModeEntry { n: [1, 1, 1], pol: 1 }, ModeEntry { n: [1, 1, 2], pol: 2 }],
            c,
            AmplitudeConvention::Unit,
        )
        .unwrap();
        (FockSpace::new(&[6, 6]).unwrap(), ms)
    }

    fn coherent(space: &FockSpace) -> DensityOperator {
        make_state(
            space,
            &StateSpec::Coherent { amplitudes: vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.25)] },
        )
        .unwrap()
    }

    fn fixed() -> Vec<SpacetimePoint> {
        vec![
            SpacetimePoint::new([0.3, 1.1, 2.0], 0.2),
            SpacetimePoint::new([2.5, 0.4, 1.7], 0.5),
            SpacetimePoint::new([4.0, 3.3, 0.9], 0.1),
        ]
    }

    fn samples() -> Vec<SpacetimePoint> {
        (0..6)
            .map(|k| {
                let f = k as f64;
                SpacetimePoint::new([0.7 * f + 0.1, 1.3 * f + 0.4, 0.5 * f + 2.0], 0.3 * f)
            })
            .collect()
    }

    #[test]
    fn identity_names_round_trip() {
        for k in IdentityKind::ALL {
            assert_eq!(IdentityKind::parse(k.name()), Some(k));
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
    }

    #[test]
    fn derivation13_curl_system_closes() {
        for c in [1.0, 2.0] {
            let (space, ms) = two_mode(c);
            let rho = coherent(&space);
            let a = Analysis::new(ConventionTag::Derivation13, &rho, &space, &ms, &fixed()).unwrap();
            for kind in [
                IdentityKind::Eq7,
                IdentityKind::Eq8,
                IdentityKind::Eq9,
                IdentityKind::Eq10,
                IdentityKind::Eq15,
                IdentityKind::Eq16,
                IdentityKind::Eq2Slotwise,
                IdentityKind::Eq3Slotwise,
            ] {
                let r = a.curl_residual(kind, &samples(), 1e-12).unwrap();
                assert_eq!(r.verdict, Verdict::Pass, "{kind} c={c}: {}", r.relative);
                assert!(r.scale > 0.0);
            }
        }
    }

    #[test]
    fn printed22_curl_system_is_reported_only() {
        let (space, ms) = two_mode(1.0);
        let rho = coherent(&space);
        let a = Analysis::new(ConventionTag::Printed22, &rho, &space, &ms, &fixed()).unwrap();
        let r = a.curl_residual(IdentityKind::Eq15, &samples(), 1e-12).unwrap();
        assert_eq!(r.verdict, Verdict::ReportedOnly);
        assert!(r.relative > 1e-6, "{}", r.relative);
        for kind in [IdentityKind::Eq2Slotwise, IdentityKind::Eq3Slotwise] {
            let r = a.curl_residual(kind, &samples(), 1e-12).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{kind}: {}", r.relative);
        }
    }

    #[test]
    fn divergences_vanish_in_both_conventions() {
        let (space, ms) = two_mode(1.0);
        let rho = coherent(&space);
        for conv in ConventionTag::ALL {
            let a = Analysis::new(conv, &rho, &space, &ms, &fixed()).unwrap();
            for kind in [
                IdentityKind::Eq11,
                IdentityKind::Eq12,
                IdentityKind::Eq13,
                IdentityKind::Eq14,
                IdentityKind::Eq17,
                IdentityKind::Eq18,
            ] {
                let r = a.divergence_residual(kind, &samples(), 1e-12).unwrap();
                assert_eq!(r.verdict, Verdict::Pass, "{conv} {kind}: {}", r.relative);
            }
        }
    }

    #[test]
    fn continuity_laws_and_sign_choice() {
        for c in [1.0, 2.0] {
            let (space, ms) = two_mode(c);
            let rho = coherent(&space);
            let a = Analysis::new(ConventionTag::Derivation13, &rho, &space, &ms, &fixed()).unwrap();
            let r0 = box_center(&ms);
            let e23 = a.continuity_residual(IdentityKind::Eq23, &samples(), r0, 1e-10).unwrap();
            assert_eq!(e23.verdict, Verdict::Pass, "{}", e23.relative);
            assert!(!e23.sign_flipped);
            for kind in [IdentityKind::Eq27, IdentityKind::Eq36] {
                let r = a.continuity_residual(kind, &samples(), r0, 1e-10).unwrap();
                assert_eq!(r.verdict, Verdict::Pass, "{kind}: {}", r.relative);
                assert!(r.sign_flipped);
                assert!(r.printed_sign_relative.unwrap() > 1e-3);
            }
        }
    }

    #[test]
    fn density_bundle_properties() {
        let (space, ms) = two_mode(2.0);
        let rho = coherent(&space);
        let a = Analysis::new(ConventionTag::Derivation13, &rho, &space, &ms, &fixed()).unwrap();
        for p in samples() {
            let b = a.density_bundle(&p, box_center(&ms));
            assert!(b.w >= 0.0);
            assert!(b.asymmetry < 1e-12 && b.imaginary_residual < 1e-12);
            let c2 = ms.c() * ms.c();
            let t: f64 = (0..3).map(|k| b.flow[k].powi(2)).sum::<f64>().sqrt();
            let d: f64 = (0..3).map(|k| (b.flow[k] - c2 * b.momentum[k]).powi(2)).sum::<f64>().sqrt();
            assert!(d <= 1e-12 * t, "{d} {t}");
        }
    }

    #[test]
    fn vacuum_everything_zero() {
        let (space, ms) = two_mode(1.0);
        let rho = make_state(&space, &StateSpec::Vacuum).unwrap();
        for conv in ConventionTag::ALL {
            let a = Analysis::new(conv, &rho, &space, &ms, &fixed()).unwrap();
            let r = a
                .continuity_residual(IdentityKind::Eq23, &samples(), box_center(&ms), 1e-10)
                .unwrap();
            assert_eq!(r.residual_norm, 0.0);
            let split = a.angular_split(box_center(&ms), 0.0).unwrap();
            assert_eq!(split.total, [0.0; 3]);
            assert_eq!(split.spin, [0.0; 3]);
            let b = a.density_bundle(&SpacetimePoint::ORIGIN, [0.0; 3]);
            assert_eq!(b.w, 0.0);
        }
    }

    #[test]
    fn integral_balances() {
        let (space, ms) = two_mode(1.0);
        let rho = coherent(&space);
        let a = Analysis::new(ConventionTag::Derivation13, &rho, &space, &ms, &fixed()).unwrap();
        let times: Vec<f64> = (0..9).map(|k| k as f64 * PI / 4.0).collect();
        let tol = Tolerances::default();
        for kind in [IdentityKind::Eq24, IdentityKind::Eq28] {
            let full = a.integral_balance(kind, Volume::FullBox, &times, 0.1, &tol).unwrap();
            assert_eq!(full.verdict, Verdict::Pass, "{kind} full {}", full.relative);
            let half = a.integral_balance(kind, Volume::HalfBox, &times[..3], 0.2, &tol).unwrap();
            assert_eq!(half.verdict, Verdict::Pass, "{kind} half {:?}", half.details);
            assert!(half.detail_value("fd_order").is_some());
        }
        assert!(matches!(
            a.integral_balance(IdentityKind::Eq24, Volume::FullBox, &times[..2], 0.1, &tol),
            Err(LabError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn potential_and_angular_closure() {
        let (space, ms) = two_mode(1.0);
        let rho = coherent(&space);
        let a = Analysis::new(ConventionTag::Derivation13, &rho, &space, &ms, &fixed()).unwrap();
        let p = a.potential_residual(1e-13).unwrap();
        assert_eq!(p.verdict, Verdict::Pass, "{:?}", p.details);
        let split = a.angular_split(box_center(&ms), 0.3).unwrap();
        assert!(split.closure_relative() < 1e-10, "{split:?}");
    }
}
