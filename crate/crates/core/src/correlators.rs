//! Correlation tensors as explicit plane-wave sums in their first-slot coordinates.
//!
//! The first slot of every correlator is a single-mode-sum field operator, so
//! with slots 2..rank held at fixed points the correlator is
//! `sum_terms C * exp(i(q.r - nu t))` in the slot-1 point `(r, t)`. Each term
//! comes from one lattice vector; its coefficient tensor is the slot-1 mode
//! prefactor times a trace of `rho` against the slot-1 ladder operator and
//! the fixed-slot operators. All slot-1 derivatives and the inverse curl act
//! termwise and are exact.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field_ops::field_operator;
use crate::linalg::{CMatrix, SparseOp};
use crate::mode_basis::{mode_function, Axis, CVec3, FieldKind, ModeSet, Sign, SpacetimePoint};
use crate::quantum_state::{ladder, DensityOperator, FockSpace};
use crate::tensor::{CTensor, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub field: FieldKind,
    pub sign: Sign,
}

impl Slot {
    pub const fn new(field: FieldKind, sign: Sign) -> Self {
        Self { field, sign }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.field, self.sign.symbol())
    }
}

/// Ordered operator slots of a correlator; every `-` slot precedes every `+` slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlotPattern {
    slots: Vec<Slot>,
}

impl SlotPattern {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(LabError::InvalidArgument("slot pattern is empty".into()));
        }
        if let Some(first_plus) = slots.iter().position(|s| s.sign == Sign::Plus) {
            if slots[first_plus..].iter().any(|s| s.sign == Sign::Minus) {
                return Err(LabError::NormalOrderingViolated);
            }
        }
        if slots.len() != 2 && slots.len() != 4 {
            return Err(LabError::UnsupportedRank(slots.len()));
        }
        Ok(Self { slots })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn minus_count(&self) -> usize {
        self.slots.iter().filter(|s| s.sign == Sign::Minus).count()
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.minus_count() == self.rank()
    }

    /// Same pattern with the first slot's field replaced.
    pub fn with_first_field(&self, field: FieldKind) -> SlotPattern {
        let mut slots = self.slots.clone();
        slots[0].field = field;
        SlotPattern { slots }
    }
}

impl fmt::Display for SlotPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.slots {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for SlotPattern {
    type Err = LabError;

    /// Parses patterns such as `E-E-B+B+`.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.len() % 2 != 0 {
            return Err(LabError::InvalidArgument(format!("bad slot pattern {s:?}")));
        }
        let slots = chars
            .chunks(2)
            .map(|pair| {
                let field = match pair[0] {
                    'E' => FieldKind::E,
                    'B' => FieldKind::B,
                    'A' => FieldKind::A,
                    other => {
                        return Err(LabError::InvalidArgument(format!("bad field {other:?}")))
                    }
                };
                let sign = match pair[1] {
                    '+' => Sign::Plus,
                    '-' => Sign::Minus,
                    other => {
                        return Err(LabError::InvalidArgument(format!("bad sign {other:?}")))
                    }
                };
                Ok(Slot::new(field, sign))
            })
            .collect::<Result<Vec<_>>>()?;
        SlotPattern::new(slots)
    }
}

/// Which sign pattern the second-order tensor family uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConventionTag {
    /// Two creation and two annihilation slots, `(-,-,+,+)`.
    #[serde(rename = "printed_22")]
    Printed22,
    /// One creation and three annihilation slots, `(-,+,+,+)`.
    #[serde(rename = "derivation_13")]
    Derivation13,
}

impl ConventionTag {
    pub const ALL: [ConventionTag; 2] = [ConventionTag::Printed22, ConventionTag::Derivation13];

    pub fn name(self) -> &'static str {
        match self {
            ConventionTag::Printed22 => "printed_22",
            ConventionTag::Derivation13 => "derivation_13",
        }
    }

    /// Slot patterns of the E, H, M, N tensors.
    pub fn patterns(self) -> [SlotPattern; 4] {
        let p = |s: &str| s.parse::<SlotPattern>().expect("static pattern");
        match self {
            ConventionTag::Printed22 => [p("E-E-E+E+"), p("B-B-B+B+"), p("E-E-B+B+"), p("B-B-E+E+")],
            ConventionTag::Derivation13 => {
                [p("E-E+E+E+"), p("B-B+B+B+"), p("E-B+B+B+"), p("B-E+E+E+")]
            }
        }
    }
}

impl fmt::Display for ConventionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveTerm {
    pub lattice: [i32; 3],
    pub q: Vector3<f64>,
    pub nu: f64,
    pub coeff: CTensor,
}

impl WaveTerm {
    pub fn phase(&self, p: &SpacetimePoint) -> C64 {
        let arg = self.q.x * p.r[0] + self.q.y * p.r[1] + self.q.z * p.r[2] - self.nu * p.t;
        C64::from_polar(1.0, arg)
    }

    pub fn derivative_factor(&self, axis: Axis) -> C64 {
        match axis.index() {
            Some(i) => I * self.q[i],
            None => -I * self.nu,
        }
    }

    fn key(&self) -> TermKey {
        (self.lattice, self.nu.partial_cmp(&0.0).map_or(0, |o| o as i8))
    }
}

type TermKey = ([i32; 3], i8);

/// A correlator as a function of its slot-1 spacetime point.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorField {
    label: String,
    rank: usize,
    terms: Vec<WaveTerm>,
}

impl CorrelatorField {
    pub fn new(label: impl Into<String>, rank: usize, terms: Vec<WaveTerm>) -> Self {
        let mut merged: BTreeMap<TermKey, WaveTerm> = BTreeMap::new();
        for t in terms {
            assert_eq!(t.coeff.rank(), rank, "term rank");
            match merged.get_mut(&t.key()) {
                Some(existing) => existing.coeff.add_scaled(&t.coeff, ONE),
                None => {
                    merged.insert(t.key(), t);
                }
            }
        }
        Self {
            label: label.into(),
            rank,
            terms: merged.into_values().collect(),
        }
    }

    pub fn zero(label: impl Into<String>, rank: usize) -> Self {
        Self {
            label: label.into(),
            rank,
            terms: Vec::new(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &[WaveTerm] {
        &self.terms
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn evaluate(&self, p: &SpacetimePoint) -> CTensor {
        let mut out = CTensor::zeros(self.rank);
        for t in &self.terms {
            out.add_scaled(&t.coeff, t.phase(p));
        }
        out
    }

    /// Largest coefficient norm over terms.
    pub fn coefficient_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.coeff.as_slice().iter().all(|z| *z == ZERO))
    }

    fn map_terms(&self, label: String, f: impl Fn(&WaveTerm) -> CTensor) -> CorrelatorField {
        let terms = self
            .terms
            .iter()
            .map(|t| WaveTerm {
                lattice: t.lattice,
                q: t.q,
                nu: t.nu,
                coeff: f(t),
            })
            .collect::<Vec<_>>();
        let rank = terms.first().map_or(self.rank, |t| t.coeff.rank());
        CorrelatorField {
            label,
            rank,
            terms,
        }
    }

    pub fn scaled(&self, s: C64) -> CorrelatorField {
        self.map_terms(self.label.clone(), |t| t.coeff.scale(s))
    }

    /// `self + s * other`, terms merged by wavevector.
    pub fn combine(&self, other: &CorrelatorField, s: C64, label: impl Into<String>) -> CorrelatorField {
        assert_eq!(self.rank, other.rank, "rank mismatch");
        let terms = self
            .terms
            .iter()
            .cloned()
            .chain(other.terms.iter().map(|t| WaveTerm {
                coeff: t.coeff.scale(s),
                ..t.clone()
            }))
            .collect();
        CorrelatorField::new(label, self.rank, terms)
    }

    /// Largest `|q . C|` over terms, contracting the first index.
    pub fn max_divergence(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| first_index_contract(&t.coeff, &[t.q.x, t.q.y, t.q.z]).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|q| |C|` over terms.
    pub fn max_gradient_scale(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.q.norm() * t.coeff.norm())
            .fold(0.0, f64::max)
    }

    /// Maximum over terms of `|q . C| / (|q| |C|)` on the first index; zero
    /// for vanishing coefficients.
    pub fn transversality_residual(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let qn = t.q.norm();
                let cn = t.coeff.norm();
                if cn == 0.0 || qn == 0.0 {
                    return 0.0;
                }
                let dot = first_index_contract(&t.coeff, &[t.q.x, t.q.y, t.q.z]);
                dot.norm() / (qn * cn)
            })
            .fold(0.0, f64::max)
    }
}

/// `sum_j v_j C[j, ..]` as a tensor of one lower rank.
fn first_index_contract(c: &CTensor, v: &[f64; 3]) -> CTensor {
    let n = c.passive_len();
    let mut out = vec![ZERO; n];
    for (j, vj) in v.iter().enumerate() {
        for (o, x) in out.iter_mut().zip(c.first_slice(j)) {
            *o += x * *vj;
        }
    }
    CTensor::from_vec(c.rank() - 1, out)
}

/// `(q x f)` on the first index, `f` given by per-index slices.
fn first_index_cross(q: &Vector3<f64>, c: &CTensor, scale: C64) -> CTensor {
    let n = c.passive_len();
    let mut out = CTensor::zeros(c.rank());
    for i in 0..3 {
        let (k, l) = ((i + 1) % 3, (i + 2) % 3);
        let (fk, fl) = (c.first_slice(k), c.first_slice(l));
        let dst = out.first_slice_mut(i);
        for idx in 0..n {
            dst[idx] = (fl[idx] * q[k] - fk[idx] * q[l]) * scale;
        }
    }
    out
}

/// Termwise exact slot-1 derivative.
pub fn slot1_derivative(cf: &CorrelatorField, axis: Axis) -> CorrelatorField {
    let label = format!("d{:?}({})", axis, cf.label);
    cf.map_terms(label, |t| t.coeff.scale(t.derivative_factor(axis)))
}

/// Termwise slot-1 curl on the first index: `eps_jkl d_k F_l`.
pub fn slot1_curl(cf: &CorrelatorField) -> CorrelatorField {
    cf.map_terms(format!("curl({})", cf.label), |t| first_index_cross(&t.q, &t.coeff, I))
}

/// Termwise slot-1 divergence on the first index; the result has rank one lower.
pub fn slot1_divergence(cf: &CorrelatorField) -> CorrelatorField {
    let mut out = cf.map_terms(format!("div({})", cf.label), |t| {
        first_index_contract(&t.coeff, &[t.q.x, t.q.y, t.q.z]).scale(I)
    });
    out.rank = cf.rank.saturating_sub(1);
    out
}

/// Divergence-free tensor potential whose slot-1 curl reproduces `cf`.
pub fn slot1_inverse_curl(cf: &CorrelatorField) -> Result<CorrelatorField> {
    slot1_inverse_curl_with_reference(cf, 0.0)
}

/// As [`slot1_inverse_curl`], measuring transversality against
/// `max(|C|, reference)` so that fields built from nearly cancelling parts
/// are judged on the scale of those parts.
pub fn slot1_inverse_curl_with_reference(
    cf: &CorrelatorField,
    reference: f64,
) -> Result<CorrelatorField> {
    for (idx, t) in cf.terms.iter().enumerate() {
        if t.lattice == [0, 0, 0] {
            return Err(LabError::ZeroWavevectorTerm(idx));
        }
        let qn = t.q.norm();
        let cn = t.coeff.norm().max(reference);
        if cn > 0.0 {
            let ratio = first_index_contract(&t.coeff, &[t.q.x, t.q.y, t.q.z]).norm() / (qn * cn);
            if ratio > 1e-12 {
                return Err(LabError::NotTransverse { term: idx, ratio });
            }
        }
    }
    Ok(cf.map_terms(format!("curl^-1({})", cf.label), |t| {
        first_index_cross(&t.q, &t.coeff, I / t.q.norm_squared())
    }))
}

fn check_inputs(
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    pattern: &SlotPattern,
    fixed_points: &[SpacetimePoint],
) -> Result<()> {
    if space.mode_count() != ms.len() {
        return Err(LabError::ModeCountMismatch {
            space: space.mode_count(),
            modes: ms.len(),
        });
    }
    if rho.dim() != space.dim() {
        return Err(LabError::DimensionMismatch {
            expected: space.dim(),
            found: rho.dim(),
        });
    }
    if fixed_points.len() + 1 != pattern.rank() {
        return Err(LabError::InvalidArgument(format!(
            "pattern {pattern} needs {} fixed points, got {}",
            pattern.rank() - 1,
            fixed_points.len()
        )));
    }
    if fixed_points.iter().any(|p| !p.is_finite()) {
        return Err(LabError::InvalidArgument("non-finite fixed point".into()));
    }
    Ok(())
}

/// Traces `Tr(start * O_2[i_2] * ... * O_R[i_R])` for all component choices,
/// earliest slot slowest.
fn trace_chain(start: CMatrix, ops: &[[SparseOp; 3]]) -> Vec<C64> {
    let (last, middle) = ops.split_last().expect("at least one fixed slot");
    let mut partial = vec![start];
    for op in middle {
        partial = partial
            .iter()
            .flat_map(|m| op.iter().map(move |o| o.right_mul(m)))
            .collect();
    }
    partial
        .iter()
        .flat_map(|m| last.iter().map(move |o| o.trace_with(m)))
        .collect()
}

/// Slot-1 plane-wave representation of `Tr(rho F_1(r) F_2(p_2) ... F_R(p_R))`.
pub fn correlator_field(
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    pattern: &SlotPattern,
    fixed_points: &[SpacetimePoint],
) -> Result<CorrelatorField> {
    check_inputs(rho, space, ms, pattern, fixed_points)?;
    let fixed_ops = pattern.slots()[1..]
        .iter()
        .zip(fixed_points)
        .map(|(slot, p)| Ok(field_operator(space, ms, slot.field, slot.sign, p)?.sparse()))
        .collect::<Result<Vec<_>>>()?;
    let first = pattern.slots()[0];
    let mut terms = Vec::with_capacity(ms.len());
    for (index, mode) in ms.modes().iter().enumerate() {
        let (a, adag) = ladder(space, index)?;
        let op = SparseOp::from_dense(match first.sign {
            Sign::Plus => &a,
            Sign::Minus => &adag,
        });
        let values = trace_chain(op.right_mul(rho.matrix()), &fixed_ops);
        let g = mode.prefactor(first.field, first.sign);
        let n = values.len();
        let mut coeff = CTensor::zeros(pattern.rank());
        for (j, gj) in g.iter().enumerate() {
            let dst = coeff.first_slice_mut(j);
            for k in 0..n {
                dst[k] = gj * values[k];
            }
        }
        let (q, nu) = mode.wave(first.sign);
        terms.push(WaveTerm {
            lattice: mode.lattice(first.sign),
            q,
            nu,
            coeff,
        });
    }
    Ok(CorrelatorField::new(pattern.to_string(), pattern.rank(), terms))
}

/// The four named second-order tensors of one convention.
#[derive(Debug, Clone)]
pub struct NamedTensors {
    pub convention: ConventionTag,
    pub e: CorrelatorField,
    pub h: CorrelatorField,
    pub m: CorrelatorField,
    pub n: CorrelatorField,
}

impl NamedTensors {
    pub fn all(&self) -> [&CorrelatorField; 4] {
        [&self.e, &self.h, &self.m, &self.n]
    }
}

pub fn named_tensors(
    convention: ConventionTag,
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    fixed_points: &[SpacetimePoint],
) -> Result<NamedTensors> {
    let [pe, ph, pm, pn] = convention.patterns();
    let build = |p: &SlotPattern| correlator_field(rho, space, ms, p, fixed_points);
    Ok(NamedTensors {
        convention,
        e: build(&pe)?.with_label("E"),
        h: build(&ph)?.with_label("H"),
        m: build(&pm)?.with_label("M"),
        n: build(&pn)?.with_label("N"),
    })
}

/// Energy coherence tensor `E + H` and energy-flow coherence tensor `M - N`.
#[derive(Debug, Clone)]
pub struct CombinedTensors {
    pub ebb: CorrelatorField,
    pub sbb: CorrelatorField,
}

pub fn combine_named(named: &NamedTensors) -> CombinedTensors {
    CombinedTensors {
        ebb: named.e.combine(&named.h, ONE, "Ebb"),
        sbb: named.m.combine(&named.n, -ONE, "Sbb"),
    }
}

pub fn combined_es(
    convention: ConventionTag,
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    fixed_points: &[SpacetimePoint],
) -> Result<CombinedTensors> {
    Ok(combine_named(&named_tensors(convention, rho, space, ms, fixed_points)?))
}

/// First-order energy and energy-flow tensors
/// `E_jk = <E_j- E_k+> + <B_j- B_k+>` and `S_jk = <E_j- B_k+> - <B_j- E_k+>`.
#[derive(Debug, Clone)]
pub struct FirstOrderTensors {
    pub e_jk: CorrelatorField,
    pub s_jk: CorrelatorField,
}

pub fn first_order_tensors(
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    fixed_point: &SpacetimePoint,
) -> Result<FirstOrderTensors> {
    let build = |s: &str| {
        let pattern: SlotPattern = s.parse()?;
        correlator_field(rho, space, ms, &pattern, std::slice::from_ref(fixed_point))
    };
    let (ee, bb, eb, be) = (build("E-E+")?, build("B-B+")?, build("E-B+")?, build("B-E+")?);
    Ok(FirstOrderTensors {
        e_jk: ee.combine(&bb, ONE, "E_jk"),
        s_jk: eb.combine(&be, -ONE, "S_jk"),
    })
}

/// Classical analytic-signal vector of one slot for a coherent product state.
fn classical_slot_vector(amplitudes: &[C64], ms: &ModeSet, slot: Slot, p: &SpacetimePoint) -> CVec3 {
    let mut v = [ZERO; 3];
    for (alpha, mode) in amplitudes.iter().zip(ms.modes()) {
        let f = mode_function(mode, slot.field, slot.sign, p);
        let a = match slot.sign {
            Sign::Plus => *alpha,
            Sign::Minus => alpha.conj(),
        };
        for i in 0..3 {
            v[i] += a * f[i];
        }
    }
    v
}

/// Coherent-state correlator from the eigenvalue property: the outer product
/// of the per-slot classical field vectors.
pub fn coherent_factorized(
    amplitudes: &[C64],
    ms: &ModeSet,
    pattern: &SlotPattern,
    points: &[SpacetimePoint],
) -> Result<CTensor> {
    if amplitudes.len() != ms.len() {
        return Err(LabError::ModeCountMismatch {
            space: amplitudes.len(),
            modes: ms.len(),
        });
    }
    if points.len() != pattern.rank() {
        return Err(LabError::InvalidArgument(format!(
            "pattern {pattern} needs {} points",
            pattern.rank()
        )));
    }
    let vectors: Vec<CVec3> = pattern
        .slots()
        .iter()
        .zip(points)
        .map(|(&slot, p)| classical_slot_vector(amplitudes, ms, slot, p))
        .collect();
    Ok(CTensor::outer(&vectors))
}

/// Gaussian moment theorem for zero-mean phase-insensitive states: a sum over
/// all pairings of `-` slots with `+` slots of products of first-order
/// correlators built from the normal-ordered mode covariance
/// `cov[m][n] = <a_m^dag a_n>`. Unbalanced patterns return an exact zero.
pub fn wick_gaussian(
    cov: &CMatrix,
    ms: &ModeSet,
    pattern: &SlotPattern,
    points: &[SpacetimePoint],
) -> Result<CTensor> {
    if cov.nrows() != ms.len() || cov.ncols() != ms.len() {
        return Err(LabError::DimensionMismatch {
            expected: ms.len(),
            found: cov.nrows(),
        });
    }
    if points.len() != pattern.rank() {
        return Err(LabError::InvalidArgument(format!(
            "pattern {pattern} needs {} points",
            pattern.rank()
        )));
    }
    let rank = pattern.rank();
    let mut out = CTensor::zeros(rank);
    if !pattern.is_balanced() {
        return Ok(out);
    }
    let slots = pattern.slots();
    let minus: Vec<usize> = (0..rank).filter(|&s| slots[s].sign == Sign::Minus).collect();
    let plus: Vec<usize> = (0..rank).filter(|&s| slots[s].sign == Sign::Plus).collect();
    let fns: Vec<Vec<CVec3>> = slots
        .iter()
        .zip(points)
        .map(|(slot, p)| {
            ms.modes()
                .iter()
                .map(|m| mode_function(m, slot.field, slot.sign, p))
                .collect()
        })
        .collect();
    // pair[a][b][j][k] = sum_mn f^-_{a,m,j} f^+_{b,n,k} cov[m,n]
    let pair = |a: usize, b: usize| -> [[C64; 3]; 3] {
        let mut g = [[ZERO; 3]; 3];
        for m in 0..ms.len() {
            for n in 0..ms.len() {
                let w = cov[(m, n)];
                if w == ZERO {
                    continue;
                }
                for j in 0..3 {
                    for k in 0..3 {
                        g[j][k] += fns[a][m][j] * fns[b][n][k] * w;
                    }
                }
            }
        }
        g
    };
    let pairs: Vec<Vec<[[C64; 3]; 3]>> = minus
        .iter()
        .map(|&a| plus.iter().map(|&b| pair(a, b)).collect())
        .collect();
    for perm in permutations(plus.len()) {
        for flat in 0..out.len() {
            let idx = crate::tensor::unflatten(flat, rank);
            let mut prod = ONE;
            for (ai, &a) in minus.iter().enumerate() {
                let bi = perm[ai];
                prod *= pairs[ai][bi][idx[a]][idx[plus[bi]]];
            }
            out.as_mut_slice()[flat] += prod;
        }
    }
    Ok(out)
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for rest in permutations(n - 1) {
            let mut p = vec![first];
            p.extend(rest.into_iter().map(|x| if x >= first { x + 1 } else { x }));
            out.push(p);
        }
    }
    out
}
