//! Brute-force cross-checks that avoid the plane-wave correlator machinery:
//! dense traces of explicit operator products, finite differences, grid
//! quadrature and convergence-order fits.

use serde::{Deserialize, Serialize};

use crate::correlators::{ConventionTag, SlotPattern};
use crate::error::{LabError, Result};
use crate::linalg::{CMatrix, SparseOp};
use crate::mode_basis::{mode_function, Axis, FieldKind, ModeSet, Sign, SpacetimePoint};
use crate::quantum_state::{ladder, DensityOperator, FockSpace};
use crate::tensor::{levi_civita, CTensor, C64, ONE, ZERO};

/// Residuals at or below this are treated as rounding floor by the order fit.
pub const FLOOR: f64 = 1e-14;

/// Sparse `(a, a^dag)` for every mode.
fn sparse_ladders(space: &FockSpace, ms: &ModeSet) -> Result<Vec<(SparseOp, SparseOp)>> {
    (0..ms.len())
        .map(|i| {
            let (a, adag) = ladder(space, i)?;
            Ok((SparseOp::from_dense(&a), SparseOp::from_dense(&adag)))
        })
        .collect()
}

/// Cartesian components of one field operator at `p`.
fn slot_operators(
    ladders: &[(SparseOp, SparseOp)],
    ms: &ModeSet,
    field: FieldKind,
    sign: Sign,
    p: &SpacetimePoint,
) -> [SparseOp; 3] {
    let dim = ladders[0].0.dim();
    let mut comps: [Vec<(usize, usize, C64)>; 3] = Default::default();
    for (mode, (a, adag)) in ms.modes().iter().zip(ladders) {
        let op = if sign == Sign::Plus { a } else { adag };
        let f = mode_function(mode, field, sign, p);
        for (comp, coeff) in comps.iter_mut().zip(f) {
            if coeff != ZERO {
                comp.extend(op.entries().iter().map(|&(r, c, v)| (r, c, v * coeff)));
            }
        }
    }
    comps.map(|e| SparseOp::from_entries(dim, e))
}

fn check_inputs(rho: &DensityOperator, space: &FockSpace, ms: &ModeSet) -> Result<()> {
    if rho.dim() != space.dim() {
        return Err(LabError::DimensionMismatch {
            expected: space.dim(),
            found: rho.dim(),
        });
    }
    if space.mode_count() != ms.len() {
        return Err(LabError::ModeCountMismatch {
            space: space.mode_count(),
            modes: ms.len(),
        });
    }
    Ok(())
}

/// `Tr(rho O_1[i_1] O_2[i_2] ... O_R[i_R])` by explicit products in slot order.
pub fn dense_correlator(
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    pattern: &SlotPattern,
    points: &[SpacetimePoint],
) -> Result<CTensor> {
    check_inputs(rho, space, ms)?;
    if points.len() != pattern.rank() {
        return Err(LabError::DimensionMismatch {
            expected: pattern.rank(),
            found: points.len(),
        });
    }
    let ladders = sparse_ladders(space, ms)?;
    let ops: Vec<[SparseOp; 3]> = pattern
        .slots()
        .iter()
        .zip(points)
        .map(|(s, p)| slot_operators(&ladders, ms, s.field, s.sign, p))
        .collect();
    // Tr(rho O_1 .. O_m O_m+1 .. O_R) = Tr(L R) with dense L = rho O_1 .. O_m
    // and sparse R = O_m+1 .. O_R.
    let split = ops.len().div_ceil(2);
    let (head, tail) = ops.split_at(split);
    let mut left = vec![rho.matrix().clone()];
    for slot in head {
        left = left
            .iter()
            .flat_map(|m| slot.iter().map(move |o| o.right_mul(m)))
            .collect();
    }
    let (last, middle) = tail.split_last().expect("rank >= 2");
    let mut right: Vec<CMatrix> = last.iter().map(SparseOp::to_dense).collect();
    for slot in middle.iter().rev() {
        right = slot
            .iter()
            .flat_map(|o| right.iter().map(move |m| o.left_mul(m)))
            .collect();
    }
    let right: Vec<SparseOp> = right.iter().map(SparseOp::from_dense).collect();
    let values = left
        .iter()
        .flat_map(|m| right.iter().map(move |o| o.trace_with(m)))
        .collect();
    Ok(CTensor::from_vec(pattern.rank(), values))
}

/// The four named tensors `E, H, M, N` at one slot-1 point from dense traces.
pub fn dense_named(
    convention: ConventionTag,
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    p1: &SpacetimePoint,
    fixed_points: &[SpacetimePoint],
) -> Result<[CTensor; 4]> {
    let mut points = vec![*p1];
    points.extend_from_slice(fixed_points);
    let [pe, ph, pm, pn] = convention.patterns();
    let get = |p: &SlotPattern| dense_correlator(rho, space, ms, p, &points);
    Ok([get(&pe)?, get(&ph)?, get(&pm)?, get(&pn)?])
}

/// `Ebb` and `Sbb` at one slot-1 point from dense traces.
pub fn dense_combined(
    convention: ConventionTag,
    rho: &DensityOperator,
    space: &FockSpace,
    ms: &ModeSet,
    p1: &SpacetimePoint,
    fixed_points: &[SpacetimePoint],
) -> Result<(CTensor, CTensor)> {
    let [e, h, m, n] = dense_named(convention, rho, space, ms, p1, fixed_points)?;
    Ok((e.add(&h), m.sub(&n)))
}

/// Energy density and flow vector from combined tensors at one point.
pub fn energy_and_flow(ebb: &CTensor, sbb: &CTensor, c: f64) -> (f64, [f64; 3]) {
    let n = ebb.passive_len();
    let w = ebb.as_slice().iter().chain(sbb.as_slice()).map(|z| z.norm_sqr()).sum();
    let mut flow = [0.0; 3];
    for (k, f) in flow.iter_mut().enumerate() {
        for l in 0..3 {
            for j in 0..3 {
                let e = levi_civita(k, l, j);
                if e == 0.0 {
                    continue;
                }
                let (sl, ej) = (sbb.first_slice(l), ebb.first_slice(j));
                let x: f64 = (0..n).map(|i| 2.0 * (sl[i] * ej[i].conj()).re).sum();
                *f += c * e * x;
            }
        }
    }
    (w, flow)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    pub order: u8,
    pub h: f64,
    pub richardson: bool,
}

impl FdScheme {
    pub fn new(order: u8, h: f64) -> Result<Self> {
        if order != 2 && order != 4 {
            return Err(LabError::InvalidArgument(format!("fd order {order} not in {{2, 4}}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(LabError::InvalidArgument("fd step must be positive".into()));
        }
        Ok(Self {
            order,
            h,
            richardson: false,
        })
    }

    pub fn with_richardson(mut self) -> Self {
        self.richardson = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdResult {
    pub value: CTensor,
    pub error_estimate: Option<f64>,
    /// Step exceeds one twentieth of the supplied shortest wavelength.
    pub h_too_large: bool,
}

fn central(f: &dyn Fn(&SpacetimePoint) -> CTensor, p: &SpacetimePoint, axis: Axis, order: u8, h: f64) -> CTensor {
    let at = |s: f64| f(&p.shifted(axis, s * h));
    let inv = C64::new(1.0 / h, 0.0);
    match order {
        2 => at(1.0).sub(&at(-1.0)).scale(inv * 0.5),
        _ => {
            let mut v = at(1.0).sub(&at(-1.0)).scale(C64::new(8.0, 0.0));
            v.add_scaled(&at(2.0).sub(&at(-2.0)), -ONE);
            v.scale(inv / 12.0)
        }
    }
}

/// Central-difference derivative of a tensor-valued function of spacetime.
pub fn fd_derivative(
    f: &dyn Fn(&SpacetimePoint) -> CTensor,
    p: &SpacetimePoint,
    axis: Axis,
    scheme: &FdScheme,
    shortest_wavelength: Option<f64>,
) -> FdResult {
    let h_too_large = shortest_wavelength.is_some_and(|l| scheme.h > l / 20.0);
    let coarse = central(f, p, axis, scheme.order, scheme.h);
    if !scheme.richardson {
        return FdResult {
            value: coarse,
            error_estimate: None,
            h_too_large,
        };
    }
    let fine = central(f, p, axis, scheme.order, scheme.h / 2.0);
    let k = 2f64.powi(scheme.order as i32);
    let diff = fine.sub(&coarse);
    let mut value = fine.clone();
    value.add_scaled(&diff, C64::new(1.0 / (k - 1.0), 0.0));
    FdResult {
        value,
        error_estimate: Some(diff.norm() / (k - 1.0)),
        h_too_large,
    }
}

/// Rectangle rule on the `n_g^3` grid `x = L (i, j, k) / n_g` over the periodic box.
pub fn grid_integral(f: &dyn Fn(&[f64; 3]) -> C64, box_length: f64, n_g: usize) -> Result<C64> {
    if n_g < 2 {
        return Err(LabError::InvalidArgument(format!("grid needs n_g >= 2, got {n_g}")));
    }
    let h = box_length / n_g as f64;
    let mut acc = ZERO;
    for i in 0..n_g {
        for j in 0..n_g {
            for k in 0..n_g {
                acc += f(&[i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    Ok(acc * h.powi(3))
}

/// Smallest grid that integrates products of four modes exactly.
pub fn nyquist_grid(ms: &ModeSet) -> usize {
    4 * ms.max_lattice_component() as usize + 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceFit {
    Order(f64),
    FloorReached,
}

/// Least-squares slope of `log(residual)` against `log(h)`.
pub fn convergence_order(samples: &[(f64, f64)]) -> Result<ConvergenceFit> {
    if samples.len() < 3 {
        return Err(LabError::TooFewSamples {
            need: 3,
            got: samples.len(),
        });
    }
    if samples.windows(2).any(|w| !(w[1].0 < w[0].0)) || samples.iter().any(|s| !(s.0 > 0.0)) {
        return Err(LabError::InvalidArgument("steps must be positive and strictly decreasing".into()));
    }
    if samples.iter().any(|&(_, r)| r <= FLOOR) {
        return Ok(ConvergenceFit::FloorReached);
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(h, r)| (h.ln(), r.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(ConvergenceFit::Order(sxy / sxx))
}

/// Dense-trace evaluator of the four named tensors with slots 2..R frozen at
/// the fixed points: `Tr(O_1[i] K[j..])` with `K = O_2 .. O_R rho` formed once.
pub struct FrozenNamed<'a> {
    ms: &'a ModeSet,
    ladders: Vec<(SparseOp, SparseOp)>,
    patterns: [SlotPattern; 4],
    tails: [Vec<CMatrix>; 4],
}

impl<'a> FrozenNamed<'a> {
    pub fn new(
        convention: ConventionTag,
        rho: &DensityOperator,
        space: &FockSpace,
        ms: &'a ModeSet,
        fixed_points: &[SpacetimePoint],
    ) -> Result<Self> {
        check_inputs(rho, space, ms)?;
        let ladders = sparse_ladders(space, ms)?;
        let patterns = convention.patterns();
        let mut tails: [Vec<CMatrix>; 4] = Default::default();
        for (pattern, tail) in patterns.iter().zip(tails.iter_mut()) {
            if fixed_points.len() + 1 != pattern.rank() {
                return Err(LabError::DimensionMismatch {
                    expected: pattern.rank() - 1,
                    found: fixed_points.len(),
                });
            }
            let mut k = vec![rho.matrix().clone()];
            for (slot, p) in pattern.slots()[1..].iter().zip(fixed_points).rev() {
                let ops = slot_operators(&ladders, ms, slot.field, slot.sign, p);
                k = ops.iter().flat_map(|o| k.iter().map(move |m| o.left_mul(m))).collect();
            }
            *tail = k;
        }
        Ok(Self {
            ms,
            ladders,
            patterns,
            tails,
        })
    }

    pub fn named(&self, p1: &SpacetimePoint) -> [CTensor; 4] {
        std::array::from_fn(|n| {
            let slot = self.patterns[n].slots()[0];
            let ops = slot_operators(&self.ladders, self.ms, slot.field, slot.sign, p1);
            let values = ops
                .iter()
                .flat_map(|o| self.tails[n].iter().map(move |k| o.trace_with(k)))
                .collect();
            CTensor::from_vec(self.patterns[n].rank(), values)
        })
    }

    /// `Ebb = E + H` and `Sbb = M - N`.
    pub fn combined(&self, p1: &SpacetimePoint) -> (CTensor, CTensor) {
        let [e, h, m, n] = self.named(p1);
        (e.add(&h), m.sub(&n))
    }
}

/// Finite-difference energy-continuity residual `|dt W + div T|` from dense
/// traces, with the scale `omega_max ((|E|+|H|)^2 + (|M|+|N|)^2)` at `p1`.
pub fn fd_energy_residual(frozen: &FrozenNamed<'_>, p1: &SpacetimePoint, h: f64) -> (f64, f64) {
    let ms = frozen.ms;
    let c = ms.c();
    let eval = |p: &SpacetimePoint| {
        let (e, s) = frozen.combined(p);
        energy_and_flow(&e, &s, c)
    };
    let (wp, _) = eval(&p1.shifted(Axis::T, h));
    let (wm, _) = eval(&p1.shifted(Axis::T, -h));
    let dt = (wp - wm) / (2.0 * h);
    let mut div = 0.0;
    for k in 0..3 {
        let (_, tp) = eval(&p1.shifted(Axis::spatial(k), h));
        let (_, tm) = eval(&p1.shifted(Axis::spatial(k), -h));
        div += (tp[k] - tm[k]) / (2.0 * h);
    }
    let [e, hh, m, n] = frozen.named(p1);
    let omega_max = ms.modes().iter().map(|m| m.omega).fold(0.0, f64::max);
    let scale = omega_max * ((e.norm() + hh.norm()).powi(2) + (m.norm() + n.norm()).powi(2));
    ((dt + div).abs(), scale)
}
