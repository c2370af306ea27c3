//! Field operators over a truncated Fock space.

use crate::error::{LabError, Result};
use crate::linalg::{CMatrix, SparseOp};
use crate::mode_basis::{mode_function, Axis, FieldKind, ModeSet, Sign};
pub use crate::mode_basis::SpacetimePoint;
use crate::quantum_state::{ladder, FockSpace};

/// The three Cartesian components of a field operator at one spacetime point.
#[derive(Debug, Clone)]
pub struct OperatorVector {
    pub components: [CMatrix; 3],
    pub field: FieldKind,
    pub sign: Sign,
    pub point: SpacetimePoint,
}

impl OperatorVector {
    pub fn adjoint(&self) -> OperatorVector {
        OperatorVector {
            components: [
                self.components[0].adjoint(),
                self.components[1].adjoint(),
                self.components[2].adjoint(),
            ],
            field: self.field,
            sign: match self.sign {
                Sign::Plus => Sign::Minus,
                Sign::Minus => Sign::Plus,
            },
            point: self.point,
        }
    }

    pub fn sparse(&self) -> [SparseOp; 3] {
        [
            SparseOp::from_dense(&self.components[0]),
            SparseOp::from_dense(&self.components[1]),
            SparseOp::from_dense(&self.components[2]),
        ]
    }

    /// Largest component Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }
}

fn check_counts(space: &FockSpace, ms: &ModeSet) -> Result<()> {
    if space.mode_count() != ms.len() {
        return Err(LabError::ModeCountMismatch {
            space: space.mode_count(),
            modes: ms.len(),
        });
    }
    Ok(())
}

fn assemble(
    space: &FockSpace,
    ms: &ModeSet,
    field: FieldKind,
    sign: Sign,
    p: &SpacetimePoint,
    axis: Option<Axis>,
) -> Result<OperatorVector> {
    check_counts(space, ms)?;
    let dim = space.dim();
    let mut comps = [
        CMatrix::zeros(dim, dim),
        CMatrix::zeros(dim, dim),
        CMatrix::zeros(dim, dim),
    ];
    for (index, mode) in ms.modes().iter().enumerate() {
        let (a, adag) = ladder(space, index)?;
        let op = match sign {
            Sign::Plus => a,
            Sign::Minus => adag,
        };
        let mut coeff = mode_function(mode, field, sign, p);
        if let Some(axis) = axis {
            let d = mode.derivative_factor(sign, axis);
            coeff.iter_mut().for_each(|c| *c *= d);
        }
        for (comp, c) in comps.iter_mut().zip(coeff) {
            *comp += &op * c;
        }
    }
    Ok(OperatorVector {
        components: comps,
        field,
        sign,
        point: *p,
    })
}

/// `sum_modes f_mode(p) a_mode` for `+`, `sum_modes f_mode(p) a_mode^dag` for `-`.
pub fn field_operator(
    space: &FockSpace,
    ms: &ModeSet,
    field: FieldKind,
    sign: Sign,
    p: &SpacetimePoint,
) -> Result<OperatorVector> {
    assemble(space, ms, field, sign, p, None)
}

/// Exact derivative of a field operator along one spacetime axis.
pub fn field_operator_derivative(
    space: &FockSpace,
    ms: &ModeSet,
    field: FieldKind,
    sign: Sign,
    p: &SpacetimePoint,
    axis: Axis,
) -> Result<OperatorVector> {
    assemble(space, ms, field, sign, p, Some(axis))
}

/// Relative residuals of the operator Maxwell system at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellResiduals {
    /// `curl E + (1/c) dt B`
    pub faraday: f64,
    /// `curl B - (1/c) dt E`
    pub ampere: f64,
    pub gauss_e: f64,
    pub gauss_b: f64,
}

impl MaxwellResiduals {
    pub fn max(&self) -> f64 {
        self.faraday
            .max(self.ampere)
            .max(self.gauss_e)
            .max(self.gauss_b)
    }
}

fn ratio(residual: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        if residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        residual / scale
    }
}

/// Evaluates the operator Maxwell identities for one sign. Each residual is
/// the component Frobenius norm of the left side divided by the largest
/// Frobenius norm among its individual terms.
pub fn maxwell_residuals(
    space: &FockSpace,
    ms: &ModeSet,
    sign: Sign,
    p: &SpacetimePoint,
) -> Result<MaxwellResiduals> {
    let c = ms.c();
    let grad = |field| -> Result<Vec<OperatorVector>> {
        Axis::SPATIAL
            .iter()
            .map(|&a| field_operator_derivative(space, ms, field, sign, p, a))
            .collect()
    };
    let de = grad(FieldKind::E)?;
    let db = grad(FieldKind::B)?;
    let dte = field_operator_derivative(space, ms, FieldKind::E, sign, p, Axis::T)?;
    let dtb = field_operator_derivative(space, ms, FieldKind::B, sign, p, Axis::T)?;

    let curl_check = |d: &[OperatorVector], dt: &OperatorVector, s: f64| {
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..3 {
            let (k, l) = ((j + 1) % 3, (j + 2) % 3);
            let term_a = &d[k].components[l];
            let term_b = &d[l].components[k];
            let term_t = &dt.components[j] * crate::tensor::C64::new(s / c, 0.0);
            let lhs = term_a - term_b + &term_t;
            residual = residual.max(lhs.norm());
            scale = scale.max(term_a.norm()).max(term_b.norm()).max(term_t.norm());
        }
        ratio(residual, scale)
    };
    let div_check = |d: &[OperatorVector]| {
        let lhs = &d[0].components[0] + &d[1].components[1] + &d[2].components[2];
        let scale = (0..3).map(|i| d[i].components[i].norm()).fold(0.0, f64::max);
        ratio(lhs.norm(), scale)
    };
    Ok(MaxwellResiduals {
        faraday: curl_check(&de, &dtb, 1.0),
        ampere: curl_check(&db, &dte, -1.0),
        gauss_e: div_check(&de),
        gauss_b: div_check(&db),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_basis::{build_mode_set, AmplitudeConvention, ModeEntry};
    use crate::quantum_state::{make_state, trace_expect, StateSpec};
    use crate::tensor::{C64, ZERO};
    use std::f64::consts::PI;

    fn axial() -> (FockSpace, ModeSet) {
        let ms = build_mode_set(
            2.0 * PI,
            &[ModeEntry { n: [0, 0, 1], pol: 1 }],
            1.0,
            AmplitudeConvention::Unit,
        )
        .unwrap();
        (FockSpace::new(&[10]).unwrap(), ms)
    }

    #[test]
    fn vacuum_expectation_vanishes() {
        let (space, ms) = axial();
        let rho = make_state(&space, &StateSpec::Vacuum).unwrap();
        let p = SpacetimePoint::new([0.3, 0.1, 0.7], 0.2);
        let op = field_operator(&space, &ms, FieldKind::E, Sign::Plus, &p).unwrap();
        for comp in &op.components {
            assert_eq!(trace_expect(&rho, comp).unwrap(), ZERO);
        }
    }

    #[test]
    fn coherent_analytic_signal() {
        let (space, ms) = axial();
        let rho = make_state(
            &space,
            &StateSpec::Coherent { amplitudes: vec![C64::new(0.5, 0.0)] },
        )
        .unwrap();
        let op = field_operator(&space, &ms, FieldKind::E, Sign::Plus, &SpacetimePoint::ORIGIN)
            .unwrap();
        let ex = trace_expect(&rho, &op.components[0]).unwrap();
        assert!((ex - C64::new(0.0, 0.5)).norm() < 1e-7);
    }

    #[test]
    fn plus_is_adjoint_of_minus() {
        let (space, ms) = axial();
        let p = SpacetimePoint::new([1.0, 2.0, 3.0], 0.5);
        for field in [FieldKind::E, FieldKind::B, FieldKind::A] {
            let plus = field_operator(&space, &ms, field, Sign::Plus, &p).unwrap();
            let minus = field_operator(&space, &ms, field, Sign::Minus, &p).unwrap();
            let adj = minus.adjoint();
            for i in 0..3 {
                assert!((&plus.components[i] - &adj.components[i]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn mode_count_mismatch() {
        let (_, ms) = axial();
        let space = FockSpace::new(&[2, 2]).unwrap();
        assert!(matches!(
            field_operator(&space, &ms, FieldKind::E, Sign::Plus, &SpacetimePoint::ORIGIN),
            Err(LabError::ModeCountMismatch { .. })
        ));
    }

    #[test]
    fn operator_maxwell_holds() {
        for c in [1.0, 2.0] {
            let ms = build_mode_set(
                3.0,
                &[ModeEntry { n: [1, -1, 2], pol: 1 }, ModeEntry { n: [0, 2, 1], pol: 2 }],
                c,
                AmplitudeConvention::Physical,
            )
            .unwrap();
            let space = FockSpace::new(&[3, 3]).unwrap();
            let p = SpacetimePoint::new([0.4, 1.3, 2.2], 0.9);
            for sign in [Sign::Plus, Sign::Minus] {
                let r = maxwell_residuals(&space, &ms, sign, &p).unwrap();
                assert!(r.max() < 1e-13, "{r:?}");
            }
        }
    }

    #[test]
    fn linear_in_modes() {
        let ms = build_mode_set(
            3.0,
            &[ModeEntry { n: [1, 0, 0], pol: 1 }, ModeEntry { n: [0, 1, 1], pol: 2 }],
            1.0,
            AmplitudeConvention::Unit,
        )
        .unwrap();
        // A singleton mode set acts on its own one-mode space; embed by
        // comparing the per-mode contribution assembled on the full space.
        let space = FockSpace::new(&[2, 2]).unwrap();
        let p = SpacetimePoint::new([0.1, 0.2, 0.3], 0.4);
        let full = field_operator(&space, &ms, FieldKind::B, Sign::Minus, &p).unwrap();
        let mut sum = [
            CMatrix::zeros(9, 9),
            CMatrix::zeros(9, 9),
            CMatrix::zeros(9, 9),
        ];
        for (idx, mode) in ms.modes().iter().enumerate() {
            let (_, adag) = ladder(&space, idx).unwrap();
            let f = mode_function(mode, FieldKind::B, Sign::Minus, &p);
            for i in 0..3 {
                sum[i] += &adag * f[i];
            }
        }
        for i in 0..3 {
            assert!((&full.components[i] - &sum[i]).norm() < 1e-13);
        }
    }
}
