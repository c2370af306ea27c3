//! Scalar plane-wave sums built from products of correlator fields, with exact
//! integration over axis-aligned sub-boxes of the periodic box.

use std::f64::consts::PI;

use crate::correlators::CorrelatorField;
use crate::mode_basis::{Axis, SpacetimePoint};
use crate::tensor::{C64, I, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub lattice: [i32; 3],
    pub q: [f64; 3],
    pub nu: f64,
    pub coeff: C64,
}

impl Wave {
    fn phase(&self, p: &SpacetimePoint) -> C64 {
        let arg = self.q[0] * p.r[0] + self.q[1] * p.r[1] + self.q[2] * p.r[2] - self.nu * p.t;
        C64::from_polar(1.0, arg)
    }
}

/// `sum_terms c * exp(i(q.r - nu t))` with integer lattice keys.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaveSum {
    pub terms: Vec<Wave>,
}

/// Axis-aligned region given in fractions of the box length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Region {
    pub const FULL: Region = Region {
        lo: [0.0; 3],
        hi: [1.0; 3],
    };

    /// Lower half of the box along z.
    pub const HALF_Z: Region = Region {
        lo: [0.0; 3],
        hi: [1.0, 1.0, 0.5],
    };
}

/// `exp(2 pi i n f)`, exact when `2 n f` is an integer.
fn lattice_phase(n: i32, frac: f64) -> C64 {
    let x = 2.0 * n as f64 * frac;
    if x.fract() == 0.0 {
        if (x as i64).rem_euclid(2) == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    } else {
        C64::from_polar(1.0, PI * x)
    }
}

/// `int_{aL}^{bL} x^power exp(2 pi i n x / L) dx` for power 0 or 1.
fn line_integral(n: i32, a: f64, b: f64, length: f64, power: u8) -> C64 {
    let (xa, xb) = (a * length, b * length);
    if n == 0 {
        return match power {
            0 => C64::new(xb - xa, 0.0),
            _ => C64::new(0.5 * (xb * xb - xa * xa), 0.0),
        };
    }
    let q = 2.0 * PI * n as f64 / length;
    let (ea, eb) = (lattice_phase(n, a), lattice_phase(n, b));
    let iq = I * q;
    match power {
        0 => (eb - ea) / iq,
        _ => {
            let prim = |x: f64, e: C64| e * (C64::new(x, 0.0) / iq + 1.0 / (q * q));
            prim(xb, eb) - prim(xa, ea)
        }
    }
}

impl WaveSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn evaluate(&self, p: &SpacetimePoint) -> C64 {
        self.terms.iter().fold(ZERO, |acc, w| acc + w.coeff * w.phase(p))
    }

    pub fn derivative(&self, axis: Axis) -> WaveSum {
        let terms = self
            .terms
            .iter()
            .map(|w| {
                let f = match axis.index() {
                    Some(i) => I * w.q[i],
                    None => -I * w.nu,
                };
                Wave {
                    coeff: w.coeff * f,
                    ..*w
                }
            })
            .collect();
        WaveSum { terms }
    }

    pub fn conj(&self) -> WaveSum {
        let terms = self
            .terms
            .iter()
            .map(|w| Wave {
                lattice: [-w.lattice[0], -w.lattice[1], -w.lattice[2]],
                q: [-w.q[0], -w.q[1], -w.q[2]],
                nu: -w.nu,
                coeff: w.coeff.conj(),
            })
            .collect();
        WaveSum { terms }
    }

    /// `self + conj(self)`, twice the real part.
    pub fn re2(&self) -> WaveSum {
        let mut out = self.clone();
        out.terms.extend(self.conj().terms);
        out
    }

    pub fn add_scaled(&mut self, other: &WaveSum, s: f64) {
        self.terms.extend(other.terms.iter().map(|w| Wave {
            coeff: w.coeff * s,
            ..*w
        }));
    }

    pub fn scaled(&self, s: f64) -> WaveSum {
        let mut out = WaveSum::zero();
        out.add_scaled(self, s);
        out
    }

    /// `sum_passive F[i, ..] * conj(G[j, ..])` as a function of slot-1 spacetime.
    pub fn bilinear(f: &CorrelatorField, i: usize, g: &CorrelatorField, j: usize) -> WaveSum {
        let mut terms = Vec::with_capacity(f.terms().len() * g.terms().len());
        for a in f.terms() {
            let fa = a.coeff.first_slice(i);
            for b in g.terms() {
                let gb = b.coeff.first_slice(j);
                let coeff = fa
                    .iter()
                    .zip(gb)
                    .fold(ZERO, |acc, (x, y)| acc + x * y.conj());
                terms.push(Wave {
                    lattice: [
                        a.lattice[0] - b.lattice[0],
                        a.lattice[1] - b.lattice[1],
                        a.lattice[2] - b.lattice[2],
                    ],
                    q: [a.q.x - b.q.x, a.q.y - b.q.y, a.q.z - b.q.z],
                    nu: a.nu - b.nu,
                    coeff,
                });
            }
        }
        WaveSum { terms }
    }

    /// `int_region x_weight^(0|1) f dV` at slot-1 time `t`.
    pub fn integrate(&self, region: &Region, length: f64, weight: Option<usize>, t: f64) -> C64 {
        self.terms.iter().fold(ZERO, |acc, w| {
            let mut v = w.coeff * C64::from_polar(1.0, -w.nu * t);
            for ax in 0..3 {
                let power = u8::from(weight == Some(ax));
                v *= line_integral(w.lattice[ax], region.lo[ax], region.hi[ax], length, power);
            }
            acc + v
        })
    }

    /// Integral over the face `x_axis = frac * L` of the region, optionally
    /// weighted by one coordinate.
    pub fn face_integral(
        &self,
        region: &Region,
        length: f64,
        axis: usize,
        frac: f64,
        weight: Option<usize>,
        t: f64,
    ) -> C64 {
        self.terms.iter().fold(ZERO, |acc, w| {
            let mut v = w.coeff * C64::from_polar(1.0, -w.nu * t) * lattice_phase(w.lattice[axis], frac);
            if weight == Some(axis) {
                v *= frac * length;
            }
            for ax in (0..3).filter(|&ax| ax != axis) {
                let power = u8::from(weight == Some(ax));
                v *= line_integral(w.lattice[ax], region.lo[ax], region.hi[ax], length, power);
            }
            acc + v
        })
    }

    /// Outward flux `sum_faces int F n dS` of a vector of sums over the
    /// region's boundary, optionally weighted by one coordinate.
    pub fn outward_flux(
        field: &[WaveSum; 3],
        region: &Region,
        length: f64,
        weight: Option<usize>,
        t: f64,
    ) -> C64 {
        (0..3).fold(ZERO, |acc, ax| {
            let hi = field[ax].face_integral(region, length, ax, region.hi[ax], weight, t);
            let lo = field[ax].face_integral(region, length, ax, region.lo[ax], weight, t);
            acc + hi - lo
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(lattice: [i32; 3], length: f64, nu: f64, coeff: C64) -> Wave {
        let s = 2.0 * PI / length;
        Wave {
            lattice,
            q: [s * lattice[0] as f64, s * lattice[1] as f64, s * lattice[2] as f64],
            nu,
            coeff,
        }
    }

    fn midpoint(f: impl Fn(f64) -> C64, a: f64, b: f64, n: usize) -> C64 {
        let h = (b - a) / n as f64;
        (0..n).fold(ZERO, |acc, k| acc + f(a + (k as f64 + 0.5) * h)) * h
    }

    #[test]
    fn line_integrals_match_quadrature() {
        let length = 3.0;
        for n in [-2, -1, 0, 1, 3] {
            let q = 2.0 * PI * n as f64 / length;
            for (a, b) in [(0.0, 1.0), (0.0, 0.5), (0.2, 0.7)] {
                for power in [0u8, 1] {
                    let exact = line_integral(n, a, b, length, power);
                    let num = midpoint(
                        |x| C64::from_polar(1.0, q * x) * if power == 1 { x } else { 1.0 },
                        a * length,
                        b * length,
                        20000,
                    );
                    assert!((exact - num).norm() < 1e-7, "n={n} a={a} b={b} p={power}");
                }
            }
        }
        assert_eq!(line_integral(2, 0.0, 1.0, length, 0), ZERO);
    }

    #[test]
    fn divergence_theorem_on_half_box() {
        let length = 2.0 * PI;
        let field = [
            WaveSum { terms: vec![wave([1, 0, 1], length, 0.3, C64::new(0.2, 0.1))] },
            WaveSum { terms: vec![wave([0, 2, -1], length, 0.0, C64::new(-0.4, 0.3))] },
            WaveSum { terms: vec![wave([0, 0, 1], length, 1.1, C64::new(0.5, -0.2))] },
        ];
        let t = 0.37;
        let mut div = WaveSum::zero();
        for (ax, f) in field.iter().enumerate() {
            div.add_scaled(&f.derivative(Axis::spatial(ax)), 1.0);
        }
        for weight in [None, Some(0), Some(2)] {
            // int x_w div F = flux(x_w F) - int F_w
            let lhs = div.integrate(&Region::HALF_Z, length, weight, t);
            let mut rhs = WaveSum::outward_flux(&field, &Region::HALF_Z, length, weight, t);
            if let Some(w) = weight {
                rhs -= field[w].integrate(&Region::HALF_Z, length, None, t);
            }
            assert!((lhs - rhs).norm() < 1e-12, "{weight:?}");
        }
        let full = WaveSum::outward_flux(&field, &Region::FULL, length, None, t);
        assert_eq!(full, ZERO);
    }

    #[test]
    fn re2_is_real() {
        let s = WaveSum { terms: vec![wave([1, -1, 0], 1.0, 0.4, C64::new(0.3, 0.8))] };
        let p = SpacetimePoint::new([0.1, 0.4, 0.2], 0.7);
        let v = s.re2().evaluate(&p);
        assert_eq!(v.im, 0.0);
        assert!((v.re - 2.0 * s.evaluate(&p).re).abs() < 1e-15);
    }
}
