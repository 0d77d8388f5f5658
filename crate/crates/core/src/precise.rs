//! Double-double evaluation of words, cocycle values and traces.
//!
//! Inputs stay `f64`; long products are formed in about 106-bit precision so
//! the cancellation in the pairing sums and in relator residuals does not
//! swamp the result.

use std::collections::BTreeMap;

use nalgebra::Matrix3;
use twofloat::TwoFloat;

use crate::cocycle::Cocycle;
use crate::linalg::Mat3;
use crate::rep::GroupRep;
use crate::words::{Generator, GroupRingElement, Word};

pub type Dd = TwoFloat;
pub type DdMat = Matrix3<Dd>;

pub fn lift(m: &Mat3) -> DdMat {
    m.map(Dd::from)
}

pub fn lower(m: &DdMat) -> Mat3 {
    m.map(f64::from)
}

pub fn zero() -> DdMat {
    DdMat::from_element(Dd::from(0.0))
}

pub fn identity() -> DdMat {
    let mut m = zero();
    for i in 0..3 {
        m[(i, i)] = Dd::from(1.0);
    }
    m
}

pub fn trace(m: &DdMat) -> Dd {
    m[(0, 0)] + m[(1, 1)] + m[(2, 2)]
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &DdMat, b: &DdMat) -> Dd {
    let mut s = Dd::from(0.0);
    for i in 0..3 {
        for j in 0..3 {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Quotient by long division; `TwoFloat`'s own operator drops the low word
/// when the divisor is exactly representable as `f64`.
pub fn div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * Dd::from(q1);
    let q2 = r.hi() / b.hi();
    let r = r - b * Dd::from(q2);
    let q3 = r.hi() / b.hi();
    Dd::new_add(q1, q2) + Dd::from(q3)
}

pub fn rational(c: &num_rational::Rational64) -> Dd {
    div(Dd::from(*c.numer() as f64), Dd::from(*c.denom() as f64))
}

pub fn scale(m: &DdMat, c: Dd) -> DdMat {
    m.map(|x| x * c)
}

pub fn determinant(m: &DdMat) -> Dd {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Inverse by the adjugate formula.
pub fn inverse(m: &DdMat) -> DdMat {
    let c = |i: usize, j: usize| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        m[(i1, j1)] * m[(i2, j2)] - m[(i1, j2)] * m[(i2, j1)]
    };
    let det = m[(0, 0)] * c(0, 0) + m[(0, 1)] * c(0, 1) + m[(0, 2)] * c(0, 2);
    let mut out = zero();
    for i in 0..3 {
        for j in 0..3 {
            out[(j, i)] = div(c(i, j), det);
        }
    }
    out
}

pub fn frobenius(m: &DdMat) -> f64 {
    m.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt()
}

/// Generator matrices and their inverses in double-double.
pub struct PreciseRep {
    mats: BTreeMap<Generator, (DdMat, DdMat)>,
}

impl PreciseRep {
    pub fn new(rep: &GroupRep) -> Self {
        let mats = rep
            .matrices()
            .iter()
            .map(|(g, m)| {
                let lo = rep.low_word(*g);
                let d = m.zip_map(&lo, Dd::new_add);
                (*g, (d, inverse(&d)))
            })
            .collect();
        PreciseRep { mats }
    }

    pub fn matrix(&self, g: Generator) -> &DdMat {
        &self.mats[&g].0
    }

    pub fn evaluate(&self, w: &Word) -> DdMat {
        let mut m = identity();
        for l in w.letters() {
            let (a, ai) = &self.mats[&l.gen];
            m *= if l.exp > 0 { *a } else { *ai };
        }
        m
    }

    pub fn evaluate_inverse(&self, w: &Word) -> DdMat {
        self.evaluate(&w.inverse())
    }

    /// `u(w)` with the cocycle rule, accumulated in double-double.
    pub fn extend(&self, u: &Cocycle, w: &Word) -> DdMat {
        let mut acc = zero();
        let mut pre = identity();
        let mut pre_inv = identity();
        for l in w.letters() {
            let (a, ai) = &self.mats[&l.gen];
            let ug = lift(&u.get(l.gen));
            let (val, m, mi) = if l.exp > 0 { (ug, *a, *ai) } else { (-(ai * ug * a), *ai, *a) };
            acc += pre * val * pre_inv;
            pre *= m;
            pre_inv = mi * pre_inv;
        }
        acc
    }

    pub fn extend_ring(&self, u: &Cocycle, e: &GroupRingElement) -> DdMat {
        let mut acc = zero();
        for (w, c) in e.terms() {
            let c = rational(c);
            acc += scale(&self.extend(u, w), c);
        }
        acc
    }

    /// True relator residual `|rho(rel) - I|` of the stored matrices.
    pub fn residual(&self, w: &Word) -> f64 {
        frobenius(&(self.evaluate(w) - identity()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_inverse() {
        let m = Mat3::new(2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0);
        let d = lift(&m);
        let e = d * inverse(&d) - identity();
        assert!(frobenius(&e) < 1e-30, "{:e}", frobenius(&e));
        let q = div(Dd::from(1.0), Dd::from(3.0)) * Dd::from(3.0) - Dd::from(1.0);
        assert!(f64::from(q).abs() < 1e-30);
    }
}
