//! The pairing on cocycle spaces, evaluated in closed form and on the
//! fundamental 2-chain, plus Gram matrices, the decomposition residual and a
//! finite-difference closedness probe.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cocycle::{self, restrict, Cocycle, CocycleError, CocycleSpace};
use crate::linalg::{self, Mat3, RankPolicy};
use crate::orbifold::SplittingSpec;
use crate::precise::{self, Dd, PreciseRep};
use crate::rep::{self, classify, GroupRep, EIGEN_GAP_TOL};
use crate::words::{bar_involution, fox_derivative, fundamental_two_chain_of, GenKind, Word};

fn tr(a: &Mat3, b: &Mat3) -> f64 {
    (a * b).trace()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingReport {
    pub value_closed_form: f64,
    pub value_cycle: f64,
    pub discrepancy: f64,
    /// `T_i` per cone point
    pub torsion_corrections: Vec<Mat3>,
    /// `X_i` per boundary component
    pub boundary_corrections: Vec<Mat3>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairingSummary {
    pub value_closed: f64,
    pub value_cycle: f64,
    pub discrepancy: f64,
}

impl From<&PairingReport> for PairingSummary {
    fn from(r: &PairingReport) -> Self {
        PairingSummary { value_closed: r.value_closed_form, value_cycle: r.value_cycle, discrepancy: r.discrepancy }
    }
}

/// `X_i` solved from `u` at every boundary generator, paired with `v`.
fn boundary_term(rep: &GroupRep, pr: &PreciseRep, u: &Cocycle, v: &Cocycle) -> Result<(Dd, Vec<Mat3>), CocycleError> {
    let mut sum = Dd::from(0.0);
    let mut xs = Vec::new();
    for z in rep.presentation().boundary_generators() {
        let x = cocycle::solve_x(rep, u, &Word::gen(z))?;
        sum += precise::trace_product(&precise::lift(&x), &pr.extend(v, &Word::gen(z)));
        xs.push(x);
    }
    Ok((sum, xs))
}

/// Closed-form evaluation with `u`'s torsion and boundary corrections.
pub fn omega_closed_form(rep: &GroupRep, u: &Cocycle, v: &Cocycle) -> Result<f64, CocycleError> {
    Ok(closed_form_parts(rep, &PreciseRep::new(rep), u, v)?.0)
}

fn closed_form_parts(
    rep: &GroupRep,
    pr: &PreciseRep,
    u: &Cocycle,
    v: &Cocycle,
) -> Result<(f64, Vec<Mat3>, Vec<Mat3>), CocycleError> {
    let relator = rep.presentation().relator();
    let mut value = Dd::from(0.0);
    let mut ts = Vec::new();
    for g in rep.generators() {
        let vg = precise::lift(&v.get(g));
        let d = bar_involution(&fox_derivative(&relator, g));
        value -= precise::trace_product(&pr.extend_ring(u, &d), &vg);
        if g.kind == GenKind::S {
            // checks the torsion condition
            cocycle::solve_t(rep, u, g.index)?;
            let r = rep.signature().cone_order(g.index) as i64;
            let mut t = precise::zero();
            for k in 1..r {
                t += pr.extend(u, &Word::gen(g).pow(k));
            }
            let t = precise::scale(&t, precise::div(Dd::from(-1.0), Dd::from(r as f64)));
            value -= precise::trace_product(&t, &vg);
            ts.push(precise::lower(&t));
        }
    }
    let (b, xs) = boundary_term(rep, pr, u, v)?;
    Ok((f64::from(value - b), ts, xs))
}

/// Evaluation of the cup product on the fundamental 2-chain, using
/// `<u v, [a|b]> = Tr(u(a) Ad_a v(b))`.
pub fn omega_cycle(rep: &GroupRep, u: &Cocycle, v: &Cocycle) -> Result<f64, CocycleError> {
    omega_cycle_with(rep, &PreciseRep::new(rep), u, v)
}

fn omega_cycle_with(rep: &GroupRep, pr: &PreciseRep, u: &Cocycle, v: &Cocycle) -> Result<f64, CocycleError> {
    let chain = fundamental_two_chain_of(rep.presentation());
    let mut value = Dd::from(0.0);
    for ((a, b), c) in chain.terms() {
        let ad_vb = pr.evaluate(a) * pr.extend(v, b) * pr.evaluate_inverse(a);
        let c = precise::rational(c);
        value += c * precise::trace_product(&pr.extend(u, a), &ad_vb);
    }
    let (b, _) = boundary_term(rep, pr, u, v)?;
    Ok(f64::from(value - b))
}

pub fn pairing_report(rep: &GroupRep, u: &Cocycle, v: &Cocycle) -> Result<PairingReport, CocycleError> {
    let pr = PreciseRep::new(rep);
    let (closed, ts, xs) = closed_form_parts(rep, &pr, u, v)?;
    let cycle = omega_cycle_with(rep, &pr, u, v)?;
    Ok(PairingReport {
        value_closed_form: closed,
        value_cycle: cycle,
        discrepancy: (closed - cycle).abs(),
        torsion_corrections: ts,
        boundary_corrections: xs,
    })
}

/// `tau(Ad_p X - X, Ad_p Y - Y) = (Tr(X Ad_p Y) - Tr(Y Ad_p X)) / 2`
pub fn tau_form(p: &Mat3, x: &Mat3, y: &Mat3) -> Result<f64, CocycleError> {
    classify(p, EIGEN_GAP_TOL)?;
    let pi = linalg::inverse(p);
    Ok(0.5 * (tr(x, &(p * y * pi)) - tr(y, &(p * x * pi))))
}

/// `|sum (Tr(X_i v(z_i)) - Tr(Y_i u(z_i)))/2 - sum tau(u(z_i), v(z_i))|`
pub fn boundary_term_identity_check(rep: &GroupRep, u: &Cocycle, v: &Cocycle) -> Result<f64, CocycleError> {
    let mut left = 0.0;
    let mut right = 0.0;
    for z in rep.presentation().boundary_generators() {
        let w = Word::gen(z);
        let x = cocycle::solve_x(rep, u, &w)?;
        let y = cocycle::solve_x(rep, v, &w)?;
        left += 0.5 * (tr(&x, &v.get(z)) - tr(&y, &u.get(z)));
        right += tau_form(rep.matrix(z), &x, &y)?;
    }
    Ok((left - right).abs())
}

#[derive(Debug, Clone)]
pub struct GramReport {
    pub gram: DMatrix<f64>,
    pub min_singular: f64,
    pub max_singular: f64,
    pub rank: usize,
    /// `|G + G^T|`
    pub antisymmetry: f64,
}

impl GramReport {
    pub fn ratio(&self) -> f64 {
        if self.max_singular == 0.0 {
            0.0
        } else {
            self.min_singular / self.max_singular
        }
    }
}

pub fn gram_matrix(rep: &GroupRep, space: &CocycleSpace) -> Result<GramReport, CocycleError> {
    let n = space.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| omega_closed_form(rep, &space.basis[i], &space.basis[j]))
        .collect::<Result<_, _>>()?;
    let gram = DMatrix::from_row_slice(n, n, &vals);
    let (min_singular, max_singular) = linalg::min_singular_ratio(&gram);
    Ok(GramReport {
        rank: linalg::rank(&gram, RankPolicy::default()),
        antisymmetry: (&gram + gram.transpose()).norm(),
        gram,
        min_singular,
        max_singular,
    })
}

/// `|omega(u, v) - sum_i omega_i(iota_i^* u, iota_i^* v)|`
pub fn decomposition_residual(
    rep: &GroupRep,
    splitting: &SplittingSpec,
    u: &Cocycle,
    v: &Cocycle,
) -> Result<f64, CocycleError> {
    let (left, right) = decomposition_terms(rep, splitting, u, v)?;
    Ok((left - right.iter().sum::<f64>()).abs())
}

/// Ambient value and one value per piece.
pub fn decomposition_terms(
    rep: &GroupRep,
    splitting: &SplittingSpec,
    u: &Cocycle,
    v: &Cocycle,
) -> Result<(f64, Vec<f64>), CocycleError> {
    let left = omega_closed_form(rep, u, v)?;
    let right = splitting
        .pieces
        .iter()
        .map(|p| {
            let prep = rep.pullback(&p.presentation, &p.inclusion);
            let pu = restrict(rep, u, &p.presentation, &p.inclusion);
            let pv = restrict(rep, v, &p.presentation, &p.inclusion);
            omega_closed_form(&prep, &pu, &pv)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((left, right))
}

/// Orthogonal projection onto a cocycle space.
fn project(space: &CocycleSpace, u: &Cocycle) -> Cocycle {
    let q = space.matrix();
    let c = q.transpose() * u.to_vector(&space.generators);
    Cocycle::from_vector(&space.generators, (q * c).as_slice())
}

/// Space the pairing lives on: cocycles parabolic along the boundary, or all
/// cocycles for closed orbifolds.
pub fn tangent_space(rep: &GroupRep) -> Result<CocycleSpace, CocycleError> {
    if rep.signature().boundary > 0 {
        cocycle::z1_par_boundary(rep)
    } else {
        cocycle::z1_basis(rep)
    }
}

/// Finite-difference estimate of `d omega(u1, u2, u3)` on the chart
/// `a -> refine(exp(sum a_i u_i) rho)`.
pub fn closedness_probe(rep: &GroupRep, directions: &[Cocycle; 3], h: f64) -> Result<f64, CocycleError> {
    let chart = |a: [f64; 3]| -> Result<GroupRep, CocycleError> {
        let u = directions[0].scale(a[0]).add(&directions[1].scale(a[1])).add(&directions[2].scale(a[2]));
        if a == [0.0; 3] {
            return Ok(rep.clone());
        }
        Ok(rep::newton_refine(&rep::deform_unrefined(rep, &u, 1.0))?)
    };
    let shift = |a: [f64; 3], k: usize, d: f64| {
        let mut b = a;
        b[k] += d;
        b
    };
    // W_ij at a, with tangents from central differences projected onto Z1
    let w = |a: [f64; 3], i: usize, j: usize| -> Result<f64, CocycleError> {
        let at = chart(a)?;
        let space = tangent_space(&at)?;
        let tangent = |k: usize| -> Result<Cocycle, CocycleError> {
            let p = chart(shift(a, k, h))?;
            let m = chart(shift(a, k, -h))?;
            let mut t = Cocycle::zero(&at.generators());
            for g in at.generators() {
                let d = (p.matrix(g) - m.matrix(g)) / (2.0 * h);
                t.set(g, linalg::traceless_part(&(d * at.matrix_inverse(g))));
            }
            Ok(project(&space, &t))
        };
        omega_closed_form(&at, &tangent(i)?, &tangent(j)?)
    };
    let o = [0.0; 3];
    let d = |k: usize, i: usize, j: usize| -> Result<f64, CocycleError> {
        Ok((w(shift(o, k, h), i, j)? - w(shift(o, k, -h), i, j)?) / (2.0 * h))
    };
    Ok(d(0, 1, 2)? - d(1, 0, 2)? + d(2, 0, 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use rand::SeedableRng;

    #[test]
    fn cone_sphere_oracles_agree() {
        let rep = corpus::cone_sphere_2233().unwrap();
        let z = cocycle::z1_basis(&rep).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let u = corpus::random_combination(&z, &mut rng);
        let v = corpus::random_combination(&z, &mut rng);
        let r = pairing_report(&rep, &u, &v).unwrap();
        assert!(r.discrepancy < 1e-10, "{r:?}");
        assert!(omega_closed_form(&rep, &u, &u).unwrap().abs() < 1e-9);
        let x = linalg::from_coords(&[0.3, -0.1, 0.2, 0.5, -0.4, 0.1, 0.7, -0.2]);
        let du = cocycle::coboundary(&rep, &x);
        assert!(omega_closed_form(&rep, &du, &v).unwrap().abs() < 1e-9);
    }

    #[test]
    fn pants_oracles_agree() {
        let rep = corpus::pants_generic(13);
        let z = cocycle::z1_par_boundary(&rep).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let u = corpus::random_combination(&z, &mut rng);
        let v = corpus::random_combination(&z, &mut rng);
        let r = pairing_report(&rep, &u, &v).unwrap();
        assert!(r.discrepancy < 1e-10, "{r:?}");
        let a = omega_closed_form(&rep, &u, &v).unwrap();
        let b = omega_closed_form(&rep, &v, &u).unwrap();
        assert!((a + b).abs() < 1e-9, "{a} {b}");
        assert!(boundary_term_identity_check(&rep, &u, &v).unwrap() < 1e-10);
    }

    #[test]
    fn tau_is_antisymmetric() {
        let p = Mat3::from_diagonal(&nalgebra::Vector3::new(6.0, 0.5, 1.0 / 3.0));
        let x = linalg::from_coords(&[0.3, -0.1, 0.2, 0.5, -0.4, 0.1, 0.7, -0.2]);
        assert_eq!(tau_form(&p, &x, &x).unwrap(), 0.0);
        let c = Mat3::from_diagonal(&nalgebra::Vector3::new(1.0, -2.0, 1.0));
        assert!(tau_form(&p, &c, &x).unwrap().abs() < 1e-14);
    }
}
