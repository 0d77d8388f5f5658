//! Representations into SL(3,R), hyperbolic invariants, Goldman derivatives,
//! Fuchsian seeds and Newton refinement onto the relation variety.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};

use crate::cocycle::Cocycle;
use crate::linalg::{self, ad_matrix, coords, expm, inverse, Mat3, RankPolicy, DIM_G};
use crate::precise::{self, PreciseRep};
use crate::orbifold::{InclusionMap, OrbifoldError, OrbifoldSignature, Presentation};
use crate::words::{fox_derivative, Generator, GroupRingElement, Word};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepError {
    #[error("matrix is not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("newton refinement diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error(transparent)]
    Orbifold(#[from] OrbifoldError),
    #[error("representation is missing generator {0}")]
    MissingGenerator(String),
}

/// Default residual tolerance for accepted representations.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Default relative eigen-gap for hyperbolicity.
pub const EIGEN_GAP_TOL: f64 = 1e-8;

/// Generator matrices, optionally with the low words of a double-double
/// value. Only the `f64` part is persisted or used by `f64` arithmetic; the
/// low words let results computed in double-double (flows) feed further
/// double-double evaluation without being rounded in between.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRep {
    presentation: Presentation,
    matrices: BTreeMap<Generator, Mat3>,
    inverses: BTreeMap<Generator, Mat3>,
    low: BTreeMap<Generator, Mat3>,
    pub residual_tol: f64,
}

impl GroupRep {
    pub fn new(presentation: Presentation, matrices: BTreeMap<Generator, Mat3>) -> Result<Self, RepError> {
        for g in presentation.signature.generators() {
            if !matrices.contains_key(&g) {
                return Err(RepError::MissingGenerator(g.name()));
            }
        }
        let inverses = matrices.iter().map(|(g, m)| (*g, inverse(m))).collect();
        Ok(GroupRep { presentation, matrices, inverses, low: BTreeMap::new(), residual_tol: RESIDUAL_TOL })
    }

    pub fn from_signature(sig: &OrbifoldSignature, matrices: BTreeMap<Generator, Mat3>) -> Result<Self, RepError> {
        Self::new(Presentation::canonical(sig), matrices)
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn signature(&self) -> &OrbifoldSignature {
        &self.presentation.signature
    }

    pub fn generators(&self) -> Vec<Generator> {
        self.presentation.signature.generators()
    }

    pub fn matrix(&self, g: Generator) -> &Mat3 {
        &self.matrices[&g]
    }

    pub fn matrix_inverse(&self, g: Generator) -> &Mat3 {
        &self.inverses[&g]
    }

    pub fn matrices(&self) -> &BTreeMap<Generator, Mat3> {
        &self.matrices
    }

    pub fn with_matrices(&self, matrices: BTreeMap<Generator, Mat3>) -> GroupRep {
        let mut out = GroupRep::new(self.presentation.clone(), matrices).expect("same generators");
        out.residual_tol = self.residual_tol;
        out
    }

    /// Keeps both words of each double-double matrix.
    pub fn with_precise_matrices(&self, matrices: &BTreeMap<Generator, precise::DdMat>) -> GroupRep {
        let hi = matrices.iter().map(|(g, m)| (*g, precise::lower(m))).collect();
        let mut out = self.with_matrices(hi);
        out.low = matrices.iter().map(|(g, m)| (*g, m.map(|x| x.lo()))).collect();
        out
    }

    /// Cone generators polished in double-double to exact finite order by
    /// `X -> X((r+1)I - X^r)/r`, which fixes every `r`-th root of unity with
    /// zero derivative.
    pub fn with_exact_torsion(&self) -> GroupRep {
        let pr = PreciseRep::new(self);
        let sig = self.signature().clone();
        let mut mats: BTreeMap<Generator, precise::DdMat> = BTreeMap::new();
        for g in self.generators() {
            let mut x = *pr.matrix(g);
            if g.kind == crate::words::GenKind::S {
                let r = sig.cone_order(g.index);
                let inv_r = precise::div(precise::Dd::from(1.0), precise::Dd::from(r as f64));
                for _ in 0..4 {
                    let mut p = precise::identity();
                    for _ in 0..r {
                        p *= x;
                    }
                    let step = precise::scale(&precise::identity(), precise::Dd::from((r + 1) as f64)) - p;
                    x = precise::scale(&(x * step), inv_r);
                }
            }
            mats.insert(g, x);
        }
        self.with_precise_matrices(&mats)
    }

    /// Low word of a generator matrix, zero unless built in double-double.
    pub fn low_word(&self, g: Generator) -> Mat3 {
        self.low.get(&g).copied().unwrap_or_else(Mat3::zeros)
    }

    pub fn evaluate(&self, w: &Word) -> Mat3 {
        let mut m = Mat3::identity();
        for l in w.letters() {
            if l.exp > 0 {
                m *= self.matrices[&l.gen];
            } else {
                m *= self.inverses[&l.gen];
            }
        }
        m
    }

    /// Ad of a group-ring element as an 8x8 matrix: `sum n_w Ad_{rho(w)}`.
    pub fn ad_ring(&self, e: &GroupRingElement) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(DIM_G, DIM_G);
        for (w, c) in e.terms() {
            let g = self.evaluate(w);
            let c = *c.numer() as f64 / *c.denom() as f64;
            out += ad_matrix(&g, &inverse(&g)) * c;
        }
        out
    }

    /// Relators paired with an optional cone generator (None for the long relator).
    pub fn relators(&self) -> Vec<(Option<Generator>, Word)> {
        let mut out = vec![(None, self.presentation.relator())];
        out.extend(self.presentation.torsion_relators().into_iter().map(|(s, w)| (Some(s), w)));
        out
    }

    /// Max Frobenius norm of `rho(rel) - I` over all relators.
    pub fn relation_residual(&self) -> f64 {
        let p = PreciseRep::new(self);
        self.relators().iter().map(|(_, w)| p.residual(w)).fold(0.0, f64::max)
    }

    /// `g rho g^-1`
    pub fn conjugate(&self, g: &Mat3) -> GroupRep {
        let gi = inverse(g);
        self.with_matrices(self.matrices.iter().map(|(k, m)| (*k, g * m * gi)).collect())
    }

    /// Representation of a piece: `rho o iota`.
    pub fn pullback(&self, presentation: &Presentation, inclusion: &InclusionMap) -> GroupRep {
        let pr = PreciseRep::new(self);
        let matrices = presentation
            .signature
            .generators()
            .into_iter()
            .map(|g| (g, precise::lower(&pr.evaluate(inclusion.get(g)))))
            .collect();
        let mut out = GroupRep::new(presentation.clone(), matrices).expect("all piece generators mapped");
        out.residual_tol = self.residual_tol;
        out
    }

    /// Largest Frobenius distance between generator matrices.
    pub fn distance(&self, other: &GroupRep) -> f64 {
        self.matrices
            .iter()
            .map(|(g, m)| (m - other.matrix(*g)).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest singular value of the stacked map `X -> (Ad_{rho(v)} X - X)_v`;
    /// zero exactly when the centralizer is nontrivial.
    pub fn centralizer_gap(&self) -> f64 {
        let gens = self.generators();
        let mut a = DMatrix::zeros(DIM_G * gens.len(), DIM_G);
        for (k, g) in gens.iter().enumerate() {
            let m = ad_matrix(self.matrix(*g), self.matrix_inverse(*g)) - DMatrix::identity(DIM_G, DIM_G);
            a.view_mut((k * DIM_G, 0), (DIM_G, DIM_G)).copy_from(&m);
        }
        let (min, max) = linalg::min_singular_ratio(&a);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }
}

impl GroupRep {
    /// Sum of squared Frobenius norms of the generator matrices.
    pub fn size(&self) -> f64 {
        self.matrices.values().map(|m| m.norm_squared()).sum()
    }

    /// Conjugate by positive symmetric matrices until the generator norms
    /// are minimal, which keeps downstream products well conditioned.
    pub fn balanced(&self) -> GroupRep {
        self.balanced_along(None)
    }

    /// Balancing restricted to conjugation by `exp` of the span of
    /// symmetric matrices in `directions`.
    pub fn balanced_within(&self, directions: &[Mat3]) -> GroupRep {
        self.balanced_along(Some(directions))
    }

    fn balanced_along(&self, directions: Option<&[Mat3]>) -> GroupRep {
        // accumulate the conjugator and apply it once to avoid compounding rounding
        let mut g = Mat3::identity();
        let mut cur = self.clone();
        let mut f = cur.size();
        let mut eta = 1.0 / f;
        for _ in 0..500 {
            let mut grad = cur.matrices.values().fold(Mat3::zeros(), |acc, m| acc + m * m.transpose() - m.transpose() * m);
            if let Some(dirs) = directions {
                grad = dirs.iter().fold(Mat3::zeros(), |acc, d| acc + d * (d.dot(&grad) / d.dot(d)));
            }
            if grad.norm() < 1e-12 * f {
                break;
            }
            let mut moved = false;
            for _ in 0..40 {
                let cand_g = expm(&(-grad * eta)) * g;
                let cand = self.conjugate(&cand_g);
                let cf = cand.size();
                if cf < f {
                    g = cand_g;
                    cur = cand;
                    f = cf;
                    eta *= 2.0;
                    moved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !moved {
                break;
            }
        }
        cur
    }
}

pub fn evaluate(rep: &GroupRep, w: &Word) -> Mat3 {
    rep.evaluate(w)
}

pub fn relation_residual(rep: &GroupRep) -> f64 {
    rep.relation_residual()
}

// ---------------------------------------------------------------------------
// Invariants of hyperbolic elements

#[derive(Debug, Clone, PartialEq)]
pub struct HypInvariants {
    /// `log(lambda1 / lambda3)`
    pub ell: f64,
    /// `log lambda2`
    pub m: f64,
    /// decreasing
    pub eigenvalues: [f64; 3],
    pub projectors: [Mat3; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Invariant {
    L,
    M,
}

impl HypInvariants {
    pub fn value(&self, which: Invariant) -> f64 {
        match which {
            Invariant::L => self.ell,
            Invariant::M => self.m,
        }
    }

    pub fn derivative(&self, which: Invariant) -> Mat3 {
        match which {
            Invariant::L => self.projectors[0] - self.projectors[2],
            Invariant::M => self.projectors[1] - Mat3::identity() / 3.0,
        }
    }
}

/// Real, positive, simple spectrum with relative gap above `tol`.
pub fn classify(m: &Mat3, tol: f64) -> Result<HypInvariants, RepError> {
    let det = m.determinant();
    if (det - 1.0).abs() > 1e-6 {
        return Err(RepError::NotHyperbolic(format!("determinant {det} is not 1")));
    }
    let ev = m.complex_eigenvalues();
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if ev.iter().any(|z| z.im.abs() > tol * scale) {
        return Err(RepError::NotHyperbolic("complex spectrum".into()));
    }
    let mut lam: Vec<f64> = ev.iter().map(|z| z.re).collect();
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if lam[2] <= 0.0 {
        return Err(RepError::NotHyperbolic(format!("non-positive eigenvalue {}", lam[2])));
    }
    let gap = (lam[0] - lam[1]).min(lam[1] - lam[2]);
    if gap <= tol * lam[0] {
        return Err(RepError::NotHyperbolic(format!("clustered spectrum {lam:?}")));
    }
    // Sylvester projectors
    let id = Mat3::identity();
    let proj = |i: usize| {
        let mut p = id;
        for j in 0..3 {
            if j != i {
                p = p * (m - id * lam[j]) / (lam[i] - lam[j]);
            }
        }
        p
    };
    let projectors = [proj(0), proj(1), proj(2)];
    Ok(HypInvariants {
        ell: (lam[0] / lam[2]).ln(),
        m: lam[1].ln(),
        eigenvalues: [lam[0], lam[1], lam[2]],
        projectors,
    })
}

/// `f^#(h)` with `d/dt f(h exp tX) = Tr(f^#(h) X)`.
pub fn goldman_derivative(m: &Mat3, which: Invariant) -> Result<Mat3, RepError> {
    Ok(classify(m, EIGEN_GAP_TOL)?.derivative(which))
}

// ---------------------------------------------------------------------------
// SO(2,1) geometry

/// Minkowski form `diag(1, 1, -1)`.
pub fn minkowski() -> Mat3 {
    Mat3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))
}

/// Basis of so(2,1): rotation about the origin, boosts along x and y.
pub fn so21_basis() -> [Mat3; 3] {
    let k = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let p1 = Mat3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let p2 = Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0);
    [k, p1, p2]
}

pub fn rotation(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn boost(d: f64) -> Mat3 {
    let (s, c) = (d.sinh(), d.cosh());
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c)
}

/// Isometry taking the origin to the Poincare-disk point `p`.
pub fn disk_translation(p: [f64; 2]) -> Mat3 {
    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if r == 0.0 {
        return Mat3::identity();
    }
    let phi = p[1].atan2(p[0]);
    rotation(phi) * boost(2.0 * r.atanh()) * rotation(-phi)
}

/// Reflection in the line with unit spacelike normal `n`.
fn reflection(n: &Vector3<f64>) -> Mat3 {
    let j = minkowski();
    Mat3::identity() - 2.0 * n * (n.transpose() * j)
}

/// Rotations about the vertices of the hyperbolic triangle with angles
/// `pi/p, pi/q, pi/r`, built from reflections in its sides.
pub fn fuchsian_triangle(p: u32, q: u32, r: u32) -> Result<GroupRep, RepError> {
    let sig = OrbifoldSignature::new(0, 0, vec![p, q, r]);
    sig.validate()?;
    let (a, b, c) = (PI / p as f64, PI / q as f64, PI / r as f64);
    // side i is opposite vertex i; vertex 1 lies on sides 2 and 3
    let gram = nalgebra::Matrix3::new(1.0, -c.cos(), -b.cos(), -c.cos(), 1.0, -a.cos(), -b.cos(), -a.cos(), 1.0);
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    debug_assert!(eig.eigenvalues[order[2]] < 0.0);
    // N = diag(sqrt|d|) Q^T with rows ordered so the negative eigenvalue is last
    let mut n = Mat3::zeros();
    for (row, &k) in order.iter().enumerate() {
        let s = eig.eigenvalues[k].abs().sqrt();
        for col in 0..3 {
            n[(row, col)] = s * eig.eigenvectors[(col, k)];
        }
    }
    let normal = |i: usize| Vector3::new(n[(0, i)], n[(1, i)], n[(2, i)]);
    let sig1 = reflection(&normal(0));
    let sig2 = reflection(&normal(1));
    let sig3 = reflection(&normal(2));
    let mut m = BTreeMap::new();
    m.insert(Generator::s(1), sig2 * sig3);
    m.insert(Generator::s(2), sig3 * sig1);
    m.insert(Generator::s(3), sig1 * sig2);
    Ok(GroupRep::from_signature(&sig, m)?.with_exact_torsion())
}

/// Seed for [`fuchsian_cone_sphere`]: rotation centers in the Poincare disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSeed {
    pub centers: Vec<[f64; 2]>,
}

impl ConeSeed {
    /// Centers evenly spaced on a circle of Euclidean radius `radius`,
    /// ordered clockwise.
    pub fn symmetric(n: usize, radius: f64) -> Self {
        let centers = (0..n)
            .map(|k| {
                let t = -2.0 * PI * k as f64 / n as f64;
                [radius * t.cos(), radius * t.sin()]
            })
            .collect();
        ConeSeed { centers }
    }
}

/// Cone sphere in SO(2,1): `s_i = g_i R_i g_i^-1` with `R_i` the rotation by
/// `2 pi / r_i`, centers moved by Gauss-Newton until the long relator holds.
pub fn fuchsian_cone_sphere(orders: &[u32], seed: &ConeSeed) -> Result<GroupRep, RepError> {
    let sig = OrbifoldSignature::new(0, 0, orders.to_vec());
    sig.validate()?;
    if seed.centers.len() != orders.len() {
        return Err(RepError::Orbifold(OrbifoldError::InvalidSignature(
            "seed needs one center per cone point".into(),
        )));
    }
    let mut m = BTreeMap::new();
    for (k, (&r, &c)) in orders.iter().zip(&seed.centers).enumerate() {
        let g = disk_translation(c);
        m.insert(Generator::s(k + 1), g * rotation(2.0 * PI / r as f64) * inverse(&g));
    }
    let rep = GroupRep::from_signature(&sig, m)?;
    Ok(conjugation_newton(&rep, &so21_basis(), &NewtonOptions::default())?.with_exact_torsion())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// required final residual
    pub tol: f64,
    pub policy: RankPolicy,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iter: 200, tol: RESIDUAL_TOL, policy: RankPolicy::default() }
    }
}

/// Projects the traceless part of `x` onto an orthogonal family.
fn project(x: &Mat3, family: &[Mat3]) -> DVector<f64> {
    DVector::from_iterator(family.len(), family.iter().map(|e| e.dot(x) / e.dot(e)))
}

fn combine(c: &[f64], family: &[Mat3]) -> Mat3 {
    family.iter().zip(c).fold(Mat3::zeros(), |acc, (e, &t)| acc + e * t)
}

/// Gauss-Newton on the long relator only, moving every generator by
/// conjugation inside the subalgebra spanned by `family`. Cone orders are kept
/// exactly. A Jacobian without full row rank is reported as divergence.
fn conjugation_newton(rep: &GroupRep, family: &[Mat3], opts: &NewtonOptions) -> Result<GroupRep, RepError> {
    let gens = rep.generators();
    let relator = rep.presentation().relator();
    let fox: Vec<GroupRingElement> = gens.iter().map(|&g| fox_derivative(&relator, g)).collect();
    let mut cur = rep.clone();
    let k = family.len();
    let mut res = cur.relation_residual();
    for it in 0..opts.max_iter {
        if res < opts.tol * 1e-3 {
            return Ok(cur);
        }
        let r_inv = PreciseRep::new(&cur).evaluate_inverse(&relator);
        let target = project(&precise::lower(&(r_inv - precise::identity())), family);
        let mut jac = DMatrix::zeros(k, k * gens.len());
        for (gi, g) in gens.iter().enumerate() {
            let s = cur.matrix(*g);
            let si = cur.matrix_inverse(*g);
            for (bi, e) in family.iter().enumerate() {
                // right-translated tangent of exp(t e) s exp(-t e)
                let delta = e - s * e * si;
                let img = ring_act(&cur, &fox[gi], &delta);
                let col = project(&img, family);
                jac.view_mut((0, gi * k + bi), (k, 1)).copy_from(&col);
            }
        }
        let sv = linalg::svd_full(&jac);
        if sv.rank(opts.policy) < k {
            return Err(RepError::NewtonDiverged { iterations: it, residual: res });
        }
        let step = linalg::lstsq_min_norm(&jac, &target, opts.policy);
        // backtracking keeps the iteration inside the region where exp is tame
        let mut alpha = (1.0 / step.amax().max(1e-300)).min(1.0);
        let mut accepted = None;
        for _ in 0..30 {
            let mut next = BTreeMap::new();
            for (gi, g) in gens.iter().enumerate() {
                let eta = combine(&step.as_slice()[gi * k..(gi + 1) * k], family) * alpha;
                let e = expm(&eta);
                let ei = expm(&-eta);
                next.insert(*g, e * cur.matrix(*g) * ei);
            }
            if next.values().all(|m| m.iter().all(|x| x.is_finite())) {
                let cand = cur.with_matrices(next);
                let cres = cand.relation_residual();
                if cres < res {
                    accepted = Some((cand, cres));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((cand, cres)) => {
                cur = cand;
                res = cres;
            }
            None if res < opts.tol => return Ok(cur),
            None => return Err(RepError::NewtonDiverged { iterations: it + 1, residual: res }),
        }
    }
    if res < opts.tol {
        Ok(cur)
    } else {
        Err(RepError::NewtonDiverged { iterations: opts.max_iter, residual: res })
    }
}

/// `sum n_w Ad_{rho(w)} X`
pub fn ring_act(rep: &GroupRep, e: &GroupRingElement, x: &Mat3) -> Mat3 {
    let mut out = Mat3::zeros();
    for (w, c) in e.terms() {
        let g = rep.evaluate(w);
        let c = *c.numer() as f64 / *c.denom() as f64;
        out += g * x * inverse(&g) * c;
    }
    out
}

/// Gauss-Newton on the stacked residuals of the long relator and every torsion
/// relator, with updates `v -> exp(xi_v) v`, minimum-norm steps.
pub fn newton_refine(rep: &GroupRep) -> Result<GroupRep, RepError> {
    newton_refine_with(rep, &NewtonOptions::default())
}

pub fn newton_refine_with(rep: &GroupRep, opts: &NewtonOptions) -> Result<GroupRep, RepError> {
    refine_in(rep, &DMatrix::identity(DIM_G, DIM_G), opts)
}

/// Refinement with every update `xi_v` drawn from the span of `family`;
/// with an so(2,1) family a Fuchsian point stays in SO(2,1).
pub fn newton_refine_within(rep: &GroupRep, family: &[Mat3], opts: &NewtonOptions) -> Result<GroupRep, RepError> {
    let cols: Vec<DVector<f64>> = family.iter().map(coords).collect();
    refine_in(rep, &DMatrix::from_columns(&cols), opts)
}

fn refine_in(rep: &GroupRep, algebra: &DMatrix<f64>, opts: &NewtonOptions) -> Result<GroupRep, RepError> {
    let k = algebra.ncols();
    let gens = rep.generators();
    let rels = rep.relators();
    let fox: Vec<Vec<GroupRingElement>> =
        rels.iter().map(|(_, w)| gens.iter().map(|&g| fox_derivative(w, g)).collect()).collect();
    let n = k * gens.len();
    let mut cur = rep.clone();
    let mut res = cur.relation_residual();
    let mut best = (res, cur.clone());
    let mut stalls = 0;
    for _ in 0..opts.max_iter {
        if res < 1e-15 {
            break;
        }
        let mut jac = DMatrix::zeros(DIM_G * rels.len(), n);
        let mut target = DVector::zeros(DIM_G * rels.len());
        let pr = PreciseRep::new(&cur);
        for (ri, (_, w)) in rels.iter().enumerate() {
            let r_inv = precise::lower(&(pr.evaluate_inverse(w) - precise::identity()));
            target.rows_mut(ri * DIM_G, DIM_G).copy_from(&coords(&r_inv));
            for (gi, _) in gens.iter().enumerate() {
                if fox[ri][gi].is_zero() {
                    continue;
                }
                let block = cur.ad_ring(&fox[ri][gi]) * algebra;
                jac.view_mut((ri * DIM_G, gi * k), (DIM_G, k)).copy_from(&block);
            }
        }
        let step = linalg::lstsq_min_norm(&jac, &target, opts.policy);
        let mut alpha = (1.0 / step.amax().max(1e-300)).min(1.0);
        let mut accepted = None;
        for _ in 0..30 {
            let mut next = BTreeMap::new();
            for (gi, g) in gens.iter().enumerate() {
                let c = algebra * step.rows(gi * k, k);
                let xi = linalg::from_coords(c.as_slice()) * alpha;
                next.insert(*g, expm(&xi) * cur.matrix(*g));
            }
            let cand = cur.with_matrices(next);
            let cres = cand.relation_residual();
            if cres.is_finite() && (cres < res || alpha == 1.0 && res < opts.tol) {
                accepted = Some((cand, cres));
                break;
            }
            alpha *= 0.5;
        }
        let Some((cand, new_res)) = accepted else {
            break;
        };
        cur = cand;
        if new_res < best.0 {
            if new_res > 0.5 * best.0 && best.0 < opts.tol {
                stalls += 1;
            }
            best = (new_res, cur.clone());
        } else {
            stalls += 1;
        }
        res = new_res;
        if stalls >= 2 && best.0 < opts.tol {
            break;
        }
    }
    if best.0 < opts.tol {
        Ok(best.1)
    } else {
        Err(RepError::NewtonDiverged { iterations: opts.max_iter, residual: best.0 })
    }
}

/// `v -> exp(t u(v)) rho(v)` followed by refinement.
pub fn deform(rep: &GroupRep, u: &Cocycle, t: f64) -> Result<GroupRep, RepError> {
    if t == 0.0 {
        return Ok(rep.clone());
    }
    newton_refine(&deform_unrefined(rep, u, t))
}

pub fn deform_unrefined(rep: &GroupRep, u: &Cocycle, t: f64) -> GroupRep {
    let next = rep.matrices().iter().map(|(g, m)| (*g, expm(&(u.get(*g) * t)) * m)).collect();
    rep.with_matrices(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_of_diagonal() {
        let h = Mat3::from_diagonal(&Vector3::new(6.0, 0.5, 1.0 / 3.0));
        let inv = classify(&h, EIGEN_GAP_TOL).unwrap();
        assert!((inv.ell - 18f64.ln()).abs() < 1e-14);
        assert!((inv.m - 0.5f64.ln()).abs() < 1e-14);
        let h2 = Mat3::from_diagonal(&Vector3::new(4.0, 1.0, 0.25));
        let inv2 = classify(&h2, EIGEN_GAP_TOL).unwrap();
        assert!((inv2.ell - 16f64.ln()).abs() < 1e-14);
        assert!(inv2.m.abs() < 1e-14);
    }

    #[test]
    fn rotation_is_not_hyperbolic() {
        let r = rotation(2.0 * PI / 3.0);
        assert!(matches!(classify(&r, EIGEN_GAP_TOL), Err(RepError::NotHyperbolic(_))));
    }

    #[test]
    fn derivatives_of_diagonal() {
        let h = Mat3::from_diagonal(&Vector3::new(5.0, 0.8, 0.25));
        let l = goldman_derivative(&h, Invariant::L).unwrap();
        let m = goldman_derivative(&h, Invariant::M).unwrap();
        assert!((l - Mat3::from_diagonal(&Vector3::new(1.0, 0.0, -1.0))).norm() < 1e-14);
        let third = 1.0 / 3.0;
        assert!((m - Mat3::from_diagonal(&Vector3::new(-third, 2.0 * third, -third))).norm() < 1e-14);
    }

    #[test]
    fn triangle_groups() {
        let rep = fuchsian_triangle(3, 3, 4).unwrap();
        assert!(rep.matrix(Generator::s(1)).trace().abs() < 1e-12);
        assert!(rep.relation_residual() < 1e-12);
        let rep = fuchsian_triangle(2, 3, 7).unwrap();
        let s1 = rep.matrix(Generator::s(1));
        assert!((s1 * s1 - Mat3::identity()).norm() < 1e-12);
        assert!(rep.relation_residual() < 1e-12);
        assert!(fuchsian_triangle(2, 3, 6).is_err());
    }

    #[test]
    fn cone_sphere_converges() {
        let rep = fuchsian_cone_sphere(&[2, 2, 3, 3], &ConeSeed::symmetric(4, 0.5)).unwrap();
        assert!(rep.relation_residual() < 1e-10);
        assert!(rep.centralizer_gap() > 1e-6);
        let tri = fuchsian_cone_sphere(&[2, 3, 7], &ConeSeed::symmetric(3, 0.3)).unwrap();
        assert!(tri.relation_residual() < 1e-10);
    }

    #[test]
    fn degenerate_seed_diverges() {
        let seed = ConeSeed { centers: vec![[0.1, 0.2]; 4] };
        assert!(matches!(
            fuchsian_cone_sphere(&[2, 2, 3, 3], &seed),
            Err(RepError::NewtonDiverged { .. })
        ));
    }
}
