//! Cocycles, coboundaries, torsion and boundary subspaces, parabolic
//! constraints and restriction along inclusion maps.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, ad_matrix, coords, from_coords, Mat3, RankPolicy, DIM_G};
use crate::orbifold::{InclusionMap, Presentation};
use crate::precise::{self, PreciseRep};
use crate::rep::{classify, GroupRep, RepError, EIGEN_GAP_TOL};
use crate::words::{fox_derivative, GenKind, Generator, GroupRingElement, Word};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CocycleError {
    #[error("degenerate spectrum at {0}")]
    DegenerateSpectrum(String),
    #[error("rank deficient {what}: expected {expected}, found {found}")]
    RankDeficient { what: String, expected: usize, found: usize },
    #[error("torsion condition violated at {gen} (residual {residual:e})")]
    TorsionViolation { gen: String, residual: f64 },
    #[error("cocycle is not parabolic at {word} (residual {residual:e})")]
    NotParabolic { word: String, residual: f64 },
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// Relative tolerance for the torsion and parabolic membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// A generator-indexed assignment of traceless matrices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cocycle {
    values: BTreeMap<Generator, Mat3>,
}

impl Cocycle {
    pub fn zero(gens: &[Generator]) -> Self {
        Cocycle { values: gens.iter().map(|g| (*g, Mat3::zeros())).collect() }
    }

    pub fn from_map(values: BTreeMap<Generator, Mat3>) -> Self {
        Cocycle { values }
    }

    pub fn get(&self, g: Generator) -> Mat3 {
        *self.values.get(&g).unwrap_or_else(|| panic!("cocycle has no value at {g}"))
    }

    pub fn set(&mut self, g: Generator, x: Mat3) {
        self.values.insert(g, x);
    }

    pub fn values(&self) -> &BTreeMap<Generator, Mat3> {
        &self.values
    }

    /// Coordinates in generator order, eight per generator.
    pub fn to_vector(&self, gens: &[Generator]) -> DVector<f64> {
        let mut v = DVector::zeros(DIM_G * gens.len());
        for (k, g) in gens.iter().enumerate() {
            v.rows_mut(k * DIM_G, DIM_G).copy_from(&coords(&self.get(*g)));
        }
        v
    }

    pub fn from_vector(gens: &[Generator], v: &[f64]) -> Self {
        let values = gens
            .iter()
            .enumerate()
            .map(|(k, g)| (*g, from_coords(&v[k * DIM_G..(k + 1) * DIM_G])))
            .collect();
        Cocycle { values }
    }

    pub fn scale(&self, c: f64) -> Self {
        Cocycle { values: self.values.iter().map(|(g, m)| (*g, m * c)).collect() }
    }

    pub fn add(&self, other: &Cocycle) -> Self {
        let mut out = self.clone();
        for (g, m) in &other.values {
            *out.values.entry(*g).or_insert_with(Mat3::zeros) += m;
        }
        out
    }

    pub fn sub(&self, other: &Cocycle) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `Ad_g u`, the cocycle for the conjugated representation.
    pub fn conjugate(&self, g: &Mat3) -> Self {
        let gi = linalg::inverse(g);
        Cocycle { values: self.values.iter().map(|(k, m)| (*k, g * m * gi)).collect() }
    }

    pub fn norm(&self) -> f64 {
        self.values.values().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_trace(&self) -> f64 {
        self.values.values().map(|m| m.trace().abs()).fold(0.0, f64::max)
    }
}

/// `u(w)` via `u(gh) = u(g) + Ad_g u(h)`.
pub fn extend(rep: &GroupRep, u: &Cocycle, w: &Word) -> Mat3 {
    let mut acc = Mat3::zeros();
    let mut pre = Mat3::identity();
    let mut pre_inv = Mat3::identity();
    for l in w.letters() {
        let (val, m, mi) = if l.exp > 0 {
            (u.get(l.gen), *rep.matrix(l.gen), *rep.matrix_inverse(l.gen))
        } else {
            let mi = *rep.matrix_inverse(l.gen);
            (-(mi * u.get(l.gen) * rep.matrix(l.gen)), mi, *rep.matrix(l.gen))
        };
        acc += pre * val * pre_inv;
        pre *= m;
        pre_inv = mi * pre_inv;
    }
    acc
}

pub fn extend_ring(rep: &GroupRep, u: &Cocycle, e: &GroupRingElement) -> Mat3 {
    let mut acc = Mat3::zeros();
    for (w, c) in e.terms() {
        let c = *c.numer() as f64 / *c.denom() as f64;
        acc += extend(rep, u, w) * c;
    }
    acc
}

/// `(dX)(v) = Ad_v X - X`
pub fn coboundary(rep: &GroupRep, x: &Mat3) -> Cocycle {
    let pr = PreciseRep::new(rep);
    let xd = precise::lift(x);
    let values = rep
        .generators()
        .into_iter()
        .map(|g| {
            let m = pr.matrix(g);
            (g, precise::lower(&(m * xd * precise::inverse(m) - xd)))
        })
        .collect();
    Cocycle { values }
}

/// `Ad_{rho(w)} - 1` as an 8x8 matrix.
fn ad_minus_one(rep: &GroupRep, w: &Word) -> DMatrix<f64> {
    let g = rep.evaluate(w);
    ad_matrix(&g, &linalg::inverse(&g)) - DMatrix::identity(DIM_G, DIM_G)
}

/// Linear map `u -> u(w)` on stacked coordinates (8 x 8n).
pub fn word_map(rep: &GroupRep, w: &Word) -> DMatrix<f64> {
    let gens = rep.generators();
    let mut out = DMatrix::zeros(DIM_G, DIM_G * gens.len());
    for (k, g) in gens.iter().enumerate() {
        let d = fox_derivative(w, *g);
        if !d.is_zero() {
            out.view_mut((0, k * DIM_G), (DIM_G, DIM_G)).copy_from(&rep.ad_ring(&d));
        }
    }
    out
}

/// Orthonormal basis (columns, in coordinates) of `ker sum_k Ad_s^k`.
pub fn torsion_subspace(rep: &GroupRep, cone: usize) -> Result<DMatrix<f64>, CocycleError> {
    torsion_subspace_with(rep, cone, RankPolicy::default())
}

pub fn torsion_subspace_with(rep: &GroupRep, cone: usize, policy: RankPolicy) -> Result<DMatrix<f64>, CocycleError> {
    let s = Generator::s(cone);
    let r = rep.signature().cone_order(cone) as usize;
    let m = rep.matrix(s);
    let a = ad_matrix(m, rep.matrix_inverse(s));
    let mut sum = DMatrix::zeros(DIM_G, DIM_G);
    let mut p = DMatrix::identity(DIM_G, DIM_G);
    for _ in 0..r {
        sum += &p;
        p = &a * p;
    }
    let svd = linalg::svd_full(&sum);
    let smax = svd.sigma[0];
    let ambiguous = svd.sigma.iter().any(|&x| x > policy.rel * smax && x < 1e-4 * smax);
    if ambiguous {
        return Err(CocycleError::DegenerateSpectrum(format!("{s}: no clear rank gap")));
    }
    let k = linalg::null_space(&sum, policy);
    if k.ncols() == 0 {
        return Err(CocycleError::DegenerateSpectrum(format!("{s}: trivial torsion subspace")));
    }
    Ok(k)
}

/// Orthonormal basis of `im(1 - Ad_{rho(w)})`.
pub fn boundary_image_subspace(rep: &GroupRep, w: &Word) -> Result<DMatrix<f64>, CocycleError> {
    let g = rep.evaluate(w);
    if (g - Mat3::identity()).norm() > 1e-12 {
        classify(&g, EIGEN_GAP_TOL)?;
    }
    Ok(linalg::range_space(&ad_minus_one(rep, w), RankPolicy::default()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SpaceKind {
    Z1,
    Z1ParBoundary,
    Z1ParCurves,
    B1,
    H1Complement,
}

#[derive(Debug, Clone)]
pub struct CocycleSpace {
    pub kind: SpaceKind,
    pub generators: Vec<Generator>,
    pub basis: Vec<Cocycle>,
}

impl CocycleSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis vectors as columns.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = DIM_G * self.generators.len();
        if self.basis.is_empty() {
            return DMatrix::zeros(n, 0);
        }
        DMatrix::from_columns(&self.basis.iter().map(|u| u.to_vector(&self.generators)).collect::<Vec<_>>())
    }

    fn from_columns(kind: SpaceKind, generators: Vec<Generator>, m: &DMatrix<f64>) -> Self {
        let basis = m.column_iter().map(|c| Cocycle::from_vector(&generators, c.as_slice())).collect();
        CocycleSpace { kind, generators, basis }
    }

    pub fn combine(&self, coefs: &[f64]) -> Cocycle {
        let mut out = Cocycle::zero(&self.generators);
        for (u, &c) in self.basis.iter().zip(coefs) {
            out = out.add(&u.scale(c));
        }
        out
    }

    /// Smallest singular value of the coordinate matrix.
    pub fn independence(&self) -> f64 {
        linalg::min_singular_ratio(&self.matrix()).0
    }
}

/// Stacked coordinates of the product of `g` factors and torsion subspaces.
fn torsion_product(rep: &GroupRep, policy: RankPolicy) -> Result<DMatrix<f64>, CocycleError> {
    let gens = rep.generators();
    let mut blocks = Vec::new();
    for g in &gens {
        blocks.push(if g.kind == GenKind::S {
            torsion_subspace_with(rep, g.index, policy)?
        } else {
            DMatrix::identity(DIM_G, DIM_G)
        });
    }
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut p = DMatrix::zeros(DIM_G * gens.len(), cols);
    let mut c = 0;
    for (k, b) in blocks.iter().enumerate() {
        p.view_mut((k * DIM_G, c), (DIM_G, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    Ok(p)
}

pub fn z1_basis(rep: &GroupRep) -> Result<CocycleSpace, CocycleError> {
    cocycle_space(rep, &[], SpaceKind::Z1, RankPolicy::default())
}

pub fn z1_par_basis(rep: &GroupRep, parabolic_words: &[Word]) -> Result<CocycleSpace, CocycleError> {
    cocycle_space(rep, parabolic_words, SpaceKind::Z1ParCurves, RankPolicy::default())
}

/// Parabolic at every boundary generator.
pub fn z1_par_boundary(rep: &GroupRep) -> Result<CocycleSpace, CocycleError> {
    let words: Vec<Word> = rep.presentation().boundary_generators().into_iter().map(Word::gen).collect();
    cocycle_space(rep, &words, SpaceKind::Z1ParBoundary, RankPolicy::default())
}

pub fn cocycle_space(
    rep: &GroupRep,
    parabolic_words: &[Word],
    kind: SpaceKind,
    policy: RankPolicy,
) -> Result<CocycleSpace, CocycleError> {
    let gens = rep.generators();
    let p = torsion_product(rep, policy)?;
    let rel = word_map(rep, &rep.presentation().relator()) * &p;
    let found = linalg::rank(&rel, policy);
    if found < DIM_G {
        return Err(CocycleError::RankDeficient { what: "relator map".into(), expected: DIM_G, found });
    }
    let mut rows = vec![rel];
    for w in parabolic_words {
        let g = rep.evaluate(w);
        classify(&g, EIGEN_GAP_TOL)?;
        let coker = linalg::cokernel_space(&ad_minus_one(rep, w), policy);
        rows.push(coker.transpose() * word_map(rep, w) * &p);
    }
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut a = DMatrix::zeros(total, p.ncols());
    let mut r0 = 0;
    for r in &rows {
        a.view_mut((r0, 0), (r.nrows(), r.ncols())).copy_from(r);
        r0 += r.nrows();
    }
    let k = linalg::null_space(&a, policy);
    let mut basis = p * k;
    polish(rep, &mut basis, parabolic_words, policy);
    Ok(CocycleSpace::from_columns(kind, gens, &basis))
}

/// One step of iterative refinement: residuals of every constraint are
/// measured in double-double and removed by a minimum-norm correction.
fn polish(rep: &GroupRep, basis: &mut DMatrix<f64>, parabolic_words: &[Word], policy: RankPolicy) {
    let gens = rep.generators();
    let pr = PreciseRep::new(rep);
    let mut words: Vec<(Word, Option<DMatrix<f64>>)> = rep.relators().into_iter().map(|(_, w)| (w, None)).collect();
    for w in parabolic_words {
        words.push((w.clone(), Some(linalg::cokernel_space(&ad_minus_one(rep, w), policy).transpose())));
    }
    let blocks: Vec<DMatrix<f64>> = words
        .iter()
        .map(|(w, c)| match c {
            Some(c) => c * word_map(rep, w),
            None => word_map(rep, w),
        })
        .collect();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut a = DMatrix::zeros(rows, basis.nrows());
    let mut r0 = 0;
    for b in &blocks {
        a.view_mut((r0, 0), (b.nrows(), b.ncols())).copy_from(b);
        r0 += b.nrows();
    }
    for mut col in basis.column_iter_mut() {
        let u = Cocycle::from_vector(&gens, col.as_slice());
        let mut res = DVector::zeros(rows);
        let mut r0 = 0;
        for (w, c) in &words {
            let val = coords(&precise::lower(&pr.extend(&u, w)));
            let val = match c {
                Some(c) => c * val,
                None => val,
            };
            res.rows_mut(r0, val.len()).copy_from(&val);
            r0 += val.len();
        }
        let delta = linalg::lstsq_min_norm(&a, &res, policy);
        col -= delta;
    }
}

pub fn b1_basis(rep: &GroupRep) -> Result<CocycleSpace, CocycleError> {
    let gens = rep.generators();
    let b = DMatrix::from_columns(
        &linalg::basis().iter().map(|e| coboundary(rep, e).to_vector(&gens)).collect::<Vec<_>>(),
    );
    let found = linalg::rank(&b, RankPolicy::default());
    if found < DIM_G {
        return Err(CocycleError::RankDeficient { what: "coboundary map".into(), expected: DIM_G, found });
    }
    Ok(CocycleSpace::from_columns(SpaceKind::B1, gens, &linalg::range_space(&b, RankPolicy::default())))
}

/// Orthogonal complement of `B1` inside `space`.
pub fn h1_complement(rep: &GroupRep, space: &CocycleSpace) -> Result<CocycleSpace, CocycleError> {
    let b = b1_basis(rep)?.matrix();
    let z = space.matrix();
    let proj = &z - &b * (b.transpose() * &z);
    let c = linalg::range_space(&proj, RankPolicy::default());
    let expected = space.dim().saturating_sub(DIM_G);
    if c.ncols() != expected {
        return Err(CocycleError::RankDeficient {
            what: "cocycle space modulo coboundaries".into(),
            expected,
            found: c.ncols(),
        });
    }
    Ok(CocycleSpace::from_columns(SpaceKind::H1Complement, space.generators.clone(), &c))
}

/// Max over relators of `|u(rel)|`.
pub fn relator_residual(rep: &GroupRep, u: &Cocycle) -> f64 {
    let pr = PreciseRep::new(rep);
    rep.relators().iter().map(|(_, w)| precise::frobenius(&pr.extend(u, w))).fold(0.0, f64::max)
}

/// `T = -(1/r) sum_{k=1}^{r-1} u(s^k)`.
pub fn solve_t(rep: &GroupRep, u: &Cocycle, cone: usize) -> Result<Mat3, CocycleError> {
    let s = Generator::s(cone);
    let r = rep.signature().cone_order(cone) as i64;
    let us = u.get(s);
    let viol = extend(rep, u, &Word::gen(s).pow(r)).norm();
    if viol > MEMBERSHIP_TOL * us.norm().max(1.0) {
        return Err(CocycleError::TorsionViolation { gen: s.name(), residual: viol });
    }
    let mut t = Mat3::zeros();
    for k in 1..r {
        t += extend(rep, u, &Word::gen(s).pow(k));
    }
    Ok(-t / r as f64)
}

/// Minimum-norm `X` with `(Ad_{rho(w)} - 1)X = u(w)`.
pub fn solve_x(rep: &GroupRep, u: &Cocycle, w: &Word) -> Result<Mat3, CocycleError> {
    let a = ad_minus_one(rep, w);
    let b = coords(&extend(rep, u, w));
    let x = linalg::lstsq_min_norm(&a, &b, RankPolicy::default());
    let residual = (&a * &x - &b).norm();
    if residual > MEMBERSHIP_TOL * b.norm().max(1.0) {
        return Err(CocycleError::NotParabolic { word: w.to_string(), residual });
    }
    Ok(from_coords(x.as_slice()))
}

/// `v -> u(inc(v))` on the piece generators.
pub fn restrict(rep: &GroupRep, u: &Cocycle, presentation: &Presentation, inc: &InclusionMap) -> Cocycle {
    let pr = PreciseRep::new(rep);
    let values = presentation
        .signature
        .generators()
        .into_iter()
        .map(|g| (g, precise::lower(&pr.extend(u, inc.get(g)))))
        .collect();
    Cocycle { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::fuchsian_triangle;
    use nalgebra::Vector3;

    #[test]
    fn extend_basics() {
        let rep = fuchsian_triangle(3, 3, 4).unwrap();
        let x = Mat3::new(0.1, 0.2, -0.3, 0.4, 0.5, 0.6, -0.7, 0.8, -0.6);
        let u = coboundary(&rep, &x);
        assert_eq!(extend(&rep, &u, &Word::identity()), Mat3::zeros());
        let s2 = Generator::s(2);
        assert!(extend(&rep, &u, &Word::from_letters([crate::words::Letter { gen: s2, exp: 1 }])).norm() > 0.0);
        let w: Word = "s1 s2^-1 s3 s1".parse().unwrap();
        let g = rep.evaluate(&w);
        let expect = g * x * linalg::inverse(&g) - x;
        assert!((extend(&rep, &u, &w) - expect).norm() < 1e-13);
        assert!(relator_residual(&rep, &u) < 1e-12);
    }

    #[test]
    fn torsion_dims() {
        let order2 = Mat3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0));
        let sig = crate::orbifold::OrbifoldSignature::new(0, 0, vec![2, 3, 7]);
        let tri = fuchsian_triangle(2, 3, 7).unwrap();
        let mut m = tri.matrices().clone();
        m.insert(Generator::s(1), order2);
        let rep = GroupRep::from_signature(&sig, m).unwrap();
        assert_eq!(torsion_subspace(&rep, 1).unwrap().ncols(), 4);
        assert_eq!(torsion_subspace(&tri, 2).unwrap().ncols(), 6);
        let mut m = tri.matrices().clone();
        m.insert(Generator::s(1), Mat3::identity());
        let bad = GroupRep::from_signature(&sig, m).unwrap();
        assert!(matches!(torsion_subspace(&bad, 1), Err(CocycleError::DegenerateSpectrum(_))));
    }

    #[test]
    fn boundary_image_dims() {
        let sig = crate::orbifold::OrbifoldSignature::new(0, 3, vec![]);
        let h = Mat3::from_diagonal(&Vector3::new(6.0, 0.5, 1.0 / 3.0));
        let mut m = BTreeMap::new();
        m.insert(Generator::z(1), h);
        m.insert(Generator::z(2), Mat3::identity());
        m.insert(Generator::z(3), linalg::inverse(&h));
        let rep = GroupRep::from_signature(&sig, m).unwrap();
        let im = boundary_image_subspace(&rep, &Word::gen(Generator::z(1))).unwrap();
        assert_eq!(im.ncols(), 6);
        let ker = linalg::null_space(&ad_minus_one(&rep, &Word::gen(Generator::z(1))), RankPolicy::default());
        let mut both = DMatrix::zeros(DIM_G, 8);
        both.view_mut((0, 0), (8, 6)).copy_from(&im);
        both.view_mut((0, 6), (8, 2)).copy_from(&ker);
        assert_eq!(linalg::rank(&both, RankPolicy::default()), 8);
        assert_eq!(boundary_image_subspace(&rep, &Word::gen(Generator::z(2))).unwrap().ncols(), 0);
    }

    #[test]
    fn solve_t_order_two() {
        let sig = crate::orbifold::OrbifoldSignature::new(0, 0, vec![2, 3, 7]);
        let rep = fuchsian_triangle(2, 3, 7).unwrap();
        let t = torsion_subspace(&rep, 1).unwrap();
        let a = from_coords(t.column(0).as_slice());
        let mut u = Cocycle::zero(&sig.generators());
        u.set(Generator::s(1), a);
        let tt = solve_t(&rep, &u, 1).unwrap();
        assert!((tt + a / 2.0).norm() < 1e-14);
        let s = rep.matrix(Generator::s(1));
        assert!((s * tt * linalg::inverse(s) - tt - a).norm() < 1e-12);
        assert_eq!(solve_t(&rep, &Cocycle::zero(&sig.generators()), 2).unwrap(), Mat3::zeros());
    }
}
