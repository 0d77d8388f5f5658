//! Sample representations used by the verification suites.

use std::collections::BTreeMap;

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cocycle::{self, CocycleSpace};
use crate::linalg::{expm, from_coords, inverse, Mat3, DIM_G};
use crate::orbifold::OrbifoldSignature;
use crate::rep::{self, ConeSeed, GroupRep, RepError};
use crate::words::Generator;

/// Genus-two Fuchsian representation from the regular octagon with angles
/// `pi/4` and side pairing `a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1`, refined onto
/// the relation variety.
pub fn genus2_fuchsian() -> GroupRep {
    // center to side midpoint
    let r_mid = (1.0 / (PI / 8.0).tan()).acosh();
    let e = (r_mid / 2.0).tanh();
    let half_turn = |k: usize| {
        let t = k as f64 * PI / 4.0;
        let g = rep::disk_translation([e * t.cos(), e * t.sin()]);
        g * rep::rotation(PI) * inverse(&g)
    };
    // side j onto side k, reversing its direction
    let pairing = |j: usize, k: usize| half_turn(k) * rep::rotation((k as f64 - j as f64) * PI / 4.0);
    let sig = OrbifoldSignature::new(2, 0, vec![]);
    let mut m = BTreeMap::new();
    m.insert(Generator::x(1), pairing(2, 0));
    m.insert(Generator::y(1), inverse(&pairing(3, 1)));
    m.insert(Generator::x(2), pairing(6, 4));
    m.insert(Generator::y(2), inverse(&pairing(7, 5)));
    let raw = GroupRep::from_signature(&sig, m).expect("all generators");
    rep::newton_refine(&raw).unwrap_or(raw)
}

pub fn cone_sphere_2233() -> Result<GroupRep, RepError> {
    rep::fuchsian_cone_sphere(&[2, 2, 3, 3], &ConeSeed::symmetric(4, 0.5))
}

pub fn triangle_237() -> Result<GroupRep, RepError> {
    rep::fuchsian_triangle(2, 3, 7)
}

fn random_sl3(rng: &mut ChaCha8Rng, scale: f64) -> Mat3 {
    let c: Vec<f64> = (0..DIM_G).map(|_| rng.gen_range(-scale..scale)).collect();
    expm(&from_coords(&c))
}

/// Pants group with hyperbolic boundary holonomy in general position.
pub fn pants_generic(seed: u64) -> GroupRep {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = OrbifoldSignature::new(0, 3, vec![]);
    loop {
        let d1 = Mat3::from_diagonal(&Vector3::new(3.0, 1.2, 1.0 / 3.6));
        let d2 = Mat3::from_diagonal(&Vector3::new(2.5, 0.9, 1.0 / 2.25));
        let g1 = random_sl3(&mut rng, 0.8);
        let g2 = random_sl3(&mut rng, 0.8);
        let z1 = g1 * d1 * inverse(&g1);
        let z2 = g2 * d2 * inverse(&g2);
        let z3 = inverse(&(z1 * z2));
        if rep::classify(&z3, 1e-3).is_err() {
            continue;
        }
        let mut m = BTreeMap::new();
        m.insert(Generator::z(1), z1);
        m.insert(Generator::z(2), z2);
        m.insert(Generator::z(3), z3);
        let out = GroupRep::from_signature(&sig, m).expect("all generators");
        if out.centralizer_gap() > 1e-3 {
            return out;
        }
    }
}

/// A representation moved off the Fuchsian locus along a seeded random
/// cocycle, followed in small steps so each refinement starts close to the
/// relation variety.
pub fn deformed(base: &GroupRep, seed: u64, t: f64) -> Result<GroupRep, RepError> {
    const STEPS: usize = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = |r: &GroupRep| {
        cocycle::z1_basis(r).map_err(|e| match e {
            cocycle::CocycleError::Rep(r) => r,
            other => RepError::NotHyperbolic(other.to_string()),
        })
    };
    let z = space(base)?;
    let coefs: Vec<f64> = (0..z.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut u = z.combine(&coefs);
    let mut cur = base.clone();
    for _ in 0..STEPS {
        let n = u.norm().max(1e-300);
        cur = rep::deform(&cur, &u.scale(1.0 / n), t / STEPS as f64)?;
        // carry the direction to the new tangent space
        let z = space(&cur)?;
        let q = z.matrix();
        let gens = z.generators.clone();
        let c = q.transpose() * u.to_vector(&gens);
        u = cocycle::Cocycle::from_vector(&gens, (q * c).as_slice());
    }
    Ok(cur)
}

pub fn random_combination(space: &CocycleSpace, rng: &mut impl Rng) -> cocycle::Cocycle {
    let c: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    space.combine(&c)
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub rep: GroupRep,
}

/// The representations every pairing suite runs over.
pub fn standard() -> Result<Vec<CorpusEntry>, RepError> {
    let g2 = genus2_fuchsian();
    let c = cone_sphere_2233()?;
    let entries = vec![
        CorpusEntry { name: "genus2-fuchsian".into(), rep: g2.clone() },
        CorpusEntry { name: "genus2-deformed".into(), rep: deformed(&g2, 11, 0.4)? },
        CorpusEntry { name: "s2-2233-fuchsian".into(), rep: c.clone() },
        CorpusEntry { name: "s2-2233-deformed".into(), rep: deformed(&c, 12, 0.4)? },
        CorpusEntry { name: "s2-237".into(), rep: triangle_237()? },
        CorpusEntry { name: "pants-generic".into(), rep: pants_generic(13) },
    ];
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus2_relation_holds() {
        let g = genus2_fuchsian();
        assert!(g.relation_residual() < 1e-10, "{}", g.relation_residual());
        let j = rep::minkowski();
        for m in g.matrices().values() {
            assert!((m.transpose() * j * m - j).norm() < 1e-8);
        }
        assert!(g.centralizer_gap() > 1e-3);
    }

    #[test]
    fn pants_is_generic() {
        let p = pants_generic(13);
        assert!(p.relation_residual() < 1e-12);
    }
}
