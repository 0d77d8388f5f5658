//! Graph-of-groups bookkeeping for a splitting, twist flows along its curves,
//! the moment map and the Hamiltonian check.
//!
//! Flows act on the ambient representation generator by generator. Each ambient
//! generator either lies in exactly one vertex group (possibly as the image of a
//! consumed boundary) or is the stable letter of a non-tree edge.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::cocycle::{Cocycle, CocycleError};
use crate::linalg::traceless_part;
use crate::precise::{self, Dd, DdMat, PreciseRep};
use crate::orbifold::{CurveData, OrbifoldError, OrbifoldSignature, SplittingSpec};
use crate::rep::{self, GroupRep, HypInvariants, Invariant, RepError, EIGEN_GAP_TOL};
use crate::symplectic;
use crate::words::{Generator, Word};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error(transparent)]
    InvalidSplitting(#[from] OrbifoldError),
    #[error("curve {0} is not part of the splitting")]
    NoSuchCurve(usize),
    #[error("flavor M is not available on curve {curve}, a full 1-suborbifold")]
    FlavorNotAvailable { curve: usize },
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    L,
    M,
}

impl Flavor {
    pub fn invariant(self) -> Invariant {
        match self {
            Flavor::L => Invariant::L,
            Flavor::M => Invariant::M,
        }
    }
}

/// A flow request: curve index into the splitting's curve list (from 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub curve: usize,
    pub flavor: Flavor,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    Tree,
    NonTree,
    /// Full 1-suborbifold inside a single vertex.
    Formal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub curve: usize,
    pub kind: EdgeKind,
    /// Initial vertex `xi^-`.
    pub minus: usize,
    /// Terminal vertex `xi^+`.
    pub plus: usize,
    pub e_plus: Word,
    pub e_minus: Word,
    pub e_perp: Option<Word>,
    /// Ambient generator carrying `e_perp`.
    pub stable_gen: Option<Generator>,
    /// Ambient generators conjugated by a full 1-suborbifold flow, with the
    /// word `w` such that the flow moves `rho(w g w^-1)` rather than `rho(g)`.
    pub cone_gens: Vec<(Generator, Word)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    Vertex(usize),
    Stable(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphOfGroups {
    pub vertices: Vec<OrbifoldSignature>,
    pub edges: Vec<Edge>,
    /// Parent of each vertex in the spanning tree rooted at vertex 0.
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    /// Where each ambient generator lives, keyed by generator name.
    pub location: BTreeMap<String, Location>,
    pub splitting: SplittingSpec,
}

impl GraphOfGroups {
    /// `a >= b` in the tree order rooted at vertex 0.
    pub fn ge(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(a);
        while let Some(v) = cur {
            if v == b {
                return true;
            }
            cur = self.parent[v];
        }
        false
    }

    pub fn edge_of_curve(&self, curve: usize) -> Result<&Edge, FlowError> {
        self.edges.iter().find(|e| e.curve == curve).ok_or(FlowError::NoSuchCurve(curve))
    }

    pub fn location(&self, g: Generator) -> Location {
        self.location[&g.name()]
    }

    pub fn curve_count(&self) -> usize {
        self.edges.len()
    }

    /// Curves that are simple closed curves, in curve order.
    pub fn scc_curves(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges.iter().filter(|e| e.kind != EdgeKind::Formal).map(|e| e.curve).collect();
        out.sort();
        out
    }
}

fn invalid(msg: String) -> FlowError {
    FlowError::InvalidSplitting(OrbifoldError::InvalidSplitting(msg))
}

/// Builds the graph of groups of a splitting. The spanning tree takes edges in
/// curve order and keeps each one that joins two new components.
pub fn build_graph(sig: &OrbifoldSignature, splitting: &SplittingSpec) -> Result<GraphOfGroups, FlowError> {
    if &splitting.ambient != sig {
        return Err(invalid("splitting was built for a different signature".into()));
    }
    let n = splitting.pieces.len();
    let incl = |pg: crate::orbifold::PieceGen| splitting.pieces[pg.piece].inclusion.get(pg.gen).clone();

    // union-find for the tree choice
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut Vec<usize>, x: usize) -> usize {
        if c[x] != x {
            let r = find(c, c[x]);
            c[x] = r;
        }
        c[x]
    }
    let mut in_tree = vec![false; splitting.curve_data.len()];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, d) in splitting.curve_data.iter().enumerate() {
        let ends = match d {
            CurveData::Separating { outer, inner, .. } => Some((outer.piece, inner.piece)),
            CurveData::NonSeparating { za, zb, .. } => Some((za.piece, zb.piece)),
            CurveData::Full { .. } => None,
        };
        if let Some((a, b)) = ends {
            let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
            if ra != rb {
                comp[ra] = rb;
                in_tree[c] = true;
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    let mut parent = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    depth[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                parent[w] = Some(v);
                queue.push_back(w);
            }
        }
    }
    if depth.contains(&usize::MAX) {
        return Err(invalid("pieces do not form a connected graph".into()));
    }

    let mut location: BTreeMap<String, Location> =
        splitting.owners.iter().map(|(g, pg)| (g.clone(), Location::Vertex(pg.piece))).collect();
    let mut edges = Vec::new();
    for (c, d) in splitting.curve_data.iter().enumerate() {
        let edge = match d {
            CurveData::Separating { outer, inner, .. } => {
                let (p, q) = if depth[outer.piece] < depth[inner.piece] { (*outer, *inner) } else { (*inner, *outer) };
                Edge {
                    curve: c,
                    kind: EdgeKind::Tree,
                    minus: p.piece,
                    plus: q.piece,
                    e_plus: incl(q),
                    e_minus: incl(p).inverse(),
                    e_perp: None,
                    stable_gen: None,
                    cone_gens: vec![],
                }
            }
            CurveData::NonSeparating { stable, stable_gen, za, zb, .. } => {
                if in_tree[c] {
                    return Err(invalid(format!("curve {c} with a stable letter landed in the spanning tree")));
                }
                // y = xi lives in the vertex carrying z_b = y^-1
                for g in d.xi().generators() {
                    location.entry(g.name()).or_insert(Location::Vertex(zb.piece));
                }
                location.insert(stable_gen.name(), Location::Stable(c));
                Edge {
                    curve: c,
                    kind: EdgeKind::NonTree,
                    minus: za.piece,
                    plus: zb.piece,
                    e_plus: incl(*zb),
                    e_minus: incl(*za).inverse(),
                    e_perp: Some(stable.clone()),
                    stable_gen: Some(*stable_gen),
                    cone_gens: vec![],
                }
            }
            CurveData::Full { z, first, second, cone_i, cone_j, between, .. } => {
                location.insert(Generator::s(*cone_i).name(), Location::Vertex(z.piece));
                location.insert(Generator::s(*cone_j).name(), Location::Vertex(z.piece));
                Edge {
                    curve: c,
                    kind: EdgeKind::Formal,
                    minus: z.piece,
                    plus: z.piece,
                    e_plus: second.multiply(first),
                    e_minus: second.multiply(first),
                    e_perp: None,
                    stable_gen: None,
                    cone_gens: vec![
                        (Generator::s(*cone_i), Word::identity()),
                        (Generator::s(*cone_j), between.clone()),
                    ],
                }
            }
        };
        // relations e+ = e- and e_perp e+ e_perp^-1 = e-
        let lhs = match &edge.e_perp {
            Some(p) => p.multiply(&edge.e_plus).multiply(&p.inverse()),
            None => edge.e_plus.clone(),
        };
        if lhs != edge.e_minus {
            return Err(invalid(format!("edge relation fails for curve {c}: {lhs} vs {}", edge.e_minus)));
        }
        edges.push(edge);
    }
    for g in sig.generators() {
        if !location.contains_key(&g.name()) {
            return Err(invalid(format!("generator {g} has no vertex")));
        }
    }
    Ok(GraphOfGroups {
        vertices: splitting.pieces.iter().map(|p| p.signature().clone()).collect(),
        edges,
        parent,
        depth,
        location,
        splitting: splitting.clone(),
    })
}

/// Eigenvalues of `h` polished by Newton steps on its characteristic
/// polynomial in double-double.
fn precise_eigenvalues(h: &DdMat, inv: &HypInvariants) -> [Dd; 3] {
    let tr = precise::trace(h);
    let c2 = (tr * tr - precise::trace_product(h, h)) * Dd::from(0.5);
    let det = precise::determinant(h);
    inv.eigenvalues.map(|l0| {
        let mut l = Dd::from(l0);
        for _ in 0..3 {
            let p = ((l - tr) * l + c2) * l - det;
            let dp = (Dd::from(3.0) * l - Dd::from(2.0) * tr) * l + c2;
            l -= precise::div(p, dp);
        }
        l
    })
}

/// `exp(t f^#(h))` written as the interpolation polynomial in `h`, so it
/// commutes with `h` to double-double precision.
fn flow_conjugator(h: &DdMat, inv: &HypInvariants, flavor: Flavor, t: f64) -> DdMat {
    let c: [f64; 3] = match flavor {
        Flavor::L => [1.0, 0.0, -1.0],
        Flavor::M => [-1.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0],
    };
    let lam = precise_eigenvalues(h, inv);
    let id = precise::identity();
    let mut out = precise::zero();
    for k in 0..3 {
        let mut p = id;
        for j in (0..3).filter(|&j| j != k) {
            p *= h - precise::scale(&id, lam[j]);
            p = precise::scale(&p, precise::div(Dd::from(1.0), lam[k] - lam[j]));
        }
        out += precise::scale(&p, Dd::from((c[k] * t).exp()));
    }
    out
}

fn check_flavor(graph: &GraphOfGroups, spec: &FlowSpec) -> Result<(), FlowError> {
    let edge = graph.edge_of_curve(spec.curve)?;
    if edge.kind == EdgeKind::Formal && spec.flavor == Flavor::M {
        return Err(FlowError::FlavorNotAvailable { curve: spec.curve });
    }
    Ok(())
}

/// Twist (`L`) or bulge (`M`) flow along one curve.
pub fn twist_flow(rep: &GroupRep, graph: &GraphOfGroups, spec: &FlowSpec) -> Result<GroupRep, FlowError> {
    check_flavor(graph, spec)?;
    let edge = graph.edge_of_curve(spec.curve)?;
    let inv = rep::classify(&rep.evaluate(&edge.e_plus), EIGEN_GAP_TOL)?;
    if spec.t == 0.0 {
        return Ok(rep.clone());
    }
    let pr = PreciseRep::new(rep);
    let c = flow_conjugator(&pr.evaluate(&edge.e_plus), &inv, spec.flavor, spec.t);
    let ci = precise::inverse(&c);
    let mut next = BTreeMap::new();
    for g in rep.generators() {
        let m = *pr.matrix(g);
        let moved = match edge.kind {
            EdgeKind::Tree => {
                let q = edge.plus;
                match graph.location(g) {
                    Location::Vertex(r) if graph.ge(r, q) => c * m * ci,
                    Location::Vertex(_) => m,
                    Location::Stable(r) => {
                        let e = graph.edge_of_curve(r)?;
                        match (graph.ge(e.plus, q), graph.ge(e.minus, q)) {
                            (true, true) => c * m * ci,
                            (true, false) => m * ci,
                            (false, true) => c * m,
                            (false, false) => m,
                        }
                    }
                }
            }
            EdgeKind::NonTree if Some(g) == edge.stable_gen => m * c,
            EdgeKind::NonTree => m,
            EdgeKind::Formal => match edge.cone_gens.iter().find(|(k, _)| *k == g) {
                // conjugating rho(w g w^-1) by c is conjugating rho(g) by w^-1 c w
                Some((_, w)) => {
                    let wm = pr.evaluate(w);
                    let wi = pr.evaluate_inverse(w);
                    wi * c * wm * m * wi * ci * wm
                }
                None => m,
            },
        };
        next.insert(g, moved);
    }
    Ok(rep.with_precise_matrices(&next))
}

/// `(ell_1, .., ell_m, m_1, .., m_{m0})` with the `m` entries over the simple
/// closed curves only, both in curve order.
pub fn moment_map(rep: &GroupRep, graph: &GraphOfGroups) -> Result<Vec<f64>, FlowError> {
    let mut order: Vec<&Edge> = graph.edges.iter().collect();
    order.sort_by_key(|e| e.curve);
    let mut ells = Vec::new();
    let mut ms = Vec::new();
    let pr = PreciseRep::new(rep);
    for e in order {
        let inv = rep::classify(&precise::lower(&pr.evaluate(&e.e_plus)), EIGEN_GAP_TOL)?;
        ells.push(inv.ell);
        if e.kind != EdgeKind::Formal {
            ms.push(inv.m);
        }
    }
    ells.extend(ms);
    Ok(ells)
}

/// The invariant a flow is generated by, evaluated at `rep`.
pub fn hamiltonian(rep: &GroupRep, graph: &GraphOfGroups, curve: usize, flavor: Flavor) -> Result<f64, FlowError> {
    let e = graph.edge_of_curve(curve)?;
    let h = precise::lower(&PreciseRep::new(rep).evaluate(&e.e_plus));
    Ok(rep::classify(&h, EIGEN_GAP_TOL)?.value(flavor.invariant()))
}

/// Tangent cocycle of the flow at `t = 0`, by central differences of step `h`.
pub fn flow_tangent(rep: &GroupRep, graph: &GraphOfGroups, spec: &FlowSpec, h: f64) -> Result<Cocycle, FlowError> {
    let fwd = twist_flow(rep, graph, &FlowSpec { t: h, ..*spec })?;
    let bwd = twist_flow(rep, graph, &FlowSpec { t: -h, ..*spec })?;
    let values = rep
        .generators()
        .into_iter()
        .map(|g| {
            let d = (fwd.matrix(g) - bwd.matrix(g)) / (2.0 * h);
            (g, traceless_part(&(d * rep.matrix_inverse(g))))
        })
        .collect();
    Ok(Cocycle::from_map(values))
}

/// Both sides of the Hamiltonian identity `omega(v, u_flow) = D_v f`.
pub fn hamiltonian_sides(
    rep: &GroupRep,
    graph: &GraphOfGroups,
    spec: &FlowSpec,
    v: &Cocycle,
    h: f64,
) -> Result<(f64, f64), FlowError> {
    check_flavor(graph, spec)?;
    let u = flow_tangent(rep, graph, spec, h)?;
    let lhs = symplectic::omega_closed_form(rep, v, &u)?;
    let fp = hamiltonian(&rep::deform(rep, v, h)?, graph, spec.curve, spec.flavor)?;
    let fm = hamiltonian(&rep::deform(rep, v, -h)?, graph, spec.curve, spec.flavor)?;
    Ok((lhs, (fp - fm) / (2.0 * h)))
}

/// `|omega(v, u_flow) - D_v f|`.
pub fn hamiltonian_residual(
    rep: &GroupRep,
    graph: &GraphOfGroups,
    spec: &FlowSpec,
    v: &Cocycle,
    h: f64,
) -> Result<f64, FlowError> {
    let (a, b) = hamiltonian_sides(rep, graph, spec, v, h)?;
    Ok((a - b).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle;
    use crate::corpus;
    use crate::linalg::from_coords;
    use crate::orbifold::{pants_decomposition, split, CurveSpec};

    fn genus2_graph(curves: &[CurveSpec]) -> (GroupRep, GraphOfGroups) {
        let rep = corpus::genus2_fuchsian();
        let sp = split(rep.signature(), curves).unwrap();
        let g = build_graph(rep.signature(), &sp).unwrap();
        (rep, g)
    }

    fn cone_graph() -> (GroupRep, GraphOfGroups) {
        let rep = corpus::cone_sphere_2233().unwrap();
        let sp = split(rep.signature(), &[CurveSpec::FullSuborbifold { i: 1, j: 2 }]).unwrap();
        let g = build_graph(rep.signature(), &sp).unwrap();
        (rep, g)
    }

    const SEP: CurveSpec = CurveSpec::SccSeparating { first: 1, last: 1 };
    const NONSEP: CurveSpec = CurveSpec::SccNonSeparating { handle: 1 };

    #[test]
    fn graph_shapes() {
        let (_, g) = genus2_graph(&[SEP]);
        assert_eq!((g.vertices.len(), g.edges.len()), (2, 1));
        assert_eq!(g.edges[0].kind, EdgeKind::Tree);
        let (_, g) = genus2_graph(&[NONSEP]);
        assert_eq!((g.vertices.len(), g.edges.len()), (1, 1));
        assert_eq!(g.edges[0].kind, EdgeKind::NonTree);
        assert!(g.edges[0].e_perp.is_some());
        let (_, g) = cone_graph();
        assert_eq!((g.vertices.len(), g.edges.len()), (1, 1));
        assert_eq!(g.edges[0].kind, EdgeKind::Formal);
        assert_eq!(g.edges[0].e_plus.to_string(), "s2 s1");
    }

    #[test]
    fn flow_at_zero_is_identity() {
        let (rep, g) = genus2_graph(&[SEP]);
        let out = twist_flow(&rep, &g, &FlowSpec { curve: 0, flavor: Flavor::L, t: 0.0 }).unwrap();
        assert_eq!(out.distance(&rep), 0.0);
    }

    #[test]
    fn flows_form_a_group_and_conserve_moments() {
        let cases = [genus2_graph(&[SEP]), genus2_graph(&[NONSEP]), cone_graph()];
        for (rep, g) in &cases {
            let before = moment_map(rep, g).unwrap();
            for flavor in [Flavor::L, Flavor::M] {
                let spec = FlowSpec { curve: 0, flavor, t: 0.9 };
                let Ok(whole) = twist_flow(rep, g, &spec) else {
                    assert_eq!(g.edges[0].kind, EdgeKind::Formal);
                    continue;
                };
                let a = twist_flow(rep, g, &FlowSpec { t: 0.4, ..spec }).unwrap();
                let ab = twist_flow(&a, g, &FlowSpec { t: 0.5, ..spec }).unwrap();
                assert!(whole.distance(&ab) < 1e-12, "{}", whole.distance(&ab));
                assert!(whole.relation_residual() <= 10.0 * rep.relation_residual().max(1e-15));
                let after = moment_map(&whole, g).unwrap();
                for (x, y) in before.iter().zip(&after) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn full_suborbifold_flow() {
        let (rep, g) = cone_graph();
        let spec = FlowSpec { curve: 0, flavor: Flavor::L, t: 1.3 };
        let out = twist_flow(&rep, &g, &spec).unwrap();
        assert!(out.relation_residual() < 1e-12);
        let w = Word::gen(Generator::s(1)).multiply(&Word::gen(Generator::s(2)));
        let ell = |r: &GroupRep| rep::classify(&r.evaluate(&w), EIGEN_GAP_TOL).unwrap().ell;
        assert!((ell(&rep) - ell(&out)).abs() < 1e-12);
        assert!(out.distance(&rep) > 1e-3);
        assert_eq!(
            twist_flow(&rep, &g, &FlowSpec { flavor: Flavor::M, ..spec }),
            Err(FlowError::FlavorNotAvailable { curve: 0 })
        );
    }

    #[test]
    fn fuchsian_bulge_invariants_vanish() {
        let (rep, g) = genus2_graph(&[SEP, NONSEP]);
        let mu = moment_map(&rep, &g).unwrap();
        assert_eq!(mu.len(), 4);
        assert!(mu[2].abs() < 1e-10 && mu[3].abs() < 1e-10);
        let z = cocycle::z1_basis(&rep).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let moved = rep::deform(&rep, &corpus::random_combination(&z, &mut rng), 0.05).unwrap();
        let nu = moment_map(&moved, &g).unwrap();
        assert!(mu.iter().zip(&nu).any(|(a, b)| (a - b).abs() > 1e-4));
    }

    #[test]
    fn disjoint_flows_commute() {
        let rep = corpus::genus2_fuchsian();
        let sp = pants_decomposition(rep.signature()).unwrap();
        let g = build_graph(rep.signature(), &sp).unwrap();
        let n = g.curve_count();
        for i in 0..n {
            for j in 0..n {
                let a = FlowSpec { curve: i, flavor: Flavor::L, t: 0.3 };
                let b = FlowSpec { curve: j, flavor: Flavor::M, t: -0.2 };
                let ab = twist_flow(&twist_flow(&rep, &g, &a).unwrap(), &g, &b).unwrap();
                let ba = twist_flow(&twist_flow(&rep, &g, &b).unwrap(), &g, &a).unwrap();
                assert!(ab.distance(&ba) < 1e-10, "{i} {j}: {}", ab.distance(&ba));
            }
        }
    }

    #[test]
    fn unmoved_pieces_are_untouched() {
        use rand::{Rng, SeedableRng};
        let (rep, g) = genus2_graph(&[SEP]);
        let out = twist_flow(&rep, &g, &FlowSpec { curve: 0, flavor: Flavor::L, t: 0.7 }).unwrap();
        let e = &g.edges[0];
        let moved: Vec<Generator> = rep.generators().into_iter().filter(|&x| rep.matrix(x) != out.matrix(x)).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for (v, piece) in g.splitting.pieces.iter().enumerate() {
            let a = rep.pullback(&piece.presentation, &piece.inclusion);
            let b = out.pullback(&piece.presentation, &piece.inclusion);
            if g.ge(v, e.plus) {
                let gens = piece.signature().generators();
                for _ in 0..20 {
                    let w = Word::from_letters((0..6).map(|_| {
                        let k = gens[rng.gen_range(0..gens.len())];
                        if rng.gen_bool(0.5) { Word::gen(k) } else { Word::gen_inv(k) }.letters()[0]
                    }));
                    // tr(x) and tr(x^-1) are the conjugation invariants in SL(3)
                    for w in [w.clone(), w.inverse()] {
                        let (x, y) = (a.evaluate(&w), b.evaluate(&w));
                        assert!((x.trace() - y.trace()).abs() < 1e-10 * x.norm());
                    }
                }
            } else {
                assert!(!moved.is_empty());
                for k in piece.signature().generators() {
                    let w = piece.inclusion.get(k);
                    if w.generators().all(|x| !moved.contains(&x)) {
                        assert_eq!(a.matrix(k), b.matrix(k));
                    } else {
                        // the shared boundary: fixed up to rounding
                        assert!((a.matrix(k) - b.matrix(k)).norm() < 1e-12 * a.matrix(k).norm());
                    }
                }
            }
        }
    }

    #[test]
    fn hamiltonian_identity() {
        for (rep, g) in [genus2_graph(&[SEP]), genus2_graph(&[NONSEP]), cone_graph()] {
            let z = cocycle::z1_basis(&rep).unwrap();
            let h1 = cocycle::h1_complement(&rep, &z).unwrap();
            let spec = FlowSpec { curve: 0, flavor: Flavor::L, t: 0.0 };
            for v in h1.basis.iter().take(2) {
                assert!(hamiltonian_residual(&rep, &g, &spec, v, 1e-4).unwrap() < 1e-5);
            }
            let dx = cocycle::coboundary(&rep, &from_coords(&[0.3, -0.1, 0.2, 0.5, -0.4, 0.1, 0.2, -0.3]));
            let (a, b) = hamiltonian_sides(&rep, &g, &spec, &dx, 1e-5).unwrap();
            assert!(a.abs() < 1e-6 && b.abs() < 1e-6, "{a} {b}");
        }
    }
}
