//! Coproducts and coequalizers of W-structures, and finite colimits of
//! Cu-structures as the γ-completion of the W-colimit.

use crate::completions::{compose, gamma_complete, iota, is_morphism, Map, MorphismKind};
use crate::error::{Error, Result};
use crate::ordered::{check_cu_axioms, check_w_axioms, Structure};
use crate::relation::Relation;

/// Mixed-radix encoding of tuples; the first coordinate varies slowest.
#[derive(Clone, Debug)]
pub struct Tuples {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Tuples {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        let mut strides = vec![1; sizes.len()];
        let mut total: usize = 1;
        for i in (0..sizes.len()).rev() {
            strides[i] = total;
            total = total
                .checked_mul(sizes[i])
                .filter(|&t| t <= 1 << 20)
                .ok_or_else(|| Error::Budget("product carrier exceeds 2^20 elements".into()))?;
        }
        Ok(Tuples { sizes: sizes.to_vec(), strides, total })
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn encode(&self, t: &[usize]) -> usize {
        t.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn coord(&self, k: usize, i: usize) -> usize {
        (k / self.strides[i]) % self.sizes[i]
    }

    pub fn decode(&self, k: usize) -> Vec<usize> {
        (0..self.sizes.len()).map(|i| self.coord(k, i)).collect()
    }
}

pub(crate) fn tuple_label(parts: impl IntoIterator<Item = impl AsRef<str>>) -> String {
    let inner: Vec<String> = parts.into_iter().map(|p| p.as_ref().to_string()).collect();
    format!("({})", inner.join(","))
}

/// Componentwise monoid on the product carrier, with componentwise order and
/// (if `with_aux`) componentwise auxiliary relation.
pub(crate) fn componentwise(family: &[Structure], with_aux: bool) -> Result<(Structure, Tuples)> {
    let sizes: Vec<usize> = family.iter().map(Structure::len).collect();
    let tuples = Tuples::new(&sizes)?;
    let n = tuples.len();
    let labels = (0..n)
        .map(|k| tuple_label(family.iter().enumerate().map(|(i, s)| s.label(tuples.coord(k, i)))))
        .collect();
    let zero = tuples.encode(&family.iter().map(Structure::zero).collect::<Vec<_>>());
    let mut add = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let t: Vec<usize> =
                family.iter().enumerate().map(|(i, s)| s.add(tuples.coord(a, i), tuples.coord(b, i))).collect();
            add.push(tuples.encode(&t));
        }
    }
    let all = |f: &dyn Fn(&Structure, usize, usize) -> bool, a: usize, b: usize| {
        family.iter().enumerate().all(|(i, s)| f(s, tuples.coord(a, i), tuples.coord(b, i)))
    };
    let leq = Relation::from_fn(n, |a, b| all(&|s, x, y| s.leq(x, y), a, b));
    let aux = with_aux.then(|| Relation::from_fn(n, |a, b| all(&|s, x, y| s.aux(x, y), a, b)));
    Ok((Structure::new(labels, zero, add, leq, aux)?, tuples))
}

/// The direct sum of finite W-structures with componentwise auxiliary relation,
/// and the injections.
pub fn w_coproduct(family: &[Structure]) -> Result<(Structure, Vec<Map>)> {
    for s in family {
        if let Err(v) = check_w_axioms(s)? {
            return Err(Error::Rejected(format!("W axioms fail: {} at {:?}", v.law, v.labels(s))));
        }
    }
    let (sum, tuples) = componentwise(family, true)?;
    let injections = family
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.elements()
                .map(|x| {
                    let mut t: Vec<usize> = family.iter().map(Structure::zero).collect();
                    t[i] = x;
                    tuples.encode(&t)
                })
                .collect()
        })
        .collect();
    Ok((sum, injections))
}

/// A parallel pair of W-morphisms `φ, ψ: source → target`.
#[derive(Clone, Debug)]
pub struct WMorphismPair {
    pub source: Structure,
    pub target: Structure,
    pub phi: Map,
    pub psi: Map,
}

impl WMorphismPair {
    pub fn new(source: Structure, target: Structure, phi: Map, psi: Map) -> Result<Self> {
        for (name, f) in [("phi", &phi), ("psi", &psi)] {
            if !is_morphism(&source, &target, f, MorphismKind::W) {
                return Err(Error::Rejected(format!("{name} is not a W-morphism")));
            }
        }
        Ok(WMorphismPair { source, target, phi, psi })
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Coequalizer `η: T → T/∼` of a W-morphism pair.
///
/// `∼` is generated by `z + φ(a) + ψ(b) ∼ z + φ(b) + ψ(a)`; `[x] ≺ [y]` is the
/// transitive closure of `x ∼ a ≺ b ∼ y`.
pub fn w_coequalizer(p: &WMorphismPair) -> Result<(Structure, Map)> {
    let (s, t) = (&p.source, &p.target);
    let mut uf = UnionFind((0..t.len()).collect());
    for z in t.elements() {
        for a in s.elements() {
            for b in s.elements() {
                let x = t.add(z, t.add(p.phi[a], p.psi[b]));
                let y = t.add(z, t.add(p.phi[b], p.psi[a]));
                uf.union(x, y);
            }
        }
    }
    let roots: Vec<usize> = t.elements().map(|x| uf.find(x)).collect();
    let mut reps: Vec<usize> = Vec::new();
    let mut eta = vec![0; t.len()];
    for x in t.elements() {
        match reps.iter().position(|&r| r == roots[x]) {
            Some(i) => eta[x] = i,
            None => {
                eta[x] = reps.len();
                reps.push(roots[x]);
            }
        }
    }
    let m = reps.len();
    let mut add = vec![usize::MAX; m * m];
    for x in t.elements() {
        for y in t.elements() {
            let k = eta[x] * m + eta[y];
            let v = eta[t.add(x, y)];
            if add[k] != usize::MAX && add[k] != v {
                return Err(Error::Internal("swap relation is not a congruence".into()));
            }
            add[k] = v;
        }
    }
    let aux = Relation::from_pairs(m, t.aux_relation().pairs().map(|(a, b)| (eta[a], eta[b]))).transitive_closure();
    let leq = Relation::from_pairs(m, t.leq_relation().pairs().map(|(a, b)| (eta[a], eta[b])))
        .transitive_closure()
        .reflexive_closure();
    let labels = reps.iter().map(|&r| t.label(r).to_string()).collect();
    let l = Structure::new(labels, eta[t.zero()], add, leq, Some(aux))?;
    Ok((l, eta))
}

/// A generating arrow of a diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
    pub map: Map,
}

/// A finite diagram of finite Cu-structures. `relations` lists pairs of
/// composable arrow paths (first arrow first) that must agree.
#[derive(Clone, Debug)]
pub struct Diagram {
    pub nodes: Vec<Structure>,
    pub arrows: Vec<Arrow>,
    pub relations: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Diagram {
    pub fn new(nodes: Vec<Structure>, arrows: Vec<Arrow>, relations: Vec<(Vec<usize>, Vec<usize>)>) -> Result<Self> {
        for (i, s) in nodes.iter().enumerate() {
            if let Err(v) = check_cu_axioms(s) {
                return Err(Error::Rejected(format!("node {i} fails {} at {:?}", v.law, v.labels(s))));
            }
        }
        for (k, a) in arrows.iter().enumerate() {
            if a.source >= nodes.len() || a.target >= nodes.len() {
                return Err(Error::Malformed(format!("arrow {k} has an endpoint outside the diagram")));
            }
            if !is_morphism(&nodes[a.source], &nodes[a.target], &a.map, MorphismKind::Cu) {
                return Err(Error::Rejected(format!("arrow {k} is not a Cu-morphism")));
            }
        }
        let d = Diagram { nodes, arrows, relations };
        for (p, q) in &d.relations {
            let (fp, sp, tp) = d.path(p)?;
            let (fq, sq, tq) = d.path(q)?;
            if (sp, tp) != (sq, tq) || fp != fq {
                return Err(Error::Rejected(format!("paths {p:?} and {q:?} do not commute")));
            }
        }
        Ok(d)
    }

    pub fn discrete(nodes: Vec<Structure>) -> Result<Self> {
        Self::new(nodes, vec![], vec![])
    }

    /// Composite map of a nonempty path with its source and target.
    pub fn path(&self, p: &[usize]) -> Result<(Map, usize, usize)> {
        let first = p.first().ok_or_else(|| Error::Malformed("empty path".into()))?;
        let a = self.arrows.get(*first).ok_or_else(|| Error::Malformed(format!("no arrow {first}")))?;
        let (mut f, src, mut tgt) = (a.map.clone(), a.source, a.target);
        for &k in &p[1..] {
            let b = self.arrows.get(k).ok_or_else(|| Error::Malformed(format!("no arrow {k}")))?;
            if b.source != tgt {
                return Err(Error::Malformed(format!("path {p:?} is not composable")));
            }
            f = compose(&f, &b.map);
            tgt = b.target;
        }
        Ok((f, src, tgt))
    }
}

#[derive(Clone, Debug)]
pub struct CuColimit {
    pub structure: Structure,
    /// Structure maps `σ_i` from each node.
    pub cocone: Vec<Map>,
}

/// γ of the W-colimit: the coproduct of the nodes coequalized along every arrow.
pub fn cu_colimit(d: &Diagram) -> Result<CuColimit> {
    let ws: Vec<Structure> = d.nodes.iter().map(iota).collect();
    let (mut current, injections) = w_coproduct(&ws)?;
    let mut q: Map = current.elements().collect();
    for a in &d.arrows {
        let phi = compose(&injections[a.source], &q);
        let psi = compose(&compose(&a.map, &injections[a.target]), &q);
        let pair = WMorphismPair::new(ws[a.source].clone(), current.clone(), phi, psi)?;
        let (next, eta) = w_coequalizer(&pair)?;
        q = compose(&q, &eta);
        current = next;
    }
    let g = gamma_complete(&current)?;
    let cocone = injections.iter().map(|inj| compose(&compose(inj, &q), &g.alpha)).collect();
    Ok(CuColimit { structure: g.structure, cocone })
}

/// Colimit with scale: `x` is in the scale iff every `x' ≪ x` lies below an
/// element of some pushed-forward node scale. On a finite carrier this is the
/// down-closure of the union of the images.
pub fn scaled_colimit(d: &Diagram, scales: &[Vec<bool>]) -> Result<(CuColimit, Vec<bool>)> {
    if scales.len() != d.nodes.len() || scales.iter().zip(&d.nodes).any(|(s, n)| s.len() != n.len()) {
        return Err(Error::Malformed("one scale per node, one flag per element".into()));
    }
    let c = cu_colimit(d)?;
    let s = &c.structure;
    let images: Vec<usize> = c
        .cocone
        .iter()
        .zip(scales)
        .flat_map(|(sigma, sc)| sc.iter().enumerate().filter(|(_, &b)| b).map(|(x, _)| sigma[x]).collect::<Vec<_>>())
        .collect();
    let wb = s.way_below_matrix();
    let scale = s
        .elements()
        .map(|x| s.elements().filter(|&x1| wb.get(x1, x)).all(|x1| images.iter().any(|&y| s.leq(x1, y))))
        .collect();
    Ok((c, scale))
}
