//! Stallings graphs of finitely generated subgroups and finite quotients
//! that separate a word from such a subgroup.
//!
//! Separation follows the classical proof that finitely generated
//! subgroups are closed: fold the subgroup's wedge of loops together with
//! the path of the excluded word, then complete every generator's partial
//! injection on the vertices to a permutation. The basepoint stabilizer of
//! the resulting action contains the subgroup and misses the word.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quotients::{FiniteQuotient, Permutation, QuotientError};
use crate::report::Report;
use crate::words::{Alphabet, Exponent, FactorPartition, FreeWord, Generator};

/// Longest word (in letters) that is expanded into a graph path.
pub const PATH_LIMIT: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeparationError {
    #[error("the word lies in the subgroup")]
    InSubgroup,
    #[error("the identity cannot be separated from the identity")]
    IdentityWord,
    #[error("word has more than {0} letters; cannot expand it into a graph path")]
    WordTooLong(usize),
    #[error("no separating quotient found in the bounded search")]
    SearchExhausted,
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

type Edge = (usize, Generator, usize);

/// A based, edge-labelled graph; vertex 0 is the basepoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StallingsGraph {
    vertex_count: usize,
    edges: BTreeSet<Edge>,
    folded: bool,
    out: BTreeMap<(usize, Generator), usize>,
    inc: BTreeMap<(usize, Generator), usize>,
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

impl StallingsGraph {
    /// An unfolded graph from raw edges.
    pub fn from_edges<I: IntoIterator<Item = Edge>>(vertex_count: usize, edges: I) -> Self {
        Self::assemble(vertex_count.max(1), edges.into_iter().collect(), false)
    }

    fn assemble(vertex_count: usize, edges: BTreeSet<Edge>, folded: bool) -> Self {
        let mut out = BTreeMap::new();
        let mut inc = BTreeMap::new();
        if folded {
            for &(u, g, v) in &edges {
                out.insert((u, g), v);
                inc.insert((v, g), u);
            }
        }
        StallingsGraph {
            vertex_count,
            edges,
            folded,
            out,
            inc,
        }
    }

    /// Folded graph of `<gens>`: a wedge of loops, one per generator, then folded.
    pub fn build<E: Exponent>(gens: &[FreeWord<E>]) -> Result<Self, SeparationError> {
        let mut g = Self::from_edges(1, []);
        for w in gens {
            g.adjoin(w, true)?;
        }
        Ok(g.fold())
    }

    /// Adds the path of `w` from the basepoint, closing it into a loop if asked.
    /// Returns the end vertex. The graph becomes unfolded.
    fn adjoin<E: Exponent>(
        &mut self,
        w: &FreeWord<E>,
        close: bool,
    ) -> Result<usize, SeparationError> {
        let letters = w
            .letters(PATH_LIMIT)
            .ok_or(SeparationError::WordTooLong(PATH_LIMIT))?;
        self.folded = false;
        self.out.clear();
        self.inc.clear();
        let mut cur = 0;
        for (i, &(g, positive)) in letters.iter().enumerate() {
            let next = if close && i + 1 == letters.len() {
                0
            } else {
                self.vertex_count += 1;
                self.vertex_count - 1
            };
            if positive {
                self.edges.insert((cur, g, next));
            } else {
                self.edges.insert((next, g, cur));
            }
            cur = next;
        }
        Ok(cur)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_folded(&self) -> bool {
        self.folded
    }

    /// Identifies edges sharing a label and a source (or a target) until each
    /// label is a partial injection. Vertices are renumbered by breadth-first
    /// order from the basepoint, so isomorphic results compare equal.
    pub fn fold(&self) -> StallingsGraph {
        if self.folded {
            return self.clone();
        }
        let n = self.vertex_count;
        let mut uf: Vec<usize> = (0..n).collect();
        let mut adj: Vec<HashMap<(Generator, bool), usize>> = vec![HashMap::new(); n];
        let mut pending: Vec<(usize, usize)> = Vec::new();

        fn attach(
            adj: &mut [HashMap<(Generator, bool), usize>],
            uf: &mut [usize],
            pending: &mut Vec<(usize, usize)>,
            at: usize,
            key: (Generator, bool),
            to: usize,
        ) {
            match adj[at].get(&key) {
                Some(&t0) => {
                    if find(uf, t0) != find(uf, to) {
                        pending.push((t0, to));
                    }
                }
                None => {
                    adj[at].insert(key, to);
                }
            }
        }

        for &(u, g, v) in &self.edges {
            attach(&mut adj, &mut uf, &mut pending, u, (g, true), v);
            attach(&mut adj, &mut uf, &mut pending, v, (g, false), u);
        }
        while let Some((x, y)) = pending.pop() {
            let (a, b) = (find(&mut uf, x), find(&mut uf, y));
            if a == b {
                continue;
            }
            let (keep, gone) = (a.min(b), a.max(b));
            uf[gone] = keep;
            let moved: Vec<_> = std::mem::take(&mut adj[gone]).into_iter().collect();
            for (key, t) in moved {
                attach(&mut adj, &mut uf, &mut pending, keep, key, t);
            }
        }

        let mut out: BTreeMap<usize, Vec<(Generator, bool, usize)>> = BTreeMap::new();
        for (v, edges) in adj.iter().enumerate().take(n) {
            if find(&mut uf, v) != v {
                continue;
            }
            let mut nbrs: Vec<(Generator, bool, usize)> =
                edges.iter().map(|(&(g, dir), &t)| (g, dir, t)).collect();
            for nb in nbrs.iter_mut() {
                nb.2 = find(&mut uf, nb.2);
            }
            // outgoing labels before incoming ones, each in generator order
            nbrs.sort_by_key(|&(g, dir, _)| (!dir, g));
            out.insert(v, nbrs);
        }

        let root = find(&mut uf, 0);
        let mut number: HashMap<usize, usize> = HashMap::new();
        number.insert(root, 0);
        let mut queue = VecDeque::from([root]);
        let mut edges = BTreeSet::new();
        while let Some(v) = queue.pop_front() {
            for &(_, _, t) in &out[&v] {
                if !number.contains_key(&t) {
                    number.insert(t, number.len());
                    queue.push_back(t);
                }
            }
        }
        for (v, nbrs) in &out {
            let Some(&nv) = number.get(v) else { continue };
            for &(g, dir, t) in nbrs {
                if dir {
                    edges.insert((nv, g, number[&t]));
                }
            }
        }
        Self::assemble(number.len(), edges, true)
    }

    /// Follows `w` from `start`; `None` if some edge is missing.
    ///
    /// Long runs are shortened once the walk along a label revisits a vertex,
    /// so huge exponents cost at most one lap around the cycle.
    pub fn trace<E: Exponent>(&self, start: usize, w: &FreeWord<E>) -> Option<usize> {
        let graph;
        let g = if self.folded {
            self
        } else {
            graph = self.fold();
            &graph
        };
        let mut cur = start;
        for (gen, e) in w.runs() {
            let map = if e.is_positive() { &g.out } else { &g.inc };
            let total = e.abs();
            let mut seen: HashMap<usize, usize> = HashMap::new();
            let mut step = 0usize;
            loop {
                let done = E::from_usize(step).expect("step fits exponent type");
                if done >= total {
                    break;
                }
                if let Some(&first) = seen.get(&cur) {
                    let cycle = step - first;
                    let left = (total.clone() - done)
                        .mod_floor(&E::from_usize(cycle).expect("cycle fits exponent type"))
                        .to_usize()
                        .expect("residue fits usize");
                    for _ in 0..left {
                        cur = *map.get(&(cur, *gen))?;
                    }
                    break;
                }
                seen.insert(cur, step);
                cur = *map.get(&(cur, *gen))?;
                step += 1;
            }
        }
        Some(cur)
    }

    /// Whether `w` reads a closed path at the basepoint, i.e. lies in the subgroup.
    pub fn membership<E: Exponent>(&self, w: &FreeWord<E>) -> bool {
        self.trace(0, w) == Some(0)
    }

    /// Extends each label's partial injection to a permutation of the vertices,
    /// pairing unmatched sources with unmatched targets in ascending order.
    pub fn complete(&self, partition: FactorPartition) -> Vec<Permutation> {
        let g = self.fold();
        let n = g.vertex_count;
        partition
            .generators()
            .map(|gen| {
                let mut map = vec![u32::MAX; n];
                let mut hit = vec![false; n];
                for (v, slot) in map.iter_mut().enumerate() {
                    if let Some(&t) = g.out.get(&(v, gen)) {
                        *slot = t as u32;
                        hit[t] = true;
                    }
                }
                let free_targets: Vec<usize> = (0..n).filter(|&t| !hit[t]).collect();
                let free_sources = (0..n).filter(|&v| map[v] == u32::MAX).collect::<Vec<_>>();
                for (s, t) in free_sources.into_iter().zip(free_targets) {
                    map[s] = t as u32;
                }
                Permutation::new(map).expect("completion of a partial injection is a bijection")
            })
            .collect()
    }

    /// DOT rendering; the basepoint is double-circled.
    pub fn to_dot(&self, alphabet: &Alphabet) -> String {
        let mut s = String::from("digraph stallings {\n  rankdir=LR;\n");
        for v in 0..self.vertex_count {
            let shape = if v == 0 { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  {v} [shape={shape}];");
        }
        for &(u, g, v) in &self.edges {
            let _ = writeln!(s, "  {u} -> {v} [label=\"{}\"];", alphabet.name(g));
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessKind {
    /// Generator images fix point 0 of the first permutation factor; the
    /// excluded word's image moves it.
    #[serde(rename = "basepoint-moved")]
    BasepointMoved,
    /// Generators map to the identity; the excluded word does not.
    #[serde(rename = "image-differs")]
    ImageDiffers,
}

/// A finite quotient witnessing that `excluded` lies outside a closed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationCertificate<E> {
    pub quotient: FiniteQuotient,
    pub subgroup_gens: Vec<FreeWord<E>>,
    pub excluded: FreeWord<E>,
    pub witness_kind: WitnessKind,
}

/// Finite quotient whose basepoint stabilizer contains `<gens>` but not `w`.
pub fn separate_from_subgroup<E: Exponent>(
    partition: FactorPartition,
    gens: &[FreeWord<E>],
    w: &FreeWord<E>,
) -> Result<SeparationCertificate<E>, SeparationError> {
    for word in gens.iter().chain(std::iter::once(w)) {
        if let Some(g) = word.support().into_iter().find(|g| !partition.contains(*g)) {
            return Err(QuotientError::ForeignGenerator(g).into());
        }
    }
    let mut graph = StallingsGraph::from_edges(1, []);
    for h in gens {
        graph.adjoin(h, true)?;
    }
    graph.adjoin(w, false)?;
    let folded = graph.fold();
    if folded.membership(w) {
        return Err(SeparationError::InSubgroup);
    }
    let images = folded.complete(partition);
    let quotient = FiniteQuotient::permutation(partition, images, crate::quotients::DEFAULT_CAP)?;
    Ok(SeparationCertificate {
        quotient,
        subgroup_gens: gens.to_vec(),
        excluded: w.clone(),
        witness_kind: WitnessKind::BasepointMoved,
    })
}

/// Finite quotient in which `w` has nontrivial image.
///
/// Tries, in order: an abelian quotient (when some exponent sum is nonzero),
/// the Stallings path construction, and a seeded search over small random
/// permutation images for words too long to expand.
pub fn separate_from_identity<E: Exponent>(
    partition: FactorPartition,
    w: &FreeWord<E>,
) -> Result<SeparationCertificate<E>, SeparationError> {
    separate_from_identity_seeded(partition, w, 0)
}

/// [`separate_from_identity`] with an explicit seed for the random search.
pub fn separate_from_identity_seeded<E: Exponent>(
    partition: FactorPartition,
    w: &FreeWord<E>,
    seed: u64,
) -> Result<SeparationCertificate<E>, SeparationError> {
    if w.is_identity() {
        return Err(SeparationError::IdentityWord);
    }
    let certificate = |quotient, kind| SeparationCertificate {
        quotient,
        subgroup_gens: Vec::new(),
        excluded: w.clone(),
        witness_kind: kind,
    };
    for g in w.support() {
        let sum = w.exponent_sum(g);
        if !sum.is_zero() {
            let n = smallest_non_divisor(&sum);
            let q = FiniteQuotient::abelian(partition, n)?;
            return Ok(certificate(q, WitnessKind::ImageDiffers));
        }
    }
    match separate_from_subgroup(partition, &[], w) {
        Err(SeparationError::WordTooLong(_)) => {}
        other => return other,
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..4000usize {
        let degree = 3 + attempt % 6;
        let images = (0..partition.rank())
            .map(|_| {
                let mut map: Vec<u32> = (0..degree as u32).collect();
                map.shuffle(&mut rng);
                Permutation::new(map).expect("shuffle is a bijection")
            })
            .collect();
        let q = FiniteQuotient::permutation(partition, images, crate::quotients::DEFAULT_CAP)?;
        if !q.in_kernel(w)? {
            return Ok(certificate(q, WitnessKind::ImageDiffers));
        }
    }
    Err(SeparationError::SearchExhausted)
}

/// Least `n >= 2` not dividing `x` (`x != 0`).
pub fn smallest_non_divisor<E: Exponent>(x: &E) -> u64 {
    let mut n = 2u64;
    loop {
        let m = E::from_u64(n).expect("small modulus fits exponent type");
        if !x.mod_floor(&m).is_zero() {
            return n;
        }
        n += 1;
    }
}

/// Recomputes every image from scratch; never re-runs the search.
pub fn verify_separation<E: Exponent>(c: &SeparationCertificate<E>, alphabet: &Alphabet) -> Report {
    let mut report = Report::new();
    let q = &c.quotient;
    let tables_ok = q
        .perm_factors()
        .iter()
        .flat_map(|f| f.images())
        .all(|p| Permutation::new(p.as_slice().to_vec()).is_ok());
    report.check(
        "quotient-table",
        None,
        None,
        tables_ok,
        "permutation tables are bijections",
    );
    if c.witness_kind == WitnessKind::BasepointMoved && q.perm_factors().is_empty() {
        report.fail("basepoint", "basepoint witness needs a permutation factor");
        return report;
    }
    let judge = |w: &FreeWord<E>| -> Result<bool, QuotientError> {
        let x = q.image(w)?;
        Ok(match c.witness_kind {
            WitnessKind::BasepointMoved => q.factor_map(&x, 0)[0] == 0,
            WitnessKind::ImageDiffers => q.is_identity(&x),
        })
    };
    let (keep, drop) = match c.witness_kind {
        WitnessKind::BasepointMoved => ("generator-fixes-basepoint", "excluded-moves-basepoint"),
        WitnessKind::ImageDiffers => ("generator-in-kernel", "excluded-outside-kernel"),
    };
    for (i, h) in c.subgroup_gens.iter().enumerate() {
        match judge(h) {
            Ok(ok) => report.check(keep, Some(i), None, ok, alphabet.format(h)),
            Err(e) => report.check(keep, Some(i), None, false, e.to_string()),
        };
    }
    match judge(&c.excluded) {
        Ok(inside) => report.check(drop, None, None, !inside, alphabet.format(&c.excluded)),
        Err(e) => report.check(drop, None, None, false, e.to_string()),
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::HashSet;

    type W = FreeWord<i64>;

    const A: Generator = Generator::k(0);
    const B: Generator = Generator::l(0);

    fn p11() -> FactorPartition {
        FactorPartition::new(1, 1).unwrap()
    }

    fn al() -> Alphabet {
        Alphabet::default_for(p11())
    }

    fn w(s: &str) -> W {
        al().parse(s).unwrap()
    }

    /// All products of at most `len` generators or inverses.
    fn brute_force_subgroup(gens: &[W], len: usize) -> HashSet<W> {
        let mut steps: Vec<W> = gens.to_vec();
        steps.extend(gens.iter().map(W::inverse));
        let mut all = HashSet::from([W::identity()]);
        let mut frontier = vec![W::identity()];
        for _ in 0..len {
            let mut next = Vec::new();
            for x in &frontier {
                for s in &steps {
                    let y = x.multiply(s);
                    if all.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        all
    }

    #[test]
    fn build_examples() {
        let g = StallingsGraph::build::<i64>(&[]).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
        let g = StallingsGraph::build(&[w("a")]).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![&(0, A, 0)]);
        let g = StallingsGraph::build(&[w("a^2"), w("b")]).unwrap();
        assert_eq!(g.vertex_count(), 2);
        let edges: Vec<_> = g.edges().copied().collect();
        assert_eq!(edges, vec![(0, A, 1), (0, B, 0), (1, A, 0)]);
        assert!(g.membership(&w("a^2")) && g.membership(&w("b")));
    }

    #[test]
    fn fold_examples() {
        let g = StallingsGraph::build(&[w("a^2"), w("b")]).unwrap();
        assert_eq!(g.fold(), g);
        let parallel = StallingsGraph::from_edges(3, [(0, A, 1), (0, A, 2)]);
        let folded = parallel.fold();
        assert_eq!(folded.vertex_count(), 2);
        assert_eq!(folded.edge_count(), 1);
        assert!(folded.is_folded());
    }

    #[test]
    fn membership_examples() {
        let g = StallingsGraph::build(&[w("a^2"), w("b")]).unwrap();
        assert!(g.membership(&W::identity()));
        let brute = brute_force_subgroup(&[w("a^2"), w("b")], 4);
        assert!(!brute.contains(&w("a")));
        assert!(!g.membership(&w("a")));
        assert!(brute.contains(&w("a^2 b a^-2")));
        assert!(g.membership(&w("a^2 b a^-2")));
    }

    #[test]
    fn membership_with_huge_exponents() {
        let g = StallingsGraph::build(&[w("a^3"), w("b")]).unwrap();
        let f20: BigInt = (1..=20u32).map(BigInt::from).product();
        let big = FreeWord::<BigInt>::run(A, f20.clone());
        assert!(g.membership(&big));
        let off = FreeWord::<BigInt>::run(A, f20 + 1);
        assert!(!g.membership(&off));
    }

    #[test]
    fn separate_from_subgroup_examples() {
        let c = separate_from_subgroup(p11(), &[w("a")], &w("b")).unwrap();
        assert_eq!(c.quotient.degree(), 2);
        let img = |s: &str| c.quotient.factor_map(&c.quotient.image(&w(s)).unwrap(), 0);
        assert_eq!(img("a"), vec![0, 1]);
        assert_eq!(img("b"), vec![1, 0]);
        assert!(verify_separation(&c, &al()).passed());

        let c = separate_from_subgroup(p11(), &[], &w("a")).unwrap();
        assert_eq!(c.quotient.degree(), 2);
        assert_eq!(
            c.quotient
                .factor_map(&c.quotient.image(&w("a")).unwrap(), 0),
            vec![1, 0]
        );

        let c = separate_from_subgroup(p11(), &[w("a^2"), w("b")], &w("a")).unwrap();
        let q = &c.quotient;
        assert_ne!(q.factor_map(&q.image(&w("a")).unwrap(), 0)[0], 0);
        assert_eq!(q.factor_map(&q.image(&w("a^2")).unwrap(), 0)[0], 0);
        assert_eq!(q.factor_map(&q.image(&w("b")).unwrap(), 0)[0], 0);
        assert!(verify_separation(&c, &al()).passed());

        assert_eq!(
            separate_from_subgroup(p11(), &[w("a^2"), w("b")], &w("b a^2")),
            Err(SeparationError::InSubgroup)
        );
    }

    #[test]
    fn separate_from_identity_examples() {
        let c = separate_from_identity(p11(), &w("a")).unwrap();
        assert_eq!(c.quotient.abelian_modulus(), Some(2));
        let comm = w("a b a^-1 b^-1");
        let c = separate_from_identity(p11(), &comm).unwrap();
        assert!(!c.quotient.in_kernel(&comm).unwrap());
        let q = &c.quotient;
        let ab = q.compose(q.generator_image(A).unwrap(), q.generator_image(B).unwrap());
        let ba = q.compose(q.generator_image(B).unwrap(), q.generator_image(A).unwrap());
        assert_ne!(ab, ba);
        let c = separate_from_identity(p11(), &w("a^120")).unwrap();
        assert_eq!(c.quotient.abelian_modulus(), Some(7));
        assert_eq!(c.quotient.element_order(&w("a")).unwrap(), 7);
        assert!(!c.quotient.in_kernel(&w("a^120")).unwrap());
        assert_eq!(
            separate_from_identity(p11(), &W::identity()),
            Err(SeparationError::IdentityWord)
        );
    }

    #[test]
    fn separate_huge_commutator_by_search() {
        let f20: BigInt = (1..=20u32).map(BigInt::from).product();
        let x = FreeWord::<BigInt>::run(A, f20.clone() + 1);
        let y = FreeWord::<BigInt>::letter(B);
        let comm = x.multiply(&y).multiply(&x.inverse()).multiply(&y.inverse());
        let c = separate_from_identity(p11(), &comm).unwrap();
        assert_eq!(c.witness_kind, WitnessKind::ImageDiffers);
        assert!(verify_separation(&c, &al()).passed());
    }

    #[test]
    fn verify_detects_corruption() {
        let mut c = separate_from_subgroup(p11(), &[w("a^2"), w("b")], &w("a")).unwrap();
        assert!(verify_separation(&c, &al()).passed());
        c.excluded = w("b");
        let r = verify_separation(&c, &al());
        assert!(!r.passed());
        assert_eq!(r.failed_clauses(), vec!["excluded-moves-basepoint"]);
    }

    #[test]
    fn dot_export() {
        let g = StallingsGraph::build(&[w("a^2"), w("b")]).unwrap();
        let dot = g.to_dot(&al());
        assert!(dot.contains("0 [shape=doublecircle]"));
        assert!(dot.contains("0 -> 1 [label=\"a\"]"));
    }

    fn random_graph(rng: &mut impl Rng) -> (usize, Vec<Edge>) {
        let n = rng.gen_range(1..=12);
        let mut edges = Vec::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            let g = if rng.gen() { A } else { B };
            if rng.gen() {
                edges.push((u, g, v));
            } else {
                edges.push((v, g, u));
            }
        }
        for _ in 0..rng.gen_range(0..6) {
            let g = if rng.gen() { A } else { B };
            edges.push((rng.gen_range(0..n), g, rng.gen_range(0..n)));
        }
        (n, edges)
    }

    fn random_word(rng: &mut impl Rng, max_len: usize) -> W {
        let len = rng.gen_range(1..=max_len);
        W::reduce((0..len).map(|_| {
            let g = if rng.gen() { A } else { B };
            (g, if rng.gen() { 1 } else { -1 })
        }))
    }

    proptest! {
        #[test]
        fn folding_is_idempotent_and_confluent(seed in 0u64..10_000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (n, mut edges) = random_graph(&mut rng);
            let g1 = StallingsGraph::from_edges(n, edges.clone()).fold();
            prop_assert_eq!(g1.fold(), g1.clone());
            // relabel vertices (keeping the basepoint) and shuffle: a different fold order
            let mut perm: Vec<usize> = (1..n).collect();
            perm.shuffle(&mut rng);
            perm.insert(0, 0);
            edges.shuffle(&mut rng);
            let relabelled: Vec<Edge> = edges.iter().map(|&(u, g, v)| (perm[u], g, perm[v])).collect();
            let g2 = StallingsGraph::from_edges(n, relabelled).fold();
            prop_assert_eq!(g1, g2);
        }

        #[test]
        fn membership_matches_brute_force(seed in 0u64..10_000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gens: Vec<W> = (0..rng.gen_range(1..=3)).map(|_| random_word(&mut rng, 4)).collect();
            let g = StallingsGraph::build(&gens).unwrap();
            let brute = brute_force_subgroup(&gens, 3);
            for x in &brute {
                prop_assert!(g.membership(x));
            }
            for _ in 0..20 {
                let x = random_word(&mut rng, 6);
                if g.membership(&x) {
                    continue;
                }
                prop_assert!(!brute.contains(&x));
                let c = separate_from_subgroup(p11(), &gens, &x).unwrap();
                prop_assert!(c.quotient.degree() <= g.vertex_count() + x.letter_count().unwrap());
                prop_assert!(verify_separation(&c, &al()).passed());
            }
        }
    }
}
