//! Finite quotients `F -> Q`.
//!
//! A quotient is a direct product of at most one abelian factor
//! (exponent sums mod `n`) and any number of permutation factors. Kernels
//! of such maps are the finite-index normal subgroups that generate the
//! profinite topology, so every basic open neighbourhood of `w` contains
//! `w * ker(Q)` for some `Q` built here.
//!
//! Elements are flat `u32` vectors: the abelian residues (one per free
//! generator) followed by the point maps of each permutation factor.
//! Products of elements compose left to right, so the image of a word
//! acts on points by reading the word from its first letter.

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Alphabet, Exponent, FactorPartition, FreeWord, Generator};

/// Default number of image elements any enumeration may visit.
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error("permutation table is not a bijection on 0..{degree}: {detail}")]
    NotBijective { degree: usize, detail: String },
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("expected {expected} generator images, found {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("abelian modulus must be at least 2 (got {0})")]
    ModulusTooSmall(u64),
    #[error("abelian modulus {0} does not fit in 32 bits")]
    ModulusTooLarge(u64),
    #[error("generator {0:?} is outside the partition")]
    ForeignGenerator(Generator),
    #[error("enumeration exceeded the cap of {0} elements")]
    CapExceeded(usize),
    #[error("quotients are over different partitions")]
    PartitionMismatch,
    #[error("element order does not fit in 64 bits")]
    OrderOverflow,
    #[error("image table: {0}")]
    Table(String),
}

/// A bijection of `0..degree`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<u32>,
}

impl Permutation {
    pub fn new(map: Vec<u32>) -> Result<Self, QuotientError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for (i, &x) in map.iter().enumerate() {
            let x = x as usize;
            if x >= n {
                return Err(QuotientError::NotBijective {
                    degree: n,
                    detail: format!("point {i} maps to {x}, out of range"),
                });
            }
            if seen[x] {
                return Err(QuotientError::NotBijective {
                    degree: n,
                    detail: format!("point {x} is hit twice"),
                });
            }
            seen[x] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(degree: usize) -> Self {
        Permutation {
            map: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from disjoint cycles, e.g. `&[&[0, 1, 2]]`.
    pub fn from_cycles(degree: usize, cycles: &[&[u32]]) -> Result<Self, QuotientError> {
        let mut map: Vec<u32> = (0..degree as u32).collect();
        for c in cycles {
            for (i, &p) in c.iter().enumerate() {
                if p as usize >= degree {
                    return Err(QuotientError::NotBijective {
                        degree,
                        detail: format!("cycle point {p} out of range"),
                    });
                }
                map[p as usize] = c[(i + 1) % c.len()];
            }
        }
        Self::new(map)
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.map[point] as usize
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.map
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation {
            map: self.map.iter().map(|&x| other.map[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// Cycles (including fixed points), each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        cycles_of(&self.map)
    }

    pub fn order(&self) -> Option<u64> {
        cycle_lcm(&self.map)
    }

    /// `self^e` by shifting along cycles; cost is independent of `|e|`.
    pub fn pow<E: Exponent>(&self, e: &E) -> Permutation {
        let mut map = self.map.clone();
        shift_cycles(&self.cycles(), e, &mut map, 0);
        Permutation { map }
    }
}

fn cycles_of(map: &[u32]) -> Vec<Vec<u32>> {
    let mut seen = vec![false; map.len()];
    let mut out = Vec::new();
    for start in 0..map.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut p = start;
        while !seen[p] {
            seen[p] = true;
            cycle.push(p as u32);
            p = map[p] as usize;
        }
        out.push(cycle);
    }
    out
}

fn checked_lcm(a: u64, b: u64) -> Option<u64> {
    let g = a.gcd(&b);
    (a / g).checked_mul(b)
}

fn cycle_lcm(map: &[u32]) -> Option<u64> {
    let mut seen = vec![false; map.len()];
    let mut order = 1u64;
    for start in 0..map.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut p = start;
        while !seen[p] {
            seen[p] = true;
            len += 1;
            p = map[p] as usize;
        }
        order = checked_lcm(order, len)?;
    }
    Some(order)
}

/// Writes `g^e` into `out[offset..]` given the cycles of `g`.
fn shift_cycles<E: Exponent>(cycles: &[Vec<u32>], e: &E, out: &mut [u32], offset: usize) {
    let mut by_len: HashMap<usize, usize> = HashMap::new();
    for c in cycles {
        let len = c.len();
        if len == 1 {
            out[offset + c[0] as usize] = c[0];
            continue;
        }
        let shift = *by_len.entry(len).or_insert_with(|| {
            e.mod_floor(&E::from_usize(len).expect("cycle length fits exponent type"))
                .to_usize()
                .expect("residue fits usize")
        });
        for (i, &p) in c.iter().enumerate() {
            out[offset + p as usize] = c[(i + shift) % len];
        }
    }
}

/// One permutation factor: an image for every free generator.
#[derive(Clone, Debug)]
pub struct PermFactor {
    images: Vec<Permutation>,
    cycles: Vec<Vec<Vec<u32>>>,
}

impl PartialEq for PermFactor {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
    }
}

impl Eq for PermFactor {}

impl PermFactor {
    fn new(images: Vec<Permutation>) -> Self {
        let cycles = images.iter().map(Permutation::cycles).collect();
        PermFactor { images, cycles }
    }

    pub fn degree(&self) -> usize {
        self.images.first().map_or(0, Permutation::degree)
    }

    pub fn images(&self) -> &[Permutation] {
        &self.images
    }

    fn is_trivial(&self) -> bool {
        self.images.iter().all(Permutation::is_identity)
    }
}

/// Image of a word in a [`FiniteQuotient`]; only meaningful with its quotient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuotientElement(Box<[u32]>);

impl QuotientElement {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// A homomorphism from the free group onto a finite group.
#[derive(Clone, Debug)]
pub struct FiniteQuotient {
    partition: FactorPartition,
    abelian: Option<u32>,
    factors: Vec<PermFactor>,
    cap: usize,
    gen_images: Vec<QuotientElement>,
    gen_inverses: Vec<QuotientElement>,
}

impl PartialEq for FiniteQuotient {
    fn eq(&self, other: &Self) -> bool {
        self.partition == other.partition
            && self.abelian == other.abelian
            && self.factors == other.factors
    }
}

impl Eq for FiniteQuotient {}

impl FiniteQuotient {
    fn assemble(
        partition: FactorPartition,
        abelian: Option<u32>,
        factors: Vec<PermFactor>,
        cap: usize,
    ) -> Self {
        let mut q = FiniteQuotient {
            partition,
            abelian,
            factors,
            cap,
            gen_images: Vec::new(),
            gen_inverses: Vec::new(),
        };
        q.gen_images = (0..partition.rank())
            .map(|i| q.run_image(i, &1i64))
            .collect();
        q.gen_inverses = q.gen_images.iter().map(|x| q.invert(x)).collect();
        q
    }

    /// Permutation quotient; `images` are indexed K ascending, then L ascending.
    pub fn permutation(
        partition: FactorPartition,
        images: Vec<Permutation>,
        cap: usize,
    ) -> Result<Self, QuotientError> {
        if images.len() != partition.rank() {
            return Err(QuotientError::ImageCount {
                expected: partition.rank(),
                found: images.len(),
            });
        }
        let degree = images[0].degree();
        if degree == 0 {
            return Err(QuotientError::NotBijective {
                degree,
                detail: "empty point set".into(),
            });
        }
        for p in &images {
            if p.degree() != degree {
                return Err(QuotientError::DegreeMismatch {
                    expected: degree,
                    found: p.degree(),
                });
            }
        }
        Ok(Self::assemble(
            partition,
            None,
            vec![PermFactor::new(images)],
            cap,
        ))
    }

    /// Exponent sums mod `n`; the image group is `(Z/n)^rank`.
    pub fn abelian(partition: FactorPartition, n: u64) -> Result<Self, QuotientError> {
        if n < 2 {
            return Err(QuotientError::ModulusTooSmall(n));
        }
        let n32 = u32::try_from(n).map_err(|_| QuotientError::ModulusTooLarge(n))?;
        Ok(Self::assemble(
            partition,
            Some(n32),
            Vec::new(),
            DEFAULT_CAP,
        ))
    }

    pub fn trivial(partition: FactorPartition) -> Self {
        let images = vec![Permutation::identity(1); partition.rank()];
        Self::assemble(partition, None, vec![PermFactor::new(images)], DEFAULT_CAP)
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn partition(&self) -> FactorPartition {
        self.partition
    }

    pub fn abelian_modulus(&self) -> Option<u64> {
        self.abelian.map(u64::from)
    }

    pub fn perm_factors(&self) -> &[PermFactor] {
        &self.factors
    }

    /// Total number of permuted points across factors.
    pub fn degree(&self) -> usize {
        self.factors.iter().map(PermFactor::degree).sum()
    }

    fn abelian_width(&self) -> usize {
        if self.abelian.is_some() {
            self.partition.rank()
        } else {
            0
        }
    }

    fn width(&self) -> usize {
        self.abelian_width() + self.degree()
    }

    pub fn identity(&self) -> QuotientElement {
        let mut data = vec![0u32; self.width()];
        let mut off = self.abelian_width();
        for f in &self.factors {
            for i in 0..f.degree() {
                data[off + i] = i as u32;
            }
            off += f.degree();
        }
        QuotientElement(data.into_boxed_slice())
    }

    pub fn is_identity(&self, x: &QuotientElement) -> bool {
        *x == self.identity()
    }

    /// `x` first, then `y`.
    pub fn compose(&self, x: &QuotientElement, y: &QuotientElement) -> QuotientElement {
        let mut out = vec![0u32; x.0.len()];
        let aw = self.abelian_width();
        if let Some(n) = self.abelian {
            for (o, (&xi, &yi)) in out[..aw].iter_mut().zip(x.0.iter().zip(y.0.iter())) {
                *o = ((xi as u64 + yi as u64) % n as u64) as u32;
            }
        }
        let mut off = aw;
        for f in &self.factors {
            let d = f.degree();
            for i in 0..d {
                let xi = x.0[off + i] as usize;
                out[off + i] = y.0[off + xi];
            }
            off += d;
        }
        QuotientElement(out.into_boxed_slice())
    }

    pub fn invert(&self, x: &QuotientElement) -> QuotientElement {
        let mut out = vec![0u32; x.0.len()];
        let aw = self.abelian_width();
        if let Some(n) = self.abelian {
            for (o, &xi) in out[..aw].iter_mut().zip(x.0.iter()) {
                *o = (n - xi) % n;
            }
        }
        let mut off = aw;
        for f in &self.factors {
            for i in 0..f.degree() {
                let xi = x.0[off + i] as usize;
                out[off + xi] = i as u32;
            }
            off += f.degree();
        }
        QuotientElement(out.into_boxed_slice())
    }

    /// Abelian residues of an element, if the quotient has an abelian factor.
    pub fn residues<'a>(&self, x: &'a QuotientElement) -> Option<&'a [u32]> {
        self.abelian.map(|_| &x.0[..self.partition.rank()])
    }

    /// Point map of permutation factor `i` (points local to the factor).
    pub fn factor_map(&self, x: &QuotientElement, i: usize) -> Vec<u32> {
        let mut off = self.abelian_width();
        for f in &self.factors[..i] {
            off += f.degree();
        }
        let d = self.factors[i].degree();
        x.0[off..off + d].to_vec()
    }

    fn run_image<E: Exponent>(&self, flat: usize, e: &E) -> QuotientElement {
        let mut data = self.identity().0.into_vec();
        if let Some(n) = self.abelian {
            let r = e
                .mod_floor(&E::from_u32(n).expect("modulus fits exponent type"))
                .to_u32()
                .expect("residue fits u32");
            data[flat] = r;
        }
        let mut off = self.abelian_width();
        for f in &self.factors {
            shift_cycles(&f.cycles[flat], e, &mut data, off);
            off += f.degree();
        }
        QuotientElement(data.into_boxed_slice())
    }

    /// Homomorphic image of `w`; runs are powered through their cycle lengths,
    /// so `a^(20!)` costs the same as `a`.
    pub fn image<E: Exponent>(&self, w: &FreeWord<E>) -> Result<QuotientElement, QuotientError> {
        let mut acc = self.identity();
        for (g, e) in w.runs() {
            let flat = self
                .partition
                .flat_index(*g)
                .ok_or(QuotientError::ForeignGenerator(*g))?;
            let x = if e.is_one() {
                self.gen_images[flat].clone()
            } else {
                self.run_image(flat, e)
            };
            acc = self.compose(&acc, &x);
        }
        Ok(acc)
    }

    pub fn generator_image(&self, g: Generator) -> Result<&QuotientElement, QuotientError> {
        let flat = self
            .partition
            .flat_index(g)
            .ok_or(QuotientError::ForeignGenerator(g))?;
        Ok(&self.gen_images[flat])
    }

    pub fn in_kernel<E: Exponent>(&self, w: &FreeWord<E>) -> Result<bool, QuotientError> {
        Ok(self.is_identity(&self.image(w)?))
    }

    pub fn coset_equal<E: Exponent>(
        &self,
        u: &FreeWord<E>,
        v: &FreeWord<E>,
    ) -> Result<bool, QuotientError> {
        Ok(self.image(u)? == self.image(v)?)
    }

    /// Order of a group element, from cycle lengths and residues.
    pub fn order_of(&self, x: &QuotientElement) -> Result<u64, QuotientError> {
        let mut order = 1u64;
        if let Some(n) = self.abelian {
            let g = x.0[..self.abelian_width()]
                .iter()
                .fold(n as u64, |acc, &r| acc.gcd(&(r as u64)));
            order = n as u64 / g;
        }
        let mut off = self.abelian_width();
        for f in &self.factors {
            let d = f.degree();
            let o = cycle_lcm(&x.0[off..off + d]).ok_or(QuotientError::OrderOverflow)?;
            order = checked_lcm(order, o).ok_or(QuotientError::OrderOverflow)?;
            off += d;
        }
        Ok(order)
    }

    /// Least `e >= 1` with `w^e` in the kernel.
    pub fn element_order<E: Exponent>(&self, w: &FreeWord<E>) -> Result<u64, QuotientError> {
        self.order_of(&self.image(w)?)
    }

    /// Size of the image group, i.e. the index of the kernel.
    pub fn quotient_order(&self) -> Result<u64, QuotientError> {
        if self.factors.is_empty() {
            let n = self.abelian.expect("quotient has a factor") as u64;
            return n
                .checked_pow(self.partition.rank() as u32)
                .ok_or(QuotientError::OrderOverflow);
        }
        Ok(self.explore(&self.cayley_steps(), None, None)?.len() as u64)
    }

    /// Images of the free generators, then of their inverses, in generator order.
    pub fn cayley_steps(&self) -> Vec<QuotientElement> {
        self.gen_images
            .iter()
            .chain(&self.gen_inverses)
            .cloned()
            .collect()
    }

    /// Word labelling step `i` of [`cayley_steps`](Self::cayley_steps).
    pub fn cayley_step_word<E: Exponent>(&self, i: usize) -> FreeWord<E> {
        let rank = self.partition.rank();
        let g = self.partition.generator(i % rank);
        if i < rank {
            FreeWord::letter(g)
        } else {
            FreeWord::run(g, -E::one())
        }
    }

    /// Breadth-first exploration from the identity.
    ///
    /// Steps are tried in the given order, so depths and parent pointers are
    /// reproducible. Stops at `max_depth`, when `target` is reached, or fails
    /// once more than `cap` elements are visited.
    pub fn explore(
        &self,
        steps: &[QuotientElement],
        max_depth: Option<usize>,
        target: Option<&QuotientElement>,
    ) -> Result<Exploration, QuotientError> {
        let mut ex = Exploration::default();
        ex.push(self.identity(), None, 0);
        if target.is_some_and(|t| self.is_identity(t)) {
            return Ok(ex);
        }
        let mut head = 0;
        while head < ex.elements.len() {
            let depth = ex.depth[head];
            if max_depth.is_some_and(|m| depth >= m) {
                break;
            }
            for (si, s) in steps.iter().enumerate() {
                let next = self.compose(&ex.elements[head], s);
                if ex.index.contains_key(&next) {
                    continue;
                }
                if ex.elements.len() >= self.cap {
                    return Err(QuotientError::CapExceeded(self.cap));
                }
                let hit = target == Some(&next);
                ex.push(next, Some((head, si)), depth + 1);
                if hit {
                    return Ok(ex);
                }
            }
            head += 1;
        }
        Ok(ex)
    }

    /// Word-metric distance from the identity to `image(w)` in the Cayley
    /// graph on the images of all free generators and their inverses.
    pub fn cayley_distance<E: Exponent>(&self, w: &FreeWord<E>) -> Result<usize, QuotientError> {
        let target = self.image(w)?;
        let ex = self.explore(&self.cayley_steps(), w.letter_count(), Some(&target))?;
        Ok(ex
            .distance(&target)
            .expect("a word's own path bounds its distance"))
    }

    /// Distance to `image(w)` if it is at most `radius`.
    pub fn distance_within<E: Exponent>(
        &self,
        w: &FreeWord<E>,
        radius: usize,
    ) -> Result<Option<usize>, QuotientError> {
        let target = self.image(w)?;
        let ex = self.explore(&self.cayley_steps(), Some(radius), Some(&target))?;
        Ok(ex.distance(&target))
    }

    /// Cayley ball of the given radius around the identity.
    pub fn ball(&self, radius: usize) -> Result<Exploration, QuotientError> {
        self.explore(&self.cayley_steps(), Some(radius), None)
    }

    /// Steps for the subgroup generated by `gens`: their images, then inverses.
    pub fn subgroup_steps<E: Exponent>(
        &self,
        gens: &[FreeWord<E>],
    ) -> Result<Vec<QuotientElement>, QuotientError> {
        let images = gens
            .iter()
            .map(|g| self.image(g))
            .collect::<Result<Vec<_>, _>>()?;
        let inverses: Vec<_> = images.iter().map(|x| self.invert(x)).collect();
        Ok(images.into_iter().chain(inverses).collect())
    }

    /// Order of the image of `<gens>`, i.e. `[<gens> : <gens> ∩ ker]`.
    pub fn subgroup_image_order<E: Exponent>(
        &self,
        gens: &[FreeWord<E>],
    ) -> Result<usize, QuotientError> {
        Ok(self.explore(&self.subgroup_steps(gens)?, None, None)?.len())
    }

    /// Quotient whose kernel is the intersection of both kernels.
    pub fn direct_product(&self, other: &FiniteQuotient) -> Result<FiniteQuotient, QuotientError> {
        if self.partition != other.partition {
            return Err(QuotientError::PartitionMismatch);
        }
        let mut factors: Vec<PermFactor> = Vec::new();
        let abelian = match (self.abelian, other.abelian) {
            (Some(a), Some(b)) => match u32::try_from((a as u64).lcm(&(b as u64))) {
                Ok(m) => Some(m),
                Err(_) => {
                    factors.push(abelian_block_factor(self.partition, b));
                    Some(a)
                }
            },
            (a, b) => a.or(b),
        };
        for f in self.factors.iter().chain(&other.factors) {
            if !f.is_trivial() && !factors.contains(f) {
                factors.push(f.clone());
            }
        }
        if factors.is_empty() && abelian.is_none() {
            return Ok(Self::trivial(self.partition).with_cap(self.cap.max(other.cap)));
        }
        Ok(Self::assemble(
            self.partition,
            abelian,
            factors,
            self.cap.max(other.cap),
        ))
    }

    /// Sufficient structural test that `ker(self) ⊆ ker(coarser)`: every
    /// factor of `coarser` is trivial or reappears in `self`, and the
    /// abelian modulus of `coarser` divides that of `self`.
    pub fn structurally_refines(&self, coarser: &FiniteQuotient) -> bool {
        if self.partition != coarser.partition {
            return false;
        }
        let abelian_ok = match coarser.abelian {
            None => true,
            Some(m) => {
                self.abelian.is_some_and(|n| n % m == 0)
                    || self
                        .factors
                        .contains(&abelian_block_factor(self.partition, m))
            }
        };
        abelian_ok
            && coarser
                .factors
                .iter()
                .all(|f| f.is_trivial() || self.factors.contains(f))
    }

    pub fn to_repr(&self, alphabet: &Alphabet) -> QuotientRepr {
        let mut parts = Vec::new();
        if let Some(n) = self.abelian {
            parts.push(QuotientRepr::Abelian { modulus: n as u64 });
        }
        for f in &self.factors {
            let images = f
                .images
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    (
                        alphabet.name(self.partition.generator(i)).to_string(),
                        p.map.clone(),
                    )
                })
                .collect();
            parts.push(QuotientRepr::Perm {
                degree: f.degree(),
                images,
            });
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            QuotientRepr::Product { factors: parts }
        }
    }

    pub fn from_repr(
        repr: &QuotientRepr,
        alphabet: &Alphabet,
        cap: usize,
    ) -> Result<FiniteQuotient, QuotientError> {
        let p = alphabet.partition();
        let q = match repr {
            QuotientRepr::Abelian { modulus } => Self::abelian(p, *modulus)?,
            QuotientRepr::Perm { degree, images } => {
                let mut perms = Vec::with_capacity(p.rank());
                for g in p.generators() {
                    let name = alphabet.name(g);
                    let map = images.get(name).ok_or_else(|| {
                        QuotientError::Table(format!("missing image for `{name}`"))
                    })?;
                    if map.len() != *degree {
                        return Err(QuotientError::DegreeMismatch {
                            expected: *degree,
                            found: map.len(),
                        });
                    }
                    perms.push(Permutation::new(map.clone())?);
                }
                if let Some(extra) = images.keys().find(|k| alphabet.generator(k).is_none()) {
                    return Err(QuotientError::Table(format!("unknown generator `{extra}`")));
                }
                Self::permutation(p, perms, cap)?
            }
            QuotientRepr::Product { factors } => {
                if factors.is_empty() {
                    return Err(QuotientError::Table("empty product".into()));
                }
                let mut acc: Option<FiniteQuotient> = None;
                for f in factors {
                    if matches!(f, QuotientRepr::Product { .. }) {
                        return Err(QuotientError::Table("nested product".into()));
                    }
                    let q = Self::from_repr(f, alphabet, cap)?;
                    acc = Some(match acc {
                        None => q,
                        Some(a) => a.direct_product(&q)?,
                    });
                }
                acc.unwrap()
            }
        };
        Ok(q.with_cap(cap))
    }
}

/// `(Z/n)^rank` acting on `rank` disjoint `n`-cycles.
fn abelian_block_factor(p: FactorPartition, n: u32) -> PermFactor {
    let rank = p.rank();
    let degree = rank * n as usize;
    let images = (0..rank)
        .map(|g| {
            let mut map: Vec<u32> = (0..degree as u32).collect();
            for j in 0..n as usize {
                map[g * n as usize + j] = (g * n as usize + (j + 1) % n as usize) as u32;
            }
            Permutation { map }
        })
        .collect();
    PermFactor::new(images)
}

/// JSON form of a quotient. Permutation images are 0-indexed point maps
/// keyed by generator name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum QuotientRepr {
    #[serde(rename = "perm")]
    Perm {
        degree: usize,
        images: BTreeMap<String, Vec<u32>>,
    },
    #[serde(rename = "abelian")]
    Abelian { modulus: u64 },
    #[serde(rename = "product")]
    Product { factors: Vec<QuotientRepr> },
}

/// Result of a breadth-first search over a finite image group.
#[derive(Clone, Debug, Default)]
pub struct Exploration {
    elements: Vec<QuotientElement>,
    index: HashMap<QuotientElement, usize>,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
}

impl Exploration {
    fn push(&mut self, x: QuotientElement, parent: Option<(usize, usize)>, depth: usize) {
        self.index.insert(x.clone(), self.elements.len());
        self.elements.push(x);
        self.parent.push(parent);
        self.depth.push(depth);
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements in discovery order.
    pub fn elements(&self) -> &[QuotientElement] {
        &self.elements
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub fn position(&self, x: &QuotientElement) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn contains(&self, x: &QuotientElement) -> bool {
        self.index.contains_key(x)
    }

    pub fn distance(&self, x: &QuotientElement) -> Option<usize> {
        self.position(x).map(|i| self.depth[i])
    }

    /// Number of elements at depth at most `radius`.
    pub fn count_within(&self, radius: usize) -> usize {
        self.depth.iter().filter(|&&d| d <= radius).count()
    }

    /// Step indices leading from the identity to element `i`.
    pub fn path(&self, mut i: usize) -> Vec<usize> {
        let mut steps = Vec::new();
        while let Some((p, s)) = self.parent[i] {
            steps.push(s);
            i = p;
        }
        steps.reverse();
        steps
    }

    /// Discovery edge into element `i`: `(parent, step)`.
    pub fn parent(&self, i: usize) -> Option<(usize, usize)> {
        self.parent[i]
    }
}
