//! Inductive construction of a discrete closed set `S` whose product with
//! the free factor `<K>` is not closed.
//!
//! Step `n` holds a cumulative quotient `Q_n` (kernel `G_n`), an element
//! `r_n` of `<K>` far from the identity in `Q_n`, and `s_n = r_n b^e` with
//! `b` the first `L`-generator and `e` its order in `Q_n`. The natural maps
//! between the quotients are never materialised: preimage avoidance is a
//! coset test in the coarser quotient.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::quotients::{FiniteQuotient, Permutation, QuotientElement, QuotientError, DEFAULT_CAP};
use crate::report::Report;
use crate::words::{Alphabet, Factor, FactorPartition, Generator};
use crate::Word;

pub const DEFAULT_MAX_CANDIDATES: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Ex2Error {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("radius bound {bound} exceeds the enumeration cap {cap}")]
    RadiusTooLarge { bound: BigInt, cap: usize },
    #[error("quotient source exhausted at step {step}: {reason}")]
    SourceExhausted { step: usize, reason: String },
    #[error("no admissible r: every element of the <K>-image is excluded")]
    NoAdmissibleR,
    #[error("r is the empty word")]
    EmptyR,
    #[error("r is not a word in <K>")]
    NotKWord,
    #[error("step {0} is out of range")]
    StepOutOfRange(usize),
    #[error("witness check failed: {0}")]
    WitnessFailed(String),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

/// Where candidate quotients come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuotientSource {
    /// Random permutation quotients of degree 5 to 9 mixed with abelian
    /// quotients of modulus 2 to 13, drawn from a ChaCha8 stream.
    Seeded { seed: u64 },
    /// An explicit finite list, consumed in order.
    Fixed(Vec<FiniteQuotient>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ex2Params {
    pub partition: FactorPartition,
    pub steps: usize,
    /// `f(1), ..., f(N)`.
    pub f_values: Vec<u64>,
    pub source: QuotientSource,
    pub cap: usize,
    pub max_candidates: usize,
}

impl Ex2Params {
    /// `f(n) = n + 1`, seeded source, default caps.
    pub fn new(partition: FactorPartition, steps: usize, seed: u64) -> Self {
        Ex2Params {
            partition,
            steps,
            f_values: default_f(steps),
            source: QuotientSource::Seeded { seed },
            cap: DEFAULT_CAP,
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.source {
            QuotientSource::Seeded { seed } => Some(seed),
            QuotientSource::Fixed(_) => None,
        }
    }
}

pub fn default_f(steps: usize) -> Vec<u64> {
    (1..=steps as u64).map(|n| n + 1).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ex2Step {
    pub quotient: FiniteQuotient,
    pub r: Word,
    pub s: Word,
    pub e: u64,
    pub f_value: u64,
    /// `[<K> : H_n]`, the order of the `<K>`-image of `Q_n`.
    pub k_index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ex2Certificate {
    pub partition: FactorPartition,
    pub seed: Option<u64>,
    pub f_values: Vec<u64>,
    pub steps: Vec<Ex2Step>,
    pub reciprocal_sum: BigRational,
}

/// `2k(2k-1)^(f-1)`.
pub fn sphere_bound(k: usize, f: u64) -> BigInt {
    let k = BigInt::from(k);
    let base: BigInt = &k * 2 - 1;
    let exp = u32::try_from(f.saturating_sub(1)).expect("radius fits in u32");
    &k * 2 * num_traits::pow(base, exp as usize)
}

fn k_letters(p: FactorPartition) -> Vec<Word> {
    p.k_generators().map(Word::letter).collect()
}

/// The `L`-generator used to build `s`.
pub const B: Generator = Generator::l(0);

fn is_strictly_increasing(f: &[u64]) -> bool {
    f.windows(2).all(|w| w[0] < w[1])
}

fn step_word(k: usize, step: usize) -> Word {
    if step < k {
        Word::letter(Generator::k(step))
    } else {
        Word::run(Generator::k(step - k), -BigInt::one())
    }
}

fn path_word(k: usize, path: &[usize]) -> Word {
    Word::reduce(path.iter().flat_map(|&s| step_word(k, s).runs().to_vec()))
}

/// First admissible element of the `<K>`-image of `q` in BFS order.
///
/// Skips the closed Cayley ball of radius `f_next` in `q` and every element
/// whose coset in a forbidden quotient `Q_m` equals that of `r_m`.
pub fn choose_r(
    q: &FiniteQuotient,
    f_next: u64,
    forbidden: &[(&FiniteQuotient, &Word)],
) -> Result<Word, Ex2Error> {
    let p = q.partition();
    let kex = q.explore(&q.subgroup_steps(&k_letters(p))?, None, None)?;
    let ball = q.ball(f_next as usize)?;
    let targets = forbidden
        .iter()
        .map(|(qm, rm)| Ok((*qm, qm.image(*rm)?)))
        .collect::<Result<Vec<_>, QuotientError>>()?;
    for (i, x) in kex.elements().iter().enumerate() {
        if ball.contains(x) {
            continue;
        }
        let w = path_word(p.k_size(), &kex.path(i));
        let mut clash = false;
        for (qm, target) in &targets {
            if qm.image(&w)? == *target {
                clash = true;
                break;
            }
        }
        if !clash {
            return Ok(w);
        }
    }
    Err(Ex2Error::NoAdmissibleR)
}

/// Number of elements [`choose_r`] would accept.
pub fn admissible_count(
    q: &FiniteQuotient,
    f_next: u64,
    forbidden: &[(&FiniteQuotient, &Word)],
) -> Result<usize, Ex2Error> {
    let p = q.partition();
    let kex = q.explore(&q.subgroup_steps(&k_letters(p))?, None, None)?;
    let ball = q.ball(f_next as usize)?;
    let mut count = 0;
    for (i, x) in kex.elements().iter().enumerate() {
        if ball.contains(x) {
            continue;
        }
        let w = path_word(p.k_size(), &kex.path(i));
        let mut ok = true;
        for (qm, rm) in forbidden {
            if qm.coset_equal(&w, rm)? {
                ok = false;
                break;
            }
        }
        count += ok as usize;
    }
    Ok(count)
}

/// `s = r b^e` with `e` the order of the first `L`-generator in `q`.
pub fn make_s(r: &Word, q: &FiniteQuotient) -> Result<(Word, u64), Ex2Error> {
    if r.is_identity() {
        return Err(Ex2Error::EmptyR);
    }
    if !r.lies_in(Factor::K) {
        return Err(Ex2Error::NotKWord);
    }
    let b = B;
    let e = q.element_order(&Word::letter(b))?;
    Ok((r.multiply(&Word::run(b, BigInt::from(e))), e))
}

fn random_perm(rng: &mut ChaCha8Rng, degree: usize) -> Permutation {
    let mut map: Vec<u32> = (0..degree as u32).collect();
    map.shuffle(rng);
    Permutation::new(map).expect("shuffle is a bijection")
}

/// Candidate stream for a seeded source.
pub struct SeededCandidates {
    rng: ChaCha8Rng,
    partition: FactorPartition,
    cap: usize,
}

impl SeededCandidates {
    pub fn new(partition: FactorPartition, seed: u64, cap: usize) -> Self {
        SeededCandidates {
            rng: ChaCha8Rng::seed_from_u64(seed),
            partition,
            cap,
        }
    }
}

impl Iterator for SeededCandidates {
    type Item = FiniteQuotient;

    fn next(&mut self) -> Option<FiniteQuotient> {
        let q = if self.rng.gen_bool(0.5) {
            let n = self.rng.gen_range(2..=13u64);
            FiniteQuotient::abelian(self.partition, n).expect("modulus in range")
        } else {
            let degree = self.rng.gen_range(5..=9usize);
            let images = (0..self.partition.rank())
                .map(|_| random_perm(&mut self.rng, degree))
                .collect();
            FiniteQuotient::permutation(self.partition, images, self.cap)
                .expect("images share a degree")
        };
        Some(q.with_cap(self.cap))
    }
}

fn validate(p: &Ex2Params) -> Result<(), Ex2Error> {
    if p.steps == 0 {
        return Err(Ex2Error::Params("at least one step is required".into()));
    }
    if p.f_values.len() != p.steps {
        return Err(Ex2Error::Params(format!(
            "{} f values for {} steps",
            p.f_values.len(),
            p.steps
        )));
    }
    if p.f_values[0] < 1 {
        return Err(Ex2Error::Params("f(1) must be at least 1".into()));
    }
    if !is_strictly_increasing(&p.f_values) {
        return Err(Ex2Error::Params("f must be strictly increasing".into()));
    }
    let k = p.partition.k_size();
    let bound = sphere_bound(k, p.f_values[p.steps - 1] + 1);
    if bound > BigInt::from(p.cap) {
        return Err(Ex2Error::RadiusTooLarge { bound, cap: p.cap });
    }
    Ok(())
}

/// Budget on `[<K> : H_n]` at step `n` (1-based): `cap^(n/N)`.
fn index_budget(cap: usize, n: usize, steps: usize) -> usize {
    ((cap as f64).powf(n as f64 / steps as f64).floor() as usize).clamp(1, cap)
}

struct Accepted {
    quotient: FiniteQuotient,
    r: Word,
    k_index: u64,
}

fn try_candidate(
    prev: Option<&Ex2Step>,
    chain: &[Ex2Step],
    candidate: &FiniteQuotient,
    f: u64,
    sum: &BigRational,
    budget: usize,
    cap: usize,
) -> Result<Accepted, String> {
    let p = candidate.partition();
    let k = k_letters(p);
    let own = candidate
        .clone()
        .with_cap(budget)
        .subgroup_image_order(&k)
        .map_err(|e| format!("candidate: {e}"))? as u64;
    let prev_index = prev.map_or(1, |s| s.k_index);
    if num_integer::Integer::lcm(&own, &prev_index) > budget as u64 {
        return Err(format!("index exceeds budget {budget}"));
    }
    let q = match prev {
        Some(s) => s
            .quotient
            .direct_product(candidate)
            .map_err(|e| e.to_string())?,
        None => candidate.clone(),
    }
    .with_cap(budget);
    let idx = q
        .subgroup_image_order(&k)
        .map_err(|e| format!("product: {e}"))? as u64;
    if prev.is_none() {
        let bound = sphere_bound(p.k_size(), f);
        if BigInt::from(idx) <= bound {
            return Err(format!("index {idx} does not exceed step-1 bound {bound}"));
        }
    } else if idx <= prev_index {
        return Err(format!("index {idx} does not exceed {prev_index}"));
    }
    let new_sum = sum + BigRational::new(BigInt::one(), BigInt::from(idx));
    if new_sum >= BigRational::new(BigInt::one(), BigInt::from(2)) {
        return Err(format!("reciprocal sum {new_sum} reaches 1/2"));
    }
    let q = q.with_cap(cap);
    let kex = q
        .explore(
            &q.subgroup_steps(&k).map_err(|e| e.to_string())?,
            None,
            None,
        )
        .map_err(|e| e.to_string())?;
    let ball = q.ball(f as usize).map_err(|e| e.to_string())?;
    let near = kex.elements().iter().filter(|x| ball.contains(x)).count();
    let slack = BigRational::from_integer(BigInt::from(idx)) * (BigRational::one() - sum);
    if slack <= BigRational::from_integer(BigInt::from(near)) {
        return Err(format!(
            "no counting slack: {near} of {idx} within radius {f}"
        ));
    }
    let forbidden: Vec<(&FiniteQuotient, &Word)> =
        chain.iter().map(|s| (&s.quotient, &s.r)).collect();
    let r = choose_r(&q, f, &forbidden).map_err(|e| e.to_string())?;
    Ok(Accepted {
        quotient: q,
        r,
        k_index: idx,
    })
}

/// Runs the induction for `p.steps` steps.
pub fn construct_ex2(p: &Ex2Params) -> Result<Ex2Certificate, Ex2Error> {
    validate(p)?;
    let mut source: Box<dyn Iterator<Item = FiniteQuotient>> = match &p.source {
        QuotientSource::Seeded { seed } => {
            Box::new(SeededCandidates::new(p.partition, *seed, p.cap))
        }
        QuotientSource::Fixed(list) => Box::new(list.clone().into_iter()),
    };
    let mut steps: Vec<Ex2Step> = Vec::new();
    let mut sum = BigRational::zero();
    for n in 1..=p.steps {
        let f = p.f_values[n - 1];
        let budget = index_budget(p.cap, n, p.steps);
        let mut reason = String::from("no candidates");
        let mut accepted = None;
        for _ in 0..p.max_candidates {
            let Some(c) = source.next() else { break };
            if c.partition() != p.partition {
                return Err(QuotientError::PartitionMismatch.into());
            }
            match try_candidate(steps.last(), &steps, &c, f, &sum, budget, p.cap) {
                Ok(a) => {
                    accepted = Some(a);
                    break;
                }
                Err(why) => reason = why,
            }
        }
        let Some(a) = accepted else {
            return Err(Ex2Error::SourceExhausted { step: n, reason });
        };
        let (s, e) = make_s(&a.r, &a.quotient)?;
        sum += BigRational::new(BigInt::one(), BigInt::from(a.k_index));
        steps.push(Ex2Step {
            quotient: a.quotient,
            r: a.r,
            s,
            e,
            f_value: f,
            k_index: a.k_index,
        });
    }
    Ok(Ex2Certificate {
        partition: p.partition,
        seed: p.seed(),
        f_values: p.f_values.clone(),
        steps,
        reciprocal_sum: sum,
    })
}

/// Finds `u, v` in `<K>` with equal images in `coarse` and distinct images
/// in `fine`, so `u v^-1` lies in `ker coarse` but not in `ker fine`.
pub fn strictness_witness(
    fine: &FiniteQuotient,
    coarse: &FiniteQuotient,
) -> Result<Option<Word>, QuotientError> {
    let p = fine.partition();
    let k = p.k_size();
    let fine_steps = fine.subgroup_steps(&k_letters(p))?;
    let coarse_steps = coarse.subgroup_steps(&k_letters(p))?;
    let mut seen_fine: HashSet<QuotientElement> = HashSet::new();
    let mut seen_coarse: HashMap<QuotientElement, Word> = HashMap::new();
    let mut queue = VecDeque::new();
    seen_fine.insert(fine.identity());
    seen_coarse.insert(coarse.identity(), Word::identity());
    queue.push_back((fine.identity(), coarse.identity(), Word::identity()));
    while let Some((x, y, w)) = queue.pop_front() {
        for (i, (sf, sc)) in fine_steps.iter().zip(&coarse_steps).enumerate() {
            let nx = fine.compose(&x, sf);
            if !seen_fine.insert(nx.clone()) {
                continue;
            }
            if seen_fine.len() > fine.cap() {
                return Err(QuotientError::CapExceeded(fine.cap()));
            }
            let ny = coarse.compose(&y, sc);
            let nw = w.multiply(&step_word(k, i));
            if let Some(v) = seen_coarse.get(&ny) {
                return Ok(Some(nw.multiply(&v.inverse())));
            }
            seen_coarse.insert(ny.clone(), nw.clone());
            queue.push_back((nx, ny, nw));
        }
    }
    Ok(None)
}

fn fmt_q<T: std::fmt::Display>(r: Result<T, QuotientError>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => e.to_string(),
    }
}

/// Re-checks every clause of a certificate from quotient primitives.
pub fn verify_ex2(c: &Ex2Certificate) -> Report {
    let mut rep = Report::new();
    let n_steps = c.steps.len();
    let p = c.partition;
    let f = &c.f_values;
    let k_gens = k_letters(p);
    let b = B;

    rep.check(
        "params",
        None,
        None,
        n_steps >= 1
            && f.len() == n_steps
            && f.first().is_some_and(|&x| x >= 1)
            && is_strictly_increasing(f),
        format!("N = {n_steps}, f = {f:?}"),
    );

    let mut sum = BigRational::zero();
    let mut indices = Vec::new();
    for (i, st) in c.steps.iter().enumerate() {
        let m = i + 1;
        let q = &st.quotient;
        rep.check(
            "partition",
            Some(m),
            None,
            q.partition() == p,
            "quotient acts on the certificate's free group",
        );
        if q.partition() != p {
            continue;
        }
        rep.check(
            "f-value",
            Some(m),
            None,
            f.get(i) == Some(&st.f_value),
            format!("recorded {}, expected {:?}", st.f_value, f.get(i)),
        );
        let idx = q.subgroup_image_order(&k_gens).map(|x| x as u64);
        rep.check(
            "k-index",
            Some(m),
            None,
            idx.as_ref() == Ok(&st.k_index),
            format!("recorded {}, recomputed {}", st.k_index, fmt_q(idx.clone())),
        );
        if let Ok(x) = idx {
            sum += BigRational::new(BigInt::one(), BigInt::from(x));
            indices.push(x);
        }
        if m == 1 {
            let bound = sphere_bound(p.k_size(), st.f_value);
            rep.check(
                "step1-index",
                Some(1),
                None,
                idx.as_ref().is_ok_and(|&x| BigInt::from(x) > bound),
                format!("index {} against bound {bound}", fmt_q(idx.clone())),
            );
        }

        let dist = q.distance_within(&st.r, st.f_value as usize);
        rep.check(
            "cond1",
            Some(m),
            None,
            !st.r.is_identity() && st.r.lies_in(Factor::K) && dist == Ok(None),
            match &dist {
                Ok(None) => format!("r_{m} in <K> beyond radius {}", st.f_value),
                Ok(Some(d)) => format!("r_{m} at distance {d} <= {}", st.f_value),
                Err(e) => e.to_string(),
            },
        );
        let c2 = q.coset_equal(&st.s, &st.r);
        rep.check(
            "cond2",
            Some(m),
            None,
            c2 == Ok(true),
            format!("G_{m} s_{m} = G_{m} r_{m}: {}", fmt_q(c2)),
        );
        rep.check(
            "cond3",
            Some(m),
            None,
            st.s.last_syllable_factor() == Some(Factor::L),
            format!("last syllable of s_{m}: {:?}", st.s.last_syllable_factor()),
        );
        let order = q.element_order(&Word::letter(b));
        rep.check(
            "s-form",
            Some(m),
            None,
            order.as_ref() == Ok(&st.e) && st.s == st.r.multiply(&Word::run(b, BigInt::from(st.e))),
            format!("e = {}, order of b = {}", st.e, fmt_q(order)),
        );
    }

    for (i, sm) in c.steps.iter().enumerate() {
        if sm.quotient.partition() != p {
            continue;
        }
        for (j, sk) in c.steps.iter().enumerate().skip(i + 1) {
            let eq = sm.quotient.coset_equal(&sk.r, &sm.r);
            rep.check(
                "cond4",
                Some(i + 1),
                Some(j + 1),
                eq == Ok(false),
                format!("G_m r_k = G_m r_m: {}", fmt_q(eq)),
            );
        }
    }

    for (i, pair) in c.steps.windows(2).enumerate() {
        let (coarse, fine) = (&pair[0].quotient, &pair[1].quotient);
        let n = i + 1;
        rep.check(
            "chain-refines",
            Some(n),
            Some(n + 1),
            fine.structurally_refines(coarse),
            format!("ker Q_{} within ker Q_{n}", n + 1),
        );
        let w = strictness_witness(fine, coarse);
        let verified = match &w {
            Ok(Some(w)) => coarse.in_kernel(w) == Ok(true) && fine.in_kernel(w) == Ok(false),
            _ => false,
        };
        rep.check(
            "chain-strict",
            Some(n),
            Some(n + 1),
            verified,
            match &w {
                Ok(Some(w)) => format!("witness {}", Alphabet::default_for(p).format(w)),
                Ok(None) => "unwitnessed".into(),
                Err(e) => format!("unwitnessed: {e}"),
            },
        );
    }

    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    rep.check(
        "reciprocal-sum",
        None,
        None,
        indices.len() == n_steps && sum == c.reciprocal_sum && sum < half,
        format!("recomputed {sum}, recorded {}", c.reciprocal_sum),
    );
    rep
}

fn step_ref(c: &Ex2Certificate, n: usize) -> Result<&Ex2Step, Ex2Error> {
    if n == 0 || n > c.steps.len() {
        return Err(Ex2Error::StepOutOfRange(n));
    }
    Ok(&c.steps[n - 1])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscretenessWitness {
    pub n: usize,
    /// `{m : G_n s_m = G_n s_n}`.
    pub members: BTreeSet<usize>,
    /// Set when `n` is missing or some member exceeds `n`.
    pub flagged: bool,
}

pub fn discreteness_witness(c: &Ex2Certificate, n: usize) -> Result<DiscretenessWitness, Ex2Error> {
    let q = &step_ref(c, n)?.quotient;
    let sn = &c.steps[n - 1].s;
    let mut members = BTreeSet::new();
    for (i, st) in c.steps.iter().enumerate() {
        if q.coset_equal(&st.s, sn)? {
            members.insert(i + 1);
        }
    }
    let flagged = !members.contains(&n) || members.iter().any(|&m| m > n);
    Ok(DiscretenessWitness {
        n,
        members,
        flagged,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberRecord {
    pub m: usize,
    pub f_value: u64,
    /// `f(m) < |x|`.
    pub f_below_length: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionWitness {
    pub n: usize,
    pub x: Word,
    /// Cayley distance of `x` in `Q_n`.
    pub distance: usize,
    pub word_length: BigInt,
    /// `distance <= |x|`.
    pub distance_bounded: bool,
    /// `{m : G_n s_m = G_n x}` with the distance comparison for each.
    pub members: Vec<MemberRecord>,
}

pub fn finite_intersection_witness(
    c: &Ex2Certificate,
    x: &Word,
    n: usize,
) -> Result<IntersectionWitness, Ex2Error> {
    let q = &step_ref(c, n)?.quotient;
    let distance = q.cayley_distance(x)?;
    let word_length = x.word_length();
    let mut members = Vec::new();
    for (i, st) in c.steps.iter().enumerate() {
        if q.coset_equal(&st.s, x)? {
            members.push(MemberRecord {
                m: i + 1,
                f_value: st.f_value,
                f_below_length: BigInt::from(st.f_value) < word_length,
            });
        }
    }
    Ok(IntersectionWitness {
        n,
        x: x.clone(),
        distance,
        distance_bounded: BigInt::from(distance) <= word_length,
        word_length,
        members,
    })
}

/// `(s_n, r_n^-1)`: a point of `S<K>` in `ker Q_n`.
pub fn not_closed_witness2(c: &Ex2Certificate, n: usize) -> Result<(Word, Word), Ex2Error> {
    let st = step_ref(c, n)?;
    let u = st.s.clone();
    let v = st.r.inverse();
    if !v.lies_in(Factor::K) {
        return Err(Ex2Error::WitnessFailed(format!("r_{n} is not in <K>")));
    }
    if !st.quotient.in_kernel(&u.multiply(&v))? {
        return Err(Ex2Error::WitnessFailed(format!(
            "s_{n} r_{n}^-1 is not in the kernel of Q_{n}"
        )));
    }
    for (i, sm) in c.steps.iter().enumerate() {
        if sm.s.last_syllable_factor() != Some(Factor::L) {
            return Err(Ex2Error::WitnessFailed(format!(
                "s_{} does not end in <L>",
                i + 1
            )));
        }
    }
    Ok((u, v))
}

/// Cayley ball of `Q_n` of radius `f(n) + 1` in DOT, with `r_n` highlighted.
pub fn cayley_ball_dot(
    c: &Ex2Certificate,
    n: usize,
    alphabet: &Alphabet,
) -> Result<String, Ex2Error> {
    let st = step_ref(c, n)?;
    let q = &st.quotient;
    let radius = st.f_value as usize + 1;
    let ball = q.ball(radius)?;
    let target = q.image(&st.r)?;
    let gens = q.cayley_steps();
    let rank = q.partition().rank();
    let mut out = format!("digraph ball_{n} {{\n  node [shape=point];\n");
    out.push_str(&format!(
        "  // radius {radius}, r_{n} = {}\n",
        alphabet.format(&st.r)
    ));
    if !ball.contains(&target) {
        out.push_str(&format!("  // r_{n} lies outside the drawn ball\n"));
    }
    for (i, x) in ball.elements().iter().enumerate() {
        let attrs = if i == 0 {
            " [shape=doublecircle, label=\"1\"]"
        } else if *x == target {
            " [shape=circle, style=filled, fillcolor=red, label=\"r\"]"
        } else {
            ""
        };
        out.push_str(&format!("  {i}{attrs};\n"));
    }
    for (i, x) in ball.elements().iter().enumerate() {
        for (g, step) in gens.iter().take(rank).enumerate() {
            if let Some(j) = ball.position(&q.compose(x, step)) {
                let name = alphabet.name(q.partition().generator(g));
                out.push_str(&format!("  {i} -> {j} [label=\"{name}\"];\n"));
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p22() -> FactorPartition {
        FactorPartition::new(2, 2).unwrap()
    }

    fn al() -> Alphabet {
        Alphabet::default_for(p22())
    }

    fn small_params(steps: usize) -> Ex2Params {
        let mut p = Ex2Params::new(p22(), steps, 0);
        p.cap = 200_000;
        p
    }

    #[test]
    fn bound_values() {
        assert_eq!(sphere_bound(2, 1), BigInt::from(4));
        assert_eq!(sphere_bound(2, 2), BigInt::from(12));
        assert_eq!(sphere_bound(1, 3), BigInt::from(2));
    }

    #[test]
    fn make_s_examples() {
        let p = p22();
        let a = al().parse("a").unwrap();
        let (s, e) = make_s(&a, &FiniteQuotient::trivial(p)).unwrap();
        assert_eq!((al().format(&s), e), ("a b".to_string(), 1));
        let q3 = FiniteQuotient::abelian(p, 3).unwrap();
        let (s, e) = make_s(&al().parse("a^2").unwrap(), &q3).unwrap();
        assert_eq!((al().format(&s), e), ("a^2 b^3".to_string(), 3));
        assert_eq!(make_s(&Word::identity(), &q3), Err(Ex2Error::EmptyR));
        assert_eq!(
            make_s(&al().parse("b").unwrap(), &q3),
            Err(Ex2Error::NotKWord)
        );
    }

    #[test]
    fn make_s_random_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = p22();
        for _ in 0..40 {
            let images = (0..4).map(|_| random_perm(&mut rng, 6)).collect();
            let q = FiniteQuotient::permutation(p, images, DEFAULT_CAP).unwrap();
            let len = rng.gen_range(1..6);
            let r = Word::reduce((0..len).map(|_| {
                (
                    Generator::k(rng.gen_range(0..2)),
                    BigInt::from(rng.gen_range(-3..=3)),
                )
            }));
            if r.is_identity() {
                continue;
            }
            let (s, _) = make_s(&r, &q).unwrap();
            assert!(q.coset_equal(&s, &r).unwrap());
            assert_eq!(s.last_syllable_factor(), Some(Factor::L));
        }
    }

    #[test]
    fn choose_r_examples() {
        let p = p22();
        let q7 = FiniteQuotient::abelian(p, 7).unwrap();
        assert_eq!(q7.subgroup_image_order(&k_letters(p)).unwrap(), 49);
        let r = choose_r(&q7, 1, &[]).unwrap();
        assert!(r.lies_in(Factor::K));
        assert!(q7.cayley_distance(&r).unwrap() >= 2);

        let r = choose_r(&q7, 0, &[]).unwrap();
        assert_eq!(al().format(&r), "a");

        let q2 = FiniteQuotient::permutation(
            p,
            vec![
                Permutation::from_cycles(2, &[&[0, 1]]).unwrap(),
                Permutation::identity(2),
                Permutation::identity(2),
                Permutation::identity(2),
            ],
            DEFAULT_CAP,
        )
        .unwrap();
        assert_eq!(choose_r(&q2, 1, &[]), Err(Ex2Error::NoAdmissibleR));
    }

    #[test]
    fn choose_r_avoids_forbidden_cosets() {
        let p = p22();
        let q7 = FiniteQuotient::abelian(p, 7).unwrap();
        let first = choose_r(&q7, 0, &[]).unwrap();
        let second = choose_r(&q7, 0, &[(&q7, &first)]).unwrap();
        assert!(!q7.coset_equal(&first, &second).unwrap());
    }

    #[test]
    fn step_one_bound_at_f_one() {
        let mut params = small_params(1);
        params.f_values = vec![1];
        let c = construct_ex2(&params).unwrap();
        assert!(c.steps[0].k_index > 4);
        assert!(verify_ex2(&c).passed());
    }

    #[test]
    fn trivial_source_is_rejected() {
        let mut params = small_params(1);
        params.f_values = vec![1];
        params.source = QuotientSource::Fixed(vec![FiniteQuotient::trivial(p22())]);
        match construct_ex2(&params) {
            Err(Ex2Error::SourceExhausted { step: 1, reason }) => {
                assert!(reason.contains("step-1 bound 4"), "{reason}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parameter_validation() {
        let mut params = small_params(2);
        params.f_values = vec![3, 3];
        assert!(matches!(construct_ex2(&params), Err(Ex2Error::Params(_))));
        params.f_values = vec![0, 3];
        assert!(matches!(construct_ex2(&params), Err(Ex2Error::Params(_))));
        params.f_values = vec![2, 30];
        assert!(matches!(
            construct_ex2(&params),
            Err(Ex2Error::RadiusTooLarge { .. })
        ));
        params.steps = 0;
        params.f_values = vec![];
        assert!(matches!(construct_ex2(&params), Err(Ex2Error::Params(_))));
    }

    #[test]
    fn two_step_chain() {
        let c = construct_ex2(&small_params(2)).unwrap();
        let rep = verify_ex2(&c);
        assert!(rep.passed(), "{:?}", rep.failed_clauses());
        assert!(c.steps[1]
            .quotient
            .structurally_refines(&c.steps[0].quotient));
        for n in 1..=2 {
            let d = discreteness_witness(&c, n).unwrap();
            assert!(!d.flagged && d.members.contains(&n));
            let (u, v) = not_closed_witness2(&c, n).unwrap();
            assert!(c.steps[n - 1].quotient.in_kernel(&u.multiply(&v)).unwrap());
        }
    }

    #[test]
    fn counting_soundness() {
        let c = construct_ex2(&small_params(2)).unwrap();
        let k = 2;
        for (i, st) in c.steps.iter().enumerate() {
            let forbidden: Vec<(&FiniteQuotient, &Word)> =
                c.steps[..i].iter().map(|s| (&s.quotient, &s.r)).collect();
            let q = &st.quotient;
            let kex = q
                .explore(&q.subgroup_steps(&k_letters(p22())).unwrap(), None, None)
                .unwrap();
            let ball = q.ball(st.f_value as usize).unwrap();
            let near = kex.elements().iter().filter(|x| ball.contains(x)).count();
            let admissible = admissible_count(q, st.f_value, &forbidden).unwrap();
            assert!(2 * admissible + 2 * near >= st.k_index as usize);
            // sphere in the <K>-Schreier graph
            let sphere = (0..kex.len())
                .filter(|&j| kex.depth(j) == st.f_value as usize)
                .count();
            assert!(BigInt::from(sphere) <= sphere_bound(k, st.f_value));
        }
    }

    #[test]
    fn strictness_witness_detects_equal_quotients() {
        let q = FiniteQuotient::abelian(p22(), 5).unwrap();
        assert_eq!(strictness_witness(&q, &q).unwrap(), None);
        let fine = FiniteQuotient::abelian(p22(), 10).unwrap();
        let w = strictness_witness(&fine, &q).unwrap().unwrap();
        assert!(q.in_kernel(&w).unwrap() && !fine.in_kernel(&w).unwrap());
    }

    #[test]
    fn verifier_catches_corruptions() {
        let c = construct_ex2(&small_params(2)).unwrap();

        let mut bad = c.clone();
        bad.steps[1].s = bad.steps[1].r.clone();
        assert!(verify_ex2(&bad).failed_clauses().contains(&"cond3"));

        let mut bad = c.clone();
        bad.f_values = vec![3, 3];
        assert!(verify_ex2(&bad).failed_clauses().contains(&"params"));

        let mut bad = c.clone();
        bad.steps[1].r = bad.steps[0].r.clone();
        let d = discreteness_witness(&bad, 1);
        assert!(!verify_ex2(&bad).passed());
        // s_2 was built from the old r_2, so rebuild it
        let (s, e) = make_s(&bad.steps[1].r, &bad.steps[1].quotient).unwrap();
        bad.steps[1].s = s;
        bad.steps[1].e = e;
        let d2 = discreteness_witness(&bad, 1).unwrap();
        assert!(d.is_ok());
        assert!(d2.members.contains(&2) && d2.flagged);
        assert!(verify_ex2(&bad).failed_clauses().contains(&"cond4"));
    }

    #[test]
    fn intersection_witness() {
        let c = construct_ex2(&small_params(2)).unwrap();
        let w = finite_intersection_witness(&c, &c.steps[1].s, 2).unwrap();
        assert!(w.members.iter().any(|m| m.m == 2));
        assert!(w.distance_bounded);
        let id = finite_intersection_witness(&c, &Word::identity(), 1).unwrap();
        assert_eq!(id.distance, 0);
        // r_1 is beyond radius f(1) >= 1, so s_1 is not in G_1
        assert!(id.members.iter().all(|m| m.m != 1 && !m.f_below_length));
        assert_eq!(
            finite_intersection_witness(&c, &Word::identity(), 3),
            Err(Ex2Error::StepOutOfRange(3))
        );
    }

    #[test]
    fn not_closed_rejects_trailing_k_letter() {
        let mut c = construct_ex2(&small_params(1)).unwrap();
        c.steps[0].s = c.steps[0].s.multiply(&al().parse("a").unwrap());
        assert!(matches!(
            not_closed_witness2(&c, 1),
            Err(Ex2Error::WitnessFailed(_))
        ));
    }

    #[test]
    fn ball_dot_highlights_r() {
        let c = construct_ex2(&small_params(1)).unwrap();
        let dot = cayley_ball_dot(&c, 1, &al()).unwrap();
        assert!(dot.starts_with("digraph ball_1 {"));
        assert!(dot.contains("doublecircle"));
        assert!(dot.contains("fillcolor=red") || dot.contains("outside the drawn ball"));
    }
}
