//! Finite certificates for the first counterexample in `F = <a, b>`.
//!
//! * `A = {a^(j!)}` converges to `1`: every finite quotient kills `a^(j!)`
//!   once `j` reaches the order of the image of `a`.
//! * `m_j` converges in the profinite integers to a non-integer `m_0`,
//!   fixed here as residue 0 at powers of 2 and residue 1 at powers of odd
//!   primes. An integer limit would be 0 by the 2-adic residues and 1 mod 3.
//! * `S = {a^(j!) b^(m_j)}` is closed: every `w` outside `S` gets a
//!   certificate with an abelian tail separator and finitely many head
//!   separators.
//! * `S<b>` is not closed: every quotient kills some `s_k b^(-m_k) = a^(k!)`,
//!   while `1` is not in `S<b>` because the `a`-exponent of `s_j b^t` is `j!`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::quotients::{FiniteQuotient, QuotientError};
use crate::report::Report;
use crate::separation::{
    separate_from_identity, smallest_non_divisor, verify_separation, SeparationCertificate,
    SeparationError, WitnessKind,
};
use crate::words::{Alphabet, FactorPartition, Generator};
use crate::Word;

pub const A: Generator = Generator::k(0);
pub const B: Generator = Generator::l(0);

/// Tail window checked past the head bound.
pub const TAIL_WINDOW: u64 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Ex1Error {
    #[error("the word is s_{0}, a member of S")]
    MemberOfS(u64),
    #[error("the word uses generators outside F = <a, b>")]
    ForeignGenerator,
    #[error("separating modulus {0} is too large for an abelian quotient")]
    ModulusTooLarge(BigInt),
    #[error("witness check failed: {0}")]
    WitnessFailed(String),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
}

pub fn partition() -> FactorPartition {
    FactorPartition::new(1, 1).expect("rank two")
}

pub fn alphabet() -> Alphabet {
    Alphabet::default_for(partition())
}

/// The limit `m_0` in the profinite integers, known through its residues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProfiniteTarget;

impl ProfiniteTarget {
    /// Residue of `m_0` mod `n` (`n >= 1`), by CRT over `n = 2^a * q`, `q` odd.
    pub fn residue(&self, n: &BigInt) -> BigInt {
        assert!(n.is_positive(), "modulus must be positive");
        let mut two_part = BigInt::one();
        let mut odd = n.clone();
        while odd.is_even() {
            odd /= 2;
            two_part *= 2;
        }
        if odd.is_one() {
            return BigInt::zero();
        }
        // x = 2^a * t with 2^a * t ≡ 1 (mod q)
        let inv = two_part.extended_gcd(&odd).x.mod_floor(&odd);
        (two_part * inv).mod_floor(n)
    }
}

pub fn m0_residue(n: u64) -> u64 {
    ProfiniteTarget
        .residue(&BigInt::from(n))
        .to_u64()
        .expect("residue below a u64 modulus")
}

pub fn factorial(j: u64) -> BigInt {
    (1..=j).map(BigInt::from).product()
}

/// `lcm(1, ..., j)`.
pub fn lcm_upto(j: u64) -> BigInt {
    (1..=j)
        .map(BigInt::from)
        .fold(BigInt::one(), |acc, x| acc.lcm(&x))
}

/// `m_j`: least nonnegative representative of `m_0` mod `lcm(1..j)`.
pub fn m_sequence(j: u64) -> BigInt {
    assert!(j >= 1, "sequence is indexed from 1");
    ProfiniteTarget.residue(&lcm_upto(j))
}

pub fn a_element(j: u64) -> Word {
    Word::run(A, factorial(j))
}

fn s_from_parts(fact: &BigInt, m: &BigInt) -> Word {
    Word::run(A, fact.clone()).multiply(&Word::run(B, m.clone()))
}

/// `s_j = a^(j!) b^(m_j)`.
pub fn s_element(j: u64) -> Word {
    s_from_parts(&factorial(j), &m_sequence(j))
}

/// Yields `(j, j!, m_j)` for `j = 1, 2, ...` incrementally.
fn sequence_terms() -> impl Iterator<Item = (u64, BigInt, BigInt)> {
    let mut fact = BigInt::one();
    let mut lcm = BigInt::one();
    (1u64..).map(move |j| {
        fact *= j;
        lcm = lcm.lcm(&BigInt::from(j));
        (j, fact.clone(), ProfiniteTarget.residue(&lcm))
    })
}

/// Returns `k0`, the order of the image of `a`, after checking that
/// `a^(k!)` lies in the kernel for `k0 <= k <= k0 + 10`.
pub fn convergence_witness(q: &FiniteQuotient) -> Result<u64, Ex1Error> {
    let k0 = q.element_order(&Word::letter(A))?;
    let mut fact = factorial(k0);
    for k in k0..=k0 + TAIL_WINDOW {
        if k > k0 {
            fact *= k;
        }
        if !q.in_kernel(&Word::run(A, fact.clone()))? {
            return Err(Ex1Error::WitnessFailed(format!(
                "a^({k}!) is not in the kernel"
            )));
        }
    }
    Ok(k0)
}

/// A modulus `n` with `t mod n != m_0 mod n`.
pub fn separate_integer_from_m0(t: &BigInt) -> BigInt {
    if t.is_zero() {
        return BigInt::from(3);
    }
    let mut n = BigInt::from(2);
    while n <= t.abs() {
        n *= 2;
    }
    n
}

/// Certificate that `target` is not a limit point of `S` and not in `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ex1TailCertificate {
    pub target: Word,
    pub modulus: u64,
    pub head_bound: u64,
    pub heads: Vec<SeparationCertificate<num_bigint::BigInt>>,
    pub composite: FiniteQuotient,
}

fn check_support(w: &Word) -> Result<(), Ex1Error> {
    if w.support().iter().all(|g| partition().contains(*g)) {
        Ok(())
    } else {
        Err(Ex1Error::ForeignGenerator)
    }
}

/// `Some(j)` if `w = s_j`.
pub fn index_in_s(w: &Word) -> Option<u64> {
    let len = w.word_length();
    for (j, fact, m) in sequence_terms() {
        if fact > len {
            return None;
        }
        if *w == s_from_parts(&fact, &m) {
            return Some(j);
        }
    }
    unreachable!("factorials are unbounded")
}

/// Builds the neighbourhood certificate for `w` outside `S`.
pub fn separate_from_s(w: &Word, head_margin: u64) -> Result<Ex1TailCertificate, Ex1Error> {
    check_support(w)?;
    if let Some(j) = index_in_s(w) {
        return Err(Ex1Error::MemberOfS(j));
    }
    let p = partition();
    let x = w.exponent_sum(A);
    let y = w.exponent_sum(B);
    let n_big = if x.is_zero() {
        separate_integer_from_m0(&y)
    } else {
        x.abs() + 1
    };
    let modulus = n_big
        .to_u64()
        .filter(|&n| n <= u32::MAX as u64)
        .ok_or_else(|| Ex1Error::ModulusTooLarge(n_big.clone()))?;
    let head_bound = modulus.max(head_margin);
    let tail_q = FiniteQuotient::abelian(p, modulus)?;

    let mut heads = Vec::new();
    for (j, fact, m) in sequence_terms() {
        if j >= head_bound {
            break;
        }
        let s = s_from_parts(&fact, &m);
        if s == *w {
            continue;
        }
        let diff = w.multiply(&s.inverse());
        let dx = &x - &fact;
        let dy = &y - &m;
        let head = if dx.is_zero() && dy.is_zero() {
            separate_from_identity(p, &diff)?
        } else {
            let quotient = if !tail_q.in_kernel(&diff)? {
                tail_q.clone()
            } else {
                FiniteQuotient::abelian(p, smallest_non_divisor(&dx.gcd(&dy)))?
            };
            SeparationCertificate {
                quotient,
                subgroup_gens: Vec::new(),
                excluded: diff,
                witness_kind: WitnessKind::ImageDiffers,
            }
        };
        heads.push(head);
    }

    let mut composite = tail_q.clone();
    for h in &heads {
        composite = composite.direct_product(&h.quotient)?;
    }
    Ok(Ex1TailCertificate {
        target: w.clone(),
        modulus,
        head_bound,
        heads,
        composite,
    })
}

/// Re-checks a tail certificate using only word and quotient primitives.
pub fn verify_ex1(c: &Ex1TailCertificate) -> Report {
    let mut r = Report::new();
    let al = alphabet();
    let w = &c.target;
    let n = c.modulus;
    let big_j = c.head_bound;

    r.check(
        "target-not-in-s",
        None,
        None,
        index_in_s(w).is_none(),
        al.format(w),
    );
    let tail_q = match FiniteQuotient::abelian(partition(), n) {
        Ok(q) => {
            r.check("modulus", None, None, true, format!("n = {n}"));
            Some(q)
        }
        Err(e) => {
            r.check("modulus", None, None, false, e.to_string());
            None
        }
    };
    r.check(
        "head-bound",
        None,
        None,
        n <= big_j,
        format!("n = {n}, J = {big_j}"),
    );

    let mut heads = c.heads.iter();
    for (j, fact, m) in sequence_terms() {
        if j >= big_j {
            break;
        }
        let s = s_from_parts(&fact, &m);
        let separated = c.composite.coset_equal(w, &s).map(|eq| !eq);
        r.check(
            "head-separated",
            Some(j as usize),
            None,
            separated == Ok(true),
            match separated {
                Ok(_) => format!("composite image of s_{j} differs from the target's"),
                Err(e) => e.to_string(),
            },
        );
        if s == *w {
            continue;
        }
        let expected = w.multiply(&s.inverse());
        match heads.next() {
            Some(h) => {
                let sub = verify_separation(h, &al);
                r.check(
                    "head-certificate",
                    Some(j as usize),
                    None,
                    h.excluded == expected && h.subgroup_gens.is_empty() && sub.passed(),
                    format!("separates w * s_{j}^-1"),
                );
            }
            None => {
                r.check("head-certificate", Some(j as usize), None, false, "missing");
            }
        }
    }
    if heads.next().is_some() {
        r.fail("head-certificate", "more head certificates than heads");
    }

    if let Some(q) = tail_q {
        let tail_value = [0u32, m0_residue(n) as u32];
        let mut terms = sequence_terms().skip(big_j.saturating_sub(1) as usize);
        for _ in 0..=TAIL_WINDOW {
            let (j, fact, m) = terms.next().expect("infinite sequence");
            let img = q.image(&s_from_parts(&fact, &m)).expect("rank-two word");
            r.check(
                "tail-constant",
                Some(j as usize),
                None,
                q.residues(&img) == Some(&tail_value[..]),
                format!("s_{j} mod {n} = {:?}", q.residues(&img)),
            );
        }
        match q.image(w) {
            Ok(img) => r.check(
                "tail-separates",
                None,
                None,
                q.residues(&img) != Some(&tail_value[..]),
                format!("w mod {n} = {:?}, tail = {tail_value:?}", q.residues(&img)),
            ),
            Err(e) => r.check("tail-separates", None, None, false, e.to_string()),
        };
    }
    r
}

/// A point of `S<b>` inside the kernel of a given quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ex1NotClosedWitness {
    pub quotient: FiniteQuotient,
    pub k: u64,
    pub s_element: Word,
    pub cofactor: Word,
}

/// `s_k * b^(-m_k) = a^(k!)` lies in `ker q` for `k` the order of `a`.
pub fn not_closed_witness(q: &FiniteQuotient) -> Result<Ex1NotClosedWitness, Ex1Error> {
    let k = q.element_order(&Word::letter(A))?;
    let s = s_element(k);
    let cofactor = Word::run(B, -m_sequence(k));
    if !q.in_kernel(&s.multiply(&cofactor))? {
        return Err(Ex1Error::WitnessFailed(format!(
            "s_{k} b^-m_{k} is not in the kernel"
        )));
    }
    for (j, fact, m) in sequence_terms().take(k as usize) {
        let sj = s_from_parts(&fact, &m);
        let a_sum = sj.multiply(&Word::run(B, BigInt::from(7))).exponent_sum(A);
        if a_sum != fact || a_sum.is_zero() {
            return Err(Ex1Error::WitnessFailed(format!(
                "a-exponent of s_{j} b^t is not {j}!"
            )));
        }
    }
    Ok(Ex1NotClosedWitness {
        quotient: q.clone(),
        k,
        s_element: s,
        cofactor,
    })
}

/// Independent check of a not-closed witness.
pub fn verify_not_closed(w: &Ex1NotClosedWitness) -> Report {
    let mut r = Report::new();
    r.check(
        "s-element",
        Some(w.k as usize),
        None,
        w.k >= 1 && w.s_element == s_element(w.k),
        "s_element is s_k",
    );
    r.check(
        "cofactor-in-b",
        None,
        None,
        w.cofactor.lies_in(crate::words::Factor::L),
        "cofactor is a power of b",
    );
    let in_kernel = w.quotient.in_kernel(&w.s_element.multiply(&w.cofactor));
    r.check(
        "kernel-membership",
        Some(w.k as usize),
        None,
        in_kernel == Ok(true),
        "s_k * cofactor maps to the identity",
    );
    r.check(
        "a-exponent-nonzero",
        Some(w.k as usize),
        None,
        !w.s_element.exponent_sum(A).is_zero(),
        "no element of S<b> is trivial",
    );
    r
}
