//! Reduced words in a free group `F = <K> * <L>`.
//!
//! A word is stored as its maximal-run normal form: a list of
//! `(generator, exponent)` pairs where adjacent runs carry distinct
//! generators and no exponent is zero. Exponents are generic over
//! [`Exponent`], so the same code serves machine integers for quick
//! experiments and `BigInt` for words such as `a^(20!)`.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use thiserror::Error;

/// Integer type usable as a run exponent.
pub trait Exponent:
    Integer
    + Signed
    + Clone
    + Hash
    + fmt::Debug
    + fmt::Display
    + FromStr
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> Exponent for T where
    T: Integer
        + Signed
        + Clone
        + Hash
        + fmt::Debug
        + fmt::Display
        + FromStr
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Which free factor a generator belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    K,
    L,
}

/// A free generator, ordered by `(factor, index)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub factor: Factor,
    pub index: usize,
}

impl Generator {
    pub const fn k(index: usize) -> Self {
        Generator {
            factor: Factor::K,
            index,
        }
    }

    pub const fn l(index: usize) -> Self {
        Generator {
            factor: Factor::L,
            index,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("factor sizes must be positive (got k={k}, l={l})")]
    EmptyFactor { k: usize, l: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("malformed word at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
}

/// Sizes of the two factors, `k = |K|` and `l = |L|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FactorPartition {
    k: usize,
    l: usize,
}

impl FactorPartition {
    pub fn new(k: usize, l: usize) -> Result<Self, WordError> {
        if k == 0 || l == 0 {
            return Err(WordError::EmptyFactor { k, l });
        }
        Ok(FactorPartition { k, l })
    }

    pub fn k_size(&self) -> usize {
        self.k
    }

    pub fn l_size(&self) -> usize {
        self.l
    }

    pub fn rank(&self) -> usize {
        self.k + self.l
    }

    pub fn contains(&self, g: Generator) -> bool {
        match g.factor {
            Factor::K => g.index < self.k,
            Factor::L => g.index < self.l,
        }
    }

    /// Position of `g` in the order K ascending, then L ascending.
    pub fn flat_index(&self, g: Generator) -> Option<usize> {
        if !self.contains(g) {
            return None;
        }
        Some(match g.factor {
            Factor::K => g.index,
            Factor::L => self.k + g.index,
        })
    }

    pub fn generator(&self, flat: usize) -> Generator {
        if flat < self.k {
            Generator::k(flat)
        } else {
            Generator::l(flat - self.k)
        }
    }

    pub fn generators(&self) -> impl Iterator<Item = Generator> + '_ {
        (0..self.rank()).map(move |i| self.generator(i))
    }

    pub fn k_generators(&self) -> impl Iterator<Item = Generator> {
        (0..self.k).map(Generator::k)
    }
}

/// A reduced word in maximal-run normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreeWord<E> {
    runs: Vec<(Generator, E)>,
}

impl<E: Exponent> Default for FreeWord<E> {
    fn default() -> Self {
        Self::identity()
    }
}

/// Pushes a run onto a reduced stack, cancelling against the top.
fn push_run<E: Exponent>(stack: &mut Vec<(Generator, E)>, g: Generator, e: E) {
    if e.is_zero() {
        return;
    }
    if let Some((top, exp)) = stack.last_mut() {
        if *top == g {
            *exp = exp.clone() + e;
            if exp.is_zero() {
                stack.pop();
            }
            return;
        }
    }
    stack.push((g, e));
}

impl<E: Exponent> FreeWord<E> {
    pub fn identity() -> Self {
        FreeWord { runs: Vec::new() }
    }

    pub fn letter(g: Generator) -> Self {
        FreeWord {
            runs: vec![(g, E::one())],
        }
    }

    /// `g^e` as a single run.
    pub fn run(g: Generator, e: E) -> Self {
        Self::reduce([(g, e)])
    }

    /// Free reduction of an arbitrary run list.
    pub fn reduce<I: IntoIterator<Item = (Generator, E)>>(raw: I) -> Self {
        let mut runs = Vec::new();
        for (g, e) in raw {
            push_run(&mut runs, g, e);
        }
        FreeWord { runs }
    }

    pub fn runs(&self) -> &[(Generator, E)] {
        &self.runs
    }

    pub fn is_identity(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut runs = self.runs.clone();
        for (g, e) in &other.runs {
            push_run(&mut runs, *g, e.clone());
        }
        FreeWord { runs }
    }

    pub fn inverse(&self) -> Self {
        FreeWord {
            runs: self
                .runs
                .iter()
                .rev()
                .map(|(g, e)| (*g, -e.clone()))
                .collect(),
        }
    }

    /// `w^e` for any integer `e`, by binary powering.
    ///
    /// Single-run words scale their exponent directly.
    pub fn pow(&self, e: &E) -> Self {
        if e.is_zero() || self.is_identity() {
            return Self::identity();
        }
        if let [(g, x)] = self.runs.as_slice() {
            return FreeWord {
                runs: vec![(*g, x.clone() * e.clone())],
            };
        }
        let mut base = if e.is_negative() {
            self.inverse()
        } else {
            self.clone()
        };
        let two = E::one() + E::one();
        let mut n = e.abs();
        let mut acc = Self::identity();
        while !n.is_zero() {
            if n.is_odd() {
                acc = acc.multiply(&base);
            }
            n = n / two.clone();
            if !n.is_zero() {
                base = base.multiply(&base);
            }
        }
        acc
    }

    /// Sum of the exponents of all runs on `g`; a homomorphism to the integers.
    pub fn exponent_sum(&self, g: Generator) -> E {
        self.runs
            .iter()
            .filter(|(h, _)| *h == g)
            .fold(E::zero(), |acc, (_, e)| acc + e.clone())
    }

    /// Sum of absolute exponents.
    pub fn word_length(&self) -> E {
        self.runs
            .iter()
            .fold(E::zero(), |acc, (_, e)| acc + e.abs())
    }

    /// `word_length` as a `usize`, if it fits.
    pub fn letter_count(&self) -> Option<usize> {
        self.word_length().to_usize()
    }

    /// Maximal alternating decomposition into segments lying in `<K>` or `<L>`.
    pub fn syllables(&self) -> Vec<(Factor, FreeWord<E>)> {
        let mut out: Vec<(Factor, FreeWord<E>)> = Vec::new();
        for (g, e) in &self.runs {
            match out.last_mut() {
                Some((f, seg)) if *f == g.factor => seg.runs.push((*g, e.clone())),
                _ => out.push((
                    g.factor,
                    FreeWord {
                        runs: vec![(*g, e.clone())],
                    },
                )),
            }
        }
        out
    }

    pub fn last_syllable_factor(&self) -> Option<Factor> {
        self.runs.last().map(|(g, _)| g.factor)
    }

    /// True when every letter lies in the given factor (the identity counts).
    pub fn lies_in(&self, f: Factor) -> bool {
        self.runs.iter().all(|(g, _)| g.factor == f)
    }

    /// Generators used by this word, with no repeats, in first-use order.
    pub fn support(&self) -> Vec<Generator> {
        let mut seen = Vec::new();
        for (g, _) in &self.runs {
            if !seen.contains(g) {
                seen.push(*g);
            }
        }
        seen
    }

    /// Expands to signed letters; `None` if the word has more than `limit` letters.
    pub fn letters(&self, limit: usize) -> Option<Vec<(Generator, bool)>> {
        let n = self.letter_count()?;
        if n > limit {
            return None;
        }
        let mut out = Vec::with_capacity(n);
        for (g, e) in &self.runs {
            let count = e.abs().to_usize()?;
            let positive = e.is_positive();
            out.extend(std::iter::repeat_n((*g, positive), count));
        }
        Some(out)
    }

    /// Re-types the exponents through `i128`; `None` if any does not fit.
    pub fn cast<F: Exponent>(&self) -> Option<FreeWord<F>> {
        let runs = self
            .runs
            .iter()
            .map(|(g, e)| Some((*g, F::from_i128(e.to_i128()?)?)))
            .collect::<Option<Vec<_>>>()?;
        Some(FreeWord { runs })
    }
}

/// Generator names for a partition.
///
/// The default alphabet interleaves letters, K first: for `k = l = 2`
/// this gives `K = {a, c}` and `L = {b, d}`; for `k = l = 1`, `K = {a}`
/// and `L = {b}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    partition: FactorPartition,
    names: Vec<String>,
    lookup: HashMap<String, Generator>,
}

fn default_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("g{i}")
    }
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit())
}

impl Alphabet {
    pub fn default_for(partition: FactorPartition) -> Self {
        let (k, l) = (partition.k_size(), partition.l_size());
        let mut k_names = Vec::with_capacity(k);
        let mut l_names = Vec::with_capacity(l);
        let mut next = 0;
        while k_names.len() < k || l_names.len() < l {
            if k_names.len() < k {
                k_names.push(default_name(next));
                next += 1;
            }
            if l_names.len() < l {
                l_names.push(default_name(next));
                next += 1;
            }
        }
        Self::new(k_names, l_names).expect("default names are valid")
    }

    /// Explicit names, K factor then L factor.
    pub fn new(k_names: Vec<String>, l_names: Vec<String>) -> Result<Self, WordError> {
        let partition = FactorPartition::new(k_names.len(), l_names.len())?;
        let names: Vec<String> = k_names.into_iter().chain(l_names).collect();
        let mut lookup = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if !valid_name(name) {
                return Err(WordError::Alphabet(format!(
                    "`{name}` is not a lowercase letter optionally followed by digits"
                )));
            }
            if lookup
                .insert(name.clone(), partition.generator(i))
                .is_some()
            {
                return Err(WordError::Alphabet(format!("duplicate name `{name}`")));
            }
        }
        Ok(Alphabet {
            partition,
            names,
            lookup,
        })
    }

    /// Parses `"a c | b d"` (K names, `|`, L names; commas or spaces separate).
    pub fn parse_spec(spec: &str) -> Result<Self, WordError> {
        let (k, l) = spec
            .split_once('|')
            .ok_or_else(|| WordError::Alphabet("expected `K names | L names`".into()))?;
        let split = |s: &str| -> Vec<String> {
            s.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect()
        };
        Self::new(split(k), split(l))
    }

    pub fn partition(&self) -> FactorPartition {
        self.partition
    }

    pub fn name(&self, g: Generator) -> &str {
        let i = self
            .partition
            .flat_index(g)
            .expect("generator outside alphabet");
        &self.names[i]
    }

    pub fn k_names(&self) -> &[String] {
        &self.names[..self.partition.k_size()]
    }

    pub fn l_names(&self) -> &[String] {
        &self.names[self.partition.k_size()..]
    }

    pub fn generator(&self, name: &str) -> Option<Generator> {
        self.lookup.get(name).copied()
    }

    /// Parses `a^120 b^-3 c` style text; `1` or the empty string is the identity.
    pub fn parse<E: Exponent>(&self, text: &str) -> Result<FreeWord<E>, WordError> {
        let bytes = text.as_bytes();
        let mut pos = 0;
        let mut raw: Vec<(Generator, E)> = Vec::new();
        let syntax = |pos: usize, msg: &str| WordError::Syntax {
            pos,
            msg: msg.to_string(),
        };
        let skip_ws = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };
        skip_ws(&mut pos);
        if text.trim() == "1" {
            return Ok(FreeWord::identity());
        }
        while pos < bytes.len() {
            let start = pos;
            if !bytes[pos].is_ascii_lowercase() {
                return Err(syntax(pos, "expected a generator name"));
            }
            pos += 1;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let name = &text[start..pos];
            let g = self
                .generator(name)
                .ok_or_else(|| WordError::UnknownGenerator(name.to_string()))?;
            skip_ws(&mut pos);
            let mut exp = E::one();
            if pos < bytes.len() && bytes[pos] == b'^' {
                pos += 1;
                skip_ws(&mut pos);
                let braced = pos < bytes.len() && bytes[pos] == b'{';
                if braced {
                    pos += 1;
                }
                let num_start = pos;
                if pos < bytes.len() && (bytes[pos] == b'-' || bytes[pos] == b'+') {
                    pos += 1;
                }
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let digits = &text[num_start..pos];
                exp = digits
                    .trim_start_matches('+')
                    .parse::<E>()
                    .map_err(|_| syntax(num_start, "expected an integer exponent"))?;
                if braced {
                    if pos < bytes.len() && bytes[pos] == b'}' {
                        pos += 1;
                    } else {
                        return Err(syntax(pos, "missing `}`"));
                    }
                }
            }
            raw.push((g, exp));
            skip_ws(&mut pos);
        }
        Ok(FreeWord::reduce(raw))
    }

    /// Canonical text: runs separated by single spaces, `1` for the identity.
    pub fn format<E: Exponent>(&self, w: &FreeWord<E>) -> String {
        if w.is_identity() {
            return "1".to_string();
        }
        let parts: Vec<String> = w
            .runs()
            .iter()
            .map(|(g, e)| {
                if e.is_one() {
                    self.name(*g).to_string()
                } else {
                    format!("{}^{}", self.name(*g), e)
                }
            })
            .collect();
        parts.join(" ")
    }

    /// Parses a `;`-separated list of words.
    pub fn parse_list<E: Exponent>(&self, text: &str) -> Result<Vec<FreeWord<E>>, WordError> {
        text.split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| self.parse(s))
            .collect()
    }
}
