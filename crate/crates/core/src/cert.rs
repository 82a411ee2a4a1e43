//! JSON interchange for certificates and reports.
//!
//! Every document embeds its alphabet, writes words in the text syntax and
//! big integers as decimal strings. Emission goes through `serde_json::Value`
//! so object keys come out sorted; `emit(load(x))` is the canonical form of `x`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::example1::{Ex1NotClosedWitness, Ex1TailCertificate};
use crate::example2::{Ex2Certificate, Ex2Step};
use crate::quotients::{FiniteQuotient, QuotientRepr};
use crate::report::Report;
use crate::separation::{verify_separation, SeparationCertificate, WitnessKind};
use crate::words::Alphabet;
use crate::Word;

/// A schema or content error, located by a JSON path such as `steps[2].r`.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{path}: {message}")]
pub struct CertError {
    pub path: String,
    pub message: String,
}

impl CertError {
    fn at(path: impl Into<String>, message: impl ToString) -> Self {
        CertError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetDoc {
    pub k: Vec<String>,
    pub l: Vec<String>,
}

impl AlphabetDoc {
    fn from_alphabet(al: &Alphabet) -> Self {
        AlphabetDoc {
            k: al.k_names().to_vec(),
            l: al.l_names().to_vec(),
        }
    }

    fn to_alphabet(&self) -> Result<Alphabet, CertError> {
        Alphabet::new(self.k.clone(), self.l.clone()).map_err(|e| CertError::at("alphabet", e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationBody {
    pub quotient: QuotientRepr,
    pub subgroup_gens: Vec<String>,
    pub excluded: String,
    pub witness_kind: WitnessKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationDoc {
    pub alphabet: AlphabetDoc,
    pub quotient: QuotientRepr,
    pub subgroup_gens: Vec<String>,
    pub excluded: String,
    pub witness_kind: WitnessKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ex1TailDoc {
    pub alphabet: AlphabetDoc,
    pub target: String,
    pub modulus: u64,
    pub head_bound: u64,
    pub heads: Vec<SeparationBody>,
    pub composite: QuotientRepr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ex1WitnessDoc {
    pub alphabet: AlphabetDoc,
    pub quotient: QuotientRepr,
    pub k: u64,
    pub s_element: String,
    pub cofactor: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ex2ParamsDoc {
    pub steps: usize,
    pub f: Vec<u64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ex2StepDoc {
    pub quotient: QuotientRepr,
    pub r: String,
    pub s: String,
    pub e: u64,
    pub f_value: u64,
    pub k_index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ex2Doc {
    pub alphabet: AlphabetDoc,
    pub params: Ex2ParamsDoc,
    pub steps: Vec<Ex2StepDoc>,
    pub reciprocal_sum: String,
}

/// Sorted-key, pretty-printed JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("documents serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("values serialize");
    out.push('\n');
    out
}

/// Strict parse; errors carry the path of the offending field.
pub fn parse_doc<T: DeserializeOwned>(text: &str) -> Result<T, CertError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        CertError::at(if path == "." { "$".into() } else { path }, e.into_inner())
    })?;
    de.end().map_err(|e| CertError::at("$", e))?;
    Ok(value)
}

fn word(al: &Alphabet, text: &str, path: impl Into<String>) -> Result<Word, CertError> {
    al.parse(text).map_err(|e| CertError::at(path, e))
}

fn quotient(
    al: &Alphabet,
    repr: &QuotientRepr,
    cap: usize,
    path: impl Into<String>,
) -> Result<FiniteQuotient, CertError> {
    FiniteQuotient::from_repr(repr, al, cap).map_err(|e| CertError::at(path, e))
}

fn separation_body(c: &SeparationCertificate<BigInt>, al: &Alphabet) -> SeparationBody {
    SeparationBody {
        quotient: c.quotient.to_repr(al),
        subgroup_gens: c.subgroup_gens.iter().map(|g| al.format(g)).collect(),
        excluded: al.format(&c.excluded),
        witness_kind: c.witness_kind,
    }
}

fn separation_from_body(
    b: &SeparationBody,
    al: &Alphabet,
    cap: usize,
    prefix: &str,
) -> Result<SeparationCertificate<BigInt>, CertError> {
    let subgroup_gens = b
        .subgroup_gens
        .iter()
        .enumerate()
        .map(|(i, g)| word(al, g, format!("{prefix}subgroup_gens[{i}]")))
        .collect::<Result<_, _>>()?;
    Ok(SeparationCertificate {
        quotient: quotient(al, &b.quotient, cap, format!("{prefix}quotient"))?,
        subgroup_gens,
        excluded: word(al, &b.excluded, format!("{prefix}excluded"))?,
        witness_kind: b.witness_kind,
    })
}

pub fn emit_separation(c: &SeparationCertificate<BigInt>, al: &Alphabet) -> String {
    let b = separation_body(c, al);
    to_canonical_json(&SeparationDoc {
        alphabet: AlphabetDoc::from_alphabet(al),
        quotient: b.quotient,
        subgroup_gens: b.subgroup_gens,
        excluded: b.excluded,
        witness_kind: b.witness_kind,
    })
}

pub fn load_separation(
    text: &str,
    cap: usize,
) -> Result<(Alphabet, SeparationCertificate<BigInt>), CertError> {
    let doc: SeparationDoc = parse_doc(text)?;
    let al = doc.alphabet.to_alphabet()?;
    let body = SeparationBody {
        quotient: doc.quotient,
        subgroup_gens: doc.subgroup_gens,
        excluded: doc.excluded,
        witness_kind: doc.witness_kind,
    };
    let c = separation_from_body(&body, &al, cap, "")?;
    Ok((al, c))
}

/// Parse errors become a failing `schema` clause.
pub fn verify_separation_json(text: &str, cap: usize) -> Report {
    match load_separation(text, cap) {
        Ok((al, c)) => verify_separation(&c, &al),
        Err(e) => {
            let mut r = Report::new();
            r.fail("schema", e.to_string());
            r
        }
    }
}

fn check_ex1_alphabet(al: &Alphabet) -> Result<(), CertError> {
    if al.partition() != crate::example1::partition() {
        return Err(CertError::at(
            "alphabet",
            "expects one K and one L generator",
        ));
    }
    Ok(())
}

pub fn emit_ex1_tail(c: &Ex1TailCertificate, al: &Alphabet) -> String {
    to_canonical_json(&Ex1TailDoc {
        alphabet: AlphabetDoc::from_alphabet(al),
        target: al.format(&c.target),
        modulus: c.modulus,
        head_bound: c.head_bound,
        heads: c.heads.iter().map(|h| separation_body(h, al)).collect(),
        composite: c.composite.to_repr(al),
    })
}

pub fn load_ex1_tail(text: &str, cap: usize) -> Result<(Alphabet, Ex1TailCertificate), CertError> {
    let doc: Ex1TailDoc = parse_doc(text)?;
    let al = doc.alphabet.to_alphabet()?;
    check_ex1_alphabet(&al)?;
    let heads = doc
        .heads
        .iter()
        .enumerate()
        .map(|(i, h)| separation_from_body(h, &al, cap, &format!("heads[{i}].")))
        .collect::<Result<_, _>>()?;
    Ok((
        al.clone(),
        Ex1TailCertificate {
            target: word(&al, &doc.target, "target")?,
            modulus: doc.modulus,
            head_bound: doc.head_bound,
            heads,
            composite: quotient(&al, &doc.composite, cap, "composite")?,
        },
    ))
}

pub fn emit_ex1_witness(w: &Ex1NotClosedWitness, al: &Alphabet) -> String {
    to_canonical_json(&Ex1WitnessDoc {
        alphabet: AlphabetDoc::from_alphabet(al),
        quotient: w.quotient.to_repr(al),
        k: w.k,
        s_element: al.format(&w.s_element),
        cofactor: al.format(&w.cofactor),
    })
}

pub fn load_ex1_witness(
    text: &str,
    cap: usize,
) -> Result<(Alphabet, Ex1NotClosedWitness), CertError> {
    let doc: Ex1WitnessDoc = parse_doc(text)?;
    let al = doc.alphabet.to_alphabet()?;
    check_ex1_alphabet(&al)?;
    Ok((
        al.clone(),
        Ex1NotClosedWitness {
            quotient: quotient(&al, &doc.quotient, cap, "quotient")?,
            k: doc.k,
            s_element: word(&al, &doc.s_element, "s_element")?,
            cofactor: word(&al, &doc.cofactor, "cofactor")?,
        },
    ))
}

pub fn emit_ex2(c: &Ex2Certificate, al: &Alphabet) -> String {
    to_canonical_json(&Ex2Doc {
        alphabet: AlphabetDoc::from_alphabet(al),
        params: Ex2ParamsDoc {
            steps: c.steps.len(),
            f: c.f_values.clone(),
            seed: c.seed,
        },
        steps: c
            .steps
            .iter()
            .map(|s| Ex2StepDoc {
                quotient: s.quotient.to_repr(al),
                r: al.format(&s.r),
                s: al.format(&s.s),
                e: s.e,
                f_value: s.f_value,
                k_index: s.k_index,
            })
            .collect(),
        reciprocal_sum: c.reciprocal_sum.to_string(),
    })
}

pub fn load_ex2(text: &str, cap: usize) -> Result<(Alphabet, Ex2Certificate), CertError> {
    let doc: Ex2Doc = parse_doc(text)?;
    let al = doc.alphabet.to_alphabet()?;
    if doc.params.steps != doc.steps.len() {
        return Err(CertError::at(
            "params.steps",
            format!(
                "declares {} steps, found {}",
                doc.params.steps,
                doc.steps.len()
            ),
        ));
    }
    let mut steps = Vec::with_capacity(doc.steps.len());
    for (i, s) in doc.steps.iter().enumerate() {
        let p = |field: &str| format!("steps[{i}].{field}");
        steps.push(Ex2Step {
            quotient: quotient(&al, &s.quotient, cap, p("quotient"))?,
            r: word(&al, &s.r, p("r"))?,
            s: word(&al, &s.s, p("s"))?,
            e: s.e,
            f_value: s.f_value,
            k_index: s.k_index,
        });
    }
    let reciprocal_sum = BigRational::from_str(&doc.reciprocal_sum)
        .map_err(|e| CertError::at("reciprocal_sum", format!("expected `p/q`: {e}")))?;
    Ok((
        al.clone(),
        Ex2Certificate {
            partition: al.partition(),
            seed: doc.params.seed,
            f_values: doc.params.f,
            steps,
            reciprocal_sum,
        },
    ))
}

pub fn emit_report(r: &Report) -> String {
    to_canonical_json(r)
}
