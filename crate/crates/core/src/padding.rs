//! The randomized padding map and its distribution accounting.
//!
//! `phi` maps a plaintext to its codeword followed by uniform filler bits up
//! to the fixed length n*; `phi_inverse` strips the filler by prefix
//! decoding. For a source p the map induces a distribution pi_p on n*-bit
//! words with `pi_p(v) = p(u) * 2^-(n* - |codeword(u)|)` on the fiber of u.
//! Padding raises min-entropy toward n*; the residual gap
//! `delta = sup_p (n* - h_min(pi_p))` is what the cipher's key length pays
//! for.

use num_traits::Zero;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitWord;
use crate::coding::{decode_prefix, encode, CodeTable};
use crate::error::{Error, Result};
use crate::family::{FamilyKind, FamilySpec, Pmf};
use crate::ratio::{log2, pow2, Ratio};

/// Source of independent unbiased bits. Filler bits are only ever drawn from
/// an injected `RandomSource`, never from ambient state, so seeded runs are
/// reproducible and tests can supply explicit tapes.
pub enum RandomSource {
    /// Operating-system entropy.
    Os(rand::rngs::OsRng),
    /// Deterministic stream; identical seeds yield identical bit tapes.
    Seeded(Box<ChaCha8Rng>),
    /// Fixed tape of bits; exhausting it is an error.
    Tape { bits: Vec<bool>, pos: usize },
}

impl RandomSource {
    pub fn os() -> Self {
        RandomSource::Os(rand::rngs::OsRng)
    }

    pub fn seeded(seed: u64) -> Self {
        RandomSource::Seeded(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    pub fn tape(bits: Vec<bool>) -> Self {
        RandomSource::Tape { bits, pos: 0 }
    }

    /// Tape built from a `0`/`1` string.
    pub fn tape_str(s: &str) -> Result<Self> {
        Ok(Self::tape(BitWord::parse(s)?.bits().to_vec()))
    }

    pub fn next_bit(&mut self) -> Result<bool> {
        match self {
            RandomSource::Os(rng) => Ok(rng.next_u32() & 1 == 1),
            RandomSource::Seeded(rng) => Ok(rng.next_u32() & 1 == 1),
            RandomSource::Tape { bits, pos } => {
                let bit = bits.get(*pos).copied().ok_or(Error::TapeExhausted(*pos))?;
                *pos += 1;
                Ok(bit)
            }
        }
    }

    pub fn next_bits(&mut self, count: usize) -> Result<Vec<bool>> {
        (0..count).map(|_| self.next_bit()).collect()
    }
}

/// Applies the randomized map: codeword of `u` followed by filler bits drawn
/// from `rnd`, to total length n*.
pub fn phi(table: &CodeTable, u: &BitWord, rnd: &mut RandomSource) -> Result<BitWord> {
    let mut out = encode(table, u)?;
    let filler = table.n_star() - out.len();
    for _ in 0..filler {
        out.push(rnd.next_bit()?);
    }
    Ok(out)
}

/// Recovers the plaintext from a padded word; total inverse of `phi` for
/// every filler tape.
pub fn phi_inverse(table: &CodeTable, v: &BitWord) -> Result<BitWord> {
    if v.len() != table.n_star() {
        return Err(Error::DimensionMismatch {
            expected: table.n_star(),
            got: v.len(),
        });
    }
    let (u, _consumed) = decode_prefix(table, v)?;
    Ok(u)
}

/// The distribution on n*-bit words induced by `phi` under a message source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedPmf {
    n_star: usize,
    probs: Vec<Ratio>,
}

impl InducedPmf {
    pub fn n_star(&self) -> usize {
        self.n_star
    }

    pub fn probs(&self) -> &[Ratio] {
        &self.probs
    }

    pub fn prob(&self, word: usize) -> &Ratio {
        &self.probs[word]
    }

    pub fn max_prob(&self) -> &Ratio {
        self.probs.iter().max().expect("nonempty")
    }

    /// Re-views the induced distribution as a plain pmf on n* bits.
    pub fn to_pmf(&self) -> Pmf {
        Pmf::new(self.n_star as u32, self.probs.clone()).expect("induced pmf is a distribution")
    }
}

/// Computes pi_p by exact fiber enumeration: each legal word u spreads
/// `p(u)` uniformly over the 2^(n* - |codeword|) words extending its
/// codeword.
pub fn induced_pmf(table: &CodeTable, p: &Pmf) -> Result<InducedPmf> {
    if p.n() != table.n() {
        return Err(Error::DimensionMismatch {
            expected: table.n() as usize,
            got: p.n() as usize,
        });
    }
    let n_star = table.n_star();
    if n_star > 26 {
        return Err(Error::GuardExceeded(format!(
            "induced distribution needs a 2^{n_star}-entry table"
        )));
    }
    let mut probs = vec![Ratio::zero(); 1usize << n_star];
    for word in 0..p.len() {
        if p.prob(word).is_zero() {
            continue;
        }
        let cw = table.codeword(word).ok_or(Error::IllegalPlaintext)?;
        let filler_bits = n_star - cw.len();
        let mass = p.prob(word) * pow2(-(filler_bits as i64));
        let base = cw
            .bits()
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
            << filler_bits;
        for filler in 0..1usize << filler_bits {
            probs[base | filler] = mass.clone();
        }
    }
    Ok(InducedPmf { n_star, probs })
}

/// Min-entropy in bits: `-log2` of the largest probability mass.
pub fn min_entropy(probs: &[Ratio]) -> f64 {
    let max = probs.iter().max().expect("nonempty distribution");
    -log2(max)
}

impl Pmf {
    pub fn min_entropy(&self) -> f64 {
        min_entropy(self.probs())
    }
}

impl InducedPmf {
    pub fn min_entropy(&self) -> f64 {
        min_entropy(self.probs())
    }
}

/// Exact witness behind the delta gap: the maximum over members p and legal
/// words u of `p(u) * 2^|codeword(u)|`, so that
/// `delta_gap = log2(witness)`.
///
/// For a single member, `n* - h_min(pi_p) = log2 max_u p(u) 2^(l_u)`; the
/// supremum over an explicit family enumerates members. For the Bernoulli
/// continuum the supremum over theta exchanges with the max over words, so
/// the per-word NML suprema give the exact answer with no grid.
pub fn delta_gap_witness(table: &CodeTable, family: &FamilySpec) -> Result<Ratio> {
    if family.n() != table.n() {
        return Err(Error::DimensionMismatch {
            expected: table.n() as usize,
            got: family.n() as usize,
        });
    }
    let per_word_sup: Vec<Ratio> = match family.kind() {
        FamilyKind::Explicit => {
            let size = 1usize << family.n();
            (0..size)
                .map(|u| {
                    family
                        .members()
                        .iter()
                        .map(|m| m.prob(u))
                        .max()
                        .expect("explicit family nonempty")
                        .clone()
                })
                .collect()
        }
        FamilyKind::BernoulliNml => crate::family::build_shtarkov(family)?.p_max().to_vec(),
    };
    let mut witness: Option<Ratio> = None;
    for (word, sup) in per_word_sup.iter().enumerate() {
        if sup.is_zero() {
            continue;
        }
        let cw = table.codeword(word).ok_or(Error::IllegalPlaintext)?;
        let value = sup * pow2(cw.len() as i64);
        if witness.as_ref().is_none_or(|w| value > *w) {
            witness = Some(value);
        }
    }
    witness.ok_or_else(|| Error::InvalidFamily("family has empty support".into()))
}

/// `sup_p (n* - h_min(pi_p))` in bits; exact enumeration for explicit
/// families and the exchanged-supremum closed form for the Bernoulli
/// continuum.
pub fn delta_gap(table: &CodeTable, family: &FamilySpec) -> Result<f64> {
    Ok(log2(&delta_gap_witness(table, family)?))
}
