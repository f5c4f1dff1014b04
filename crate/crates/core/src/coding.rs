//! The ordered prefix-free Shannon code over the Shtarkov distribution q.
//!
//! Words are ranked by descending q (ties broken by ascending word value),
//! assigned lengths `ceil(-log2 q_i)`, and given canonical codewords: ranks
//! are walked in order and each codeword is the numerically smallest bit
//! string of its length that keeps the code prefix-free. Zero-probability
//! words get no codeword; `n_star` is the maximum codeword length over legal
//! plaintexts.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::One;

use crate::bits::BitWord;
use crate::error::{Error, Result};
use crate::family::ShtarkovModel;
use crate::ratio::{ceil_log2, pow2, ratio_to_string, Ratio};

/// An ordered prefix-free code table with its rank map and padded length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTable {
    n: u32,
    /// rank -> word index, all 2^n words, legal words first.
    order: Vec<usize>,
    /// word index -> rank (the map nu).
    rank_of: Vec<usize>,
    /// Number of legal (positive-q) words; only these ranks carry codewords.
    legal_count: usize,
    /// Codeword length per rank, ascending; len == legal_count.
    lengths: Vec<usize>,
    /// Canonical codeword per rank; len == legal_count.
    codewords: Vec<BitWord>,
    /// q per rank (descending), kept for dumps and length checks.
    q_by_rank: Vec<Ratio>,
    n_star: usize,
}

impl CodeTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn n_star(&self) -> usize {
        self.n_star
    }

    pub fn legal_count(&self) -> usize {
        self.legal_count
    }

    /// Rank of a word under the map nu.
    pub fn rank(&self, word: usize) -> usize {
        self.rank_of[word]
    }

    /// Word at a given rank.
    pub fn word_at_rank(&self, rank: usize) -> usize {
        self.order[rank]
    }

    pub fn is_legal(&self, word: usize) -> bool {
        self.rank_of[word] < self.legal_count
    }

    /// Codeword of a legal word, by word index.
    pub fn codeword(&self, word: usize) -> Option<&BitWord> {
        let rank = self.rank_of[word];
        self.codewords.get(rank)
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn codewords(&self) -> &[BitWord] {
        &self.codewords
    }

    pub fn q_by_rank(&self) -> &[Ratio] {
        &self.q_by_rank
    }

    /// Exact Kraft sum of the length profile.
    pub fn kraft_sum(&self) -> Ratio {
        self.lengths.iter().map(|&l| pow2(-(l as i64))).sum()
    }

    /// Human-readable listing: rank, word, q, length, codeword.
    pub fn dump(&self) -> String {
        let mut out = String::from("rank word q length codeword\n");
        for rank in 0..self.legal_count {
            let word = self.order[rank];
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                rank,
                BitWord::from_index(word, self.n as usize),
                ratio_to_string(&self.q_by_rank[rank]),
                self.lengths[rank],
                self.codewords[rank]
            );
        }
        out
    }
}

/// Code length for a positive probability: `ceil(-log2 q)`, exactly.
fn shannon_length(q: &Ratio) -> usize {
    // ceil(-log2 q) = ceil(log2 (1/q)); q <= 1 keeps this nonnegative.
    ceil_log2(&q.recip()).max(0) as usize
}

/// Builds the code table for a Shtarkov model.
pub fn build_code(model: &ShtarkovModel) -> Result<CodeTable> {
    let n = model.n();
    let size = 1usize << n;

    // Rank words by descending q, ties by ascending word value. Zero-q words
    // sort last and receive no codeword.
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| {
        model
            .q()
            .prob(b)
            .cmp(model.q().prob(a))
            .then(a.cmp(&b))
    });
    let legal_count = order
        .iter()
        .take_while(|&&u| model.is_legal(u))
        .count();
    if legal_count == 0 {
        return Err(Error::InvalidFamily(
            "no word has positive probability".into(),
        ));
    }

    let mut rank_of = vec![0usize; size];
    for (rank, &word) in order.iter().enumerate() {
        rank_of[word] = rank;
    }

    let q_by_rank: Vec<Ratio> = order[..legal_count]
        .iter()
        .map(|&u| model.q().prob(u).clone())
        .collect();
    let lengths: Vec<usize> = q_by_rank.iter().map(shannon_length).collect();
    if let Some(&max_len) = lengths.iter().max() {
        if max_len > 60 {
            return Err(Error::GuardExceeded(format!(
                "codeword length {max_len} exceeds the 60-bit desk-scale cap \
                 (a family member assigns probability below 2^-60)"
            )));
        }
    }

    // Kraft check; with exact arithmetic the Shannon profile always fits.
    let kraft: Ratio = lengths.iter().map(|&l| pow2(-(l as i64))).sum();
    if kraft > Ratio::one() {
        return Err(Error::KraftViolation(ratio_to_string(&kraft)));
    }

    // Canonical assignment: lengths ascend with rank, so advancing a counter
    // and left-shifting on each length increase yields, at every step, the
    // numerically smallest string preserving prefix-freeness.
    let mut codewords = Vec::with_capacity(legal_count);
    let mut code: u64 = 0;
    for (i, &len) in lengths.iter().enumerate() {
        if i > 0 {
            code = (code + 1) << (len - lengths[i - 1]);
        }
        if len > 0 && len < 64 && code >> len != 0 {
            return Err(Error::KraftViolation(format!(
                "codeword counter overflowed at rank {i}"
            )));
        }
        codewords.push(BitWord::from_index(code as usize, len));
    }

    // A single-word support yields the empty codeword; pad n_star to one bit
    // so the padded word is still a word.
    let n_star = lengths.iter().copied().max().unwrap_or(0).max(1);

    Ok(CodeTable {
        n,
        order,
        rank_of,
        legal_count,
        lengths,
        codewords,
        q_by_rank,
        n_star,
    })
}

/// Encodes a legal plaintext to its codeword.
pub fn encode(table: &CodeTable, u: &BitWord) -> Result<BitWord> {
    if u.len() != table.n as usize {
        return Err(Error::DimensionMismatch {
            expected: table.n as usize,
            got: u.len(),
        });
    }
    let word = u.to_index();
    table
        .codeword(word)
        .cloned()
        .ok_or(Error::IllegalPlaintext)
}

/// Finds the unique codeword prefixing `v`; returns the decoded plaintext
/// and the number of bits consumed.
pub fn decode_prefix(table: &CodeTable, v: &BitWord) -> Result<(BitWord, usize)> {
    if v.is_empty() && table.lengths.first() != Some(&0) {
        return Err(Error::DecodeError);
    }
    // Lengths are ascending; index codewords by (length, value) and probe
    // each distinct length once.
    let mut by_len: HashMap<(usize, u64), usize> = HashMap::new();
    for (rank, cw) in table.codewords.iter().enumerate() {
        let val = cw
            .bits()
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        by_len.insert((cw.len(), val), rank);
    }
    let mut prefix_val = 0u64;
    let mut consumed = 0usize;
    // Probe length 0 (single-support table) before consuming bits.
    loop {
        if let Some(&rank) = by_len.get(&(consumed, prefix_val)) {
            let word = table.order[rank];
            return Ok((BitWord::from_index(word, table.n as usize), consumed));
        }
        if consumed == v.len() || consumed >= 63 {
            return Err(Error::DecodeError);
        }
        prefix_val = (prefix_val << 1) | u64::from(v.bit(consumed));
        consumed += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_shtarkov, FamilySpec, Pmf};
    use crate::ratio::parse_ratio;

    fn r(s: &str) -> Ratio {
        parse_ratio(s).unwrap()
    }

    fn table_for(member_rows: &[&[&str]], n: u32) -> CodeTable {
        let members = member_rows
            .iter()
            .map(|row| Pmf::new(n, row.iter().map(|s| r(s)).collect()).unwrap())
            .collect();
        let model = build_shtarkov(&FamilySpec::explicit(members).unwrap()).unwrap();
        build_code(&model).unwrap()
    }

    fn skewed_table() -> CodeTable {
        table_for(&[&["1/2", "1/4", "1/8", "1/8"]], 2)
    }

    fn codeword_strings(table: &CodeTable) -> Vec<String> {
        table.codewords().iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn skewed_example_code() {
        let table = skewed_table();
        assert_eq!(table.lengths(), &[1, 2, 3, 3]);
        assert_eq!(codeword_strings(&table), vec!["0", "10", "110", "111"]);
        assert_eq!(table.n_star(), 3);
        assert_eq!(table.kraft_sum(), Ratio::one());
    }

    #[test]
    fn uniform_code_is_block_code() {
        let table = table_for(&[&["1/4", "1/4", "1/4", "1/4"]], 2);
        assert_eq!(table.lengths(), &[2, 2, 2, 2]);
        assert_eq!(codeword_strings(&table), vec!["00", "01", "10", "11"]);
        assert_eq!(table.n_star(), 2);
    }

    #[test]
    fn bernoulli_nml_n2_code() {
        let model =
            build_shtarkov(&FamilySpec::bernoulli_nml(2).unwrap()).unwrap();
        let table = build_code(&model).unwrap();
        // q ordered: 2/5 (word 00), 2/5 (word 11), 1/10 (01), 1/10 (10).
        assert_eq!(table.lengths(), &[2, 2, 4, 4]);
        assert_eq!(codeword_strings(&table), vec!["00", "01", "1000", "1001"]);
        assert_eq!(table.n_star(), 4);
        assert_eq!(table.kraft_sum(), r("5/8"));
        // Tie-break: word 00 before word 11 at equal q.
        assert_eq!(table.word_at_rank(0), 0b00);
        assert_eq!(table.word_at_rank(1), 0b11);
    }

    #[test]
    fn encode_examples() {
        let table = skewed_table();
        let enc = |s: &str| encode(&table, &BitWord::parse(s).unwrap()).unwrap().to_string();
        assert_eq!(enc("00"), "0");
        assert_eq!(enc("01"), "10");
        assert_eq!(enc("10"), "110");
        assert_eq!(enc("11"), "111");

        let uniform = table_for(&[&["1/4", "1/4", "1/4", "1/4"]], 2);
        assert_eq!(
            encode(&uniform, &BitWord::parse("10").unwrap())
                .unwrap()
                .to_string(),
            "10"
        );

        let model = build_shtarkov(&FamilySpec::bernoulli_nml(2).unwrap()).unwrap();
        let nml = build_code(&model).unwrap();
        // 01 has rank 2 under the documented tie-break.
        assert_eq!(
            encode(&nml, &BitWord::parse("01").unwrap())
                .unwrap()
                .to_string(),
            "1000"
        );
    }

    #[test]
    fn encode_rejects_illegal_plaintext() {
        let table = table_for(&[&["1/2", "1/2", "0", "0"]], 2);
        assert!(matches!(
            encode(&table, &BitWord::parse("10").unwrap()),
            Err(Error::IllegalPlaintext)
        ));
    }

    #[test]
    fn decode_examples() {
        let table = skewed_table();
        let (u, consumed) = decode_prefix(&table, &BitWord::parse("110").unwrap()).unwrap();
        assert_eq!(u.to_string(), "10");
        assert_eq!(consumed, 3);

        let (u, consumed) = decode_prefix(&table, &BitWord::parse("011").unwrap()).unwrap();
        assert_eq!(u.to_string(), "00");
        assert_eq!(consumed, 1);

        let uniform = table_for(&[&["1/4", "1/4", "1/4", "1/4"]], 2);
        let (u, consumed) = decode_prefix(&uniform, &BitWord::parse("01").unwrap()).unwrap();
        assert_eq!(u.to_string(), "01");
        assert_eq!(consumed, 2);
    }

    #[test]
    fn decode_rejects_missing_prefix() {
        // Table with codewords {0, 10, 110, 111}: "1" alone decodes nothing.
        let table = skewed_table();
        assert!(decode_prefix(&table, &BitWord::parse("1").unwrap()).is_err());
    }

    #[test]
    fn round_trip_with_arbitrary_suffix() {
        let table = skewed_table();
        for word in 0..4usize {
            let u = BitWord::from_index(word, 2);
            let cw = encode(&table, &u).unwrap();
            for suffix in 0..8usize {
                let mut v = cw.clone();
                for i in 0..3 {
                    v.push((suffix >> i) & 1 == 1);
                }
                let (decoded, consumed) = decode_prefix(&table, &v).unwrap();
                assert_eq!(decoded, u);
                assert_eq!(consumed, cw.len());
            }
        }
    }

    #[test]
    fn single_support_table_pads_to_one_bit() {
        let table = table_for(&[&["1", "0", "0", "0"]], 2);
        assert_eq!(table.legal_count(), 1);
        assert_eq!(table.lengths(), &[0]);
        assert_eq!(table.n_star(), 1);
        let cw = encode(&table, &BitWord::parse("00").unwrap()).unwrap();
        assert!(cw.is_empty());
        let (u, consumed) = decode_prefix(&table, &BitWord::parse("1").unwrap()).unwrap();
        assert_eq!(u.to_string(), "00");
        assert_eq!(consumed, 0);
    }

    #[test]
    fn determinism() {
        let a = skewed_table();
        let b = skewed_table();
        assert_eq!(a, b);
    }

    fn assert_table_invariants(table: &CodeTable) {
        // Prefix-freeness by pairwise scan.
        for i in 0..table.legal_count() {
            for j in 0..table.legal_count() {
                if i != j {
                    assert!(!table.codewords()[i].is_prefix_of(&table.codewords()[j]));
                }
            }
        }
        // Kraft.
        assert!(table.kraft_sum() <= Ratio::one());
        // Length bound: l_i < -log2 q_i + 2, i.e. q_i * 2^l_i < 4, and the
        // Shannon profile l_i = ceil(-log2 q_i) means q_i * 2^l_i >= 1.
        for (q, &len) in table.q_by_rank().iter().zip(table.lengths()) {
            let scaled = q * pow2(len as i64);
            assert!(scaled < Ratio::from_integer(4.into()));
            assert!(scaled >= Ratio::one());
        }
        // q descending over ranks.
        for pair in table.q_by_rank().windows(2) {
            assert!(pair[0] >= pair[1]);
        }
    }

    #[test]
    fn invariants_on_fixed_tables() {
        assert_table_invariants(&skewed_table());
        assert_table_invariants(&table_for(&[&["1/4", "1/4", "1/4", "1/4"]], 2));
        let model = build_shtarkov(&FamilySpec::bernoulli_nml(2).unwrap()).unwrap();
        assert_table_invariants(&build_code(&model).unwrap());
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        fn arb_pmf(n: u32) -> impl Strategy<Value = Pmf> {
            let size = 1usize << n;
            proptest::collection::vec(0u32..16, size).prop_map(move |mut weights| {
                if weights.iter().all(|&w| w == 0) {
                    weights[0] = 1;
                }
                let total: u32 = weights.iter().sum();
                Pmf::new(
                    n,
                    weights
                        .iter()
                        .map(|&w| Ratio::new(w.into(), total.into()))
                        .collect(),
                )
                .unwrap()
            })
        }

        proptest! {
            #[test]
            fn random_families_build_valid_tables(
                n in 1u32..=4,
                member_count in 1usize..=4,
                seed in any::<u64>(),
            ) {
                // Derive members deterministically from the seed to keep the
                // strategy simple.
                let mut members = Vec::new();
                let mut state = seed;
                for _ in 0..member_count {
                    let size = 1usize << n;
                    let mut weights = vec![0u64; size];
                    for w in weights.iter_mut() {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        *w = state >> 59;
                    }
                    if weights.iter().all(|&w| w == 0) {
                        weights[0] = 1;
                    }
                    let total: u64 = weights.iter().sum();
                    members.push(
                        Pmf::new(
                            n,
                            weights
                                .iter()
                                .map(|&w| Ratio::new(w.into(), total.into()))
                                .collect(),
                        )
                        .unwrap(),
                    );
                }
                let model = build_shtarkov(&FamilySpec::explicit(members).unwrap()).unwrap();
                let table = build_code(&model).unwrap();
                assert_table_invariants(&table);
            }

            #[test]
            fn round_trip_random_single_member(pmf in arb_pmf(3)) {
                let model = build_shtarkov(&FamilySpec::explicit(vec![pmf]).unwrap()).unwrap();
                let table = build_code(&model).unwrap();
                for word in 0..8usize {
                    let u = BitWord::from_index(word, 3);
                    match encode(&table, &u) {
                        Ok(cw) => {
                            let mut v = cw.clone();
                            // Extend to n_star with zeros.
                            while v.len() < table.n_star() {
                                v.push(false);
                            }
                            let (decoded, consumed) = decode_prefix(&table, &v).unwrap();
                            prop_assert_eq!(decoded, u);
                            prop_assert_eq!(consumed, cw.len());
                        }
                        Err(Error::IllegalPlaintext) => {
                            prop_assert!(!table.is_legal(word));
                        }
                        Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
                    }
                }
            }
        }
    }
}
