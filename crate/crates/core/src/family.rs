//! Distribution families over {0,1}^n and their Shtarkov maximum-likelihood
//! model.
//!
//! Given a family P, the model takes the per-word supremum
//! `p_max(u) = sup_{p in P} p(u)`, normalizes by `S_P = sum_u p_max(u)`, and
//! yields the coding distribution `q(u) = p_max(u) / S_P`. Two family kinds
//! ship: an explicit finite list of distributions, and the full Bernoulli
//! product continuum whose supremum has the closed form
//! `(w/n)^w ((n-w)/n)^(n-w)` for a word of weight w.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratio::{pow2, Ratio};

/// A probability mass function on {0,1}^n, stored as 2^n exact rationals in
/// big-endian word order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pmf {
    n: u32,
    probs: Vec<Ratio>,
}

impl Pmf {
    /// Builds a pmf, rejecting tables that are not distributions.
    pub fn new(n: u32, probs: Vec<Ratio>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPmf("n must be at least 1".into()));
        }
        if probs.len() != 1usize << n {
            return Err(Error::InvalidPmf(format!(
                "expected {} entries for n = {}, got {}",
                1usize << n,
                n,
                probs.len()
            )));
        }
        let pmf = Self { n, probs };
        if !pmf.validate() {
            return Err(Error::InvalidPmf(
                "entries must be nonnegative and sum to 1".into(),
            ));
        }
        Ok(pmf)
    }

    /// Uniform distribution on {0,1}^n.
    pub fn uniform(n: u32) -> Self {
        let mass = pow2(-(n as i64));
        Self {
            n,
            probs: vec![mass; 1usize << n],
        }
    }

    /// Product of n independent Bernoulli(theta) bits; bit value 1 has
    /// probability theta.
    pub fn bernoulli_product(n: u32, theta: &Ratio) -> Result<Self> {
        if theta.is_negative() || *theta > Ratio::one() {
            return Err(Error::InvalidPmf("theta must lie in [0,1]".into()));
        }
        let comp = Ratio::one() - theta;
        let probs = (0..1usize << n)
            .map(|u| {
                let w = u.count_ones();
                pow_ratio(theta, w) * pow_ratio(&comp, n - w)
            })
            .collect();
        Pmf::new(n, probs)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn prob(&self, word: usize) -> &Ratio {
        &self.probs[word]
    }

    pub fn probs(&self) -> &[Ratio] {
        &self.probs
    }

    /// Largest point mass.
    pub fn max_prob(&self) -> &Ratio {
        self.probs.iter().max().expect("pmf is nonempty")
    }

    /// True iff all entries are nonnegative and the total mass is exactly 1.
    pub fn validate(&self) -> bool {
        pmf_validate_slice(&self.probs)
    }
}

fn pow_ratio(base: &Ratio, exp: u32) -> Ratio {
    // 0^0 = 1 by the NML convention.
    if exp == 0 {
        return Ratio::one();
    }
    let mut acc = base.clone();
    for _ in 1..exp {
        acc *= base;
    }
    acc
}

/// Pure predicate behind [`Pmf::validate`]; usable on raw tables.
pub fn pmf_validate_slice(probs: &[Ratio]) -> bool {
    if probs.is_empty() {
        return false;
    }
    if probs.iter().any(|p| p.is_negative()) {
        return false;
    }
    probs.iter().sum::<Ratio>() == Ratio::one()
}

/// Family kinds shipped: a finite explicit list, or the Bernoulli product
/// continuum handled through its NML closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Explicit,
    BernoulliNml,
}

impl FamilyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyKind::Explicit => "explicit",
            FamilyKind::BernoulliNml => "bernoulli-nml",
        }
    }
}

/// A declared set of message distributions on {0,1}^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    n: u32,
    kind: FamilyKind,
    members: Vec<Pmf>,
}

impl FamilySpec {
    pub fn explicit(members: Vec<Pmf>) -> Result<Self> {
        let n = members
            .first()
            .ok_or_else(|| Error::InvalidFamily("explicit family needs at least one member".into()))?
            .n();
        if members.iter().any(|m| m.n() != n) {
            return Err(Error::InvalidFamily(
                "all members must share the same n".into(),
            ));
        }
        Ok(Self {
            n,
            kind: FamilyKind::Explicit,
            members,
        })
    }

    pub fn bernoulli_nml(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidFamily("n must be at least 1".into()));
        }
        Ok(Self {
            n,
            kind: FamilyKind::BernoulliNml,
            members: Vec::new(),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// Explicit members; empty for the Bernoulli continuum.
    pub fn members(&self) -> &[Pmf] {
        &self.members
    }
}

/// The Shtarkov model of a family: per-word suprema, normalizer, and the
/// coding distribution q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShtarkovModel {
    n: u32,
    p_max: Vec<Ratio>,
    s_p: Ratio,
    q: Pmf,
}

impl ShtarkovModel {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p_max(&self) -> &[Ratio] {
        &self.p_max
    }

    pub fn s_p(&self) -> &Ratio {
        &self.s_p
    }

    pub fn q(&self) -> &Pmf {
        &self.q
    }

    /// A word is a legal plaintext iff some family member gives it positive
    /// probability; zero-probability words are excluded from the plaintext
    /// space because their code length would be infinite.
    pub fn is_legal(&self, word: usize) -> bool {
        self.p_max[word].is_positive()
    }

    pub fn legal_words(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.p_max.len()).filter(|&u| self.is_legal(u))
    }
}

/// Computes the Shtarkov maximum-likelihood model (p_max, S_P, q).
pub fn build_shtarkov(family: &FamilySpec) -> Result<ShtarkovModel> {
    let n = family.n();
    let size = 1usize << n;
    let p_max: Vec<Ratio> = match family.kind() {
        FamilyKind::Explicit => (0..size)
            .map(|u| {
                family
                    .members()
                    .iter()
                    .map(|m| m.prob(u))
                    .max()
                    .expect("explicit family is nonempty")
                    .clone()
            })
            .collect(),
        FamilyKind::BernoulliNml => (0..size).map(|u| bernoulli_nml_sup(n, u)).collect(),
    };
    let s_p: Ratio = p_max.iter().sum();
    if !s_p.is_positive() {
        return Err(Error::InvalidFamily(
            "every word has zero probability under the family".into(),
        ));
    }
    let q = Pmf::new(n, p_max.iter().map(|p| p / &s_p).collect())?;
    Ok(ShtarkovModel { n, p_max, s_p, q })
}

/// sup over theta of Bernoulli(theta)^n at a word of weight w: the maximizer
/// is theta* = w/n, giving (w/n)^w ((n-w)/n)^(n-w) with 0^0 = 1.
fn bernoulli_nml_sup(n: u32, word: usize) -> Ratio {
    let w = word.count_ones();
    let n_ratio = Ratio::from_integer(n.into());
    let w_over_n = Ratio::from_integer(w.into()) / &n_ratio;
    let rest_over_n = Ratio::from_integer((n - w).into()) / &n_ratio;
    pow_ratio(&w_over_n, w) * pow_ratio(&rest_over_n, n - w)
}

/// Outcome of the maximum-likelihood ratio check of a claimed member against
/// a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioCheck {
    /// True iff p(u) <= q(u) * S_P for every word (and p vanishes wherever q
    /// does).
    pub ok: bool,
    /// max over words with q(u) > 0 of p(u)/q(u); `None` when p puts mass on
    /// a word with q(u) = 0, where the ratio is unbounded.
    pub max_ratio: Option<Ratio>,
    /// Word index attaining the maximum (or a q = 0 violation).
    pub argmax: usize,
}

/// Checks the maximum-likelihood ratio bound for a (claimed) member.
pub fn ratio_check(model: &ShtarkovModel, p: &Pmf) -> Result<RatioCheck> {
    if p.n() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n() as usize,
            got: p.n() as usize,
        });
    }
    let mut max_ratio: Option<Ratio> = None;
    let mut argmax = 0usize;
    for u in 0..p.len() {
        let q_u = model.q().prob(u);
        if q_u.is_zero() {
            if p.prob(u).is_positive() {
                return Ok(RatioCheck {
                    ok: false,
                    max_ratio: None,
                    argmax: u,
                });
            }
            continue;
        }
        let ratio = p.prob(u) / q_u;
        if max_ratio.as_ref().is_none_or(|m| ratio > *m) {
            max_ratio = Some(ratio);
            argmax = u;
        }
    }
    let ok = match &max_ratio {
        Some(m) => *m <= *model.s_p(),
        None => true,
    };
    Ok(RatioCheck {
        ok,
        max_ratio,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::parse_ratio;

    fn r(s: &str) -> Ratio {
        parse_ratio(s).unwrap()
    }

    fn pmf(n: u32, entries: &[&str]) -> Pmf {
        Pmf::new(n, entries.iter().map(|s| r(s)).collect()).unwrap()
    }

    /// The worked compression example: p = (1/2, 1/4, 1/8, 1/8) on two bits.
    pub(crate) fn skewed_example_pmf() -> Pmf {
        Pmf::new(
            2,
            vec![r("1/2"), r("1/4"), r("1/8"), r("1/8")],
        )
        .unwrap()
    }

    #[test]
    fn singleton_uniform_normalizes_to_itself() {
        let family = FamilySpec::explicit(vec![Pmf::uniform(2)]).unwrap();
        let model = build_shtarkov(&family).unwrap();
        assert_eq!(*model.s_p(), Ratio::one());
        assert_eq!(model.q(), &Pmf::uniform(2));
    }

    #[test]
    fn two_bernoulli_family_model() {
        // Hand-enumerated: members Bernoulli(1/4)^2 and Bernoulli(3/4)^2.
        let family = FamilySpec::explicit(vec![
            Pmf::bernoulli_product(2, &r("1/4")).unwrap(),
            Pmf::bernoulli_product(2, &r("3/4")).unwrap(),
        ])
        .unwrap();
        let model = build_shtarkov(&family).unwrap();
        assert_eq!(
            model.p_max(),
            &[r("9/16"), r("3/16"), r("3/16"), r("9/16")]
        );
        assert_eq!(*model.s_p(), r("3/2"));
        assert_eq!(model.q(), &pmf(2, &["3/8", "1/8", "1/8", "3/8"]));
        // Finite-family bound.
        assert!(*model.s_p() <= Ratio::from_integer(2.into()));
    }

    #[test]
    fn bernoulli_nml_closed_form_n2() {
        let family = FamilySpec::bernoulli_nml(2).unwrap();
        let model = build_shtarkov(&family).unwrap();
        assert_eq!(model.p_max(), &[r("1"), r("1/4"), r("1/4"), r("1")]);
        assert_eq!(*model.s_p(), r("5/2"));
        assert_eq!(model.q(), &pmf(2, &["2/5", "1/10", "1/10", "2/5"]));
    }

    #[test]
    fn bernoulli_nml_closed_form_matches_grid_search() {
        // Independent oracle: maximize theta^w (1-theta)^(n-w) over a fine
        // grid and compare within 2^-20.
        let tol = 1.0 / (1u64 << 20) as f64;
        for n in 1..=10u32 {
            let family = FamilySpec::bernoulli_nml(n).unwrap();
            let model = build_shtarkov(&family).unwrap();
            for w in 0..=n {
                let word = (1usize << w) - 1; // any word of weight w
                let closed = crate::ratio::log2(&model.p_max()[word]).exp2();
                let mut best = 0.0f64;
                let grid = 1 << 12;
                for g in 0..=grid {
                    let theta = g as f64 / grid as f64;
                    let val = theta.powi(w as i32) * (1.0 - theta).powi((n - w) as i32);
                    if val > best {
                        best = val;
                    }
                }
                assert!(
                    (closed - best).abs() < tol,
                    "n={n} w={w}: closed {closed} vs grid {best}"
                );
            }
        }
    }

    #[test]
    fn ratio_check_uniform_singleton() {
        let family = FamilySpec::explicit(vec![Pmf::uniform(2)]).unwrap();
        let model = build_shtarkov(&family).unwrap();
        let check = ratio_check(&model, &Pmf::uniform(2)).unwrap();
        assert!(check.ok);
        assert_eq!(check.max_ratio, Some(Ratio::one()));
    }

    #[test]
    fn ratio_check_member_and_non_member() {
        let family = FamilySpec::explicit(vec![
            Pmf::bernoulli_product(2, &r("1/4")).unwrap(),
            Pmf::bernoulli_product(2, &r("3/4")).unwrap(),
        ])
        .unwrap();
        let model = build_shtarkov(&family).unwrap();

        let member = Pmf::bernoulli_product(2, &r("1/4")).unwrap();
        let check = ratio_check(&model, &member).unwrap();
        assert!(check.ok);
        assert_eq!(check.max_ratio, Some(r("3/2")));

        // Bernoulli(1/2)^2 is not a member; the check detects it.
        let outsider = Pmf::bernoulli_product(2, &r("1/2")).unwrap();
        let check = ratio_check(&model, &outsider).unwrap();
        assert!(!check.ok);
        assert_eq!(check.max_ratio, Some(r("2")));
    }

    #[test]
    fn ratio_check_dimension_mismatch() {
        let family = FamilySpec::explicit(vec![Pmf::uniform(2)]).unwrap();
        let model = build_shtarkov(&family).unwrap();
        assert!(ratio_check(&model, &Pmf::uniform(3)).is_err());
    }

    #[test]
    fn pmf_validate_cases() {
        assert!(Pmf::uniform(3).validate());
        assert!(skewed_example_pmf().validate());
        // Negative entry rejected at construction.
        assert!(Pmf::new(2, vec![r("1/2"), r("1/2"), r("1/10"), r("-1/10")]).is_err());
        assert!(!pmf_validate_slice(&[
            r("1/2"),
            r("1/2"),
            r("1/10"),
            r("-1/10")
        ]));
        // Sum != 1 rejected.
        assert!(Pmf::new(1, vec![r("1/2"), r("1/4")]).is_err());
    }

    #[test]
    fn zero_probability_words_are_illegal() {
        let member = Pmf::new(2, vec![r("1/2"), r("1/2"), r("0"), r("0")]).unwrap();
        let family = FamilySpec::explicit(vec![member]).unwrap();
        let model = build_shtarkov(&family).unwrap();
        assert!(model.is_legal(0));
        assert!(model.is_legal(1));
        assert!(!model.is_legal(2));
        assert!(!model.is_legal(3));
        assert_eq!(model.legal_words().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn dominance_over_members() {
        let members = vec![
            pmf(2, &["1/2", "1/4", "1/8", "1/8"]),
            pmf(2, &["1/8", "1/8", "1/4", "1/2"]),
        ];
        let family = FamilySpec::explicit(members.clone()).unwrap();
        let model = build_shtarkov(&family).unwrap();
        for m in &members {
            for u in 0..4 {
                assert!(*m.prob(u) <= model.p_max()[u]);
            }
        }
        assert!(*model.s_p() >= Ratio::one());
    }

    mod prop {
        use super::*;
        use num_traits::One;
        use proptest::prelude::*;

        prop_compose! {
            fn arb_family()(
                n in 1u32..=4,
                rows in proptest::collection::vec(
                    proptest::collection::vec(0u32..32, 16),
                    1..=6,
                ),
            ) -> FamilySpec {
                let size = 1usize << n;
                let members = rows
                    .into_iter()
                    .map(|row| {
                        let mut weights: Vec<u32> = row.into_iter().take(size).collect();
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
                    .collect();
                FamilySpec::explicit(members).unwrap()
            }
        }

        proptest! {
            #[test]
            fn model_invariants_hold(family in arb_family()) {
                let model = build_shtarkov(&family).unwrap();
                // Normalization, exactly.
                let total: Ratio = model.q().probs().iter().sum();
                prop_assert_eq!(total, Ratio::one());
                // 1 <= S_P <= |members|.
                prop_assert!(*model.s_p() >= Ratio::one());
                prop_assert!(
                    *model.s_p() <= Ratio::from_integer(family.members().len().into())
                );
                // Dominance and the ratio bound for every member.
                for member in family.members() {
                    for u in 0..member.len() {
                        prop_assert!(*member.prob(u) <= model.p_max()[u]);
                    }
                    let check = ratio_check(&model, member).unwrap();
                    prop_assert!(check.ok);
                }
            }
        }
    }
}
