//! Exact desk-scale verification: ciphertext distributions, statistical
//! distance, min-entropy audits, and the bias spectrum.
//!
//! Everything here is exhaustive enumeration over exact rationals — no
//! sampling, no tolerances. The ciphertext distribution is the XOR
//! convolution of the induced distribution with the pad distribution,
//! computed through the Walsh-Hadamard transform; a naive enumeration
//! (`exact_cipher_distribution_enumerated`) ships alongside it so the two
//! routes can be compared bit for bit.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::coding::{build_code, CodeTable};
use crate::config;
use crate::error::{Error, Result};
use crate::family::{build_shtarkov, FamilyKind, FamilySpec, Pmf};
use crate::padding::{delta_gap, delta_gap_witness, induced_pmf};
use crate::ratio::{ceil_log2, pow2, ratio_from_f64, ratio_to_string, to_f64_lossy, Ratio};
use crate::sbcipher::{
    build_space, expand_key, plan_params, CipherParams, DeltaSource, Key, SecurityMode,
    SmallBiasSpace, DEFAULT_PLAN_MAX_ELL,
};

/// Enumeration guards. Defaults keep every verification run at laptop
/// scale; callers may override explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    pub max_n: u32,
    pub max_n_star: usize,
    pub max_ell: u32,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            max_n: 8,
            max_n_star: 16,
            max_ell: 12,
        }
    }
}

impl Guards {
    fn check_n(&self, n: u32) -> Result<()> {
        if n > self.max_n {
            return Err(Error::GuardExceeded(format!(
                "n = {n} exceeds guard {} (override with care)",
                self.max_n
            )));
        }
        Ok(())
    }

    fn check_n_star(&self, n_star: usize) -> Result<()> {
        if n_star > self.max_n_star {
            return Err(Error::GuardExceeded(format!(
                "n_star = {n_star} exceeds guard {}",
                self.max_n_star
            )));
        }
        Ok(())
    }

    fn check_ell(&self, ell: u32) -> Result<()> {
        if ell > self.max_ell {
            return Err(Error::GuardExceeded(format!(
                "ell = {ell} exceeds guard {} (2^{} keys to enumerate)",
                self.max_ell,
                2 * ell
            )));
        }
        Ok(())
    }
}

/// Half the L1 distance between two distributions on the same space.
pub fn statistical_distance(a: &Pmf, b: &Pmf) -> Result<Ratio> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n() as usize,
            got: b.n() as usize,
        });
    }
    let sum: Ratio = a
        .probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(sum / Ratio::from_integer(2.into()))
}

/// In-place Walsh-Hadamard transform over exact rationals.
fn wht(data: &mut [Ratio]) {
    debug_assert!(data.len().is_power_of_two());
    let mut half = 1;
    while half < data.len() {
        for block in (0..data.len()).step_by(half * 2) {
            for i in block..block + half {
                let a = data[i].clone();
                let b = data[i + half].clone();
                data[i] = &a + &b;
                data[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// XOR convolution of two distributions on {0,1}^m via the dyadic identity
/// `conv = WHT^-1(WHT(a) . WHT(b))`; exact.
pub fn xor_convolve(a: &[Ratio], b: &[Ratio]) -> Vec<Ratio> {
    assert_eq!(a.len(), b.len());
    assert!(a.len().is_power_of_two());
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    wht(&mut fa);
    wht(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    wht(&mut fa);
    let scale = pow2(-(a.len().trailing_zeros() as i64));
    for x in fa.iter_mut() {
        *x *= &scale;
    }
    fa
}

/// Exact distribution of `expand_key` over all 2^(2 ell) keys, as a pmf on
/// n*-bit words.
pub fn pad_distribution(space: &SmallBiasSpace, guards: &Guards) -> Result<Pmf> {
    guards.check_ell(space.ell())?;
    guards.check_n_star(space.n_star())?;
    let counts = pad_counts(space);
    let total = pow2(2 * space.ell() as i64);
    let probs = counts
        .into_iter()
        .map(|c| Ratio::from_integer(c.into()) / &total)
        .collect();
    Pmf::new(space.n_star() as u32, probs)
}

/// Histogram of pad values over all keys. For each x the powers x^1..x^n*
/// are computed once; each y contributes one parity per bit.
fn pad_counts(space: &SmallBiasSpace) -> Vec<u64> {
    let ell = space.ell();
    let n_star = space.n_star();
    let modulus = space.modulus();
    let mut counts = vec![0u64; 1usize << n_star];
    let field_size = 1u64 << ell;
    let mut x_powers = vec![0u64; n_star];
    for x in 0..field_size {
        let mut p = x;
        for slot in x_powers.iter_mut() {
            *slot = p;
            p = crate::gf2::gf_mul(p, x, modulus, ell);
        }
        for y in 0..field_size {
            let mut word = 0usize;
            for &xp in &x_powers {
                word = (word << 1) | ((xp & y).count_ones() as usize & 1);
            }
            counts[word] += 1;
        }
    }
    counts
}

/// Exact ciphertext distribution under message source `p`, uniform filler
/// bits, and a uniform key: the XOR convolution of the induced distribution
/// with the pad distribution.
pub fn exact_cipher_distribution(
    table: &CodeTable,
    space: &SmallBiasSpace,
    p: &Pmf,
    guards: &Guards,
) -> Result<Pmf> {
    if space.n_star() != table.n_star() {
        return Err(Error::HeaderMismatch(
            "space and table disagree on n_star".into(),
        ));
    }
    guards.check_n_star(table.n_star())?;
    guards.check_ell(space.ell())?;
    let pi = induced_pmf(table, p)?;
    let pad = pad_distribution(space, guards)?;
    let cipher = xor_convolve(pi.probs(), pad.probs());
    Pmf::new(table.n_star() as u32, cipher)
}

/// Reference route for the same distribution: enumerate every message,
/// filler tape, and key directly. Exponentially slower; exists so the fast
/// route has something exact to be compared against.
pub fn exact_cipher_distribution_enumerated(
    table: &CodeTable,
    space: &SmallBiasSpace,
    p: &Pmf,
    guards: &Guards,
) -> Result<Pmf> {
    if space.n_star() != table.n_star() {
        return Err(Error::HeaderMismatch(
            "space and table disagree on n_star".into(),
        ));
    }
    guards.check_n_star(table.n_star())?;
    guards.check_ell(space.ell())?;
    let n_star = table.n_star();
    let key_total = pow2(2 * space.ell() as i64);
    let mut acc = vec![Ratio::zero(); 1usize << n_star];
    let field_size = 1u64 << space.ell();
    for word in 0..p.len() {
        if p.prob(word).is_zero() {
            continue;
        }
        let cw = table.codeword(word).ok_or(Error::IllegalPlaintext)?;
        let filler_bits = n_star - cw.len();
        let weight = p.prob(word) * pow2(-(filler_bits as i64)) / &key_total;
        let base = cw
            .bits()
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
            << filler_bits;
        for filler in 0..1usize << filler_bits {
            let padded = base | filler;
            for x in 0..field_size {
                for y in 0..field_size {
                    let key = Key::from_elements(x, y, space.ell());
                    let pad = expand_key(space, &key)?;
                    let pad_word = pad
                        .bits()
                        .iter()
                        .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
                    acc[padded ^ pad_word] += &weight;
                }
            }
        }
    }
    Pmf::new(n_star as u32, acc)
}

/// Full bias spectrum of the construction: for every mask s the exact
/// correlation `|E_keys (-1)^<s, pad>|`, computed by transforming the pad
/// histogram. Index = mask; entry 0 is always 1 (the empty mask) and is
/// excluded from maxima by contract.
pub fn bias_spectrum_full(space: &SmallBiasSpace, guards: &Guards) -> Result<Vec<Ratio>> {
    guards.check_ell(space.ell())?;
    guards.check_n_star(space.n_star())?;
    let counts = pad_counts(space);
    let mut transformed: Vec<i64> = counts.iter().map(|&c| c as i64).collect();
    wht_i64(&mut transformed);
    let total = pow2(2 * space.ell() as i64);
    Ok(transformed
        .into_iter()
        .map(|t| Ratio::from_integer(t.abs().into()) / &total)
        .collect())
}

fn wht_i64(data: &mut [i64]) {
    let mut half = 1;
    while half < data.len() {
        for block in (0..data.len()).step_by(half * 2) {
            for i in block..block + half {
                let (a, b) = (data[i], data[i + half]);
                data[i] = a + b;
                data[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// Largest nonzero-mask correlation and the smallest mask attaining it.
pub fn bias_spectrum(space: &SmallBiasSpace, guards: &Guards) -> Result<(Ratio, usize)> {
    let spectrum = bias_spectrum_full(space, guards)?;
    let mut best_mask = 1usize;
    let mut best = spectrum[1].clone();
    for (mask, corr) in spectrum.iter().enumerate().skip(2) {
        if *corr > best {
            best = corr.clone();
            best_mask = mask;
        }
    }
    Ok((best, best_mask))
}

/// One pass/fail line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of the construction audit: distances, gap accounting, bias
/// certificate, and per-check verdicts. `Display` renders a stable field
/// order for golden-file tests.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub family_kind: FamilyKind,
    pub family_size: Option<usize>,
    pub n: u32,
    pub n_star: usize,
    pub s_p: Ratio,
    pub epsilon: f64,
    pub delta_gap: f64,
    pub delta_hat: f64,
    pub ell: u32,
    pub modulus: u64,
    pub k_theory: i64,
    pub k_actual: u32,
    pub delta_req: f64,
    pub bias_max_correlation: Ratio,
    pub bias_argmax_mask: usize,
    /// SD of each member's ciphertext distribution to uniform, in member
    /// order.
    pub member_distances: Vec<Ratio>,
    pub max_distance: Ratio,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verification report")?;
        match self.family_size {
            Some(size) => writeln!(
                f,
                "family: kind={} n={} members={}",
                self.family_kind.as_str(),
                self.n,
                size
            )?,
            None => writeln!(f, "family: kind={} n={}", self.family_kind.as_str(), self.n)?,
        }
        writeln!(f, "s_p: {} ({:.6})", ratio_to_string(&self.s_p), to_f64_lossy(&self.s_p))?;
        writeln!(f, "n_star: {}", self.n_star)?;
        writeln!(f, "epsilon: {}", self.epsilon)?;
        writeln!(f, "delta_gap: {:.9}", self.delta_gap)?;
        writeln!(f, "delta_hat: {:.9}", self.delta_hat)?;
        writeln!(f, "ell: {}", self.ell)?;
        writeln!(f, "modulus: {}", crate::gf2::modulus_to_string(self.modulus))?;
        writeln!(f, "k_theory: {}", self.k_theory)?;
        writeln!(f, "k_actual: {}", self.k_actual)?;
        writeln!(f, "delta_req: {:.12}", self.delta_req)?;
        writeln!(
            f,
            "bias: max_correlation={} ({:.12}) argmax_mask={:b}",
            ratio_to_string(&self.bias_max_correlation),
            ratio_f64(&self.bias_max_correlation),
            self.bias_argmax_mask
        )?;
        for (i, d) in self.member_distances.iter().enumerate() {
            writeln!(f, "member_sd {}: {} ({:.12})", i, ratio_to_string(d), ratio_f64(d))?;
        }
        writeln!(
            f,
            "max_sd: {} ({:.12})",
            ratio_to_string(&self.max_distance),
            ratio_f64(&self.max_distance)
        )?;
        for check in &self.checks {
            writeln!(
                f,
                "check {}: {} ({})",
                check.name,
                if check.pass { "pass" } else { "FAIL" },
                check.detail
            )?;
        }
        write!(f, "verdict: {}", if self.all_pass() { "pass" } else { "FAIL" })
    }
}

fn ratio_f64(r: &Ratio) -> f64 {
    to_f64_lossy(r)
}

/// Statistical-distance sweep against the uniform reference distribution G.
///
/// Definition-style check: the report passes iff every member's exact
/// ciphertext distribution is within `params.epsilon` of uniform. The
/// comparison converts epsilon to an exact rational, so there is no float
/// tolerance in the verdict.
pub fn indistinguishability_check(
    family: &FamilySpec,
    table: &CodeTable,
    space: &SmallBiasSpace,
    params: &CipherParams,
    guards: &Guards,
) -> Result<VerificationReport> {
    if family.kind() != FamilyKind::Explicit {
        return Err(Error::GuardExceeded(
            "indistinguishability sweep needs an explicit (enumerable) family".into(),
        ));
    }
    guards.check_n(family.n())?;
    let model = build_shtarkov(family)?;
    let uniform = Pmf::uniform(table.n_star() as u32);
    let mut member_distances = Vec::with_capacity(family.members().len());
    for member in family.members() {
        let dist = exact_cipher_distribution(table, space, member, guards)?;
        member_distances.push(statistical_distance(&dist, &uniform)?);
    }
    let max_distance = member_distances
        .iter()
        .cloned()
        .max()
        .unwrap_or_else(Ratio::zero);
    let (bias_max, bias_mask) = bias_spectrum(space, guards)?;
    let gap = delta_gap(table, family)?;

    let report = assemble_report(
        family,
        model.s_p(),
        table,
        space,
        params,
        gap,
        delta_gap_witness(table, family)?,
        bias_max,
        bias_mask,
        member_distances,
        max_distance,
    );
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    family: &FamilySpec,
    s_p: &Ratio,
    table: &CodeTable,
    space: &SmallBiasSpace,
    params: &CipherParams,
    gap: f64,
    gap_witness: Ratio,
    bias_max: Ratio,
    bias_mask: usize,
    member_distances: Vec<Ratio>,
    max_distance: Ratio,
) -> VerificationReport {
    let mut checks = Vec::new();

    // Gap bound the padding construction guarantees:
    // witness <= 2^(ceil(log2 S_P) + 2), checked exactly on the witness
    // rather than on the log.
    let gap_bound_exp = ceil_log2(s_p) + 2;
    let gap_ok = gap_witness <= pow2(gap_bound_exp);
    checks.push(CheckResult {
        name: "delta_gap_bound",
        pass: gap_ok,
        detail: format!("delta_gap {:.9} <= {}", gap, gap_bound_exp),
    });

    // Bias certificate against the planned requirement.
    let bias_ok = bias_max <= ratio_from_f64(params.delta_req);
    checks.push(CheckResult {
        name: "bias",
        pass: bias_ok,
        detail: format!(
            "max_correlation {} vs delta_req {:.12}",
            ratio_to_string(&bias_max),
            params.delta_req
        ),
    });

    // Definition-style indistinguishability against uniform G.
    let eps_exact = ratio_from_f64(params.epsilon);
    let sd_ok = max_distance <= eps_exact;
    checks.push(CheckResult {
        name: "indistinguishability",
        pass: sd_ok,
        detail: format!(
            "max_sd {} vs epsilon {}",
            ratio_to_string(&max_distance),
            params.epsilon
        ),
    });

    VerificationReport {
        family_kind: family.kind(),
        family_size: match family.kind() {
            FamilyKind::Explicit => Some(family.members().len()),
            FamilyKind::BernoulliNml => None,
        },
        n: family.n(),
        n_star: table.n_star(),
        s_p: s_p.clone(),
        epsilon: params.epsilon,
        delta_gap: gap,
        delta_hat: params.delta_hat,
        ell: space.ell(),
        modulus: space.modulus(),
        k_theory: params.k_theory,
        k_actual: params.k_actual,
        delta_req: params.delta_req,
        bias_max_correlation: bias_max,
        bias_argmax_mask: bias_mask,
        member_distances,
        max_distance,
        checks,
    }
}

/// End-to-end audit: build the whole pipeline from the family, then run the
/// gap, bias, and indistinguishability checks. Sub-check failures are
/// reported in the returned verdicts, not raised as errors.
///
/// `force_ell` overrides the planner's field degree (used as a negative
/// control: an undersized field must make the harness report a failure).
pub fn audit_construction(
    family: &FamilySpec,
    epsilon: f64,
    mode: SecurityMode,
    delta_source_exact: bool,
    guards: &Guards,
    force_ell: Option<u32>,
) -> Result<VerificationReport> {
    guards.check_n(family.n())?;
    let model = build_shtarkov(family)?;
    let table = build_code(&model)?;
    let gap = delta_gap(&table, family)?;
    let delta_source = if delta_source_exact {
        DeltaSource::Exact(gap)
    } else {
        DeltaSource::Bound
    };
    let mut params = plan_params(
        model.s_p(),
        family.n(),
        table.n_star(),
        epsilon,
        mode,
        delta_source,
        DEFAULT_PLAN_MAX_ELL,
    )?;
    if let Some(ell) = force_ell {
        if ell == 0 {
            return Err(Error::InvalidParameter("forced ell must be positive".into()));
        }
        params.ell = ell;
        params.k_actual = 2 * ell;
    }
    let space = if force_ell.is_some() {
        SmallBiasSpace::new(params.ell, params.n_star)?
    } else {
        build_space(&params)?
    };
    indistinguishability_check(family, &table, &space, &params, guards)
}

/// Convenience wrapper used by the CLI: audit a family given as config text.
pub fn audit_config(
    text: &str,
    epsilon: f64,
    mode: SecurityMode,
    delta_source_exact: bool,
    guards: &Guards,
    force_ell: Option<u32>,
) -> Result<VerificationReport> {
    let family = config::parse_family(text)?;
    audit_construction(&family, epsilon, mode, delta_source_exact, guards, force_ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::parse_ratio;
    use num_traits::One;

    fn r(s: &str) -> Ratio {
        parse_ratio(s).unwrap()
    }

    fn skewed_family() -> FamilySpec {
        FamilySpec::explicit(vec![Pmf::new(
            2,
            vec![r("1/2"), r("1/4"), r("1/8"), r("1/8")],
        )
        .unwrap()])
        .unwrap()
    }

    fn two_bernoulli(n: u32) -> FamilySpec {
        FamilySpec::explicit(vec![
            Pmf::bernoulli_product(n, &r("1/4")).unwrap(),
            Pmf::bernoulli_product(n, &r("3/4")).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn statistical_distance_examples() {
        let a = Pmf::new(1, vec![r("3/4"), r("1/4")]).unwrap();
        assert_eq!(statistical_distance(&a, &a).unwrap(), Ratio::zero());

        let point0 = Pmf::new(1, vec![r("1"), r("0")]).unwrap();
        let point1 = Pmf::new(1, vec![r("0"), r("1")]).unwrap();
        assert_eq!(statistical_distance(&point0, &point1).unwrap(), Ratio::one());

        let b = Pmf::new(1, vec![r("1/4"), r("3/4")]).unwrap();
        assert_eq!(statistical_distance(&a, &b).unwrap(), r("1/2"));

        assert!(statistical_distance(&a, &Pmf::uniform(2)).is_err());
    }

    #[test]
    fn xor_convolve_matches_direct_convolution() {
        // Direct double loop as the oracle.
        let a: Vec<Ratio> = vec![r("1/2"), r("1/4"), r("1/8"), r("1/8")];
        let b: Vec<Ratio> = vec![r("1/3"), r("1/3"), r("1/6"), r("1/6")];
        let fast = xor_convolve(&a, &b);
        let mut slow = vec![Ratio::zero(); 4];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                slow[i ^ j] += x * y;
            }
        }
        assert_eq!(fast, slow);
        assert_eq!(fast.iter().sum::<Ratio>(), Ratio::one());
    }

    #[test]
    fn convolving_with_uniform_gives_uniform() {
        let a: Vec<Ratio> = vec![r("1/2"), r("1/4"), r("1/8"), r("1/8")];
        let u = vec![r("1/4"); 4];
        assert_eq!(xor_convolve(&a, &u), u);
    }

    #[test]
    fn pad_distribution_is_a_distribution_and_biased_toward_zero() {
        let space = SmallBiasSpace::new(3, 3).unwrap();
        let pad = pad_distribution(&space, &Guards::default()).unwrap();
        assert!(pad.validate());
        // Keys with x = 0 or y = 0 give the all-zero pad, so word 0 carries
        // at least (2 * 8 - 1)/64 of the mass.
        assert!(*pad.prob(0) >= r("15/64"));
    }

    #[test]
    fn cipher_distribution_routes_agree() {
        let family = two_bernoulli(2);
        let model = build_shtarkov(&family).unwrap();
        let table = build_code(&model).unwrap();
        let space = SmallBiasSpace::new(4, table.n_star()).unwrap();
        let guards = Guards::default();
        for member in family.members() {
            let fast = exact_cipher_distribution(&table, &space, member, &guards).unwrap();
            let slow =
                exact_cipher_distribution_enumerated(&table, &space, member, &guards).unwrap();
            assert_eq!(fast, slow);
            assert!(fast.validate());
        }
    }

    #[test]
    fn skewed_family_is_perfectly_hidden_by_any_space() {
        // The induced distribution is already uniform, so the ciphertext is
        // uniform no matter how biased the pad.
        let family = skewed_family();
        let model = build_shtarkov(&family).unwrap();
        let table = build_code(&model).unwrap();
        for ell in [1u32, 2, 5] {
            let space = SmallBiasSpace::new(ell, table.n_star()).unwrap();
            let dist = exact_cipher_distribution(
                &table,
                &space,
                &family.members()[0],
                &Guards::default(),
            )
            .unwrap();
            assert_eq!(dist, Pmf::uniform(3));
        }
    }

    #[test]
    fn monotone_masking_data_processing() {
        // SD(cipher, uniform) <= SD(pad, uniform) for any fixed source.
        let family = two_bernoulli(2);
        let model = build_shtarkov(&family).unwrap();
        let table = build_code(&model).unwrap();
        let guards = Guards::default();
        for ell in [1u32, 2, 3, 6] {
            let space = SmallBiasSpace::new(ell, table.n_star()).unwrap();
            let pad = pad_distribution(&space, &guards).unwrap();
            let uniform = Pmf::uniform(table.n_star() as u32);
            let pad_sd = statistical_distance(&pad, &uniform).unwrap();
            for member in family.members() {
                let dist = exact_cipher_distribution(&table, &space, member, &guards).unwrap();
                let sd = statistical_distance(&dist, &uniform).unwrap();
                assert!(sd <= pad_sd, "ell={ell}: {sd} > {pad_sd}");
            }
        }
    }

    #[test]
    fn bias_spectrum_matches_direct_mask_scan() {
        let space = SmallBiasSpace::new(3, 4).unwrap();
        let guards = Guards::default();
        let spectrum = bias_spectrum_full(&space, &guards).unwrap();
        // Direct scan: for each mask, average the parity sign over keys.
        let field_size = 1u64 << space.ell();
        #[allow(clippy::needless_range_loop)]
        for mask in 1..1usize << space.n_star() {
            let mut sum: i64 = 0;
            for x in 0..field_size {
                for y in 0..field_size {
                    let key = Key::from_elements(x, y, space.ell());
                    let pad = expand_key(&space, &key).unwrap();
                    let pad_word = pad
                        .bits()
                        .iter()
                        .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
                    let parity = (pad_word & mask).count_ones() & 1;
                    sum += if parity == 1 { -1 } else { 1 };
                }
            }
            let expected = Ratio::from_integer(sum.abs().into()) / pow2(2 * space.ell() as i64);
            assert_eq!(spectrum[mask], expected, "mask {mask:b}");
        }
    }

    #[test]
    fn bias_spectrum_within_construction_bound() {
        let guards = Guards::default();
        for (ell, n_star) in [(6u32, 3usize), (5, 8), (4, 4)] {
            let space = SmallBiasSpace::new(ell, n_star).unwrap();
            let (max_corr, mask) = bias_spectrum(&space, &guards).unwrap();
            let bound = Ratio::new(n_star.into(), (1u64 << ell).into());
            assert!(max_corr <= bound, "ell={ell} n*={n_star} mask={mask:b}");
        }
    }

    #[test]
    fn single_bit_pad_correlation_is_exact() {
        // n* = 1: the lone mask's correlation equals |1 - 2 Pr[pad bit = 1]|.
        let space = SmallBiasSpace::new(2, 1).unwrap();
        let guards = Guards::default();
        let spectrum = bias_spectrum_full(&space, &guards).unwrap();
        let pad = pad_distribution(&space, &guards).unwrap();
        let expected = (Ratio::one() - Ratio::from_integer(2.into()) * pad.prob(1)).abs();
        assert_eq!(spectrum[1], expected);
    }

    #[test]
    fn guards_reject_oversized_enumerations() {
        let space = SmallBiasSpace::new(13, 3).unwrap();
        assert!(matches!(
            bias_spectrum(&space, &Guards::default()),
            Err(Error::GuardExceeded(_))
        ));
        let space = SmallBiasSpace::new(3, 17).unwrap();
        assert!(matches!(
            pad_distribution(&space, &Guards::default()),
            Err(Error::GuardExceeded(_))
        ));
    }

    #[test]
    fn audit_uniform_singleton_passes() {
        let family = FamilySpec::explicit(vec![Pmf::uniform(2)]).unwrap();
        let report = audit_construction(
            &family,
            0.5,
            SecurityMode::EntropicSecurity,
            false,
            &Guards::default(),
            None,
        )
        .unwrap();
        assert!(report.all_pass());
        assert_eq!(report.delta_gap, 0.0);
        assert_eq!(report.max_distance, Ratio::zero());
    }

    #[test]
    fn audit_skewed_singleton_passes_at_quarter() {
        let report = audit_construction(
            &skewed_family(),
            0.25,
            SecurityMode::EntropicSecurity,
            false,
            &Guards::default(),
            None,
        )
        .unwrap();
        assert!(report.all_pass());
        assert_eq!(report.delta_gap, 0.0);
        assert_eq!(report.max_distance, Ratio::zero());
    }

    #[test]
    fn audit_two_bernoulli_passes_with_margin() {
        let report = audit_construction(
            &two_bernoulli(2),
            0.25,
            SecurityMode::EntropicSecurity,
            false,
            &Guards::default(),
            None,
        )
        .unwrap();
        assert!(report.all_pass());
        assert!(report.max_distance < ratio_from_f64(0.25));
    }

    #[test]
    fn audit_negative_control_fails_with_tiny_field() {
        let report = audit_construction(
            &two_bernoulli(2),
            1.0 / 16.0,
            SecurityMode::EntropicSecurity,
            false,
            &Guards::default(),
            Some(1),
        )
        .unwrap();
        assert!(!report.all_pass());
        // The oversized bias is certainly caught; the SD sweep catches the
        // leak as well at this epsilon.
        assert!(report.checks.iter().any(|c| c.name == "bias" && !c.pass));
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "indistinguishability" && !c.pass));
    }

    #[test]
    fn audit_rejects_bernoulli_nml_sweep() {
        let family = FamilySpec::bernoulli_nml(2).unwrap();
        assert!(matches!(
            audit_construction(
                &family,
                0.25,
                SecurityMode::EntropicSecurity,
                false,
                &Guards::default(),
                None
            ),
            Err(Error::GuardExceeded(_))
        ));
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        fn arb_dist(m: usize) -> impl Strategy<Value = Vec<Ratio>> {
            proptest::collection::vec(0u32..64, 1usize << m).prop_map(|mut w| {
                if w.iter().all(|&x| x == 0) {
                    w[0] = 1;
                }
                let total: u32 = w.iter().sum();
                w.iter()
                    .map(|&x| Ratio::new(x.into(), total.into()))
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn wht_convolution_matches_direct(a in arb_dist(4), b in arb_dist(4)) {
                let fast = xor_convolve(&a, &b);
                let mut slow = vec![Ratio::zero(); a.len()];
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        slow[i ^ j] += x * y;
                    }
                }
                prop_assert_eq!(&fast, &slow);
                prop_assert_eq!(fast.iter().sum::<Ratio>(), Ratio::one());
            }
        }
    }

    #[test]
    fn report_display_is_stable() {
        let report = audit_construction(
            &skewed_family(),
            0.25,
            SecurityMode::EntropicSecurity,
            true,
            &Guards::default(),
            None,
        )
        .unwrap();
        let text = report.to_string();
        let expected_prefix = "verification report\nfamily: kind=explicit n=2 members=1\ns_p: 1 (1.000000)\nn_star: 3\nepsilon: 0.25\ndelta_gap: 0.000000000\ndelta_hat: 0.000000000\n";
        assert!(
            text.starts_with(expected_prefix),
            "report drifted:\n{text}"
        );
        assert!(text.ends_with("verdict: pass"));
        // Same input, same text.
        let again = audit_construction(
            &skewed_family(),
            0.25,
            SecurityMode::EntropicSecurity,
            true,
            &Guards::default(),
            None,
        )
        .unwrap();
        assert_eq!(text, again.to_string());
    }
}
