//! An entropically secure symmetric cipher with a short key for message
//! sources whose distribution is only known to belong to a declared family,
//! together with an exact desk-scale verification harness.
//!
//! The pipeline, in the order the modules build on each other:
//!
//! 1. [`family`] — declare a family of distributions on {0,1}^n and compute
//!    its maximum-likelihood model: per-word suprema `p_max`, the normalizer
//!    `S_P`, and the coding distribution `q = p_max / S_P`.
//! 2. [`coding`] — rank words by descending q and assign a canonical
//!    prefix-free code with lengths `ceil(-log2 q)`; the longest legal
//!    codeword fixes the padded length n*.
//! 3. [`padding`] — the randomized map: codeword plus uniform filler bits up
//!    to n*. Padding lifts every source in the family to min-entropy close
//!    to n*; the residual `delta` gap is tracked exactly.
//! 4. [`sbcipher`] — size a small-bias sample space for the leakage target,
//!    expand a 2*ell-bit key into an n*-bit pad via finite-field powering,
//!    and XOR. Decryption strips the pad and prefix-decodes.
//! 5. [`verify`] — exhaustive, exact-rational checks: ciphertext
//!    distributions, statistical distance to uniform, min-entropy and gap
//!    audits, and the full bias spectrum of the sample space.
//!
//! All probability arithmetic is exact (`num`'s big rationals); floats only
//! appear where a quantity is inherently a logarithm or a user-facing
//! report. The verification guards default to desk scale (n <= 8,
//! n* <= 16, ell <= 12) and are overridable.

pub mod bits;
pub mod coding;
pub mod config;
pub mod error;
pub mod family;
pub mod gf2;
pub mod padding;
pub mod ratio;
pub mod sbcipher;
pub mod verify;

pub use bits::BitWord;
pub use coding::{build_code, decode_prefix, encode, CodeTable};
pub use config::{fingerprint, parse_family, to_config_string};
pub use error::{Error, Result};
pub use family::{
    build_shtarkov, pmf_validate_slice, ratio_check, FamilyKind, FamilySpec, Pmf, RatioCheck,
    ShtarkovModel,
};
pub use padding::{
    delta_gap, delta_gap_witness, induced_pmf, min_entropy, phi, phi_inverse, InducedPmf,
    RandomSource,
};
pub use ratio::Ratio;
pub use sbcipher::{
    build_space, decrypt, decrypt_with_space, encrypt, expand_key, key_from_file_string,
    key_to_file_string, plan_params, CipherParams, CiphertextContainer, DeltaSource, Key,
    SecurityMode, SmallBiasSpace,
};
pub use verify::{
    audit_config, audit_construction, bias_spectrum, bias_spectrum_full, exact_cipher_distribution,
    exact_cipher_distribution_enumerated, indistinguishability_check, pad_distribution,
    statistical_distance, xor_convolve, Guards, VerificationReport,
};
