//! Arithmetic in GF(2^ell) and irreducible modulus search.
//!
//! Field elements are bit-packed polynomials over GF(2): bit i holds the
//! coefficient of x^i. The modulus carries its leading coefficient, so a
//! degree-ell modulus occupies ell+1 bits (cap: ell <= 63). The modulus for
//! each degree is the one with the smallest bit pattern among irreducible
//! polynomials with nonzero constant term, found by ascending search; for
//! ell = 1 that fixes x + 1 (pattern `11`).

use crate::error::{Error, Result};

/// Largest supported field degree (modulus must fit in a u64).
pub const MAX_FIELD_DEGREE: u32 = 63;

/// Degree of a nonzero polynomial; 0 for the zero polynomial.
fn degree(p: u64) -> u32 {
    63 - p.leading_zeros()
}

/// Remainder of polynomial division over GF(2).
fn poly_rem(mut a: u64, b: u64) -> u64 {
    debug_assert!(b != 0);
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Product in GF(2^ell) with the given modulus (degree ell, leading bit
/// set). Shift-and-add with per-step reduction keeps everything in 64 bits.
pub fn gf_mul(mut a: u64, mut b: u64, modulus: u64, ell: u32) -> u64 {
    debug_assert!((1..=MAX_FIELD_DEGREE).contains(&ell));
    debug_assert_eq!(degree(modulus), ell);
    let top = 1u64 << ell;
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= modulus;
        }
    }
    acc
}

/// Squaring in the quotient ring mod `modulus` (used by the irreducibility
/// test; the argument need not be reduced below the modulus degree as long
/// as it fits 63 bits).
fn gf_square_mod(a: u64, modulus: u64) -> u64 {
    let a = poly_rem(a, modulus);
    let ell = degree(modulus);
    gf_mul(a, a, modulus, ell)
}

/// Rabin irreducibility test for a polynomial of degree >= 1 over GF(2):
/// f is irreducible iff x^(2^ell) == x (mod f) and, for every prime p
/// dividing ell, gcd(x^(2^(ell/p)) - x, f) = 1.
pub fn is_irreducible(f: u64) -> bool {
    if f < 2 {
        return false;
    }
    let ell = degree(f);
    if ell == 1 {
        return true;
    }
    // Frobenius orbit: x, x^2, x^4, ..., x^(2^k) mod f.
    let x = 2u64;
    let mut frob = Vec::with_capacity(ell as usize + 1);
    frob.push(x);
    let mut t = x;
    for _ in 0..ell {
        t = gf_square_mod(t, f);
        frob.push(t);
    }
    if frob[ell as usize] != poly_rem(x, f) {
        return false;
    }
    for p in prime_factors(ell) {
        let k = (ell / p) as usize;
        if poly_gcd(f, frob[k] ^ x) != 1 {
            return false;
        }
    }
    true
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest-bit-pattern irreducible polynomial of degree ell with nonzero
/// constant term, by ascending exhaustive search. (For ell >= 2 the
/// constant-term restriction is vacuous: x divides anything without it.)
pub fn smallest_irreducible(ell: u32) -> Result<u64> {
    if ell == 0 || ell > MAX_FIELD_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "field degree must lie in 1..={MAX_FIELD_DEGREE}, got {ell}"
        )));
    }
    let base = 1u64 << ell;
    let mut t = 1u64;
    while t < base {
        let candidate = base | t;
        if is_irreducible(candidate) {
            return Ok(candidate);
        }
        t += 2;
    }
    unreachable!("an irreducible polynomial exists for every degree");
}

/// Renders a modulus as its coefficient bit string, most significant first
/// (e.g. x^3 + x + 1 -> "1011").
pub fn modulus_to_string(modulus: u64) -> String {
    let ell = degree(modulus);
    (0..=ell)
        .rev()
        .map(|i| if modulus >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses the output of [`modulus_to_string`].
pub fn modulus_from_string(s: &str) -> Result<u64> {
    if s.is_empty() || s.len() > 64 || !s.starts_with('1') {
        return Err(Error::InvalidParameter(format!("invalid modulus {s:?}")));
    }
    let mut value = 0u64;
    for c in s.chars() {
        match c {
            '0' => value <<= 1,
            '1' => value = (value << 1) | 1,
            _ => return Err(Error::InvalidParameter(format!("invalid modulus {s:?}"))),
        }
    }
    Ok(value)
}
