//! Password interpretation: turning a printable-ASCII password into the
//! password index, an angle in degrees that positions the trigon.
//!
//! The derivation runs in three steps:
//!
//! 1. every character is replaced by its decimal ASCII code, concatenated
//!    without padding ([`ascii_concat`]);
//! 2. the leading three quarters of those digits are reduced modulo 180 and
//!    rendered as a three-digit head, after which the remaining quarter is
//!    appended verbatim ([`compute_pai`]);
//! 3. a decimal point is placed after the second or third digit of the
//!    result, depending on whether its first three digits reach 180
//!    ([`compute_pi`]).
//!
//! Everything here works on decimal digit strings, so passwords of any
//! length are handled without overflow.

use std::fmt;

use thiserror::Error;

/// Shortest accepted password, in characters.
pub const MIN_PASSWORD_LEN: usize = 4;

const PRINTABLE: std::ops::RangeInclusive<u32> = 32..=126;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PasswordError {
    #[error("password must contain at least {MIN_PASSWORD_LEN} characters")]
    EmptyOrShortPassword,
    #[error("character {position} has code {code}, outside printable ASCII")]
    NonPrintableCharacter { position: usize, code: u32 },
    #[error("digit string must hold at least {MIN_PASSWORD_LEN} decimal digits")]
    DigitStringTooShort,
    #[error("password does not map to an angle strictly between 0 and 180 degrees")]
    DegeneratePassword,
}

/// Concatenates the decimal ASCII codes of every character of `password`.
///
/// `"admin"` becomes `"97100109105110"`.
pub fn ascii_concat(password: &str) -> Result<String, PasswordError> {
    let mut digits = String::with_capacity(password.len() * 3);
    let mut count = 0;
    for (position, ch) in password.chars().enumerate() {
        let code = ch as u32;
        if !PRINTABLE.contains(&code) {
            return Err(PasswordError::NonPrintableCharacter { position, code });
        }
        digits.push_str(&code.to_string());
        count += 1;
    }
    if count < MIN_PASSWORD_LEN {
        return Err(PasswordError::EmptyOrShortPassword);
    }
    Ok(digits)
}

/// The ASCII-interpreted integer of a password, kept as its canonical
/// decimal rendering (no leading zeros, `"0"` for zero).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AsciiInterpretation(String);

impl AsciiInterpretation {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Number of decimal digits.
    pub fn digit_count(&self) -> usize {
        self.0.len()
    }

    /// The integer value, if it fits.
    pub fn to_u128(&self) -> Option<u128> {
        self.0.parse().ok()
    }
}

impl fmt::Display for AsciiInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Builds the ASCII-interpreted integer from a digit string.
///
/// With `m = floor(3n/4)` for `n` digits, the first `m` digits taken modulo
/// 180 form a zero-padded three-digit head and the remaining `n - m` digits
/// are appended. Leading zeros of the result are dropped.
pub fn compute_pai(digits: &str) -> Result<AsciiInterpretation, PasswordError> {
    if digits.len() < MIN_PASSWORD_LEN || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(PasswordError::DigitStringTooShort);
    }
    let split = 3 * digits.len() / 4;
    let (head, tail) = digits.split_at(split);
    let head = head.bytes().fold(0u32, |rem, b| (rem * 10 + u32::from(b - b'0')) % 180);

    let joined = format!("{head:03}{tail}");
    let canonical = joined.trim_start_matches('0');
    let canonical = if canonical.is_empty() { "0" } else { canonical };
    Ok(AsciiInterpretation(canonical.to_owned()))
}

/// Which scaling was applied to the interpreted integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexScale {
    /// First three digits are at least 180: two integer digits are kept.
    TwoIntegerDigits,
    /// First three digits are below 180: three integer digits are kept.
    ThreeIntegerDigits,
}

/// The password index `P_i`, an angle in degrees in the open interval (0, 180).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PasswordIndex(f64);

impl PasswordIndex {
    pub fn new(degrees: f64) -> Result<Self, PasswordError> {
        if degrees > 0.0 && degrees < 180.0 {
            Ok(Self(degrees))
        } else {
            Err(PasswordError::DegeneratePassword)
        }
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

impl fmt::Display for PasswordIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Full trace of a password index derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexDerivation {
    pub digits: String,
    pub interpretation: AsciiInterpretation,
    pub scale: IndexScale,
    pub index: PasswordIndex,
}

/// Derives the password index together with its intermediate values.
pub fn derive_password_index(password: &str) -> Result<IndexDerivation, PasswordError> {
    let digits = ascii_concat(password)?;
    let interpretation = compute_pai(&digits)?;
    let pai = interpretation.as_str();
    if pai.len() < MIN_PASSWORD_LEN {
        return Err(PasswordError::DegeneratePassword);
    }

    // `pai` has no leading zeros, so comparing the three-digit prefix as a
    // string against "180" is the same as comparing the integers.
    let (scale, integer_digits) = if &pai[..3] >= "180" {
        (IndexScale::TwoIntegerDigits, 2)
    } else {
        (IndexScale::ThreeIntegerDigits, 3)
    };
    // Placing the decimal point textually and parsing gives the correctly
    // rounded quotient `pai / 10^(n - k)` for arbitrarily long `pai`.
    let decimal = format!("{}.{}", &pai[..integer_digits], &pai[integer_digits..]);
    let degrees: f64 = decimal.parse().map_err(|_| PasswordError::DegeneratePassword)?;
    let index = PasswordIndex::new(degrees)?;

    Ok(IndexDerivation {
        digits,
        interpretation,
        scale,
        index,
    })
}

/// Computes the password index `P_i` of `password`.
pub fn compute_pi(password: &str) -> Result<PasswordIndex, PasswordError> {
    derive_password_index(password).map(|d| d.index)
}
