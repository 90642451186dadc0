//! Random prime generation for the trigon sides.

use std::ops::RangeInclusive;

use rand::Rng;
use thiserror::Error;

/// Miller–Rabin rounds applied to every candidate.
pub const MILLER_RABIN_ROUNDS: usize = 40;

/// Supported prime sizes. The upper bound keeps `a * a'` within 62 bits.
pub const PRIME_BITS: RangeInclusive<u32> = 16..=31;

pub const DEFAULT_PRIME_BITS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("prime size of {0} bits is outside {lo}..={hi}", lo = PRIME_BITS.start(), hi = PRIME_BITS.end())]
pub struct PrimeBitsError(pub u32);

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller–Rabin probable-prime test with `rounds` random bases.
pub fn is_probable_prime<R: Rng + ?Sized>(n: u64, rounds: usize, rng: &mut R) -> bool {
    if n < 4 {
        return n == 2 || n == 3;
    }
    if n.is_multiple_of(2) {
        return false;
    }

    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }

    'witness: for _ in 0..rounds {
        let a = rng.random_range(2..=n - 2);
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn random_prime<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> u64 {
    let lo = 1u64 << (bits - 1);
    let hi = 1u64 << bits;
    loop {
        let candidate = rng.random_range(lo..hi);
        if is_probable_prime(candidate, MILLER_RABIN_ROUNDS, rng) {
            return candidate;
        }
    }
}

/// Draws two distinct probable primes from `[2^(bits-1), 2^bits)`.
pub fn generate_prime_pair<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> Result<(u64, u64), PrimeBitsError> {
    if !PRIME_BITS.contains(&bits) {
        return Err(PrimeBitsError(bits));
    }
    let a = random_prime(bits, rng);
    loop {
        let b = random_prime(bits, rng);
        if b != a {
            return Ok((a, b));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn agrees_with_trial_division_below_20000() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for n in 0..20_000 {
            assert_eq!(is_probable_prime(n, 20, &mut rng), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn rejects_carmichael_numbers() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265, 321197185] {
            assert!(!is_probable_prime(n, MILLER_RABIN_ROUNDS, &mut rng), "n = {n}");
        }
    }

    #[test]
    fn sixteen_bit_pairs_are_prime_and_in_range() {
        for seed in 0..50 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (a, b) = generate_prime_pair(16, &mut rng).unwrap();
            for p in [a, b] {
                assert!((32768..65536).contains(&p));
                assert!(trial_division(p), "{p} is composite");
            }
            assert_ne!(a, b);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let pair = |seed| generate_prime_pair(20, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(pair(7), pair(7));
        let (a, b) = pair(7);
        assert_ne!(a, b);
        assert!(((1 << 19)..(1 << 20)).contains(&a));
    }

    #[test]
    fn rejects_out_of_range_bits() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(generate_prime_pair(15, &mut rng), Err(PrimeBitsError(15)));
        assert_eq!(generate_prime_pair(32, &mut rng), Err(PrimeBitsError(32)));
        assert!(generate_prime_pair(31, &mut rng).is_ok());
    }
}
