#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qtwist_core::laurent::LaurentPoly;
use qtwist_core::{PrimeField, TwistSpec};

pub const PRIMES: [u64; 4] = [2, 3, 5, 7];

/// Random nonzero polynomial with up to `max_terms` terms and exponents in
/// `[-bound, bound]`.
pub fn random_poly(rng: &mut ChaCha8Rng, field: &PrimeField, max_terms: usize, bound: i32) -> LaurentPoly {
    let q = field.q() as i64;
    loop {
        let terms: Vec<(i32, i32, i64)> = (0..rng.gen_range(1..=max_terms))
            .map(|_| {
                (
                    rng.gen_range(-bound..=bound),
                    rng.gen_range(-bound..=bound),
                    rng.gen_range(1..q),
                )
            })
            .collect();
        let p = LaurentPoly::from_terms(field, terms);
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn random_twist(rng: &mut ChaCha8Rng, max_side: i64) -> TwistSpec {
    let alpha = rng.gen_range(1..=max_side);
    let beta = rng.gen_range(1..=max_side);
    let gamma = rng.gen_range(-alpha..alpha);
    TwistSpec::new(alpha, beta, gamma).unwrap()
}

/// A random `(field, f, g, twist)` draw with `q` in {2, 3, 5, 7}.
pub fn random_draw(rng: &mut ChaCha8Rng, max_side: i64) -> (PrimeField, LaurentPoly, LaurentPoly, TwistSpec) {
    let q = PRIMES[rng.gen_range(0..PRIMES.len())];
    let field = PrimeField::new(q).unwrap();
    let f = random_poly(rng, &field, 4, 3);
    let g = random_poly(rng, &field, 4, 3);
    (field, f, g, random_twist(rng, max_side))
}
