use std::sync::OnceLock;

use bayes_series::mobius::{mobius_of, MobiusTable};
use proptest::prelude::*;

const N: u64 = 200_000;

fn table() -> &'static MobiusTable {
    static T: OnceLock<MobiusTable> = OnceLock::new();
    T.get_or_init(|| MobiusTable::build(N, 4096).unwrap())
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Independent of the crate: count prime factors by trial division.
fn oracle(mut n: u64) -> i8 {
    let mut sign = 1i8;
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 1 {
            return 0;
        }
        if e == 1 {
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

#[test]
fn sieve_matches_oracle() {
    let t = table();
    for n in 1..=N {
        assert_eq!(t.mu(n).unwrap(), oracle(n), "mu({n})");
    }
}

#[test]
fn mertens_within_trivial_bound() {
    let t = table();
    let mut m = 0i64;
    for x in 1..=N {
        m += t.mu(x).unwrap() as i64;
        assert!(m.unsigned_abs() <= x);
        if x % 997 == 0 {
            assert_eq!(t.mertens(x).unwrap(), m);
        }
    }
}

proptest! {
    #[test]
    fn multiplicative_on_coprimes(a in 1u64..1_000_000, b in 1u64..1_000_000) {
        let (ma, mb, mab) = (mobius_of(a), mobius_of(b), mobius_of(a * b));
        if gcd(a, b) == 1 {
            prop_assert_eq!(mab, ma * mb);
        } else {
            prop_assert_eq!(mab, 0);
        }
    }

    #[test]
    fn segment_size_is_irrelevant(limit in 1u64..20_000, seg in 1usize..5000) {
        let a = MobiusTable::build(limit, seg).unwrap();
        prop_assert_eq!(a.values(), &table().values()[..limit as usize]);
    }

    #[test]
    fn square_multiples_vanish(n in 1u64..10_000, p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
        prop_assert_eq!(mobius_of(n * p * p), 0);
    }
}
