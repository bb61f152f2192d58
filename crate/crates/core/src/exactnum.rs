//! Exact rationals, Bernoulli numbers and the genus constants built on them.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision fraction, always reduced with a positive denominator.
///
/// `Display` renders `p/q`, or `p` when `q = 1`; `FromStr` parses the same
/// encoding.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Rational::one()]))
}

/// Bernoulli number `B_n` with the `z/(e^z - 1)` convention (`B_1 = -1/2`).
///
/// Uses `sum_{k=0}^{n} C(n+1, k) B_k = 0`, memoized process-wide.
pub fn bernoulli(n: u32) -> Rational {
    let mut table = cache().lock().unwrap_or_else(|e| e.into_inner());
    while table.len() <= n as usize {
        let m = table.len() as u32;
        let sum = table
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (k, b)| {
                acc + b * Rational::from_integer(binomial(m + 1, k as u32))
            });
        let next = -sum / Rational::from_integer(BigInt::from(m + 1));
        table.push(next);
    }
    table[n as usize].clone()
}

/// `|B_2g| / (2 (2g)!)`, the coefficient of `u u_{2g}` in the first Hamiltonian.
pub fn c_g(g: u32) -> Rational {
    assert!(g >= 1, "c_g is defined for g >= 1");
    dispersion_coeff(g) / int(2)
}

/// `|B_2g| / (2g)!`, the dispersion coefficient of `u_{2g+1}` in the first flow.
pub fn dispersion_coeff(g: u32) -> Rational {
    assert!(g >= 1, "dispersion_coeff is defined for g >= 1");
    bernoulli(2 * g).abs() / Rational::from_integer(factorial(2 * g))
}

/// A table of constants `C_1..C_G`, either exact or with an injected fault.
///
/// The verification routines take their `C_g` from here so a negative
/// control can perturb a single entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CgTable {
    values: Vec<Rational>,
}

impl CgTable {
    pub fn exact(max_genus: u32) -> Self {
        Self {
            values: (1..=max_genus).map(c_g).collect(),
        }
    }

    pub fn from_values(values: Vec<Rational>) -> Self {
        Self { values }
    }

    /// Adds `delta` to `C_g`. Genera beyond the table are ignored.
    pub fn perturbed(mut self, g: u32, delta: &Rational) -> Self {
        if g >= 1 {
            if let Some(v) = self.values.get_mut(g as usize - 1) {
                *v += delta;
            }
        }
        self
    }

    pub fn max_genus(&self) -> u32 {
        self.values.len() as u32
    }

    /// `C_g`, or zero outside `1..=max_genus`.
    pub fn get(&self, g: u32) -> Rational {
        if g == 0 {
            return Rational::zero();
        }
        self.values
            .get(g as usize - 1)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bernoulli_values() {
        assert_eq!(bernoulli(0), int(1));
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(3), int(0));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(12), rat(-691, 2730));
    }

    #[test]
    fn odd_bernoulli_vanish() {
        for k in 1..15 {
            assert!(bernoulli(2 * k + 1).is_zero(), "B_{}", 2 * k + 1);
        }
    }

    #[test]
    fn recurrence_holds_to_thirty() {
        for n in 1..=30u32 {
            let s = (0..=n).fold(Rational::zero(), |acc, k| {
                acc + bernoulli(k) * Rational::from_integer(binomial(n + 1, k))
            });
            assert!(s.is_zero(), "n = {n}");
        }
    }

    #[test]
    fn genus_constants() {
        assert_eq!(c_g(1), rat(1, 24));
        assert_eq!(c_g(2), rat(1, 1440));
        assert_eq!(c_g(3), rat(1, 60480));
        assert_eq!(dispersion_coeff(1), rat(1, 12));
        assert_eq!(dispersion_coeff(2), rat(1, 720));
        for g in 1..=12 {
            assert_eq!(dispersion_coeff(g), c_g(g) * int(2));
        }
    }

    #[test]
    fn rational_encoding() {
        assert_eq!(rat(-6, 4).to_string(), "-3/2");
        assert_eq!(rat(4, -2).to_string(), "-2");
        assert_eq!("7/5760".parse::<Rational>().unwrap(), rat(7, 5760));
        assert_eq!("-691/2730".parse::<Rational>().unwrap(), bernoulli(12));
    }

    #[test]
    fn perturbed_table_touches_one_entry() {
        let t = CgTable::exact(3).perturbed(2, &rat(1, 1_000_000));
        assert_eq!(t.get(1), c_g(1));
        assert_eq!(t.get(2), c_g(2) + rat(1, 1_000_000));
        assert_eq!(t.get(3), c_g(3));
        assert!(t.get(4).is_zero());
    }
}
