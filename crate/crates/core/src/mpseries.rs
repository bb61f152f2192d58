//! Truncated multivariate formal power series over the rationals.
//!
//! Each variable carries an exclusive truncation bound fixed at
//! construction. Products and compositions drop every term that reaches a
//! bound, so two series over the same variables compare equal exactly when
//! their stored coefficients agree. Negative exponents are never formed;
//! division by a variable is a checked shift (see [`MultiSeries::divide_by_var`]).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::{bernoulli, factorial, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarSpec {
    pub name: String,
    /// Exclusive bound: exponents `0..order` are retained.
    pub order: u32,
}

impl VarSpec {
    pub fn new(name: impl Into<String>, order: u32) -> Self {
        Self {
            name: name.into(),
            order,
        }
    }
}

/// Exponent vector, one entry per variable, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiSeries {
    vars: Arc<[VarSpec]>,
    terms: BTreeMap<Exponent, Rational>,
}

impl MultiSeries {
    pub fn zero(vars: &[VarSpec]) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::DuplicateVar(v.name.clone()));
            }
        }
        Ok(Self {
            vars: vars.into(),
            terms: BTreeMap::new(),
        })
    }

    fn empty_like(&self) -> Self {
        Self {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[VarSpec], c: Rational) -> Result<Self> {
        let mut s = Self::zero(vars)?;
        let exp = vec![0; vars.len()];
        s.insert(exp, c);
        Ok(s)
    }

    pub fn one(vars: &[VarSpec]) -> Result<Self> {
        Self::constant(vars, Rational::one())
    }

    /// The single variable `name` as a series.
    pub fn var(vars: &[VarSpec], name: &str) -> Result<Self> {
        let mut s = Self::zero(vars)?;
        let idx = s.index_of(name)?;
        let mut exp = vec![0; vars.len()];
        exp[idx] = 1;
        s.insert(exp, Rational::one());
        Ok(s)
    }

    /// `c * prod vars^exp`; silently zero when the monomial is truncated away.
    pub fn monomial(vars: &[VarSpec], exp: Vec<u32>, c: Rational) -> Result<Self> {
        if exp.len() != vars.len() {
            return Err(Error::InvalidArgument(format!(
                "exponent vector of length {} for {} variables",
                exp.len(),
                vars.len()
            )));
        }
        let mut s = Self::zero(vars)?;
        s.insert(exp, c);
        Ok(s)
    }

    pub fn from_terms<I>(vars: &[VarSpec], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut s = Self::zero(vars)?;
        for (exp, c) in terms {
            if exp.len() != vars.len() {
                return Err(Error::OutOfRange(exp));
            }
            s.insert(exp, c);
        }
        Ok(s)
    }

    /// Adds `c` at `exp`, dropping truncated exponents and zero results.
    fn insert(&mut self, exp: Vec<u32>, c: Rational) {
        if c.is_zero() || exp.iter().zip(self.vars.iter()).any(|(e, v)| *e >= v.order) {
            return;
        }
        let key = Exponent(exp);
        match self.terms.get_mut(&key) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVar(name.to_string()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.0.as_slice(), c))
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Exponent(vec![0; self.vars.len()]))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn coefficient(&self, exp: &[u32]) -> Result<Rational> {
        if exp.len() != self.vars.len()
            || exp.iter().zip(self.vars.iter()).any(|(e, v)| *e >= v.order)
        {
            return Err(Error::OutOfRange(exp.to_vec()));
        }
        Ok(self
            .terms
            .get(&Exponent(exp.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::VarMismatch {
                left: describe_vars(&self.vars),
                right: describe_vars(&other.vars),
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.0.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.0.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.empty_like();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<u32> = ea.0.iter().zip(&eb.0).map(|(x, y)| x + y).collect();
                out.insert(exp, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return self.empty_like();
        }
        Self {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.vars).expect("validated vars");
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Upper bound on the total degree any nonzero term can reach.
    fn max_total_degree(&self) -> u32 {
        self.vars.iter().map(|v| v.order.saturating_sub(1)).sum()
    }

    /// `exp(a)` for `a` with zero constant term.
    pub fn exp_series(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if !c0.is_zero() {
            return Err(Error::ConstantTerm {
                op: "exp_series",
                expected: "0",
                found: c0.to_string(),
            });
        }
        let mut sum = Self::one(&self.vars)?;
        let mut power = sum.clone();
        for n in 1..=self.max_total_degree() {
            power = (&power * self).scale(&Rational::new(BigInt::one(), BigInt::from(n)));
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum)
    }

    /// `log(a)` for `a` with constant term one.
    pub fn log_series(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if !c0.is_one() {
            return Err(Error::ConstantTerm {
                op: "log_series",
                expected: "1",
                found: c0.to_string(),
            });
        }
        let x = self - &Self::one(&self.vars)?;
        let mut sum = self.empty_like();
        let mut power = Self::one(&self.vars)?;
        for n in 1..=self.max_total_degree() {
            power = &power * &x;
            if power.is_zero() {
                break;
            }
            let sign = if n % 2 == 1 { 1 } else { -1 };
            sum = &sum + &power.scale(&Rational::new(BigInt::from(sign), BigInt::from(n)));
        }
        Ok(sum)
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::ConstantTerm {
                op: "reciprocal",
                expected: "nonzero",
                found: c0.to_string(),
            });
        }
        // 1/(c0 (1 + x)) = (1/c0) sum (-x)^n
        let inv0 = c0.recip();
        let neg_x = (self.scale(&inv0) - Self::one(&self.vars)?).scale(&int(-1));
        let mut sum = Self::one(&self.vars)?;
        let mut power = sum.clone();
        for _ in 1..=self.max_total_degree() {
            power = &power * &neg_x;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(&inv0))
    }

    /// `exp((a0 + a1 k) log(self))` over `self`'s variables plus `k`.
    ///
    /// `self` must have constant term one and must not already contain `k`.
    pub fn pow_linear_exponent(
        &self,
        a0: &Rational,
        a1: &Rational,
        k: &VarSpec,
    ) -> Result<Self> {
        if self.vars.iter().any(|v| v.name == k.name) {
            return Err(Error::DuplicateVar(k.name.clone()));
        }
        let log = self.log_series()?;
        let mut vars = self.vars.to_vec();
        vars.push(k.clone());
        let log = log.extend_vars(&vars)?;
        let exponent = &MultiSeries::constant(&vars, a0.clone())?
            + &MultiSeries::var(&vars, &k.name)?.scale(a1);
        (&exponent * &log).exp_series()
    }

    /// Re-expresses the series over a superset of its variables.
    ///
    /// Shared variables must keep their names; their bounds may change, in
    /// which case the usual truncation applies.
    pub fn extend_vars(&self, vars: &[VarSpec]) -> Result<Self> {
        let mut out = Self::zero(vars)?;
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| out.index_of(&v.name))
            .collect::<Result<_>>()?;
        for (e, c) in &self.terms {
            let mut exp = vec![0; vars.len()];
            for (i, &j) in map.iter().enumerate() {
                exp[j] = e.0[i];
            }
            out.insert(exp, c.clone());
        }
        Ok(out)
    }

    /// Drops terms at or beyond new (smaller or equal) bounds on the same variables.
    pub fn truncate_to(&self, vars: &[VarSpec]) -> Result<Self> {
        if vars.len() != self.vars.len()
            || vars.iter().zip(self.vars.iter()).any(|(a, b)| a.name != b.name)
        {
            return Err(Error::VarMismatch {
                left: describe_vars(&self.vars),
                right: describe_vars(vars),
            });
        }
        let mut out = Self::zero(vars)?;
        for (e, c) in &self.terms {
            out.insert(e.0.clone(), c.clone());
        }
        Ok(out)
    }

    /// Replaces `z^(2m)` by `h^m e^m` for a series in the single variable `z`.
    pub fn substitute_square(&self, h: &VarSpec, e: &VarSpec) -> Result<Self> {
        if self.vars.len() != 1 {
            return Err(Error::InvalidArgument(
                "substitute_square expects a univariate series".into(),
            ));
        }
        let z = &self.vars[0].name;
        let vars = [h.clone(), e.clone()];
        let mut out = Self::zero(&vars)?;
        for (exp, c) in &self.terms {
            let d = exp.0[0];
            if d % 2 == 1 {
                return Err(Error::NotEven(z.clone()));
            }
            out.insert(vec![d / 2, d / 2], c.clone());
        }
        Ok(out)
    }

    /// Shifts every exponent of `v` down by `m`; each term must be divisible.
    pub fn divide_by_var(&self, v: &str, m: u32) -> Result<Self> {
        let idx = self.index_of(v)?;
        let mut out = self.empty_like();
        for (e, c) in &self.terms {
            let exp = e.0[idx];
            if exp < m {
                return Err(Error::NotDivisible {
                    var: v.to_string(),
                    exp,
                    by: m,
                });
            }
            let mut shifted = e.0.clone();
            shifted[idx] -= m;
            out.insert(shifted, c.clone());
        }
        Ok(out)
    }

    /// Formal `d/dv`. The bound on `v` drops by one since the top
    /// coefficient of the derivative is not determined by a truncated input.
    pub fn partial_derivative(&self, v: &str) -> Result<Self> {
        let idx = self.index_of(v)?;
        let mut vars = self.vars.to_vec();
        vars[idx].order = vars[idx].order.saturating_sub(1);
        let mut out = Self::zero(&vars)?;
        for (e, c) in &self.terms {
            let exp = e.0[idx];
            if exp == 0 {
                continue;
            }
            let mut shifted = e.0.clone();
            shifted[idx] -= 1;
            out.insert(shifted, c * int(exp as i64));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vars": self.vars.iter().map(|v| json!({"name": v.name, "order": v.order})).collect::<Vec<_>>(),
            "terms": self.terms.iter().map(|(e, c)| json!({"exp": e.0, "coef": c.to_string()})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |what: &str| Error::InvalidArgument(format!("series JSON: {what}"));
        let vars = value["vars"]
            .as_array()
            .ok_or_else(|| bad("missing vars"))?
            .iter()
            .map(|v| {
                let name = v["name"].as_str().ok_or_else(|| bad("var name"))?;
                let order = v["order"].as_u64().ok_or_else(|| bad("var order"))?;
                Ok(VarSpec::new(name, order as u32))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::zero(&vars)?;
        for t in value["terms"].as_array().ok_or_else(|| bad("missing terms"))? {
            let exp = t["exp"]
                .as_array()
                .ok_or_else(|| bad("exp"))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| bad("exp entry")))
                .collect::<Result<Vec<_>>>()?;
            let coef: Rational = t["coef"]
                .as_str()
                .ok_or_else(|| bad("coef"))?
                .parse()
                .map_err(|_| bad("coef"))?;
            if exp.len() != vars.len() {
                return Err(Error::OutOfRange(exp));
            }
            out.insert(exp, coef);
        }
        Ok(out)
    }

    /// Renders terms as `c*x^a*y^b`, with custom variable names.
    pub fn render_with(&self, name: impl Fn(&str) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let factors: Vec<String> = e
                .0
                .iter()
                .zip(self.vars.iter())
                .filter(|(x, _)| **x > 0)
                .map(|(x, v)| {
                    if *x == 1 {
                        name(&v.name)
                    } else {
                        format!("{}^{}", name(&v.name), x)
                    }
                })
                .collect();
            let (neg, mag) = (c.is_negative(), c.abs());
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if factors.is_empty() {
                out.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&mag.to_string());
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

fn describe_vars(vars: &[VarSpec]) -> String {
    vars.iter()
        .map(|v| format!("{}<{}", v.name, v.order))
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|n| n.to_string()))
    }
}

impl fmt::Debug for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiSeries[{}]({})", describe_vars(&self.vars), self)
    }
}

// Operator forms panic on mismatched variables; use the `try_` methods when
// the variable lists are not known to agree.
impl Add for &MultiSeries {
    type Output = MultiSeries;
    fn add(self, rhs: Self) -> MultiSeries {
        self.try_add(rhs).expect("series variables must match")
    }
}

impl Sub for &MultiSeries {
    type Output = MultiSeries;
    fn sub(self, rhs: Self) -> MultiSeries {
        self.try_sub(rhs).expect("series variables must match")
    }
}

impl Mul for &MultiSeries {
    type Output = MultiSeries;
    fn mul(self, rhs: Self) -> MultiSeries {
        self.try_mul(rhs).expect("series variables must match")
    }
}

impl Add for MultiSeries {
    type Output = MultiSeries;
    fn add(self, rhs: Self) -> MultiSeries {
        &self + &rhs
    }
}

impl Sub for MultiSeries {
    type Output = MultiSeries;
    fn sub(self, rhs: Self) -> MultiSeries {
        &self - &rhs
    }
}

impl Mul for MultiSeries {
    type Output = MultiSeries;
    fn mul(self, rhs: Self) -> MultiSeries {
        &self * &rhs
    }
}

impl Neg for &MultiSeries {
    type Output = MultiSeries;
    fn neg(self) -> MultiSeries {
        self.scale(&int(-1))
    }
}

impl Neg for MultiSeries {
    type Output = MultiSeries;
    fn neg(self) -> MultiSeries {
        -&self
    }
}

/// `log((z/2)/sin(z/2)) = sum_{g>=1} |B_2g| / (2g (2g)!) z^(2g)`, truncated at `z^order`.
pub fn log_sinc_half(var: &str, order: u32) -> Result<MultiSeries> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!(
            "log_sinc_half needs order >= 2, got {order}"
        )));
    }
    let vars = [VarSpec::new(var, order)];
    MultiSeries::from_terms(
        &vars,
        (1..)
            .take_while(|g| 2 * g < order)
            .map(|g: u32| {
                let c = bernoulli(2 * g).abs()
                    / (int(2 * g as i64) * Rational::from_integer(factorial(2 * g)));
                (vec![2 * g], c)
            }),
    )
}

/// `sin(z/2)/(z/2) = sum_{g>=0} (-1)^g z^(2g) / (2^(2g) (2g+1)!)`, truncated at `z^order`.
pub fn sinc_half(var: &str, order: u32) -> Result<MultiSeries> {
    let vars = [VarSpec::new(var, order)];
    MultiSeries::from_terms(
        &vars,
        (0..).take_while(|g| 2 * g < order).map(|g: u32| {
            (vec![2 * g], sinc_half_coeff(g))
        }),
    )
}

/// `(-1)^g / (2^(2g) (2g+1)!)`.
pub fn sinc_half_coeff(g: u32) -> Rational {
    let den = (BigInt::one() << (2 * g)) * factorial(2 * g + 1);
    let num = if g.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    Rational::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn t_vars(order: u32) -> Vec<VarSpec> {
        vec![VarSpec::new("t", order)]
    }

    fn hv() -> Vec<VarSpec> {
        vec![VarSpec::new("h", 4), VarSpec::new("e", 4)]
    }

    fn uni(order: u32, coeffs: &[Rational]) -> MultiSeries {
        MultiSeries::from_terms(
            &t_vars(order),
            coeffs.iter().enumerate().map(|(i, c)| (vec![i as u32], c.clone())),
        )
        .unwrap()
    }

    #[test]
    fn ring_examples() {
        let a = uni(3, &[int(1), int(1)]);
        let b = uni(3, &[int(1), int(-1)]);
        assert_eq!(&a * &b, uni(3, &[int(1), int(0), int(-1)]));
        assert_eq!(&a + &MultiSeries::zero(&t_vars(3)).unwrap(), a);
        let c = uni(3, &[int(1), int(1), rat(1, 2)]);
        assert_eq!(&c * &c, uni(3, &[int(1), int(2), int(2)]));
    }

    #[test]
    fn mismatched_vars_rejected() {
        let a = uni(3, &[int(1)]);
        let b = uni(4, &[int(1)]);
        assert!(matches!(a.try_add(&b), Err(Error::VarMismatch { .. })));
        assert!(MultiSeries::zero(&[VarSpec::new("t", 2), VarSpec::new("t", 3)]).is_err());
    }

    #[test]
    fn exp_log_examples() {
        let zero = MultiSeries::zero(&t_vars(6)).unwrap();
        assert_eq!(zero.exp_series().unwrap(), MultiSeries::one(&t_vars(6)).unwrap());
        let t = MultiSeries::var(&t_vars(6), "t").unwrap();
        assert_eq!(t.exp_series().unwrap().log_series().unwrap(), t);
        let a = uni(6, &[int(0), int(0), rat(1, 24), int(0), rat(1, 2880)]);
        assert_eq!(
            a.exp_series().unwrap(),
            uni(6, &[int(1), int(0), rat(1, 24), int(0), rat(7, 5760)])
        );
        assert!(matches!(
            MultiSeries::one(&t_vars(3)).unwrap().exp_series(),
            Err(Error::ConstantTerm { .. })
        ));
        assert!(matches!(t.log_series(), Err(Error::ConstantTerm { .. })));
    }

    #[test]
    fn log_sinc_half_coefficients() {
        let l = log_sinc_half("z", 7).unwrap();
        assert_eq!(l.coefficient(&[2]).unwrap(), rat(1, 24));
        assert_eq!(l.coefficient(&[4]).unwrap(), rat(1, 2880));
        assert_eq!(l.coefficient(&[6]).unwrap(), rat(1, 181440));
        for k in [1, 3, 5] {
            assert!(l.coefficient(&[k]).unwrap().is_zero());
        }
        assert!(log_sinc_half("z", 1).is_err());
    }

    #[test]
    fn log_sinc_half_matches_negated_log_of_sine() {
        let order = 15;
        let sinc = sinc_half("z", order).unwrap();
        let direct = -sinc.log_series().unwrap();
        assert_eq!(direct, log_sinc_half("z", order).unwrap());
    }

    #[test]
    fn pow_linear_exponent_examples() {
        let k = VarSpec::new("k", 3);
        let one = MultiSeries::one(&t_vars(5)).unwrap();
        let p = one.pow_linear_exponent(&int(1), &int(1), &k).unwrap();
        assert_eq!(p, MultiSeries::one(p.vars()).unwrap());

        let b = uni(5, &[int(1), int(2), int(0), rat(-1, 3)]);
        let p = b.pow_linear_exponent(&int(1), &int(0), &k).unwrap();
        assert_eq!(p, b.extend_vars(p.vars()).unwrap());

        let base = log_sinc_half("t", 5).unwrap().exp_series().unwrap();
        let p = base.pow_linear_exponent(&int(1), &int(1), &k).unwrap();
        assert_eq!(p.coefficient(&[2, 0]).unwrap(), rat(1, 24));
        assert_eq!(p.coefficient(&[2, 1]).unwrap(), rat(1, 24));
        assert!(uni(5, &[int(2)])
            .pow_linear_exponent(&int(1), &int(1), &k)
            .is_err());
    }

    #[test]
    fn substitute_and_divide() {
        let (h, e) = (VarSpec::new("h", 4), VarSpec::new("e", 4));
        let z2 = MultiSeries::monomial(&[VarSpec::new("z", 7)], vec![2], int(1)).unwrap();
        assert_eq!(
            z2.substitute_square(&h, &e).unwrap(),
            MultiSeries::monomial(&hv(), vec![1, 1], int(1)).unwrap()
        );
        let l = log_sinc_half("z", 6).unwrap().substitute_square(&h, &e).unwrap();
        assert_eq!(
            l,
            MultiSeries::from_terms(&hv(), [(vec![1, 1], rat(1, 24)), (vec![2, 2], rat(1, 2880))])
                .unwrap()
        );
        let odd = MultiSeries::monomial(&[VarSpec::new("z", 7)], vec![3], int(1)).unwrap();
        assert!(matches!(odd.substitute_square(&h, &e), Err(Error::NotEven(_))));

        let d = l.divide_by_var("e", 1).unwrap();
        assert_eq!(
            d,
            MultiSeries::from_terms(&hv(), [(vec![1, 0], rat(1, 24)), (vec![2, 1], rat(1, 2880))])
                .unwrap()
        );
        let bad = MultiSeries::monomial(&hv(), vec![1, 0], int(1)).unwrap();
        assert!(matches!(bad.divide_by_var("e", 1), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn coefficient_and_derivative() {
        let s = uni(3, &[int(1), int(0), rat(1, 24)]);
        assert_eq!(s.coefficient(&[2]).unwrap(), rat(1, 24));
        assert_eq!(s.coefficient(&[1]).unwrap(), int(0));
        assert!(matches!(s.coefficient(&[3]), Err(Error::OutOfRange(_))));

        let m = MultiSeries::monomial(&hv(), vec![2, 1], int(1)).unwrap();
        let d = m.partial_derivative("h").unwrap();
        assert_eq!(d.coefficient(&[1, 1]).unwrap(), int(2));
        assert_eq!(d.vars()[0].order, 3);

        let x = MultiSeries::monomial(&hv(), vec![1, 0], rat(1, 24)).unwrap();
        let ex = x.exp_series().unwrap();
        let lhs = ex.partial_derivative("h").unwrap();
        let rhs = ex.truncate_to(lhs.vars()).unwrap().scale(&rat(1, 24));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn reciprocal_inverts() {
        let s = uni(6, &[int(2), int(1), rat(-1, 3), int(0), int(5)]);
        let r = s.reciprocal().unwrap();
        assert_eq!(&s * &r, MultiSeries::one(&t_vars(6)).unwrap());
        assert!(uni(6, &[int(0), int(1)]).reciprocal().is_err());
    }

    #[test]
    fn json_round_trip_and_order() {
        let s = MultiSeries::from_terms(
            &hv(),
            [(vec![1, 1], rat(1, 24)), (vec![0, 0], int(1)), (vec![1, 0], rat(-2, 3))],
        )
        .unwrap();
        let j = s.to_json();
        let exps: Vec<_> = j["terms"].as_array().unwrap().iter().map(|t| t["exp"].clone()).collect();
        assert_eq!(exps, vec![json!([0, 0]), json!([1, 0]), json!([1, 1])]);
        assert_eq!(j["terms"][1]["coef"], "-2/3");
        assert_eq!(MultiSeries::from_json(&j).unwrap(), s);
        assert_eq!(s.to_string(), "1 - 2/3*h + 1/24*h*e");
    }
}
