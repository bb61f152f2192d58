//! Differential polynomials in one dependent variable and local functionals.
//!
//! A [`DiffPoly`] is a polynomial in `u, u_1, u_2, ...` (`u_k` standing for
//! the k-th x-derivative) whose coefficients are truncated series in the
//! formal parameters `h` and `eps`. A [`LocalFunctional`] is the class of
//! `∫ f dx` modulo total x-derivatives, stored by a canonical density.
//!
//! The canonical density is reached by integration by parts: a monomial
//! `R u_{N-1}^m u_N`, with `u_N` linear and strictly above every other
//! index in `R`, equals `∂_x(R u_{N-1}^{m+1})/(m+1) - (∂_x R) u_{N-1}^{m+1}/(m+1)`,
//! so it is replaced by `-(∂_x R) u_{N-1}^{m+1}/(m+1)`. What remains is
//! spanned by monomials whose top derivative appears at least squared, by
//! powers of `u`, and by constants. Those are independent modulo the image
//! of `∂_x`, which makes the representative unique.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::{int, Rational};
use crate::mpseries::{sinc_half_coeff, MultiSeries, VarSpec};

pub const HBAR: &str = "h";
pub const EPS: &str = "eps";

/// Coefficient variables `(h, eps)` keeping every power up to and including `g_max`.
pub fn coeff_ring(g_max: u32) -> Vec<VarSpec> {
    vec![VarSpec::new(HBAR, g_max + 1), VarSpec::new(EPS, g_max + 1)]
}

/// Multiplicities of `u_0, u_1, ...`, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UExponents(Vec<u32>);

impl UExponents {
    pub fn new(mut mults: Vec<u32>) -> Self {
        while mults.last() == Some(&0) {
            mults.pop();
        }
        Self(mults)
    }

    /// From `(index, multiplicity)` pairs; repeated indices accumulate.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let len = pairs.iter().map(|(k, _)| *k as usize + 1).max().unwrap_or(0);
        let mut v = vec![0; len];
        for &(k, m) in pairs {
            v[k as usize] += m;
        }
        Self::new(v)
    }

    pub fn constant() -> Self {
        Self(Vec::new())
    }

    pub fn mult(&self, k: u32) -> u32 {
        self.0.get(k as usize).copied().unwrap_or(0)
    }

    pub fn mults(&self) -> &[u32] {
        &self.0
    }

    /// `(index, multiplicity)` for each present factor.
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0)
            .map(|(k, m)| (k as u32, *m))
            .collect()
    }

    /// Differential degree `sum k * mult(k)`.
    pub fn diff_degree(&self) -> u32 {
        self.0.iter().enumerate().map(|(k, m)| k as u32 * m).sum()
    }

    /// Polynomial degree `sum mult(k)`.
    pub fn u_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Highest derivative index present, `None` for the constant monomial.
    pub fn top(&self) -> Option<u32> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() as u32 - 1)
        }
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    fn with(&self, k: u32, delta: i64) -> Self {
        let mut v = self.0.clone();
        if v.len() <= k as usize {
            v.resize(k as usize + 1, 0);
        }
        v[k as usize] = (v[k as usize] as i64 + delta) as u32;
        Self::new(v)
    }

    fn times(&self, other: &Self) -> Self {
        let len = self.0.len().max(other.0.len());
        Self::new((0..len).map(|k| self.mult(k as u32) + other.mult(k as u32)).collect())
    }

    /// True when the monomial is an integration-by-parts normal form: its
    /// top derivative `u_N`, `N >= 1`, is not linear.
    pub fn is_normal(&self) -> bool {
        match self.top() {
            None | Some(0) => true,
            Some(n) => self.mult(n) >= 2,
        }
    }
}

impl Ord for UExponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.diff_degree()
            .cmp(&other.diff_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for UExponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One term `coefficient * prod u_k^{mult(k)}` of a [`DiffPoly`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffMonomial {
    pub coefficient: MultiSeries,
    pub u: UExponents,
}

#[derive(Clone, PartialEq, Eq)]
pub struct DiffPoly {
    ring: Vec<VarSpec>,
    terms: BTreeMap<UExponents, MultiSeries>,
}

impl DiffPoly {
    pub fn zero(ring: &[VarSpec]) -> Self {
        MultiSeries::zero(ring).expect("coefficient ring must have distinct variable names");
        Self {
            ring: ring.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    fn empty_like(&self) -> Self {
        Self {
            ring: self.ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(u: UExponents, coefficient: MultiSeries) -> Self {
        let mut p = Self::zero(coefficient.vars());
        p.insert(u, coefficient);
        p
    }

    /// `c * h^hbar_exp * eps^eps_exp * prod u_k^m` over the standard `(h, eps)` ring.
    pub fn term(ring: &[VarSpec], c: Rational, hbar_exp: u32, eps_exp: u32, u: &[(u32, u32)]) -> Self {
        let coef = MultiSeries::monomial(ring, vec![hbar_exp, eps_exp], c)
            .expect("term() expects a two-variable (h, eps) ring");
        Self::monomial(UExponents::from_pairs(u), coef)
    }

    pub fn scalar(ring: &[VarSpec], c: Rational) -> Self {
        let coef = MultiSeries::constant(ring, c).expect("valid ring");
        Self::monomial(UExponents::constant(), coef)
    }

    /// The jet variable `u_k`.
    pub fn u(ring: &[VarSpec], k: u32) -> Self {
        Self::monomial(
            UExponents::from_pairs(&[(k, 1)]),
            MultiSeries::one(ring).expect("valid ring"),
        )
    }

    fn insert(&mut self, u: UExponents, c: MultiSeries) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&u) {
            Some(existing) => {
                *existing = &*existing + &c;
                if existing.is_zero() {
                    self.terms.remove(&u);
                }
            }
            None => {
                self.terms.insert(u, c);
            }
        }
    }

    pub fn ring(&self) -> &[VarSpec] {
        &self.ring
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

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&UExponents, &MultiSeries)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<DiffMonomial> {
        self.terms
            .iter()
            .map(|(u, c)| DiffMonomial {
                coefficient: c.clone(),
                u: u.clone(),
            })
            .collect()
    }

    pub fn coefficient_of(&self, u: &UExponents) -> MultiSeries {
        self.terms
            .get(u)
            .cloned()
            .unwrap_or_else(|| MultiSeries::zero(&self.ring).expect("valid ring"))
    }

    /// Rational coefficient of `h^a eps^b * u`, zero when absent or truncated.
    pub fn coeff(&self, u: &[(u32, u32)], hbar_exp: u32, eps_exp: u32) -> Rational {
        self.coefficient_of(&UExponents::from_pairs(u))
            .coefficient(&[hbar_exp, eps_exp])
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn max_index(&self) -> Option<u32> {
        self.terms.keys().filter_map(|u| u.top()).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = self.empty_like();
        for (u, s) in &self.terms {
            out.insert(u.clone(), s.scale(c));
        }
        out
    }

    pub fn scale_series(&self, c: &MultiSeries) -> Self {
        let mut out = self.empty_like();
        for (u, s) in &self.terms {
            out.insert(u.clone(), s * c);
        }
        out
    }

    /// Keeps only coefficient terms satisfying `keep(h_exp, eps_exp)`.
    pub fn filter_coefficients(&self, keep: impl Fn(u32, u32) -> bool) -> Self {
        let mut out = self.empty_like();
        for (u, s) in &self.terms {
            let c = MultiSeries::from_terms(
                &self.ring,
                s.terms()
                    .filter(|(e, _)| keep(e[0], e[1]))
                    .map(|(e, c)| (e.to_vec(), c.clone())),
            )
            .expect("valid ring");
            out.insert(u.clone(), c);
        }
        out
    }

    /// Re-expresses coefficients over a ring with the same variable names.
    pub fn with_ring(&self, ring: &[VarSpec]) -> Result<Self> {
        let mut out = Self::zero(ring);
        for (u, s) in &self.terms {
            out.insert(u.clone(), s.extend_vars(ring)?);
        }
        Ok(out)
    }

    /// `∂p/∂u_k`.
    pub fn partial_u(&self, k: u32) -> Self {
        let mut out = self.empty_like();
        for (u, s) in &self.terms {
            let m = u.mult(k);
            if m > 0 {
                out.insert(u.with(k, -1), s.scale(&int(m as i64)));
            }
        }
        out
    }

    /// `∂_x p = sum_k (∂p/∂u_k) u_{k+1}`.
    pub fn total_x_derivative(&self) -> Self {
        let mut out = self.empty_like();
        for (u, s) in &self.terms {
            for (k, m) in u.pairs() {
                let v = u.with(k, -1).with(k + 1, 1);
                out.insert(v, s.scale(&int(m as i64)));
            }
        }
        out
    }

    pub fn nth_x_derivative(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |p, _| p.total_x_derivative())
    }

    /// Replaces each `u_k` by `image(k)` and expands.
    pub fn substitute(&self, image: impl Fn(u32) -> DiffPoly) -> Self {
        let mut out = self.empty_like();
        let mut powers: BTreeMap<(u32, u32), DiffPoly> = BTreeMap::new();
        for (u, s) in &self.terms {
            let mut acc = Self::monomial(UExponents::constant(), s.clone());
            for (k, m) in u.pairs() {
                let pw = powers
                    .entry((k, m))
                    .or_insert_with(|| {
                        let base = image(k);
                        (1..m).fold(base.clone(), |p, _| &p * &base)
                    })
                    .clone();
                acc = &acc * &pw;
            }
            out = &out + &acc;
        }
        out
    }

    /// Fréchet derivative applied to `b`: `sum_k (∂p/∂u_k) ∂_x^k b`.
    pub fn frechet_apply(&self, b: &DiffPoly) -> Self {
        let mut out = self.empty_like();
        let mut deriv = b.clone();
        for k in 0..=self.max_index().unwrap_or(0) {
            if k > 0 {
                deriv = deriv.total_x_derivative();
            }
            out = &out + &(&self.partial_u(k) * &deriv);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(u, c)| {
                    json!({
                        "coef": c.to_json(),
                        "u": u.pairs().iter().map(|(k, m)| json!([k, m])).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }

    /// Plain-text rendering such as `1/12*h*u_3 + u*u_1`.
    pub fn pretty(&self) -> String {
        self.render(&Style::Plain)
    }

    pub fn latex(&self) -> String {
        self.render(&Style::Latex)
    }

    fn render(&self, style: &Style) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        // one output term per (coefficient term, monomial); lowest h-order first
        let mut flat: Vec<(Vec<u32>, &UExponents, Rational)> = Vec::new();
        for (u, s) in &self.terms {
            for (e, c) in s.terms() {
                flat.push((e.to_vec(), u, c.clone()));
            }
        }
        flat.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        for (i, (e, u, c)) in flat.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            for (var, x) in self.ring.iter().zip(e) {
                if *x > 0 {
                    factors.push(style.power(&style.param(&var.name), *x));
                }
            }
            for (k, m) in u.pairs() {
                factors.push(style.power(&style.jet(k), m));
            }
            out.push_str(&style.term(&mag, &factors));
        }
        out
    }
}

enum Style {
    Plain,
    Latex,
}

impl Style {
    fn param(&self, name: &str) -> String {
        match (self, name) {
            (Style::Latex, HBAR) => "\\hbar".into(),
            (Style::Latex, EPS) => "\\varepsilon".into(),
            _ => name.into(),
        }
    }

    fn jet(&self, k: u32) -> String {
        match (self, k) {
            (_, 0) => "u".into(),
            (Style::Plain, k) => format!("u_{k}"),
            (Style::Latex, k) => format!("u_{{{k}}}"),
        }
    }

    fn power(&self, base: &str, m: u32) -> String {
        match (self, m) {
            (_, 1) => base.into(),
            (Style::Plain, m) => format!("{base}^{m}"),
            (Style::Latex, m) => format!("{base}^{{{m}}}"),
        }
    }

    fn term(&self, mag: &Rational, factors: &[String]) -> String {
        match self {
            Style::Plain => {
                if factors.is_empty() {
                    mag.to_string()
                } else if mag.is_one() {
                    factors.join("*")
                } else {
                    format!("{}*{}", mag, factors.join("*"))
                }
            }
            Style::Latex => {
                let c = if mag.is_one() && !factors.is_empty() {
                    String::new()
                } else if mag.denom().is_one() {
                    mag.numer().to_string()
                } else {
                    format!("\\frac{{{}}}{{{}}}", mag.numer(), mag.denom())
                };
                let body = factors.join(" ");
                match (c.is_empty(), body.is_empty()) {
                    (true, _) => body,
                    (_, true) => c,
                    _ => format!("{c} {body}"),
                }
            }
        }
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffPoly({})", self.pretty())
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: Self) -> DiffPoly {
        let mut out = self.clone();
        for (u, c) in &rhs.terms {
            out.insert(u.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: Self) -> DiffPoly {
        let mut out = self.clone();
        for (u, c) in &rhs.terms {
            out.insert(u.clone(), -c);
        }
        out
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: Self) -> DiffPoly {
        let mut out = self.empty_like();
        for (ua, ca) in &self.terms {
            for (ub, cb) in &rhs.terms {
                out.insert(ua.times(ub), ca * cb);
            }
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&int(-1))
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: Self) -> DiffPoly {
        &self + &rhs
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: Self) -> DiffPoly {
        &self - &rhs
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: Self) -> DiffPoly {
        &self * &rhs
    }
}

/// `∫ density dx`, kept in integration-by-parts normal form.
#[derive(Clone, PartialEq, Eq)]
pub struct LocalFunctional {
    density: DiffPoly,
}

impl LocalFunctional {
    pub fn new(density: &DiffPoly) -> Self {
        normalize(density)
    }

    pub fn zero(ring: &[VarSpec]) -> Self {
        Self {
            density: DiffPoly::zero(ring),
        }
    }

    pub fn density(&self) -> &DiffPoly {
        &self.density
    }

    pub fn is_zero(&self) -> bool {
        self.density.is_zero()
    }

    pub fn ring(&self) -> &[VarSpec] {
        self.density.ring()
    }
}

impl Add for &LocalFunctional {
    type Output = LocalFunctional;
    fn add(self, rhs: Self) -> LocalFunctional {
        // sums of normal forms are normal
        LocalFunctional {
            density: &self.density + &rhs.density,
        }
    }
}

impl Sub for &LocalFunctional {
    type Output = LocalFunctional;
    fn sub(self, rhs: Self) -> LocalFunctional {
        LocalFunctional {
            density: &self.density - &rhs.density,
        }
    }
}

impl fmt::Display for LocalFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "∫({}) dx", self.density.pretty())
    }
}

impl fmt::Debug for LocalFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalFunctional({self})")
    }
}

/// Integration-by-parts normal form of `∫ p dx`.
pub fn normalize(p: &DiffPoly) -> LocalFunctional {
    let mut done = p.empty_like();
    let mut work = p.clone();
    while !work.is_zero() {
        let mut next = p.empty_like();
        for (u, c) in work.terms {
            if u.is_normal() {
                done.insert(u, c);
                continue;
            }
            // u = R * u_{N-1}^m * u_N
            let n = u.top().expect("non-normal monomials have a top index");
            let m = u.mult(n - 1);
            let mut rest = u.mults().to_vec();
            rest.truncate(n as usize - 1);
            let r = UExponents::new(rest);
            if r.is_constant() {
                continue;
            }
            let dr = DiffPoly::monomial(r, c).total_x_derivative();
            let lift = UExponents::from_pairs(&[(n - 1, m + 1)]);
            let factor = -Rational::new(1.into(), (m as i64 + 1).into());
            for (v, s) in dr.terms {
                next.insert(v.times(&lift), s.scale(&factor));
            }
        }
        work = next;
    }
    LocalFunctional { density: done }
}

/// Euler operator `sum_k (-∂_x)^k ∂f/∂u_k` applied to the density.
pub fn variational_derivative(h: &LocalFunctional) -> DiffPoly {
    euler(&h.density)
}

/// Euler operator on a raw density (no normalization required).
pub fn euler(f: &DiffPoly) -> DiffPoly {
    let top = match f.max_index() {
        Some(n) => n,
        None => return f.empty_like(),
    };
    // Horner: P_0 - ∂(P_1 - ∂(P_2 - ...))
    let mut acc = f.partial_u(top);
    for k in (0..top).rev() {
        acc = &f.partial_u(k) - &acc.total_x_derivative();
    }
    acc
}

/// `{h, f} = ∫ (δh/δu) ∂_x (δf/δu) dx`.
pub fn poisson_bracket(h: &LocalFunctional, f: &LocalFunctional) -> LocalFunctional {
    let dh = variational_derivative(h);
    let df = variational_derivative(f).total_x_derivative();
    normalize(&(&dh * &df))
}

fn miura_images(ring: &[VarSpec], g_max: u32, coeffs: &[Rational]) -> impl Fn(u32) -> DiffPoly {
    let ring = ring.to_vec();
    let coeffs: Vec<Rational> = coeffs.iter().take(g_max as usize + 1).cloned().collect();
    move |k| {
        let mut img = DiffPoly::zero(&ring);
        for (g, c) in coeffs.iter().enumerate() {
            let g = g as u32;
            img = &img + &DiffPoly::term(&ring, c.clone(), g, g, &[(k + 2 * g, 1)]);
        }
        img
    }
}

/// `a_g = (-1)^g / (2^(2g) (2g+1)!)` for `g = 0..=g_max`.
pub fn miura_coefficients(g_max: u32) -> Vec<Rational> {
    (0..=g_max).map(sinc_half_coeff).collect()
}

/// Coefficients `b_g` of the inverse map `w = sum_g b_g (h eps)^g u_{2g}`.
pub fn miura_inverse_coefficients(g_max: u32) -> Vec<Rational> {
    let vars = [VarSpec::new("z", g_max + 1)];
    let fwd = MultiSeries::from_terms(
        &vars,
        miura_coefficients(g_max)
            .into_iter()
            .enumerate()
            .map(|(g, c)| (vec![g as u32], c)),
    )
    .expect("valid series");
    let inv = fwd.reciprocal().expect("unit constant term");
    (0..=g_max)
        .map(|g| inv.coefficient(&[g]).expect("in range"))
        .collect()
}

/// Rewrites an expression in `u` in terms of `w` through
/// `u = w + sum_{g=1}^{G} (-1)^g/(2^(2g)(2g+1)!) h^g eps^g w_{2g}`.
///
/// Both sides share the jet notation `u_k`; the output's `u_k` means `w_k`.
pub fn miura_forward(p: &DiffPoly, g_max: u32) -> DiffPoly {
    p.substitute(miura_images(p.ring(), g_max, &miura_coefficients(g_max)))
}

/// Inverse of [`miura_forward`] up to `h^G`: rewrites an expression in `w`
/// in terms of `u`.
pub fn miura_inverse(p: &DiffPoly, g_max: u32) -> DiffPoly {
    p.substitute(miura_images(p.ring(), g_max, &miura_inverse_coefficients(g_max)))
}

/// Solves `∂_x phi = q` with `phi` free of pure-coefficient terms.
pub fn x_antiderivative(q: &DiffPoly) -> Result<DiffPoly> {
    let mut phi = q.empty_like();
    let mut rest = q.clone();
    while let Some((u, c)) = rest
        .terms
        .iter()
        .max_by_key(|(u, _)| u.top().map_or(-1, |t| t as i64))
        .map(|(u, c)| (u.clone(), c.clone()))
    {
        let n = match u.top() {
            Some(n) if n >= 1 && u.mult(n) == 1 => n,
            _ => {
                return Err(Error::NotTotalDerivative(format!(
                    "term {} has no antiderivative",
                    DiffPoly::monomial(u, c).pretty()
                )))
            }
        };
        let m = u.mult(n - 1);
        let piece_u = u.with(n, -1).with(n - 1, 1);
        let piece = DiffPoly::monomial(
            piece_u,
            c.scale(&Rational::new(1.into(), (m as i64 + 1).into())),
        );
        rest = &rest - &piece.total_x_derivative();
        phi = &phi + &piece;
    }
    Ok(phi)
}

/// Draws a random differential polynomial for property checks.
///
/// Monomials have u-degree in `1..=max_degree`, indices up to `max_index`,
/// coefficients `p/q` with small `p`, `q`, times a random `h^a eps^b` inside
/// the ring bounds when `with_params` is set.
pub fn random_diffpoly<R: Rng>(
    rng: &mut R,
    ring: &[VarSpec],
    max_index: u32,
    max_degree: u32,
    n_terms: usize,
    with_params: bool,
) -> DiffPoly {
    let mut p = DiffPoly::zero(ring);
    for _ in 0..n_terms {
        let degree = rng.gen_range(1..=max_degree);
        let pairs: Vec<(u32, u32)> = (0..degree).map(|_| (rng.gen_range(0..=max_index), 1)).collect();
        let num = rng.gen_range(-5i64..=5);
        let den = rng.gen_range(1i64..=4);
        let exps: Vec<u32> = ring
            .iter()
            .map(|v| if with_params { rng.gen_range(0..v.order.max(1)) } else { 0 })
            .collect();
        let coef = MultiSeries::monomial(ring, exps, Rational::new(num.into(), den.into()))
            .expect("valid ring");
        p = &p + &DiffPoly::monomial(UExponents::from_pairs(&pairs), coef);
    }
    p
}

/// Seed for the Helmholtz test pairs used by [`reconstruct_functional_from_flow`].
pub const HELMHOLTZ_SEED: u64 = 0x011a_70de;

/// Recovers `h` with `∂_x δh/δu = q`.
///
/// `q` must be a total x-derivative; its antiderivative `phi` must pass a
/// randomized self-adjointness test of its Fréchet derivative. The
/// Hamiltonian is then `∫_0^1 dλ ∫ u phi[λu] dx`, i.e. each monomial of
/// `phi` of u-degree `n` contributes `u * monomial / (n + 1)`.
pub fn reconstruct_functional_from_flow(q: &DiffPoly) -> Result<LocalFunctional> {
    reconstruct_functional_from_flow_seeded(q, HELMHOLTZ_SEED, 6)
}

pub fn reconstruct_functional_from_flow_seeded(
    q: &DiffPoly,
    seed: u64,
    pairs: usize,
) -> Result<LocalFunctional> {
    if !euler(q).is_zero() {
        return Err(Error::NotTotalDerivative(
            "Euler operator does not annihilate the flow".into(),
        ));
    }
    let phi = x_antiderivative(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ring = q.ring();
    let probe_index = phi.max_index().unwrap_or(0) + 1;
    for _ in 0..pairs {
        let a = random_diffpoly(&mut rng, ring, probe_index, 2, 3, false);
        let b = random_diffpoly(&mut rng, ring, probe_index, 2, 3, false);
        let lhs = normalize(&(&a * &phi.frechet_apply(&b)));
        let rhs = normalize(&(&b * &phi.frechet_apply(&a)));
        if lhs != rhs {
            return Err(Error::NotVariational);
        }
    }
    let u = DiffPoly::u(ring, 0);
    let mut density = DiffPoly::zero(ring);
    for (mono, c) in phi.iter() {
        let n = mono.u_degree() as i64;
        let piece = DiffPoly::monomial(mono.clone(), c.scale(&Rational::new(1.into(), (n + 1).into())));
        density = &density + &(&u * &piece);
    }
    Ok(normalize(&density))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn ring() -> Vec<VarSpec> {
        coeff_ring(4)
    }

    fn t(c: Rational, u: &[(u32, u32)]) -> DiffPoly {
        DiffPoly::term(&ring(), c, 0, 0, u)
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(t(rat(1, 2), &[(0, 2)]).total_x_derivative(), t(int(1), &[(0, 1), (1, 1)]));
        assert_eq!(
            t(int(1), &[(0, 1), (2, 1)]).total_x_derivative(),
            &t(int(1), &[(1, 1), (2, 1)]) + &t(int(1), &[(0, 1), (3, 1)])
        );
        assert!(DiffPoly::scalar(&ring(), rat(3, 7)).total_x_derivative().is_zero());
    }

    #[test]
    fn euler_examples() {
        let f = LocalFunctional::new(&t(rat(1, 6), &[(0, 3)]));
        assert_eq!(variational_derivative(&f), t(rat(1, 2), &[(0, 2)]));
        for g in 1..=3 {
            let f = LocalFunctional::new(&t(int(1), &[(0, 1), (2 * g, 1)]));
            assert_eq!(variational_derivative(&f), t(int(2), &[(2 * g, 1)]));
        }
        let f = LocalFunctional::new(&t(rat(1, 2), &[(1, 2)]));
        assert_eq!(variational_derivative(&f), t(int(-1), &[(2, 1)]));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&t(int(1), &[(0, 1), (2, 1)])).density(), &t(int(-1), &[(1, 2)]));
        assert!(normalize(&t(int(1), &[(3, 1)])).is_zero());
        assert_eq!(normalize(&t(int(1), &[(0, 3)])).density(), &t(int(1), &[(0, 3)]));
        assert_eq!(normalize(&t(int(1), &[(1, 2)])).density(), &t(int(1), &[(1, 2)]));
        // u u_1 u_2 = ∂(u u_1^2)/2 - u_1^3/2
        assert_eq!(
            normalize(&t(int(1), &[(0, 1), (1, 1), (2, 1)])).density(),
            &t(rat(-1, 2), &[(1, 3)])
        );
        assert!(normalize(&DiffPoly::zero(&ring())).is_zero());
    }

    #[test]
    fn bracket_examples() {
        let h = LocalFunctional::new(&t(rat(1, 6), &[(0, 3)]));
        let f = LocalFunctional::new(&t(rat(1, 2), &[(0, 2)]));
        let casimir = LocalFunctional::new(&t(int(1), &[(0, 1)]));
        assert!(poisson_bracket(&h, &h).is_zero());
        assert!(poisson_bracket(&h, &casimir).is_zero());
        assert!(poisson_bracket(&h, &f).is_zero());
        let k = LocalFunctional::new(&t(int(1), &[(0, 1), (1, 2)]));
        assert!(!poisson_bracket(&k, &h).is_zero());
    }

    #[test]
    fn miura_coefficient_values() {
        let a = miura_coefficients(2);
        assert_eq!(a, vec![int(1), rat(-1, 24), rat(1, 1920)]);
        let b = miura_inverse_coefficients(2);
        assert_eq!(b, vec![int(1), rat(1, 24), rat(7, 5760)]);
        assert_eq!(rat(1, 576) - rat(1, 1920), rat(7, 5760));
    }

    #[test]
    fn miura_examples() {
        let r = ring();
        let u = DiffPoly::u(&r, 0);
        let fwd = miura_forward(&u, 2);
        let expect = &(&u + &DiffPoly::term(&r, rat(-1, 24), 1, 1, &[(2, 1)]))
            + &DiffPoly::term(&r, rat(1, 1920), 2, 2, &[(4, 1)]);
        assert_eq!(fwd, expect);
        let inv1 = miura_inverse(&u, 1);
        assert_eq!(inv1, &u + &DiffPoly::term(&r, rat(1, 24), 1, 1, &[(2, 1)]));
        let inv2 = miura_inverse(&u, 2);
        assert_eq!(inv2.coeff(&[(4, 1)], 2, 2), rat(7, 5760));
        let sq = t(int(1), &[(0, 2), (1, 1)]);
        let r4 = coeff_ring(4);
        assert_eq!(miura_forward(&miura_inverse(&sq.with_ring(&r4).unwrap(), 4), 4), sq);
    }

    #[test]
    fn antiderivative_rejects_non_derivatives() {
        assert!(x_antiderivative(&t(int(1), &[(0, 1)])).is_err());
        assert!(x_antiderivative(&DiffPoly::scalar(&ring(), int(1))).is_err());
        assert!(x_antiderivative(&t(int(1), &[(1, 2)])).is_err());
        let q = t(int(1), &[(0, 1), (1, 1)]);
        assert_eq!(x_antiderivative(&q).unwrap(), t(rat(1, 2), &[(0, 2)]));
    }

    #[test]
    fn reconstruct_examples() {
        let q = t(int(1), &[(0, 1), (1, 1)]);
        assert_eq!(
            reconstruct_functional_from_flow(&q).unwrap(),
            LocalFunctional::new(&t(rat(1, 6), &[(0, 3)]))
        );
        let q = t(int(2), &[(3, 1)]);
        assert_eq!(
            reconstruct_functional_from_flow(&q).unwrap().density(),
            &t(int(-1), &[(1, 2)])
        );
        let q = t(int(1), &[(1, 1)]);
        assert_eq!(
            reconstruct_functional_from_flow(&q).unwrap(),
            LocalFunctional::new(&t(rat(1, 2), &[(0, 2)]))
        );
        // ∂_x(u u_1) = u_1^2 + u u_2 is a derivative but u u_1 is no gradient
        let q = t(int(1), &[(0, 1), (1, 1)]).total_x_derivative();
        assert!(matches!(reconstruct_functional_from_flow(&q), Err(Error::NotVariational)));
        assert!(matches!(
            reconstruct_functional_from_flow(&t(int(1), &[(1, 2)])),
            Err(Error::NotTotalDerivative(_))
        ));
    }

    #[test]
    fn rendering() {
        let r = ring();
        let p = &t(int(1), &[(0, 1), (1, 1)]) + &DiffPoly::term(&r, rat(1, 12), 1, 0, &[(3, 1)]);
        assert_eq!(p.pretty(), "u*u_1 + 1/12*h*u_3");
        assert_eq!(p.latex(), "u u_{1} + \\frac{1}{12} \\hbar u_{3}");
        assert_eq!(t(rat(-1, 2), &[(0, 2)]).pretty(), "-1/2*u^2");
        let j = p.to_json();
        assert_eq!(j[0]["u"], json!([[0, 1], [1, 1]]));
    }
}
