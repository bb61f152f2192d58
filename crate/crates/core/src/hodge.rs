//! One-point linear Hodge integrals and the constants of the first flow.
//!
//! The one-point integrals `<λ_{g-i} τ_{2g-2+i}>_g` are the coefficients of
//! `t^(2g) k^i` in `((t/2)/sin(t/2))^(k+1)`. Padding with two `τ_0`
//! insertions gives the series `S(h, eps)`, and the transformed potential
//! gives `S~(h, eps) = exp(sum_g h^g eps^(g-1) |B_2g|/(2g (2g)!))`. The
//! constants `C_g` are read off `∂_h log S~ = sum_g C_g (h eps)^(g-1)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::diffalg::{EPS, HBAR};
use crate::error::{Error, Result};
use crate::exactnum::{int, CgTable, Rational};
use crate::mpseries::{log_sinc_half, sinc_half, MultiSeries, VarSpec};
use crate::report::{Mismatch, Report};

/// `<τ_0^3>_0`, the genus-zero seed fixed by the `t_0^2/2` term of the
/// string equation.
pub const GENUS_ZERO_SEED: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Plain,
    Tilde,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Plain => "plain",
            Flavor::Tilde => "tilde",
        }
    }
}

/// True iff `3g - 3 + n = j + sum d` and the moduli space is stable.
pub fn dimension_check(g: u32, n: u32, j: u32, d: &[u32]) -> bool {
    let stable = 2 * g as i64 - 2 + n as i64 > 0;
    let dim = 3 * g as i64 - 3 + n as i64;
    let deg = j as i64 + d.iter().map(|&x| x as i64).sum::<i64>();
    stable && dim == deg
}

/// Values `<λ_j τ_{d_1} ... τ_{d_n}>_g` on a finite set of slices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketTable {
    pub flavor: Flavor,
    entries: BTreeMap<(u32, u32, Vec<u32>), Rational>,
}

impl BracketTable {
    pub fn new(flavor: Flavor) -> Self {
        Self {
            flavor,
            entries: BTreeMap::new(),
        }
    }

    /// Records an entry. Entries with `j > g` or outside the dimension
    /// constraint are only accepted when zero, and are then not stored.
    pub fn insert(&mut self, g: u32, j: u32, d: Vec<u32>, value: Rational) -> Result<()> {
        if j > g || !dimension_check(g, d.len() as u32, j, &d) {
            if value.is_zero() {
                return Ok(());
            }
            return Err(Error::InvalidArgument(format!(
                "nonzero bracket at g={g}, j={j}, d={d:?} violates the dimension constraint"
            )));
        }
        self.entries.insert((g, j, d), value);
        Ok(())
    }

    pub fn get(&self, g: u32, j: u32, d: &[u32]) -> Rational {
        self.entries
            .get(&(g, j, d.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, &[u32], &Rational)> {
        self.entries.iter().map(|((g, j, d), v)| (*g, *j, d.as_slice(), v))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("g,j,d,value\n");
        for (g, j, d, v) in self.iter() {
            let d: Vec<String> = d.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{g},{j},{},{v}\n", d.join(" ")));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "flavor": self.flavor.as_str(),
            "entries": self.iter().map(|(g, j, d, v)| json!({
                "g": g, "j": j, "d": d, "value": v.to_string(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_latex(&self) -> String {
        let mut out = String::from("\\begin{tabular}{ccc}\n$g$ & bracket & value \\\\\n\\hline\n");
        let br = if self.flavor == Flavor::Tilde { "^{\\sim}" } else { "" };
        for (g, j, d, v) in self.iter() {
            let taus: Vec<String> = d.iter().map(|x| format!("\\tau_{{{x}}}")).collect();
            let lambda = if j == 0 { String::new() } else { format!("\\lambda_{{{j}}}") };
            let val = if v.denom().is_one() {
                v.numer().to_string()
            } else {
                let sign = if *v < Rational::zero() { "-" } else { "" };
                format!("{sign}\\frac{{{}}}{{{}}}", v.numer().magnitude(), v.denom())
            };
            out.push_str(&format!(
                "{g} & $\\langle {lambda}{}\\rangle{br}_{{{g}}}$ & ${val}$ \\\\\n",
                taus.join("")
            ));
        }
        out.push_str("\\end{tabular}\n");
        out
    }
}

fn hv(g_max: u32) -> (VarSpec, VarSpec) {
    (VarSpec::new(HBAR, g_max + 1), VarSpec::new(EPS, g_max + 1))
}

/// `((t/2)/sin(t/2))^(k+1)` over `t < 2 g_max + 1`, `k < g_max + 1`.
pub fn one_point_series(g_max: u32) -> Result<MultiSeries> {
    let base = log_sinc_half("t", 2 * g_max + 1)?.exp_series()?;
    base.pow_linear_exponent(&int(1), &int(1), &VarSpec::new("k", g_max + 1))
}

/// `<λ_{g-i} τ_{2g-2+i}>_g` for `1 <= g <= g_max`, `0 <= i <= g`.
pub fn one_point_table(g_max: u32) -> Result<BracketTable> {
    if g_max < 1 {
        return Err(Error::InvalidArgument("one_point_table needs g_max >= 1".into()));
    }
    let series = one_point_series(g_max)?;
    if !series.constant_term().is_one() {
        return Err(Error::PathDisagreement("constant term of the one-point series is not 1".into()));
    }
    let mut table = BracketTable::new(Flavor::Plain);
    for g in 1..=g_max {
        for i in 0..=g {
            let v = series.coefficient(&[2 * g, i])?;
            table.insert(g, g - i, vec![2 * g - 2 + i], v)?;
        }
    }
    Ok(table)
}

/// `S(h, eps) = exp((1 + 1/eps) L(h eps))`, `L` the log-sinc series.
pub fn s_series(g_max: u32) -> Result<MultiSeries> {
    let (h, e) = hv(g_max);
    let l = log_sinc_half("z", 2 * g_max + 2)?.substitute_square(&h, &e)?;
    let l_over_eps = l.divide_by_var(EPS, 1)?;
    (&l + &l_over_eps).exp_series()
}

/// `sin(sqrt(h eps)/2)/(sqrt(h eps)/2)` as a series in `h, eps`.
pub fn sine_factor(g_max: u32) -> Result<MultiSeries> {
    let (h, e) = hv(g_max);
    sinc_half("z", 2 * g_max + 2)?.substitute_square(&h, &e)
}

/// The two routes to `S~`: the sine factor times `S`, and the closed exponential.
pub fn s_tilde_paths(g_max: u32) -> Result<(MultiSeries, MultiSeries)> {
    let (h, e) = hv(g_max);
    let via_string = &sine_factor(g_max)? * &s_series(g_max)?;
    let exponent = log_sinc_half("z", 2 * g_max + 2)?
        .substitute_square(&h, &e)?
        .divide_by_var(EPS, 1)?;
    Ok((via_string, exponent.exp_series()?))
}

/// `S~(h, eps)`, checked to agree along both routes.
pub fn s_tilde_series(g_max: u32) -> Result<MultiSeries> {
    let (a, b) = s_tilde_paths(g_max)?;
    if a != b {
        let diff = &a - &b;
        let first = diff.terms().next().map(|(e, _)| e.to_vec()).unwrap_or_default();
        return Err(Error::PathDisagreement(format!("S~ routes differ at {first:?}")));
    }
    Ok(b)
}

/// `<λ_j τ_0^2 τ_{3g-j}>_g` (or its tilde variant) read from a series in `h, eps`.
pub fn padded_table(series: &MultiSeries, flavor: Flavor) -> Result<BracketTable> {
    let g_max = series.vars()[0].order.saturating_sub(1);
    let mut table = BracketTable::new(flavor);
    for g in 0..=g_max {
        for j in 0..=g {
            let v = series.coefficient(&[g, j])?;
            table.insert(g, j, vec![0, 0, 3 * g - j], v)?;
        }
    }
    Ok(table)
}

/// `∂_h S~ / S~`, which must depend on `h eps` only.
pub fn log_derivative(s_tilde: &MultiSeries) -> Result<MultiSeries> {
    let d = s_tilde.partial_derivative(HBAR)?;
    let s = s_tilde.truncate_to(d.vars())?;
    let q = &d * &s.reciprocal()?;
    if let Some((e, _)) = q.terms().find(|(e, _)| e[0] != e[1]) {
        return Err(Error::NotProductFunction(e.to_vec()));
    }
    Ok(q)
}

/// `C_1..C_G` from the one-point formula.
pub fn extract_cg(g_max: u32) -> Result<Vec<Rational>> {
    if g_max < 1 {
        return Err(Error::InvalidArgument("extract_cg needs G >= 1".into()));
    }
    let q = log_derivative(&s_tilde_series(g_max)?)?;
    (1..=g_max).map(|g| q.coefficient(&[g - 1, g - 1])).collect()
}

/// `∂_h S~ - (sum_g C_g (h eps)^(g-1)) S~`, zero when the table is right.
pub fn ode_residual(g_max: u32, table: &CgTable) -> Result<MultiSeries> {
    let s = s_tilde_series(g_max)?;
    let d = s.partial_derivative(HBAR)?;
    let vars = d.vars().to_vec();
    let rate = MultiSeries::from_terms(&vars, (1..=g_max).map(|g| (vec![g - 1, g - 1], table.get(g))))?;
    Ok(&d - &(&rate * &s.truncate_to(&vars)?))
}

/// Checks `table` against the constants extracted from the one-point
/// formula; the extracted value is reported as expected.
pub fn verify_cg(g_max: u32, table: &CgTable) -> Report {
    let extracted = match extract_cg(g_max) {
        Ok(v) => v,
        Err(e) => {
            return Report::mismatch(
                "cg",
                g_max,
                Mismatch {
                    locus: "extraction".into(),
                    hbar_order: 0,
                    expected: "function of h*eps".into(),
                    found: e.to_string(),
                },
            )
        }
    };
    let values: Vec<Value> = extracted
        .iter()
        .enumerate()
        .map(|(i, c)| json!({"g": i + 1, "C_g": c.to_string()}))
        .collect();
    for (i, c) in extracted.iter().enumerate() {
        let g = i as u32 + 1;
        let want = table.get(g);
        if *c != want {
            return Report::mismatch(
                "cg",
                g_max,
                Mismatch {
                    locus: format!("C_{g}"),
                    hbar_order: g,
                    expected: c.to_string(),
                    found: want.to_string(),
                },
            )
            .with_detail(json!({"extracted": values}));
        }
    }
    Report::ok("cg", g_max).with_detail(json!({"extracted": values}))
}

/// One coefficient of the equated linear terms in `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearTermCoefficient {
    pub hbar: u32,
    pub eps: u32,
    pub t_label: u32,
    pub left: Rational,
    pub right: Rational,
}

/// Both sides of the linear-term identity for total `h` orders `0..=G`.
///
/// Left: dilaton weight `(2g+1)` on `<λ_j τ_0^2 τ_{3g-j}>~_g` minus the
/// string term carried by `u u_x`. Right: `sum_{g>=1} 2 C_g h^(g+h')
/// eps^(g+j-1) <λ_j τ_0^2 τ_{3h'-j}>~_{h'}`. Each coefficient is labelled
/// by its `t_{3(g+h') - (g+j-1)}` index.
pub fn linear_term_coefficients(g_max: u32, table: &CgTable) -> Result<Vec<LinearTermCoefficient>> {
    let s = s_tilde_series(g_max)?;
    if s.constant_term() != int(GENUS_ZERO_SEED) {
        return Err(Error::PathDisagreement("S~ constant term differs from <τ_0^3>_0".into()));
    }
    let tilde = |h: u32, j: u32| -> Rational {
        if h == 0 {
            return if j == 0 { int(GENUS_ZERO_SEED) } else { Rational::zero() };
        }
        if j > h {
            return Rational::zero();
        }
        s.coefficient(&[h, j]).unwrap_or_else(|_| Rational::zero())
    };
    let mut out = Vec::new();
    for total in 0..=g_max {
        for e in 0..=total {
            let t_label = 3 * total - e;
            let own = tilde(total, e);
            let left = int(2 * total as i64 + 1) * &own - &own;
            let mut right = Rational::zero();
            for g in 1..=total {
                // eps exponent g + j - 1 = e
                if e + 1 < g {
                    continue;
                }
                let j = e + 1 - g;
                right += int(2) * table.get(g) * tilde(total - g, j);
            }
            out.push(LinearTermCoefficient {
                hbar: total,
                eps: e,
                t_label,
                left,
                right,
            });
        }
    }
    Ok(out)
}

pub fn verify_linear_term_identity(g_max: u32, table: &CgTable) -> Report {
    let coeffs = match linear_term_coefficients(g_max, table) {
        Ok(c) => c,
        Err(e) => {
            return Report::mismatch(
                "linear-term",
                g_max,
                Mismatch {
                    locus: "construction".into(),
                    hbar_order: 0,
                    expected: "consistent S~".into(),
                    found: e.to_string(),
                },
            )
        }
    };
    let checked = coeffs.len();
    match coeffs.into_iter().find(|c| c.left != c.right) {
        None => Report::ok("linear-term", g_max).with_detail(json!({"coefficients_checked": checked})),
        Some(c) => Report::mismatch(
            "linear-term",
            g_max,
            Mismatch {
                locus: format!("h^{} eps^{} t_{}", c.hbar, c.eps, c.t_label),
                hbar_order: c.hbar,
                expected: c.left.to_string(),
                found: c.right.to_string(),
            },
        ),
    }
}

/// Runs the argument backwards: integrates the ODE with the given constants,
/// strips the sine factor and reads off the one-point integrals.
pub fn one_point_from_constants(g_max: u32, table: &CgTable) -> Result<BracketTable> {
    let (h, e) = hv(g_max);
    let vars = [h, e];
    let exponent = MultiSeries::from_terms(
        &vars,
        (1..=g_max).map(|g| (vec![g, g - 1], table.get(g) / int(g as i64))),
    )?;
    let s_tilde = exponent.exp_series()?;
    let s = &s_tilde * &sine_factor(g_max)?.reciprocal()?;
    let mut out = BracketTable::new(Flavor::Plain);
    for g in 1..=g_max {
        for j in 0..=g {
            out.insert(g, j, vec![3 * g - j - 2], s.coefficient(&[g, j])?)?;
        }
    }
    Ok(out)
}

pub fn verify_reverse(g_max: u32, table: &CgTable) -> Report {
    let result = one_point_table(g_max).and_then(|a| Ok((a, one_point_from_constants(g_max, table)?)));
    let (direct, reverse) = match result {
        Ok(p) => p,
        Err(e) => {
            return Report::mismatch(
                "reverse",
                g_max,
                Mismatch {
                    locus: "construction".into(),
                    hbar_order: 0,
                    expected: "tables".into(),
                    found: e.to_string(),
                },
            )
        }
    };
    for g in 1..=g_max {
        for j in 0..=g {
            let d = [3 * g - j - 2];
            let (x, y) = (direct.get(g, j, &d), reverse.get(g, j, &d));
            if x != y {
                return Report::mismatch(
                    "reverse",
                    g_max,
                    Mismatch {
                        locus: format!("<lambda_{j} tau_{}>_{g}", d[0]),
                        hbar_order: g,
                        expected: x.to_string(),
                        found: y.to_string(),
                    },
                );
            }
        }
    }
    Report::ok("reverse", g_max).with_detail(json!({"entries": direct.len()}))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{c_g, rat};

    #[test]
    fn dimension_examples() {
        assert!(dimension_check(1, 1, 1, &[0]));
        assert!(!dimension_check(1, 1, 0, &[0]));
        assert!(!dimension_check(0, 2, 0, &[0, 0]));
        assert!(dimension_check(0, 3, 0, &[0, 0, 0]));
    }

    #[test]
    fn one_point_examples() {
        let t = one_point_table(2).unwrap();
        assert_eq!(t.get(1, 1, &[0]), rat(1, 24));
        assert_eq!(t.get(1, 0, &[1]), rat(1, 24));
        assert_eq!(t.get(2, 2, &[2]), rat(7, 5760));
        assert_eq!(t.get(2, 0, &[4]), rat(1, 1152));
        assert!(one_point_table(0).is_err());
        for (g, j, d, _) in t.iter() {
            assert!(dimension_check(g, 1, j, d));
        }
    }

    #[test]
    fn s_examples() {
        let s = s_series(2).unwrap();
        assert_eq!(s.coefficient(&[1, 0]).unwrap(), rat(1, 24));
        assert_eq!(s.coefficient(&[1, 1]).unwrap(), rat(1, 24));
        assert_eq!(s.coefficient(&[2, 0]).unwrap(), rat(1, 1152));
    }

    #[test]
    fn s_tilde_examples() {
        let s = s_tilde_series(3).unwrap();
        assert_eq!(s.coefficient(&[1, 0]).unwrap(), rat(1, 24));
        assert_eq!(s.coefficient(&[2, 0]).unwrap(), rat(1, 1152));
        assert_eq!(s.coefficient(&[2, 1]).unwrap(), rat(1, 2880));
        for (e, _) in s.terms() {
            assert!(e == [0, 0] || e[1] < e[0], "{e:?}");
        }
    }

    #[test]
    fn constants_extracted() {
        let c = extract_cg(4).unwrap();
        assert_eq!(c[0], rat(1, 24));
        assert_eq!(c[1], rat(1, 1440));
        for (i, v) in c.iter().enumerate() {
            assert_eq!(*v, c_g(i as u32 + 1));
        }
    }

    #[test]
    fn ode_residual_vanishes() {
        assert!(ode_residual(5, &CgTable::exact(5)).unwrap().is_zero());
        assert!(!ode_residual(5, &CgTable::exact(5).perturbed(3, &rat(1, 7))).unwrap().is_zero());
    }

    #[test]
    fn linear_term_seed_example() {
        let c = linear_term_coefficients(1, &CgTable::exact(1)).unwrap();
        let x = c.iter().find(|c| c.hbar == 1 && c.eps == 0).unwrap();
        assert_eq!(x.t_label, 3);
        assert_eq!(x.left, rat(1, 12));
        assert_eq!(x.right, rat(1, 12));
    }

    #[test]
    fn linear_term_negative_control() {
        let r = verify_linear_term_identity(3, &CgTable::exact(3).perturbed(1, &rat(1, 1_000_000)));
        assert!(!r.is_ok());
        assert_eq!(r.first_mismatch.unwrap().hbar_order, 1);
    }

    #[test]
    fn s_matches_one_point_by_string_reduction() {
        let g_max = 4;
        let s = s_series(g_max).unwrap();
        let t = one_point_table(g_max).unwrap();
        for g in 1..=g_max {
            for j in 0..=g {
                assert_eq!(s.coefficient(&[g, j]).unwrap(), t.get(g, j, &[3 * g - j - 2]));
            }
        }
    }

    #[test]
    fn reverse_direction() {
        assert!(verify_reverse(4, &CgTable::exact(4)).is_ok());
        assert!(!verify_reverse(4, &CgTable::exact(4).perturbed(2, &rat(1, 1_000_000))).is_ok());
    }

    #[test]
    fn table_exports() {
        let t = one_point_table(1).unwrap();
        let csv = t.to_csv();
        assert_eq!(csv, "g,j,d,value\n1,0,1,1/24\n1,1,0,1/24\n");
        assert_eq!(t.to_json()["entries"][0]["value"], "1/24");
        assert!(t.to_latex().contains("\\frac{1}{24}"));
    }
}
