//! The ILW hierarchy: the first Hamiltonian, its flows, and the higher
//! Hamiltonians fixed by commuting with the first one.
//!
//! Hamiltonians are graded: at `h^g` every monomial has differential
//! degree `2g`, and a monomial of u-degree `n` in the i-th Hamiltonian
//! carries `eps^(g - (i + 2 - n))`. The higher Hamiltonians are found by
//! solving `{h_i, h_1} = 0` for the unknown coefficients of every graded
//! normal-form monomial, with the leading term `u^(i+2)/(i+2)!` fixed.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::json;

use crate::diffalg::{
    coeff_ring, normalize, poisson_bracket, variational_derivative, DiffPoly, LocalFunctional,
    UExponents,
};
use crate::error::{Error, Result};
use crate::exactnum::{dispersion_coeff, factorial, int, rat, CgTable, Rational};
use crate::linalg::{solve, Solution};
use crate::report::{Mismatch, Report};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hamiltonian {
    pub index: u32,
    pub genus_order: u32,
    pub functional: LocalFunctional,
}

impl Hamiltonian {
    pub fn density(&self) -> &DiffPoly {
        self.functional.density()
    }

    pub fn flow(&self) -> DiffPoly {
        flow(&self.functional)
    }

    /// Checks the grading and the leading term; returns a description of
    /// the first violation.
    pub fn check_grading(&self) -> std::result::Result<(), String> {
        let top = self.index as i64 + 2;
        let lead_coef = self.density().coeff(&[(0, self.index + 2)], 0, 0);
        let expected = Rational::new(1.into(), factorial(self.index + 2));
        if lead_coef != expected {
            return Err(format!("leading coefficient {lead_coef}, expected {expected}"));
        }
        for (u, c) in self.density().iter() {
            for (e, _) in c.terms() {
                let (g, eps) = (e[0] as i64, e[1] as i64);
                if u.diff_degree() as i64 != 2 * g {
                    return Err(format!("h^{g} term {u:?} has differential degree {}", u.diff_degree()));
                }
                let want = g - (top - u.u_degree() as i64);
                if eps != want {
                    return Err(format!("h^{g} term {u:?} carries eps^{eps}, expected eps^{want}"));
                }
            }
        }
        Ok(())
    }
}

/// `∫ (u^3/6 + sum_{g=1}^{G} C_g h^g eps^(g-1) u u_{2g}) dx` with exact `C_g`.
pub fn h1(g_max: u32) -> Hamiltonian {
    h1_with(g_max, &CgTable::exact(g_max))
}

/// First Hamiltonian with the constants taken from `table`.
pub fn h1_with(g_max: u32, table: &CgTable) -> Hamiltonian {
    let ring = coeff_ring(g_max);
    let mut density = DiffPoly::term(&ring, rat(1, 6), 0, 0, &[(0, 3)]);
    for g in 1..=g_max {
        density = &density + &DiffPoly::term(&ring, table.get(g), g, g - 1, &[(0, 1), (2 * g, 1)]);
    }
    Hamiltonian {
        index: 1,
        genus_order: g_max,
        functional: normalize(&density),
    }
}

/// `∂_x δh/δu`.
pub fn flow(h: &LocalFunctional) -> DiffPoly {
    variational_derivative(h).total_x_derivative()
}

/// One unknown of the higher-Hamiltonian ansatz: `h^hbar eps^eps * u`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AnsatzTerm {
    pub hbar: u32,
    pub eps: u32,
    pub u: UExponents,
}

/// Non-decreasing index tuples of length `n` summing to `total`.
fn index_multisets(n: u32, total: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, total: u32, min: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let mut k = min;
        while k * n <= total {
            prefix.push(k);
            rec(n - 1, total - k, k, prefix, out);
            prefix.pop();
            k += 1;
        }
    }
    let mut out = Vec::new();
    rec(n, total, 0, &mut Vec::new(), &mut out);
    out
}

/// All graded normal-form monomials of the i-th Hamiltonian at orders `1..=G`.
pub fn ansatz(i: u32, g_max: u32) -> Vec<AnsatzTerm> {
    let top = i + 2;
    let mut out = Vec::new();
    for g in 1..=g_max {
        for n in top.saturating_sub(g).max(2)..=top {
            for idx in index_multisets(n, 2 * g) {
                let pairs: Vec<(u32, u32)> = idx.iter().map(|&k| (k, 1)).collect();
                let u = UExponents::from_pairs(&pairs);
                if u.is_normal() {
                    out.push(AnsatzTerm {
                        hbar: g,
                        eps: g + n - top,
                        u,
                    });
                }
            }
        }
    }
    out.sort();
    out
}

/// Coefficients of a normal-form functional keyed by `(u, h, eps)`.
fn coefficient_map(f: &LocalFunctional) -> BTreeMap<(UExponents, u32, u32), Rational> {
    let mut out = BTreeMap::new();
    for (u, c) in f.density().iter() {
        for (e, v) in c.terms() {
            out.insert((u.clone(), e[0], e[1]), v.clone());
        }
    }
    out
}

/// The i-th Hamiltonian (`i >= 2`) built against the exact first Hamiltonian.
pub fn higher_hamiltonian(i: u32, g_max: u32) -> Result<Hamiltonian> {
    higher_hamiltonian_with(i, &h1(g_max))
}

/// The i-th Hamiltonian commuting with the given first Hamiltonian up to its order.
pub fn higher_hamiltonian_with(i: u32, first: &Hamiltonian) -> Result<Hamiltonian> {
    if i < 2 {
        return Err(Error::InvalidArgument(format!(
            "higher Hamiltonians start at index 2, got {i}"
        )));
    }
    let g_max = first.genus_order;
    let ring = coeff_ring(g_max);
    let lead = normalize(&DiffPoly::term(
        &ring,
        Rational::new(1.into(), factorial(i + 2)),
        0,
        0,
        &[(0, i + 2)],
    ));
    let terms = ansatz(i, g_max);

    let columns: Vec<BTreeMap<_, _>> = terms
        .iter()
        .map(|t| {
            let f = LocalFunctional::new(&DiffPoly::term(&ring, int(1), t.hbar, t.eps, &t.u.pairs()));
            coefficient_map(&poisson_bracket(&f, &first.functional))
        })
        .collect();
    let rhs_map = coefficient_map(&poisson_bracket(&lead, &first.functional));

    let mut keys: BTreeMap<(UExponents, u32, u32), usize> = BTreeMap::new();
    for k in columns.iter().flat_map(|c| c.keys()).chain(rhs_map.keys()) {
        let next = keys.len();
        keys.entry(k.clone()).or_insert(next);
    }
    let mut a = vec![vec![Rational::zero(); terms.len()]; keys.len()];
    let mut b = vec![Rational::zero(); keys.len()];
    for (col, entries) in columns.iter().enumerate() {
        for (k, v) in entries {
            a[keys[k]][col] = v.clone();
        }
    }
    for (k, v) in &rhs_map {
        b[keys[k]] = -v.clone();
    }

    let x = match solve(&a, &b, terms.len()) {
        Solution::Unique(x) => x,
        Solution::Inconsistent => return Err(Error::Inconsistent),
        Solution::Underdetermined { nullspace, .. } => {
            let basis = nullspace
                .iter()
                .map(|v| {
                    terms
                        .iter()
                        .zip(v)
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(t, c)| {
                            DiffPoly::term(&ring, c.clone(), t.hbar, t.eps, &t.u.pairs()).pretty()
                        })
                        .collect::<Vec<_>>()
                        .join(" + ")
                })
                .collect();
            return Err(Error::Underdetermined {
                dimension: nullspace.len(),
                basis,
            });
        }
    };

    let mut density = lead.density().clone();
    for (t, c) in terms.iter().zip(x) {
        density = &density + &DiffPoly::term(&ring, c, t.hbar, t.eps, &t.u.pairs());
    }
    let h = Hamiltonian {
        index: i,
        genus_order: g_max,
        functional: normalize(&density),
    };
    h.check_grading().map_err(Error::PathDisagreement)?;
    if !poisson_bracket(&h.functional, &first.functional).is_zero() {
        return Err(Error::PathDisagreement(
            "solved Hamiltonian does not commute with h_1".into(),
        ));
    }
    Ok(h)
}

/// Hamiltonian of index `i >= 1` at order `G`, using `table` for the first one.
pub fn hamiltonian_with(i: u32, g_max: u32, table: &CgTable) -> Result<Hamiltonian> {
    let first = h1_with(g_max, table);
    match i {
        0 => Err(Error::InvalidArgument("Hamiltonian index must be >= 1".into())),
        1 => Ok(first),
        _ => higher_hamiltonian_with(i, &first),
    }
}

pub fn hamiltonian(i: u32, g_max: u32) -> Result<Hamiltonian> {
    hamiltonian_with(i, g_max, &CgTable::exact(g_max))
}

/// `u u_1 + sum_{g=1}^{G} h^g eps^(g-1) |B_2g|/(2g)! u_{2g+1}`.
pub fn expected_flow_t1(g_max: u32) -> DiffPoly {
    let ring = coeff_ring(g_max);
    let mut q = DiffPoly::term(&ring, int(1), 0, 0, &[(0, 1), (1, 1)]);
    for g in 1..=g_max {
        q = &q + &DiffPoly::term(&ring, dispersion_coeff(g), g, g - 1, &[(2 * g + 1, 1)]);
    }
    q
}

/// The closed-form t_2 flow:
/// `u^2 u_1/2 + sum_{g>=1} d_g h^g eps^(g-1)/4 (2 (u u_{2g})_x + ∂_x^{2g+1}(u^2))
///  + sum_{g>=2} d_g h^g eps^(g-2) (g+1) u_{2g+1}` with `d_g = |B_2g|/(2g)!`.
pub fn expected_flow_t2(g_max: u32) -> DiffPoly {
    let ring = coeff_ring(g_max);
    let mut q = DiffPoly::term(&ring, rat(1, 2), 0, 0, &[(0, 2), (1, 1)]);
    let u_sq = DiffPoly::term(&ring, int(1), 0, 0, &[(0, 2)]);
    for g in 1..=g_max {
        let d = dispersion_coeff(g);
        let scale = DiffPoly::term(&ring, d.clone() / int(4), g, g - 1, &[]);
        let inner = &DiffPoly::term(&ring, int(2), 0, 0, &[(0, 1), (2 * g, 1)]).total_x_derivative()
            + &u_sq.nth_x_derivative(2 * g + 1);
        q = &q + &(&scale * &inner);
        if g >= 2 {
            q = &q + &DiffPoly::term(&ring, d * int(g as i64 + 1), g, g - 2, &[(2 * g + 1, 1)]);
        }
    }
    q
}

/// Compares two differential polynomials term by term, reporting the
/// difference at the lowest `h` order first.
pub fn compare(name: &str, order: u32, found: &DiffPoly, expected: &DiffPoly) -> Report {
    let diff = found - expected;
    let mut first: Option<(Vec<u32>, UExponents)> = None;
    for (u, c) in diff.iter() {
        for (e, _) in c.terms() {
            let cand = (e.to_vec(), u.clone());
            if first.as_ref().is_none_or(|f| cand < *f) {
                first = Some(cand);
            }
        }
    }
    match first {
        None => Report::ok(name, order),
        Some((e, u)) => {
            let mono = DiffPoly::monomial(
                u.clone(),
                crate::mpseries::MultiSeries::one(found.ring()).expect("valid ring"),
            );
            let m = Mismatch {
                locus: format!("h^{} eps^{} * {}", e[0], e[1], mono.pretty()),
                hbar_order: e[0],
                expected: expected.coeff(&u.pairs(), e[0], e[1]).to_string(),
                found: found.coeff(&u.pairs(), e[0], e[1]).to_string(),
            };
            Report::mismatch(name, order, m)
        }
    }
}

fn construction_failure(name: &str, order: u32, err: &Error) -> Report {
    Report::mismatch(
        name,
        order,
        Mismatch {
            locus: "construction".into(),
            hbar_order: order,
            expected: "solvable commutation system".into(),
            found: err.to_string(),
        },
    )
}

/// First flow of `h_1` (constants from `table`) against the closed form.
pub fn verify_flow_t1(g_max: u32, table: &CgTable) -> Report {
    let h = h1_with(g_max, table);
    compare("ilw-t1", g_max, &h.flow(), &expected_flow_t1(g_max))
}

/// Flow of the solved second Hamiltonian against the closed-form t_2 flow.
pub fn verify_flow_t2(g_max: u32, table: &CgTable) -> Report {
    match hamiltonian_with(2, g_max, table) {
        Ok(h) => compare("ilw-t2", g_max, &h.flow(), &expected_flow_t2(g_max)),
        Err(e) => construction_failure("ilw-t2", g_max, &e),
    }
}

/// Whether `{h_i, h_j}` vanishes in normal form up to `h^G`.
pub fn verify_commutation(i: u32, j: u32, g_max: u32, table: &CgTable) -> Report {
    let name = format!("commute({i},{j})");
    let hs = hamiltonian_with(i, g_max, table).and_then(|hi| Ok((hi, hamiltonian_with(j, g_max, table)?)));
    let (hi, hj) = match hs {
        Ok(p) => p,
        Err(e) => return construction_failure(&name, g_max, &e),
    };
    let bracket = poisson_bracket(&hi.functional, &hj.functional);
    let zero = DiffPoly::zero(bracket.ring());
    compare(&name, g_max, bracket.density(), &zero)
        .with_detail(json!({"i": i, "j": j, "bracket": bracket.density().pretty()}))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multisets() {
        assert_eq!(index_multisets(2, 2), vec![vec![0, 2], vec![1, 1]]);
        assert_eq!(index_multisets(3, 0), vec![vec![0, 0, 0]]);
        assert_eq!(index_multisets(2, 4).len(), 3);
    }

    #[test]
    fn ansatz_is_graded_and_normal() {
        for t in ansatz(2, 3) {
            assert!(t.u.is_normal());
            assert_eq!(t.u.diff_degree(), 2 * t.hbar);
            assert_eq!(t.eps as i64, t.hbar as i64 - (4 - t.u.u_degree() as i64));
            assert!(t.u.u_degree() >= 2);
        }
        // h^1: u u_1^2 (eps^0) and u^2 u_1^2 (eps^1)
        let g1: Vec<_> = ansatz(2, 1);
        assert_eq!(g1.len(), 2);
        assert_eq!((g1[0].eps, g1[1].eps), (0, 1));
    }

    #[test]
    fn h1_examples() {
        let r = coeff_ring(0);
        assert_eq!(h1(0).density(), &DiffPoly::term(&r, rat(1, 6), 0, 0, &[(0, 3)]));
        // u u_2 normalizes to -u_1^2
        assert_eq!(h1(1).density().coeff(&[(1, 2)], 1, 0), rat(-1, 24));
        assert_eq!(h1(2).density().coeff(&[(2, 2)], 2, 1), rat(1, 1440));
        h1(4).check_grading().unwrap();
    }

    #[test]
    fn flow_examples() {
        assert_eq!(h1(3).flow(), expected_flow_t1(3));
        assert_eq!(h1(1).flow().coeff(&[(3, 1)], 1, 0), rat(1, 12));
        let r = coeff_ring(0);
        let f = LocalFunctional::new(&DiffPoly::term(&r, rat(1, 2), 0, 0, &[(0, 2)]));
        assert_eq!(flow(&f), DiffPoly::u(&r, 1));
    }

    #[test]
    fn h2_leading_order() {
        let h = higher_hamiltonian(2, 0).unwrap();
        assert_eq!(h.density(), &DiffPoly::term(&coeff_ring(0), rat(1, 24), 0, 0, &[(0, 4)]));
    }

    #[test]
    fn h2_flow_parts() {
        let h = higher_hamiltonian(2, 2).unwrap();
        let q = h.flow();
        assert_eq!(q.coeff(&[(5, 1)], 2, 0), rat(1, 240));
        let ring = coeff_ring(2);
        let part = q.filter_coefficients(|a, b| a == 1 && b == 0);
        let expect = (&DiffPoly::term(&ring, int(2), 1, 0, &[(0, 1), (2, 1)]).total_x_derivative()
            + &DiffPoly::term(&ring, int(1), 1, 0, &[(0, 2)]).nth_x_derivative(3))
            .scale(&rat(1, 48));
        assert_eq!(part, expect);
    }

    #[test]
    fn index_one_is_rejected_by_higher() {
        assert!(matches!(higher_hamiltonian(1, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn perturbed_first_flow_is_localized() {
        let table = CgTable::exact(3).perturbed(2, &rat(1, 1_000_000));
        let r = verify_flow_t1(3, &table);
        let m = r.first_mismatch.unwrap();
        assert_eq!(m.hbar_order, 2);
        assert_eq!(m.locus, "h^2 eps^1 * u_5");
    }
}
