use ilwhodge_core::diffalg::{coeff_ring, reconstruct_functional_from_flow, DiffPoly};
use ilwhodge_core::exactnum::rat;
use ilwhodge_core::ilw::{self, h1, higher_hamiltonian};
use ilwhodge_core::CgTable;

#[test]
fn reconstruct_inverts_flow() {
    for g in 0..=3 {
        let h = h1(g);
        assert_eq!(reconstruct_functional_from_flow(&h.flow()).unwrap(), h.functional);
        let h2 = higher_hamiltonian(2, g).unwrap();
        assert_eq!(reconstruct_functional_from_flow(&h2.flow()).unwrap(), h2.functional);
    }
}

#[test]
fn higher_hamiltonians_are_graded() {
    for (i, g) in [(2, 4), (3, 3), (4, 2)] {
        let h = higher_hamiltonian(i, g).unwrap();
        h.check_grading().unwrap();
    }
}

#[test]
fn t2_flow_matches_closed_form() {
    for g in 1..=4 {
        let r = ilw::verify_flow_t2(g, &CgTable::exact(g));
        assert!(r.is_ok(), "{:?}", r.first_mismatch);
    }
}

#[test]
fn t2_negative_control_localizes() {
    let r = ilw::verify_flow_t2(1, &CgTable::exact(1).perturbed(1, &rat(1, 1_000_000)));
    let m = r.first_mismatch.unwrap();
    assert_eq!(m.locus, "h^1 eps^0 * u_1*u_2");
    assert_eq!(m.expected, "1/6");
}

#[test]
fn commutation_reports() {
    let t = CgTable::exact(3);
    assert!(ilw::verify_commutation(2, 1, 3, &t).is_ok());
    assert!(ilw::verify_commutation(1, 1, 3, &t).is_ok());
    assert!(ilw::verify_commutation(3, 2, 2, &t).is_ok());
    assert!(ilw::verify_commutation(4, 3, 2, &t).is_ok());
}

#[test]
fn h2_at_first_order() {
    // the h eps u^2 u_1^2 candidate drops out
    let h = higher_hamiltonian(2, 1).unwrap();
    let ring = coeff_ring(1);
    let expected = &DiffPoly::term(&ring, rat(1, 24), 0, 0, &[(0, 4)])
        + &DiffPoly::term(&ring, rat(-1, 24), 1, 0, &[(0, 1), (1, 2)]);
    assert_eq!(h.density(), &expected);
}
