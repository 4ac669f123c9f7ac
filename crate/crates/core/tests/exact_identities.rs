use fermishadow::channel::{a_coeff, apply_channel_diagonal, eigenvalue, symmetrized_difference, ChannelSpec, EigenoperatorIndex};
use fermishadow::combinat::{rat, OccupationVector};
use fermishadow::fock::DiagonalOperator;
use fermishadow::identities::appendix_sweep;

#[test]
fn projector_expansion_up_to_ten_modes() {
    for n in 0..=10 {
        for eta in 0..=n {
            let mut acc = DiagonalOperator::zero(n, eta);
            for d in 0..=eta.min(n - eta) {
                acc = &acc + &symmetrized_difference(n, eta, d).unwrap().scale(&a_coeff(n, eta, d).unwrap());
            }
            assert_eq!(acc, DiagonalOperator::projector(&OccupationVector::leading(n, eta)), "n={n} eta={eta}");
        }
    }
}

#[test]
fn eigenoperators_scale_by_channel_eigenvalue() {
    for n in 2..=6 {
        for eta in 1..n {
            let spec = ChannelSpec::new(n, eta).unwrap();
            let x = vec![1];
            for y in 2..=n {
                let idx = EigenoperatorIndex::new(n, x.clone(), vec![y]).unwrap();
                let op = idx.operator(eta);
                let out = apply_channel_diagonal(&spec, &op).unwrap();
                assert_eq!(out, op.scale(&eigenvalue(n, 1).unwrap()));
            }
            let trivial = DiagonalOperator::identity(n, eta);
            assert_eq!(apply_channel_diagonal(&spec, &trivial).unwrap(), trivial.scale(&rat(1)));
        }
    }
}

#[test]
fn appendix_sweep_to_eight_modes() {
    let report = appendix_sweep(8).unwrap();
    assert!(report.passed);
    assert!(report.reports.iter().any(|r| r.label == "t_sum" && r.n == 8));
}
