use rydkick_core::classical::{one_kick_ionization, run_ensemble, sample_microcanonical};
use rydkick_core::quantum::{
    evolve_direct, evolve_floquet, EnergyBasis, FloquetDecomposition, FloquetOperator, MaskPolicy,
    QuantumState,
};
use rydkick_core::units::f0_for_dp0;
use rydkick_core::{Checkpoints, SystemParams};

#[test]
fn sampled_one_kick_ionization_matches_the_exact_arc() {
    let n_traj = 40_000;
    for dp0 in [0.3, 0.8, 1.5] {
        let p = SystemParams::new(10, 1.45, f0_for_dp0(dp0, 1.45)).unwrap();
        let s = run_ensemble(&p, n_traj, 11, &Checkpoints::from_list(vec![1]), 0).unwrap();
        let exact = one_kick_ionization(10, p.dp);
        let sampled = 1.0 - s.rows.iter().find(|r| r.k == 1).unwrap().p_sur;
        let sigma = (exact * (1.0 - exact) / n_traj as f64).sqrt();
        assert!(
            (sampled - exact).abs() < 4.0 * sigma + 1e-12,
            "dp0 {dp0}: {sampled} vs {exact}"
        );
    }
}

#[test]
fn materialised_and_streamed_ensembles_agree() {
    let p = SystemParams::new(10, 1.45, f0_for_dp0(0.4, 1.45)).unwrap();
    let ks = Checkpoints::geometric(200, 1.3).unwrap();
    let a = sample_microcanonical(&p, 3000, 2)
        .unwrap()
        .run(&ks, 20)
        .unwrap();
    let b = run_ensemble(&p, 3000, 2, &ks, 20).unwrap();
    assert_eq!(a, b);
}

#[test]
fn floquet_and_direct_propagation_agree() {
    let basis = EnergyBasis::build(300.0, 120, Default::default()).unwrap();
    let p = SystemParams::new(5, 1.45, 0.03).unwrap();
    let op = FloquetOperator::build(&basis, &p, Some(&MaskPolicy::for_box(basis.q_max))).unwrap();
    let psi = QuantumState::eigenstate(&basis, 5).unwrap();
    let ks = Checkpoints::geometric(500, 1.2).unwrap();
    let direct = evolve_direct(&psi, &op, &basis, &ks, false);
    let floquet = evolve_floquet(
        &FloquetDecomposition::new(&op, &psi).unwrap(),
        &basis,
        &ks,
        false,
    );
    for (x, y) in direct.rows.iter().zip(&floquet.rows) {
        assert!(
            (x.p_sur - y.p_sur).abs() < 1e-8,
            "K={}: {} vs {}",
            x.k,
            x.p_sur,
            y.p_sur
        );
    }
    assert!(direct.rows.last().unwrap().p_sur < 0.999);
}
