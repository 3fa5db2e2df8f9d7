use super::*;
use crate::bath::eta_table;
use crate::model::{bell_initial, BranchId};
use crate::oracles::{dephasing_decay, full_path_sum, rabi_closed};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ket0() -> BranchState {
    BranchState::pure([c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
}

fn spec(bias: f64, tunneling: f64, k: f64) -> BranchSpec {
    BranchSpec { bias, tunneling, offset: 0.0, k_eff: k, branch: BranchId::Q }
}

fn bath(k: f64) -> BathSpec {
    BathSpec::new(k, 0.2, 7.5).unwrap()
}

fn max_diff(a: &[BranchState], b: &[BranchState]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x.matrix() - y.matrix()).norm()).fold(0.0, f64::max)
}

/// Second brute-force enumeration, depth-first, with an optional memory cut.
fn recursive_path_sum(
    branch: &BranchSpec,
    bath: &BathSpec,
    rho0: &BranchState,
    dt: f64,
    n: usize,
    memory: usize,
) -> BranchState {
    let prop = system_propagator(branch, dt);
    let half = system_propagator(branch, 0.5 * dt);
    let eta = eta_table(bath, dt, memory).unwrap();
    let rho = [rho0.get(0, 0), rho0.get(0, 1), rho0.get(1, 0), rho0.get(1, 1)];
    let mut acc = [c(0.0, 0.0); 4];

    fn walk(
        path: &mut Vec<usize>,
        weight: Complex64,
        n: usize,
        memory: usize,
        props: (&PropagatorTable, &PropagatorTable),
        eta: &crate::bath::EtaTable,
        acc: &mut [Complex64; 4],
    ) {
        let k = path.len() - 1;
        if k == n {
            acc[path[n]] += weight;
            return;
        }
        for x in 0..4 {
            let step = if k == 0 { props.0 } else { props.1 };
            let mut w = weight * step.get(x, path[k]);
            let (xp, xm) = pair_spins(x);
            let s_new = ((xp as i8), (xm as i8));
            // the new point has index k + 1; earlier points 1..=k+1
            for (idx, &old) in path.iter().enumerate().skip(1) {
                let sep = k + 1 - idx;
                if sep <= memory {
                    let (op, om) = pair_spins(old);
                    w *= influence_factor(eta, s_new, (op as i8, om as i8), sep);
                }
            }
            w *= influence_factor(eta, s_new, s_new, 0);
            path.push(x);
            walk(path, w, n, memory, props, eta, acc);
            path.pop();
        }
    }

    for x0 in 0..4 {
        let mut path = vec![x0];
        walk(&mut path, rho[x0], n, memory, (&half, &prop), &eta, &mut acc);
    }
    let u = half.unitary;
    BranchState::from_raw(u * Matrix2::new(acc[0], acc[1], acc[2], acc[3]) * u.adjoint())
}

#[test]
fn closed_system_rabi() {
    let b = spec(0.0, 1.0, 0.0);
    let out = evolve_branch(&b, &bath(0.0), &ket0(), 0.25, 9, 400).unwrap();
    for (k, s) in out.iter().enumerate() {
        let t = 0.25 * k as f64;
        assert!((s.get(0, 0).re - t.cos().powi(2)).abs() < 1e-10);
    }
}

#[test]
fn closed_system_matches_oracle() {
    let b = spec(0.4, 0.5, 0.0);
    let out = evolve_branch(&b, &bath(0.0), &BranchState::bell(), 0.25, 9, 200).unwrap();
    for (k, s) in out.iter().enumerate() {
        let exact = rabi_closed(&b, &BranchState::bell(), 0.25 * k as f64);
        assert!((s.matrix() - exact.matrix()).norm() < 1e-10);
    }
}

#[test]
fn untruncated_engine_equals_enumeration() {
    for k in [0.05, 0.5] {
        for (bias, tun) in [(0.4, 0.5), (0.0, 1.0)] {
            let b = spec(bias, tun, k);
            for n in 1..=6 {
                for storage in [Storage::Dense, Storage::Sparse] {
                    let cfg = QuapiConfig::new(0.25, n).with_storage(storage);
                    let engine = evolve_branch_with(&b, &bath(k), &BranchState::bell(), &cfg, n).unwrap();
                    let brute = full_path_sum(&b, &bath(k), &BranchState::bell(), 0.25, n).unwrap();
                    assert!(max_diff(&engine, &brute) < 1e-10, "K={k} n={n} {storage:?}");
                }
            }
        }
    }
}

#[test]
fn enumeration_orderings_agree() {
    let b = spec(0.4, 0.5, 0.3);
    let brute = full_path_sum(&b, &bath(0.3), &ket0(), 0.25, 6).unwrap();
    for n in 1..=6 {
        let rec = recursive_path_sum(&b, &bath(0.3), &ket0(), 0.25, n, n);
        assert!((brute[n].matrix() - rec.matrix()).norm() < 1e-12);
    }
}

#[test]
fn truncated_memory_matches_truncated_enumeration() {
    let b = spec(0.4, 0.5, 0.2);
    for memory in 1..=3 {
        let cfg = QuapiConfig::new(0.25, memory);
        let dense = evolve_branch_with(&b, &bath(0.2), &BranchState::bell(), &cfg, 7).unwrap();
        let sparse = evolve_branch_with(
            &b,
            &bath(0.2),
            &BranchState::bell(),
            &cfg.with_storage(Storage::Sparse),
            7,
        )
        .unwrap();
        assert!(max_diff(&dense, &sparse) < 1e-12);
        for n in 1..=7 {
            let rec = recursive_path_sum(&b, &bath(0.2), &BranchState::bell(), 0.25, n, memory);
            assert!((dense[n].matrix() - rec.matrix()).norm() < 1e-10, "memory {memory}, n {n}");
        }
    }
}

#[test]
fn trace_and_hermiticity_are_preserved() {
    for k in [0.05, 0.3, 0.8] {
        let out = evolve_branch(&spec(0.4, 0.5, k), &bath(k), &BranchState::bell(), 0.25, 6, 120).unwrap();
        for s in &out {
            assert!((s.trace() - 1.0).norm() < 1e-8);
            assert!(s.hermiticity_error() < 1e-10);
        }
    }
}

#[test]
fn dephasing_branch_follows_exact_decay() {
    // Coarse version of the acceptance check: sparse storage, full memory.
    let bath = BathSpec::new(0.2, 0.2, 7.5).unwrap();
    let b = spec(0.0, 0.0, 0.2);
    let dt = 0.125;
    let n = 24;
    let out = evolve_branch(&b, &bath, &BranchState::bell(), dt, n, n).unwrap();
    for (k, s) in out.iter().enumerate() {
        let gamma = dephasing_decay(&bath, k as f64 * dt).unwrap();
        let expected = 0.5 * (-gamma).exp();
        assert!((s.get(0, 1).norm() - expected).abs() <= 1e-8 * expected.max(1e-3), "step {k}");
        assert!((s.get(0, 0).re - 0.5).abs() < 1e-14);
    }
}

#[test]
fn memory_cap_is_enforced() {
    let cfg = QuapiConfig { max_entries: 1 << 10, ..QuapiConfig::new(0.25, 9) };
    let err = evolve_branch_with(&spec(0.4, 0.5, 0.1), &bath(0.1), &ket0(), &cfg, 20).unwrap_err();
    assert!(matches!(err, Error::Resource(_)));
}

#[test]
fn rejects_inconsistent_inputs() {
    let err = evolve_branch(&spec(0.4, 0.5, 0.1), &bath(0.2), &ket0(), 0.25, 9, 10).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(evolve_branch(&spec(0.4, 0.5, 0.1), &bath(0.1), &ket0(), 0.0, 9, 10).is_err());
    assert!(evolve_branch(&spec(0.4, 0.5, 0.1), &bath(0.1), &ket0(), 0.25, 0, 10).is_err());
    assert!(evolve_branch(&spec(0.4, 0.5, 0.1), &bath(0.1), &ket0(), 0.25, 9, 0).is_err());
}

fn pair_trajectory(params: &QubitPairParams, k: f64, a: f64, n: usize) -> Trajectory {
    let bl = bath(k);
    let br = bath(0.0);
    let init = bell_initial(a).unwrap();
    simulate_pair(params, BathTopology::SingleLeft, &bl, &br, &init, &QuapiConfig::new(0.25, 5), n).unwrap()
}

#[test]
fn zz_anisotropy_drops_out() {
    let p0 = QubitPairParams { delta: 0.0, ..Default::default() };
    let p1 = QubitPairParams { delta: 0.1, ..Default::default() };
    let t0 = pair_trajectory(&p0, 0.1, 0.3, 60);
    let t1 = pair_trajectory(&p1, 0.1, 0.3, 60);
    for (x, y) in t0.states.iter().zip(&t1.states) {
        assert!((x.to_matrix() - y.to_matrix()).norm() < 1e-10);
    }
}

#[test]
fn identical_qubits_keep_equal_single_excitation_populations() {
    let traj = pair_trajectory(&QubitPairParams::default(), 0.2, 0.3, 80);
    for x in &traj.states {
        assert!((x.p01 - 0.35).abs() < 1e-10);
        assert!((x.p10 - 0.35).abs() < 1e-10);
    }
}

#[test]
fn closed_single_excitation_bell_stays_maximally_entangled() {
    let traj = pair_trajectory(&QubitPairParams::default(), 0.0, 0.0, 200);
    for c in &traj.concurrence {
        assert!((c.c - 1.0).abs() < 1e-12);
    }
}

#[test]
fn half_weight_starts_separable() {
    for k in [0.0, 0.1, 0.5] {
        let traj = pair_trajectory(&QubitPairParams::default(), k, 0.5, 4);
        assert_eq!(traj.concurrence[0].c, 0.0);
        assert_eq!(traj.times.len(), traj.states.len());
    }
}

#[test]
fn common_bath_protects_single_excitations() {
    let params = QubitPairParams::default();
    let init = bell_initial(0.0).unwrap();
    let traj = simulate_pair(
        &params,
        BathTopology::Common,
        &bath(0.1),
        &bath(0.0),
        &init,
        &QuapiConfig::new(0.25, 5),
        80,
    )
    .unwrap();
    for c in &traj.concurrence {
        assert!((c.c - 1.0).abs() < 1e-12);
    }
}

#[test]
fn separate_baths_need_matching_environment() {
    let l = BathSpec::new(0.1, 0.2, 7.5).unwrap();
    let r = BathSpec::new(0.1, 0.4, 7.5).unwrap();
    assert!(effective_bath(BathTopology::Separate, &l, &r).is_err());
    let r = BathSpec::new(0.05, 0.2, 7.5).unwrap();
    assert_eq!(effective_bath(BathTopology::Separate, &l, &r).unwrap(), l);
}
