use num_complex::Complex64 as C;

use udmis_core::anneal::{energy_at, maximally_mixed_energy, tf_vs_natoms};
use udmis_core::cost::TargetModel;
use udmis_core::graph::UnitDiskGraph;
use udmis_core::rydberg::schedule::V_UNIT;
use udmis_core::rydberg::{
    basis_for, build_full_basis, build_is_basis, hamiltonian_apply, simulate, AnnealConfig,
    NoiseModel, SimOptions,
};

type Dense = Vec<Vec<f64>>;

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![0.0; n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `op` on `atom` of `n`, identity elsewhere. Atom `i` is bit `i` of the
/// state index, so the highest atom is the leftmost factor.
fn site(op: &Dense, atom: usize, n: usize) -> Dense {
    let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let mut acc = vec![vec![1.0]];
    for i in (0..n).rev() {
        acc = kron(&acc, if i == atom { op } else { &id });
    }
    acc
}

fn add(acc: &mut Dense, m: &Dense, w: f64) {
    for (r, mr) in acc.iter_mut().zip(m) {
        for (x, y) in r.iter_mut().zip(mr) {
            *x += w * y;
        }
    }
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

#[test]
fn hamiltonian_matches_kronecker_construction() {
    // One blockaded edge, one weak pair beyond the unit distance.
    let g = UnitDiskGraph::from_points(vec![[0.0, 0.0], [0.8, 0.0], [0.3, 1.2]]);
    let (omega, delta) = (3.1, -1.7);
    let x = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let nop = vec![vec![0.0, 0.0], vec![0.0, 1.0]];
    let mut h = vec![vec![0.0; 8]; 8];
    for i in 0..3 {
        add(&mut h, &site(&x, i, 3), 0.5 * omega);
        add(&mut h, &site(&nop, i, 3), -delta);
        for j in i + 1..3 {
            let r = g.distance(i, j);
            add(
                &mut h,
                &matmul(&site(&nop, i, 3), &site(&nop, j, 3)),
                V_UNIT / r.powi(6),
            );
        }
    }

    let full = build_full_basis(&g, V_UNIT, TargetModel::default()).unwrap();
    let dense = full.dense_hamiltonian(omega, delta);
    let d = full.dim();
    assert_eq!(d, 8);
    for a in 0..d {
        for b in 0..d {
            let (sa, sb) = (full.states()[a] as usize, full.states()[b] as usize);
            assert!((dense[a * d + b] - h[sa][sb]).abs() < 1e-9, "({sa}, {sb})");
        }
    }

    // The IS basis is the principal block on independent states.
    let is = build_is_basis(&g, V_UNIT, TargetModel::default()).unwrap();
    assert_eq!(is.dim(), 6);
    let psi: Vec<C> = (0..is.dim())
        .map(|k| C::new(1.0 + k as f64, 0.5 * k as f64))
        .collect();
    let out = hamiltonian_apply(&is, omega, delta, &psi).unwrap();
    for (a, &sa) in is.states().iter().enumerate() {
        let expect: C = is
            .states()
            .iter()
            .zip(&psi)
            .map(|(&sb, p)| p * h[sa as usize][sb as usize])
            .sum();
        assert!((out[a] - expect).norm() < 1e-9);
    }
}

#[test]
fn subspace_restriction_converges_with_blockade_strength() {
    // Edges near 0.9 are only weakly blockaded at the physical V. Scaling V
    // up closes the gap between the two spaces.
    let g = UnitDiskGraph::generate(6, 2.0, 0.3, 561).unwrap();
    let noise = NoiseModel::dephasing(0.0).unwrap();
    let gap = |scale: f64| {
        let mut c = AnnealConfig::with_tf(1.75).unwrap();
        c.v *= scale;
        let is = simulate(&g, &c, &noise, &SimOptions::default())
            .unwrap()
            .mean_energy();
        let full = simulate(
            &g,
            &c,
            &noise,
            &SimOptions {
                full_hilbert: true,
                ..Default::default()
            },
        )
        .unwrap()
        .mean_energy();
        (is - full).abs() / full.abs()
    };
    let (weak, strong) = (gap(1.0), gap(4.0));
    assert!(weak > 0.02, "{weak}");
    assert!(strong < 0.01, "{strong}");
}

#[test]
fn strong_dephasing_relaxes_toward_maximally_mixed() {
    let noise = NoiseModel::dephasing(3.0).unwrap();
    let (mut long, mut short, mut mixed) = (0.0, 0.0, 0.0);
    for seed in 0..3u64 {
        let g = UnitDiskGraph::generate(8, 2.0, 0.3, 900 + seed).unwrap();
        let opts = SimOptions {
            n_traj: 50,
            seed,
            ..Default::default()
        };
        let b = basis_for(&g, &AnnealConfig::with_tf(1.0).unwrap(), &opts).unwrap();
        long += energy_at(&b, 20.0, 3.0, &opts).unwrap();
        short += energy_at(&b, 2.0, noise.gamma, &opts).unwrap();
        mixed += maximally_mixed_energy(&b);
    }
    assert!(
        (long - mixed).abs() < 0.05 * mixed.abs(),
        "{long} vs {mixed}"
    );
    assert!(short < long - 0.1 * long.abs());
}

#[test]
fn noisy_optimal_time_is_flat_in_atom_count() {
    let noise = NoiseModel::dephasing(3.0).unwrap();
    let corpus: Vec<UnitDiskGraph> = [6usize, 8, 10, 12]
        .iter()
        .flat_map(|&n| {
            (0..2).map(move |s| {
                UnitDiskGraph::generate(n, 2.0, 0.3, 950 + 10 * n as u64 + s).unwrap()
            })
        })
        .collect();
    let opts = SimOptions {
        n_traj: 30,
        seed: 5,
        ..Default::default()
    };
    let table = tf_vs_natoms(&corpus, &noise, 1.0, 10, &opts).unwrap();
    assert_eq!(table.rows.len(), 4);
    assert!(table.cv < 0.3, "{table:?}");
}
