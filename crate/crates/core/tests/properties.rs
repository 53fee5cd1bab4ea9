use std::f64::consts::TAU;

use nalgebra::DMatrix;
use otoc_lab::classical::{iterate_map, koopman_matrix, tangent_evolve, MapState, TorusMap};
use otoc_lab::experiments::CsvTable;
use otoc_lab::hilbert::{CompositeSpace, DensityMatrix, Operator, C64};
use otoc_lab::models::{build_spin_chain, ModelInstance, SpinChainSpec};
use otoc_lab::scrambling::{heisenberg_evolve, otoc_f, squared_commutator, TimeGrid};
use proptest::prelude::*;

fn hermitian(dim: usize, entries: &[(f64, f64)]) -> Operator {
    let a = DMatrix::from_fn(dim, dim, |i, j| {
        let (re, im) = entries[i * dim + j];
        C64::new(re, im)
    });
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    Operator::new(CompositeSpace::single(dim).unwrap(), h).unwrap()
}

fn random_hermitian(dim: usize) -> impl Strategy<Value = Operator> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim).prop_map(move |e| hermitian(dim, &e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heisenberg_evolution_preserves_the_spectrum(h in random_hermitian(5), w in random_hermitian(5), t in 0.0..5.0f64) {
        let model = ModelInstance::from_hamiltonian("random", h).unwrap();
        let wt = heisenberg_evolve(&model, &w, t).unwrap();
        prop_assert!(wt.hermiticity_error() < 1e-10);
        let sq = |op: &Operator| op.compose(op).unwrap().trace().re;
        prop_assert!((sq(&wt) - sq(&w)).abs() < 1e-9 * (1.0 + sq(&w)));
        let back = heisenberg_evolve(&model, &wt, -t).unwrap();
        prop_assert!(back.sub(&w).unwrap().max_norm() < 1e-9);
    }

    #[test]
    fn squared_commutator_is_nonnegative(h in random_hermitian(6), w in random_hermitian(6), v in random_hermitian(6)) {
        let model = ModelInstance::from_hamiltonian("random", h).unwrap();
        let rho = DensityMatrix::maximally_mixed(model.space());
        let grid = TimeGrid::uniform(0.0, 4.0, 9).unwrap();
        let c = squared_commutator(&model, &w, &v, &rho, &grid).unwrap();
        prop_assert!(c.values().iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn pauli_otoc_identity(hx in 0.2..1.5f64, hz in 0.0..1.0f64, site in 1usize..4, t in 0.0..6.0f64) {
        // for unitary Hermitian W, V at infinite temperature: C = 2(1 − Re F)
        let model = build_spin_chain(&SpinChainSpec { field_x: hx, field_z: hz, ..SpinChainSpec::chaotic(4) }).unwrap();
        let w = model.local_operator(0, "Z").unwrap();
        let v = model.local_operator(site, "X").unwrap();
        let rho = DensityMatrix::maximally_mixed(model.space());
        let grid = TimeGrid::new(vec![t]).unwrap();
        let c = squared_commutator(&model, &w, &v, &rho, &grid).unwrap().values()[0];
        let f = otoc_f(&model, &w, &v, &rho, &grid).unwrap().values()[0];
        prop_assert!((c - 2.0 * (1.0 - f.re)).abs() < 1e-10);
        prop_assert!(c <= 4.0 + 1e-10);
    }

    #[test]
    fn map_states_stay_in_the_fundamental_domain(x in -50.0..50.0f64, p in -50.0..50.0f64, k in 0.0..12.0f64, n in 0usize..200) {
        for map in [TorusMap::Cat, TorusMap::standard(k).unwrap()] {
            let period = map.period();
            let s = iterate_map(&map, MapState::new(&map, x, p), n);
            prop_assert!((0.0..period).contains(&s.x) && (0.0..period).contains(&s.p));
        }
    }

    #[test]
    fn tangent_map_is_symplectic(x in 0.0..TAU, p in 0.0..TAU, k in 0.0..12.0f64) {
        let map = TorusMap::standard(k).unwrap();
        let det = tangent_evolve(&map, MapState::new(&map, x, p), 2_000).determinant();
        prop_assert!((det - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cat_ulam_matrix_is_a_permutation(n in 8usize..64) {
        let grid = koopman_matrix(&TorusMap::Cat, n).unwrap();
        prop_assert!(grid.is_permutation());
        let dense = grid.dense();
        for col in 0..grid.num_cells() {
            prop_assert!((dense.column(col).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_values_round_trip_exactly(values in proptest::collection::vec(-1e300..1e300f64, 1..40)) {
        let t: Vec<f64> = (0..values.len()).map(|k| k as f64 * 0.1).collect();
        let z: Vec<C64> = values.iter().map(|&v| C64::new(v, -v / 3.0)).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        CsvTable::new(&t, "1").real("a", "1", &values).complex("z", "1", &z).write(&path).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
        prop_assert_eq!(header, vec!["t", "a", "z_re", "z_im"]);
        for (k, row) in reader.records().enumerate() {
            let row: Vec<f64> = row.unwrap().iter().map(|s| s.parse().unwrap()).collect();
            prop_assert_eq!(row, vec![t[k], values[k], z[k].re, z[k].im]);
        }
    }
}

#[test]
fn time_grids_reject_bad_input() {
    assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
    assert!(TimeGrid::new(vec![2.0, 1.0]).is_err());
    assert!(TimeGrid::new(vec![]).is_err());
    assert!(TimeGrid::uniform(0.0, 1.0, 0).is_err());
    // backward evolution is allowed for Hamiltonian models
    assert!(TimeGrid::new(vec![-1.0, 0.0]).is_ok());
    assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
}
