use super::engine::Engine;
use super::{SpreadingProfile, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::{commutator, CMatrix, Operator, C64};
use crate::models::ModelInstance;

/// Largest chain for which all `4^L` Pauli strings are resolved.
pub const MAX_PAULI_SITES: usize = 8;

/// Truncated nested-commutator series `Σ_{n≤order} (it)ⁿ/n! ad_Hⁿ(W)`.
pub fn bch_series(model: &ModelInstance, w0: &Operator, t: f64, order: usize) -> Result<Operator> {
    let h = model
        .hamiltonian()
        .ok_or_else(|| Error::Unsupported("nested-commutator series needs a Hamiltonian".into()))?;
    let mut term = w0.clone();
    let mut sum = w0.clone();
    for n in 1..=order {
        term = commutator(h, &term)?.scale(C64::new(0.0, t / n as f64));
        sum = sum.add(&term)?;
    }
    Ok(sum)
}

/// Expansion coefficients `c_P` of `W = Σ_P c_P P` over the qubit Pauli strings.
///
/// Coefficients are stored in matrix layout: entry `(r, c)` holds the string
/// whose letter on site `k` is `I, X, Y, Z` for bit pairs
/// `(r_k, c_k) = (0,0), (0,1), (1,0), (1,1)`.
#[derive(Clone, Debug)]
pub struct PauliDecomposition {
    sites: usize,
    coeffs: CMatrix,
}

impl PauliDecomposition {
    pub fn num_sites(&self) -> usize {
        self.sites
    }

    fn letter_bits(letter: char) -> Option<(usize, usize)> {
        match letter.to_ascii_uppercase() {
            'I' => Some((0, 0)),
            'X' => Some((0, 1)),
            'Y' => Some((1, 0)),
            'Z' => Some((1, 1)),
            _ => None,
        }
    }

    /// Coefficient of a string such as `"ZIX"` (site 0 first).
    pub fn coefficient(&self, string: &str) -> Option<C64> {
        if string.chars().count() != self.sites {
            return None;
        }
        let (mut r, mut c) = (0usize, 0usize);
        for ch in string.chars() {
            let (rb, cb) = Self::letter_bits(ch)?;
            r = (r << 1) | rb;
            c = (c << 1) | cb;
        }
        Some(self.coeffs[(r, c)])
    }

    /// `Σ_P |c_P|²`, equal to `‖W‖²_F / 2^L`.
    pub fn total_weight(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    pub fn identity_weight(&self) -> f64 {
        self.coeffs[(0, 0)].norm_sqr()
    }

    /// Squared weight of the strings acting nontrivially on each site.
    pub fn site_weights(&self) -> Vec<f64> {
        let l = self.sites;
        let mut out = vec![0.0; l];
        for c in 0..self.coeffs.ncols() {
            for r in 0..self.coeffs.nrows() {
                let w = self.coeffs[(r, c)].norm_sqr();
                if w == 0.0 {
                    continue;
                }
                let active = r | c;
                for (k, slot) in out.iter_mut().enumerate() {
                    if (active >> (l - 1 - k)) & 1 == 1 {
                        *slot += w;
                    }
                }
            }
        }
        out
    }

    /// Site weights normalized by the non-identity weight; all zero for `W ∝ I`.
    pub fn support_weights(&self) -> Vec<f64> {
        let norm = self.total_weight() - self.identity_weight();
        let raw = self.site_weights();
        if norm <= f64::MIN_POSITIVE {
            return vec![0.0; self.sites];
        }
        raw.into_iter().map(|w| (w / norm).min(1.0)).collect()
    }
}

fn qubit_sites(dim_sites: &[usize]) -> Result<usize> {
    if !dim_sites.iter().all(|&d| d == 2) {
        return Err(Error::Unsupported("Pauli strings need a qubit chain".into()));
    }
    if dim_sites.len() > MAX_PAULI_SITES {
        return Err(Error::Unsupported(format!(
            "Pauli decomposition is capped at {MAX_PAULI_SITES} sites (got {})",
            dim_sites.len()
        )));
    }
    Ok(dim_sites.len())
}

fn decompose_matrix(m: &CMatrix, sites: usize) -> PauliDecomposition {
    let mut c = m.clone();
    let half = C64::new(0.5, 0.0);
    let i_half = C64::new(0.0, 0.5);
    // One 2×2 block transform per site turns matrix entries into string coefficients.
    for k in 0..sites {
        let bit = 1usize << (sites - 1 - k);
        for col in (0..c.ncols()).filter(|col| col & bit == 0) {
            for row in (0..c.nrows()).filter(|row| row & bit == 0) {
                let a = c[(row, col)];
                let b = c[(row, col | bit)];
                let cc = c[(row | bit, col)];
                let d = c[(row | bit, col | bit)];
                c[(row, col)] = (a + d) * half;
                c[(row, col | bit)] = (b + cc) * half;
                c[(row | bit, col)] = (b - cc) * i_half;
                c[(row | bit, col | bit)] = (a - d) * half;
            }
        }
    }
    PauliDecomposition { sites, coeffs: c }
}

/// Pauli-string expansion of an operator on a qubit chain (at most [`MAX_PAULI_SITES`]).
pub fn pauli_decompose(op: &Operator) -> Result<PauliDecomposition> {
    let sites = qubit_sites(op.space().site_dims())?;
    Ok(decompose_matrix(op.matrix(), sites))
}

/// Normalized per-site support of `W(t)` on each grid time.
pub fn support_profile(model: &ModelInstance, w0: &Operator, grid: &TimeGrid) -> Result<SpreadingProfile> {
    if w0.space() != model.space() {
        return Err(Error::space_mismatch(w0.space(), model.space()));
    }
    let sites = qubit_sites(model.space().site_dims())?;
    let engine = Engine::new(model)?;
    engine.check_grid(grid)?;
    let wf = engine.frame(w0.matrix());
    let rows = engine.map_heisenberg(grid, &wf, |t, wt| {
        // exact at t = 0, so untouched sites carry exactly zero weight
        let m = if t == 0.0 {
            w0.matrix().clone()
        } else {
            engine.unframe(wt)
        };
        decompose_matrix(&m, sites).support_weights()
    })?;
    SpreadingProfile::new(grid.clone(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed_local, pauli, tensor_product, CompositeSpace};
    use crate::models::{build_kicked_rotor, build_spin_chain, KickedRotorSpec, SpinChainSpec};
    use crate::scrambling::heisenberg_evolve;
    use approx::assert_relative_eq;

    #[test]
    fn decomposes_known_strings() {
        let op = tensor_product(&pauli::z(), &tensor_product(&pauli::identity(), &pauli::x()))
            .scale(C64::new(2.0, 0.0))
            .add(&tensor_product(
                &pauli::y(),
                &tensor_product(&pauli::y(), &pauli::identity()),
            ))
            .unwrap();
        let d = pauli_decompose(&op).unwrap();
        assert_relative_eq!(d.coefficient("ZIX").unwrap().re, 2.0, epsilon = 1e-15);
        assert_relative_eq!(d.coefficient("YYI").unwrap().re, 1.0, epsilon = 1e-15);
        assert!(d.coefficient("III").unwrap().norm() < 1e-15);
        assert_relative_eq!(d.total_weight(), 5.0, epsilon = 1e-14);
        let w = d.site_weights();
        assert_relative_eq!(w[0], 5.0, epsilon = 1e-14);
        assert_relative_eq!(w[1], 1.0, epsilon = 1e-14);
        assert_relative_eq!(w[2], 4.0, epsilon = 1e-14);
        assert!(d.coefficient("ZI").is_none());
    }

    #[test]
    fn parseval_against_frobenius() {
        let m = build_spin_chain(&SpinChainSpec::chaotic(5)).unwrap();
        let w = m.local_operator(2, "Y").unwrap();
        let wt = heisenberg_evolve(&m, &w, 1.3).unwrap();
        let d = pauli_decompose(&wt).unwrap();
        assert_relative_eq!(d.total_weight(), wt.frobenius_norm().powi(2) / 32.0, epsilon = 1e-12);
    }

    #[test]
    fn local_operator_profile_at_zero() {
        let m = build_spin_chain(&SpinChainSpec::chaotic(4)).unwrap();
        let w = m.local_operator(0, "Z").unwrap();
        let p = support_profile(&m, &w, &TimeGrid::new(vec![0.0, 0.5]).unwrap()).unwrap();
        assert_eq!(p.rows()[0][1..], [0.0, 0.0, 0.0]);
        assert_relative_eq!(p.rows()[0][0], 1.0, epsilon = 1e-14);
        assert!(p.rows()[1][1] > 0.0);
    }

    #[test]
    fn identity_has_no_support() {
        let s = CompositeSpace::qubits(3).unwrap();
        let d = pauli_decompose(&Operator::identity(&s)).unwrap();
        assert_eq!(d.support_weights(), vec![0.0; 3]);
    }

    #[test]
    fn unsupported_models() {
        let rotor = build_kicked_rotor(&KickedRotorSpec {
            kick_strength: 1.0,
            effective_planck: 0.5,
            basis_size: 5,
        })
        .unwrap();
        let p = rotor.local_operator(0, "p").unwrap();
        assert!(matches!(
            support_profile(&rotor, &p, &TimeGrid::kicks(1)),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(bch_series(&rotor, &p, 1.0, 2), Err(Error::Unsupported(_))));
        let big = CompositeSpace::qubits(9).unwrap();
        let z = embed_local(&big, 0, &pauli::z()).unwrap();
        assert!(pauli_decompose(&z).is_err());
    }

    #[test]
    fn bch_low_orders() {
        let m = build_spin_chain(&SpinChainSpec::chaotic(3)).unwrap();
        let w = m.local_operator(0, "Z").unwrap();
        assert_eq!(bch_series(&m, &w, 0.7, 0).unwrap(), w);
        // a conserved operator never moves
        let h = m.hamiltonian().unwrap().clone();
        let s = bch_series(&m, &h, 0.7, 6).unwrap();
        assert!(s.sub(&h).unwrap().max_norm() < 1e-13);
        // first order reaches exactly the neighbouring site
        let x = m.local_operator(0, "X").unwrap();
        let first = bch_series(&m, &x, 0.1, 1).unwrap().sub(&x).unwrap();
        let weights = pauli_decompose(&first).unwrap().support_weights();
        assert!(weights[1] > 0.0);
        assert_eq!(weights[2], 0.0);
    }
}
