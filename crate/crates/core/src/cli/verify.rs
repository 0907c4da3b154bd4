//! Cross-checks the analytical eigenbasis of a tree against the dense oracle.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::extended_states;
use crate::error::{Error, Result};
use crate::lattice::{assemble_hamiltonian, build_index_with_cap, TreeSpec};
use crate::localized::{all_localized, counting_identity_holds, localized_count};
use crate::spectral::{
    check_im_nonneg, check_spectrum_symmetry, eig_dense_with, eigenvalues, match_spectra, residual, EigOptions,
    DEFAULT_DENSE_CAP, DEFAULT_RESIDUAL_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Bound on `‖Hv − Ev‖ / max(1, ‖H‖_max)` for every analytical vector.
    pub residual_tol: f64,
    /// Bound on matched eigenvalue distances and on the symmetry mismatch.
    pub match_tol: f64,
    /// Lower bound on `Im E` for localized states.
    pub im_tol: f64,
    pub dense_cap: usize,
    pub size_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            residual_tol: DEFAULT_RESIDUAL_TOL,
            match_tol: 1e-8,
            im_tol: 1e-12,
            dense_cap: DEFAULT_DENSE_CAP,
            size_cap: crate::lattice::DEFAULT_SIZE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub branching: Vec<usize>,
    pub gamma0: f64,
    pub gamma_n: f64,
    pub n_tot: usize,
    pub localized: usize,
    pub extended: usize,
    pub checks: Vec<Check>,
    /// Analytical eigenvalues in oracle order, tagged by source, with the
    /// matched distance.
    #[serde(skip)]
    pub matched: Vec<(Complex64, &'static str, f64)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

fn check(name: &'static str, value: f64, bound: f64, detail: String) -> Check {
    Check {
        name,
        passed: value <= bound,
        value,
        bound,
        detail,
    }
}

pub fn verify_tree(spec: &TreeSpec, opts: &VerifyOptions) -> Result<VerifyReport> {
    let index = build_index_with_cap(spec, opts.size_cap)?;
    let n_tot = index.n_tot();
    if n_tot > opts.dense_cap {
        return Err(Error::DenseCap {
            dim: n_tot,
            cap: opts.dense_cap,
        });
    }
    let h = assemble_hamiltonian(spec, &index)?;
    let scale = h.max_abs().max(1.0);
    let localized = all_localized(spec, &index)?;
    let extended = extended_states(spec, &index)?;
    let mut checks = Vec::new();

    let expected = localized_count(spec);
    let counted = localized.len() as u128;
    let ok = counting_identity_holds(spec) && counted == expected && localized.len() + extended.len() == n_tot;
    checks.push(Check {
        name: "counting",
        passed: ok,
        value: (localized.len() + extended.len()) as f64,
        bound: n_tot as f64,
        detail: format!(
            "{counted} localized (formula {expected}) + {} extended vs n_tot {n_tot}",
            extended.len()
        ),
    });

    let loc_res = localized
        .iter()
        .map(|s| residual(&h, s.value(), &s.full_vector) / scale)
        .fold(0.0, f64::max);
    checks.push(check(
        "localized_residuals",
        loc_res,
        opts.residual_tol,
        "max relative residual".into(),
    ));
    let ext_res = extended
        .iter()
        .map(|s| residual(&h, s.chain_pair.value, &s.full_vector) / scale)
        .fold(0.0, f64::max);
    checks.push(check(
        "extended_residuals",
        ext_res,
        opts.residual_tol,
        "max relative residual".into(),
    ));

    let mut analytical: Vec<(Complex64, &'static str)> = localized.iter().map(|s| (s.value(), "localized")).collect();
    analytical.extend(extended.iter().map(|s| (s.chain_pair.value, "extended")));
    let eig_opts = EigOptions {
        dense_cap: opts.dense_cap,
        ..EigOptions::default()
    };
    let oracle = eigenvalues(&eig_dense_with(&h, &eig_opts)?);
    let values: Vec<Complex64> = analytical.iter().map(|a| a.0).collect();
    let m = match_spectra(&oracle, &values)?;
    checks.push(check(
        "oracle_match",
        m.max_distance,
        opts.match_tol,
        format!("{} eigenvalues, total distance {:e}", oracle.len(), m.total_distance),
    ));
    let matched = oracle
        .iter()
        .zip(&m.assignment)
        .map(|(o, &j)| (analytical[j].0, analytical[j].1, (o - analytical[j].0).norm()))
        .collect();

    let sym = check_spectrum_symmetry(&oracle, opts.match_tol);
    checks.push(Check {
        name: "spectrum_symmetry",
        passed: sym.passed(),
        value: sym.max_mismatch,
        bound: opts.match_tol,
        detail: format!("{} unmatched under E -> -E*", sym.unmatched.len()),
    });

    let loc_values: Vec<Complex64> = localized.iter().map(|s| s.value()).collect();
    let im = check_im_nonneg(&loc_values, opts.im_tol);
    checks.push(Check {
        name: "localized_im_nonneg",
        passed: im.passed(),
        value: -im.min_im,
        bound: opts.im_tol,
        detail: format!("{} violations, min Im E {:e}", im.violations.len(), im.min_im),
    });

    Ok(VerifyReport {
        branching: spec.branching().to_vec(),
        gamma0: spec.gamma0(),
        gamma_n: spec.gamma_n(),
        n_tot,
        localized: localized.len(),
        extended: extended.len(),
        checks,
        matched,
    })
}
