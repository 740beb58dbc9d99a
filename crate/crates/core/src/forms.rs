//! Holonomy-invariant 2-forms and the pair of orthogonal parallel plane
//! fields they determine.

use crate::holonomy::{develop_tree, max_commutator, transition, HolonomyRep, Placement};
use crate::plcomplex::MetricComplex4;
use crate::tensor4::{
    canonical_basis, combine_distinct, eigen_planes, nullspace, third_form_witness, AntisymForm,
    EigenPair, Mat4, OrientedPlane, Tensor4Error, PAIRS,
};
use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

/// Relative eigenvalue separation required of the combined form.
pub const EIGEN_SEPARATION: f64 = 1e-6;

/// Euler characteristic of S²×S²; used as a cheap simple-connectivity proxy.
pub const S2XS2_EULER_CHARACTERISTIC: i64 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("expected a 2-dimensional space of invariant forms, found dimension {0}")]
    WrongDimension(usize),
    #[error(
        "both invariant forms are of the same kind; a third invariant form exists \
         (largest commutator {max_commutator:.3e})"
    )]
    ContradictionWitness {
        omega3: AntisymForm,
        generators: Vec<Mat4>,
        max_commutator: f64,
    },
    #[error("no distinct combination and no third-form witness: {0}")]
    Degenerate(Tensor4Error),
    #[error("transported planes disagree across a gluing by {0:.3e}")]
    InconsistentTransport(f64),
    #[error("a generator moves the base planes by {0:.3e}")]
    NotInvariant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantFormBasis {
    pub basis: Vec<AntisymForm>,
    pub dim: usize,
}

/// Forms `ω` with `gωgᵀ = ω` for every generator, orthonormal for the
/// Frobenius inner product.
pub fn invariant_forms(rep: &HolonomyRep, tol: f64) -> InvariantFormBasis {
    invariant_forms_of(&rep.rotations(), tol)
}

pub fn invariant_forms_of(gens: &[Mat4], tol: f64) -> InvariantFormBasis {
    let mut a = DMatrix::zeros(6 * gens.len(), 6);
    for (gi, g) in gens.iter().enumerate() {
        for j in 0..6 {
            let mut e = AntisymForm::ZERO;
            e.0[j] = 1.0;
            let img = e.conjugate(g);
            for i in 0..6 {
                a[(6 * gi + i, j)] = img.0[i] - e.0[i];
            }
        }
    }
    let basis: Vec<AntisymForm> = canonical_basis(&nullspace(&a, tol.max(1e-12)), 1e-9)
        .into_iter()
        .map(|v| {
            // coordinate norm 1 ⇒ Frobenius norm √2
            let mut w = [0.0; 6];
            for (k, x) in w.iter_mut().enumerate() {
                *x = v[k] / std::f64::consts::SQRT_2;
            }
            AntisymForm(w)
        })
        .collect();
    InvariantFormBasis {
        dim: basis.len(),
        basis,
    }
}

pub fn betti_check(basis: &InvariantFormBasis, expected: usize) -> bool {
    basis.dim == expected
}

/// Stratum loops generate all of the holonomy only when the flat part is
/// simply connected relative to them; this flags inputs for which that is
/// doubtful.
pub fn simply_connected_heuristic(m: &MetricComplex4) -> bool {
    m.euler_characteristic() == S2XS2_EULER_CHARACTERISTIC
}

/// Largest deviation `‖gωgᵀ − ω‖` of a form over the generators.
pub fn invariance_error(gens: &[Mat4], w: &AntisymForm) -> f64 {
    gens.iter()
        .map(|g| (w.conjugate(g) - *w).max_abs())
        .fold(0.0, f64::max)
}

/// Two orthogonal oriented plane fields, one plane per simplex chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionPair {
    pub alpha: Vec<OrientedPlane>,
    pub beta: Vec<OrientedPlane>,
    pub base_alpha: OrientedPlane,
    pub base_beta: OrientedPlane,
    pub lambda: f64,
    pub mu: f64,
    pub form: AntisymForm,
    pub eigen: EigenPair,
    /// Tree placements used for transport (chart of `s` → base chart).
    #[serde(skip)]
    pub placements: Vec<Placement>,
    pub max_transport_error: f64,
    pub max_generator_error: f64,
}

impl DistributionPair {
    pub fn plane(&self, which: Which, s: usize) -> &OrientedPlane {
        match which {
            Which::Alpha => &self.alpha[s],
            Which::Beta => &self.beta[s],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Which {
    Alpha,
    Beta,
}

impl Which {
    pub fn other(self) -> Self {
        match self {
            Which::Alpha => Which::Beta,
            Which::Beta => Which::Alpha,
        }
    }
}

/// Diagnoses the case where no combination of the two basis forms has
/// distinct eigenvalues: both are then of the same kind and a third
/// invariant form of that kind exists.
pub fn contradiction_witness(
    o1: &AntisymForm,
    o2: &AntisymForm,
    gens: &[Mat4],
    tol: f64,
) -> FormsError {
    // the same-kind parts of the two forms; a second-kind pair is mirrored
    let pair = if o1.first_kind_part().frobenius_norm() >= o1.second_kind_part().frobenius_norm() {
        (*o1, *o2)
    } else {
        let flip = Mat4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
        (o1.conjugate(&flip), o2.conjugate(&flip))
    };
    let mirrored = pair.0 != *o1;
    match third_form_witness(&pair.0, &pair.1, tol) {
        Ok(w3) => {
            let omega3 = if mirrored {
                let flip = Mat4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
                w3.conjugate(&flip)
            } else {
                w3
            };
            FormsError::ContradictionWitness {
                max_commutator: max_commutator(gens, &omega3),
                omega3,
                generators: gens.to_vec(),
            }
        }
        Err(e) => FormsError::Degenerate(e),
    }
}

/// Splits the base chart by a combination of the two invariant forms with
/// distinct eigenvalues and transports the planes along the spanning tree.
pub fn extract_distributions(
    basis: &InvariantFormBasis,
    rep: &HolonomyRep,
    m: &MetricComplex4,
    seed: u64,
    tol: f64,
) -> Result<DistributionPair, FormsError> {
    if basis.dim != 2 {
        return Err(FormsError::WrongDimension(basis.dim));
    }
    let gens = rep.rotations();
    let (o1, o2) = (basis.basis[0], basis.basis[1]);
    let combo = match combine_distinct(&o1, &o2, EIGEN_SEPARATION, seed) {
        Ok(c) => c,
        Err(Tensor4Error::NoDistinctCombo) => {
            return Err(contradiction_witness(&o1, &o2, &gens, tol))
        }
        Err(e) => return Err(FormsError::Degenerate(e)),
    };
    let (base_alpha, base_beta) =
        eigen_planes(&combo.form, EIGEN_SEPARATION).map_err(FormsError::Degenerate)?;

    let mut max_generator_error: f64 = 0.0;
    for g in &gens {
        for p in [&base_alpha, &base_beta] {
            max_generator_error =
                max_generator_error.max((p.rotated(g).bivector() - p.bivector()).max_abs());
        }
    }
    if max_generator_error > tol {
        return Err(FormsError::NotInvariant(max_generator_error));
    }

    let dual = m.dual_graph();
    let placements = develop_tree(m, &dual);
    let to_chart = |p: &OrientedPlane, s: usize| p.rotated(&placements[s].rotation.transpose());
    let alpha: Vec<OrientedPlane> = (0..m.n_simplices()).map(|s| to_chart(&base_alpha, s)).collect();
    let beta: Vec<OrientedPlane> = (0..m.n_simplices()).map(|s| to_chart(&base_beta, s)).collect();

    let mut max_transport_error: f64 = 0.0;
    for s in 0..m.n_simplices() {
        for g in m.neighbors(s).iter().flatten() {
            let t = g.simplex;
            if t < s {
                continue;
            }
            let step = transition(m, s, t).expect("neighbours are glued");
            for field in [&alpha, &beta] {
                let moved = field[t].rotated(&step.rotation);
                max_transport_error =
                    max_transport_error.max((moved.bivector() - field[s].bivector()).max_abs());
            }
        }
    }
    if max_transport_error > tol {
        return Err(FormsError::InconsistentTransport(max_transport_error));
    }
    Ok(DistributionPair {
        alpha,
        beta,
        base_alpha,
        base_beta,
        lambda: combo.lambda,
        mu: combo.mu,
        form: combo.form,
        eigen: combo.eigen,
        placements,
        max_transport_error,
        max_generator_error,
    })
}

/// Convenience: the coordinate of `w` on pair `(i, j)`.
pub fn form_entry(w: &AntisymForm, i: usize, j: usize) -> f64 {
    let k = PAIRS.iter().position(|&p| p == (i, j)).expect("i < j");
    w.0[k]
}
