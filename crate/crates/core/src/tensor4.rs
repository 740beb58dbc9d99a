//! Linear algebra on ℝ⁴ and on antisymmetric 2-forms.
//!
//! A 2-form on ℝ⁴ is stored through its six upper-triangular entries
//! `(a12, a13, a14, a23, a24, a34)`, so antisymmetry holds by construction.
//! Every orthogonal antisymmetric 4×4 matrix is one of two templates,
//! the *first kind* (Pfaffian `+1`) or the *second kind* (Pfaffian `-1`):
//!
//! ```text
//!  first kind              second kind
//!  [ 0  a  b  c ]          [ 0  a  b  c ]
//!  [-a  0  c -b ]          [-a  0 -c  b ]
//!  [-b -c  0  a ]          [-b  c  0 -a ]
//!  [-c  b -a  0 ]          [-c -b  a  0 ]
//! ```
//!
//! The eigenvalues of an antisymmetric form are `±ai, ±bi` and are read off
//! in closed form from the Frobenius norm and the Pfaffian.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

pub type Mat4 = Matrix4<f64>;
pub type Vec4 = Vector4<f64>;

/// Index pairs `(i, j)`, `i < j`, in storage order of [`AntisymForm`].
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Tensor4Error {
    #[error("forms are linearly dependent")]
    LinearlyDependent,
    #[error("no sampled combination has distinct eigenvalues")]
    NoDistinctCombo,
    #[error("form has repeated eigenvalues; eigenplanes are not determined")]
    RepeatedEigenvalues,
    #[error("forms are not both of the first kind after normalization")]
    NotBothFirstKind,
    #[error("second form is a multiple of the first (a = ±1)")]
    DegenerateMultipleOfJ,
}

/// Antisymmetric 4×4 matrix, i.e. a 2-form in a flat chart.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AntisymForm(pub [f64; 6]);

impl AntisymForm {
    pub const ZERO: AntisymForm = AntisymForm([0.0; 6]);

    pub fn new(a12: f64, a13: f64, a14: f64, a23: f64, a24: f64, a34: f64) -> Self {
        AntisymForm([a12, a13, a14, a23, a24, a34])
    }

    /// The standard complex structure `e1∧e2 + e3∧e4`.
    pub fn j() -> Self {
        Self::first_kind(1.0, 0.0, 0.0)
    }

    pub fn first_kind(a: f64, b: f64, c: f64) -> Self {
        AntisymForm([a, b, c, c, -b, a])
    }

    pub fn second_kind(a: f64, b: f64, c: f64) -> Self {
        AntisymForm([a, b, c, -c, b, -a])
    }

    /// Antisymmetric part of an arbitrary matrix.
    pub fn from_matrix(m: &Mat4) -> Self {
        let mut c = [0.0; 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            c[k] = 0.5 * (m[(i, j)] - m[(j, i)]);
        }
        AntisymForm(c)
    }

    pub fn to_matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            m[(i, j)] = self.0[k];
            m[(j, i)] = -self.0[k];
        }
        m
    }

    /// The form `u∧v`, with matrix `u vᵀ - v uᵀ`.
    pub fn wedge(u: &Vec4, v: &Vec4) -> Self {
        let mut c = [0.0; 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            c[k] = u[i] * v[j] - u[j] * v[i];
        }
        AntisymForm(c)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (lo, hi, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let k = PAIRS.iter().position(|&p| p == (lo, hi)).unwrap();
        sign * self.0[k]
    }

    pub fn pfaffian(&self) -> f64 {
        let [a12, a13, a14, a23, a24, a34] = self.0;
        a12 * a34 - a13 * a24 + a14 * a23
    }

    /// Frobenius inner product of the full matrices.
    pub fn dot(&self, other: &Self) -> f64 {
        2.0 * self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `g ω gᵀ`: the form expressed in the frame rotated by `g`.
    pub fn conjugate(&self, g: &Mat4) -> Self {
        AntisymForm::from_matrix(&(g * self.to_matrix() * g.transpose()))
    }

    /// Self-dual part (first-kind span).
    pub fn first_kind_part(&self) -> Self {
        let [a12, a13, a14, a23, a24, a34] = self.0;
        let a = 0.5 * (a12 + a34);
        let b = 0.5 * (a13 - a24);
        let c = 0.5 * (a14 + a23);
        Self::first_kind(a, b, c)
    }

    /// Anti-self-dual part (second-kind span).
    pub fn second_kind_part(&self) -> Self {
        *self - self.first_kind_part()
    }

    pub fn bilinear(&self, x: &Vec4, y: &Vec4) -> f64 {
        (x.transpose() * self.to_matrix() * y)[(0, 0)]
    }
}

impl Add for AntisymForm {
    type Output = AntisymForm;
    fn add(self, o: Self) -> Self {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(o.0.iter()) {
            *x += y;
        }
        AntisymForm(c)
    }
}

impl Sub for AntisymForm {
    type Output = AntisymForm;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for AntisymForm {
    type Output = AntisymForm;
    fn neg(self) -> Self {
        AntisymForm(self.0.map(|x| -x))
    }
}

impl Mul<AntisymForm> for f64 {
    type Output = AntisymForm;
    fn mul(self, f: AntisymForm) -> AntisymForm {
        AntisymForm(f.0.map(|x| self * x))
    }
}

/// Eigenvalue magnitudes of an antisymmetric form: spectrum `±ai, ±bi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub a: f64,
    pub b: f64,
}

impl EigenPair {
    pub fn gap(&self) -> f64 {
        self.a - self.b
    }
}

/// `a² + b² = ½‖ω‖²` and `ab = |Pf ω|`, solved for `a ≥ b ≥ 0`.
pub fn eigen_pairs(w: &AntisymForm) -> EigenPair {
    let s: f64 = w.0.iter().map(|x| x * x).sum();
    let p = w.pfaffian().abs();
    let sum = (s + 2.0 * p).max(0.0).sqrt();
    let diff = (s - 2.0 * p).max(0.0).sqrt();
    EigenPair {
        a: 0.5 * (sum + diff),
        b: 0.5 * (sum - diff),
    }
}

pub fn is_orthogonal(m: &Mat4, tol: f64) -> bool {
    (m.transpose() * m - Mat4::identity()).amax() <= tol
}

pub fn is_antisymmetric(m: &Mat4, tol: f64) -> bool {
    (m.transpose() + m).amax() <= tol
}

/// `A Aᵀ = cI` within `tol` (scaled by `max(1, c)`); the zero matrix qualifies with `c = 0`.
pub fn is_scalar_multiple_of_orthogonal(m: &Mat4, tol: f64) -> bool {
    let g = m * m.transpose();
    let c = g.trace() / 4.0;
    (g - Mat4::identity() * c).amax() <= tol * c.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    FirstKind,
    SecondKind,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindClassification {
    pub kind: Kind,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Matches an orthogonal antisymmetric matrix against the two templates.
///
/// `(a, b, c)` is read from the top row; the remaining entries must agree
/// with exactly one template.
pub fn classify_kind(m: &Mat4, tol: f64) -> KindClassification {
    let (a, b, c) = (m[(0, 1)], m[(0, 2)], m[(0, 3)]);
    let mut out = KindClassification {
        kind: Kind::NotApplicable,
        a,
        b,
        c,
    };
    if !is_orthogonal(m, tol) || !is_antisymmetric(m, tol) {
        return out;
    }
    let first = AntisymForm::first_kind(a, b, c).to_matrix();
    let second = AntisymForm::second_kind(a, b, c).to_matrix();
    let fits_first = (m - first).amax() <= tol;
    let fits_second = (m - second).amax() <= tol;
    out.kind = match (fits_first, fits_second) {
        (true, false) => Kind::FirstKind,
        (false, true) => Kind::SecondKind,
        _ => Kind::NotApplicable,
    };
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinctCombo {
    pub lambda: f64,
    pub mu: f64,
    pub form: AntisymForm,
    pub eigen: EigenPair,
}

pub const COMBINE_SAMPLES: usize = 64;
const COMBINE_GRID: [f64; 6] = [1.0, -1.0, 0.5, -0.5, 2.0, -2.0];

/// Finds `λΩ1 + μΩ2` with `a - b` above `separation · ‖ω‖_F`.
///
/// Tries `λ = 1` against a fixed grid of `μ`, then seeded random pairs, for
/// [`COMBINE_SAMPLES`] attempts in total.
pub fn combine_distinct(
    o1: &AntisymForm,
    o2: &AntisymForm,
    separation: f64,
    seed: u64,
) -> Result<DistinctCombo, Tensor4Error> {
    let n1 = o1.dot(o1);
    let n2 = o2.dot(o2);
    let cross = o1.dot(o2);
    if n1 * n2 - cross * cross <= 1e-18 * (n1 * n2).max(f64::MIN_POSITIVE) {
        return Err(Tensor4Error::LinearlyDependent);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = COMBINE_GRID.iter().map(|&mu| (1.0, mu));
    let random = std::iter::repeat_with(|| {
        let l: f64 = rng.gen_range(-2.0..2.0);
        let m: f64 = rng.gen_range(-2.0..2.0);
        (l, m)
    });
    for (lambda, mu) in grid.chain(random).take(COMBINE_SAMPLES) {
        let form = lambda * *o1 + mu * *o2;
        let eigen = eigen_pairs(&form);
        if eigen.gap() > separation * form.frobenius_norm() {
            return Ok(DistinctCombo {
                lambda,
                mu,
                form,
                eigen,
            });
        }
    }
    Err(Tensor4Error::NoDistinctCombo)
}

/// A 2-plane in ℝ⁴ with an orthonormal, oriented basis `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedPlane {
    pub u: Vec4,
    pub v: Vec4,
}

impl OrientedPlane {
    pub fn new(u: Vec4, v: Vec4) -> Self {
        OrientedPlane { u, v }
    }

    pub fn projector(&self) -> Mat4 {
        self.u * self.u.transpose() + self.v * self.v.transpose()
    }

    /// Unit area form `u∧v`; encodes the plane together with its orientation.
    pub fn bivector(&self) -> AntisymForm {
        AntisymForm::wedge(&self.u, &self.v)
    }

    pub fn rotated(&self, r: &Mat4) -> Self {
        OrientedPlane {
            u: r * self.u,
            v: r * self.v,
        }
    }

    pub fn same_plane(&self, other: &Self, tol: f64) -> bool {
        (self.projector() - other.projector()).amax() <= tol
    }

    pub fn same_oriented(&self, other: &Self, tol: f64) -> bool {
        (self.bivector() - other.bivector()).max_abs() <= tol
    }

    /// Distance between orthogonal projectors (max-entry norm).
    pub fn projector_distance(&self, other: &Self) -> f64 {
        (self.projector() - other.projector()).amax()
    }
}

/// Splits ℝ⁴ into the eigenplanes of `ω` for `a` and for `b`.
///
/// The `a`-plane is oriented by `ω` itself; the `b`-plane is oriented so that
/// the pair is positively oriented in ℝ⁴.
pub fn eigen_planes(
    w: &AntisymForm,
    separation: f64,
) -> Result<(OrientedPlane, OrientedPlane), Tensor4Error> {
    let EigenPair { a, b } = eigen_pairs(w);
    if a - b <= separation * w.frobenius_norm() {
        return Err(Tensor4Error::RepeatedEigenvalues);
    }
    let om = w.to_matrix();
    // ω² = -(a² P_a + b² P_b)
    let p_a = -(om * om + Mat4::identity() * (b * b)) / (a * a - b * b);
    let p_b = Mat4::identity() - p_a;

    let u = unit(&largest_column(&p_a));
    let mut v = -(om * u);
    v -= u * u.dot(&v);
    let v = unit(&v);
    let first = OrientedPlane::new(u, v);

    let u2 = unit(&largest_column(&p_b));
    let mut best = Vec4::zeros();
    for k in 0..4 {
        let mut col = p_b.column(k).into_owned();
        col -= u2 * u2.dot(&col);
        if col.norm() > best.norm() {
            best = col;
        }
    }
    let mut v2 = unit(&best);
    let frame = Mat4::from_columns(&[u, v, u2, v2]);
    if frame.determinant() < 0.0 {
        v2 = -v2;
    }
    Ok((first, OrientedPlane::new(u2, v2)))
}

fn largest_column(m: &Mat4) -> Vec4 {
    let mut best = m.column(0).into_owned();
    for k in 1..4 {
        let col = m.column(k).into_owned();
        if col.norm() > best.norm() + 1e-12 {
            best = col;
        }
    }
    best
}

fn unit(v: &Vec4) -> Vec4 {
    v / v.norm()
}

/// Right-singular vectors of `a` with singular value at most `tol · max(1, σ_max)`.
pub fn nullspace(a: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return (0..n)
            .map(|k| DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 }))
            .collect();
    }
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max().max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol * smax)
        .map(|(k, _)| v_t.row(k).transpose())
        .collect()
}

/// Canonical orthonormal basis of a subspace: reduced row echelon form,
/// then Gram-Schmidt in order, each vector signed so that its largest entry
/// is positive. Deterministic for a given subspace.
pub fn canonical_basis(vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors[0].len();
    let mut rows: Vec<DVector<f64>> = vectors.to_vec();
    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row == rows.len() {
            break;
        }
        let (best, val) = (pivot_row..rows.len())
            .map(|r| (r, rows[r][col].abs()))
            .fold((pivot_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        rows.swap(pivot_row, best);
        let p = rows[pivot_row][col];
        rows[pivot_row] /= p;
        let prow = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row {
                let f = row[col];
                *row -= &prow * f;
            }
        }
        pivot_row += 1;
    }
    rows.truncate(pivot_row);

    let mut out: Vec<DVector<f64>> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut w = row;
        for q in &out {
            let d = q.dot(&w);
            w -= q * d;
        }
        let norm = w.norm();
        if norm <= tol {
            continue;
        }
        w /= norm;
        let imax = w.iamax();
        if w[imax] < 0.0 {
            w = -w;
        }
        out.push(w);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commutant {
    pub basis: Vec<Mat4>,
    pub dim: usize,
}

/// Real vector space `{X : XM = MX for all M}` inside the 16-dimensional matrix space.
pub fn commutant(ms: &[Mat4], tol: f64) -> Commutant {
    let mut a = DMatrix::zeros(16 * ms.len(), 16);
    for (b, m) in ms.iter().enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                let row = 16 * b + 4 * i + j;
                for k in 0..4 {
                    // (XM)_ij = Σ_k x_ik m_kj ;  (MX)_ij = Σ_k m_ik x_kj
                    a[(row, 4 * i + k)] += m[(k, j)];
                    a[(row, 4 * k + j)] -= m[(i, k)];
                }
            }
        }
    }
    let basis: Vec<Mat4> = canonical_basis(&nullspace(&a, tol), tol)
        .into_iter()
        .map(|v| Mat4::from_fn(|i, j| v[4 * i + j]))
        .collect();
    Commutant {
        dim: basis.len(),
        basis,
    }
}

/// Orthogonal `g` with `g Ω gᵀ = J`, for an orthogonal antisymmetric `Ω`.
///
/// Rows of `g` are `f1, -Ωf1, f3, -Ωf3`; `det g` is the Pfaffian sign of `Ω`.
pub fn normalizing_frame(w: &AntisymForm) -> Mat4 {
    let om = w.to_matrix();
    let f1 = Vec4::x();
    let f2 = -(om * f1);
    let mut f3 = Vec4::zeros();
    for k in 1..4 {
        let mut e = Vec4::zeros();
        e[k] = 1.0;
        e -= f1 * f1.dot(&e) + f2 * f2.dot(&e);
        if e.norm() > f3.norm() {
            f3 = e;
        }
    }
    let f3 = unit(&f3);
    let f4 = -(om * f3);
    Mat4::from_rows(&[
        f1.transpose(),
        f2.transpose(),
        f3.transpose(),
        f4.transpose(),
    ])
}

/// Rescales a form that is a multiple of an orthogonal matrix to be orthogonal.
pub fn normalize_orthogonal(w: &AntisymForm, tol: f64) -> Option<AntisymForm> {
    let m = w.to_matrix();
    if !is_scalar_multiple_of_orthogonal(&m, tol) {
        return None;
    }
    let c = (m * m.transpose()).trace() / 4.0;
    if c <= tol {
        return None;
    }
    Some((1.0 / c.sqrt()) * *w)
}

/// Completes two same-kind forms to the three-dimensional space of that kind.
///
/// Works in the frame where `Ω1 = J`: there `Ω2 = FirstKind(a, b, c)` with
/// `a ≠ ±1`, and the witness is `FirstKind(0, -c, b)` normalized, mapped back.
pub fn third_form_witness(
    o1: &AntisymForm,
    o2: &AntisymForm,
    tol: f64,
) -> Result<AntisymForm, Tensor4Error> {
    let n1 = normalize_orthogonal(o1, tol).ok_or(Tensor4Error::NotBothFirstKind)?;
    let n2 = normalize_orthogonal(o2, tol).ok_or(Tensor4Error::NotBothFirstKind)?;
    let g = normalizing_frame(&n1);
    let o2n = n2.conjugate(&g);
    let k = classify_kind(&o2n.to_matrix(), tol.max(1e-9));
    if k.kind != Kind::FirstKind {
        return Err(Tensor4Error::NotBothFirstKind);
    }
    let bc = (k.b * k.b + k.c * k.c).sqrt();
    if bc <= tol.max(1e-9) {
        return Err(Tensor4Error::DegenerateMultipleOfJ);
    }
    let w3 = AntisymForm::first_kind(0.0, -k.c / bc, k.b / bc);
    Ok(w3.conjugate(&g.transpose()))
}

/// Complex number `x + iy` as the real block `[[x, -y], [y, x]]`.
pub fn complex_block(z: Complex64) -> nalgebra::Matrix2<f64> {
    nalgebra::Matrix2::new(z.re, -z.im, z.im, z.re)
}

/// `[[z1, z2], [-z̄2, z̄1]]` in 2×2 complex-block form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SU2Form {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl SU2Form {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        SU2Form { z1, z2 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn to_matrix(&self) -> Mat4 {
        complex_block_matrix([self.z1, self.z2, -self.z2.conj(), self.z1.conj()])
    }
}

/// 4×4 real matrix from a 2×2 complex matrix `[[z0, z1], [z2, z3]]`.
pub fn complex_block_matrix(z: [Complex64; 4]) -> Mat4 {
    let mut m = Mat4::zeros();
    for (k, zk) in z.iter().enumerate() {
        let (bi, bj) = (2 * (k / 2), 2 * (k % 2));
        m.fixed_view_mut::<2, 2>(bi, bj).copy_from(&complex_block(*zk));
    }
    m
}

/// Rotation in the plane of `u, v` (orthonormal) by `angle`, identity on the complement.
pub fn plane_rotation(u: &Vec4, v: &Vec4, angle: f64) -> Mat4 {
    let (s, c) = angle.sin_cos();
    let pu = u * u.transpose();
    let pv = v * v.transpose();
    Mat4::identity() + (pu + pv) * (c - 1.0) + (v * u.transpose() - u * v.transpose()) * s
}

/// Rotation angle in `[0, π]` of a rotation that fixes a 2-plane pointwise.
///
/// Uses `atan2` of the skew and symmetric parts, which stays accurate near π.
pub fn single_plane_angle(r: &Mat4) -> f64 {
    let sin = (r - r.transpose()).norm() / (2.0 * std::f64::consts::SQRT_2);
    let cos = (r.trace() - 2.0) / 2.0;
    sin.atan2(cos)
}

/// Random element of SO(4): Gram-Schmidt on Gaussian columns, sign-fixed.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Mat4 {
    loop {
        let m = Mat4::from_fn(|_, _| gaussian(rng));
        let qr = m.qr();
        let mut q = qr.q();
        let r = qr.r();
        for k in 0..4 {
            if r[(k, k)] < 0.0 {
                let col = -q.column(k);
                q.set_column(k, &col);
            }
        }
        if q.determinant() < 0.0 {
            let col = -q.column(0);
            q.set_column(0, &col);
        }
        if is_orthogonal(&q, 1e-12) {
            return q;
        }
    }
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
