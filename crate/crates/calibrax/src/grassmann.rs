//! Oriented 4-planes in R^8: predicates, classification into the dichotomy
//! case analysis, and constrained samplers for each configuration.
//!
//! Sampler measures are not uniform on their constraint sets; determinism per
//! seed and constraint satisfaction are the contract. All claims checked
//! downstream are universally quantified, so any full-support sampling is
//! enough for falsification-style testing.

use rand_chacha::ChaCha8Rng;

use crate::exterior::{calibration_eval, restrict};
use crate::frame::{frame_columns, HyperkahlerFrame, TwoForm, Triple};
use crate::rng;
use crate::{sup_norm, Error, FrameMat, Mat4, Mat8, Result, Vec8, TOL_FRAME};

/// Tolerance bundle for the plane predicates, on unit-normalized frames.
/// Defaults separate genuine zeros from Pfaffian near-degeneracy in double
/// precision: τ_lag = τ_cx = 1e−9, τ_symp = 1e−6, τ_cal = 1e−8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub lag: f64,
    pub cx: f64,
    pub symp: f64,
    pub cal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lag: 1e-9,
            cx: 1e-9,
            symp: 1e-6,
            cal: 1e-8,
        }
    }
}

/// Oriented 4-plane as an ordered orthonormal frame; orientation is the
/// frame order. Frames are re-orthonormalized once on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace4 {
    frame: FrameMat,
}

impl Subspace4 {
    /// Wrap a frame that is already orthonormal within τ_frame; polishes it
    /// to working precision without changing span or orientation.
    pub fn from_frame(frame: &FrameMat) -> Result<Self> {
        let residual = sup_norm(&(frame.transpose() * frame - Mat4::identity()));
        if residual > TOL_FRAME {
            return Err(Error::FrameNotOrthonormal {
                residual,
                tol: TOL_FRAME,
            });
        }
        Ok(Subspace4 {
            frame: positive_qr(frame),
        })
    }

    pub fn basis(&self) -> &FrameMat {
        &self.frame
    }

    pub fn columns(&self) -> [Vec8; 4] {
        frame_columns(&self.frame)
    }

    /// Orthogonal projector onto the plane.
    pub fn projector(&self) -> Mat8 {
        self.frame * self.frame.transpose()
    }

    /// Re-frame by an orthogonal change of basis of the same plane.
    pub fn reframed(&self, rot: &Mat4) -> Subspace4 {
        Subspace4 {
            frame: self.frame * rot,
        }
    }

    /// Swap two frame vectors, reversing the orientation.
    pub fn with_swapped(&self, a: usize, b: usize) -> Subspace4 {
        let mut f = self.frame;
        f.swap_columns(a, b);
        Subspace4 { frame: f }
    }

    /// Principal angles against another plane, ascending.
    pub fn principal_angles(&self, other: &Subspace4) -> [f64; 4] {
        let overlap = self.frame.transpose() * other.frame;
        let sv = overlap.svd(false, false).singular_values;
        let mut angles = [0.0f64; 4];
        for (i, s) in sv.iter().enumerate() {
            angles[i] = s.clamp(-1.0, 1.0).acos();
        }
        angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
        angles
    }

    /// Row-major 8×4 flattening, the counterexample wire format.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(32);
        for r in 0..8 {
            for c in 0..4 {
                out.push(self.frame[(r, c)]);
            }
        }
        out
    }

    pub fn from_row_major(data: &[f64]) -> Result<Self> {
        if data.len() != 32 {
            return Err(Error::Config(format!(
                "counterexample frame needs 32 entries, got {}",
                data.len()
            )));
        }
        let mut frame = FrameMat::zeros();
        for r in 0..8 {
            for c in 0..4 {
                frame[(r, c)] = data[r * 4 + c];
            }
        }
        Subspace4::from_frame(&frame)
    }
}

/// Thin QR with the R diagonal forced positive, so the Q factor spans the
/// same space with the same orientation as the input columns. Frames that
/// are already orthonormal at working precision pass through bit-identical,
/// which keeps construction idempotent and round-trips stable.
pub(crate) fn positive_qr(m: &FrameMat) -> FrameMat {
    let residual = sup_norm(&(m.transpose() * m - Mat4::identity()));
    if residual <= 1e-14 {
        return *m;
    }
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..4 {
        if r[(c, c)] < 0.0 {
            let col = -q.column(c);
            q.set_column(c, &col);
        }
    }
    q
}

/// Orthonormalize raw columns into a plane, preserving span and orientation.
pub fn orthonormalize(raw: &FrameMat) -> Result<Subspace4> {
    let sv = raw.svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > 1e8 {
        let rank = sv.iter().filter(|s| **s > smax * 1e-10).count();
        return Err(Error::RankDeficient { rank, cond });
    }
    Ok(Subspace4 {
        frame: positive_qr(raw),
    })
}

/// Invariant-measure draw on the Grassmannian: orthonormalized standard
/// Gaussian 8×4, deterministic per seed.
pub fn random_subspace(seed: u64) -> Subspace4 {
    random_subspace_from(&mut rng::stream(seed))
}

pub fn random_subspace_from(r: &mut ChaCha8Rng) -> Subspace4 {
    loop {
        if let Ok(v) = orthonormalize(&rng::normal_frame(r)) {
            return v;
        }
    }
}

/// Random orientation-preserving change of basis in a 4-plane.
pub fn random_so4_from(r: &mut ChaCha8Rng) -> Mat4 {
    use rand::Rng;
    loop {
        let raw = Mat4::from_fn(|_, _| {
            let x: f64 = r.sample(rand_distr::StandardNormal);
            x
        });
        let qr = raw.qr();
        let rr = qr.r();
        let mut q = qr.q();
        for c in 0..4 {
            if rr[(c, c)] < 0.0 {
                let col = -q.column(c);
                q.set_column(c, &col);
            }
        }
        if q.determinant() < 0.0 {
            let col = -q.column(3);
            q.set_column(3, &col);
        }
        if (q.determinant() - 1.0).abs() < 1e-8 {
            return q;
        }
        let _ = r.random::<u64>();
    }
}

/// ‖j*ω‖∞ ≤ τ: the form restricts to zero on the plane.
pub fn is_lagrangian(v: &Subspace4, form: &TwoForm, tol: f64) -> bool {
    restrict(form, v).sup_norm() <= tol
}

/// |Pf(j*ω)| ≥ τ: the restriction is nondegenerate.
pub fn is_symplectic_restriction(v: &Subspace4, form: &TwoForm, tol: f64) -> bool {
    restrict(form, v).pfaffian().abs() >= tol
}

/// Defect of A_u-invariance: sup-norm of (Id − P_V) A_u P_V on the frame.
pub fn complex_residual(v: &Subspace4, h: &HyperkahlerFrame, u: &crate::frame::Axis) -> f64 {
    let moved = h.operator(u) * v.basis();
    let residual = moved - v.basis() * (v.basis().transpose() * moved);
    sup_norm(&residual)
}

pub fn is_complex(v: &Subspace4, h: &HyperkahlerFrame, u: &crate::frame::Axis, tol: f64) -> bool {
    complex_residual(v, h, u) <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisLabel {
    Lagrangian,
    Symplectic,
    Neither,
}

/// Which proof configuration the plane falls into, ordered by precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Symplectic for ω_b.
    FirstCase,
    /// Neither symplectic nor Lagrangian for both ω_b and ω_c.
    SecondCase,
    /// ω_b restricts to zero.
    LagrangianB,
    /// ω_c restricts to zero.
    LagrangianC,
    Other,
}

/// Which non-axis Kähler form vanishes on a calibrated plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DichotomyLabel {
    LagrangianB,
    LagrangianC,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisReport {
    pub sup_norm: f64,
    pub pfaffian: f64,
    pub label: AxisLabel,
    pub complex: bool,
}

/// Full pointwise report for one plane under one calibration triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationReport {
    pub axis: AxisReport,
    pub b: AxisReport,
    pub c: AxisReport,
    pub re: f64,
    pub im: f64,
    pub phase: f64,
    pub special_lagrangian: bool,
    pub anti_calibrated: bool,
    pub case: CaseTag,
}

impl CalibrationReport {
    /// Exactly-one label on calibrated planes; None if zero or both hold.
    pub fn dichotomy_label(&self, tol: f64) -> Option<DichotomyLabel> {
        match (self.b.sup_norm <= tol, self.c.sup_norm <= tol) {
            (true, false) => Some(DichotomyLabel::LagrangianB),
            (false, true) => Some(DichotomyLabel::LagrangianC),
            _ => None,
        }
    }
}

/// Precomputed forms and operators for classifying many planes under one
/// frame and triple.
pub struct PlaneClassifier<'h> {
    pub h: &'h HyperkahlerFrame,
    pub triple: Triple,
    pub tols: Tolerances,
    omega: crate::frame::HolVolumeForm,
    form_a: TwoForm,
    form_b: TwoForm,
    form_c: TwoForm,
}

impl<'h> PlaneClassifier<'h> {
    pub fn new(h: &'h HyperkahlerFrame, triple: Triple, tols: Tolerances) -> Self {
        PlaneClassifier {
            h,
            triple,
            tols,
            omega: h.hol_volume(&triple),
            form_a: h.kahler_form(triple.axis()),
            form_b: h.kahler_form(triple.b()),
            form_c: h.kahler_form(triple.c()),
        }
    }

    pub fn omega(&self) -> &crate::frame::HolVolumeForm {
        &self.omega
    }
    pub fn form_a(&self) -> &TwoForm {
        &self.form_a
    }
    pub fn form_b(&self) -> &TwoForm {
        &self.form_b
    }
    pub fn form_c(&self) -> &TwoForm {
        &self.form_c
    }

    pub fn classify(&self, v: &Subspace4) -> CalibrationReport {
        let t = &self.tols;
        let axis_report = |form: &TwoForm, u: &crate::frame::Axis| {
            let r = restrict(form, v);
            let sup = r.sup_norm();
            let pf = r.pfaffian();
            let label = if sup <= t.lag {
                AxisLabel::Lagrangian
            } else if pf.abs() >= t.symp {
                AxisLabel::Symplectic
            } else {
                AxisLabel::Neither
            };
            AxisReport {
                sup_norm: sup,
                pfaffian: pf,
                label,
                complex: is_complex(v, self.h, u, t.cx),
            }
        };
        let a = axis_report(&self.form_a, self.triple.axis());
        let b = axis_report(&self.form_b, self.triple.b());
        let c = axis_report(&self.form_c, self.triple.c());
        let (re, im) = calibration_eval(&self.omega, v);
        let special = a.label == AxisLabel::Lagrangian && im.abs() <= t.lag && re >= 1.0 - t.cal;
        let anti = a.label == AxisLabel::Lagrangian && im.abs() <= t.lag && re <= -(1.0 - t.cal);
        let case = if b.label == AxisLabel::Symplectic {
            CaseTag::FirstCase
        } else if b.label == AxisLabel::Neither && c.label == AxisLabel::Neither {
            CaseTag::SecondCase
        } else if b.label == AxisLabel::Lagrangian {
            CaseTag::LagrangianB
        } else if c.label == AxisLabel::Lagrangian {
            CaseTag::LagrangianC
        } else {
            CaseTag::Other
        };
        CalibrationReport {
            axis: a,
            b,
            c,
            re,
            im,
            phase: im.atan2(re),
            special_lagrangian: special,
            anti_calibrated: anti,
            case,
        }
    }
}

/// One-off classification; sweeps should hold a `PlaneClassifier` instead.
pub fn classify(
    v: &Subspace4,
    h: &HyperkahlerFrame,
    triple: &Triple,
    tols: Tolerances,
) -> CalibrationReport {
    PlaneClassifier::new(h, *triple, tols).classify(v)
}

const MAX_REDRAWS: u32 = 100;

/// Draw a vector, project it orthogonally to `constraints`, and normalize;
/// redraws on collapse.
pub(crate) fn projected_unit(
    r: &mut ChaCha8Rng,
    constraints: &[Vec8],
) -> Result<Vec8> {
    for _ in 0..MAX_REDRAWS {
        let mut x = rng::normal_vec8(r);
        // Constraints are orthonormal by construction, so one pass subtracts
        // the full projection; a second pass scrubs rounding.
        for _ in 0..2 {
            for q in constraints {
                x -= q * q.dot(&x);
            }
        }
        let n = x.norm();
        if n >= 1e-6 {
            return Ok(x / n);
        }
    }
    Err(Error::SamplerCollapse {
        redraws: MAX_REDRAWS,
    })
}

/// Sample an ω_u-Lagrangian plane: each new vector is drawn in the metric
/// complement of the span so far intersected with its ω_u-annihilator.
pub fn sample_lagrangian(
    h: &HyperkahlerFrame,
    u: &crate::frame::Axis,
    seed: u64,
) -> Result<Subspace4> {
    sample_lagrangian_from(h, u, &mut rng::stream(seed))
}

pub fn sample_lagrangian_from(
    h: &HyperkahlerFrame,
    u: &crate::frame::Axis,
    r: &mut ChaCha8Rng,
) -> Result<Subspace4> {
    let op = h.operator(u);
    let mut constraints: Vec<Vec8> = Vec::with_capacity(8);
    let mut cols: Vec<Vec8> = Vec::with_capacity(4);
    let v1 = rng::unit_vec8(r);
    cols.push(v1);
    constraints.push(v1);
    constraints.push(op * v1);
    for _ in 1..4 {
        let v = projected_unit(r, &constraints)?;
        cols.push(v);
        constraints.push(v);
        constraints.push(op * v);
    }
    let mut frame = FrameMat::zeros();
    for (c, v) in cols.iter().enumerate() {
        frame.set_column(c, v);
    }
    Subspace4::from_frame(&frame)
}

/// Sample a special Lagrangian plane for the triple (a; b, c) as an
/// A_b-complex plane Lagrangian for Ω_b = ω_c + iω_a: the oriented frame is
/// (v1, A_b v1, v2, A_b v2) with v2 drawn orthogonal to the quaternionic
/// line of v1, which is exactly the ω_a- and ω_c-annihilator condition.
pub fn sample_special_lagrangian(
    h: &HyperkahlerFrame,
    triple: &Triple,
    seed: u64,
) -> Result<Subspace4> {
    sample_special_lagrangian_labeled(h, triple, DichotomyLabel::LagrangianC, seed)
}

/// Same construction with a choice of which non-axis form vanishes. The
/// LAGRANGIAN_B side builds an A_c-complex plane and swaps two frame vectors,
/// fixing the orientation so the plane is calibrated rather than
/// anti-calibrated (it is c-anti-complex as an oriented plane).
pub fn sample_special_lagrangian_labeled(
    h: &HyperkahlerFrame,
    triple: &Triple,
    label: DichotomyLabel,
    seed: u64,
) -> Result<Subspace4> {
    sample_special_lagrangian_labeled_from(h, triple, label, &mut rng::stream(seed))
}

pub fn sample_special_lagrangian_labeled_from(
    h: &HyperkahlerFrame,
    triple: &Triple,
    label: DichotomyLabel,
    r: &mut ChaCha8Rng,
) -> Result<Subspace4> {
    let complex_op = match label {
        DichotomyLabel::LagrangianC => h.operator(triple.b()),
        DichotomyLabel::LagrangianB => h.operator(triple.c()),
    };
    let (op_a, op_b, op_c) = (
        h.operator(triple.axis()),
        h.operator(triple.b()),
        h.operator(triple.c()),
    );
    let v1 = rng::unit_vec8(r);
    let quaternionic_line = [v1, op_a * v1, op_b * v1, op_c * v1];
    let v2 = projected_unit(r, &quaternionic_line)?;
    let mut frame = FrameMat::zeros();
    frame.set_column(0, &v1);
    frame.set_column(1, &(complex_op * v1));
    frame.set_column(2, &v2);
    frame.set_column(3, &(complex_op * v2));
    if label == DichotomyLabel::LagrangianB {
        frame.swap_columns(2, 3);
    }
    Subspace4::from_frame(&frame)
}

/// Result of the linear Darboux extraction on a restricted form.
#[derive(Debug, Clone)]
pub enum SymplecticBasis {
    /// Columns (u1, u2, u3, u4) of the plane with ω(u1,u2) = ω(u3,u4) = 1 and
    /// all other pairings zero. Not orthonormal in general.
    Darboux { frame: FrameMat },
    /// Restriction is degenerate: rank 0, or rank 2 with a maximal symplectic
    /// 2-plane and its ω-annihilator inside the plane.
    Degenerate {
        rank: usize,
        pair: Option<(Vec8, Vec8)>,
        annihilator: Option<(Vec8, Vec8)>,
        /// Residual pairing left on the annihilator, ~0 for true rank 2.
        residual: f64,
    },
}

/// Linear Darboux basis of ω|V, or the degenerate rank report.
pub fn symplectic_basis(v: &Subspace4, form: &TwoForm, tols: &Tolerances) -> SymplecticBasis {
    let m = restrict(form, v).entries().to_owned();
    let sup = sup_norm(&m);
    if sup <= tols.lag {
        return SymplecticBasis::Degenerate {
            rank: 0,
            pair: None,
            annihilator: None,
            residual: sup,
        };
    }
    // Largest pairing picks the symplectic 2-plane.
    let (mut bi, mut bj, mut bval) = (0usize, 1usize, 0.0f64);
    for i in 0..4 {
        for j in (i + 1)..4 {
            if m[(i, j)].abs() > bval.abs() {
                (bi, bj, bval) = (i, j, m[(i, j)]);
            }
        }
    }
    let pairing = |x: &nalgebra::SVector<f64, 4>, y: &nalgebra::SVector<f64, 4>| (m * y).dot(x);
    let e = |i: usize| nalgebra::SVector::<f64, 4>::ith(i, 1.0);
    let u1 = e(bi);
    let u2 = e(bj) / bval;
    // Symplectic projector onto the ω-complement of span(u1, u2).
    let project = |x: &nalgebra::SVector<f64, 4>| {
        x - u1 * pairing(x, &u2) + u2 * pairing(x, &u1)
    };
    let rest: Vec<usize> = (0..4).filter(|i| *i != bi && *i != bj).collect();
    let mut u3 = project(&e(rest[0]));
    let mut u4 = project(&e(rest[1]));
    if u4.norm() > u3.norm() {
        std::mem::swap(&mut u3, &mut u4);
        u4 = -u4; // keep the coordinate orientation
    }
    let s = pairing(&u3, &u4);
    let to_ambient = |x: &nalgebra::SVector<f64, 4>| v.basis() * x;
    let pf = m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)];
    if pf.abs() >= tols.symp && s.abs() > 1e-12 {
        let u4 = u4 / s;
        let mut frame = FrameMat::zeros();
        frame.set_column(0, &to_ambient(&u1));
        frame.set_column(1, &to_ambient(&u2));
        frame.set_column(2, &to_ambient(&u3));
        frame.set_column(3, &to_ambient(&u4));
        SymplecticBasis::Darboux { frame }
    } else {
        SymplecticBasis::Degenerate {
            rank: 2,
            pair: Some((to_ambient(&u1), to_ambient(&(e(bj))))),
            annihilator: Some((to_ambient(&u3), to_ambient(&u4))),
            residual: s.abs(),
        }
    }
}

/// Orthonormal basis of the metric complement of the plane.
pub fn orthonormal_complement(v: &Subspace4) -> FrameMat {
    let w = v.basis();
    let mut rows: Vec<Vec8> = (0..4).map(|c| w.column(c).into_owned()).collect();
    let mut out: Vec<Vec8> = Vec::with_capacity(4);
    while out.len() < 4 {
        let mut best: Option<(f64, Vec8)> = None;
        for a in 0..8 {
            let mut x = Vec8::ith(a, 1.0);
            for q in &rows {
                x -= q * q.dot(&x);
            }
            let n = x.norm();
            if best.as_ref().map(|(bn, _)| n > *bn).unwrap_or(true) {
                best = Some((n, x));
            }
        }
        let (n, x) = best.unwrap();
        let q = x / n;
        rows.push(q);
        out.push(q);
    }
    let mut m = FrameMat::zeros();
    for (c, q) in out.iter().enumerate() {
        m.set_column(c, q);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{standard_frame, Axis};

    fn span(cols: [usize; 4]) -> Subspace4 {
        let mut m = FrameMat::zeros();
        for (c, &a) in cols.iter().enumerate() {
            m[(a, c)] = 1.0;
        }
        Subspace4::from_frame(&m).unwrap()
    }

    #[test]
    fn orthonormalize_leaves_orthonormal_input_alone() {
        let mut m = FrameMat::zeros();
        for (c, a) in [0usize, 1, 4, 5].iter().enumerate() {
            m[(*a, c)] = 1.0;
        }
        let v = orthonormalize(&m).unwrap();
        assert_eq!(v.basis(), &m);
        // Scaling the columns changes nothing about the span or orientation.
        let scaled = orthonormalize(&(2.0 * m)).unwrap();
        assert!(sup_norm(&(scaled.basis() - m)) <= 1e-14);
        let gram = scaled.basis().transpose() * scaled.basis();
        assert!(sup_norm(&(gram - Mat4::identity())) <= 1e-14);
    }

    #[test]
    fn orthonormalize_rejects_rank_deficient() {
        let mut m = FrameMat::zeros();
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        m[(2, 2)] = 1.0;
        let col: Vec8 = Vec8::ith(0, 1.0) + Vec8::ith(1, 1.0);
        m.set_column(3, &col);
        match orthonormalize(&m) {
            Err(Error::RankDeficient { rank, .. }) => assert_eq!(rank, 3),
            other => panic!("expected rank report, got {other:?}"),
        }
    }

    #[test]
    fn random_subspace_is_deterministic_and_valid() {
        let a = random_subspace(12345);
        let b = random_subspace(12345);
        assert_eq!(a.basis(), b.basis());
        let gram = a.basis().transpose() * a.basis();
        assert!(sup_norm(&(gram - Mat4::identity())) <= 1e-12);
        assert_ne!(random_subspace(1).basis(), random_subspace(2).basis());
    }

    #[test]
    fn predicate_reference_values() {
        let h = standard_frame();
        let tols = Tolerances::default();
        let v = span([0, 1, 4, 5]);
        assert!(is_lagrangian(&v, &h.kahler_form(&Axis::k()), tols.lag));
        let q = span([0, 1, 2, 3]);
        assert!(is_symplectic_restriction(
            &q,
            &h.kahler_form(&Axis::i()),
            tols.symp
        ));
        assert!(is_complex(&v, &h, &Axis::i(), tols.cx));
        assert!(!is_complex(&span([0, 2, 6, 4]), &h, &Axis::i(), tols.cx));
    }

    #[test]
    fn classify_reference_planes() {
        let h = standard_frame();
        let cl = PlaneClassifier::new(&h, Triple::preset_k(), Tolerances::default());

        let first = cl.classify(&span([0, 1, 4, 5]));
        assert_eq!(first.b.label, AxisLabel::Symplectic);
        assert_eq!(first.c.label, AxisLabel::Lagrangian);
        assert_eq!(first.axis.label, AxisLabel::Lagrangian);
        assert!(first.special_lagrangian);
        assert_eq!(first.case, CaseTag::FirstCase);
        assert_eq!(first.dichotomy_label(1e-9), Some(DichotomyLabel::LagrangianC));

        let other_label = cl.classify(&span([0, 2, 6, 4]));
        assert_eq!(other_label.b.label, AxisLabel::Lagrangian);
        assert_eq!(other_label.axis.label, AxisLabel::Lagrangian);
        assert!(other_label.special_lagrangian);
        assert_eq!(other_label.dichotomy_label(1e-9), Some(DichotomyLabel::LagrangianB));

        let quaternionic = cl.classify(&span([0, 1, 2, 3]));
        assert_eq!(quaternionic.axis.label, AxisLabel::Symplectic);
        assert_eq!(quaternionic.b.label, AxisLabel::Symplectic);
        assert_eq!(quaternionic.c.label, AxisLabel::Symplectic);
        assert!(!quaternionic.special_lagrangian);
    }

    #[test]
    fn lagrangian_sampler_satisfies_postcondition() {
        let h = standard_frame();
        for seed in 0..50 {
            let v = sample_lagrangian(&h, &Axis::k(), seed).unwrap();
            let r = restrict(&h.kahler_form(&Axis::k()), &v);
            assert!(r.sup_norm() <= 1e-9, "sup {:.3e}", r.sup_norm());
        }
        let a = sample_lagrangian(&h, &Axis::k(), 99).unwrap();
        let b = sample_lagrangian(&h, &Axis::k(), 99).unwrap();
        assert_eq!(a.basis(), b.basis());
    }

    #[test]
    fn special_lagrangian_sampler_both_labels() {
        let h = standard_frame();
        let t = Triple::preset_k();
        let cl = PlaneClassifier::new(&h, t, Tolerances::default());
        for seed in 0..50 {
            let vc =
                sample_special_lagrangian_labeled(&h, &t, DichotomyLabel::LagrangianC, seed)
                    .unwrap();
            let rep = cl.classify(&vc);
            assert!(rep.special_lagrangian, "seed {seed}: re {}", rep.re);
            assert!((rep.re - 1.0).abs() <= 1e-12 && rep.im.abs() <= 1e-12);
            assert_eq!(rep.dichotomy_label(1e-9), Some(DichotomyLabel::LagrangianC));
            assert!(rep.b.complex, "b-complex by construction");

            let vb =
                sample_special_lagrangian_labeled(&h, &t, DichotomyLabel::LagrangianB, seed)
                    .unwrap();
            let rep = cl.classify(&vb);
            assert!(rep.special_lagrangian);
            assert_eq!(rep.dichotomy_label(1e-9), Some(DichotomyLabel::LagrangianB));
            assert!(rep.c.complex, "c-invariant (anti-complex as oriented)");
        }
        let a = sample_special_lagrangian(&h, &t, 7).unwrap();
        let b = sample_special_lagrangian(&h, &t, 7).unwrap();
        assert_eq!(a.basis(), b.basis());
    }

    #[test]
    fn darboux_on_quaternionic_line() {
        let h = standard_frame();
        let tols = Tolerances::default();
        let q = span([0, 1, 2, 3]);
        let wi = h.kahler_form(&Axis::i());
        match symplectic_basis(&q, &wi, &tols) {
            SymplecticBasis::Darboux { frame } => {
                let cols = frame_columns(&frame);
                for r in 0..4 {
                    for s in 0..4 {
                        let want = match (r, s) {
                            (0, 1) => 1.0,
                            (1, 0) => -1.0,
                            (2, 3) => 1.0,
                            (3, 2) => -1.0,
                            _ => 0.0,
                        };
                        let got = wi.eval(&cols[r], &cols[s]);
                        assert!(
                            (got - want).abs() <= 1e-9,
                            "pairing ({r},{s}) = {got}, want {want}"
                        );
                    }
                }
            }
            other => panic!("expected Darboux, got {other:?}"),
        }
    }

    #[test]
    fn darboux_rank_zero_on_lagrangian_plane() {
        let h = standard_frame();
        let tols = Tolerances::default();
        let v = span([0, 1, 4, 5]);
        match symplectic_basis(&v, &h.kahler_form(&Axis::k()), &tols) {
            SymplecticBasis::Degenerate { rank: 0, .. } => {}
            other => panic!("expected rank 0, got {other:?}"),
        }
    }

    #[test]
    fn darboux_rank_two_on_subcase_configuration() {
        // Frame (v1, Iv1, v2, Jv2) with v2 orthogonal to the quaternionic
        // line of v1: ω_I restricts with rank 2 and π = span(v1, Iv1).
        let h = standard_frame();
        let tols = Tolerances::default();
        let mut frame = FrameMat::zeros();
        let v1 = Vec8::ith(0, 1.0);
        let v2 = Vec8::ith(4, 1.0);
        frame.set_column(0, &v1);
        frame.set_column(1, &(h.op_i * v1));
        frame.set_column(2, &v2);
        frame.set_column(3, &(h.op_j * v2));
        let v = Subspace4::from_frame(&frame).unwrap();
        let wi = h.kahler_form(&Axis::i());
        match symplectic_basis(&v, &wi, &tols) {
            SymplecticBasis::Degenerate {
                rank: 2,
                pair: Some((p1, p2)),
                annihilator: Some((a1, a2)),
                residual,
            } => {
                assert!((wi.eval(&p1, &p2).abs() - 1.0).abs() <= 1e-9);
                // π is the (v1, Iv1) plane.
                let pi_proj = frame.columns(0, 2) * frame.columns(0, 2).transpose();
                assert!((pi_proj * p1 - p1).norm() <= 1e-9);
                assert!((pi_proj * p2 - p2).norm() <= 1e-9);
                assert!(wi.eval(&a1, &a2).abs() <= 1e-9);
                assert!(residual <= 1e-9);
            }
            other => panic!("expected rank 2, got {other:?}"),
        }
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let mut r = rng::stream(83);
        for _ in 0..20 {
            let v = random_subspace_from(&mut r);
            let n = orthonormal_complement(&v);
            assert!(sup_norm(&(n.transpose() * n - Mat4::identity())) <= 1e-10);
            assert!(sup_norm(&(v.basis().transpose() * n)) <= 1e-10);
        }
    }

    #[test]
    fn row_major_round_trip() {
        let v = random_subspace(4242);
        let flat = v.to_row_major();
        assert_eq!(flat.len(), 32);
        let back = Subspace4::from_row_major(&flat).unwrap();
        assert_eq!(v.basis(), back.basis());
    }
}
