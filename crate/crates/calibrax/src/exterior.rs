//! Restriction of 2-forms to oriented 4-planes and on-demand evaluation of
//! wedge products of 2-forms.
//!
//! 4-forms are never stored as 70-coefficient tensors; every evaluation goes
//! through the three-pairing expansion on the plane's frame, which is exact
//! and matches how the identities are stated pointwise.

use crate::frame::{HolVolumeForm, TwoForm};
use crate::grassmann::Subspace4;
use crate::{Error, Mat4, Result, Vec3};

/// Pullback of a 2-form to an ordered orthonormal 4-frame; entry (r, s) is
/// ω(w_r, w_s).
#[derive(Debug, Clone, PartialEq)]
pub struct Restricted2Form {
    entries: Mat4,
    form_label: Option<Vec3>,
}

impl Restricted2Form {
    pub fn entries(&self) -> &Mat4 {
        &self.entries
    }

    pub fn form_label(&self) -> Option<&Vec3> {
        self.form_label.as_ref()
    }

    /// Sup-norm over the six independent entries.
    pub fn sup_norm(&self) -> f64 {
        crate::sup_norm(&self.entries)
    }

    pub fn pfaffian(&self) -> f64 {
        pfaffian4_entries(&self.entries)
    }
}

/// Pull a 2-form back to the plane's frame. Orthonormality is a construction
/// invariant of `Subspace4`, so no per-call frame check is needed.
pub fn restrict(form: &TwoForm, v: &Subspace4) -> Restricted2Form {
    let w = v.basis();
    let mut entries = Mat4::zeros();
    for r in 0..4 {
        for s in (r + 1)..4 {
            let val = form.eval(&w.column(r).into_owned(), &w.column(s).into_owned());
            entries[(r, s)] = val;
            entries[(s, r)] = -val;
        }
    }
    Restricted2Form {
        entries,
        form_label: form.label().copied(),
    }
}

fn pfaffian4_entries(m: &Mat4) -> f64 {
    m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)]
}

/// Pfaffian of an antisymmetric 4×4 array; pf² = det.
pub fn pfaffian4(m: &Mat4) -> Result<f64> {
    let residual = crate::sup_norm(&(m + m.transpose()));
    if residual > 1e-12 {
        return Err(Error::NotAntisymmetric { residual });
    }
    Ok(pfaffian4_entries(m))
}

/// (α∧β)(w1, w2, w3, w4) through the three-pairing expansion; symmetric in
/// (α, β) and alternating under frame permutations.
pub fn eval_wedge_pair(alpha: &TwoForm, beta: &TwoForm, v: &Subspace4) -> f64 {
    let a = restrict(alpha, v);
    let b = restrict(beta, v);
    wedge_pair_entries(a.entries(), b.entries())
}

/// Same expansion on already-restricted entries.
pub fn wedge_pair_entries(a: &Mat4, b: &Mat4) -> f64 {
    a[(0, 1)] * b[(2, 3)] - a[(0, 2)] * b[(1, 3)] + a[(0, 3)] * b[(1, 2)]
        + b[(0, 1)] * a[(2, 3)] - b[(0, 2)] * a[(1, 3)] + b[(0, 3)] * a[(1, 2)]
}

/// Evaluate the holomorphic volume form on an oriented orthonormal 4-plane:
/// re = ½(ω_b² − ω_c²)|_V, im = (ω_b ∧ ω_c)|_V. With unit frames vol(V) = 1,
/// so re compares directly against the calibration bound.
pub fn calibration_eval(omega: &HolVolumeForm, v: &Subspace4) -> (f64, f64) {
    let b = restrict(omega.omega_b(), v);
    let c = restrict(omega.omega_c(), v);
    let re = 0.5
        * (wedge_pair_entries(b.entries(), b.entries())
            - wedge_pair_entries(c.entries(), c.entries()));
    let im = wedge_pair_entries(b.entries(), c.entries());
    (re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{standard_frame, Axis, Triple};
    use crate::grassmann::Subspace4;
    use crate::rng;
    use crate::{FrameMat, Vec8};

    fn span(cols: [usize; 4]) -> Subspace4 {
        let mut m = FrameMat::zeros();
        for (c, &a) in cols.iter().enumerate() {
            m[(a, c)] = 1.0;
        }
        Subspace4::from_frame(&m).unwrap()
    }

    #[test]
    fn restrict_on_reference_planes() {
        let h = standard_frame();
        let v = span([0, 1, 4, 5]);
        // Oracle: entrywise g(K·,·) computation gives the zero array.
        let rk = restrict(&h.kahler_form(&Axis::k()), &v);
        assert_eq!(rk.sup_norm(), 0.0);
        // ω_I restricts to the standard symplectic block: entries (1,2) and
        // (3,4) equal 1 in 1-based indexing.
        let ri = restrict(&h.kahler_form(&Axis::i()), &v);
        let mut expected = Mat4::zeros();
        expected[(0, 1)] = 1.0;
        expected[(1, 0)] = -1.0;
        expected[(2, 3)] = 1.0;
        expected[(3, 2)] = -1.0;
        assert_eq!(ri.entries(), &expected);
    }

    #[test]
    fn restrict_commutes_with_frame_permutation() {
        let h = standard_frame();
        let wi = h.kahler_form(&Axis::i());
        let mut r = rng::stream(41);
        let v = crate::grassmann::random_subspace_from(&mut r);
        let base = restrict(&wi, &v);
        let mut swapped_frame = *v.basis();
        swapped_frame.swap_columns(1, 3);
        let swapped = restrict(&wi, &Subspace4::from_frame(&swapped_frame).unwrap());
        for r in 0..4 {
            for s in 0..4 {
                let pr = [0usize, 3, 2, 1][r];
                let ps = [0usize, 3, 2, 1][s];
                assert!((swapped.entries()[(r, s)] - base.entries()[(pr, ps)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn pfaffian_reference_values() {
        let mut m = Mat4::zeros();
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -1.0;
        m[(2, 3)] = 1.0;
        m[(3, 2)] = -1.0;
        assert_eq!(pfaffian4(&m).unwrap(), 1.0);
        assert_eq!(pfaffian4(&Mat4::zeros()).unwrap(), 0.0);
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let mut r = rng::stream(43);
        for _ in 0..100 {
            let raw = Mat4::from_fn(|_, _| {
                use rand::Rng;
                r.random_range(-1.0..1.0)
            });
            let m = 0.5 * (raw - raw.transpose());
            let pf = pfaffian4(&m).unwrap();
            assert!((pf * pf - m.determinant()).abs() <= 1e-9);
        }
    }

    #[test]
    fn pfaffian_rejects_non_antisymmetric() {
        let m = Mat4::identity();
        assert!(matches!(
            pfaffian4(&m),
            Err(Error::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn wedge_pair_reference_values() {
        let h = standard_frame();
        let wi = h.kahler_form(&Axis::i());
        let wj = h.kahler_form(&Axis::j());
        let v = span([0, 1, 4, 5]);
        // Hand expansion over the six pairings; cross-factor entries vanish.
        assert_eq!(eval_wedge_pair(&wi, &wi, &v), 2.0);
        // Symmetry in (α, β).
        let mut r = rng::stream(47);
        for _ in 0..10 {
            let v = crate::grassmann::random_subspace_from(&mut r);
            let ab = eval_wedge_pair(&wi, &wj, &v);
            let ba = eval_wedge_pair(&wj, &wi, &v);
            assert!((ab - ba).abs() <= 1e-14);
        }
    }

    #[test]
    fn calibration_eval_reference_planes() {
        let h = standard_frame();
        let omega = h.hol_volume(&Triple::preset_k());
        let complex_plane = span([0, 1, 4, 5]);
        let (re, im) = calibration_eval(&omega, &complex_plane);
        assert_eq!((re, im), (1.0, 0.0));
        // ω_I- and ω_K-Lagrangian plane, ordered for positive orientation.
        let bi_lagrangian = span([0, 2, 6, 4]);
        let (re, im) = calibration_eval(&omega, &bi_lagrangian);
        assert_eq!((re, im), (1.0, 0.0));
        // Quaternionic line: ω_I² and ω_J² both contribute 2 and cancel.
        let quaternionic = span([0, 1, 2, 3]);
        let (re, im) = calibration_eval(&omega, &quaternionic);
        assert_eq!((re, im), (0.0, 0.0));
    }

    #[test]
    fn im_part_is_wedge_of_b_and_c() {
        let h = standard_frame();
        let t = Triple::preset_k();
        let omega = h.hol_volume(&t);
        let wi = h.kahler_form(t.b());
        let wj = h.kahler_form(t.c());
        let mut r = rng::stream(53);
        for _ in 0..20 {
            let v = crate::grassmann::sample_lagrangian_from(
                &h,
                t.axis(),
                &mut r,
            )
            .unwrap();
            let (_, im) = calibration_eval(&omega, &v);
            let direct = eval_wedge_pair(&wi, &wj, &v);
            assert!((im - direct).abs() <= 1e-14);
        }
    }

    #[test]
    fn alternating_under_transpositions() {
        let h = standard_frame();
        let wi = h.kahler_form(&Axis::i());
        let wj = h.kahler_form(&Axis::j());
        let mut r = rng::stream(59);
        for _ in 0..20 {
            let v = crate::grassmann::random_subspace_from(&mut r);
            let base = eval_wedge_pair(&wi, &wj, &v);
            for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                let mut f = *v.basis();
                f.swap_columns(a, b);
                let flipped = eval_wedge_pair(&wi, &wj, &Subspace4::from_frame(&f).unwrap());
                assert!((base + flipped).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn basis_independence_and_orientation_flip() {
        let h = standard_frame();
        let omega = h.hol_volume(&Triple::preset_k());
        let mut r = rng::stream(61);
        for _ in 0..10 {
            let v = crate::grassmann::random_subspace_from(&mut r);
            let (re, im) = calibration_eval(&omega, &v);
            for _ in 0..10 {
                let rot = crate::grassmann::random_so4_from(&mut r);
                let rebased = v.reframed(&rot);
                let (re2, im2) = calibration_eval(&omega, &rebased);
                assert!((re - re2).abs() <= 1e-10 && (im - im2).abs() <= 1e-10);
            }
            let mut f = *v.basis();
            f.swap_columns(2, 3);
            let (re3, im3) = calibration_eval(&omega, &Subspace4::from_frame(&f).unwrap());
            assert!((re + re3).abs() <= 1e-10 && (im + im3).abs() <= 1e-10);
        }
    }

    #[test]
    fn complex_pairing_expansion_agrees() {
        // Independent oracle for the re/im split: expand ½(ω_b + iω_c)²
        // directly in complex arithmetic.
        let h = standard_frame();
        let t = Triple::preset_k();
        let omega = h.hol_volume(&t);
        let wb = h.kahler_form(t.b());
        let wc = h.kahler_form(t.c());
        let mut r = rng::stream(67);
        for _ in 0..100 {
            let v = crate::grassmann::random_subspace_from(&mut r);
            let (re, im) = calibration_eval(&omega, &v);
            let w = v.basis();
            let gamma = |p: usize, q: usize| {
                let x = w.column(p).into_owned();
                let y = w.column(q).into_owned();
                crate::Complex::new(wb.eval(&x, &y), wc.eval(&x, &y))
            };
            let z = 0.5
                * (2.0
                    * (gamma(0, 1) * gamma(2, 3) - gamma(0, 2) * gamma(1, 3)
                        + gamma(0, 3) * gamma(1, 2)));
            assert!((re - z.re).abs() <= 1e-9 && (im - z.im).abs() <= 1e-9);
        }
    }

    #[test]
    fn quaternionic_line_cancellation_detail() {
        let h = standard_frame();
        let v = span([0, 1, 2, 3]);
        let wi = h.kahler_form(&Axis::i());
        let wj = h.kahler_form(&Axis::j());
        assert_eq!(eval_wedge_pair(&wi, &wi, &v), 2.0);
        assert_eq!(eval_wedge_pair(&wj, &wj, &v), 2.0);
    }

    #[test]
    fn frame_vectors_recover_entries() {
        // j*ω entrywise: entry (r,s) equals ω(w_r, w_s).
        let h = standard_frame();
        let mut r = rng::stream(71);
        let u = Axis::normalized(rng::normal_vec3(&mut r)).unwrap();
        let w = h.kahler_form(&u);
        let v = crate::grassmann::random_subspace_from(&mut r);
        let restricted = restrict(&w, &v);
        for a in 0..4 {
            for b in 0..4 {
                let x: Vec8 = v.basis().column(a).into_owned();
                let y: Vec8 = v.basis().column(b).into_owned();
                assert_eq!(restricted.entries()[(a, b)], {
                    if a < b {
                        w.eval(&x, &y)
                    } else if a > b {
                        -w.eval(&y, &x)
                    } else {
                        0.0
                    }
                });
            }
        }
    }
}
