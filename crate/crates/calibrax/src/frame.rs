//! Flat hyperkähler linear model on R^8 ≅ H^2.
//!
//! The standard frame takes the identity metric and lets I, J, K act as left
//! quaternion multiplication by i, j, k on two quaternion factors with basis
//! order (1, i, j, k) per factor. That convention makes IJ = K hold with no
//! sign gymnastics and keeps the operators block-diagonal.

use crate::{
    sup_norm, CMat4, Complex, Error, FrameMat, Mat3, Mat8, Result, Vec3, Vec8, TOL_EXACT,
};

/// Unit 3-vector selecting a complex structure A_u = u1 I + u2 J + u3 K on
/// the twistor sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis(Vec3);

impl Axis {
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > TOL_EXACT {
            return Err(Error::NonUnitAxis { norm });
        }
        Ok(Axis(v))
    }

    /// Normalizes the input instead of rejecting it.
    pub fn normalized(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if norm < 1e-12 {
            return Err(Error::NonUnitAxis { norm });
        }
        Ok(Axis(v / norm))
    }

    pub fn i() -> Self {
        Axis(Vec3::new(1.0, 0.0, 0.0))
    }
    pub fn j() -> Self {
        Axis(Vec3::new(0.0, 1.0, 0.0))
    }
    pub fn k() -> Self {
        Axis(Vec3::new(0.0, 0.0, 1.0))
    }

    pub fn vec(&self) -> &Vec3 {
        &self.0
    }
}

/// Right-handed orthonormal triple (a; b, c) on S^2, calibration axis first,
/// so that A_b ∘ A_c = A_a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    axis: Axis,
    b: Axis,
    c: Axis,
}

impl Triple {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Result<Self> {
        for (name, v) in [("a", &a), ("b", &b), ("c", &c)] {
            if (v.norm() - 1.0).abs() > TOL_EXACT {
                return Err(Error::BadTriple {
                    detail: format!("{name} has norm {:.6e}", v.norm()),
                });
            }
        }
        let dots = [a.dot(&b), a.dot(&c), b.dot(&c)];
        if dots.iter().any(|d| d.abs() > TOL_EXACT) {
            return Err(Error::BadTriple {
                detail: format!("pairwise dot products {dots:?} are not zero"),
            });
        }
        // Right-handed means a = b × c; equivalently det[a b c] = +1.
        if (a - b.cross(&c)).norm() > 1e-10 {
            return Err(Error::BadTriple {
                detail: "a != b × c (left-handed or mismatched axis)".into(),
            });
        }
        Ok(Triple {
            axis: Axis(a),
            b: Axis(b),
            c: Axis(c),
        })
    }

    /// (K; I, J): calibrate by Re Ω_K = (ω_I² − ω_J²)/2.
    pub fn preset_k() -> Self {
        Triple {
            axis: Axis::k(),
            b: Axis::i(),
            c: Axis::j(),
        }
    }

    /// (I; J, K): the rotated picture with Ω_I = ω_J + iω_K.
    pub fn preset_i() -> Self {
        Triple {
            axis: Axis::i(),
            b: Axis::j(),
            c: Axis::k(),
        }
    }

    /// (J; K, I).
    pub fn preset_j() -> Self {
        Triple {
            axis: Axis::j(),
            b: Axis::k(),
            c: Axis::i(),
        }
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }
    pub fn b(&self) -> &Axis {
        &self.b
    }
    pub fn c(&self) -> &Axis {
        &self.c
    }

    /// Apply a proper rotation of S^2 to all three legs.
    pub fn rotated(&self, r: &Mat3) -> Result<Triple> {
        let rtr_res = sup_norm(&(r.transpose() * r - Mat3::identity()));
        if rtr_res > TOL_EXACT {
            return Err(Error::BadRotation {
                detail: format!("R^T R − Id residual {rtr_res:.3e}"),
            });
        }
        let det = r.determinant();
        if (det - 1.0).abs() > TOL_EXACT {
            return Err(Error::BadRotation {
                detail: format!("det R = {det:.12}, need +1"),
            });
        }
        Triple::new(r * self.axis.0, r * self.b.0, r * self.c.0)
    }

    /// Rotate the (b, c) pair by angle θ about the axis. Rotates the
    /// calibration phase: (re, im) ↦ (cos2θ·re + sin2θ·im, −sin2θ·re + cos2θ·im).
    pub fn phase_rotated(&self, theta: f64) -> Triple {
        let (s, c) = theta.sin_cos();
        Triple {
            axis: self.axis,
            b: Axis(c * self.b.0 + s * self.c.0),
            c: Axis(-s * self.b.0 + c * self.c.0),
        }
    }

    /// Cyclic rotation sending (K; I, J) to (I; J, K).
    pub fn cyclic_rotation() -> Mat3 {
        Mat3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0)
    }
}

/// Apply a rotation of the twistor sphere to a calibration triple.
pub fn rotate_frame(triple: &Triple, r: &Mat3) -> Result<Triple> {
    triple.rotated(r)
}

/// Metric plus compatible complex-structure triple with IJ = K.
#[derive(Debug, Clone)]
pub struct HyperkahlerFrame {
    pub metric: Mat8,
    pub op_i: Mat8,
    pub op_j: Mat8,
    pub op_k: Mat8,
}

/// 4×4 block of left multiplication by a unit imaginary quaternion q on the
/// basis (1, i, j, k); column r is the image of basis vector r.
fn left_mult_block(q: [f64; 3]) -> nalgebra::SMatrix<f64, 4, 4> {
    let [x, y, z] = q;
    // q·1 = xi+yj+zk, q·i = −x + zj − yk, q·j = −y − zi + xk, q·k = −z + yi − xj
    nalgebra::SMatrix::<f64, 4, 4>::new(
        0.0, -x, -y, -z, //
        x, 0.0, -z, y, //
        y, z, 0.0, -x, //
        z, -y, x, 0.0,
    )
}

fn block_diag(b: &nalgebra::SMatrix<f64, 4, 4>) -> Mat8 {
    let mut m = Mat8::zeros();
    m.fixed_view_mut::<4, 4>(0, 0).copy_from(b);
    m.fixed_view_mut::<4, 4>(4, 4).copy_from(b);
    m
}

/// Build the flat standard frame: identity metric, I/J/K as left quaternion
/// multiplication on H^2.
pub fn standard_frame() -> HyperkahlerFrame {
    HyperkahlerFrame {
        metric: Mat8::identity(),
        op_i: block_diag(&left_mult_block([1.0, 0.0, 0.0])),
        op_j: block_diag(&left_mult_block([0.0, 1.0, 0.0])),
        op_k: block_diag(&left_mult_block([0.0, 0.0, 1.0])),
    }
}

impl HyperkahlerFrame {
    /// The complex structure A_u = u1 I + u2 J + u3 K at a twistor point.
    pub fn operator(&self, u: &Axis) -> Mat8 {
        let v = u.vec();
        v[0] * self.op_i + v[1] * self.op_j + v[2] * self.op_k
    }

    pub fn inner(&self, x: &Vec8, y: &Vec8) -> f64 {
        (self.metric * y).dot(x)
    }

    /// Check the structural invariants: squares to −Id, IJ = K, isometry.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let id = Mat8::identity();
        let checks: [(&str, f64); 5] = [
            ("I² + Id", sup_norm(&(self.op_i * self.op_i + id))),
            ("J² + Id", sup_norm(&(self.op_j * self.op_j + id))),
            ("K² + Id", sup_norm(&(self.op_k * self.op_k + id))),
            ("IJ − K", sup_norm(&(self.op_i * self.op_j - self.op_k))),
            (
                "metric symmetry",
                sup_norm(&(self.metric - self.metric.transpose())),
            ),
        ];
        for (name, residual) in checks {
            if residual > tol {
                return Err(Error::BadStructure {
                    detail: format!("{name} residual {residual:.3e}"),
                });
            }
        }
        for op in [&self.op_i, &self.op_j, &self.op_k] {
            let res = sup_norm(&(op.transpose() * self.metric * op - self.metric));
            if res > tol {
                return Err(Error::BadStructure {
                    detail: format!("operator is not a g-isometry, residual {res:.3e}"),
                });
            }
        }
        Ok(())
    }

    /// Kähler form ω_u = g(A_u ·, ·) of the complex structure at u.
    pub fn kahler_form(&self, u: &Axis) -> TwoForm {
        // ω(x, y) = g(A_u x, y) = x^T (A_u^T G) y.
        let raw = self.operator(u).transpose() * self.metric;
        TwoForm::antisymmetrized(raw, Some(*u.vec()))
    }

    /// Holomorphic volume form of the triple: Ω = ½(ω_b + iω_c)², calibrating
    /// by Re Ω = ½(ω_b² − ω_c²) with Im Ω = ω_b ∧ ω_c.
    pub fn hol_volume(&self, triple: &Triple) -> HolVolumeForm {
        HolVolumeForm {
            axis: *triple.axis(),
            omega_b: self.kahler_form(triple.b()),
            omega_c: self.kahler_form(triple.c()),
        }
    }

    /// Four A_u-holomorphic linear functionals whose realification is
    /// invertible: a holomorphic coordinate frame for the structure at u.
    pub fn hol_coordinates(&self, u: &Axis) -> CoordFrame {
        let op = self.operator(u);
        let mut rows: Vec<Vec8> = Vec::with_capacity(8);
        let mut functionals: Vec<ComplexCovector> = Vec::with_capacity(4);
        // Greedy over the standard covectors: each picked p brings its
        // partner q = −p∘A_u, and the pair spans an A_u-invariant 2-plane
        // orthonormal within itself (A_u is an antisymmetric isometry), so
        // picking the candidate farthest from the accumulated span keeps the
        // realification well-conditioned and four pairs exhaust R^8*.
        while functionals.len() < 4 {
            let mut best: Option<(f64, usize)> = None;
            for a in 0..8 {
                let mut resid = Vec8::ith(a, 1.0);
                for r in &rows {
                    resid -= r * r.dot(&resid);
                }
                let n = resid.norm();
                if best.map(|(bn, _)| n > bn).unwrap_or(true) {
                    best = Some((n, a));
                }
            }
            let (_, a) = best.expect("candidate set is non-empty");
            let p = Vec8::ith(a, 1.0);
            let q = -(op.transpose() * p);
            for v in [p, q] {
                let mut w = v;
                for r in &rows {
                    w -= r * r.dot(&w);
                }
                rows.push(w / w.norm());
            }
            functionals.push(ComplexCovector { re: p, im: q });
        }
        CoordFrame {
            axis: *u,
            functionals: [
                functionals[0],
                functionals[1],
                functionals[2],
                functionals[3],
            ],
        }
    }
}

/// Antisymmetric coefficient array of a 2-form; entry (a,b) is ω(e_a, e_b).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    coeffs: Mat8,
    label: Option<Vec3>,
}

impl TwoForm {
    /// Builds from a raw coefficient array, forcing bit-exact antisymmetry by
    /// mirroring the strict upper triangle.
    pub fn antisymmetrized(raw: Mat8, label: Option<Vec3>) -> TwoForm {
        let mut m = Mat8::zeros();
        for a in 0..8 {
            for b in (a + 1)..8 {
                let v = 0.5 * (raw[(a, b)] - raw[(b, a)]);
                m[(a, b)] = v;
                m[(b, a)] = -v;
            }
        }
        TwoForm { coeffs: m, label }
    }

    pub fn coeffs(&self) -> &Mat8 {
        &self.coeffs
    }

    pub fn label(&self) -> Option<&Vec3> {
        self.label.as_ref()
    }

    pub fn eval(&self, x: &Vec8, y: &Vec8) -> f64 {
        (self.coeffs * y).dot(x)
    }
}

/// Holomorphic volume form stored as the pair of 2-forms whose wedge
/// combinations give its real and imaginary parts.
#[derive(Debug, Clone)]
pub struct HolVolumeForm {
    axis: Axis,
    omega_b: TwoForm,
    omega_c: TwoForm,
}

impl HolVolumeForm {
    pub fn axis(&self) -> &Axis {
        &self.axis
    }
    /// The pair whose wedge-squares give 2·Re Ω = ω_b² − ω_c².
    pub fn re_pair(&self) -> (&TwoForm, &TwoForm) {
        (&self.omega_b, &self.omega_c)
    }
    /// The pair whose wedge gives Im Ω = ω_b ∧ ω_c.
    pub fn im_pair(&self) -> (&TwoForm, &TwoForm) {
        (&self.omega_b, &self.omega_c)
    }
    pub fn omega_b(&self) -> &TwoForm {
        &self.omega_b
    }
    pub fn omega_c(&self) -> &TwoForm {
        &self.omega_c
    }
}

/// Complex-valued linear functional ℓ(x) = re·x + i·(im·x) on R^8.
#[derive(Debug, Clone, Copy)]
pub struct ComplexCovector {
    pub re: Vec8,
    pub im: Vec8,
}

impl ComplexCovector {
    pub fn eval(&self, x: &Vec8) -> Complex {
        Complex::new(self.re.dot(x), self.im.dot(x))
    }

    /// Holomorphy defect: sup over basis vectors of |ℓ(A_u e) − i·ℓ(e)|.
    pub fn holomorphy_residual(&self, op: &Mat8) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..8 {
            let e = Vec8::ith(a, 1.0);
            let lhs = self.eval(&(op * e));
            let rhs = Complex::new(0.0, 1.0) * self.eval(&e);
            worst = worst.max((lhs - rhs).norm());
        }
        worst
    }
}

/// Four A_u-holomorphic functionals with invertible realification.
#[derive(Debug, Clone)]
pub struct CoordFrame {
    axis: Axis,
    functionals: [ComplexCovector; 4],
}

impl CoordFrame {
    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn functionals(&self) -> &[ComplexCovector; 4] {
        &self.functionals
    }

    /// The induced real 8×8 map, rows (re_1, im_1, ..., re_4, im_4).
    pub fn realification(&self) -> Mat8 {
        let mut m = Mat8::zeros();
        for (k, f) in self.functionals.iter().enumerate() {
            m.set_row(2 * k, &f.re.transpose());
            m.set_row(2 * k + 1, &f.im.transpose());
        }
        m
    }

    pub fn eval(&self, x: &Vec8) -> [Complex; 4] {
        [
            self.functionals[0].eval(x),
            self.functionals[1].eval(x),
            self.functionals[2].eval(x),
            self.functionals[3].eval(x),
        ]
    }
}

/// Real-linear change z = A w + B w̄ between two coordinate frames; B = 0
/// exactly when the change is complex-linear.
#[derive(Debug, Clone)]
pub struct CoordChange {
    pub a: CMat4,
    pub b: CMat4,
}

impl CoordChange {
    pub fn apply(&self, w: &[Complex; 4]) -> [Complex; 4] {
        let mut out = [Complex::new(0.0, 0.0); 4];
        for k in 0..4 {
            for m in 0..4 {
                out[k] += self.a[(k, m)] * w[m] + self.b[(k, m)] * w[m].conj();
            }
        }
        out
    }

    /// Composition: if self maps w-coords to z and inner maps v-coords to w,
    /// the result maps v-coords to z.
    pub fn compose(&self, inner: &CoordChange) -> CoordChange {
        let conj = |m: &CMat4| m.map(|z| z.conj());
        CoordChange {
            a: self.a * inner.a + self.b * conj(&inner.b),
            b: self.a * inner.b + self.b * conj(&inner.a),
        }
    }

    pub fn b_sup_norm(&self) -> f64 {
        self.b.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }
}

/// Solve for the unique (A, B) with from_k = Σ A_km to_m + B_km conj(to_m)
/// as functions on R^8. Real-linear, hence real-analytic; B = 0 iff the two
/// axes coincide.
pub fn coord_change(from: &CoordFrame, to: &CoordFrame) -> Result<CoordChange> {
    let inv = to
        .realification()
        .transpose()
        .try_inverse()
        .ok_or(Error::DegenerateCoordFrame)?;
    let mut a = CMat4::zeros();
    let mut b = CMat4::zeros();
    for k in 0..4 {
        // Coefficients of p_k, q_k in the covector basis (p_m, q_m) of `to`.
        let x = inv * from.functionals[k].re;
        let y = inv * from.functionals[k].im;
        for m in 0..4 {
            let (alpha, beta) = (x[2 * m], x[2 * m + 1]);
            let (gamma, delta) = (y[2 * m], y[2 * m + 1]);
            a[(k, m)] = Complex::new(0.5 * (alpha + delta), 0.5 * (gamma - beta));
            b[(k, m)] = Complex::new(0.5 * (alpha - delta), 0.5 * (beta + gamma));
        }
    }
    Ok(CoordChange { a, b })
}

/// Frame columns as an ordered list of 8-vectors.
pub fn frame_columns(m: &FrameMat) -> [Vec8; 4] {
    [
        m.column(0).into_owned(),
        m.column(1).into_owned(),
        m.column(2).into_owned(),
        m.column(3).into_owned(),
    ]
}
