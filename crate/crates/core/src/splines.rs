//! B-spline and NURBS evaluation on tensor-product patches: basis values
//! with first and second parametric derivatives, surface points, knot
//! insertion with explicit subdivision matrices, and Gauss-Legendre rules.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::linalg::DMat;

/// Tolerance used when counting knot multiplicities.
pub const KNOT_EQ_TOL: f64 = 1e-12;

/// Errors from spline construction and evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum SplineError {
    /// Evaluation parameter outside `[0, 1]`.
    ParamOutOfDomain {
        /// Offending parameter value.
        value: f64,
    },
    /// Knot vector is not open (clamped) with multiplicity `p + 1` at both ends.
    NotOpenClamped,
    /// Knot values decrease somewhere.
    NotNonDecreasing,
    /// Knot values leave `[0, 1]`.
    OutOfUnitRange,
    /// Too few knots for the requested degree.
    TooFewKnots,
    /// Control grid dimensions disagree with the knot vectors.
    GridMismatch,
    /// A control-point weight is not strictly positive.
    NonPositiveWeight,
    /// Knot insertion would exceed multiplicity `p` or lies outside `(0, 1)`.
    InvalidRefinement {
        /// Offending knot value.
        knot: f64,
    },
    /// Gauss rule point count outside the supported `1..=10`.
    GaussPointsOutOfRange {
        /// Requested point count.
        n: usize,
    },
}

impl core::fmt::Display for SplineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SplineError::ParamOutOfDomain { value } => {
                write!(f, "parameter {value} outside [0, 1]")
            }
            SplineError::NotOpenClamped => write!(f, "knot vector is not open (clamped)"),
            SplineError::NotNonDecreasing => write!(f, "knot vector is not non-decreasing"),
            SplineError::OutOfUnitRange => write!(f, "knot values must lie in [0, 1]"),
            SplineError::TooFewKnots => write!(f, "too few knots for the degree"),
            SplineError::GridMismatch => write!(f, "control grid does not match knot vectors"),
            SplineError::NonPositiveWeight => write!(f, "control weights must be positive"),
            SplineError::InvalidRefinement { knot } => {
                write!(f, "invalid knot insertion at {knot}")
            }
            SplineError::GaussPointsOutOfRange { n } => {
                write!(f, "Gauss rule supports 1..=10 points, got {n}")
            }
        }
    }
}

impl core::error::Error for SplineError {}

/// Open (clamped) knot vector over `[0, 1]` together with its degree.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    /// Validate and wrap a knot vector. Requires values in `[0, 1]`,
    /// non-decreasing order and end multiplicities of exactly `degree + 1`.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self, SplineError> {
        if knots.len() < 2 * (degree + 1) {
            return Err(SplineError::TooFewKnots);
        }
        for w in knots.windows(2) {
            if w[1] < w[0] {
                return Err(SplineError::NotNonDecreasing);
            }
        }
        let first = knots[0];
        let last = *knots.last().unwrap();
        if first < -KNOT_EQ_TOL || last > 1.0 + KNOT_EQ_TOL {
            return Err(SplineError::OutOfUnitRange);
        }
        if fmath::abs(first) > KNOT_EQ_TOL || fmath::abs(last - 1.0) > KNOT_EQ_TOL {
            return Err(SplineError::NotOpenClamped);
        }
        let lead = knots
            .iter()
            .take_while(|&&k| fmath::abs(k - first) <= KNOT_EQ_TOL)
            .count();
        let trail = knots
            .iter()
            .rev()
            .take_while(|&&k| fmath::abs(k - last) <= KNOT_EQ_TOL)
            .count();
        if lead != degree + 1 || trail != degree + 1 {
            return Err(SplineError::NotOpenClamped);
        }
        Ok(Self { degree, knots })
    }

    /// Open uniform knot vector with `n_elements` equal spans.
    pub fn open_uniform(degree: usize, n_elements: usize) -> Self {
        assert!(n_elements >= 1);
        let mut knots = vec![0.0; degree + 1];
        for i in 1..n_elements {
            knots.push(i as f64 / n_elements as f64);
        }
        knots.extend(core::iter::repeat(1.0).take(degree + 1));
        Self { degree, knots }
    }

    /// Polynomial degree `p`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Raw knot values.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions `n = len - p - 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Nonzero spans as `(span index, lower, upper)` in ascending order.
    pub fn nonzero_spans(&self) -> Vec<(usize, f64, f64)> {
        let n = self.num_basis();
        (self.degree..n)
            .filter(|&i| self.knots[i + 1] - self.knots[i] > KNOT_EQ_TOL)
            .map(|i| (i, self.knots[i], self.knots[i + 1]))
            .collect()
    }

    /// Span index `i` with `knots[i] <= u < knots[i+1]`; at the right end the
    /// last nonzero-length span is returned.
    pub fn find_span(&self, u: f64) -> Result<usize, SplineError> {
        if !((-KNOT_EQ_TOL..=1.0 + KNOT_EQ_TOL).contains(&u)) || !u.is_finite() {
            return Err(SplineError::ParamOutOfDomain { value: u });
        }
        let n = self.num_basis();
        if u >= self.knots[n] {
            return Ok(n - 1);
        }
        let mut lo = self.degree;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(lo)
    }

    /// Values and derivatives of the `p + 1` basis functions supported on the
    /// span of `u`. Returns `(span, ders)` with `ders[k][j]` the `k`-th
    /// derivative of function `span - p + j`; derivative orders above `p`
    /// come back as zeros.
    pub fn basis_derivs(&self, u: f64, max_deriv: usize) -> Result<(usize, Vec<Vec<f64>>), SplineError> {
        let span = self.find_span(u)?;
        let p = self.degree;
        let kd = core::cmp::min(max_deriv, p);
        let kn = &self.knots;

        // Cox-de Boor triangle with knot differences (Piegl & Tiller A2.3).
        let mut ndu = DMat::zeros(p + 1, p + 1);
        ndu[(0, 0)] = 1.0;
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        for j in 1..=p {
            left[j] = u - kn[span + 1 - j];
            right[j] = kn[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[(j, r)] = right[r + 1] + left[j - r];
                let temp = ndu[(r, j - 1)] / ndu[(j, r)];
                ndu[(r, j)] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[(j, j)] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; max_deriv + 1];
        for j in 0..=p {
            ders[0][j] = ndu[(j, p)];
        }
        if kd == 0 {
            return Ok((span, ders));
        }

        let mut a = DMat::zeros(2, p + 1);
        for r in 0..=p {
            let mut s1 = 0usize;
            let mut s2 = 1usize;
            a[(0, 0)] = 1.0;
            for k in 1..=kd {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[(s2, 0)] = a[(s1, 0)] / ndu[(pk + 1, rk as usize)];
                    d = a[(s2, 0)] * ndu[(rk as usize, pk)];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize {
                    k - 1
                } else {
                    p - r
                };
                for j in j1..=j2 {
                    a[(s2, j)] = (a[(s1, j)] - a[(s1, j - 1)])
                        / ndu[(pk + 1, (rk + j as isize) as usize)];
                    d += a[(s2, j)] * ndu[((rk + j as isize) as usize, pk)];
                }
                if r <= pk {
                    a[(s2, k)] = -a[(s1, k - 1)] / ndu[(pk + 1, r)];
                    d += a[(s2, k)] * ndu[(r, pk)];
                }
                ders[k][r] = d;
                core::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=kd {
            for j in 0..=p {
                ders[k][j] *= factor;
            }
            factor *= (p - k) as f64;
        }
        Ok((span, ders))
    }

    /// Multiplicity of `u` in the vector, counted with [`KNOT_EQ_TOL`].
    pub fn multiplicity(&self, u: f64) -> usize {
        self.knots
            .iter()
            .filter(|&&k| fmath::abs(k - u) <= KNOT_EQ_TOL)
            .count()
    }

    /// Insert the (sorted internally) knots and return the refined vector
    /// together with the subdivision matrix `M` (`n_fine x n_coarse`) that
    /// maps coarse homogeneous control points to fine ones. Each row of `M`
    /// is non-negative and sums to one.
    pub fn insert_knots(&self, new_knots: &[f64]) -> Result<(KnotVector, DMat), SplineError> {
        let p = self.degree;
        let mut sorted: Vec<f64> = new_knots.into();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN knot"));
        for &u in &sorted {
            if !(u > KNOT_EQ_TOL && u < 1.0 - KNOT_EQ_TOL) {
                return Err(SplineError::InvalidRefinement { knot: u });
            }
        }
        let mut knots = self.knots.clone();
        let mut m = DMat::identity(self.num_basis());
        for &u in &sorted {
            let mult = knots
                .iter()
                .filter(|&&k| fmath::abs(k - u) <= KNOT_EQ_TOL)
                .count();
            if mult >= p {
                return Err(SplineError::InvalidRefinement { knot: u });
            }
            let work = KnotVector {
                degree: p,
                knots: knots.clone(),
            };
            let span = work.find_span(u)?;
            let n_old = work.num_basis();
            // single Boehm insertion: E is (n_old + 1) x n_old
            let mut e = DMat::zeros(n_old + 1, n_old);
            for i in 0..=n_old {
                if i <= span - p {
                    e[(i, i)] = 1.0;
                } else if i <= span {
                    let denom = knots[i + p] - knots[i];
                    let alpha = if denom > 0.0 { (u - knots[i]) / denom } else { 0.0 };
                    e[(i, i)] = alpha;
                    e[(i, i - 1)] = 1.0 - alpha;
                } else {
                    e[(i, i - 1)] = 1.0;
                }
            }
            m = e.matmul(&m);
            knots.insert(span + 1, u);
        }
        Ok((
            KnotVector {
                degree: p,
                knots,
            },
            m,
        ))
    }

    /// True when `other` contains every knot of `self` (with multiplicity)
    /// restricted to the half-open interval `(lo, hi)`, i.e. `other` refines
    /// `self` there.
    pub fn refines_within(&self, other: &KnotVector, lo: f64, hi: f64) -> bool {
        if self.degree != other.degree {
            return false;
        }
        let interior = |kv: &KnotVector| {
            let mut out: Vec<f64> = Vec::new();
            for &k in &kv.knots {
                if k > lo + KNOT_EQ_TOL && k < hi - KNOT_EQ_TOL {
                    out.push(k);
                }
            }
            out
        };
        let coarse = interior(self);
        let fine = interior(other);
        let mut j = 0usize;
        for &k in &coarse {
            loop {
                if j >= fine.len() {
                    return false;
                }
                if fmath::abs(fine[j] - k) <= KNOT_EQ_TOL {
                    j += 1;
                    break;
                }
                if fine[j] > k {
                    return false;
                }
                j += 1;
            }
        }
        true
    }
}

/// Basis values and parametric derivatives of the locally supported
/// `(p+1)(q+1)` rational functions at one parametric point.
///
/// Local index `a = j_local * (p + 1) + i_local`; the grid indices are
/// `i = span_xi - p + i_local`, `j = span_eta - q + j_local`.
#[derive(Clone, Debug)]
pub struct BasisEval {
    /// Knot span in the xi direction.
    pub span_xi: usize,
    /// Knot span in the eta direction.
    pub span_eta: usize,
    /// Rational basis values `R`.
    pub values: Vec<f64>,
    /// First parametric derivatives dR/dxi.
    pub d_xi: Vec<f64>,
    /// First parametric derivatives dR/deta.
    pub d_eta: Vec<f64>,
    /// Second parametric derivatives d2R/dxi2 (empty when not requested).
    pub d_xixi: Vec<f64>,
    /// Mixed second parametric derivatives d2R/dxideta (empty when not requested).
    pub d_xieta: Vec<f64>,
    /// Second parametric derivatives d2R/deta2 (empty when not requested).
    pub d_etaeta: Vec<f64>,
}

/// Tensor-product NURBS surface patch in 2-D physical space.
///
/// Control points and weights are stored in an `n x m` grid flattened as
/// `index = j * n + i` with `i` running along xi.
#[derive(Clone, Debug)]
pub struct NurbsPatch {
    knots_xi: KnotVector,
    knots_eta: KnotVector,
    control_points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl NurbsPatch {
    /// Validate and build a patch.
    pub fn new(
        knots_xi: KnotVector,
        knots_eta: KnotVector,
        control_points: Vec<[f64; 2]>,
        weights: Vec<f64>,
    ) -> Result<Self, SplineError> {
        let n = knots_xi.num_basis();
        let m = knots_eta.num_basis();
        if control_points.len() != n * m || weights.len() != n * m {
            return Err(SplineError::GridMismatch);
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(SplineError::NonPositiveWeight);
        }
        Ok(Self {
            knots_xi,
            knots_eta,
            control_points,
            weights,
        })
    }

    /// Knot vector along xi.
    pub fn knots_xi(&self) -> &KnotVector {
        &self.knots_xi
    }

    /// Knot vector along eta.
    pub fn knots_eta(&self) -> &KnotVector {
        &self.knots_eta
    }

    /// Basis count along xi.
    pub fn n_xi(&self) -> usize {
        self.knots_xi.num_basis()
    }

    /// Basis count along eta.
    pub fn n_eta(&self) -> usize {
        self.knots_eta.num_basis()
    }

    /// Total control point count.
    pub fn num_nodes(&self) -> usize {
        self.control_points.len()
    }

    /// Control point at grid `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        self.control_points[j * self.n_xi() + i]
    }

    /// Weight at grid `(i, j)`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[j * self.n_xi() + i]
    }

    /// Flattened control points (`j * n_xi + i` layout).
    pub fn control_points(&self) -> &[[f64; 2]] {
        &self.control_points
    }

    /// Flattened weights (`j * n_xi + i` layout).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rational basis values and parametric derivatives at `(xi, eta)`.
    /// `max_deriv` of 0, 1 or 2 controls how many derivative arrays are
    /// populated.
    pub fn basis_2d(&self, xi: f64, eta: f64, max_deriv: usize) -> Result<BasisEval, SplineError> {
        let p = self.knots_xi.degree();
        let q = self.knots_eta.degree();
        let (span_xi, nd) = self.knots_xi.basis_derivs(xi, core::cmp::min(max_deriv, 2))?;
        let (span_eta, md) = self.knots_eta.basis_derivs(eta, core::cmp::min(max_deriv, 2))?;
        let n_loc = (p + 1) * (q + 1);

        // homogeneous sums A^(a,b) per function and W^(a,b)
        let orders: &[(usize, usize)] = match max_deriv {
            0 => &[(0, 0)],
            1 => &[(0, 0), (1, 0), (0, 1)],
            _ => &[(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)],
        };
        let mut a = [[0.0f64; 6]; 1]; // placeholder to appease sizing below
        let _ = &mut a;
        let mut av: Vec<[f64; 6]> = vec![[0.0; 6]; n_loc];
        let mut w = [0.0f64; 6];
        for (oi, &(dx, dy)) in orders.iter().enumerate() {
            for jl in 0..=q {
                let gj = span_eta - q + jl;
                for il in 0..=p {
                    let gi = span_xi - p + il;
                    let wgt = self.weight(gi, gj);
                    let v = nd[dx][il] * md[dy][jl] * wgt;
                    av[jl * (p + 1) + il][oi] = v;
                    w[oi] += v;
                }
            }
        }

        let w0 = w[0];
        let mut out = BasisEval {
            span_xi,
            span_eta,
            values: vec![0.0; n_loc],
            d_xi: Vec::new(),
            d_eta: Vec::new(),
            d_xixi: Vec::new(),
            d_xieta: Vec::new(),
            d_etaeta: Vec::new(),
        };
        for a in 0..n_loc {
            out.values[a] = av[a][0] / w0;
        }
        if max_deriv >= 1 {
            out.d_xi = vec![0.0; n_loc];
            out.d_eta = vec![0.0; n_loc];
            let (wx, wy) = (w[1], w[2]);
            for a in 0..n_loc {
                let v = av[a][0];
                out.d_xi[a] = av[a][1] / w0 - v * wx / (w0 * w0);
                out.d_eta[a] = av[a][2] / w0 - v * wy / (w0 * w0);
            }
        }
        if max_deriv >= 2 {
            out.d_xixi = vec![0.0; n_loc];
            out.d_xieta = vec![0.0; n_loc];
            out.d_etaeta = vec![0.0; n_loc];
            let (wx, wy, wxx, wxy, wyy) = (w[1], w[2], w[3], w[4], w[5]);
            let w2 = w0 * w0;
            let w3 = w2 * w0;
            for a in 0..n_loc {
                let (v, vx, vy, vxx, vxy, vyy) =
                    (av[a][0], av[a][1], av[a][2], av[a][3], av[a][4], av[a][5]);
                out.d_xixi[a] =
                    vxx / w0 - 2.0 * vx * wx / w2 - v * wxx / w2 + 2.0 * v * wx * wx / w3;
                out.d_etaeta[a] =
                    vyy / w0 - 2.0 * vy * wy / w2 - v * wyy / w2 + 2.0 * v * wy * wy / w3;
                out.d_xieta[a] = vxy / w0 - vx * wy / w2 - vy * wx / w2 - v * wxy / w2
                    + 2.0 * v * wx * wy / w3;
            }
        }
        Ok(out)
    }

    /// Physical surface point at `(xi, eta)`.
    pub fn evaluate(&self, xi: f64, eta: f64) -> Result<[f64; 2], SplineError> {
        let ev = self.basis_2d(xi, eta, 0)?;
        let p = self.knots_xi.degree();
        let q = self.knots_eta.degree();
        let mut pt = [0.0, 0.0];
        for jl in 0..=q {
            for il in 0..=p {
                let a = jl * (p + 1) + il;
                let cp = self.point(ev.span_xi - p + il, ev.span_eta - q + jl);
                pt[0] += ev.values[a] * cp[0];
                pt[1] += ev.values[a] * cp[1];
            }
        }
        Ok(pt)
    }

    /// Insert knots into one parametric direction; returns the refined patch
    /// and the univariate subdivision matrix.
    pub fn insert_knots(
        &self,
        direction: Direction,
        new_knots: &[f64],
    ) -> Result<(NurbsPatch, DMat), SplineError> {
        let (n, m) = (self.n_xi(), self.n_eta());
        match direction {
            Direction::Xi => {
                let (fine, mat) = self.knots_xi.insert_knots(new_knots)?;
                let nf = fine.num_basis();
                let mut cp = vec![[0.0; 2]; nf * m];
                let mut wt = vec![0.0; nf * m];
                for j in 0..m {
                    for fi in 0..nf {
                        let mut acc = [0.0f64; 3];
                        for ci in 0..n {
                            let c = mat[(fi, ci)];
                            if c == 0.0 {
                                continue;
                            }
                            let wgt = self.weight(ci, j);
                            let pt = self.point(ci, j);
                            acc[0] += c * wgt * pt[0];
                            acc[1] += c * wgt * pt[1];
                            acc[2] += c * wgt;
                        }
                        cp[j * nf + fi] = [acc[0] / acc[2], acc[1] / acc[2]];
                        wt[j * nf + fi] = acc[2];
                    }
                }
                Ok((
                    NurbsPatch::new(fine, self.knots_eta.clone(), cp, wt)?,
                    mat,
                ))
            }
            Direction::Eta => {
                let (fine, mat) = self.knots_eta.insert_knots(new_knots)?;
                let mf = fine.num_basis();
                let mut cp = vec![[0.0; 2]; n * mf];
                let mut wt = vec![0.0; n * mf];
                for i in 0..n {
                    for fj in 0..mf {
                        let mut acc = [0.0f64; 3];
                        for cj in 0..m {
                            let c = mat[(fj, cj)];
                            if c == 0.0 {
                                continue;
                            }
                            let wgt = self.weight(i, cj);
                            let pt = self.point(i, cj);
                            acc[0] += c * wgt * pt[0];
                            acc[1] += c * wgt * pt[1];
                            acc[2] += c * wgt;
                        }
                        cp[fj * n + i] = [acc[0] / acc[2], acc[1] / acc[2]];
                        wt[fj * n + i] = acc[2];
                    }
                }
                Ok((
                    NurbsPatch::new(self.knots_xi.clone(), fine, cp, wt)?,
                    mat,
                ))
            }
        }
    }
}

/// Parametric direction selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// First parametric direction.
    Xi,
    /// Second parametric direction.
    Eta,
}

/// Gauss-Legendre abscissae and weights on `[-1, 1]`, exact for polynomials
/// of degree `2n - 1`. Supports `1..=10` points.
pub fn gauss_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>), SplineError> {
    if !(1..=10).contains(&n) {
        return Err(SplineError::GaussPointsOutOfRange { n });
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n / 2;
    for i in 0..(n + 1) / 2 {
        let mut t = fmath::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        // Newton on P_n(t)
        for _ in 0..100 {
            let (pn, dpn) = legendre(n, t);
            let dt = pn / dpn;
            t -= dt;
            if fmath::abs(dt) < 1e-16 {
                break;
            }
        }
        let (_, dpn) = legendre(n, t);
        let wi = 2.0 / ((1.0 - t * t) * dpn * dpn);
        x[i] = -fmath::abs(t);
        x[n - 1 - i] = fmath::abs(t);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[half] = 0.0;
        let (_, dpn) = legendre(n, 0.0);
        w[half] = 2.0 / (dpn * dpn);
    }
    Ok((x, w))
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_knots() -> KnotVector {
        KnotVector::new(
            2,
            vec![0.0, 0.0, 0.0, 0.25, 0.5, 0.75, 0.75, 1.0, 1.0, 1.0],
        )
        .unwrap()
    }

    /// Naive Cox-de Boor recursion, used as an independent oracle.
    fn cox_de_boor(kn: &[f64], i: usize, p: usize, u: f64) -> f64 {
        if p == 0 {
            let inside = kn[i] <= u && u < kn[i + 1];
            // close the last nonzero interval at u = 1
            let at_end = u >= 1.0 && kn[i] < 1.0 && kn[i + 1] >= 1.0;
            return if inside || at_end { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = kn[i + p] - kn[i];
        if d1 > 0.0 {
            v += (u - kn[i]) / d1 * cox_de_boor(kn, i, p - 1, u);
        }
        let d2 = kn[i + p + 1] - kn[i + 1];
        if d2 > 0.0 {
            v += (kn[i + p + 1] - u) / d2 * cox_de_boor(kn, i + 1, p - 1, u);
        }
        v
    }

    #[test]
    fn find_span_single_interior() {
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(kv.find_span(0.3).unwrap(), 2);
        assert_eq!(kv.find_span(1.0).unwrap(), 2);
    }

    #[test]
    fn find_span_matches_linear_scan() {
        let kv = fig1_knots();
        // oracle: linear scan for knots[i] <= u < knots[i+1]
        let u = 0.6;
        let oracle = (0..kv.knots().len() - 1)
            .find(|&i| kv.knots()[i] <= u && u < kv.knots()[i + 1])
            .unwrap();
        assert_eq!(kv.find_span(u).unwrap(), oracle);
        // 0.6 lies in [0.5, 0.75)
        assert_eq!(kv.knots()[oracle], 0.5);
        assert_eq!(kv.knots()[oracle + 1], 0.75);
    }

    #[test]
    fn find_span_rejects_out_of_domain() {
        let kv = fig1_knots();
        assert!(kv.find_span(-0.2).is_err());
        assert!(kv.find_span(1.2).is_err());
    }

    #[test]
    fn quadratic_bernstein_values() {
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let (_, d) = kv.basis_derivs(0.5, 0).unwrap();
        assert!((d[0][0] - 0.25).abs() < 1e-15);
        assert!((d[0][1] - 0.5).abs() < 1e-15);
        assert!((d[0][2] - 0.25).abs() < 1e-15);
        let (_, d) = kv.basis_derivs(0.0, 0).unwrap();
        assert!((d[0][0] - 1.0).abs() < 1e-15);
        assert!(d[0][1].abs() < 1e-15 && d[0][2].abs() < 1e-15);
    }

    #[test]
    fn doubled_knot_interpolates() {
        // At the doubled knot 0.75 exactly one basis function is 1.
        let kv = fig1_knots();
        let (span, d) = kv.basis_derivs(0.75, 0).unwrap();
        let mut ones = 0;
        for (j, &v) in d[0].iter().enumerate() {
            let gi = span - 2 + j;
            let oracle = cox_de_boor(kv.knots(), gi, 2, 0.75);
            assert!((v - oracle).abs() < 1e-12, "basis {gi}: {v} vs {oracle}");
            if (v - 1.0).abs() < 1e-12 {
                ones += 1;
            } else {
                assert!(v.abs() < 1e-12);
            }
        }
        assert_eq!(ones, 1);
    }

    #[test]
    fn values_match_cox_de_boor_oracle() {
        let kv = fig1_knots();
        for &u in &[0.0, 0.1, 0.25, 0.4, 0.5, 0.6, 0.74, 0.75, 0.9, 1.0] {
            let (span, d) = kv.basis_derivs(u, 0).unwrap();
            for j in 0..=2 {
                let gi = span - 2 + j;
                let oracle = cox_de_boor(kv.knots(), gi, 2, u);
                assert!(
                    (d[0][j] - oracle).abs() < 1e-12,
                    "u={u} basis {gi}: {} vs {oracle}",
                    d[0][j]
                );
            }
        }
    }

    #[test]
    fn partition_of_unity_and_deriv_sums() {
        let kv = fig1_knots();
        for k in 0..=40 {
            let u = k as f64 / 40.0;
            let (_, d) = kv.basis_derivs(u, 2).unwrap();
            let s0: f64 = d[0].iter().sum();
            let s1: f64 = d[1].iter().sum();
            let s2: f64 = d[2].iter().sum();
            assert!((s0 - 1.0).abs() < 1e-13);
            assert!(s1.abs() < 1e-11);
            assert!(s2.abs() < 1e-9);
        }
    }

    #[test]
    fn derivs_beyond_degree_are_zero() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 0.5, 1.0, 1.0]).unwrap();
        let (_, d) = kv.basis_derivs(0.3, 2).unwrap();
        assert!(d[2].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn insertion_boehm_rule() {
        // insert 0.5 into {0,0,0,1,1,1}: rows map P -> [P0, (P0+P1)/2, (P1+P2)/2, P2]
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let (fine, m) = kv.insert_knots(&[0.5]).unwrap();
        assert_eq!(fine.num_basis(), 4);
        let expect = [
            [1.0, 0.0, 0.0],
            [0.5, 0.5, 0.0],
            [0.0, 0.5, 0.5],
            [0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..3 {
                assert!((m[(i, j)] - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn insertion_rows_sum_to_one() {
        let kv = fig1_knots();
        let (_, m) = kv.insert_knots(&[0.1, 0.3, 0.3, 0.6]).unwrap();
        for i in 0..m.rows() {
            let s: f64 = m.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            assert!(m.row(i).iter().all(|&v| v >= -1e-15));
        }
    }

    #[test]
    fn insertion_empty_is_identity() {
        let kv = fig1_knots();
        let (fine, m) = kv.insert_knots(&[]).unwrap();
        assert_eq!(fine, kv);
        assert_eq!(m, DMat::identity(kv.num_basis()));
    }

    #[test]
    fn insertion_multiplicity_overflow_rejected() {
        let kv = fig1_knots();
        // 0.75 already has multiplicity 2 = p: further insertion must fail
        assert!(matches!(
            kv.insert_knots(&[0.75]),
            Err(SplineError::InvalidRefinement { .. })
        ));
        assert!(kv.insert_knots(&[0.0]).is_err());
    }

    fn unit_square(p: usize, q: usize, nel: usize) -> NurbsPatch {
        let kx = KnotVector::open_uniform(p, nel);
        let ky = KnotVector::open_uniform(q, nel);
        let (n, m) = (kx.num_basis(), ky.num_basis());
        // Greville points give a valid geometry
        let gre = |kv: &KnotVector, i: usize| {
            let p = kv.degree();
            kv.knots()[i + 1..i + 1 + p].iter().sum::<f64>() / p as f64
        };
        let mut cp = Vec::new();
        for j in 0..m {
            for i in 0..n {
                cp.push([gre(&kx, i), gre(&ky, j)]);
            }
        }
        NurbsPatch::new(kx, ky, cp, vec![1.0; n * m]).unwrap()
    }

    #[test]
    fn surface_corners_interpolate() {
        let p = unit_square(2, 2, 3);
        let c = p.evaluate(0.0, 0.0).unwrap();
        assert!((c[0] - p.point(0, 0)[0]).abs() < 1e-15);
        assert!((c[1] - p.point(0, 0)[1]).abs() < 1e-15);
        let c = p.evaluate(1.0, 1.0).unwrap();
        let last = p.point(p.n_xi() - 1, p.n_eta() - 1);
        assert!((c[0] - last[0]).abs() < 1e-14);
        assert!((c[1] - last[1]).abs() < 1e-14);
    }

    #[test]
    fn bilinear_midpoint_is_mean_of_corners() {
        let kx = KnotVector::open_uniform(1, 1);
        let ky = KnotVector::open_uniform(1, 1);
        let cp = vec![[0.0, 0.0], [2.0, 0.0], [0.5, 3.0], [2.5, 3.0]];
        let p = NurbsPatch::new(kx, ky, cp.clone(), vec![1.0; 4]).unwrap();
        let c = p.evaluate(0.5, 0.5).unwrap();
        let mean = [
            (cp[0][0] + cp[1][0] + cp[2][0] + cp[3][0]) / 4.0,
            (cp[0][1] + cp[1][1] + cp[2][1] + cp[3][1]) / 4.0,
        ];
        assert!((c[0] - mean[0]).abs() < 1e-15);
        assert!((c[1] - mean[1]).abs() < 1e-15);
    }

    #[test]
    fn surface_invariant_under_insertion() {
        let p = unit_square(3, 2, 2);
        let (fine, _) = p.insert_knots(Direction::Xi, &[0.2, 0.5, 0.7]).unwrap();
        let (fine, _) = fine.insert_knots(Direction::Eta, &[0.33, 0.66]).unwrap();
        for k in 0..=10 {
            for l in 0..=10 {
                let (u, v) = (k as f64 / 10.0, l as f64 / 10.0);
                let a = p.evaluate(u, v).unwrap();
                let b = fine.evaluate(u, v).unwrap();
                assert!((a[0] - b[0]).abs() < 1e-14);
                assert!((a[1] - b[1]).abs() < 1e-14);
            }
        }
    }

    /// Quarter circle arc of radius r about the origin: degree 2 with middle
    /// weight sqrt(2)/2 reproduces the circle exactly.
    #[test]
    fn quarter_circle_weights() {
        let r = 2.0;
        let w = core::f64::consts::FRAC_1_SQRT_2;
        let kx = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let ky = KnotVector::open_uniform(1, 1);
        // inner row: quarter arc; outer row: scaled arc (radius 2r)
        let cp = vec![
            [r, 0.0],
            [r, r],
            [0.0, r],
            [2.0 * r, 0.0],
            [2.0 * r, 2.0 * r],
            [0.0, 2.0 * r],
        ];
        let wt = vec![1.0, w, 1.0, 1.0, w, 1.0];
        let p = NurbsPatch::new(kx, ky, cp, wt).unwrap();
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            let pt = p.evaluate(t, 0.0).unwrap();
            let res = pt[0] * pt[0] + pt[1] * pt[1] - r * r;
            assert!(res.abs() < 1e-12, "residual {res} at t={t}");
        }
    }

    #[test]
    fn rational_reduces_to_polynomial_for_unit_weights() {
        let p = unit_square(3, 2, 4);
        let ev = p.basis_2d(0.37, 0.81, 0).unwrap();
        let (_, nd) = p.knots_xi().basis_derivs(0.37, 0).unwrap();
        let (_, md) = p.knots_eta().basis_derivs(0.81, 0).unwrap();
        for jl in 0..=2 {
            for il in 0..=3 {
                let a = jl * 4 + il;
                assert!((ev.values[a] - nd[0][il] * md[0][jl]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gauss_rules_match_closed_forms() {
        let (x, w) = gauss_rule(1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert_eq!(w, vec![2.0]);
        let (x, w) = gauss_rule(2).unwrap();
        let r = 1.0 / 3.0f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_rule(3).unwrap();
        let r = (3.0f64 / 5.0).sqrt();
        assert!((x[0] + r).abs() < 1e-15 && x[1].abs() < 1e-15 && (x[2] - r).abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-15 && (w[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!(gauss_rule(0).is_err() && gauss_rule(11).is_err());
    }

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in 1..=10usize {
            let (x, w) = gauss_rule(n).unwrap();
            let ws: f64 = w.iter().sum();
            assert!((ws - 2.0).abs() < 1e-14);
            // monomial of degree 2n-1 integrates to 0, degree 2n-2 to 2/(2n-1)
            let odd: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(2 * n as i32 - 1))
                .sum();
            assert!(odd.abs() < 1e-13, "n={n} odd moment {odd}");
            let even: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(2 * n as i32 - 2))
                .sum();
            let exact = 2.0 / (2.0 * n as f64 - 1.0);
            assert!((even - exact).abs() < 1e-13, "n={n} even moment {even}");
        }
    }
}
