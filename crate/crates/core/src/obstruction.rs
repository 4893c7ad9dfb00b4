//! Germ systems and the obstruction coefficient `τ + det(M·Mᵀ)` on the sphere.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{norm, rational_sphere_points, sphere_point_at, to_f64_point, SpherePoint, WeightSystem};
use crate::poly::{rational_from_f64, CompiledPoly, Rational, WOrder, WPolynomial};

/// Below this value of the coefficient a direction is treated as obstructed.
pub const OBSTRUCTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    HigherOrder,
    SameOrder,
}

/// A weighted-homogeneous complete intersection with its perturbations.
#[derive(Debug, Clone)]
pub struct GermSystem {
    ws: WeightSystem,
    f_p: Vec<WPolynomial>,
    f_gt: Vec<WPolynomial>,
    p: Vec<u64>,
    delta: WOrder,
    mode: Mode,
    grad: Vec<Vec<WPolynomial>>,
    fp_c: Vec<CompiledPoly>,
    gt_c: Vec<CompiledPoly>,
    grad_c: Vec<Vec<CompiledPoly>>,
    gt_grad_c: Vec<Vec<CompiledPoly>>,
}

impl GermSystem {
    pub fn new(ws: WeightSystem, f_p: Vec<WPolynomial>, f_gt: Vec<WPolynomial>) -> Result<Self> {
        let n = ws.nvars();
        if f_p.is_empty() {
            return Err(Error::NoEquations);
        }
        if f_p.len() != f_gt.len() {
            return Err(Error::LengthMismatch { equations: f_p.len(), perturbations: f_gt.len() });
        }
        if f_p.len() > n {
            return Err(Error::TooManyEquations { c: f_p.len(), n });
        }
        for f in f_p.iter().chain(&f_gt) {
            if f.nvars() != n {
                return Err(Error::NvarsMismatch { left: n, right: f.nvars() });
            }
        }
        let mut p = Vec::with_capacity(f_p.len());
        let mut delta = WOrder::Infinite;
        for (i, (f, g)) in f_p.iter().zip(&f_gt).enumerate() {
            let (homogeneous, deg) = f.weighted_homogeneity(&ws);
            let deg = match (homogeneous, deg) {
                (true, WOrder::Finite(d)) => d,
                _ => return Err(Error::NotWeightedHomogeneous(i)),
            };
            if f.min_total_degree().is_none_or(|d| d < 2) {
                return Err(Error::NotInSquaredMaximalIdeal(i));
            }
            if let WOrder::Finite(og) = g.word(&ws) {
                if og < deg {
                    return Err(Error::PerturbationOrderTooLow(i));
                }
                delta = delta.min(WOrder::Finite(og - deg));
            }
            p.push(deg);
        }
        let mode = if delta == WOrder::Finite(0) { Mode::SameOrder } else { Mode::HigherOrder };
        let grad: Vec<Vec<WPolynomial>> = f_p
            .iter()
            .map(|f| (0..n).map(|j| f.diff(j)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let fp_c = f_p.iter().map(WPolynomial::compile).collect();
        let gt_c = f_gt.iter().map(WPolynomial::compile).collect();
        let grad_c = grad.iter().map(|row| row.iter().map(WPolynomial::compile).collect()).collect();
        let gt_grad_c = f_gt
            .iter()
            .map(|g| (0..n).map(|j| g.diff(j).map(|d| d.compile())).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(GermSystem { ws, f_p, f_gt, p, delta, mode, grad, fp_c, gt_c, grad_c, gt_grad_c })
    }

    pub fn ws(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn nvars(&self) -> usize {
        self.ws.nvars()
    }

    /// Number of equations `c`.
    pub fn codim(&self) -> usize {
        self.f_p.len()
    }

    pub fn f_p(&self) -> &[WPolynomial] {
        &self.f_p
    }

    pub fn f_gt(&self) -> &[WPolynomial] {
        &self.f_gt
    }

    pub fn degrees(&self) -> &[u64] {
        &self.p
    }

    pub fn delta(&self) -> WOrder {
        self.delta
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn p_max(&self) -> u64 {
        *self.p.iter().max().expect("at least one equation")
    }

    pub fn p_min(&self) -> u64 {
        *self.p.iter().min().expect("at least one equation")
    }

    pub fn compiled_f_p(&self) -> &[CompiledPoly] {
        &self.fp_c
    }

    pub fn compiled_f_gt(&self) -> &[CompiledPoly] {
        &self.gt_c
    }

    pub fn eval_f_p(&self, x: &[f64]) -> Vec<f64> {
        self.fp_c.iter().map(|f| f.eval(x)).collect()
    }

    /// `f_p + ε·f_gt` at `x`.
    pub fn eval_family(&self, eps: f64, x: &[f64]) -> Vec<f64> {
        self.fp_c.iter().zip(&self.gt_c).map(|(f, g)| f.eval(x) + eps * g.eval(x)).collect()
    }

    /// Plain Jacobian `∂_j f_{p_i}(x)`.
    pub fn gradient(&self, x: &[f64]) -> DMatrix<f64> {
        let (c, n) = (self.codim(), self.nvars());
        DMatrix::from_fn(c, n, |i, j| self.grad_c[i][j].eval(x))
    }

    /// Jacobian of `f_p + ε·f_gt`.
    pub fn family_gradient(&self, eps: f64, x: &[f64]) -> DMatrix<f64> {
        let (c, n) = (self.codim(), self.nvars());
        DMatrix::from_fn(c, n, |i, j| self.grad_c[i][j].eval(x) + eps * self.gt_grad_c[i][j].eval(x))
    }

    /// Entries `√g_j · ∂_j f_{p_i}(s)` with the group factors `g_j`.
    pub fn rescaled_gradient(&self, s: &[f64]) -> DMatrix<f64> {
        let g = self.ws.group_factors(s);
        let mut m = self.gradient(s);
        for (j, gj) in g.iter().enumerate() {
            let r = gj.sqrt();
            for i in 0..self.codim() {
                m[(i, j)] *= r;
            }
        }
        m
    }

    /// `Σ f_{p_i}(s)²`.
    pub fn tau(&self, s: &[f64]) -> f64 {
        self.fp_c.iter().map(|f| f.eval(s).powi(2)).sum()
    }

    pub fn tau_exact(&self, s: &[Rational]) -> Rational {
        self.f_p.iter().map(|f| f.eval_exact(s).expect("dimension checked").pow(2)).sum()
    }

    /// Gram data of the rescaled gradient at `s`. Falls back to exact arithmetic
    /// on the binary values of `s` when the two floating evaluations of `det A` disagree.
    pub fn gram(&self, s: &[f64]) -> Gram {
        gram_and_adjugate(&self.rescaled_gradient(s)).unwrap_or_else(|_| {
            let exact: Vec<Rational> = s.iter().map(|&x| rational_from_f64(x)).collect();
            let e = self.gram_exact(&exact);
            let c = e.a.len();
            let to = |v: &Vec<Vec<Rational>>| DMatrix::from_fn(c, c, |i, j| v[i][j].to_f64().unwrap_or(f64::NAN));
            Gram { a: to(&e.a), adj: to(&e.adj), det: e.det.to_f64().unwrap_or(f64::NAN) }
        })
    }

    /// `τ(s) + det A(s)`.
    pub fn obstruction_coefficient(&self, s: &[f64]) -> f64 {
        self.tau(s) + self.gram(s).det
    }

    /// Exact twin of [`GermSystem::obstruction_coefficient`] at a rational point.
    pub fn obstruction_coefficient_exact(&self, s: &[Rational]) -> Rational {
        self.tau_exact(s) + self.gram_exact(s).det
    }

    /// `A = ∇f·diag(g)·∇fᵀ` in exact arithmetic (no square roots needed).
    pub fn gram_exact(&self, s: &[Rational]) -> ExactGram {
        let (c, n) = (self.codim(), self.nvars());
        let g = self.ws.group_factors_exact(s);
        let grad: Vec<Vec<Rational>> = self
            .grad
            .iter()
            .map(|row| row.iter().map(|d| d.eval_exact(s).expect("dimension checked")).collect())
            .collect();
        let a: Vec<Vec<Rational>> = (0..c)
            .map(|i| {
                (0..c)
                    .map(|k| (0..n).map(|j| &grad[i][j] * &g[j] * &grad[k][j]).sum())
                    .collect()
            })
            .collect();
        let (adj, det) = adjugate_exact(&a);
        ExactGram { a, adj, det }
    }

    pub fn is_obstructed(&self, s: &[f64], tol: f64) -> bool {
        self.obstruction_coefficient(s) < tol
    }
}

/// `A = M·Mᵀ` with its adjugate and determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    pub a: DMatrix<f64>,
    pub adj: DMatrix<f64>,
    pub det: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactGram {
    pub a: Vec<Vec<Rational>>,
    pub adj: Vec<Vec<Rational>>,
    pub det: Rational,
}

pub const CAUCHY_BINET_RTOL: f64 = 1e-10;

/// `Σ` over `c×c` column blocks of `det(block)²`.
pub fn sum_squared_minors(m: &DMatrix<f64>) -> f64 {
    let c = m.nrows();
    (0..m.ncols())
        .combinations(c)
        .map(|cols| {
            let block = m.select_columns(cols.iter());
            block.determinant().powi(2)
        })
        .sum()
}

/// Gram matrix, adjugate and determinant of `M·Mᵀ`, with `det` cross-checked
/// against the sum of squared maximal minors.
pub fn gram_and_adjugate(m: &DMatrix<f64>) -> Result<Gram> {
    let c = m.nrows();
    if c > m.ncols() {
        return Err(Error::TooManyEquations { c, n: m.ncols() });
    }
    let a = m * m.transpose();
    let det = a.determinant();
    let minors = sum_squared_minors(m);
    // Hadamard: |det A| ≤ Π ‖row_i‖², the natural scale for rounding in det
    let scale: f64 = m.row_iter().map(|r| r.norm_squared()).product();
    if (det - minors).abs() > CAUCHY_BINET_RTOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::CauchyBinetMismatch { gram: det, minors });
    }
    Ok(Gram { adj: adjugate(&a), a, det })
}

/// Classical adjugate; the empty-minor convention gives `[1]` for `1×1`.
pub fn adjugate(a: &DMatrix<f64>) -> DMatrix<f64> {
    let c = a.nrows();
    if c == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(c, c, |i, j| {
        let minor = a.clone().remove_row(j).remove_column(i);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn det_exact(a: &[Vec<Rational>]) -> Rational {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = Rational::from_integer(1.into());
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for k in col..n {
                let v = &f * &m[col][k];
                m[r][k] -= v;
            }
        }
    }
    det
}

/// Exact adjugate and determinant.
pub fn adjugate_exact(a: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Rational) {
    let c = a.len();
    let det = det_exact(a);
    if c == 1 {
        return (vec![vec![Rational::from_integer(1.into())]], det);
    }
    let adj = (0..c)
        .map(|i| {
            (0..c)
                .map(|j| {
                    let minor: Vec<Vec<Rational>> = a
                        .iter()
                        .enumerate()
                        .filter(|(r, _)| *r != j)
                        .map(|(_, row)| row.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| v.clone()).collect())
                        .collect();
                    let d = det_exact(&minor);
                    if (i + j) % 2 == 0 {
                        d
                    } else {
                        -d
                    }
                })
                .collect()
        })
        .collect();
    (adj, det)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SigmaTrivial,
    SigmaNontrivial,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub s: Vec<f64>,
    pub coefficient: f64,
}

/// Result of searching the sphere for zeros of the obstruction coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub min_coeff: f64,
    /// Smallest values after descent, ascending.
    pub witness_points: Vec<Witness>,
    /// Rational sphere points where the coefficient is exactly zero, as `p/q` strings.
    pub exact_zeros: Vec<Vec<String>>,
    pub verdict: Verdict,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

const DESCENT_STARTS: usize = 10;
const DESCENT_STEPS: usize = 200;

pub(crate) fn project_tangent(s: &[f64], v: &mut [f64]) {
    let d: f64 = s.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    for (vi, si) in v.iter_mut().zip(s) {
        *vi -= d * si;
    }
}

pub(crate) fn normalize(v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// Projected gradient descent with backtracking on the sphere.
fn descend(gs: &GermSystem, start: &[f64]) -> (Vec<f64>, f64) {
    let f = |s: &[f64]| gs.obstruction_coefficient(s);
    let mut s = start.to_vec();
    let mut val = f(&s);
    let mut step = 0.1;
    for _ in 0..DESCENT_STEPS {
        if val == 0.0 {
            break;
        }
        let h = 1e-7;
        let mut g: Vec<f64> = (0..s.len())
            .map(|j| {
                let mut a = s.clone();
                let mut b = s.clone();
                a[j] += h;
                b[j] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect();
        project_tangent(&s, &mut g);
        let gn = norm(&g);
        if gn == 0.0 {
            break;
        }
        let mut accepted = false;
        while step > 1e-14 {
            let trial = normalize(s.iter().zip(&g).map(|(x, d)| x - step * d / gn).collect());
            let tv = f(&trial);
            if tv < val {
                s = trial;
                val = tv;
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (s, val)
}

fn rational_text(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Sample the coefficient, test exact rational points, then refine the smallest
/// samples by local descent.
pub fn scan_link(gs: &GermSystem, n: usize, seed: u64, tol: f64) -> Result<ObstructionReport> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let nv = gs.nvars();
    let mut probes: Vec<(Vec<f64>, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sphere_point_at(i, nv, seed).into_vec();
            let v = gs.obstruction_coefficient(&s);
            (s, v)
        })
        .collect();
    let rational_pts = rational_sphere_points(nv, None);
    let exact: Vec<(Vec<Rational>, bool)> = rational_pts
        .into_par_iter()
        .map(|p| {
            let zero = gs.obstruction_coefficient_exact(&p).is_zero();
            (p, zero)
        })
        .collect();
    let mut exact_zeros = Vec::new();
    for (p, zero) in &exact {
        let f = to_f64_point(p);
        if *zero {
            exact_zeros.push(p.iter().map(rational_text).collect());
            probes.push((f, 0.0));
        } else {
            let v = gs.obstruction_coefficient(&f);
            probes.push((f, v));
        }
    }
    probes.sort_by(|a, b| a.1.total_cmp(&b.1));
    let starts: Vec<Vec<f64>> = probes.iter().filter(|p| p.1 > 0.0).take(DESCENT_STARTS).map(|p| p.0.clone()).collect();
    let descended: Vec<(Vec<f64>, f64)> = starts.par_iter().map(|s| descend(gs, s)).collect();
    let descent_min = descended.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let mut witnesses: Vec<(Vec<f64>, f64)> = descended;
    witnesses.extend(probes.iter().filter(|p| p.1 == 0.0).cloned());
    witnesses.sort_by(|a, b| a.1.total_cmp(&b.1));
    witnesses.truncate(DESCENT_STARTS);
    let min_coeff = probes.first().map(|p| p.1).unwrap_or(f64::INFINITY).min(descent_min);
    let verdict = if !exact_zeros.is_empty() || descent_min < tol * tol {
        Verdict::SigmaNontrivial
    } else if min_coeff >= tol {
        Verdict::SigmaTrivial
    } else {
        Verdict::Inconclusive
    };
    Ok(ObstructionReport {
        min_coeff,
        witness_points: witnesses.into_iter().map(|(s, coefficient)| Witness { s, coefficient }).collect(),
        exact_zeros,
        verdict,
        samples: n,
        seed,
        tol,
    })
}

/// Gauss–Newton projection of `start` onto `V(f_p) ∩ 𝕊`.
pub fn project_to_link(gs: &GermSystem, start: &[f64]) -> Option<SpherePoint> {
    let mut s = normalize(start.to_vec());
    for _ in 0..60 {
        let f = DMatrix::from_vec(gs.codim(), 1, gs.eval_f_p(&s));
        let scale: f64 = gs.compiled_f_p().iter().map(|p| p.eval_abs(&s)).fold(0.0, f64::max).max(1.0);
        if f.norm() <= 1e-15 * scale {
            return SpherePoint::normalized(s).ok();
        }
        let mut j = gs.gradient(&s);
        for mut row in j.row_iter_mut() {
            let mut r: Vec<f64> = row.iter().cloned().collect();
            project_tangent(&s, &mut r);
            for (k, v) in r.into_iter().enumerate() {
                row[k] = v;
            }
        }
        let jjt = &j * j.transpose();
        let y = jjt.lu().solve(&f)?;
        let delta = j.transpose() * y;
        s = normalize(s.iter().zip(delta.iter()).map(|(a, d)| a - d).collect());
        if !s.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    let resid = norm(&gs.eval_f_p(&s));
    (resid <= 1e-13).then(|| SpherePoint::normalized(s).ok()).flatten()
}

/// Up to `count` distinct link points (distance > 1e-8) projected from seeded random starts.
pub fn find_link_points(gs: &GermSystem, count: usize, seed: u64) -> Vec<SpherePoint> {
    let nv = gs.nvars();
    let mut out: Vec<SpherePoint> = Vec::new();
    let batch = 64u64;
    let mut next = 0u64;
    let budget = (count as u64 * 40).max(400);
    while out.len() < count && next < budget {
        let found: Vec<Option<SpherePoint>> = (next..next + batch)
            .into_par_iter()
            .map(|i| project_to_link(gs, sphere_point_at(i, nv, seed ^ 0x5eed).as_slice()))
            .collect();
        next += batch;
        for p in found.into_iter().flatten() {
            if out.len() >= count {
                break;
            }
            if out.iter().all(|q| crate::geom::dist(q.as_slice(), p.as_slice()) > 1e-8) {
                out.push(p);
            }
        }
    }
    out
}

/// Whether `|f_{p_i}(s)| ≤ tol` for every equation.
pub fn on_link(gs: &GermSystem, s: &[f64], tol: f64) -> bool {
    gs.eval_f_p(s).iter().all(|v| v.abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, rational};
    use proptest::prelude::*;

    fn germ(w: &[u32], vars: &[&str], eqs: &[&str], pert: &[&str]) -> Result<GermSystem> {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let ws = WeightSystem::new(w)?;
        let f = eqs.iter().map(|e| parse_poly(e, &names)).collect::<Result<_>>()?;
        let g = pert.iter().map(|e| parse_poly(e, &names)).collect::<Result<_>>()?;
        GermSystem::new(ws, f, g)
    }

    fn bs() -> GermSystem {
        germ(&[1, 2, 3], &["x", "y", "z"], &["z^5 + x^15 + x*y^7"], &["z*y^6"]).unwrap()
    }

    #[test]
    fn build_examples() {
        let g = bs();
        assert_eq!(g.degrees(), &[15]);
        assert_eq!(g.delta(), WOrder::Finite(0));
        assert_eq!(g.mode(), Mode::SameOrder);

        let t = germ(&[5, 7, 10], &["x", "z", "y"], &["x^7 + z^5 + x*y^3"], &["y^4"]).unwrap();
        assert_eq!(t.degrees(), &[35]);
        assert_eq!(t.delta(), WOrder::Finite(5));
        assert_eq!(t.mode(), Mode::HigherOrder);

        let z = germ(&[1, 1], &["x", "y"], &["x^2 - y^2"], &["0"]).unwrap();
        assert_eq!(z.delta(), WOrder::Infinite);

        assert_eq!(germ(&[1, 1], &["x", "y"], &["x^2 + y^3"], &["0"]).unwrap_err(), Error::NotWeightedHomogeneous(0));
        assert_eq!(germ(&[1, 1], &["x", "y"], &["x^3 - y^3"], &["y^2"]).unwrap_err(), Error::PerturbationOrderTooLow(0));
        assert_eq!(germ(&[1, 1], &["x", "y"], &["x + y"], &["0"]).unwrap_err(), Error::NotInSquaredMaximalIdeal(0));
    }

    #[test]
    fn rescaled_gradient_examples() {
        let q = germ(&[1, 1], &["x", "y"], &["x^2 - y^2"], &["y^3"]).unwrap();
        let m = q.rescaled_gradient(&[0.6, 0.8]);
        assert!((m[(0, 0)] - 1.2).abs() < 1e-15 && (m[(0, 1)] + 1.6).abs() < 1e-15);
        let g = bs();
        assert_eq!(g.rescaled_gradient(&[0.0, 1.0, 0.0]).iter().cloned().collect::<Vec<_>>(), vec![0.0; 3]);
        assert_eq!(g.rescaled_gradient(&[0.0, 0.0, 1.0]).iter().cloned().collect::<Vec<_>>(), vec![0.0, 0.0, 5.0]);
    }

    #[test]
    fn gram_examples() {
        let m = DMatrix::from_row_slice(1, 2, &[1.2, -1.6]);
        let g = gram_and_adjugate(&m).unwrap();
        assert!((g.det - 4.0).abs() < 1e-14);
        assert_eq!(g.adj[(0, 0)], 1.0);
        let z = gram_and_adjugate(&DMatrix::zeros(1, 3)).unwrap();
        assert_eq!((z.det, z.adj[(0, 0)]), (0.0, 1.0));

        let a = vec![vec![rational(2, 1), rational(-3, 1)], vec![rational(5, 1), rational(7, 1)]];
        let (adj, det) = adjugate_exact(&a);
        assert_eq!(det, rational(29, 1));
        for i in 0..2 {
            for k in 0..2 {
                let v: Rational = (0..2).map(|j| &adj[i][j] * &a[j][k]).sum();
                assert_eq!(v, if i == k { det.clone() } else { rational(0, 1) });
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let q = germ(&[1, 1], &["x", "y"], &["x^2 - y^2"], &["y^3"]).unwrap();
        assert!((q.tau(&[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((q.obstruction_coefficient(&[1.0, 0.0]) - 5.0).abs() < 1e-14);
        let g = bs();
        let one = rational(1, 1);
        let zero = rational(0, 1);
        assert!(g.obstruction_coefficient_exact(&[zero.clone(), one.clone(), zero.clone()]).is_zero());
        assert_eq!(g.tau(&[0.0, 1.0, 0.0]), 0.0);
        assert_eq!(g.obstruction_coefficient_exact(&[zero.clone(), zero.clone(), one.clone()]), rational(26, 1));
        assert!(g.is_obstructed(&[0.0, 1.0, 0.0], OBSTRUCTION_TOL));
        assert!(!g.is_obstructed(&[0.0, 0.0, 1.0], OBSTRUCTION_TOL));
    }

    #[test]
    fn flag_columns_vanish() {
        let g = bs();
        let m = g.rescaled_gradient(&[0.0, 0.6, 0.8]);
        assert_eq!(m[(0, 0)], 0.0);
    }

    #[test]
    fn exact_and_float_paths_agree_on_rational_points() {
        let g = bs();
        for p in rational_sphere_points(3, None) {
            let e = g.obstruction_coefficient_exact(&p).to_f64().unwrap();
            let f = g.obstruction_coefficient(&to_f64_point(&p));
            assert!((e - f).abs() <= 1e-9 * e.abs().max(1e-300) || e == f, "{e} vs {f}");
        }
    }

    #[test]
    fn scan_examples() {
        let q = germ(&[1, 1], &["x", "y"], &["x^2 - y^2"], &["y^3"]).unwrap();
        let r = scan_link(&q, 2000, 42, OBSTRUCTION_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::SigmaTrivial);
        assert!(r.min_coeff >= 4.0 - 1e-6);
        let b = scan_link(&bs(), 500, 42, OBSTRUCTION_TOL).unwrap();
        assert_eq!(b.verdict, Verdict::SigmaNontrivial);
        assert!(b.exact_zeros.contains(&vec!["0".to_string(), "1".to_string(), "0".to_string()]));
        assert!(b.exact_zeros.contains(&vec!["0".to_string(), "-1".to_string(), "0".to_string()]));
    }

    #[test]
    fn link_points_lie_on_link() {
        let g = germ(&[1, 2, 3], &["x", "y", "z"], &["x^6 + y^3 + z^2"], &["y*z^2"]).unwrap();
        let pts = find_link_points(&g, 20, 1);
        assert_eq!(pts.len(), 20);
        for p in &pts {
            assert!(g.eval_f_p(p.as_slice())[0].abs() < 1e-13);
            assert!((norm(p.as_slice()) - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn cauchy_binet_two_paths(entries in proptest::collection::vec(-3.0f64..3.0, 8)) {
            let m = DMatrix::from_row_slice(2, 4, &entries);
            let det = (&m * m.transpose()).determinant();
            let minors = sum_squared_minors(&m);
            let scale: f64 = m.row_iter().map(|r| r.norm_squared()).product();
            prop_assert!((det - minors).abs() <= 1e-10 * scale.max(1e-300));
        }
    }
}
