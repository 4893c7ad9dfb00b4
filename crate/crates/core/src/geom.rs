//! Weight systems, weighted-polar coordinates, sphere sampling and the
//! tangency-order estimator.

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{rational, Rational};

/// Ascending positive integer weights together with the index groups of equal weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSystem {
    omega: Vec<u32>,
    group_ends: Vec<usize>,
    normalized: bool,
}

impl WeightSystem {
    /// Validate and reduce by the gcd. `group_ends` holds one-based ends `r_1 < … < N`.
    pub fn new(raw: &[u32]) -> Result<Self> {
        if raw.is_empty() || raw.iter().any(|&w| w == 0) {
            return Err(Error::NonPositiveWeight);
        }
        if raw.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::NotAscending);
        }
        let g = raw.iter().fold(0u32, |g, &w| g.gcd(&w));
        let omega: Vec<u32> = raw.iter().map(|&w| w / g).collect();
        let mut group_ends: Vec<usize> = (1..omega.len()).filter(|&i| omega[i] != omega[i - 1]).collect();
        group_ends.push(omega.len());
        Ok(WeightSystem { omega, group_ends, normalized: g > 1 })
    }

    pub fn omega(&self) -> &[u32] {
        &self.omega
    }

    pub fn nvars(&self) -> usize {
        self.omega.len()
    }

    pub fn group_ends(&self) -> &[usize] {
        &self.group_ends
    }

    /// Whether the raw weights had a common factor that was divided out.
    pub fn was_normalized(&self) -> bool {
        self.normalized
    }

    pub fn omega_max(&self) -> u32 {
        *self.omega.last().expect("non-empty weights")
    }

    /// `ω_2` (or `ω_1` in one variable).
    pub fn omega_second(&self) -> u32 {
        self.omega[1.min(self.omega.len() - 1)]
    }

    /// One-based end of the weight group containing variable `j`.
    pub fn group_end(&self, j: usize) -> usize {
        *self.group_ends.iter().find(|&&e| e > j).expect("index within weights")
    }

    /// `Σ_{i < groupEnd(j)} s_i²` for every column `j`.
    pub fn group_factors(&self, s: &[f64]) -> Vec<f64> {
        let mut prefix = Vec::with_capacity(s.len() + 1);
        prefix.push(0.0);
        for &x in s {
            prefix.push(prefix.last().unwrap() + x * x);
        }
        (0..s.len()).map(|j| prefix[self.group_end(j)]).collect()
    }

    pub fn group_factors_exact(&self, s: &[Rational]) -> Vec<Rational> {
        let mut prefix = vec![Rational::zero()];
        for x in s {
            let next = prefix.last().unwrap() + x * x;
            prefix.push(next);
        }
        (0..s.len()).map(|j| prefix[self.group_end(j)].clone()).collect()
    }
}

/// A point of the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    pub const NORM_TOL: f64 = 1e-12;

    /// Accept `s` only if its norm is one within [`SpherePoint::NORM_TOL`].
    pub fn new(s: Vec<f64>) -> Result<Self> {
        let n = norm(&s);
        if (n - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::Definition(format!("direction has norm {n}, expected 1")));
        }
        Ok(SpherePoint(s))
    }

    pub fn normalized(s: Vec<f64>) -> Result<Self> {
        let n = norm(&s);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::OriginInput);
        }
        Ok(SpherePoint(s.into_iter().map(|x| x / n).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `x_i = t^{ω_i} s_i`.
pub fn polar_fwd(s: &[f64], t: f64, ws: &WeightSystem) -> Vec<f64> {
    s.iter().zip(ws.omega()).map(|(&si, &w)| t.powi(w as i32) * si).collect()
}

/// Invert [`polar_fwd`]: the unique `t > 0` with `Σ x_i² / t^{2ω_i} = 1`.
pub fn polar_inv(x: &[f64], ws: &WeightSystem, tol: f64) -> Result<(SpherePoint, f64)> {
    if x.len() != ws.nvars() {
        return Err(Error::DimensionMismatch { expected: ws.nvars(), got: x.len() });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::OriginInput);
    }
    let omega = ws.omega();
    let roots: Vec<f64> = x
        .iter()
        .zip(omega)
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, &w)| v.abs().powf(1.0 / w as f64))
        .collect();
    let n = x.len().max(2) as f64;
    let mut lo = (roots.iter().cloned().fold(f64::INFINITY, f64::min) / n).ln();
    let mut hi = roots.iter().sum::<f64>().ln();
    // φ(u) = ln Σ x_i² e^{-2ω_i u}, strictly decreasing in u = ln t
    let phi = |u: f64| -> (f64, f64) {
        let mut sum = 0.0;
        let mut dsum = 0.0;
        for (&v, &w) in x.iter().zip(omega) {
            let term = v * v * (-2.0 * w as f64 * u).exp();
            sum += term;
            dsum -= 2.0 * w as f64 * term;
        }
        (sum.ln(), dsum / sum)
    };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if phi(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..8 {
        let (f, df) = phi(u);
        let step = f / df;
        u -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    let t = u.exp();
    let s: Vec<f64> = x.iter().zip(omega).map(|(&v, &w)| v / t.powi(w as i32)).collect();
    let sp = SpherePoint::normalized(s)?;
    let back = polar_fwd(sp.as_slice(), t, ws);
    let err = dist(&back, x);
    if err > tol.max(1e-12) * norm(x) {
        return Err(Error::NoConvergence { residual: err / norm(x) });
    }
    Ok((sp, t))
}

/// `n` normalized isotropic Gaussian draws; index `i` uses its own stream.
pub fn sample_sphere(n: usize, nvars: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok((0..n).map(|i| sphere_point_at(i as u64, nvars, seed)).collect())
}

/// The `i`-th point of the seeded sample, independent of the others.
pub fn sphere_point_at(i: u64, nvars: usize, seed: u64) -> SpherePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    loop {
        let v: Vec<f64> = (0..nvars).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Ok(p) = SpherePoint::normalized(v) {
            if norm(p.as_slice()) > 0.0 {
                return p;
            }
        }
    }
}

const PYTHAGOREAN: [(i64, i64, i64); 3] = [(3, 4, 5), (5, 12, 13), (8, 15, 17)];

/// Exact rational points of the unit sphere: all signed coordinate directions
/// and Pythagorean points on each listed coordinate pair (`None` means every pair).
pub fn rational_sphere_points(nvars: usize, pairs: Option<&[(usize, usize)]>) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for i in 0..nvars {
        for sign in [1, -1] {
            let mut p = vec![Rational::zero(); nvars];
            p[i] = rational(sign, 1);
            out.push(p);
        }
    }
    let all: Vec<(usize, usize)> = (0..nvars).flat_map(|i| (i + 1..nvars).map(move |j| (i, j))).collect();
    for &(i, j) in pairs.unwrap_or(&all) {
        for &(a, b, c) in &PYTHAGOREAN {
            for (u, v) in [(a, b), (b, a)] {
                for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let mut p = vec![Rational::zero(); nvars];
                    p[i] = rational(si * u, c);
                    p[j] = rational(sj * v, c);
                    out.push(p);
                }
            }
        }
    }
    if nvars >= 3 {
        // (1, 2, 2)/3 on consecutive triples
        for i in 0..nvars - 2 {
            for signs in 0..8u32 {
                let mut p = vec![Rational::zero(); nvars];
                for (k, num) in [1i64, 2, 2].into_iter().enumerate() {
                    let sg = if signs >> k & 1 == 1 { -1 } else { 1 };
                    p[i + k] = rational(sg * num, 3);
                }
                out.push(p);
            }
        }
    }
    debug_assert!(out.iter().all(|p| p.iter().map(|x| x * x).sum::<Rational>().is_one()));
    out
}

pub fn to_f64_point(p: &[Rational]) -> Vec<f64> {
    use num_traits::ToPrimitive;
    p.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

/// `n` points log-spaced from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// A real-analytic arc through the origin.
pub trait ArcPath: Sync {
    fn dim(&self) -> usize;
    fn position(&self, t: f64) -> Vec<f64>;
    fn velocity(&self, t: f64) -> Vec<f64>;
}

/// `t ↦ t·dir`.
#[derive(Debug, Clone)]
pub struct Line(pub Vec<f64>);

impl ArcPath for Line {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn position(&self, t: f64) -> Vec<f64> {
        self.0.iter().map(|d| d * t).collect()
    }
    fn velocity(&self, _t: f64) -> Vec<f64> {
        self.0.clone()
    }
}

/// `t ↦ t^ω s`.
#[derive(Debug, Clone)]
pub struct MonomialArc {
    pub s: Vec<f64>,
    pub omega: Vec<u32>,
}

impl ArcPath for MonomialArc {
    fn dim(&self) -> usize {
        self.s.len()
    }
    fn position(&self, t: f64) -> Vec<f64> {
        self.s.iter().zip(&self.omega).map(|(s, &w)| s * t.powi(w as i32)).collect()
    }
    fn velocity(&self, t: f64) -> Vec<f64> {
        self.s
            .iter()
            .zip(&self.omega)
            .map(|(s, &w)| s * w as f64 * t.powi(w as i32 - 1))
            .collect()
    }
}

/// Outcome of a tangency-order measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tord {
    Value(f64),
    /// The arcs agree to working precision on the whole grid.
    AtLeast(f64),
}

impl Tord {
    /// Lower bound implied by the measurement.
    pub fn lower_bound(self) -> f64 {
        match self {
            Tord::Value(v) | Tord::AtLeast(v) => v,
        }
    }

    pub fn into_result(self) -> Result<f64> {
        match self {
            Tord::Value(v) => Ok(v),
            Tord::AtLeast(cap) => Err(Error::DegenerateArcs { cap }),
        }
    }
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    GL_NODES.iter().zip(&GL_WEIGHTS).map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

/// `∫_0^t f` on geometric panels refining toward the origin.
fn integrate_from_origin<F: Fn(f64) -> f64>(f: &F, t: f64) -> f64 {
    let mut hi = t;
    let mut total = 0.0;
    for _ in 0..60 {
        let lo = 0.5 * hi;
        total += gauss(f, lo, hi);
        hi = lo;
    }
    total
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn arclength<A: ArcPath + ?Sized>(arc: &A, t: f64) -> f64 {
    integrate_from_origin(&|u| norm(&arc.velocity(u)), t)
}

/// Parameter at which `arc` has arclength `ell`, starting the search at `guess`.
fn invert_arclength<A: ArcPath + ?Sized>(arc: &A, ell: f64, guess: f64) -> f64 {
    let mut t = guess;
    for _ in 0..60 {
        let g = arclength(arc, t) - ell;
        let speed = norm(&arc.velocity(t)).max(f64::MIN_POSITIVE);
        let next = (t - g / speed).max(0.5 * t);
        if (next - t).abs() <= 1e-15 * t {
            return next;
        }
        t = next;
    }
    t
}

fn slope_fit(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn finish(samples: Vec<(f64, f64)>, ell_min: f64) -> Tord {
    let usable: Vec<(f64, f64)> = samples
        .into_iter()
        .filter(|&(l, d)| d > 0.0 && d.is_finite() && l > 0.0)
        .map(|(l, d)| (l.ln(), d.ln()))
        .collect();
    if usable.len() < 2 {
        return Tord::AtLeast(1.0 + f64::EPSILON.ln() / ell_min.ln());
    }
    Tord::Value(slope_fit(&usable))
}

/// Least-squares slope of `log‖γ₁(ℓ) − γ₂(ℓ)‖` against `log ℓ` in arclength
/// parametrization, sampled at the arclengths of `arc1` over `grid`.
pub fn estimate_tord<A: ArcPath + ?Sized, B: ArcPath + ?Sized>(arc1: &A, arc2: &B, grid: &[f64]) -> Tord {
    let mut samples = Vec::with_capacity(grid.len());
    let mut ell_min = f64::INFINITY;
    for &t in grid {
        let ell = arclength(arc1, t);
        ell_min = ell_min.min(ell);
        let t2 = invert_arclength(arc2, ell, t);
        samples.push((ell, dist(&arc1.position(t), &arc2.position(t2))));
    }
    finish(samples, ell_min)
}

/// Like [`estimate_tord`] for `γ₂ = γ₁ + w`, where the offset `w` is known
/// separately. The distance is formed without subtracting nearby positions, so
/// orders far beyond the double-precision floor remain measurable.
pub fn estimate_tord_offset<A: ArcPath + ?Sized, W: ArcPath + ?Sized>(base: &A, offset: &W, grid: &[f64]) -> Tord {
    // ℓ₂ − ℓ₁ = ∫ (2v·w + ‖w‖²) / (‖v + w‖ + ‖v‖)
    let dl = |u: f64| {
        let v = base.velocity(u);
        let w = offset.velocity(u);
        let vw: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
        let den = norm(&vw) + norm(&v);
        if den == 0.0 {
            0.0
        } else {
            (2.0 * dot(&v, &w) + dot(&w, &w)) / den
        }
    };
    let speed1 = |u: f64| norm(&base.velocity(u));
    let mut samples = Vec::with_capacity(grid.len());
    let mut ell_min = f64::INFINITY;
    for &t in grid {
        let ell = arclength(base, t);
        ell_min = ell_min.min(ell);
        // η = t₂ − t solves ∫_t^{t+η} ‖v₁‖ + Δℓ(t + η) = 0
        let dl0 = integrate_from_origin(&dl, t);
        let mut eta = 0.0;
        for _ in 0..30 {
            let g = gauss(&speed1, t, t + eta) + dl0 + gauss(&dl, t, t + eta);
            let v = base.velocity(t + eta);
            let w = offset.velocity(t + eta);
            let vw: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            let step = g / norm(&vw).max(f64::MIN_POSITIVE);
            eta -= step;
            if step.abs() <= 1e-15 * eta.abs().max(f64::MIN_POSITIVE) || step == 0.0 {
                break;
            }
        }
        let t2 = t + eta;
        let n = base.dim();
        let along: Vec<f64> = (0..n).map(|i| gauss(&|u| base.velocity(u)[i], t, t2)).collect();
        let w = offset.position(t2);
        let diff: Vec<f64> = along.iter().zip(&w).map(|(a, b)| a + b).collect();
        samples.push((ell, norm(&diff)));
    }
    finish(samples, ell_min)
}
