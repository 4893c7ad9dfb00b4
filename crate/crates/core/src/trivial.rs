//! The trivializing homeomorphism `Ψ_ε` built from the deformed arcs, its
//! inverse, the contact factor `U` (hypersurfaces), the right
//! trivialization and the finite-difference diagnostics.
//!
//! `Ψ_ε` sends `γ_s(t)` to the deformed arc through `s`. When the smallest
//! weight is attained by `x_1` alone, the deformed arc is reparametrized so
//! that its first coordinate stays `t^{ω_1} s_1`; then `Ψ_ε` fixes `x_1`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use parking_lot::RwLock;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arc::{family_on_arc, solve_arc, DeformedArc};
use crate::error::{Error, Result};
use crate::geom::{dist, log_grid, norm, polar_fwd, polar_inv, sphere_point_at, SpherePoint};
use crate::obstruction::{normalize, project_tangent, GermSystem};
use crate::poly::WOrder;
use crate::series::TSeries;

/// Convergence threshold of [`Trivializer::psi_inverse`] in weighted-polar units.
pub const INVERSE_TOL: f64 = 1e-13;
const INVERSE_MAX_ITERS: usize = 100;
/// Finite-difference step relative to the weighted scale `t^{ω_j}` of each coordinate.
pub const FD_STEP: f64 = 1e-3;
/// Directions with `|f_p(s)|` below this are treated as on the link by the
/// contact-factor code.
pub const LINK_TOL: f64 = 1e-10;
/// Pointwise `U` is sampled only at directions with `|f_p(s)|` above this.
pub const U_SAMPLE_MIN: f64 = 1e-3;
const CACHE_CAP: usize = 1 << 16;
const SNAP: f64 = 1e12;

struct Entry {
    arc: DeformedArc,
    /// `h_1 / s_1`, present when the first coordinate is reparametrized away.
    q: Option<TSeries>,
    /// `ũ − 1` for hypersurfaces off the link.
    u_m1: Option<TSeries>,
}

/// `Ψ_ε` for one germ and one `ε`, with a cache of solved arcs.
pub struct Trivializer<'a> {
    gs: &'a GermSystem,
    eps: f64,
    k_eff: usize,
    rescale: bool,
    cache: RwLock<HashMap<Vec<i64>, Arc<Entry>>>,
}

impl<'a> Trivializer<'a> {
    pub fn new(gs: &'a GermSystem, eps: f64, k_eff: usize) -> Self {
        let ws = gs.ws();
        let rescale = ws.group_end(0) == 1 && ws.nvars() > 1;
        Trivializer { gs, eps, k_eff, rescale, cache: RwLock::new(HashMap::new()) }
    }

    pub fn germ(&self) -> &GermSystem {
        self.gs
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn k_eff(&self) -> usize {
        self.k_eff
    }

    /// Whether `Ψ_ε` is the identity (no perturbation or `ε = 0`).
    pub fn is_identity(&self) -> bool {
        self.eps == 0.0 || self.gs.delta() == WOrder::Infinite
    }

    pub fn cached_arcs(&self) -> usize {
        self.cache.read().len()
    }

    /// Arcs are solved at `s` snapped to a `1e-12` grid, so every query near
    /// a grid point sees the same arc regardless of evaluation order.
    fn entry(&self, s: &[f64]) -> Result<Arc<Entry>> {
        let key: Vec<i64> = s.iter().map(|v| (v * SNAP).round() as i64).collect();
        if let Some(e) = self.cache.read().get(&key) {
            return Ok(e.clone());
        }
        let snapped: Vec<f64> = key.iter().map(|&k| k as f64 / SNAP).collect();
        let arc = solve_arc(self.gs, &snapped, self.eps, self.k_eff)?;
        let q = self.rescale.then(|| {
            let grad = self.gs.gradient(&snapped);
            let mut q = TSeries::zero(self.k_eff);
            for (i, z) in arc.z.iter().enumerate() {
                q.add_assign_scaled(z, grad[(i, 0)] * snapped[0]);
            }
            q
        });
        let u_m1 = if self.gs.codim() == 1 {
            contact_series_from_arc(self.gs, &arc).ok().map(|mut u| {
                u.set_coeff(0, 0.0);
                u
            })
        } else {
            None
        };
        let e = Arc::new(Entry { arc, q, u_m1 });
        let mut w = self.cache.write();
        if w.len() >= CACHE_CAP {
            w.clear();
        }
        w.insert(key, e.clone());
        Ok(e)
    }

    /// Validity radius of the arc through `s`.
    pub fn t_max(&self, s: &[f64]) -> Result<f64> {
        if self.is_identity() {
            return Ok(1.0);
        }
        Ok(self.entry(s)?.arc.t_max)
    }

    /// `ln(t̃/t)` where `t̃^{ω_1}(1 + ε t̃^δ q(t̃)) = t^{ω_1}`.
    fn log_ratio(&self, e: &Entry, t: f64) -> Result<f64> {
        let Some(q) = &e.q else { return Ok(0.0) };
        let d = e.arc.delta_finite() as i32;
        let w1 = self.gs.ws().omega()[0] as f64;
        let dq = q.derivative();
        let a = |tau: f64| self.eps * tau.powi(d) * q.eval(tau);
        let outside = || Error::OutsideValidityRadius { t, t_max: e.arc.t_max };
        let a0 = a(t);
        if 1.0 + a0 <= 0.1 {
            return Err(outside());
        }
        let mut v = -a0.ln_1p() / w1;
        for _ in 0..50 {
            let tau = t * v.exp();
            let av = a(tau);
            if 1.0 + av <= 0.1 {
                return Err(outside());
            }
            let da = self.eps * (d as f64 * tau.powi(d) * q.eval(tau) + tau.powi(d + 1) * dq.eval(tau));
            let g = w1 * v + av.ln_1p();
            let step = g / (w1 + da / (1.0 + av));
            v -= step;
            if step.abs() <= 1e-17 + 1e-15 * v.abs() {
                return Ok(v);
            }
        }
        Err(outside())
    }

    /// `Ψ_ε(x)` given the weighted-polar coordinates `(s, t)` of `x`.
    fn psi_polar(&self, x: &[f64], s: &[f64], t: f64) -> Result<Vec<f64>> {
        let e = self.entry(s)?;
        if t > e.arc.t_max {
            return Err(Error::OutsideValidityRadius { t, t_max: e.arc.t_max });
        }
        let v = self.log_ratio(&e, t)?;
        let tt = t * v.exp();
        let d = e.arc.delta_finite() as i32;
        let mut y: Vec<f64> = x
            .iter()
            .zip(self.gs.ws().omega())
            .zip(&e.arc.h)
            .map(|((&xi, &w), h)| xi * (w as f64 * v).exp() + self.eps * tt.powi(w as i32 + d) * h.eval(tt))
            .collect();
        if self.rescale {
            y[0] = x[0];
        }
        Ok(y)
    }

    pub fn psi(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.gs.nvars() {
            return Err(Error::DimensionMismatch { expected: self.gs.nvars(), got: x.len() });
        }
        if self.is_identity() || x.iter().all(|&v| v == 0.0) {
            return Ok(x.to_vec());
        }
        let (s, t) = polar_inv(x, self.gs.ws(), 1e-12)?;
        self.psi_polar(x, s.as_slice(), t)
    }

    /// Fixed-point inversion in weighted-polar coordinates:
    /// `t ← t·t_y/t_k`, `s ← normalize(s + σ_y − σ_k)`.
    pub fn psi_inverse(&self, y: &[f64], tol: f64) -> Result<Vec<f64>> {
        if y.len() != self.gs.nvars() {
            return Err(Error::DimensionMismatch { expected: self.gs.nvars(), got: y.len() });
        }
        if self.is_identity() || y.iter().all(|&v| v == 0.0) {
            return Ok(y.to_vec());
        }
        let ws = self.gs.ws();
        let (sy, ty) = polar_inv(y, ws, 1e-12)?;
        let sy = sy.into_vec();
        let mut s = sy.clone();
        let mut t = ty;
        let mut res = f64::INFINITY;
        for _ in 0..INVERSE_MAX_ITERS {
            let mut x = polar_fwd(&s, t, ws);
            let yk = self.psi_polar(&x, &s, t)?;
            let (sk, tk) = polar_inv(&yk, ws, 1e-12)?;
            res = (tk / ty).ln().abs() + dist(sk.as_slice(), &sy);
            if res <= tol {
                if self.rescale {
                    x[0] = y[0];
                }
                return Ok(x);
            }
            t *= ty / tk;
            s = normalize(s.iter().zip(&sy).zip(sk.as_slice()).map(|((a, b), c)| a + b - c).collect());
        }
        Err(Error::NoConvergence { residual: res })
    }

    /// `U − 1` at the image point `Ψ_ε(x)`, where `(f_p + ε f_gt)∘Ψ_ε = U·f_p`.
    pub fn u_minus_one(&self, x: &[f64]) -> Result<f64> {
        if self.gs.codim() != 1 {
            return Err(Error::NotHypersurface(self.gs.codim()));
        }
        if self.is_identity() {
            return Ok(0.0);
        }
        let (s, t) = polar_inv(x, self.gs.ws(), 1e-12)?;
        let e = self.entry(s.as_slice())?;
        let u = e.u_m1.as_ref().ok_or(Error::DegenerateDenominator)?;
        let v = self.log_ratio(&e, t)?;
        let tt = t * v.exp();
        let p = self.gs.degrees()[0] as f64;
        Ok(u.eval(tt) * (p * v).exp() + (p * v).exp_m1())
    }
}

/// `ũ(s, t) = t^{-p}(f_p + ε f_gt)(γ_{ε,s}(t)) / f_p(s)` along a solved arc.
fn contact_series_from_arc(gs: &GermSystem, arc: &DeformedArc) -> Result<TSeries> {
    let fp = gs.eval_f_p(&arc.s)[0];
    if fp.abs() <= LINK_TOL {
        return Err(Error::DegenerateDenominator);
    }
    let (fam, scale) = family_on_arc(gs, arc).swap_remove(0);
    let p = gs.degrees()[0] as isize;
    let mut u = fam.shift(-p, 1e-12 * scale.max(1.0))?.scale(1.0 / fp);
    // the constant term is f_p(s)/f_p(s)
    u.set_coeff(0, 1.0);
    Ok(u)
}

pub fn psi_map(gs: &GermSystem, eps: f64, x: &[f64], k_eff: usize) -> Result<Vec<f64>> {
    Trivializer::new(gs, eps, k_eff).psi(x)
}

pub fn psi_inverse(gs: &GermSystem, eps: f64, y: &[f64], k_eff: usize, tol: f64) -> Result<Vec<f64>> {
    Trivializer::new(gs, eps, k_eff).psi_inverse(y, tol)
}

/// The contact factor `ũ` along the arc through an off-link `s` (`c = 1`).
pub fn contact_factor_series(gs: &GermSystem, s: &[f64], eps: f64, k_eff: usize) -> Result<TSeries> {
    if gs.codim() != 1 {
        return Err(Error::NotHypersurface(gs.codim()));
    }
    let arc = solve_arc(gs, s, eps, k_eff)?;
    contact_series_from_arc(gs, &arc)
}

/// Reparametrization `w` with `(f_p + ε f_gt)(γ_{ε,s}(t·w)) = t^p f_p(s)`,
/// which turns the contact trivialization into a right one.
pub fn right_trivialize(gs: &GermSystem, s: &[f64], eps: f64, k_eff: usize) -> Result<TSeries> {
    if gs.codim() != 1 {
        return Err(Error::NotHypersurface(gs.codim()));
    }
    if gs.eval_f_p(s)[0].abs() <= LINK_TOL {
        return Err(Error::OnLinkUnsupported);
    }
    let u = contact_series_from_arc(gs, &solve_arc(gs, s, eps, k_eff)?)?;
    let alpha = -1.0 / gs.degrees()[0] as f64;
    let mut w = TSeries::constant(1.0, u.trunc());
    // each pass fixes one more coefficient
    for _ in 0..=u.trunc() {
        w = u.compose_scaled_arg(&w).powf(alpha)?;
    }
    Ok(w)
}

/// Central differences, column `j` with step `steps[j]`.
pub fn jacobian_fd<F>(map: F, x: &[f64], steps: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += steps[j];
        xm[j] -= steps[j];
        let (fp, fm) = (map(&xp)?, map(&xm)?);
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * steps[j])).collect::<Vec<_>>());
    }
    let m = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(m, n, |i, j| cols[j][i]))
}

/// Steps `FD_STEP·t^{ω_j}`: a fixed relative move of every weighted coordinate.
pub fn weighted_steps(gs: &GermSystem, t: f64) -> Vec<f64> {
    gs.ws().omega().iter().map(|&w| FD_STEP * t.powi(w as i32)).collect()
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

fn dev_from_identity(m: &DMatrix<f64>) -> f64 {
    op_norm(&(m - DMatrix::identity(m.nrows(), m.ncols())))
}

/// Measurements at one scale, maximized over the sampled directions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub t: f64,
    pub jac_norm: f64,
    pub inv_jac_norm: f64,
    pub jac_dev: f64,
    pub inv_jac_dev: f64,
    pub drift_ratio: f64,
    /// `max |U − 1|`, hypersurfaces only.
    pub u_dev: Option<f64>,
    /// `max ‖∇U‖` in the target coordinates, hypersurfaces only.
    pub u_grad: Option<f64>,
    pub used: usize,
    pub skipped: usize,
}

/// A measured verdict next to what the weight thresholds predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    /// Whether the theory guarantees the property for this germ.
    pub expected: bool,
    pub measured: f64,
    pub threshold: f64,
    pub basis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub lipschitz_ok: Check,
    pub c1_ok: Check,
    pub differentiable: Check,
    #[serde(rename = "bounded_U")]
    pub bounded_u: Option<Check>,
    #[serde(rename = "c1_U")]
    pub c1_u: Option<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivializationDiagnostics {
    pub eps: f64,
    pub delta: WOrder,
    /// `ω_N − ω_2`.
    pub lipschitz_threshold: u32,
    /// `ω_N`.
    pub u_threshold: u32,
    pub scales: Vec<f64>,
    pub rows: Vec<ScaleRow>,
    pub verdicts: Verdicts,
    pub samples: usize,
    pub seed: u64,
}

/// Ratio bound for "bounded across scales".
pub const BOUNDED_RATIO: f64 = 10.0;
/// Allowed relative increase between consecutive scales for "decreasing".
pub const MONOTONE_SLACK: f64 = 1.2;
pub const C1_LIMIT: f64 = 0.05;
pub const DRIFT_LIMIT: f64 = 1e-2;
/// Finite-difference measurements below this are roundoff, not trend.
pub const FD_NOISE: f64 = 1e-9;

struct Sample {
    jac_norm: f64,
    inv_jac_norm: f64,
    jac_dev: f64,
    inv_jac_dev: f64,
    drift: f64,
    u: Option<(f64, f64)>,
}

fn sample_at(tr: &Trivializer, s: &[f64], t: f64) -> Result<Sample> {
    let gs = tr.germ();
    let n = gs.nvars();
    let x = polar_fwd(s, t, gs.ws());
    let y = tr.psi(&x)?;
    let drift = dist(&y, &x) / norm(&x);
    let steps = weighted_steps(gs, t);
    let j = jacobian_fd(|p| tr.psi(p), &x, &steps)?;
    let with_u = gs.codim() == 1 && gs.eval_f_p(s)[0].abs() >= U_SAMPLE_MIN;
    // the inverse map, with U − 1 at the same image point appended
    let ji = jacobian_fd(
        |p| {
            let mut out = tr.psi_inverse(p, INVERSE_TOL)?;
            if with_u {
                let u = tr.u_minus_one(&out)?;
                out.push(u);
            }
            Ok(out)
        },
        &y,
        &steps,
    )?;
    let inv = ji.rows(0, n).into_owned();
    let u = if with_u {
        let grad = ji.row(n).norm();
        Some((tr.u_minus_one(&x)?.abs(), grad))
    } else {
        None
    };
    Ok(Sample {
        jac_norm: op_norm(&j),
        inv_jac_norm: op_norm(&inv),
        jac_dev: dev_from_identity(&j),
        inv_jac_dev: dev_from_identity(&inv),
        drift,
        u,
    })
}

/// Scales from `min(0.1, t_max/2)` down to `1e-4`, where `t_max` is the
/// smallest validity radius over the sampled directions.
pub fn default_scales(tr: &Trivializer, n_samples: usize, seed: u64, count: usize) -> Vec<f64> {
    let nv = tr.germ().nvars();
    let t_max = (0..n_samples as u64)
        .into_par_iter()
        .filter_map(|i| tr.t_max(sphere_point_at(i, nv, seed).as_slice()).ok())
        .reduce(|| 1.0, f64::min);
    log_grid(0.1f64.min(0.5 * t_max), 1e-4, count)
}

/// Jacobian norms, drift and contact-factor data of `Ψ_ε` over scales.
pub fn lipschitz_scan(tr: &Trivializer, scales: &[f64], n_samples: usize, seed: u64) -> Result<TrivializationDiagnostics> {
    if n_samples == 0 || scales.is_empty() {
        return Err(Error::EmptySample);
    }
    let gs = tr.germ();
    let nv = gs.nvars();
    let dirs: Vec<SpherePoint> = (0..n_samples as u64).map(|i| sphere_point_at(i, nv, seed)).collect();
    let mut rows = Vec::with_capacity(scales.len());
    for &t in scales {
        let samples: Vec<Result<Sample>> = dirs.par_iter().map(|s| sample_at(tr, s.as_slice(), t)).collect();
        let mut row = ScaleRow { t, ..Default::default() };
        for smp in samples {
            let Ok(smp) = smp else {
                row.skipped += 1;
                continue;
            };
            row.used += 1;
            row.jac_norm = row.jac_norm.max(smp.jac_norm);
            row.inv_jac_norm = row.inv_jac_norm.max(smp.inv_jac_norm);
            row.jac_dev = row.jac_dev.max(smp.jac_dev);
            row.inv_jac_dev = row.inv_jac_dev.max(smp.inv_jac_dev);
            row.drift_ratio = row.drift_ratio.max(smp.drift);
            if let Some((u, g)) = smp.u {
                row.u_dev = Some(row.u_dev.unwrap_or(0.0).max(u));
                row.u_grad = Some(row.u_grad.unwrap_or(0.0).max(g));
            }
        }
        rows.push(row);
    }
    let ws = gs.ws();
    let lip_thr = ws.omega_max() - ws.omega_second();
    let u_thr = ws.omega_max();
    let verdicts = verdicts(&rows, gs.delta(), lip_thr, u_thr, gs.codim() == 1);
    Ok(TrivializationDiagnostics {
        eps: tr.eps(),
        delta: gs.delta(),
        lipschitz_threshold: lip_thr,
        u_threshold: u_thr,
        scales: scales.to_vec(),
        rows,
        verdicts,
        samples: n_samples,
        seed,
    })
}

fn ratio_last_first(v: &[f64]) -> f64 {
    match (v.first(), v.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        (Some(_), Some(&b)) if b == 0.0 => 1.0,
        _ => f64::INFINITY,
    }
}

fn decreasing(v: &[f64], slack: f64, floor: f64) -> bool {
    v.windows(2).all(|w| w[1] <= slack * w[0] || w[1] <= floor)
}

fn verdicts(rows: &[ScaleRow], delta: WOrder, lip_thr: u32, u_thr: u32, hyper: bool) -> Verdicts {
    let rows: Vec<&ScaleRow> = rows.iter().filter(|r| r.used > 0).collect();
    let col = |f: &dyn Fn(&ScaleRow) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let d = match delta {
        WOrder::Finite(d) => d as f64,
        WOrder::Infinite => f64::INFINITY,
    };
    let jn = col(&|r| r.jac_norm);
    let ijn = col(&|r| r.inv_jac_norm);
    let ratio = ratio_last_first(&jn).max(ratio_last_first(&ijn));
    let lipschitz_ok = Check {
        pass: ratio <= BOUNDED_RATIO,
        expected: d >= lip_thr as f64,
        measured: ratio,
        threshold: BOUNDED_RATIO,
        basis: "max over Ψ and Ψ⁻¹ of sup‖J‖ at the smallest scale / at the largest".into(),
    };
    let dev = col(&|r| r.jac_dev.max(r.inv_jac_dev));
    let last_dev = dev.last().copied().unwrap_or(f64::INFINITY);
    let c1_ok = Check {
        pass: decreasing(&dev, MONOTONE_SLACK, FD_NOISE) && last_dev <= C1_LIMIT,
        expected: d > lip_thr as f64,
        measured: last_dev,
        threshold: C1_LIMIT,
        basis: "sup‖J − I‖ over Ψ and Ψ⁻¹ at the smallest scale, decreasing within 20%".into(),
    };
    let drift = col(&|r| r.drift_ratio);
    let last_drift = drift.last().copied().unwrap_or(f64::INFINITY);
    let differentiable = Check {
        pass: drift.windows(2).all(|w| w[1] < w[0] || w[1] <= f64::EPSILON) && last_drift <= DRIFT_LIMIT,
        expected: d >= 1.0,
        measured: last_drift,
        threshold: DRIFT_LIMIT,
        basis: "sup ‖Ψ(x) − x‖/‖x‖ at the smallest scale, strictly decreasing".into(),
    };
    let ug: Vec<f64> = rows.iter().filter_map(|r| r.u_grad).collect();
    let (bounded_u, c1_u) = if hyper && !ug.is_empty() {
        let r = ratio_last_first(&ug);
        let last = *ug.last().unwrap();
        (
            Some(Check {
                pass: r <= BOUNDED_RATIO,
                expected: d >= u_thr as f64,
                measured: r,
                threshold: BOUNDED_RATIO,
                basis: "sup‖∇U‖ at the smallest scale / at the largest".into(),
            }),
            Some(Check {
                pass: decreasing(&ug, MONOTONE_SLACK, FD_NOISE) && last <= C1_LIMIT,
                expected: d > u_thr as f64,
                measured: last,
                threshold: C1_LIMIT,
                basis: "sup‖∇U‖ at the smallest scale, decreasing within 20%".into(),
            }),
        )
    } else {
        (None, None)
    };
    Verdicts { lipschitz_ok, c1_ok, differentiable, bounded_u, c1_u }
}

/// Gauss–Newton projection of `start` onto `{σ ∈ 𝕊 : (f_p + ε f_gt)(t^ω σ) = 0}` at fixed `t`.
pub fn project_to_family(gs: &GermSystem, eps: f64, start: &[f64], t: f64) -> Option<SpherePoint> {
    let ws = gs.ws();
    let omega = ws.omega();
    let c = gs.codim();
    let scale_i: Vec<f64> = gs.degrees().iter().map(|&p| t.powi(-(p as i32))).collect();
    let residual = |s: &[f64]| -> Vec<f64> {
        let x = polar_fwd(s, t, ws);
        gs.eval_family(eps, &x).iter().zip(&scale_i).map(|(v, k)| v * k).collect()
    };
    let mut s = normalize(start.to_vec());
    for _ in 0..60 {
        let f = residual(&s);
        if norm(&f) <= 1e-15 {
            break;
        }
        let x = polar_fwd(&s, t, ws);
        let mut j = gs.family_gradient(eps, &x);
        for i in 0..c {
            let mut r: Vec<f64> = (0..s.len()).map(|k| j[(i, k)] * scale_i[i] * t.powi(omega[k] as i32)).collect();
            project_tangent(&s, &mut r);
            for (k, v) in r.into_iter().enumerate() {
                j[(i, k)] = v;
            }
        }
        let y = (&j * j.transpose()).lu().solve(&DMatrix::from_vec(c, 1, f))?;
        let step = j.transpose() * y;
        s = normalize(s.iter().zip(step.iter()).map(|(a, d)| a - d).collect());
        if !s.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    (norm(&residual(&s)) <= 1e-13).then(|| SpherePoint::normalized(s).ok()).flatten()
}

/// Worst values of the zero-set correspondence at sampled points near the link.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetReport {
    pub points: usize,
    pub skipped: usize,
    /// `max |(f_p + ε f_gt)(Ψ(x))| / t^p` over `x ∈ V(f_p)`.
    pub forward: f64,
    /// `max |f_p(Ψ⁻¹(y))| / t^p` over `y ∈ V(f_p + ε f_gt)`.
    pub inverse: f64,
    /// `max_i |Ψ⁻¹(Ψ(x))_i − x_i| / t^{ω_i}`.
    pub roundtrip: f64,
}

/// Zero-set correspondence in both directions at `n` points `t^ω s`, with
/// `s` cycling through `link` and `t` log-uniform in `[1e-3, min(0.1, t_max/2)]`.
pub fn zero_set_check(tr: &Trivializer, link: &[SpherePoint], n: usize, seed: u64) -> ZeroSetReport {
    use rand::{Rng, SeedableRng};
    let gs = tr.germ();
    let ws = gs.ws();
    if link.is_empty() {
        return ZeroSetReport { skipped: n, ..Default::default() };
    }
    let rel = |vals: &[f64], t: f64| -> f64 {
        vals.iter().zip(gs.degrees()).map(|(v, &p)| v.abs() / t.powi(p as i32)).fold(0.0, f64::max)
    };
    let one = |i: usize| -> Result<(f64, f64, f64)> {
        let s = link[i % link.len()].as_slice();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let hi = 0.1f64.min(0.5 * tr.t_max(s)?);
        if hi <= 1e-3 {
            return Err(Error::OutsideValidityRadius { t: 1e-3, t_max: 2.0 * hi });
        }
        let t = (rng.random_range(1e-3f64.ln()..hi.ln())).exp();
        let x = polar_fwd(s, t, ws);
        let y = tr.psi(&x)?;
        let fwd = rel(&gs.eval_family(tr.eps(), &y), t);
        let back = tr.psi_inverse(&y, INVERSE_TOL)?;
        let rt = back
            .iter()
            .zip(&x)
            .zip(ws.omega())
            .map(|((a, b), &w)| (a - b).abs() / t.powi(w as i32))
            .fold(0.0, f64::max);
        let sigma = project_to_family(gs, tr.eps(), s, t).ok_or(Error::NoConvergence { residual: f64::NAN })?;
        let yv = polar_fwd(sigma.as_slice(), t, ws);
        let xv = tr.psi_inverse(&yv, INVERSE_TOL)?;
        let inv = rel(&gs.eval_f_p(&xv), t);
        Ok((fwd, inv, rt))
    };
    let results: Vec<Result<(f64, f64, f64)>> = (0..n).into_par_iter().map(one).collect();
    let mut rep = ZeroSetReport::default();
    for r in results {
        match r {
            Ok((f, i, rt)) => {
                rep.points += 1;
                rep.forward = rep.forward.max(f);
                rep.inverse = rep.inverse.max(i);
                rep.roundtrip = rep.roundtrip.max(rt);
            }
            Err(_) => rep.skipped += 1,
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::WeightSystem;
    use crate::obstruction::find_link_points;
    use crate::poly::parse_poly;
    use crate::series::compose_poly;

    fn germ(w: &[u32], vars: &[&str], eqs: &[&str], pert: &[&str]) -> GermSystem {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let ws = WeightSystem::new(w).unwrap();
        let f = eqs.iter().map(|e| parse_poly(e, &names).unwrap()).collect();
        let g = pert.iter().map(|e| parse_poly(e, &names).unwrap()).collect();
        GermSystem::new(ws, f, g).unwrap()
    }

    fn quadric() -> GermSystem {
        germ(&[1, 1], &["x", "y"], &["x^2 - y^2"], &["y^3"])
    }

    fn cusp(pert: &str) -> GermSystem {
        germ(&[2, 3], &["y", "x"], &["y^3 + x^2"], &[pert])
    }

    #[test]
    fn jacobian_of_linear_maps() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let j = jacobian_fd(|x| Ok((&a * DMatrix::from_column_slice(2, 1, x)).iter().cloned().collect()), &[0.3, -0.7], &[1e-3, 1e-3]).unwrap();
        assert!((j - &a).abs().max() < 1e-12);
        let id = jacobian_fd(|x| Ok(x.to_vec()), &[0.3, -0.7], &[1e-4, 1e-4]).unwrap();
        assert!((id - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-8);
    }

    #[test]
    fn zero_epsilon_is_the_identity() {
        let q = quadric();
        let tr = Trivializer::new(&q, 0.0, 8);
        let x = [0.01, -0.02];
        assert_eq!(tr.psi(&x).unwrap(), x.to_vec());
        assert_eq!(tr.psi_inverse(&x, INVERSE_TOL).unwrap(), x.to_vec());
        let tr = Trivializer::new(&q, 1.0, 8);
        assert_eq!(tr.psi(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(tr.psi_inverse(&[0.0, 0.0], INVERSE_TOL).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn psi_follows_the_arcs() {
        let q = quadric();
        let tr = Trivializer::new(&q, 1.0, 8);
        let s = [0.6, 0.8];
        let arc = solve_arc(&q, &s, 1.0, 8).unwrap();
        for t in [1e-1, 1e-2, 1e-3] {
            let y = tr.psi(&polar_fwd(&s, t, q.ws())).unwrap();
            assert!(dist(&y, &arc.eval(t)) <= 1e-14 * t, "{t}");
        }
    }

    #[test]
    fn first_coordinate_is_fixed_when_rescaled() {
        let b = germ(&[1, 2, 3], &["x", "y", "z"], &["x^6 + y^3 + z^2"], &["y*z^2"]);
        let tr = Trivializer::new(&b, 1.0, 8);
        let s = normalize(vec![0.5, -0.4, 0.7]);
        let x = polar_fwd(&s, 0.05, b.ws());
        let y = tr.psi(&x).unwrap();
        assert_eq!(y[0], x[0]);
        // still on the same deformed arc: the image lies on the arc at a nearby time
        let arc = solve_arc(&b, &s, 1.0, 8).unwrap();
        let tt = (0..2000)
            .map(|k| 0.05 * (1.0 + (k as f64 - 1000.0) * 1e-6))
            .min_by(|a, c| (arc.eval(*a)[0] - x[0]).abs().total_cmp(&(arc.eval(*c)[0] - x[0]).abs()))
            .unwrap();
        let on = arc.eval(tt);
        assert!(dist(&on[1..], &y[1..]) < 1e-7, "{:?} {:?}", on, y);
    }

    #[test]
    fn inverse_roundtrip() {
        let b = germ(&[1, 2, 3], &["x", "y", "z"], &["x^6 + y^3 + z^2"], &["y^2*z"]);
        let tr = Trivializer::new(&b, 1.0, 8);
        for i in 0..20 {
            let s = sphere_point_at(i, 3, 7);
            let t = 1e-3 * 10f64.powf(i as f64 / 10.0);
            let x = polar_fwd(s.as_slice(), t, b.ws());
            let y = tr.psi(&x).unwrap();
            let back = tr.psi_inverse(&y, INVERSE_TOL).unwrap();
            for ((a, c), &w) in back.iter().zip(&x).zip(b.ws().omega()) {
                assert!((a - c).abs() <= 1e-10 * t.powi(w as i32));
            }
        }
    }

    #[test]
    fn zero_sets_correspond() {
        let q = quadric();
        let tr = Trivializer::new(&q, 1.0, 8);
        let link = find_link_points(&q, 4, 1);
        assert_eq!(link.len(), 4);
        let rep = zero_set_check(&tr, &link, 40, 3);
        assert_eq!(rep.points, 40);
        assert!(rep.forward <= 1e-8 && rep.inverse <= 1e-8 && rep.roundtrip <= 1e-9, "{rep:?}");
    }

    #[test]
    fn contact_factor_starts_at_order_delta() {
        let c = cusp("x^2*y^2");
        let s = normalize(vec![0.8, 0.3]);
        let u = contact_factor_series(&c, &s, 1.0, 8).unwrap();
        assert_eq!(u.coeff(0), 1.0);
        let mut um1 = u.clone();
        um1.set_coeff(0, 0.0);
        assert!(um1.ord(1e-9).is_some_and(|o| o >= 4));
        let u0 = contact_factor_series(&c, &s, 0.0, 8).unwrap();
        assert!(u0.coeffs().iter().skip(1).all(|&v| v == 0.0));
        assert!(matches!(contact_factor_series(&c, &[1.0, 0.0], 1.0, 8), Ok(_)));
        let ci = germ(&[1, 1, 1], &["a", "b", "c"], &["a^2 - b^2", "a^2 + b^2 - c^2"], &["a^3", "b^3"]);
        assert!(matches!(contact_factor_series(&ci, &[1.0, 0.0, 0.0], 1.0, 4), Err(Error::NotHypersurface(2))));
    }

    #[test]
    fn pointwise_u_matches_the_quotient() {
        let c = cusp("x^3");
        let tr = Trivializer::new(&c, 1.0, 8);
        let s = normalize(vec![0.8, 0.3]);
        let t = 0.05;
        let x = polar_fwd(&s, t, c.ws());
        let y = tr.psi(&x).unwrap();
        let direct = c.eval_family(1.0, &y)[0] / c.eval_f_p(&x)[0] - 1.0;
        let via = tr.u_minus_one(&x).unwrap();
        assert!((direct - via).abs() <= 1e-9 * via.abs().max(1e-6), "{direct} {via}");
    }

    #[test]
    fn right_trivialization_recomposes() {
        let c = cusp("x^2*y^2");
        let s = normalize(vec![0.8, 0.3]);
        let w = right_trivialize(&c, &s, 1.0, 8).unwrap();
        assert_eq!(w.coeff(0), 1.0);
        let arc = solve_arc(&c, &s, 1.0, 8).unwrap();
        let mut wp = w.coeffs().to_vec();
        wp.resize(arc.k_int + 1, 0.0);
        let wp = TSeries::from_coeffs(wp);
        let moved: Vec<TSeries> = arc.gamma.iter().map(|g| g.compose_scaled_arg(&wp)).collect();
        let lhs = compose_poly(&c.compiled_f_p()[0], &moved).add(&compose_poly(&c.compiled_f_gt()[0], &moved));
        let p = 6;
        let fp = c.eval_f_p(&s)[0];
        for m in 0..=w.trunc() {
            let want = if m == 0 { fp } else { 0.0 };
            assert!((lhs.coeff(p + m) - want).abs() <= 1e-9, "{m}: {}", lhs.coeff(p + m));
        }
        let w0 = right_trivialize(&c, &s, 0.0, 8).unwrap();
        assert!(w0.coeffs().iter().enumerate().all(|(m, &v)| v == if m == 0 { 1.0 } else { 0.0 }));
        let link = find_link_points(&c, 1, 1);
        assert!(matches!(right_trivialize(&c, link[0].as_slice(), 1.0, 8), Err(Error::OnLinkUnsupported)));
    }

    #[test]
    fn identity_scan() {
        let q = quadric();
        let tr = Trivializer::new(&q, 0.0, 6);
        let d = lipschitz_scan(&tr, &[1e-1, 1e-2, 1e-3], 4, 1).unwrap();
        for r in &d.rows {
            assert!(r.jac_dev < 1e-8 && r.inv_jac_dev < 1e-8 && r.drift_ratio == 0.0);
        }
    }
}
