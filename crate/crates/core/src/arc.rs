//! Deformed arcs `γ_{ε,s}(t) = t^ω·(s + ε t^δ h)` from the extended
//! implicit-function equation, solved by t-adic fixed-point iteration.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{log_grid, norm, ArcPath, MonomialArc};
use crate::obstruction::{GermSystem, OBSTRUCTION_TOL};
use crate::poly::{CompiledPoly, WOrder};
use crate::series::{compose_poly, TSeries};

/// Coefficient values below this (but above the refusal threshold) mark a
/// direction as close to the obstruction locus.
pub const NEAR_OBSTRUCTION: f64 = 1e-3;
/// Convergence threshold of the same-order iteration.
pub const CONTRACTION_TOL: f64 = 1e-12;
const MAX_SAME_ORDER_ITERS: usize = 500;
/// Smallest ball on which the same-order Lipschitz constant is sampled.
pub const SAME_ORDER_MIN_RADIUS: f64 = 1e-3;
const T_MAX_GRID: usize = 61;

/// A solved arc with its Ansatz data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformedArc {
    pub s: Vec<f64>,
    pub omega: Vec<u32>,
    pub eps: f64,
    pub delta: WOrder,
    /// User-facing truncation of `z` and `h`.
    pub k_eff: usize,
    /// Truncation of the arc components.
    pub k_int: usize,
    pub z: Vec<TSeries>,
    pub h: Vec<TSeries>,
    pub gamma: Vec<TSeries>,
    /// `τ + det A` at `s`.
    pub coefficient: f64,
    pub near_obstruction: bool,
    pub sweeps: usize,
    /// Largest coefficient of the equation residual at the solution.
    pub equation_residual: f64,
    /// Residual order on `X_ε`, present for directions on the link.
    pub residual_ord: Option<usize>,
    pub t_max: f64,
}

/// Precomputed data of the equation at a fixed `(s, ε)`.
struct Problem<'a> {
    gs: &'a GermSystem,
    s: Vec<f64>,
    eps: f64,
    delta: usize,
    k_eff: usize,
    k_int: usize,
    /// `g_j ∂_j f_i(s)`, so that `h = Bᵀ z`.
    b: DMatrix<f64>,
    a: DMatrix<f64>,
    adj: DMatrix<f64>,
    kappa: f64,
}

fn budget(gs: &GermSystem, k_eff: usize, delta: usize) -> usize {
    k_eff + gs.p_max() as usize + delta
}

impl<'a> Problem<'a> {
    fn new(gs: &'a GermSystem, s: &[f64], eps: f64, delta: usize, k_eff: usize) -> Result<Self> {
        let gram = gs.gram(s);
        let kappa = gs.tau(s) + gram.det;
        if kappa < OBSTRUCTION_TOL {
            return Err(Error::Obstructed { s: s.to_vec(), coefficient: kappa });
        }
        let g = gs.ws().group_factors(s);
        let mut b = gs.gradient(s);
        for (j, gj) in g.iter().enumerate() {
            for i in 0..gs.codim() {
                b[(i, j)] *= gj;
            }
        }
        Ok(Problem {
            gs,
            s: s.to_vec(),
            eps,
            delta,
            k_eff,
            k_int: budget(gs, k_eff, delta),
            b,
            a: gram.a,
            adj: gram.adj,
            kappa,
        })
    }

    fn c(&self) -> usize {
        self.gs.codim()
    }

    fn h(&self, z: &[TSeries]) -> Vec<TSeries> {
        ansatz_from_matrix(&self.b, z)
    }

    /// `F_i = u^{-1}[f_i(s + u h) − f_i(s)]` with `u = ε t^δ`.
    fn f_term(&self, h: &[TSeries]) -> Vec<TSeries> {
        let k = self.k_eff;
        let max_u = if self.delta == 0 { usize::MAX } else { k / self.delta + 1 };
        self.gs
            .compiled_f_p()
            .iter()
            .map(|f| {
                let upoly = compose_u_poly(f, &self.s, h, max_u, k);
                let mut out = TSeries::zero(k);
                for (deg, coeff) in upoly.iter().enumerate().skip(1) {
                    let shift = self.delta * (deg - 1);
                    if shift > k {
                        break;
                    }
                    let w = self.eps.powi(deg as i32 - 1);
                    if w == 0.0 {
                        continue;
                    }
                    out.add_assign_scaled(&coeff.shift(shift as isize, 0.0).expect("non-negative shift"), w);
                }
                out
            })
            .collect()
    }

    fn gamma(&self, h: &[TSeries]) -> Vec<TSeries> {
        gamma_series(&self.s, self.gs.ws().omega(), self.eps, self.delta, h, self.k_int)
    }

    /// `G_i = t^{-p_i-δ} f_gt,i(γ)`.
    fn g_term(&self, gamma: &[TSeries]) -> Result<Vec<TSeries>> {
        self.gs
            .compiled_f_gt()
            .iter()
            .zip(self.gs.degrees())
            .map(|(g, &p)| {
                let comp = compose_poly(g, gamma);
                let tol = 1e-12 * comp.max_abs().max(1.0);
                Ok(comp.shift(-((p as usize + self.delta) as isize), tol)?.truncate(self.k_eff))
            })
            .collect()
    }

    /// `(F(z) − A z) + G(z)`, componentwise.
    fn nonlinear(&self, z: &[TSeries]) -> Result<Vec<TSeries>> {
        let h = self.h(z);
        let f = self.f_term(&h);
        let g = self.g_term(&self.gamma(&h))?;
        Ok((0..self.c())
            .map(|i| {
                let mut r = f[i].add(&g[i]);
                for (k, zk) in z.iter().enumerate() {
                    r.add_assign_scaled(zk, -self.a[(i, k)]);
                }
                r
            })
            .collect())
    }

    fn apply_adj(&self, v: &[TSeries]) -> Vec<TSeries> {
        (0..self.c())
            .map(|i| {
                let mut r = TSeries::zero(v[0].trunc());
                for (k, vk) in v.iter().enumerate() {
                    r.add_assign_scaled(vk, self.adj[(i, k)]);
                }
                r
            })
            .collect()
    }

    fn step(&self, z: &[TSeries]) -> Result<Vec<TSeries>> {
        let nl = self.nonlinear(z)?;
        Ok(self.apply_adj(&nl).into_iter().map(|r| r.scale(-1.0 / self.kappa)).collect())
    }

    /// Left-hand side `κ z + A^∨[(F − A z) + G]`.
    fn residual(&self, z: &[TSeries]) -> Result<Vec<TSeries>> {
        let nl = self.nonlinear(z)?;
        Ok(self
            .apply_adj(&nl)
            .into_iter()
            .zip(z)
            .map(|(r, zi)| {
                let mut r = r;
                r.add_assign_scaled(zi, self.kappa);
                r
            })
            .collect())
    }

    /// Lipschitz estimate of the constant-term map `z ↦ A^∨[(F − A z) + G]`
    /// on a ball, divided by `|ε|`.
    fn same_order_lipschitz(&self, radius: f64, seed: u64) -> Result<f64> {
        let flat = Problem { k_eff: 0, k_int: budget(self.gs, 0, 0), ..self.shallow() };
        let c = self.c();
        let eval = |v: &[f64]| -> Result<DVector<f64>> {
            let z: Vec<TSeries> = v.iter().map(|&x| TSeries::constant(x, 0)).collect();
            let nl = flat.nonlinear(&z)?;
            let r = flat.apply_adj(&nl);
            Ok(DVector::from_iterator(c, r.iter().map(|s| s.coeff(0))))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            loop {
                let v: Vec<f64> = (0..c).map(|_| rng.random_range(-1.0..1.0)).collect();
                if norm(&v) <= 1.0 {
                    return v.into_iter().map(|x| x * radius).collect();
                }
            }
        };
        let mut l: f64 = 0.0;
        for _ in 0..64 {
            let a = ball(&mut rng);
            let d: Vec<f64> = (0..c).map(|_| rng.random_range(-1.0..1.0) * 1e-3 * radius).collect();
            let b: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
            let q = (eval(&a)? - eval(&b)?).norm() / norm(&d);
            l = l.max(q);
            let far = ball(&mut rng);
            let dd = a.iter().zip(&far).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            if dd > 0.0 {
                l = l.max((eval(&a)? - eval(&far)?).norm() / dd);
            }
        }
        Ok(l / self.eps.abs())
    }

    fn shallow(&self) -> Problem<'a> {
        Problem {
            gs: self.gs,
            s: self.s.clone(),
            eps: self.eps,
            delta: self.delta,
            k_eff: self.k_eff,
            k_int: self.k_int,
            b: self.b.clone(),
            a: self.a.clone(),
            adj: self.adj.clone(),
            kappa: self.kappa,
        }
    }
}

/// `h_j = g_j Σ_i ∂_j f_i(s)·z_i` with `b[(i, j)] = g_j ∂_j f_i(s)`.
fn ansatz_from_matrix(b: &DMatrix<f64>, z: &[TSeries]) -> Vec<TSeries> {
    let k = z.iter().map(TSeries::trunc).min().unwrap_or(0);
    (0..b.ncols())
        .map(|j| {
            let mut h = TSeries::zero(k);
            for (i, zi) in z.iter().enumerate() {
                if b[(i, j)] != 0.0 {
                    h.add_assign_scaled(zi, b[(i, j)]);
                }
            }
            h
        })
        .collect()
}

/// The Ansatz `h_j = (Σ_{i ≤ groupEnd(j)} s_i²)·∂_j f_p(s)ᵀ·z`.
pub fn ansatz_h(gs: &GermSystem, s: &[f64], z: &[TSeries]) -> Vec<TSeries> {
    let g = gs.ws().group_factors(s);
    let mut b = gs.gradient(s);
    for (j, gj) in g.iter().enumerate() {
        for i in 0..gs.codim() {
            b[(i, j)] *= gj;
        }
    }
    ansatz_from_matrix(&b, z)
}

/// `f(s + u h)` as a polynomial in `u` with series coefficients, keeping
/// `u`-degrees up to `max_u`.
fn compose_u_poly(f: &CompiledPoly, s: &[f64], h: &[TSeries], max_u: usize, k: usize) -> Vec<TSeries> {
    let n = s.len();
    // (s_j + u h_j)^e for every exponent that occurs
    let powers: Vec<Vec<Vec<TSeries>>> = (0..n)
        .map(|j| {
            let emax = f.max_exponent(j) as usize;
            let mut hp = vec![TSeries::constant(1.0, k)];
            for _ in 0..emax.min(max_u) {
                let next = hp.last().unwrap().mul(&h[j]);
                hp.push(next);
            }
            (0..=emax)
                .map(|e| {
                    (0..=e.min(max_u))
                        .map(|d| hp[d].scale(binomial(e, d) * s[j].powi((e - d) as i32)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut out: Vec<TSeries> = Vec::new();
    for (exps, c) in f.terms() {
        let mut acc: Vec<TSeries> = vec![TSeries::constant(*c, k)];
        for (j, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            acc = upoly_mul(&acc, &powers[j][e as usize], max_u, k);
        }
        for (d, coeff) in acc.into_iter().enumerate() {
            if out.len() <= d {
                out.resize(d + 1, TSeries::zero(k));
            }
            out[d].add_assign_scaled(&coeff, 1.0);
        }
    }
    out
}

fn upoly_mul(a: &[TSeries], b: &[TSeries], max_u: usize, k: usize) -> Vec<TSeries> {
    let deg = (a.len() + b.len() - 2).min(max_u);
    let mut out = vec![TSeries::zero(k); deg + 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_exact_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > deg {
                break;
            }
            out[i + j].add_assign_scaled(&ai.mul(bj), 1.0);
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Components `t^{ω_j}(s_j + ε t^δ h_j)` as series truncated at `k_int`.
fn gamma_series(s: &[f64], omega: &[u32], eps: f64, delta: usize, h: &[TSeries], k_int: usize) -> Vec<TSeries> {
    s.iter()
        .zip(omega)
        .enumerate()
        .map(|(j, (&sj, &w))| {
            let w = w as usize;
            let mut g = TSeries::monomial(sj, w, k_int);
            if eps != 0.0 {
                for m in 0..=h[j].trunc() {
                    let idx = w + delta + m;
                    if idx > k_int {
                        break;
                    }
                    let v = g.coeff(idx) + eps * h[j].coeff(m);
                    g.set_coeff(idx, v);
                }
            }
            g
        })
        .collect()
}

fn max_change(a: &[TSeries], b: &[TSeries]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.sub(y).max_abs()).fold(0.0, f64::max)
}

/// Left-hand side of the extended equation at `z`; vanishes at the solution.
pub fn assemble_residual(gs: &GermSystem, s: &[f64], eps: f64, z: &[TSeries], k_eff: usize) -> Result<Vec<TSeries>> {
    let delta = match gs.delta() {
        WOrder::Finite(d) => d as usize,
        WOrder::Infinite => {
            let kappa = gs.obstruction_coefficient(s);
            return Ok(z.iter().map(|zi| zi.truncate(k_eff).scale(kappa)).collect());
        }
    };
    let pr = Problem::new(gs, s, eps, delta, k_eff)?;
    let z: Vec<TSeries> = z.iter().map(|zi| zi.truncate(k_eff)).collect();
    pr.residual(&z)
}

/// Solve for `z(t)` modulo `t^{k_eff+1}` and assemble the deformed arc.
pub fn solve_arc(gs: &GermSystem, s: &[f64], eps: f64, k_eff: usize) -> Result<DeformedArc> {
    if s.len() != gs.nvars() {
        return Err(Error::DimensionMismatch { expected: gs.nvars(), got: s.len() });
    }
    let omega = gs.ws().omega().to_vec();
    let c = gs.codim();
    let delta = match gs.delta() {
        WOrder::Finite(d) => d as usize,
        WOrder::Infinite => {
            let coefficient = gs.obstruction_coefficient(s);
            if coefficient < OBSTRUCTION_TOL {
                return Err(Error::Obstructed { s: s.to_vec(), coefficient });
            }
            let k_int = k_eff + gs.p_max() as usize;
            let z = vec![TSeries::zero(k_eff); c];
            let h = vec![TSeries::zero(k_eff); gs.nvars()];
            let gamma = gamma_series(s, &omega, 0.0, 0, &h, k_int);
            let mut arc = DeformedArc {
                s: s.to_vec(),
                omega,
                eps,
                delta: WOrder::Infinite,
                k_eff,
                k_int,
                z,
                h,
                gamma,
                coefficient,
                near_obstruction: coefficient < NEAR_OBSTRUCTION,
                sweeps: 0,
                equation_residual: 0.0,
                residual_ord: None,
                t_max: 1.0,
            };
            finish_arc(gs, &mut arc);
            return Ok(arc);
        }
    };
    let pr = Problem::new(gs, s, eps, delta, k_eff)?;
    let mut z = vec![TSeries::zero(k_eff); c];
    let mut sweeps = 0;
    if delta == 0 && eps != 0.0 {
        let z0 = pr.step(&z)?;
        // q ≤ 1/2 on the ball of radius 2‖z0‖ makes the step a self-map of it
        let radius = (2.0 * z0.iter().map(|q| q.coeff(0).powi(2)).sum::<f64>().sqrt()).max(SAME_ORDER_MIN_RADIUS);
        let l1 = pr.same_order_lipschitz(radius, 0x11f)?;
        let eps_max = if l1 > 0.0 { 0.5 * pr.kappa / l1 } else { f64::INFINITY };
        if eps.abs() > eps_max {
            return Err(Error::NoContraction { eps: eps.abs(), eps_max });
        }
        let mut converged = false;
        while sweeps < MAX_SAME_ORDER_ITERS {
            let next = pr.step(&z)?;
            sweeps += 1;
            let change = max_change(&next, &z);
            z = next;
            let scale = z.iter().map(TSeries::max_abs).fold(1.0, f64::max);
            if !change.is_finite() {
                break;
            }
            if change <= CONTRACTION_TOL * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoContraction { eps: eps.abs(), eps_max });
        }
    } else {
        let n_sweeps = if delta == 0 { 2 } else { (k_eff + 1).div_ceil(delta) + 1 };
        for _ in 0..n_sweeps {
            z = pr.step(&z)?;
            sweeps += 1;
        }
    }
    let equation_residual = pr.residual(&z)?.iter().map(TSeries::max_abs).fold(0.0, f64::max);
    let h = pr.h(&z);
    let gamma = pr.gamma(&h);
    let mut arc = DeformedArc {
        s: s.to_vec(),
        omega,
        eps,
        delta: WOrder::Finite(delta as u64),
        k_eff,
        k_int: pr.k_int,
        z,
        h,
        gamma,
        coefficient: pr.kappa,
        near_obstruction: pr.kappa < NEAR_OBSTRUCTION,
        sweeps,
        equation_residual,
        residual_ord: None,
        t_max: 1.0,
    };
    finish_arc(gs, &mut arc);
    Ok(arc)
}

fn finish_arc(gs: &GermSystem, arc: &mut DeformedArc) {
    arc.t_max = estimate_t_max(arc);
    if arc.near_obstruction {
        arc.t_max *= 0.5;
    }
    if crate::obstruction::on_link(gs, &arc.s, 1e-12) {
        arc.residual_ord = arc_residual_order(gs, arc, 1e-12).ok();
    }
}

/// One more sweep from the solved `z`; the size of the change measures idempotence.
pub fn resweep(gs: &GermSystem, arc: &DeformedArc) -> Result<Vec<TSeries>> {
    match arc.delta {
        WOrder::Infinite => Ok(arc.z.clone()),
        WOrder::Finite(d) => Problem::new(gs, &arc.s, arc.eps, d as usize, arc.k_eff)?.step(&arc.z),
    }
}

/// Relative tolerance for the vanishing of composed coefficients.
pub const RESIDUAL_RTOL: f64 = 1e-9;

/// `(f_p + ε f_gt)(γ)` per equation with the magnitude scale of its two parts.
pub fn family_on_arc(gs: &GermSystem, arc: &DeformedArc) -> Vec<(TSeries, f64)> {
    gs.compiled_f_p()
        .iter()
        .zip(gs.compiled_f_gt())
        .map(|(f, g)| {
            let a = compose_poly(f, &arc.gamma);
            let b = compose_poly(g, &arc.gamma).scale(arc.eps);
            let scale = a.max_abs().max(b.max_abs());
            (a.add(&b), scale)
        })
        .collect()
}

/// Least t-order of `(f_{p_i} + ε f_gt,i)(γ)`; the full budget plus one when
/// everything vanishes.
pub fn arc_residual_order(gs: &GermSystem, arc: &DeformedArc, tol: f64) -> Result<usize> {
    let fs = gs.eval_f_p(&arc.s);
    if let Some(v) = fs.iter().find(|v| v.abs() > tol) {
        return Err(Error::NotOnLink { value: *v });
    }
    Ok(family_on_arc(gs, arc)
        .iter()
        .map(|(r, scale)| r.ord_scaled(RESIDUAL_RTOL, *scale).unwrap_or(arc.k_int + 1))
        .min()
        .unwrap_or(arc.k_int + 1))
}

/// Largest coefficient of the composed family relative to its scale, floored
/// at 1 as in [`TSeries::ord_scaled`].
pub fn residual_tail(gs: &GermSystem, arc: &DeformedArc) -> f64 {
    family_on_arc(gs, arc)
        .iter()
        .map(|(r, scale)| r.max_abs() / scale.max(1.0))
        .fold(0.0, f64::max)
}

/// Largest grid value of `t` below which `‖ε t^δ h(t)‖ < 1/2`, with a
/// geometric bound on the truncated tail.
pub fn estimate_t_max(arc: &DeformedArc) -> f64 {
    let grid: Vec<f64> = log_grid(1e-4, 1.0, T_MAX_GRID);
    let delta = match arc.delta {
        WOrder::Finite(d) => d as i32,
        WOrder::Infinite => return 1.0,
    };
    if arc.eps == 0.0 {
        return 1.0;
    }
    let k = arc.k_eff;
    let mags: Vec<f64> = (0..=k).map(|m| arc.h.iter().map(|h| h.coeff(m).abs()).fold(0.0, f64::max)).collect();
    // root test over the upper half of the orders; continuous in s
    let ratio = ((k / 2).max(1)..=k).map(|m| mags[m].powf(1.0 / m as f64)).fold(0.0, f64::max);
    let mut best = 0.0;
    for &t in &grid {
        let head = norm(&arc.h.iter().map(|h| h.eval(t)).collect::<Vec<_>>());
        let rt = ratio * t;
        let tail = if ratio == 0.0 {
            0.0
        } else if rt < 1.0 {
            (arc.h.len() as f64).sqrt() * rt.powi(k as i32 + 1) / (1.0 - rt)
        } else {
            f64::INFINITY
        };
        if (arc.eps * t.powi(delta)).abs() * (head + tail) < 0.5 {
            best = t;
        } else {
            break;
        }
    }
    best
}

impl DeformedArc {
    pub fn delta_finite(&self) -> usize {
        self.delta.finite().unwrap_or(0) as usize
    }

    /// `t^{ω_j}(s_j + ε t^δ h_j(t))`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let d = self.delta_finite() as i32;
        self.s
            .iter()
            .zip(&self.omega)
            .zip(&self.h)
            .map(|((&sj, &w), h)| t.powi(w as i32) * (sj + self.eps * t.powi(d) * h.eval(t)))
            .collect()
    }

    /// `ε t^{ω_j+δ} h_j(t)`.
    pub fn offset_at(&self, t: f64) -> Vec<f64> {
        let d = self.delta_finite() as i32;
        self.omega
            .iter()
            .zip(&self.h)
            .map(|(&w, h)| self.eps * t.powi(w as i32 + d) * h.eval(t))
            .collect()
    }

    fn offset_velocity(&self, t: f64) -> Vec<f64> {
        let dh: Vec<TSeries> = self.h.iter().map(TSeries::derivative).collect();
        self.offset_velocity_with(&dh, t)
    }

    fn offset_velocity_with(&self, dh: &[TSeries], t: f64) -> Vec<f64> {
        let d = self.delta_finite() as i32;
        self.omega
            .iter()
            .zip(&self.h)
            .zip(dh)
            .map(|((&w, h), dh)| {
                let e = w as i32 + d;
                self.eps * (e as f64 * t.powi(e - 1) * h.eval(t) + t.powi(e) * dh.eval(t))
            })
            .collect()
    }

    /// The undeformed arc `t ↦ t^ω s`.
    pub fn undeformed(&self) -> MonomialArc {
        MonomialArc { s: self.s.clone(), omega: self.omega.clone() }
    }

    /// The deformation `γ_{ε,s} − γ_s` as an arc of its own.
    pub fn offset(&self) -> ArcOffset<'_> {
        ArcOffset(self, self.h.iter().map(TSeries::derivative).collect())
    }
}

impl ArcPath for DeformedArc {
    fn dim(&self) -> usize {
        self.s.len()
    }
    fn position(&self, t: f64) -> Vec<f64> {
        self.eval(t)
    }
    fn velocity(&self, t: f64) -> Vec<f64> {
        let base = self.undeformed().velocity(t);
        base.iter().zip(self.offset_velocity(t)).map(|(a, b)| a + b).collect()
    }
}

/// The offset of an arc, with `h'` precomputed.
pub struct ArcOffset<'a>(&'a DeformedArc, Vec<TSeries>);

impl ArcPath for ArcOffset<'_> {
    fn dim(&self) -> usize {
        self.0.s.len()
    }
    fn position(&self, t: f64) -> Vec<f64> {
        self.0.offset_at(t)
    }
    fn velocity(&self, t: f64) -> Vec<f64> {
        self.0.offset_velocity_with(&self.1, t)
    }
}

/// Default tangency grid: 12 points from `min(0.1, t_max/2)` down to `1e-4`.
pub fn tord_grid(t_max: f64) -> Vec<f64> {
    log_grid(0.1f64.min(0.5 * t_max), 1e-4, 12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::WeightSystem;
    use crate::poly::parse_poly;

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

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ansatz_examples() {
        let q = quadric();
        let z = vec![TSeries::constant(0.5, 2)];
        let h = ansatz_h(&q, &[0.6, 0.8], &z);
        assert!((h[0].coeff(0) - 0.6).abs() < 1e-15 && (h[1].coeff(0) + 0.8).abs() < 1e-15);
        let bs = germ(&[1, 2, 3], &["x", "y", "z"], &["z^5 + x^15 + x*y^7"], &["z*y^6"]);
        let h = ansatz_h(&bs, &[0.0, 0.6, 0.8], &z);
        assert!(h[0].is_exact_zero());
        let h0 = ansatz_h(&q, &[0.6, 0.8], &[TSeries::zero(2)]);
        assert!(h0.iter().all(TSeries::is_exact_zero));
    }

    #[test]
    fn residual_at_zero_is_leading_perturbation() {
        let q = quadric();
        let r = assemble_residual(&q, &[R, R], 1.0, &[TSeries::zero(4)], 4).unwrap();
        assert!((r[0].coeff(0) - R.powi(3)).abs() < 1e-15);
        let zero = germ(&[1, 1], &["x", "y"], &["x^2 - y^2"], &["0"]);
        let z = vec![TSeries::from_coeffs(vec![0.3, 0.1, 0.0])];
        let r = assemble_residual(&zero, &[0.6, 0.8], 0.0, &z, 2).unwrap();
        let kappa = zero.obstruction_coefficient(&[0.6, 0.8]);
        assert!((r[0].coeff(0) - 0.3 * kappa).abs() < 1e-14);
    }

    #[test]
    fn hand_verified_quadric_arc() {
        let q = quadric();
        let arc = solve_arc(&q, &[R, R], 1.0, 8).unwrap();
        assert!((arc.z[0].coeff(0) + std::f64::consts::SQRT_2 / 16.0).abs() < 1e-12);
        assert!((arc.h[0].coeff(0) + 0.125).abs() < 1e-12);
        assert!((arc.h[1].coeff(0) - 0.125).abs() < 1e-12);
        let ord = arc_residual_order(&q, &arc, 1e-12).unwrap();
        assert!(ord >= 2 + 1 + 9, "{ord}");
        assert_eq!(arc.residual_ord, Some(ord));
    }

    #[test]
    fn zero_epsilon_gives_undeformed_arc() {
        let q = quadric();
        let arc = solve_arc(&q, &[R, R], 0.0, 6).unwrap();
        for (j, g) in arc.gamma.iter().enumerate() {
            assert_eq!(g, &TSeries::monomial(arc.s[j], 1, arc.k_int));
        }
        let res = family_on_arc(&q, &arc);
        assert!(res.iter().all(|(r, _)| r.is_exact_zero()));
        assert_eq!(estimate_t_max(&arc), 1.0);
    }

    #[test]
    fn off_link_direction_is_reported() {
        let q = quadric();
        let arc = solve_arc(&q, &[1.0, 0.0], 1.0, 6).unwrap();
        assert!(matches!(arc_residual_order(&q, &arc, 1e-12), Err(Error::NotOnLink { .. })));
        assert!(arc.equation_residual < 1e-12);
    }

    #[test]
    fn obstructed_direction_is_refused() {
        let bs = germ(&[1, 2, 3], &["x", "y", "z"], &["z^5 + x^15 + x*y^7"], &["z*y^6"]);
        assert!(matches!(solve_arc(&bs, &[0.0, 1.0, 0.0], 0.05, 6), Err(Error::Obstructed { .. })));
    }

    #[test]
    fn t_max_shrinks_with_epsilon() {
        let q = quadric();
        let mut last = f64::INFINITY;
        for eps in [1.0, 4.0, 16.0, 64.0] {
            let t = solve_arc(&q, &[R, R], eps, 8).unwrap().t_max;
            assert!(t <= last);
            last = t;
        }
        assert!(last < 1.0);
    }

    #[test]
    fn resweep_is_idempotent() {
        let q = quadric();
        let arc = solve_arc(&q, &[R, R], 1.0, 8).unwrap();
        let again = resweep(&q, &arc).unwrap();
        assert!(max_change(&again, &arc.z) <= 1e-14);
    }

    #[test]
    fn u_polynomial_matches_direct_composition() {
        // f(s + u h) at a numeric u equals the u-polynomial evaluated at u
        let q = germ(&[1, 1], &["x", "y"], &["x^3 - 2*x*y^2"], &["0"]);
        let s = [0.6, 0.8];
        let h = vec![TSeries::from_coeffs(vec![0.3, -0.2, 0.1]), TSeries::from_coeffs(vec![-0.5, 0.4, 0.0])];
        let up = compose_u_poly(&q.compiled_f_p()[0], &s, &h, usize::MAX, 2);
        let u = 0.37;
        let t = 0.21;
        let direct = {
            let x: Vec<f64> = (0..2).map(|j| s[j] + u * h[j].eval(t)).collect();
            q.compiled_f_p()[0].eval(&x)
        };
        // only exact through t²; compare the t-polynomial to that order with a tight t
        let via: f64 = up.iter().enumerate().map(|(d, c)| u.powi(d as i32) * c.eval(t)).sum();
        assert!((via - direct).abs() < 0.02);
        let t = 1e-4;
        let direct = {
            let x: Vec<f64> = (0..2).map(|j| s[j] + u * h[j].eval(t)).collect();
            q.compiled_f_p()[0].eval(&x)
        };
        let via: f64 = up.iter().enumerate().map(|(d, c)| u.powi(d as i32) * c.eval(t)).sum();
        assert!((via - direct).abs() < 1e-10);
    }
}
