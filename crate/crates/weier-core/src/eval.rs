//! Evaluation of the series-defined objects: `W`, `Y`, `Gamma`, the flow
//! projection, the expanding map `T` and its local inverses, and the graph
//! flattening map.

use std::f64::consts::TAU;

use crate::barg::BaryArg;
use crate::kernel::KernelFunction;
use crate::params::{Params, TruncationBudget};
use crate::symbols::{SymbolStream, Word};
use crate::CoreError;

/// Flattened coefficient tables: one sin/cos per distinct frequency serves
/// every coordinate, and the inner loops run over dense slices instead of
/// per-coordinate maps. Values match the map-based kernel evaluation term
/// for term.
struct KernelTables {
    d: usize,
    a0: Vec<f64>,
    /// Distinct stored frequencies, ascending.
    freqs: Vec<f64>,
    /// `(freq index, coord, re, im)` sorted by frequency then coordinate.
    terms: Vec<(u32, u32, f64, f64)>,
    /// Same layout with coefficients of the derivative `2 pi i m a_m`.
    dterms: Vec<(u32, u32, f64, f64)>,
}

impl KernelTables {
    fn new(k: &KernelFunction) -> Self {
        let mut entries: Vec<(u64, u32, f64, f64)> = k
            .stored_coeffs()
            .map(|(c, m, a)| (m, c as u32, a.re, a.im))
            .collect();
        entries.sort_by_key(|&(m, c, _, _)| (m, c));
        let mut freqs: Vec<f64> = Vec::new();
        let mut freq_ids: Vec<u64> = Vec::new();
        let mut terms = Vec::with_capacity(entries.len());
        let mut dterms = Vec::with_capacity(entries.len());
        for (m, c, re, im) in entries {
            if freq_ids.last() != Some(&m) {
                freq_ids.push(m);
                freqs.push(m as f64);
            }
            let fi = (freqs.len() - 1) as u32;
            terms.push((fi, c, re, im));
            // a * (2 pi i m): (re + i im)(i tau m) = (-im - ... ) expanded.
            let w = TAU * m as f64;
            dterms.push((fi, c, -im * w, re * w));
        }
        KernelTables {
            d: k.d(),
            a0: k.a0().to_vec(),
            freqs,
            terms,
            dterms,
        }
    }

    #[inline]
    fn eval_into(&self, x: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.a0);
        let mut last = u32::MAX;
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for &(fi, coord, re, im) in &self.terms {
            if fi != last {
                let theta = TAU * (self.freqs[fi as usize] * x).rem_euclid(1.0);
                let sc = theta.sin_cos();
                s = sc.0;
                c = sc.1;
                last = fi;
            }
            out[coord as usize] += 2.0 * (re * c - im * s);
        }
    }

    #[inline]
    fn deriv1_into(&self, x: f64, out: &mut [f64]) {
        out.fill(0.0);
        let mut last = u32::MAX;
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for &(fi, coord, re, im) in &self.dterms {
            if fi != last {
                let theta = TAU * (self.freqs[fi as usize] * x).rem_euclid(1.0);
                let sc = theta.sin_cos();
                s = sc.0;
                c = sc.1;
                last = fi;
            }
            out[coord as usize] += 2.0 * (re * c - im * s);
        }
    }

    /// `(phi(base + delta) - phi(base)) / delta` without cancellation.
    #[inline]
    fn delta_over_into(&self, base: f64, delta: f64, out: &mut [f64]) {
        out.fill(0.0);
        let mut last = u32::MAX;
        let (mut zr_base, mut zi_base) = (0.0f64, 0.0f64);
        let (mut tr, mut ti) = (0.0f64, 0.0f64);
        for &(fi, coord, re, im) in &self.terms {
            if fi != last {
                let m = self.freqs[fi as usize];
                let theta = TAU * (m * base).rem_euclid(1.0);
                let sc = theta.sin_cos();
                zi_base = sc.0;
                zr_base = sc.1;
                if delta == 0.0 {
                    tr = 0.0;
                    ti = TAU * m;
                } else {
                    let phi = TAU * m * delta;
                    let half = (0.5 * phi).sin();
                    tr = -2.0 * half * half / delta;
                    ti = phi.sin() / delta;
                }
                last = fi;
            }
            // 2 Re((re + i im)(zr + i zi)(tr + i ti))
            let zr = re * zr_base - im * zi_base;
            let zi = re * zi_base + im * zr_base;
            out[coord as usize] += 2.0 * (zr * tr - zi * ti);
        }
    }
}

/// Reusable evaluator binding a kernel, parameters and budgets: the hot path
/// for samplers and box counting. The free functions below construct one per
/// call; construct it once when evaluating many points.
pub struct Evaluator {
    p: Params,
    n_w: usize,
    n_y: usize,
    tables: KernelTables,
}

impl Evaluator {
    pub fn new(p: &Params, k: &KernelFunction, tb: &TruncationBudget) -> Self {
        Evaluator {
            p: *p,
            n_w: tb.n_w(),
            n_y: tb.n_y(),
            tables: KernelTables::new(k),
        }
    }

    pub fn d(&self) -> usize {
        self.tables.d
    }

    /// `W(x)` into `out` (length `d`).
    pub fn w_into(&self, x: f64, out: &mut [f64]) {
        let mut arg = BaryArg::from_f64(reduce_mod1(x));
        let mut args = Vec::with_capacity(self.n_w + 1);
        for _ in 0..=self.n_w {
            args.push(arg.to_f64());
            arg.mul_b_mod1(self.p.b());
        }
        out.fill(0.0);
        let mut term = vec![0.0; self.tables.d];
        for &xn in args.iter().rev() {
            self.tables.eval_into(xn, &mut term);
            for (o, t) in out.iter_mut().zip(&term) {
                *o = *o * self.p.lambda() + t;
            }
        }
    }

    pub fn w(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.tables.d];
        self.w_into(x, &mut out);
        out
    }

    /// `Y(x, j)` into `out`.
    pub fn y_into(&self, x: f64, j: &SymbolStream, out: &mut [f64]) {
        let mut args = Vec::with_capacity(self.n_y);
        let mut a = x;
        for n in 0..self.n_y {
            a = (a + j.digit(n) as f64) / self.p.b_f();
            args.push(a);
        }
        out.fill(0.0);
        let mut term = vec![0.0; self.tables.d];
        for &an in args.iter().rev() {
            self.tables.deriv1_into(an, &mut term);
            for (o, t) in out.iter_mut().zip(&term) {
                *o = (*o + t) * self.p.gamma();
            }
        }
        for o in out.iter_mut() {
            *o = -*o;
        }
    }

    /// `Gamma_j(x)` into `out`.
    pub fn gamma_into(&self, x: f64, j: &SymbolStream, out: &mut [f64]) {
        let d = self.tables.d;
        if x == 0.0 {
            out.fill(0.0);
            return;
        }
        let extra = if x.abs() > 1.0 {
            (x.abs().ln() / -self.p.gamma().ln()).ceil() as usize + 1
        } else {
            0
        };
        let terms = self.n_y + extra;
        let mut buf = vec![0.0; terms * d];
        let mut scratch = vec![0.0; d];
        let mut s = 0.0; // backward orbit of 0
        let mut delta = x; // x / b^n
        let mut weight = x; // x gamma^n
        for n in 0..terms {
            s = (s + j.digit(n) as f64) / self.p.b_f();
            delta /= self.p.b_f();
            weight *= self.p.gamma();
            self.tables.delta_over_into(s, delta, &mut scratch);
            for (c, v) in scratch.iter().enumerate() {
                buf[n * d + c] = v * weight;
            }
        }
        out.fill(0.0);
        for n in (0..terms).rev() {
            for (c, o) in out.iter_mut().enumerate() {
                *o += buf[n * d + c];
            }
        }
        for o in out.iter_mut() {
            *o = -*o;
        }
    }

    pub fn gamma(&self, x: f64, j: &SymbolStream) -> Vec<f64> {
        let mut out = vec![0.0; self.tables.d];
        self.gamma_into(x, j, &mut out);
        out
    }
}

/// Reduce into `[0, 1)` by floor subtraction; exact 1.0 maps to 0.0.
pub fn reduce_mod1(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// The unique `n_hat` with `lambda^n_hat <= b^-n < lambda^(n_hat - 1)`.
pub fn hat_level(p: &Params, n: u32) -> u32 {
    if n == 0 {
        return 0;
    }
    let lnl = p.lambda().ln();
    let target = -(n as f64) * p.b_f().ln();
    let mut k = (target / lnl).ceil().max(0.0) as i64;
    let bn = p.b_f().powi(-(n as i32));
    if bn > 0.0 {
        // Nudge against round-off in the log division.
        while p.lambda().powi(k as i32) > bn {
            k += 1;
        }
        while k > 0 && p.lambda().powi(k as i32 - 1) <= bn {
            k -= 1;
        }
    }
    k as u32
}

/// `phi(x)`.
pub fn eval_phi(k: &KernelFunction, x: f64) -> Vec<f64> {
    k.eval(x)
}

/// Termwise derivative `phi^(order)(x)`, order 1 or 2.
pub fn eval_phi_deriv(k: &KernelFunction, x: f64, order: u32) -> Vec<f64> {
    k.eval_deriv(x, order)
}

/// `W(x) = sum_{n=0}^{n_W} lambda^n phi(b^n x)`, with per-coordinate error
/// at most `tb.tol()`.
///
/// The arguments `b^n x mod 1` come from an exact fixed-point iteration, so
/// deep terms see the true orbit of `x` rather than round-off noise, and the
/// sum runs smallest term first (Horner in `lambda`).
pub fn eval_w(p: &Params, k: &KernelFunction, x: f64, tb: &TruncationBudget) -> Vec<f64> {
    Evaluator::new(p, k, tb).w(x)
}

/// The stable slope field
/// `Y(x, j) = -sum_{n>=1} gamma^n phi'(x/b^n + j_1/b^n + ... + j_n/b)`,
/// truncated to `tb.n_y()` terms (error at most `tb.tol()`).
pub fn eval_y(
    p: &Params,
    k: &KernelFunction,
    x: f64,
    j: &SymbolStream,
    tb: &TruncationBudget,
) -> Vec<f64> {
    let ev = Evaluator::new(p, k, tb);
    let mut out = vec![0.0; k.d()];
    ev.y_into(x, j, &mut out);
    out
}

/// `Gamma_j(x) = int_0^x Y(t, j) dt`, evaluated through the closed series
///
/// `Gamma_j(x) = -sum_{n>=1} lambda^-n [phi(a_n(x)) - phi(a_n(0))]`
///
/// with `a_n` the backward orbit of `x`. Each bracket is computed without
/// cancellation and carries the decaying prefactor `x gamma^n`, so no
/// intermediate quantity grows. Per-coordinate error at most `tb.tol()` for
/// `|x| <= 1` (the term count is extended proportionally beyond).
pub fn eval_gamma(
    p: &Params,
    k: &KernelFunction,
    x: f64,
    j: &SymbolStream,
    tb: &TruncationBudget,
) -> Vec<f64> {
    Evaluator::new(p, k, tb).gamma(x, j)
}

/// The flow projection `pi_j(x, y) = y - Gamma_j(x)` onto the fiber `x = 0`.
pub fn flow_projection(
    p: &Params,
    k: &KernelFunction,
    j: &SymbolStream,
    x: f64,
    y: &[f64],
    tb: &TruncationBudget,
) -> Vec<f64> {
    let g = eval_gamma(p, k, x, j, tb);
    y.iter().zip(g).map(|(yi, gi)| yi - gi).collect()
}

/// The composed local inverse `g_w = g_{w_1} o g_{w_2} o ... o g_{w_n}`
/// applied to `(x, y)`; the last digit acts first. A single digit acts as
/// `g_i(x, y) = ((x + i)/b, lambda y + phi((x + i)/b))`.
pub fn g_apply(
    p: &Params,
    k: &KernelFunction,
    w: &Word,
    x: f64,
    y: &[f64],
) -> (f64, Vec<f64>) {
    let mut cx = x;
    let mut cy = y.to_vec();
    for &digit in w.digits().iter().rev() {
        cx = (cx + digit as f64) / p.b_f();
        let phi = k.eval(cx);
        for (yi, pi) in cy.iter_mut().zip(phi) {
            *yi = p.lambda() * *yi + pi;
        }
    }
    (cx, cy)
}

/// The expanding map `T(x, y) = (b x mod 1, (y - phi(x)) / lambda)`.
pub fn t_apply(p: &Params, k: &KernelFunction, x: f64, y: &[f64]) -> (f64, Vec<f64>) {
    let tx = reduce_mod1(p.b_f() * x);
    let phi = k.eval(x);
    let ty = y
        .iter()
        .zip(phi)
        .map(|(yi, pi)| (yi - pi) / p.lambda())
        .collect();
    (tx, ty)
}

/// Max deviation, over the samples, from the transformation equation
/// `pi_j(g_w(x, y)) = lambda^|w| pi_{w* j}(x, y) + pi_j(g_w(0, 0))`.
///
/// The identity is exact; the returned residual is pure truncation error and
/// stays below `4 tb.tol()`.
pub fn transform_residual(
    p: &Params,
    k: &KernelFunction,
    w: &Word,
    j: &SymbolStream,
    samples: &[(f64, Vec<f64>)],
    tb: &TruncationBudget,
) -> f64 {
    let zeros = vec![0.0; k.d()];
    let (gx0, gy0) = g_apply(p, k, w, 0.0, &zeros);
    let shift = flow_projection(p, k, j, gx0, &gy0, tb);
    let wstar_j = j.prepend(&w.reversed());
    let lam_pow = p.lambda().powi(w.len() as i32);

    let mut worst = 0.0f64;
    for (x, y) in samples {
        let (gx, gy) = g_apply(p, k, w, *x, y);
        let lhs = flow_projection(p, k, j, gx, &gy, tb);
        let base = flow_projection(p, k, &wstar_j, *x, y, tb);
        for i in 0..k.d() {
            let rhs = lam_pow * base[i] + shift[i];
            worst = worst.max((lhs[i] - rhs).abs());
        }
    }
    worst
}

/// The flattening map `F(x, W(x)) = (x, W(x) - W^{pi_V phi}(x))` for an
/// orthonormal family spanning `V`. When `V` is the degenerate subspace the
/// output's component along `V` vanishes to within `2 tb.tol()`.
pub fn flatten_graph(
    p: &Params,
    k: &KernelFunction,
    v_basis: &[Vec<f64>],
    x: f64,
    tb: &TruncationBudget,
) -> Result<Vec<f64>, CoreError> {
    if crate::orthonormal_error(v_basis, k.d()) > 1e-9 {
        return Err(CoreError::InputError(
            "flattening basis is not orthonormal".into(),
        ));
    }
    let projected = k.project(v_basis)?;
    let w = eval_w(p, k, x, tb);
    let wp = eval_w(p, &projected, x, tb);
    let mut out = Vec::with_capacity(1 + k.d());
    out.push(x);
    for (a, b) in w.iter().zip(wp) {
        out.push(a - b);
    }
    Ok(out)
}
