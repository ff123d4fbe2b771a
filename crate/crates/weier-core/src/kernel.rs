//! Z-periodic kernels `phi: R -> R^d` stored as finite Fourier series.
//!
//! Only frequencies `m >= 0` are stored; negative frequencies are implied by
//! conjugate symmetry `a_{-m} = conj(a_m)`, which makes every kernel
//! real-valued by construction. The zero coefficient is kept separately as a
//! real number per coordinate.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::CoreError;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelFunction {
    d: usize,
    a0: Vec<f64>,
    /// Per coordinate: frequency m >= 1 -> a_m.
    coeffs: Vec<BTreeMap<u64, Complex64>>,
    /// Bound on ||phi'''||_inf for kernels obtained from samples; `None`
    /// marks an exact trigonometric polynomial.
    decay3: Option<f64>,
    /// Per-coefficient aliasing error bound (0 for exact kernels).
    alias_bound: f64,
}

impl KernelFunction {
    /// The zero kernel in `R^d`.
    pub fn zero(d: usize) -> Self {
        KernelFunction {
            d,
            a0: vec![0.0; d],
            coeffs: vec![BTreeMap::new(); d],
            decay3: None,
            alias_bound: 0.0,
        }
    }

    /// The classical kernel `phi(x) = cos(2 pi x)` (d = 1).
    pub fn cosine() -> Self {
        KernelFunction::from_entries(1, &[(1, 1, 0.5, 0.0)]).expect("static kernel")
    }

    /// The complex-exponential kernel `phi(x) = (cos 2 pi x, sin 2 pi x)`.
    pub fn complex_exp() -> Self {
        KernelFunction::from_entries(2, &[(1, 1, 0.5, 0.0), (2, 1, 0.0, -0.5)])
            .expect("static kernel")
    }

    /// Build from `(coord, m, re, im)` entries with 1-based coordinates and
    /// `m >= 0`; the `m = 0` entry must be real.
    pub fn from_entries(d: usize, entries: &[(usize, u64, f64, f64)]) -> Result<Self, CoreError> {
        if d == 0 {
            return Err(CoreError::InvalidKernel("dimension d must be >= 1".into()));
        }
        let mut k = KernelFunction::zero(d);
        for &(coord, m, re, im) in entries {
            if coord == 0 || coord > d {
                return Err(CoreError::InvalidKernel(format!(
                    "coordinate {coord} out of range 1..={d}"
                )));
            }
            if !(re.is_finite() && im.is_finite()) {
                return Err(CoreError::InvalidKernel("non-finite coefficient".into()));
            }
            if m == 0 {
                if im.abs() > 1e-12 {
                    return Err(CoreError::InvalidKernel(format!(
                        "a_0 of coordinate {coord} must be real (got imaginary part {im})"
                    )));
                }
                k.a0[coord - 1] += re;
            } else {
                let slot = k.coeffs[coord - 1].entry(m).or_insert(Complex64::ZERO);
                if *slot != Complex64::ZERO {
                    return Err(CoreError::InvalidKernel(format!(
                        "duplicate coefficient for coordinate {coord}, frequency {m}"
                    )));
                }
                *slot = Complex64::new(re, im);
            }
        }
        Ok(k)
    }

    /// Build from a full two-sided spectrum per coordinate, verifying
    /// conjugate symmetry before folding onto `m >= 0`. Used by DFT ingestion.
    pub fn from_symmetric_spectrum(
        d: usize,
        spectra: &[Vec<(i64, Complex64)>],
    ) -> Result<Self, CoreError> {
        if spectra.len() != d {
            return Err(CoreError::InvalidKernel(format!(
                "expected {d} coordinate spectra, got {}",
                spectra.len()
            )));
        }
        let scale: f64 = spectra
            .iter()
            .flatten()
            .map(|(_, a)| a.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        let mut k = KernelFunction::zero(d);
        for (c, spec) in spectra.iter().enumerate() {
            let map: BTreeMap<i64, Complex64> = spec.iter().cloned().collect();
            for (&m, &a) in &map {
                let mirror = map.get(&-m).cloned().unwrap_or(Complex64::ZERO);
                if (a - mirror.conj()).norm() > 1e-9 * scale {
                    return Err(CoreError::InvalidKernel(format!(
                        "conjugate symmetry violated at coordinate {}, frequency {m}",
                        c + 1
                    )));
                }
                if m == 0 {
                    k.a0[c] = a.re;
                } else if m > 0 {
                    // Symmetrize so the folded value is exactly self-consistent.
                    let folded = (a + mirror.conj()) * 0.5;
                    if folded != Complex64::ZERO {
                        k.coeffs[c].insert(m as u64, folded);
                    }
                }
            }
        }
        Ok(k)
    }

    /// Attach a smoothness model from ingestion: a bound on `||phi'''||_inf`
    /// and the per-coefficient aliasing error of the DFT.
    pub fn with_decay_bound(mut self, c3: f64, alias_bound: f64) -> Self {
        self.decay3 = Some(c3);
        self.alias_bound = alias_bound;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn decay3(&self) -> Option<f64> {
        self.decay3
    }

    pub fn alias_bound(&self) -> f64 {
        self.alias_bound
    }

    /// Stored coefficient `a_m` of coordinate `coord` (0-based); negative
    /// frequencies answered through conjugate symmetry, unknown ones are 0.
    pub fn coeff(&self, coord: usize, m: i64) -> Complex64 {
        if m == 0 {
            return Complex64::new(self.a0[coord], 0.0);
        }
        let stored = self.coeffs[coord]
            .get(&(m.unsigned_abs()))
            .cloned()
            .unwrap_or(Complex64::ZERO);
        if m > 0 {
            stored
        } else {
            stored.conj()
        }
    }

    /// Largest stored frequency over all coordinates (0 when none).
    pub fn max_freq(&self) -> u64 {
        self.coeffs
            .iter()
            .filter_map(|m| m.keys().next_back().cloned())
            .max()
            .unwrap_or(0)
    }

    /// True when no oscillating frequency is stored.
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|m| m.is_empty())
    }

    /// Iterator over `(coord0, m, a_m)` for every stored `m >= 1`.
    pub fn stored_coeffs(&self) -> impl Iterator<Item = (usize, u64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .flat_map(|(c, map)| map.iter().map(move |(&m, &a)| (c, m, a)))
    }

    pub fn a0(&self) -> &[f64] {
        &self.a0
    }

    /// Fourier l1 bound on `sup_x |phi_j(x)|`, maximized over coordinates.
    pub fn l1_bound(&self) -> f64 {
        (0..self.d)
            .map(|c| {
                self.a0[c].abs()
                    + 2.0 * self.coeffs[c].values().map(|a| a.norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Fourier l1 bound on the given derivative order, maximized over
    /// coordinates: `max_j sum_m 2 (2 pi m)^order |a_m|`.
    pub fn deriv_l1_bound(&self, order: u32) -> f64 {
        (0..self.d)
            .map(|c| {
                2.0 * self.coeffs[c]
                    .iter()
                    .map(|(&m, a)| (TAU * m as f64).powi(order as i32) * a.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `phi(x)`, summed as `a_0 + sum_{m>=1} 2 Re(a_m e^{2 pi i m x})`.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = self.a0.clone();
        for (c, map) in self.coeffs.iter().enumerate() {
            let mut acc = 0.0;
            for (&m, a) in map {
                let theta = TAU * (m as f64 * x).rem_euclid(1.0);
                acc += 2.0 * (a.re * theta.cos() - a.im * theta.sin());
            }
            out[c] += acc;
        }
        out
    }

    /// Termwise derivative of the given order (1 or 2 in normal use).
    pub fn eval_deriv(&self, x: f64, order: u32) -> Vec<f64> {
        assert!((1..=4).contains(&order), "derivative order out of range");
        let mut out = vec![0.0; self.d];
        for (c, map) in self.coeffs.iter().enumerate() {
            let mut acc = 0.0;
            for (&m, a) in map {
                let b = *a * i_pow(order) * (TAU * m as f64).powi(order as i32);
                let theta = TAU * (m as f64 * x).rem_euclid(1.0);
                acc += 2.0 * (b.re * theta.cos() - b.im * theta.sin());
            }
            out[c] = acc;
        }
        out
    }

    /// `(phi(base + delta) - phi(base)) / delta`, computed without
    /// cancellation via `e^{i t} - 1 = -2 sin^2(t/2) + i sin t`. At
    /// `delta = 0` this is `phi'(base)`.
    pub fn delta_over(&self, base: f64, delta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (c, map) in self.coeffs.iter().enumerate() {
            let mut acc = 0.0;
            for (&m, a) in map {
                let theta = TAU * (m as f64 * base).rem_euclid(1.0);
                let z = *a * Complex64::new(theta.cos(), theta.sin());
                let tau = if delta == 0.0 {
                    Complex64::new(0.0, TAU * m as f64)
                } else {
                    let phi_ang = TAU * m as f64 * delta;
                    let s = (0.5 * phi_ang).sin();
                    Complex64::new(-2.0 * s * s, phi_ang.sin()) / delta
                };
                acc += 2.0 * (z * tau).re;
            }
            out[c] = acc;
        }
        out
    }

    /// Image under a real linear map given by its rows (`rows[i][j]` applied
    /// to coordinate j of this kernel).
    pub fn matrix_apply(&self, rows: &[Vec<f64>]) -> Result<KernelFunction, CoreError> {
        if rows.iter().any(|r| r.len() != self.d) {
            return Err(CoreError::InputError(format!(
                "matrix rows must have length {}",
                self.d
            )));
        }
        let d_new = rows.len();
        let mut out = KernelFunction::zero(d_new.max(1));
        out.d = d_new;
        out.a0 = vec![0.0; d_new];
        out.coeffs = vec![BTreeMap::new(); d_new];
        for (i, row) in rows.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                out.a0[i] += w * self.a0[j];
                for (&m, &a) in &self.coeffs[j] {
                    let slot = out.coeffs[i].entry(m).or_insert(Complex64::ZERO);
                    *slot += a * w;
                }
            }
            out.coeffs[i].retain(|_, a| *a != Complex64::ZERO);
        }
        let scale: f64 = rows
            .iter()
            .map(|r| r.iter().map(|w| w.abs()).sum())
            .fold(0.0, f64::max);
        out.decay3 = self.decay3.map(|c3| c3 * scale);
        out.alias_bound = self.alias_bound * scale;
        Ok(out)
    }

    /// Orthogonal projection `pi_V phi` in ambient coordinates, where the
    /// rows of `basis` are orthonormal vectors spanning V.
    pub fn project(&self, basis: &[Vec<f64>]) -> Result<KernelFunction, CoreError> {
        if crate::orthonormal_error(basis, self.d) > 1e-9 {
            return Err(CoreError::InputError(
                "projection basis is not orthonormal".into(),
            ));
        }
        // P = sum_i v_i v_i^T
        let mut p = vec![vec![0.0; self.d]; self.d];
        for v in basis {
            for (r, &vr) in v.iter().enumerate() {
                for (c, &vc) in v.iter().enumerate() {
                    p[r][c] += vr * vc;
                }
            }
        }
        self.matrix_apply(&p)
    }

    /// The kernel `phi = w0 - lambda w0(b .)`, whose graph function
    /// telescopes back to `w0`.
    pub fn telescoped(w0: &KernelFunction, b: u32, lambda: f64) -> KernelFunction {
        let mut out = w0.clone();
        for c in 0..w0.d {
            out.a0[c] = w0.a0[c] * (1.0 - lambda);
            let mut map = w0.coeffs[c].clone();
            for (&m, &a) in &w0.coeffs[c] {
                let target = m * b as u64;
                let slot = map.entry(target).or_insert(Complex64::ZERO);
                *slot -= a * lambda;
            }
            map.retain(|_, a| *a != Complex64::ZERO);
            out.coeffs[c] = map;
        }
        out.decay3 = w0.decay3.map(|c3| c3 * (1.0 + lambda * (b as f64).powi(3)));
        out.alias_bound = w0.alias_bound * (1.0 + lambda);
        out
    }

    /// The kernel `c * phi`.
    pub fn scaled(&self, c: f64) -> KernelFunction {
        let mut out = self.clone();
        for v in &mut out.a0 {
            *v *= c;
        }
        for map in &mut out.coeffs {
            for a in map.values_mut() {
                *a *= c;
            }
        }
        out.decay3 = self.decay3.map(|c3| c3 * c.abs());
        out.alias_bound = self.alias_bound * c.abs();
        out
    }

    /// Add `delta` to the coefficient `a_m` of the given 0-based coordinate.
    pub fn coeff_delta(&self, coord: usize, m: u64, delta: Complex64) -> KernelFunction {
        let mut out = self.clone();
        if m == 0 {
            out.a0[coord] += delta.re;
        } else {
            let slot = out.coeffs[coord].entry(m).or_insert(Complex64::ZERO);
            *slot += delta;
            if *slot == Complex64::ZERO {
                out.coeffs[coord].remove(&m);
            }
        }
        out
    }

    /// Serialize to the kernel config text format.
    pub fn to_config(&self, b: u32) -> String {
        // Negative zeros read back equal but print noisily.
        fn clean(v: f64) -> f64 {
            if v == 0.0 {
                0.0
            } else {
                v
            }
        }
        let mut s = format!("d={}\nb={}\n", self.d, b);
        for (c, &a) in self.a0.iter().enumerate() {
            if a != 0.0 {
                s.push_str(&format!("coeff {} 0 {} 0\n", c + 1, clean(a)));
            }
        }
        for (c, map) in self.coeffs.iter().enumerate() {
            for (&m, a) in map {
                s.push_str(&format!(
                    "coeff {} {} {} {}\n",
                    c + 1,
                    m,
                    clean(a.re),
                    clean(a.im)
                ));
            }
        }
        s
    }
}

fn i_pow(order: u32) -> Complex64 {
    match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Parse the kernel config text format.
///
/// Recognized lines (after stripping `#` comments and blank lines):
/// `d=<int>`, `b=<int>`, and `coeff <coord> <freq> <re> <im>` with 1-based
/// coordinates, `freq >= 0`, and values given as decimals or `p/q` rationals.
/// Returns the kernel together with the base `b` declared in the file.
pub fn parse_config(text: &str) -> Result<(KernelFunction, u32), CoreError> {
    let mut d: Option<usize> = None;
    let mut b: Option<u32> = None;
    let mut entries: Vec<(usize, u64, f64, f64)> = Vec::new();
    let mut entry_lines: Vec<usize> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(v) = line.strip_prefix("d=") {
            d = Some(v.trim().parse().map_err(|_| CoreError::ConfigParse {
                line: line_no,
                msg: format!("bad dimension '{v}'"),
            })?);
        } else if let Some(v) = line.strip_prefix("b=") {
            b = Some(v.trim().parse().map_err(|_| CoreError::ConfigParse {
                line: line_no,
                msg: format!("bad base '{v}'"),
            })?);
        } else if let Some(rest) = line.strip_prefix("coeff") {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens.len() != 4 {
                return Err(CoreError::ConfigParse {
                    line: line_no,
                    msg: format!("expected 'coeff <coord> <freq> <re> <im>', got {} fields", tokens.len()),
                });
            }
            let coord: usize = tokens[0].parse().map_err(|_| CoreError::ConfigParse {
                line: line_no,
                msg: format!("bad coordinate '{}'", tokens[0]),
            })?;
            let m: u64 = tokens[1].parse().map_err(|_| CoreError::ConfigParse {
                line: line_no,
                msg: format!("bad frequency '{}'", tokens[1]),
            })?;
            let re = parse_value(tokens[2]).ok_or_else(|| CoreError::ConfigParse {
                line: line_no,
                msg: format!("bad value '{}'", tokens[2]),
            })?;
            let im = parse_value(tokens[3]).ok_or_else(|| CoreError::ConfigParse {
                line: line_no,
                msg: format!("bad value '{}'", tokens[3]),
            })?;
            entries.push((coord, m, re, im));
            entry_lines.push(line_no);
        } else {
            return Err(CoreError::ConfigParse {
                line: line_no,
                msg: format!("unrecognized line '{line}'"),
            });
        }
    }

    let d = d.ok_or(CoreError::ConfigParse {
        line: 0,
        msg: "missing 'd=<int>' line".into(),
    })?;
    let b = b.ok_or(CoreError::ConfigParse {
        line: 0,
        msg: "missing 'b=<int>' line".into(),
    })?;
    // Range errors on coordinates point back at the offending line.
    for (&(coord, _, _, _), &line) in entries.iter().zip(&entry_lines) {
        if coord == 0 || coord > d {
            return Err(CoreError::ConfigParse {
                line,
                msg: format!("coordinate {coord} out of range 1..={d}"),
            });
        }
    }
    let k = KernelFunction::from_entries(d, &entries)?;
    Ok((k, b))
}

/// Decimal or `p/q` rational literal.
fn parse_value(tok: &str) -> Option<f64> {
    if let Some((num, den)) = tok.split_once('/') {
        let n: f64 = num.parse().ok()?;
        let q: f64 = den.parse().ok()?;
        if q == 0.0 {
            return None;
        }
        Some(n / q)
    } else {
        tok.parse().ok()
    }
}
