//! Weighted point clouds in `R^k` with b-adic cell operations.

use crate::{LevelEntropy, MeasureError};

/// A level-`n` b-adic cell, identified by `j_i = floor(b^n x_i)` in the
/// original (unshifted) coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellIndex {
    pub level: u32,
    pub index: Vec<i64>,
}

impl CellIndex {
    /// The cell containing `point` at the given level.
    pub fn containing(point: &[f64], base: u32, level: u32) -> CellIndex {
        let scale = (base as f64).powi(level as i32);
        CellIndex {
            level,
            index: point.iter().map(|&x| (x * scale).floor() as i64).collect(),
        }
    }
}

/// A weighted point cloud: weights nonnegative, total mass normalized to 1,
/// every point within `radius` of the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    base: u32,
    dim: usize,
    /// Point-major coordinates, `coords[i*dim .. (i+1)*dim]`.
    coords: Vec<f64>,
    weights: Vec<f64>,
    radius: f64,
    /// Integer translation taking the support into the nonnegative orthant;
    /// integer shifts leave every b-adic partition invariant.
    shift: Vec<i64>,
}

impl EmpiricalMeasure {
    pub fn new(
        base: u32,
        dim: usize,
        points: Vec<(Vec<f64>, f64)>,
    ) -> Result<Self, MeasureError> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        let mut weights = Vec::with_capacity(points.len());
        for (p, w) in points {
            if p.len() != dim {
                return Err(MeasureError::BadArg(format!(
                    "point has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(&p);
            weights.push(w);
        }
        Self::from_flat(base, dim, coords, weights)
    }

    pub fn from_flat(
        base: u32,
        dim: usize,
        coords: Vec<f64>,
        mut weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if base < 2 {
            return Err(MeasureError::BadArg(format!("base {base} must be >= 2")));
        }
        if weights.is_empty() {
            return Err(MeasureError::EmptyMeasure);
        }
        if coords.len() != weights.len() * dim {
            return Err(MeasureError::BadArg(format!(
                "coordinate buffer length {} does not match {} points of dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(MeasureError::BadArg("non-finite coordinate".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MeasureError::BadWeights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(MeasureError::BadWeights("total mass is zero".into()));
        }
        // Keep already-normalized weights bit-identical (dump/restore).
        if (total - 1.0).abs() > 1e-12 {
            for w in &mut weights {
                *w /= total;
            }
        }
        let points = weights.len();
        let mut radius = 0.0f64;
        for i in 0..points {
            let r2: f64 = coords[i * dim..(i + 1) * dim].iter().map(|x| x * x).sum();
            radius = radius.max(r2.sqrt());
        }
        let mut shift = vec![0i64; dim];
        for (c, s) in shift.iter_mut().enumerate() {
            let min = (0..points)
                .map(|i| coords[i * dim + c])
                .fold(f64::INFINITY, f64::min);
            *s = min.floor() as i64;
        }
        Ok(EmpiricalMeasure {
            base,
            dim,
            coords,
            weights,
            radius,
            shift,
        })
    }

    /// A unit point mass.
    pub fn point_mass(base: u32, point: Vec<f64>) -> Self {
        let dim = point.len();
        Self::from_flat(base, dim, point, vec![1.0]).expect("point mass is valid")
    }

    /// Exactly uniform weights on the cell centers of level `level` in
    /// `[0,1)^dim`: entropy is `dim * n` at every level `n <= level`.
    pub fn uniform_grid(base: u32, level: u32, dim: usize) -> Self {
        let side = (base as u64).pow(level);
        let total = side.pow(dim as u32);
        let mut coords = Vec::with_capacity(total as usize * dim);
        for cell in 0..total {
            let mut rest = cell;
            for _ in 0..dim {
                let idx = rest % side;
                rest /= side;
                coords.push((idx as f64 + 0.5) / side as f64);
            }
        }
        Self::from_flat(base, dim, coords, vec![1.0; total as usize])
            .expect("uniform grid is valid")
    }

    /// The dyadic Bernoulli measure truncated at `level`: atoms `k / 2^level`
    /// with weight `p^ones(k) (1-p)^(level - ones(k))`. Entropy is `n h(p)`
    /// for every `n <= level`.
    pub fn bernoulli_dyadic(p: f64, level: u32) -> Self {
        assert!((0.0..=1.0).contains(&p));
        let total = 1u64 << level;
        let mut coords = Vec::with_capacity(total as usize);
        let mut weights = Vec::with_capacity(total as usize);
        for k in 0..total {
            coords.push(k as f64 / total as f64);
            let ones = k.count_ones();
            weights.push(p.powi(ones as i32) * (1.0 - p).powi((level - ones) as i32));
        }
        Self::from_flat(2, 1, coords, weights).expect("bernoulli grid is valid")
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// The convex combination `t a + (1-t) b`.
    pub fn mixture(a: &Self, b: &Self, t: f64) -> Result<Self, MeasureError> {
        if a.base != b.base || a.dim != b.dim {
            return Err(MeasureError::BadArg(
                "mixture requires equal base and dimension".into(),
            ));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(MeasureError::BadArg(format!("t = {t} outside [0,1]")));
        }
        let mut coords = a.coords.clone();
        coords.extend_from_slice(&b.coords);
        let mut weights: Vec<f64> = a.weights.iter().map(|w| w * t).collect();
        weights.extend(b.weights.iter().map(|w| w * (1.0 - t)));
        Self::from_flat(a.base, a.dim, coords, weights)
    }

    /// Weights of the occupied level-`n` cells, grouped deterministically
    /// (sorted cell keys, original point order within a cell).
    pub(crate) fn cell_weights(&self, n: u32) -> Vec<f64> {
        if self.dim == 0 {
            return vec![1.0];
        }
        let scale = (self.base as f64).powi(n as i32);
        assert!(
            scale < 9.0e15,
            "level {n} exceeds exact f64 cell indexing for base {}",
            self.base
        );
        // Per-coordinate bit widths for the packed key.
        let points = self.len();
        let mut bits = vec![0u32; self.dim];
        let mut fits = true;
        let mut total_bits = 0u32;
        for c in 0..self.dim {
            let mut max_idx = 0u64;
            for i in 0..points {
                let idx = ((self.coords[i * self.dim + c] - self.shift[c] as f64) * scale)
                    .floor() as u64;
                max_idx = max_idx.max(idx);
            }
            bits[c] = 64 - max_idx.leading_zeros().min(63);
            total_bits += bits[c];
        }
        if total_bits > 120 {
            fits = false;
        }

        if fits {
            let mut keyed: Vec<(u128, u32)> = Vec::with_capacity(points);
            for i in 0..points {
                let mut key: u128 = 0;
                for c in 0..self.dim {
                    let idx = ((self.coords[i * self.dim + c] - self.shift[c] as f64) * scale)
                        .floor() as u64;
                    key = (key << bits[c]) | idx as u128;
                }
                keyed.push((key, i as u32));
            }
            keyed.sort_unstable();
            let mut out = Vec::new();
            let mut current_key = None;
            let mut acc = 0.0f64;
            for (key, i) in keyed {
                if Some(key) != current_key {
                    if current_key.is_some() && acc > 0.0 {
                        out.push(acc);
                    }
                    current_key = Some(key);
                    acc = 0.0;
                }
                acc += self.weights[i as usize];
            }
            if current_key.is_some() && acc > 0.0 {
                out.push(acc);
            }
            out
        } else {
            // Wide fallback for very deep levels or high dimensions.
            let mut map: std::collections::BTreeMap<Vec<u64>, f64> = Default::default();
            for i in 0..points {
                let key: Vec<u64> = (0..self.dim)
                    .map(|c| {
                        ((self.coords[i * self.dim + c] - self.shift[c] as f64) * scale).floor()
                            as u64
                    })
                    .collect();
                *map.entry(key).or_insert(0.0) += self.weights[i];
            }
            map.into_values().filter(|w| *w > 0.0).collect()
        }
    }

    /// The conditional measure on a cell of positive mass, renormalized.
    pub fn component(&self, cell: &CellIndex) -> Result<Self, MeasureError> {
        if cell.index.len() != self.dim {
            return Err(MeasureError::BadArg(format!(
                "cell index has {} coordinates, expected {}",
                cell.index.len(),
                self.dim
            )));
        }
        let scale = (self.base as f64).powi(cell.level as i32);
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for i in 0..self.len() {
            let p = self.point(i);
            let inside = p
                .iter()
                .zip(&cell.index)
                .all(|(&x, &j)| (x * scale).floor() as i64 == j);
            if inside {
                coords.extend_from_slice(p);
                weights.push(self.weights[i]);
            }
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(MeasureError::EmptyCell);
        }
        Self::from_flat(self.base, self.dim, coords, weights)
    }

    /// Pushforward under the orthogonal projection onto the span of the
    /// given orthonormal rows, expressed in those coordinates. An empty
    /// basis projects to the zero space (a single point mass).
    pub fn project(&self, basis: &[Vec<f64>]) -> Result<Self, MeasureError> {
        if weier_core::orthonormal_error(basis, self.dim) > 1e-9 {
            return Err(MeasureError::BadBasis);
        }
        let new_dim = basis.len();
        let mut coords = Vec::with_capacity(self.len() * new_dim);
        for i in 0..self.len() {
            let p = self.point(i);
            for v in basis {
                coords.push(v.iter().zip(p).map(|(a, b)| a * b).sum::<f64>());
            }
        }
        Self::from_flat(self.base, new_dim, coords, self.weights.clone())
    }

    /// Serialize as CSV with a `# dim=k points=M radius=R` header and full
    /// 17-significant-digit rows `x_1,...,x_k,weight`.
    pub fn dump_csv(&self) -> String {
        let mut s = format!(
            "# dim={} points={} radius={:.16e}\n",
            self.dim,
            self.len(),
            self.radius
        );
        for i in 0..self.len() {
            let mut row: Vec<String> = self.point(i).iter().map(|x| format!("{x:.16e}")).collect();
            row.push(format!("{:.16e}", self.weights[i]));
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Parse a measure dump. The base is supplied by the caller (it is a
    /// property of the analysis, not of the point cloud).
    pub fn restore_csv(base: u32, text: &str) -> Result<Self, MeasureError> {
        let mut dim: Option<usize> = None;
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    if let Some(v) = field.strip_prefix("dim=") {
                        dim = Some(v.parse().map_err(|_| MeasureError::Parse {
                            line: line_no,
                            msg: format!("bad dim '{v}'"),
                        })?);
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let d = dim.unwrap_or(fields.len().saturating_sub(1));
            dim = Some(d);
            if fields.len() != d + 1 {
                return Err(MeasureError::Parse {
                    line: line_no,
                    msg: format!("expected {} fields, got {}", d + 1, fields.len()),
                });
            }
            for (c, f) in fields.iter().enumerate() {
                let v: f64 = f.trim().parse().map_err(|_| MeasureError::Parse {
                    line: line_no,
                    msg: format!("bad number '{f}'"),
                })?;
                if c < d {
                    coords.push(v);
                } else {
                    weights.push(v);
                }
            }
        }
        let dim = dim.ok_or(MeasureError::Parse {
            line: 0,
            msg: "empty dump".into(),
        })?;
        Self::from_flat(base, dim, coords, weights)
    }
}

impl LevelEntropy for EmpiricalMeasure {
    fn base(&self) -> u32 {
        self.base
    }

    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn level_entropy(&self, n: u32) -> f64 {
        let log_b = (self.base as f64).ln();
        self.cell_weights(n)
            .iter()
            .map(|&w| -w * w.ln() / log_b)
            .sum()
    }

    fn occupied_cells(&self, n: u32) -> u64 {
        self.cell_weights(n).len() as u64
    }

    fn sample_count(&self) -> Option<usize> {
        Some(self.len())
    }

    /// The component-average form: the level-i cells partition the points,
    /// and the average of the component entropies at level i+m replaces the
    /// entropy difference.
    fn decomposition_residual(&self, n: u32, m: u32) -> f64 {
        assert!(n >= m && m >= 1, "need n >= m >= 1");
        let lhs = self.level_entropy(n) / n as f64;
        let mut avg = 0.0f64;
        for i in 0..n {
            avg += self.conditional_entropy_direct(i + m, i) / m as f64;
        }
        (lhs - avg / n as f64).abs()
    }
}

impl EmpiricalMeasure {
    /// `H(omega, L_fine | L_coarse)` computed literally as the weighted
    /// average of component entropies, the dual route to the difference
    /// `H_fine - H_coarse`.
    pub fn conditional_entropy_direct(&self, n_fine: u32, n_coarse: u32) -> f64 {
        assert!(n_fine >= n_coarse);
        let scale = (self.base as f64).powi(n_coarse as i32);
        let mut groups: std::collections::BTreeMap<Vec<i64>, Vec<usize>> = Default::default();
        for i in 0..self.len() {
            let key: Vec<i64> = self.point(i).iter().map(|&x| (x * scale).floor() as i64).collect();
            groups.entry(key).or_default().push(i);
        }
        let mut h = 0.0f64;
        for (_, idxs) in groups {
            let mass: f64 = idxs.iter().map(|&i| self.weights[i]).sum();
            if mass <= 0.0 {
                continue;
            }
            let mut coords = Vec::with_capacity(idxs.len() * self.dim);
            let mut weights = Vec::with_capacity(idxs.len());
            for &i in &idxs {
                coords.extend_from_slice(self.point(i));
                weights.push(self.weights[i]);
            }
            let comp = Self::from_flat(self.base, self.dim, coords, weights)
                .expect("component of a valid measure");
            h += mass * comp.level_entropy(n_fine);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_has_zero_entropy() {
        let m = EmpiricalMeasure::point_mass(2, vec![0.3, -1.7]);
        for n in 0..10 {
            assert_eq!(m.level_entropy(n), 0.0);
            assert_eq!(m.occupied_cells(n), 1);
        }
    }

    #[test]
    fn uniform_grid_entropy_is_linear() {
        let m = EmpiricalMeasure::uniform_grid(2, 6, 1);
        for n in 0..=6 {
            assert!((m.level_entropy(n) - n as f64).abs() < 1e-12, "n={n}");
        }
        // Atoms stop refining beyond the construction level.
        assert!((m.level_entropy(8) - 6.0).abs() < 1e-12);

        let sq = EmpiricalMeasure::uniform_grid(2, 3, 2);
        for n in 0..=3 {
            assert!((sq.level_entropy(n) - 2.0 * n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_entropy_is_n_times_h() {
        let p = 0.3f64;
        let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        let m = EmpiricalMeasure::bernoulli_dyadic(p, 12);
        for n in 1..=12u32 {
            assert!(
                (m.level_entropy(n) - n as f64 * h).abs() < 1e-10,
                "n={n}: {} vs {}",
                m.level_entropy(n),
                n as f64 * h
            );
        }
    }

    #[test]
    fn components_renormalize() {
        let m = EmpiricalMeasure::uniform_grid(2, 3, 1);
        let cell = CellIndex {
            level: 1,
            index: vec![0],
        };
        let comp = m.component(&cell).unwrap();
        assert_eq!(comp.len(), 4);
        let mass: f64 = (0..comp.len()).map(|i| comp.weight(i)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        // Bernoulli components keep the Bernoulli relative entropy profile.
        let p = 0.3f64;
        let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        let bm = EmpiricalMeasure::bernoulli_dyadic(p, 10);
        let comp = bm
            .component(&CellIndex { level: 2, index: vec![1] })
            .unwrap();
        for m_rel in 1..=6u32 {
            let got = comp.level_entropy(2 + m_rel);
            assert!((got - m_rel as f64 * h).abs() < 1e-10, "m={m_rel}");
        }
        // Empty cell errors.
        assert!(m
            .component(&CellIndex { level: 1, index: vec![7] })
            .is_err());
    }

    #[test]
    fn component_of_point_mass_is_itself() {
        let m = EmpiricalMeasure::point_mass(3, vec![0.4]);
        let cell = CellIndex::containing(&[0.4], 3, 5);
        let comp = m.component(&cell).unwrap();
        assert_eq!(comp, m);
    }

    #[test]
    fn projection_cases() {
        let m = EmpiricalMeasure::uniform_grid(2, 2, 2);
        // Identity frame: same entropies.
        let id = m.project(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((id.level_entropy(2) - m.level_entropy(2)).abs() < 1e-12);
        // Zero space: a point mass.
        let zero = m.project(&[]).unwrap();
        assert_eq!(zero.dim(), 0);
        assert_eq!(zero.level_entropy(3), 0.0);
        // x-axis: uniform on [0,1).
        let x = m.project(&[vec![1.0, 0.0]]).unwrap();
        assert!((x.level_entropy(2) - 2.0).abs() < 1e-12);
        // Non-orthonormal basis rejected.
        assert!(m.project(&[vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn decomposition_residual_small_cases() {
        // Point mass: every term vanishes.
        let pm = EmpiricalMeasure::point_mass(2, vec![0.2]);
        assert!(pm.decomposition_residual(8, 2) < 1e-12);
        // Exact Bernoulli at depth 12, n + m within the exact range:
        // both sides equal h(p).
        let bm = EmpiricalMeasure::bernoulli_dyadic(0.3, 12);
        assert!(bm.decomposition_residual(9, 3) < 1e-10);
    }

    #[test]
    fn conditional_entropy_routes_agree() {
        let bm = EmpiricalMeasure::bernoulli_dyadic(0.35, 10);
        for (fine, coarse) in [(6u32, 2u32), (8, 5), (4, 4)] {
            let direct = bm.conditional_entropy_direct(fine, coarse);
            let diff = bm.conditional_entropy(fine, coarse);
            assert!(
                (direct - diff).abs() <= 1e-10,
                "({fine},{coarse}): {direct} vs {diff}"
            );
        }
    }

    #[test]
    fn csv_round_trip() {
        let m = EmpiricalMeasure::new(
            2,
            2,
            vec![
                (vec![0.125, -0.75], 0.25),
                (vec![0.3333333333333333, 2.0], 0.5),
                (vec![1e-9, 17.25], 0.25),
            ],
        )
        .unwrap();
        let text = m.dump_csv();
        let back = EmpiricalMeasure::restore_csv(2, &text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn invalid_weights_are_rejected() {
        assert!(EmpiricalMeasure::new(2, 1, vec![(vec![0.0], -1.0)]).is_err());
        assert!(EmpiricalMeasure::new(2, 1, vec![(vec![0.0], 0.0)]).is_err());
        assert!(EmpiricalMeasure::new(2, 1, vec![]).is_err());
    }

    #[test]
    fn negative_support_is_shifted_not_mangled() {
        // Integer shifts leave b-adic entropy invariant; a support straddling
        // zero must produce the same entropies as its translate.
        let pts = vec![
            (vec![-0.375], 0.25),
            (vec![-0.125], 0.25),
            (vec![0.125], 0.25),
            (vec![0.375], 0.25),
        ];
        let m = EmpiricalMeasure::new(2, 1, pts.clone()).unwrap();
        let shifted = EmpiricalMeasure::new(
            2,
            1,
            pts.iter().map(|(p, w)| (vec![p[0] + 3.0], *w)).collect(),
        )
        .unwrap();
        for n in 0..8 {
            assert!((m.level_entropy(n) - shifted.level_entropy(n)).abs() < 1e-12);
        }
    }
}
