//! Concentration and saturation diagnostics with respect to a linear
//! subspace, the structural notions used to detect measures that behave
//! like translates of a subspace.

use crate::entropy::LevelEntropy;
use crate::measure::EmpiricalMeasure;
use crate::MeasureError;

/// Orthonormal basis of the orthogonal complement of the span of `basis`
/// inside `R^dim`, built by Gram-Schmidt over the standard vectors
/// (deterministic).
pub fn complement_basis(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = basis.to_vec();
    let mut complement = Vec::new();
    for i in 0..dim {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        for u in &frame {
            let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vc, uc) in v.iter_mut().zip(u) {
                *vc -= dot * uc;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vc in &mut v {
                *vc /= norm;
            }
            frame.push(v.clone());
            complement.push(v);
        }
    }
    complement
}

fn weighted_median(values: &mut Vec<(f64, f64)>) -> f64 {
    values.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    let mut acc = 0.0;
    for &(v, w) in values.iter() {
        acc += w;
        if acc >= 0.5 {
            return v;
        }
    }
    values.last().map(|&(v, _)| v).unwrap_or(0.0)
}

impl EmpiricalMeasure {
    /// `(V, eps)`-concentration: is there a translate `V + y` such that mass
    /// at least `1 - eps` lies within distance `eps` of it? The translate is
    /// searched as the coordinatewise weighted median of the components
    /// orthogonal to `V`.
    pub fn is_concentrated(
        &self,
        v_basis: &[Vec<f64>],
        eps: f64,
    ) -> Result<bool, MeasureError> {
        if weier_core::orthonormal_error(v_basis, self.dim()) > 1e-9 {
            return Err(MeasureError::BadBasis);
        }
        if !(eps > 0.0) {
            return Err(MeasureError::BadArg("eps must be positive".into()));
        }
        let perp = complement_basis(v_basis, self.dim());
        if perp.is_empty() {
            // V is the whole space: every point is at distance 0.
            return Ok(true);
        }
        // Components of each point in the V-perp frame.
        let n = self.len();
        let mut comps = vec![0.0f64; n * perp.len()];
        for i in 0..n {
            let p = self.point(i);
            for (c, u) in perp.iter().enumerate() {
                comps[i * perp.len() + c] = u.iter().zip(p).map(|(a, b)| a * b).sum();
            }
        }
        let mut center = vec![0.0f64; perp.len()];
        for (c, ctr) in center.iter_mut().enumerate() {
            let mut vals: Vec<(f64, f64)> = (0..n)
                .map(|i| (comps[i * perp.len() + c], self.weight(i)))
                .collect();
            *ctr = weighted_median(&mut vals);
        }
        let mut mass_close = 0.0f64;
        for i in 0..n {
            let d2: f64 = (0..perp.len())
                .map(|c| (comps[i * perp.len() + c] - center[c]).powi(2))
                .sum();
            if d2.sqrt() <= eps {
                mass_close += self.weight(i);
            }
        }
        Ok(mass_close >= 1.0 - eps)
    }

    /// `(V, eps, m)`-saturation:
    /// `(1/m) H(L_m) >= (1/m) H(pi_{V-perp} omega, L_m) + dim V - eps`,
    /// i.e. the measure carries full entropy along `V` on top of its
    /// projection to the complement.
    pub fn is_saturated(
        &self,
        v_basis: &[Vec<f64>],
        eps: f64,
        m: u32,
    ) -> Result<bool, MeasureError> {
        if weier_core::orthonormal_error(v_basis, self.dim()) > 1e-9 {
            return Err(MeasureError::BadBasis);
        }
        if !(eps > 0.0) || m == 0 {
            return Err(MeasureError::BadArg("need eps > 0 and m >= 1".into()));
        }
        let perp = complement_basis(v_basis, self.dim());
        let own = self.level_entropy(m) / m as f64;
        let projected = if perp.is_empty() {
            0.0
        } else {
            self.project(&perp)?.level_entropy(m) / m as f64
        };
        Ok(own >= projected + v_basis.len() as f64 - eps)
    }
}
