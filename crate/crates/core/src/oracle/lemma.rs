use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::OrthoBasis;

/// Coordinate subspace of `R^{2n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateSubspace {
    dim: usize,
    coords: Vec<usize>,
}

impl CoordinateSubspace {
    pub fn new(dim: usize, mut coords: Vec<usize>) -> Result<Self> {
        coords.sort_unstable();
        coords.dedup();
        if coords.iter().any(|&c| c >= dim) {
            return Err(Error::domain("subspace coordinate out of range"));
        }
        Ok(Self { dim, coords })
    }

    /// The causality set for input `k` (1-based) in a block of length `n`:
    /// message coordinates `1..=k` and noise coordinates `1..k`.
    pub fn causal(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::domain(format!("input index {k} outside 1..={n}")));
        }
        let coords = (0..k).chain(n..n + k - 1).collect();
        Self::new(2 * n, coords)
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        v.iter()
            .enumerate()
            .all(|(i, x)| x.abs() <= tol || self.coords.binary_search(&i).is_ok())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaMax {
    /// `max (v+w) Π (v+w)^T` over `v ∈ V`, `‖v‖² ≤ P`.
    pub value: f64,
    pub v_star: DVector<f64>,
    /// `‖w Π‖`
    pub projected_norm: f64,
}

pub const DEGENERATE_TOL: f64 = 1e-13;

/// Maximizes `(v + w) Π (v + w)^T` over `v ∈ V` with `‖v‖² ≤ P`, where `Π`
/// projects onto the orthogonal complement of `basis`. The maximum is
/// `(√P + ‖wΠ‖)²`, attained along `wΠ`. When `wΠ = 0` any unit direction of
/// `V` orthogonal to the span works; message coordinates (latest first) are
/// preferred, then noise coordinates.
pub fn lemma1_max(
    w: &DVector<f64>,
    basis: &OrthoBasis,
    power: f64,
    subspace: &CoordinateSubspace,
) -> Result<LemmaMax> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::domain(format!(
            "power must be nonnegative, got {power}"
        )));
    }
    if w.len() != basis.dim() || subspace.dim != basis.dim() {
        return Err(Error::domain(
            "vector, basis and subspace dimensions differ",
        ));
    }
    if !subspace.contains(w, 0.0) {
        return Err(Error::domain("w must lie in the subspace"));
    }
    let n = basis.dim() / 2;
    let projected = basis.project_out(w);
    let pn = projected.norm();
    let direction = if pn > DEGENERATE_TOL {
        if !subspace.contains(&projected, 1e-12 * (1.0 + w.norm())) {
            return Err(Error::domain(
                "projected vector leaves the subspace; the span must lie inside it",
            ));
        }
        projected / pn
    } else {
        let mut order: Vec<usize> = subspace
            .coords()
            .iter()
            .copied()
            .filter(|&c| c < n)
            .rev()
            .collect();
        order.extend(subspace.coords().iter().copied().filter(|&c| c >= n));
        let candidates: Vec<(usize, DVector<f64>)> = order
            .into_iter()
            .map(|c| {
                let mut e = DVector::zeros(basis.dim());
                e[c] = 1.0;
                (c, basis.project_out(&e))
            })
            .collect();
        let best = candidates.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        if best <= 1e-10 {
            return Err(Error::domain(
                "subspace is contained in the span of the rows",
            ));
        }
        let (_, v) = candidates
            .into_iter()
            .find(|(_, v)| v.norm() >= best - 1e-12)
            .expect("maximum exists");
        let norm = v.norm();
        v / norm
    };
    let value = (power.sqrt() + pn).powi(2);
    Ok(LemmaMax {
        value,
        v_star: direction * power.sqrt(),
        projected_norm: pn,
    })
}
