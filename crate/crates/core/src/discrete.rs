//! Exact redundancy `R_f(X) = D_f(P_X ‖ Π_X)` on finite product alphabets.
//!
//! Tables are dense and row-major: the last coordinate varies fastest. The
//! practical ceiling is about 10^7 cells.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Tolerance on the total mass of a table and on channel row sums.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Mass allowed on a cell whose product-measure weight is zero.
const ABS_CONTINUITY_TOL: f64 = 1e-12;

/// Dense joint probability table over `k_1 × … × k_n`, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let table = Self::from_parts(sizes, probs)?;
        let total: f64 = table.probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Domain(format!("table probabilities sum to {total}, expected 1")));
        }
        Ok(table)
    }

    /// Builds a table from nonnegative weights, normalizing them to sum to one.
    pub fn from_weights(sizes: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let mut table = Self::from_parts(sizes, weights)?;
        let total: f64 = table.probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain("table weights sum to zero".into()));
        }
        table.probs.iter_mut().for_each(|p| *p /= total);
        Ok(table)
    }

    /// Point mass at `cell`.
    pub fn point_mass(sizes: Vec<usize>, cell: &[usize]) -> Result<Self> {
        let len = checked_len(&sizes)?;
        let mut table = Self::from_parts(sizes, vec![0.0; len])?;
        let idx = table.flat_index(cell)?;
        table.probs[idx] = 1.0;
        Ok(table)
    }

    /// Product of independent marginals.
    pub fn independent(marginals: &[Vec<f64>]) -> Result<Self> {
        for (i, m) in marginals.iter().enumerate() {
            let total: f64 = m.iter().sum();
            if m.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Domain(format!("marginal {i} is not a probability vector")));
            }
        }
        let sizes: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let len = checked_len(&sizes)?;
        let shape = Self::from_parts(sizes, vec![0.0; len])?;
        Ok(shape.outer_product(marginals))
    }

    fn from_parts(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Shape(format!(
                "a joint table needs at least 2 coordinates, got {}",
                sizes.len()
            )));
        }
        let len = checked_len(&sizes)?;
        if probs.len() != len {
            return Err(Error::Shape(format!(
                "alphabet sizes {sizes:?} need {len} cells, got {}",
                probs.len()
            )));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::Domain(format!("cell {i} has invalid probability {p}")));
        }
        Ok(Self { sizes, probs })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_coordinates(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.probs.len()
    }

    /// Row-major flat index of a multi-index.
    pub fn flat_index(&self, cell: &[usize]) -> Result<usize> {
        if cell.len() != self.sizes.len() {
            return Err(Error::Shape(format!(
                "cell {cell:?} has {} coordinates, table has {}",
                cell.len(),
                self.sizes.len()
            )));
        }
        let mut idx = 0;
        for (&x, &k) in cell.iter().zip(&self.sizes) {
            if x >= k {
                return Err(Error::Domain(format!("symbol {x} outside alphabet of size {k}")));
            }
            idx = idx * k + x;
        }
        Ok(idx)
    }

    pub fn get(&self, cell: &[usize]) -> Result<f64> {
        Ok(self.probs[self.flat_index(cell)?])
    }

    /// Visits every cell in row-major order with its multi-index.
    pub fn for_each_cell(&self, mut visit: impl FnMut(&[usize], f64)) {
        let mut cell = vec![0usize; self.sizes.len()];
        for &p in &self.probs {
            visit(&cell, p);
            advance(&mut cell, &self.sizes);
        }
    }

    /// One probability vector per coordinate.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self.sizes.iter().map(|&k| vec![0.0; k]).collect();
        self.for_each_cell(|cell, p| {
            for (m, &x) in out.iter_mut().zip(cell) {
                m[x] += p;
            }
        });
        out
    }

    /// The independent product measure `Π_X = ⊗ P_{X_i}` built from this table's marginals.
    pub fn product_measure(&self) -> JointTable {
        self.outer_product(&self.marginals())
    }

    fn outer_product(&self, marginals: &[Vec<f64>]) -> JointTable {
        let mut probs = Vec::with_capacity(self.probs.len());
        let mut cell = vec![0usize; self.sizes.len()];
        for _ in 0..self.probs.len() {
            probs.push(cell.iter().zip(marginals).map(|(&x, m)| m[x]).product());
            advance(&mut cell, &self.sizes);
        }
        JointTable {
            sizes: self.sizes.clone(),
            probs,
        }
    }

    /// `L(x) = p(x) / Π_X(x)`; cells with zero product mass get `None`.
    pub fn likelihood_ratio(&self) -> Vec<Option<f64>> {
        let product = self.product_measure();
        self.probs
            .iter()
            .zip(&product.probs)
            .map(|(&p, &q)| (q > 0.0).then(|| p / q))
            .collect()
    }

    /// `(min L, max L)` over cells with positive product mass.
    pub fn likelihood_ratio_range(&self) -> (f64, f64) {
        self.likelihood_ratio()
            .into_iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(l), hi.max(l)))
    }

    /// Reorders coordinates: output coordinate `j` is input coordinate `order[j]`.
    pub fn permute_coordinates(&self, order: &[usize]) -> Result<JointTable> {
        let n = self.sizes.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::Shape(format!("{order:?} is not a permutation of 0..{n}")));
        }
        let sizes: Vec<usize> = order.iter().map(|&i| self.sizes[i]).collect();
        let mut out = JointTable {
            sizes,
            probs: vec![0.0; self.probs.len()],
        };
        let mut target = vec![0usize; n];
        self.for_each_cell(|cell, p| {
            for (t, &i) in target.iter_mut().zip(order) {
                *t = cell[i];
            }
            let idx = out.flat_index(&target).expect("permuted index in range");
            out.probs[idx] = p;
        });
        Ok(out)
    }
}

fn checked_len(sizes: &[usize]) -> Result<usize> {
    if sizes.contains(&0) {
        return Err(Error::Shape(format!("alphabet sizes must be positive, got {sizes:?}")));
    }
    sizes
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .ok_or_else(|| Error::Shape(format!("table {sizes:?} is too large")))
}

fn advance(cell: &mut [usize], sizes: &[usize]) {
    for (x, &k) in cell.iter_mut().zip(sizes).rev() {
        *x += 1;
        if *x < k {
            return;
        }
        *x = 0;
    }
}

/// Free-function form of [`JointTable::marginals`].
pub fn marginals(joint: &JointTable) -> Vec<Vec<f64>> {
    joint.marginals()
}

/// Free-function form of [`JointTable::product_measure`].
pub fn product_measure(joint: &JointTable) -> JointTable {
    joint.product_measure()
}

/// `R_f(X) = Σ_x Π_X(x) f(p(x) / Π_X(x))`.
///
/// Cells with `Π_X(x) = 0` contribute nothing; a cell with zero product mass
/// but positive joint mass violates absolute continuity and is rejected.
pub fn redundancy_f(joint: &JointTable, kernel: Kernel) -> Result<f64> {
    kernel.validate()?;
    let product = joint.product_measure();
    let mut total = 0.0;
    for (i, (&p, &q)) in joint.probs.iter().zip(&product.probs).enumerate() {
        if q > 0.0 {
            total += q * kernel.eval_unchecked(p / q);
        } else if p > ABS_CONTINUITY_TOL {
            return Err(Error::Precondition(format!(
                "cell {i} has mass {p} but zero product-measure mass"
            )));
        }
    }
    Ok(total)
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

/// Total correlation `Σ_i H(X_i) − H(X)`.
pub fn total_correlation_entropy(joint: &JointTable) -> f64 {
    let marginal_sum: f64 = joint.marginals().iter().map(|m| entropy(m)).sum();
    marginal_sum - entropy(&joint.probs)
}

/// Independent noisy channel acting on one coordinate: a row-stochastic `k_i × m_i` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChannel {
    coordinate_index: usize,
    transition: DMatrix<f64>,
}

impl CoordinateChannel {
    pub fn new(coordinate_index: usize, transition: DMatrix<f64>) -> Result<Self> {
        if transition.nrows() == 0 || transition.ncols() == 0 {
            return Err(Error::Shape("channel matrix must be non-empty".into()));
        }
        for (r, row) in transition.row_iter().enumerate() {
            if row.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::Domain(format!(
                    "channel row {r} has a negative or non-finite entry"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Domain(format!("channel row {r} sums to {total}, expected 1")));
            }
        }
        Ok(Self {
            coordinate_index,
            transition,
        })
    }

    pub fn identity(coordinate_index: usize, size: usize) -> Self {
        Self {
            coordinate_index,
            transition: DMatrix::identity(size, size),
        }
    }

    /// Binary symmetric channel flipping its input with probability `flip`.
    pub fn bit_flip(coordinate_index: usize, flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(Error::InvalidParameter(format!(
                "flip probability {flip} outside [0, 1]"
            )));
        }
        let m = DMatrix::from_row_slice(2, 2, &[1.0 - flip, flip, flip, 1.0 - flip]);
        Self::new(coordinate_index, m)
    }

    pub fn coordinate_index(&self) -> usize {
        self.coordinate_index
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn input_size(&self) -> usize {
        self.transition.nrows()
    }

    pub fn output_size(&self) -> usize {
        self.transition.ncols()
    }
}

/// Law of `(g_1(X_1), …, g_n(X_n))` for independent per-coordinate channels.
///
/// Exactly one channel per coordinate is required; identity channels are allowed.
pub fn apply_coordinate_channels(joint: &JointTable, channels: &[CoordinateChannel]) -> Result<JointTable> {
    let n = joint.num_coordinates();
    if channels.len() != n {
        return Err(Error::Shape(format!("expected {n} channels, got {}", channels.len())));
    }
    let mut ordered: Vec<Option<&CoordinateChannel>> = vec![None; n];
    for ch in channels {
        let i = ch.coordinate_index;
        if i >= n || ordered[i].is_some() {
            return Err(Error::Shape(format!(
                "channel coordinate index {i} is out of range or repeated"
            )));
        }
        if ch.input_size() != joint.sizes[i] {
            return Err(Error::Shape(format!(
                "channel for coordinate {i} expects {} input symbols, alphabet has {}",
                ch.input_size(),
                joint.sizes[i]
            )));
        }
        ordered[i] = Some(ch);
    }

    let mut current = joint.clone();
    for (axis, ch) in ordered.into_iter().enumerate() {
        current = push_axis(&current, axis, ch.expect("every coordinate has a channel"));
    }
    Ok(current)
}

fn push_axis(table: &JointTable, axis: usize, channel: &CoordinateChannel) -> JointTable {
    let k = table.sizes[axis];
    let m = channel.output_size();
    // inner = product of sizes after `axis`; outer = product before it
    let inner: usize = table.sizes[axis + 1..].iter().product();
    let outer: usize = table.sizes[..axis].iter().product();
    let mut sizes = table.sizes.clone();
    sizes[axis] = m;
    let mut probs = vec![0.0; outer * m * inner];
    for o in 0..outer {
        for x in 0..k {
            let src = &table.probs[(o * k + x) * inner..(o * k + x + 1) * inner];
            for y in 0..m {
                let w = channel.transition[(x, y)];
                if w == 0.0 {
                    continue;
                }
                let dst = &mut probs[(o * m + y) * inner..(o * m + y + 1) * inner];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    JointTable { sizes, probs }
}
