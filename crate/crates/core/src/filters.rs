//! Centralized MWF and rank-constrained GEVD-MWF.

use crate::error::{check_dim, Error, Result};
use crate::numerics::{c64, gevd, hermitian_solve, CMatrix, CVector, HermitianMatrix};
use crate::scenario::NodeLayout;

/// Column selector: picks `indices` out of `total` rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMatrix {
    total: usize,
    indices: Vec<usize>,
}

impl SelectionMatrix {
    pub fn new(total: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("selection indices must be strictly increasing".into()));
        }
        if indices.last().is_some_and(|&i| i >= total) {
            return Err(Error::InvalidParameter(format!("selection index out of range {total}")));
        }
        Ok(Self { total, indices })
    }

    /// The first `d` of `total` channels.
    pub fn first(total: usize, d: usize) -> Result<Self> {
        Self::new(total, (0..d).collect())
    }

    /// First `d` channels of node `k` in the stacked network vector.
    pub fn node_reference(layout: &NodeLayout, k: usize, d: usize) -> Result<Self> {
        if d > layout.dim(k) {
            return Err(Error::InvalidParameter(format!("node {k} has fewer than {d} channels")));
        }
        let off = layout.offset(k);
        Self::new(layout.total(), (off..off + d).collect())
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn matrix(&self) -> CMatrix {
        let mut e = CMatrix::zeros(self.total, self.indices.len());
        for (c, &r) in self.indices.iter().enumerate() {
            e[(r, c)] = c64(1.0, 0.0);
        }
        e
    }

    /// `M · E`, i.e. the selected columns of `m`.
    pub fn select_columns(&self, m: &CMatrix) -> Result<CMatrix> {
        check_dim(self.total, m.ncols(), "selection columns")?;
        Ok(m.select_columns(&self.indices))
    }

    /// `Eᴴ v`.
    pub fn select_entries(&self, v: &CVector) -> Result<CVector> {
        check_dim(self.total, v.len(), "selection entries")?;
        Ok(CVector::from_iterator(self.indices.len(), self.indices.iter().map(|&i| v[i])))
    }
}

/// Linear estimator `d̂ = Wᴴ y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub w: CMatrix,
}

impl Filter {
    pub fn apply(&self, y: &CVector) -> Result<CVector> {
        check_dim(self.w.nrows(), y.len(), "filter input")?;
        Ok(self.w.adjoint() * y)
    }

    pub fn inputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.w.ncols()
    }
}

/// `W = Ryy⁻¹ Rss E`.
pub fn centralized_mwf(ryy: &HermitianMatrix, rss: &HermitianMatrix, ek: &SelectionMatrix) -> Result<Filter> {
    check_dim(ryy.dim(), rss.dim(), "mwf covariance pair")?;
    let rhs = ek.select_columns(rss.as_matrix())?;
    Ok(Filter {
        w: hermitian_solve(ryy, &rhs)?,
    })
}

/// `X diag(g) X⁻¹` with `g_i = max(1 − 1/λ_i, 0)` on the top `rank` modes;
/// selecting columns of this operator gives the GEVD-MWF for any reference.
pub fn gevd_mwf_operator(ryy: &HermitianMatrix, rnnv: &HermitianMatrix, rank: usize) -> Result<CMatrix> {
    if rank == 0 {
        return Err(Error::InvalidParameter("GEVD-MWF rank must be at least 1".into()));
    }
    check_dim(ryy.dim(), rnnv.dim(), "gevd-mwf covariance pair")?;
    let g = gevd(ryy, rnnv)?;
    let x = &g.vectors;
    // Xᴴ Rnnv X = I, so X⁻¹ = Xᴴ Rnnv.
    let mut scaled = x.adjoint() * rnnv.as_matrix();
    for (i, &lambda) in g.values.iter().enumerate() {
        let gain = if i < rank { (1.0 - 1.0 / lambda).max(0.0) } else { 0.0 };
        let gain = if gain.is_finite() { gain } else { 0.0 };
        scaled.row_mut(i).scale_mut(gain);
    }
    Ok(x * scaled)
}

/// `W = X diag(g) X⁻¹ E`.
pub fn gevd_mwf(ryy: &HermitianMatrix, rnnv: &HermitianMatrix, rank: usize, ek: &SelectionMatrix) -> Result<Filter> {
    let op = gevd_mwf_operator(ryy, rnnv, rank)?;
    Ok(Filter {
        w: ek.select_columns(&op)?,
    })
}
