// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::qcore::state::{DensityMatrix, STATE_TOL};

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

/// Largest entry of `sum_j K_j^dagger K_j - I`.
pub fn completeness_residual(kraus: &[CMat]) -> f64 {
    let Some(first) = kraus.first() else { return f64::INFINITY };
    let n = first.ncols();
    let mut acc = -linalg::identity(n);
    for k in kraus {
        acc += k.adjoint() * k;
    }
    linalg::max_abs(&acc)
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        };
        let (dim_out, dim_in) = first.shape();
        for k in &kraus {
            if k.nrows() != dim_out {
                return Err(Error::DimensionMismatch { expected: dim_out, found: k.nrows() });
            }
            if k.ncols() != dim_in {
                return Err(Error::DimensionMismatch { expected: dim_in, found: k.ncols() });
            }
        }
        let r = completeness_residual(&kraus);
        if r > STATE_TOL {
            return Err(Error::Completeness(r));
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim_in: dim, dim_out: dim, kraus: vec![linalg::identity(dim)] }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// `sum_j K_j M K_j^dagger` for an arbitrary operator `M`.
    pub fn apply_operator(&self, m: &CMat) -> Result<CMat> {
        if m.nrows() != self.dim_in || m.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: m.nrows() });
        }
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(state.matrix())?;
        Ok(DensityMatrix::from_propagated(out))
    }

    /// Equivalent Kraus set `K'_j = sum_i v_ji K_i` for an isometry `V`.
    pub fn transform(&self, v: &CMat) -> Result<Self> {
        if v.ncols() != self.kraus.len() {
            return Err(Error::DimensionMismatch { expected: self.kraus.len(), found: v.ncols() });
        }
        let r = linalg::isometry_residual(v);
        if r > STATE_TOL {
            return Err(Error::NotIsometry(r));
        }
        let kraus = (0..v.nrows())
            .map(|j| {
                let mut acc = CMat::zeros(self.dim_out, self.dim_in);
                for (i, k) in self.kraus.iter().enumerate() {
                    acc += k * v[(j, i)];
                }
                acc
            })
            .collect();
        Ok(Self { dim_in: self.dim_in, dim_out: self.dim_out, kraus })
    }

    /// Pads the Kraus list with zero operators up to `m` entries.
    pub fn padded(&self, m: usize) -> Self {
        let mut kraus = self.kraus.clone();
        while kraus.len() < m {
            kraus.push(CMat::zeros(self.dim_out, self.dim_in));
        }
        Self { kraus, ..*self }
    }

    /// Sequential composition: `other` after `self`.
    pub fn then(&self, other: &KrausChannel) -> Result<Self> {
        if other.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch { expected: self.dim_out, found: other.dim_in });
        }
        let mut kraus = Vec::with_capacity(self.len() * other.len());
        for b in &other.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Ok(Self { dim_in: self.dim_in, dim_out: other.dim_out, kraus })
    }
}

/// `{sqrt(p) I, sqrt(1-p) sigma_z}`.
pub fn dephasing_channel(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("dephasing probability {p} outside [0,1]")));
    }
    KrausChannel::new(vec![linalg::identity(2) * c(p.sqrt(), 0.0), linalg::pauli_z() * c((1.0 - p).sqrt(), 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::qcore::state::PureState;

    #[test]
    fn completeness_is_enforced() {
        let bad = vec![linalg::identity(2) * c(0.9, 0.0)];
        assert!(matches!(KrausChannel::new(bad), Err(Error::Completeness(_))));
    }

    #[test]
    fn identity_channel_is_identity() {
        let rho = DensityMatrix::from_bloch([0.1, 0.2, -0.3]).unwrap();
        let out = KrausChannel::identity(2).apply(&rho).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn symmetric_dephasing_kills_coherence() {
        let ch = dephasing_channel(0.5).unwrap();
        let out = ch.apply(&PureState::plus().density_matrix()).unwrap();
        assert!(max_abs(&(out.matrix() - linalg::identity(2) * c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn swap_reorders_kraus() {
        let ch = dephasing_channel(0.75).unwrap();
        let swap = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let t = ch.transform(&swap).unwrap();
        assert_eq!(t.kraus()[0], ch.kraus()[1]);
        assert_eq!(t.kraus()[1], ch.kraus()[0]);
        assert!(ch.transform(&(swap * c(2.0, 0.0))).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = dephasing_channel(0.75).unwrap();
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(ch.apply(&rho), Err(Error::DimensionMismatch { .. })));
    }
}
