#[allow(unused_imports)] // inherent on some targets and toolchains
use num_traits::Float;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::linalg::{c, max_abs_diff, CMatrix};
use crate::protocols::Sign;

/// Coupling strength `epsilon` of the qubit-pointer weak measurement and the
/// two derived probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeakMeasurementConfig {
    pub epsilon: f64,
    /// `p_m = sin 2 epsilon`
    pub p_m: f64,
    /// `p_d = sin^2 epsilon`
    pub p_d: f64,
}

impl WeakMeasurementConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= core::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        let s = epsilon.sin();
        Ok(Self { epsilon, p_m: (2.0 * epsilon).sin(), p_d: s * s })
    }
}

/// Kraus operators of the X- and Y-type weak measurements of `Pi^A_j`:
///
/// `A^X_x = (cos e I + x sin e D_j) / sqrt 2`,
/// `A^Y_y = (cos e I - i y sin e D_j) / sqrt 2`,
///
/// with `D_j = 2 Pi^A_j - I`. These are the operators induced on the system by
/// coupling a pointer qubit prepared in `cos e |0> + sin e |1>` through
/// `U = I (x) Pi^A_j + Z (x) (I - Pi^A_j)` and measuring it in the X or Y basis.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausPair {
    pub j: usize,
    pub config: WeakMeasurementConfig,
    x_ops: [CMatrix; 2],
    y_ops: [CMatrix; 2],
    reflection: CMatrix,
}

impl KrausPair {
    pub fn x(&self, outcome: Sign) -> &CMatrix {
        &self.x_ops[outcome.index()]
    }

    pub fn y(&self, outcome: Sign) -> &CMatrix {
        &self.y_ops[outcome.index()]
    }

    /// `D_j`
    pub fn reflection(&self) -> &CMatrix {
        &self.reflection
    }

    /// Largest deviation of `sum_x A^dagger A` from the identity over both
    /// pointer types.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.reflection.nrows();
        let id = CMatrix::identity(d, d);
        let sum = |ops: &[CMatrix; 2]| ops.iter().fold(CMatrix::zeros(d, d), |acc, a| acc + a.adjoint() * a);
        max_abs_diff(&sum(&self.x_ops), &id).max(max_abs_diff(&sum(&self.y_ops), &id))
    }
}

pub fn kraus_operators(basis: &BasisPair, j: usize, epsilon: f64) -> Result<KrausPair> {
    basis.check_index(j)?;
    let config = WeakMeasurementConfig::new(epsilon)?;
    let d = basis.dim();
    let id = CMatrix::identity(d, d);
    let reflection = basis.reflection(j);
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let (s, co) = (epsilon.sin(), epsilon.cos());
    let x_op = |sign: Sign| (&id * c(co, 0.0) + &reflection * c(sign.value() * s, 0.0)) * c(r, 0.0);
    let y_op = |sign: Sign| (&id * c(co, 0.0) + &reflection * c(0.0, -sign.value() * s)) * c(r, 0.0);
    Ok(KrausPair {
        j,
        config,
        x_ops: [x_op(Sign::Plus), x_op(Sign::Minus)],
        y_ops: [y_op(Sign::Plus), y_op(Sign::Minus)],
        reflection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_deviation, max_abs_diff};
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn config_ranges() {
        assert!(WeakMeasurementConfig::new(0.0).is_err());
        assert!(WeakMeasurementConfig::new(-0.1).is_err());
        assert!(WeakMeasurementConfig::new(FRAC_PI_2 + 1e-9).is_err());
        assert!(WeakMeasurementConfig::new(f64::NAN).is_err());
        for eps in [0.05, 0.2, 0.4, FRAC_PI_4, FRAC_PI_2] {
            let cfg = WeakMeasurementConfig::new(eps).unwrap();
            assert!((cfg.p_m * cfg.p_m - 4.0 * cfg.p_d * (1.0 - cfg.p_d)).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&cfg.p_m) && (0.0..=1.0).contains(&cfg.p_d));
        }
    }

    #[test]
    fn completeness_qubit() {
        let k = kraus_operators(&BasisPair::qubit_mub(), 0, 0.2).unwrap();
        assert!(k.completeness_deviation() < 1e-14);
    }

    #[test]
    fn projective_at_quarter_pi() {
        // p_m = 1: the X pointer reads out Pi^A_j exactly.
        let basis = BasisPair::fourier(3);
        let k = kraus_operators(&basis, 1, FRAC_PI_4).unwrap();
        let p = basis.a_projector(1);
        let q = CMatrix::identity(3, 3) - &p;
        assert!(max_abs_diff(k.x(Sign::Plus), &p) < 1e-15);
        assert!(max_abs_diff(k.x(Sign::Minus), &q) < 1e-15);
    }

    #[test]
    fn half_pi_is_a_scaled_reflection() {
        let basis = BasisPair::qubit_mub();
        let k = kraus_operators(&basis, 0, FRAC_PI_2).unwrap();
        let expected = basis.reflection(0) * c(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!(max_abs_diff(k.x(Sign::Plus), &expected) < 1e-15);
        assert!(k.completeness_deviation() < 1e-14);
    }

    #[test]
    fn zero_coupling_limit() {
        let k = kraus_operators(&BasisPair::qubit_mub(), 1, 1e-9).unwrap();
        let half = CMatrix::identity(2, 2) * c(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        for s in Sign::BOTH {
            assert!(max_abs_diff(k.x(s), &half) < 1e-8);
            assert!(max_abs_diff(k.y(s), &half) < 1e-8);
        }
    }

    #[test]
    fn reflection_is_hermitian() {
        let k = kraus_operators(&BasisPair::fourier(4), 2, 0.3).unwrap();
        assert!(hermitian_deviation(k.reflection()) < 1e-15);
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(
            kraus_operators(&BasisPair::qubit_mub(), 2, 0.1),
            Err(Error::IndexOutOfRange { index: 2, dim: 2 })
        ));
    }
}
