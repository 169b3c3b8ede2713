use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::series::{MultiIndex, Series};

/// A polynomial in `w` whose coefficients are series in `z` alone:
/// `c_0(z) + c_1(z) w + … + c_d(z) w^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyInW {
    coeffs: Vec<Series>,
}

impl PolyInW {
    /// The coefficient list may contain trailing zeros; the leading entry is
    /// kept so that `degree` reports the declared degree.
    pub fn new(coeffs: Vec<Series>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Shape("polynomial needs at least one coefficient".into()));
        }
        let (n, t) = (coeffs[0].nvars(), coeffs[0].trunc());
        for c in &coeffs {
            if c.nvars() != n || c.trunc() != t {
                return Err(Error::Shape("polynomial coefficients disagree in shape".into()));
            }
            if c.w_degree().unwrap_or(0) > 0 {
                return Err(Error::Shape("polynomial coefficient depends on w".into()));
            }
        }
        Ok(PolyInW { coeffs })
    }

    /// Splits a series into its `w`-coefficients. Fails if the series has a
    /// term of `w`-degree above `max_deg`.
    pub fn from_series(s: &Series, max_deg: usize) -> Result<Self> {
        if let Some(d) = s.w_degree() {
            if d as usize > max_deg {
                return Err(Error::Shape(format!("w-degree {} exceeds {}", d, max_deg)));
            }
        }
        PolyInW::new((0..=max_deg as u32).map(|j| s.w_coeff(j)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Series] {
        &self.coeffs
    }

    pub fn leading(&self) -> &Series {
        self.coeffs.last().unwrap()
    }

    pub fn is_unitary(&self) -> bool {
        let c = self.leading();
        *c == Series::one(c.nvars(), c.trunc())
    }

    pub fn nvars(&self) -> usize {
        self.coeffs[0].nvars()
    }

    pub fn trunc(&self) -> usize {
        self.coeffs[0].trunc()
    }

    pub fn to_series(&self) -> Series {
        let n = self.nvars();
        let mut acc = Series::zero(n, self.trunc());
        for (j, c) in self.coeffs.iter().enumerate() {
            acc = &acc + &c.mul_monomial(&MultiIndex::unit(n, n - 1).pow_exp(j as u32));
        }
        acc
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(Series::is_real)
    }

    /// `w^k + Σ_{j<k} c_j w^j`.
    pub fn unitary(lower: Vec<Series>) -> Result<Self> {
        let first = lower.first().ok_or_else(|| Error::Shape("empty coefficient list".into()))?;
        let one = Series::constant(first.nvars(), first.trunc(), Coeff::from_int(1));
        let mut c = lower;
        c.push(one);
        PolyInW::new(c)
    }
}

impl MultiIndex {
    /// Multiplies every exponent by `k`.
    pub fn pow_exp(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|e| e * k).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_and_rebuild() {
        let s = Series::from_fracs(2, 6, &[(&[0, 2], 1, 1), (&[1, 1], 3, 1), (&[2, 0], 1, 2)]);
        let p = PolyInW::from_series(&s, 2).unwrap();
        assert!(p.is_unitary());
        assert_eq!(p.degree(), 2);
        assert_eq!(p.to_series(), s);
        assert!(PolyInW::from_series(&s, 1).is_err());
    }
}
