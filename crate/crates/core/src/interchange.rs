//! JSON interchange documents. Serialization is canonical: terms sorted
//! graded-lex, fractions reduced, denominators positive, so a
//! parse/serialize round trip is byte-exact.

use serde::{Deserialize, Serialize};

use crate::change::{ChangeShape, CoordinateChange};
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::forms::{OneForm, TwoForm};
use crate::planar::VectorField2;
use crate::series::{MultiIndex, Series};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exp: Vec<u32>,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub nvars: usize,
    pub trunc: usize,
    pub terms: Vec<TermDoc>,
}

impl From<&Series> for SeriesDoc {
    fn from(s: &Series) -> Self {
        SeriesDoc {
            nvars: s.nvars(),
            trunc: s.trunc(),
            terms: s
                .terms()
                .map(|(e, c)| TermDoc { exp: e.0.clone(), re: c.re_string(), im: c.im_string() })
                .collect(),
        }
    }
}

impl TryFrom<&SeriesDoc> for Series {
    type Error = Error;
    fn try_from(d: &SeriesDoc) -> Result<Series> {
        if d.nvars == 0 {
            return Err(Error::Parse("nvars must be positive".into()));
        }
        let mut s = Series::zero(d.nvars, d.trunc);
        let mut seen = std::collections::BTreeSet::new();
        for t in &d.terms {
            if t.exp.len() != d.nvars {
                return Err(Error::Parse(format!("exponent {:?} has wrong length", t.exp)));
            }
            let e = MultiIndex(t.exp.clone());
            if e.degree() > d.trunc {
                return Err(Error::Parse(format!("term {:?} exceeds truncation {}", t.exp, d.trunc)));
            }
            if !seen.insert(e.clone()) {
                return Err(Error::Parse(format!("duplicate term {:?}", t.exp)));
            }
            s.add_term(e, &Coeff::from_parts(&t.re, &t.im)?);
        }
        Ok(s)
    }
}

pub fn series_to_json(s: &Series) -> String {
    serde_json::to_string(&SeriesDoc::from(s)).expect("series serializes")
}

pub fn series_from_json(text: &str) -> Result<Series> {
    let d: SeriesDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Series::try_from(&d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeDoc {
    pub shape: String,
    pub images: Vec<SeriesDoc>,
}

impl From<&CoordinateChange> for ChangeDoc {
    fn from(c: &CoordinateChange) -> Self {
        ChangeDoc { shape: c.shape().as_str().into(), images: c.images().iter().map(SeriesDoc::from).collect() }
    }
}

impl TryFrom<&ChangeDoc> for CoordinateChange {
    type Error = Error;
    fn try_from(d: &ChangeDoc) -> Result<CoordinateChange> {
        let images = d.images.iter().map(Series::try_from).collect::<Result<Vec<_>>>()?;
        CoordinateChange::new(ChangeShape::parse(&d.shape)?, images)
    }
}

/// 1-form `Σ zcoeffs[i] dz_i + wcoeff dw`, optionally divided by a common
/// `denominator` (closed meromorphic forms).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneFormDoc {
    pub n: usize,
    pub zcoeffs: Vec<SeriesDoc>,
    pub wcoeff: SeriesDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<SeriesDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorFieldDoc {
    pub trunc: usize,
    pub px: SeriesDoc,
    pub py: SeriesDoc,
}

/// Input of `prepare-meromorphic`: the germ `num/den`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientDoc {
    pub num: SeriesDoc,
    pub den: SeriesDoc,
}

impl From<&OneForm> for OneFormDoc {
    fn from(f: &OneForm) -> Self {
        OneFormDoc {
            n: f.n(),
            zcoeffs: f.zcoeffs.iter().map(SeriesDoc::from).collect(),
            wcoeff: SeriesDoc::from(&f.wcoeff),
            denominator: None,
        }
    }
}

impl OneFormDoc {
    pub fn with_denominator(mut self, d: &Series) -> Self {
        self.denominator = Some(SeriesDoc::from(d));
        self
    }

    pub fn to_form(&self) -> Result<(OneForm, Option<Series>)> {
        if self.zcoeffs.len() != self.n {
            return Err(Error::Parse(format!("expected {} dz coefficients, found {}", self.n, self.zcoeffs.len())));
        }
        let z = self.zcoeffs.iter().map(Series::try_from).collect::<Result<Vec<_>>>()?;
        let w = Series::try_from(&self.wcoeff)?;
        if w.nvars() != self.n + 1 {
            return Err(Error::Parse(format!("coefficients must have {} variables", self.n + 1)));
        }
        let form = OneForm::new(z, w).map_err(|e| Error::Parse(e.to_string()))?;
        let den = self.denominator.as_ref().map(Series::try_from).transpose()?;
        if let Some(d) = &den {
            d.same_shape(&form.wcoeff).map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok((form, den))
    }
}

impl From<&VectorField2> for VectorFieldDoc {
    fn from(x: &VectorField2) -> Self {
        VectorFieldDoc { trunc: x.trunc(), px: SeriesDoc::from(&x.px), py: SeriesDoc::from(&x.py) }
    }
}

impl TryFrom<&VectorFieldDoc> for VectorField2 {
    type Error = Error;
    fn try_from(d: &VectorFieldDoc) -> Result<VectorField2> {
        let px = Series::try_from(&d.px)?;
        let py = Series::try_from(&d.py)?;
        if px.trunc() != d.trunc || py.trunc() != d.trunc {
            return Err(Error::Parse("component truncation differs from trunc".into()));
        }
        VectorField2::new(px, py).map_err(|e| match e {
            Error::Shape(m) => Error::Parse(m),
            other => other,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoFormTermDoc {
    pub i: usize,
    pub j: usize,
    pub coeff: SeriesDoc,
}

/// Nonzero components `coeff · dx_i∧dx_j`, `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoFormDoc {
    pub nvars: usize,
    pub trunc: usize,
    pub components: Vec<TwoFormTermDoc>,
}

impl From<&TwoForm> for TwoFormDoc {
    fn from(f: &TwoForm) -> Self {
        TwoFormDoc {
            nvars: f.nvars(),
            trunc: f.trunc(),
            components: f
                .components()
                .filter(|(_, c)| !c.is_zero())
                .map(|(&(i, j), c)| TwoFormTermDoc { i, j, coeff: SeriesDoc::from(c) })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffDoc {
    pub re: String,
    pub im: String,
}

impl From<&Coeff> for CoeffDoc {
    fn from(c: &Coeff) -> Self {
        CoeffDoc { re: c.re_string(), im: c.im_string() }
    }
}

impl TryFrom<&CoeffDoc> for Coeff {
    type Error = Error;
    fn try_from(d: &CoeffDoc) -> Result<Coeff> {
        Coeff::from_parts(&d.re, &d.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_series() -> impl Strategy<Value = Series> {
        (1usize..4, 1usize..7).prop_flat_map(|(nv, t)| {
            prop::collection::vec((prop::collection::vec(0u32..4, nv), -20i64..20, 1i64..9, -5i64..5), 0..12)
                .prop_map(move |v| {
                    Series::from_terms(
                        nv,
                        t,
                        v.into_iter().map(|(e, p, q, i)| {
                            (e, Coeff::new(num_rational::BigRational::new(p.into(), q.into()), num_rational::BigRational::from_integer(i.into())))
                        }),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_is_identity(s in arb_series()) {
            let text = series_to_json(&s);
            let back = series_from_json(&text).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(series_to_json(&back), text);
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(series_from_json(r#"{"nvars":2,"trunc":2,"terms":[{"exp":[3,0],"re":"1/1","im":"0/1"}]}"#).is_err());
        assert!(series_from_json(r#"{"nvars":2,"trunc":4,"terms":[{"exp":[1],"re":"1/1","im":"0/1"}]}"#).is_err());
        assert!(series_from_json(r#"{"nvars":2,"trunc":4,"terms":[{"exp":[1,0],"re":"1/0","im":"0/1"}]}"#).is_err());
        assert!(series_from_json("not json").is_err());
    }

    #[test]
    fn canonical_text() {
        let s = Series::from_fracs(2, 3, &[(&[0, 1], 2, 4), (&[1, 0], -3, 1)]);
        assert_eq!(
            series_to_json(&s),
            r#"{"nvars":2,"trunc":3,"terms":[{"exp":[0,1],"re":"1/2","im":"0/1"},{"exp":[1,0],"re":"-3/1","im":"0/1"}]}"#
        );
    }
}
