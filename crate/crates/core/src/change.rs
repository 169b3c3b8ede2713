use num_traits::Zero;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::linalg;
use crate::series::{identity_images, MultiIndex, Series};

/// The declared shape of a coordinate change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChangeShape {
    /// `(z, w) ↦ (z, φ(z, w))`.
    WOnly,
    /// `(z, w) ↦ (z, (a w + b)/(c w + d))` with `a, b, c, d` in `z` only.
    Mobius,
    Linear,
    Full,
}

impl ChangeShape {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChangeShape::WOnly => "w-only",
            ChangeShape::Mobius => "mobius",
            ChangeShape::Linear => "linear",
            ChangeShape::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "w-only" => ChangeShape::WOnly,
            "mobius" => ChangeShape::Mobius,
            "linear" => ChangeShape::Linear,
            "full" => ChangeShape::Full,
            _ => return Err(Error::Parse(format!("unknown change shape {:?}", s))),
        })
    }
}

/// A germ of map given by one component series per variable. Applying it to
/// a series `f` means `f ∘ Φ`, i.e. substituting `images[i]` for `x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    shape: ChangeShape,
    images: Vec<Series>,
}

impl CoordinateChange {
    pub fn new(shape: ChangeShape, images: Vec<Series>) -> Result<Self> {
        let first = images.first().ok_or_else(|| Error::Shape("change needs components".into()))?;
        let (n, t) = (first.nvars(), first.trunc());
        if images.len() != n || images.iter().any(|s| s.nvars() != n || s.trunc() != t) {
            return Err(Error::Shape("change components must be square and same-shaped".into()));
        }
        if images.iter().any(|s| !s.constant_term().is_zero()) {
            return Err(Error::Domain("change must fix the origin".into()));
        }
        let ch = CoordinateChange { shape, images };
        ch.check_shape()?;
        Ok(ch)
    }

    pub fn identity(nvars: usize, trunc: usize) -> Self {
        CoordinateChange { shape: ChangeShape::WOnly, images: identity_images(nvars, trunc) }
    }

    pub fn w_only(phi: Series) -> Result<Self> {
        let mut images = identity_images(phi.nvars(), phi.trunc());
        *images.last_mut().unwrap() = phi;
        CoordinateChange::new(ChangeShape::WOnly, images)
    }

    /// `x ↦ M x`.
    pub fn linear(m: &[Vec<Coeff>], trunc: usize) -> Result<Self> {
        let n = m.len();
        let images = m
            .iter()
            .map(|row| {
                Series::from_terms(n, trunc, row.iter().enumerate().map(|(j, c)| (MultiIndex::unit(n, j).0, c.clone())))
            })
            .collect();
        CoordinateChange::new(ChangeShape::Linear, images)
    }

    /// `w ↦ (a w + b)/(c w + d)`; requires `b(0) = 0` and `d(0) ≠ 0`.
    pub fn mobius(a: &Series, b: &Series, c: &Series, d: &Series) -> Result<Self> {
        let n = a.nvars();
        let t = a.trunc();
        let w = Series::w(n, t);
        let num = &(a * &w) + b;
        let den = &(c * &w) + d;
        let phi = &num * &den.invert_unit()?;
        let mut images = identity_images(n, t);
        images[n - 1] = phi;
        CoordinateChange::new(ChangeShape::Mobius, images)
    }

    pub fn full(images: Vec<Series>) -> Result<Self> {
        CoordinateChange::new(ChangeShape::Full, images)
    }

    fn check_shape(&self) -> Result<()> {
        if matches!(self.shape, ChangeShape::WOnly | ChangeShape::Mobius) {
            let n = self.nvars();
            let t = self.trunc();
            for (i, img) in self.images.iter().enumerate().take(n - 1) {
                if *img != Series::var(n, t, i) {
                    return Err(Error::Shape(format!("{} change moves variable {}", self.shape.as_str(), i)));
                }
            }
        }
        if self.shape == ChangeShape::Linear && self.images.iter().any(|s| s.terms().any(|(e, _)| e.degree() != 1)) {
            return Err(Error::Shape("linear change has nonlinear terms".into()));
        }
        Ok(())
    }

    pub fn shape(&self) -> ChangeShape {
        self.shape
    }

    pub fn images(&self) -> &[Series] {
        &self.images
    }

    pub fn nvars(&self) -> usize {
        self.images.len()
    }

    pub fn trunc(&self) -> usize {
        self.images[0].trunc()
    }

    pub fn w_image(&self) -> &Series {
        self.images.last().unwrap()
    }

    pub fn is_identity(&self) -> bool {
        self.images == identity_images(self.nvars(), self.trunc())
    }

    pub fn is_real(&self) -> bool {
        self.images.iter().all(Series::is_real)
    }

    /// `f ∘ Φ`.
    pub fn apply(&self, f: &Series) -> Result<Series> {
        f.substitute(&self.images)
    }

    /// `self ∘ inner`: first `inner`, then `self`, as maps. Applying the
    /// result to `f` equals applying `inner` to `self.apply(f)`.
    pub fn compose(&self, inner: &CoordinateChange) -> Result<CoordinateChange> {
        let images = self.images.iter().map(|s| s.substitute(&inner.images)).collect::<Result<Vec<_>>>()?;
        let wlike = |s: ChangeShape| matches!(s, ChangeShape::WOnly | ChangeShape::Mobius);
        let shape = if wlike(self.shape) && wlike(inner.shape) {
            ChangeShape::WOnly
        } else if self.shape == ChangeShape::Linear && inner.shape == ChangeShape::Linear {
            ChangeShape::Linear
        } else {
            ChangeShape::Full
        };
        CoordinateChange::new(shape, images)
    }

    /// Linear part `DΦ(0)` as a matrix (row i = component i).
    pub fn linear_part(&self) -> Vec<Vec<Coeff>> {
        let n = self.nvars();
        self.images.iter().map(|s| (0..n).map(|j| s.coeff(&MultiIndex::unit(n, j))).collect()).collect()
    }

    pub fn is_invertible(&self) -> bool {
        linalg::invert(&self.linear_part()).is_some()
    }

    /// Jacobian matrix of series, entry `(i, j) = ∂Φ_i/∂x_j`.
    pub fn jacobian(&self) -> Vec<Vec<Series>> {
        let n = self.nvars();
        self.images.iter().map(|s| (0..n).map(|j| s.partial(j)).collect()).collect()
    }

    /// Compositional inverse at jet level.
    pub fn inverse(&self) -> Result<CoordinateChange> {
        let n = self.nvars();
        let t = self.trunc();
        let m = self.linear_part();
        let minv = linalg::invert(&m).ok_or_else(|| Error::Hypothesis("coordinate change is not invertible (singular linear part)".into()))?;
        let ident = identity_images(n, t);
        // Φ = M x + h(x);  Ψ = M⁻¹ (q − h(Ψ))
        let h: Vec<Series> = self
            .images
            .iter()
            .map(|s| s.filter(|e| e.degree() >= 2))
            .collect();
        let apply_minv = |v: &[Series]| -> Vec<Series> {
            (0..n)
                .map(|i| {
                    let mut acc = Series::zero(n, t);
                    for j in 0..n {
                        acc = &acc + &v[j].scale(&minv[i][j]);
                    }
                    acc
                })
                .collect()
        };
        let mut psi = apply_minv(&ident);
        for _ in 0..t {
            let hv: Vec<Series> = h.iter().map(|s| s.substitute(&psi)).collect::<Result<_>>()?;
            let diff: Vec<Series> = ident.iter().zip(&hv).map(|(a, b)| a - b).collect();
            let next = apply_minv(&diff);
            if next == psi {
                break;
            }
            psi = next;
        }
        let shape = match self.shape {
            ChangeShape::Mobius => ChangeShape::WOnly,
            s => s,
        };
        CoordinateChange::new(shape, psi)
    }
}
