//! Truncated multivariate power series over the Gaussian rationals.
//!
//! Variables are ordered `z_1, …, z_n, w`; the last slot is always the
//! distinguished `w` variable. Truncation is by total degree.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coeff::Coeff;
use crate::error::{Error, Result};

/// Exponent vector of a monomial, ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn w_exp(&self) -> u32 {
        *self.0.last().expect("empty multi-index")
    }

    /// Degree in every variable except the last.
    pub fn z_degree(&self) -> usize {
        self.degree() - self.w_exp() as usize
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn get(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn with(&self, var: usize, e: u32) -> MultiIndex {
        let mut v = self.0.clone();
        v[var] = e;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All exponent vectors in `nvars` variables of total degree exactly `d`,
    /// in ascending graded-lex order.
    pub fn all_of_degree(nvars: usize, d: usize) -> Vec<MultiIndex> {
        fn rec(nvars: usize, left: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == nvars {
                prefix.push(left as u32);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in 0..=left {
                prefix.push(e as u32);
                rec(nvars, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if nvars == 0 {
            return out;
        }
        rec(nvars, d, &mut Vec::new(), &mut out);
        out.sort();
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Renders a monomial with variable names `z1..zn, w` (or `x, y` for two
/// planar variables when `planar` is set).
pub fn monomial_name(e: &MultiIndex, planar: bool) -> String {
    let n = e.len();
    let name = |i: usize| -> String {
        if planar && n == 2 {
            ["x", "y"][i].to_string()
        } else if i + 1 == n {
            "w".to_string()
        } else if n == 2 {
            "z".to_string()
        } else {
            format!("z{}", i + 1)
        }
    };
    let parts: Vec<String> = e
        .0
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| if k == 1 { name(i) } else { format!("{}^{}", name(i), k) })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// A power series truncated at total degree `trunc`, stored sparsely.
/// No stored term exceeds the truncation and no stored coefficient is zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    nvars: usize,
    trunc: usize,
    terms: BTreeMap<MultiIndex, Coeff>,
}

impl Series {
    pub fn zero(nvars: usize, trunc: usize) -> Self {
        assert!(nvars > 0, "series needs at least one variable");
        Series { nvars, trunc, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, trunc: usize, c: Coeff) -> Self {
        let mut s = Series::zero(nvars, trunc);
        s.insert(MultiIndex::zero(nvars), c);
        s
    }

    pub fn one(nvars: usize, trunc: usize) -> Self {
        Series::constant(nvars, trunc, Coeff::one())
    }

    pub fn var(nvars: usize, trunc: usize, var: usize) -> Self {
        Series::monomial(nvars, trunc, MultiIndex::unit(nvars, var), Coeff::one())
    }

    /// The last variable, `w`.
    pub fn w(nvars: usize, trunc: usize) -> Self {
        Series::var(nvars, trunc, nvars - 1)
    }

    pub fn monomial(nvars: usize, trunc: usize, e: MultiIndex, c: Coeff) -> Self {
        let mut s = Series::zero(nvars, trunc);
        s.insert(e, c);
        s
    }

    /// Builds a series from `(exponents, coefficient)` pairs; repeated
    /// exponents accumulate, zeros and terms beyond `trunc` are dropped.
    pub fn from_terms<I>(nvars: usize, trunc: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Coeff)>,
    {
        let mut s = Series::zero(nvars, trunc);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            s.add_term(MultiIndex(e), &c);
        }
        s
    }

    /// Convenience constructor from small integer fractions `(exps, p, q)`.
    pub fn from_fracs(nvars: usize, trunc: usize, terms: &[(&[u32], i64, i64)]) -> Self {
        Series::from_terms(nvars, trunc, terms.iter().map(|(e, p, q)| (e.to_vec(), Coeff::frac(*p, *q))))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Coeff)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &MultiIndex) -> Coeff {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn coeff_of(&self, e: &[u32]) -> Coeff {
        self.coeff(&MultiIndex(e.to_vec()))
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(&MultiIndex::zero(self.nvars))
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(Coeff::is_real)
    }

    fn insert(&mut self, e: MultiIndex, c: Coeff) {
        if e.degree() <= self.trunc && !c.is_zero() {
            self.terms.insert(e, c);
        }
    }

    /// Adds `c·x^e` in place, keeping the canonical-form invariants.
    pub fn add_term(&mut self, e: MultiIndex, c: &Coeff) {
        if c.is_zero() || e.degree() > self.trunc {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn same_shape(&self, o: &Series) -> Result<()> {
        if self.nvars != o.nvars || self.trunc != o.trunc {
            return Err(Error::Shape(format!(
                "(nvars {}, trunc {}) vs (nvars {}, trunc {})",
                self.nvars, self.trunc, o.nvars, o.trunc
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Series) -> Result<Series> {
        self.same_shape(o)?;
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c);
        }
        Ok(r)
    }

    pub fn try_sub(&self, o: &Series) -> Result<Series> {
        self.same_shape(o)?;
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), &-c);
        }
        Ok(r)
    }

    pub fn try_mul(&self, o: &Series) -> Result<Series> {
        self.same_shape(o)?;
        Ok(self.mul_unchecked(o))
    }

    fn mul_unchecked(&self, o: &Series) -> Series {
        let mut acc: BTreeMap<MultiIndex, Coeff> = BTreeMap::new();
        let n = self.trunc;
        // Both maps iterate in ascending total degree, so the inner loop can stop early.
        for (ea, ca) in &self.terms {
            let da = ea.degree();
            if da > n {
                break;
            }
            for (eb, cb) in &o.terms {
                if da + eb.degree() > n {
                    break;
                }
                let p = ca * cb;
                let e = ea.add(eb);
                match acc.get_mut(&e) {
                    Some(v) => *v += &p,
                    None => {
                        acc.insert(e, p);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Series { nvars: self.nvars, trunc: self.trunc, terms: acc }
    }

    pub fn scale(&self, c: &Coeff) -> Series {
        if c.is_zero() {
            return Series::zero(self.nvars, self.trunc);
        }
        Series {
            nvars: self.nvars,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by the monomial `x^e` (a cheap shift).
    pub fn mul_monomial(&self, e: &MultiIndex) -> Series {
        let mut r = Series::zero(self.nvars, self.trunc);
        for (k, v) in &self.terms {
            r.insert(k.add(e), v.clone());
        }
        r
    }

    pub fn pow(&self, e: u32) -> Series {
        let mut acc = Series::one(self.nvars, self.trunc);
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse of a unit.
    pub fn invert_unit(&self) -> Result<Series> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotAUnit);
        }
        let c0inv = c0.inv()?;
        // a = c0 (1 - x)  =>  a^{-1} = c0^{-1} Σ x^j
        let x = &Series::one(self.nvars, self.trunc) - &self.scale(&c0inv);
        let mut acc = Series::one(self.nvars, self.trunc);
        let mut xp = Series::one(self.nvars, self.trunc);
        for _ in 0..self.trunc {
            xp = &xp * &x;
            if xp.is_zero() {
                break;
            }
            acc = &acc + &xp;
        }
        Ok(acc.scale(&c0inv))
    }

    /// `self^alpha` for a series with constant term 1, via the binomial
    /// series. Exact for any rational exponent.
    pub fn unit_pow(&self, alpha: &BigRational) -> Result<Series> {
        if self.constant_term() != Coeff::one() {
            return Err(Error::Domain("rational power needs constant term 1".into()));
        }
        let x = self - &Series::one(self.nvars, self.trunc);
        let mut acc = Series::one(self.nvars, self.trunc);
        let mut xp = Series::one(self.nvars, self.trunc);
        let mut binom = BigRational::one();
        for j in 0..self.trunc {
            let jr = BigRational::from_integer(BigInt::from(j as i64));
            binom = binom * (alpha - &jr) / (&jr + BigRational::one());
            xp = &xp * &x;
            if xp.is_zero() {
                break;
            }
            acc = &acc + &xp.scale(&Coeff::real(binom.clone()));
        }
        Ok(acc)
    }

    /// `exp(self)` for a series without constant term.
    pub fn exp(&self) -> Result<Series> {
        if !self.constant_term().is_zero() {
            return Err(Error::Domain("exp of a series with nonzero constant term".into()));
        }
        let mut acc = Series::one(self.nvars, self.trunc);
        let mut term = Series::one(self.nvars, self.trunc);
        for j in 1..=self.trunc {
            term = (&term * self).scale(&Coeff::frac(1, j as i64));
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Composition `self(images)`. Images of variables that occur in `self`
    /// must have zero constant term, otherwise the truncated result would
    /// depend on unknown higher-order terms.
    pub fn substitute(&self, images: &[Series]) -> Result<Series> {
        if images.len() != self.nvars {
            return Err(Error::Shape(format!("{} images for {} variables", images.len(), self.nvars)));
        }
        let out_nvars = images.first().map(|s| s.nvars).unwrap_or(self.nvars);
        let out_trunc = images.first().map(|s| s.trunc).unwrap_or(self.trunc);
        for (i, img) in images.iter().enumerate() {
            if img.nvars != out_nvars || img.trunc != out_trunc {
                return Err(Error::Shape("images disagree in nvars/trunc".into()));
            }
            let used = self.terms.keys().any(|e| e.get(i) > 0);
            if used && !img.constant_term().is_zero() {
                return Err(Error::Domain(format!(
                    "image of variable {} has nonzero constant term",
                    i
                )));
            }
        }
        let terms: Vec<(MultiIndex, Coeff)> = self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        Ok(subst_rec(&terms, self.nvars, images, out_nvars, out_trunc))
    }

    /// Formal partial derivative. The result is exact up to degree
    /// `trunc - 1` and is stored at the same truncation.
    pub fn partial(&self, var: usize) -> Series {
        assert!(var < self.nvars, "variable index out of range");
        let mut r = Series::zero(self.nvars, self.trunc);
        for (e, c) in &self.terms {
            let k = e.get(var);
            if k > 0 {
                r.insert(e.with(var, k - 1), c * &Coeff::from_int(k as i64));
            }
        }
        r
    }

    /// Order of vanishing of `self(0, …, 0, w)` at `w = 0`; `None` stands
    /// for +∞ (identically zero up to the truncation).
    pub fn w_order(&self) -> Option<usize> {
        self.terms
            .keys()
            .filter(|e| e.z_degree() == 0)
            .map(|e| e.w_exp() as usize)
            .min()
    }

    /// Order of vanishing at the origin (lowest total degree present).
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().next().map(MultiIndex::degree)
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(MultiIndex::degree)
    }

    /// Drops all terms of degree above `d` and lowers the truncation to `d`.
    pub fn truncate_to(&self, d: usize) -> Series {
        let d = d.min(self.trunc);
        Series {
            nvars: self.nvars,
            trunc: d,
            terms: self.terms.iter().filter(|(e, _)| e.degree() <= d).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Keeps the same terms but drops everything above `d`, without changing
    /// the nominal truncation.
    pub fn chop(&self, d: usize) -> Series {
        Series {
            nvars: self.nvars,
            trunc: self.trunc,
            terms: self.terms.iter().filter(|(e, _)| e.degree() <= d).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Re-embeds at a different truncation (raising pads with zeros).
    pub fn with_trunc(&self, trunc: usize) -> Series {
        let mut r = Series::zero(self.nvars, trunc);
        for (e, c) in &self.terms {
            r.insert(e.clone(), c.clone());
        }
        r
    }

    /// Re-embeds in a larger variable set; variable `i` maps to `positions[i]`.
    pub fn embed(&self, nvars: usize, positions: &[usize]) -> Series {
        let mut r = Series::zero(nvars, self.trunc);
        for (e, c) in &self.terms {
            let mut v = vec![0; nvars];
            for (i, &k) in e.0.iter().enumerate() {
                v[positions[i]] += k;
            }
            r.insert(MultiIndex(v), c.clone());
        }
        r
    }

    pub fn filter<F: Fn(&MultiIndex) -> bool>(&self, keep: F) -> Series {
        Series {
            nvars: self.nvars,
            trunc: self.trunc,
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous(&self, d: usize) -> Series {
        self.filter(|e| e.degree() == d)
    }

    /// Terms whose degree in the `z` variables equals `m`.
    pub fn z_slice(&self, m: usize) -> Series {
        self.filter(|e| e.z_degree() == m)
    }

    /// Sets variable `var` to zero.
    pub fn restrict_zero(&self, var: usize) -> Series {
        self.filter(|e| e.get(var) == 0)
    }

    /// `self(0, …, 0, w)`.
    pub fn restrict_to_w_axis(&self) -> Series {
        self.filter(|e| e.z_degree() == 0)
    }

    /// True when the series depends only on the listed variables.
    pub fn depends_only_on(&self, vars: &[usize]) -> bool {
        self.terms.keys().all(|e| e.0.iter().enumerate().all(|(i, &k)| k == 0 || vars.contains(&i)))
    }

    /// Coefficient of `w^j` as a series in the remaining variables (still
    /// stored with the full variable set).
    pub fn w_coeff(&self, j: u32) -> Series {
        let last = self.nvars - 1;
        let mut r = Series::zero(self.nvars, self.trunc);
        for (e, c) in &self.terms {
            if e.w_exp() == j {
                r.insert(e.with(last, 0), c.clone());
            }
        }
        r
    }

    pub fn w_degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::w_exp).max()
    }

    /// First nonzero term of degree at most `d`, in graded-lex order.
    pub fn first_term_up_to(&self, d: usize) -> Option<(&MultiIndex, &Coeff)> {
        self.terms.iter().find(|(e, _)| e.degree() <= d)
    }

    pub fn is_zero_up_to(&self, d: usize) -> bool {
        self.first_term_up_to(d).is_none()
    }

    pub fn map_coeffs<F: Fn(&Coeff) -> Coeff>(&self, f: F) -> Series {
        let mut r = Series::zero(self.nvars, self.trunc);
        for (e, c) in &self.terms {
            r.insert(e.clone(), f(c));
        }
        r
    }

    /// Univariate compositional inverse: for `self = a·x + …` in one
    /// variable (all other variables absent), returns `ψ` with
    /// `self(ψ(x)) = x`.
    pub fn compositional_inverse_1d(&self, var: usize) -> Result<Series> {
        if !self.depends_only_on(&[var]) || !self.constant_term().is_zero() {
            return Err(Error::Domain("compositional inverse needs a one-variable series vanishing at 0".into()));
        }
        let a = self.coeff(&MultiIndex::unit(self.nvars, var));
        let ainv = a.inv().map_err(|_| Error::Domain("compositional inverse needs nonzero linear term".into()))?;
        let x = Series::var(self.nvars, self.trunc, var);
        let mut psi = x.scale(&ainv);
        for _ in 0..self.trunc {
            let mut images: Vec<Series> = (0..self.nvars).map(|i| Series::var(self.nvars, self.trunc, i)).collect();
            images[var] = psi.clone();
            let comp = self.substitute(&images)?;
            let corr = (&x - &comp).scale(&ainv);
            if corr.is_zero() {
                break;
            }
            psi = &psi + &corr;
        }
        Ok(psi)
    }

    /// Human-readable rendering with named variables.
    pub fn pretty(&self, planar: bool) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(e, c)| format!("{}*{}", c, monomial_name(e, planar)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[n={},N={}]({})", self.nvars, self.trunc, self.pretty(false))
    }
}

fn subst_rec(
    terms: &[(MultiIndex, Coeff)],
    nv: usize,
    images: &[Series],
    out_nvars: usize,
    out_trunc: usize,
) -> Series {
    // Horner in the highest remaining variable `nv - 1`.
    if nv == 0 {
        let c = terms.iter().fold(Coeff::zero(), |acc, (_, c)| &acc + c);
        return Series::constant(out_nvars, out_trunc, c);
    }
    if terms.is_empty() {
        return Series::zero(out_nvars, out_trunc);
    }
    let v = nv - 1;
    let mut groups: BTreeMap<u32, Vec<(MultiIndex, Coeff)>> = BTreeMap::new();
    for (e, c) in terms {
        groups.entry(e.get(v)).or_default().push((e.with(v, 0), c.clone()));
    }
    let img = &images[v];
    let identity = out_nvars == images.len() && *img == Series::var(out_nvars, out_trunc, v);
    let top = *groups.keys().next_back().unwrap();
    let mut acc = Series::zero(out_nvars, out_trunc);
    for j in (0..=top).rev() {
        if j != top {
            acc = if identity { acc.mul_monomial(&MultiIndex::unit(out_nvars, v)) } else { &acc * img };
        }
        if let Some(g) = groups.get(&j) {
            acc = &acc + &subst_rec(g, v, images, out_nvars, out_trunc);
        }
    }
    acc
}

macro_rules! series_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> std::ops::$tr<&'a Series> for &'a Series {
            type Output = Series;
            /// Panics on shape mismatch; use the `try_` form for fallible use.
            fn $m(self, o: &Series) -> Series {
                self.$checked(o).expect("series shape mismatch")
            }
        }
        impl std::ops::$tr<Series> for Series {
            type Output = Series;
            fn $m(self, o: Series) -> Series {
                (&self).$checked(&o).expect("series shape mismatch")
            }
        }
    };
}
series_binop!(Add, add, try_add);
series_binop!(Sub, sub, try_sub);
series_binop!(Mul, mul, try_mul);

impl std::ops::Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(&-Coeff::one())
    }
}

impl std::ops::Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

/// Which ring operation [`ring_op`] performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
}

pub fn ring_op(a: &Series, b: &Series, which: RingOp) -> Result<Series> {
    match which {
        RingOp::Add => a.try_add(b),
        RingOp::Sub => a.try_sub(b),
        RingOp::Mul => a.try_mul(b),
    }
}

/// Identity images `x_i ↦ x_i`.
pub fn identity_images(nvars: usize, trunc: usize) -> Vec<Series> {
    (0..nvars).map(|i| Series::var(nvars, trunc, i)).collect()
}
