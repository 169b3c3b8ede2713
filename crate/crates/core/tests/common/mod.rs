#![allow(dead_code)]

use germnorm::forms::OneForm;
use germnorm::planar::VectorField2;
use germnorm::{Coeff, CoordinateChange, MultiIndex, Series};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rat<R: Rng>(r: &mut R) -> Coeff {
    let mut p = 0;
    while p == 0 {
        p = r.gen_range(-5i64..=5);
    }
    Coeff::frac(p, r.gen_range(1i64..=4))
}

pub fn random_exp<R: Rng>(r: &mut R, nvars: usize, min_deg: usize, max_deg: usize) -> MultiIndex {
    let d = r.gen_range(min_deg..=max_deg);
    let mut e = vec![0u32; nvars];
    for _ in 0..d {
        e[r.gen_range(0..nvars)] += 1;
    }
    MultiIndex(e)
}

/// Random terms in total degree `min_deg..=max_deg` selected by `keep`.
pub fn random_series<R: Rng, F: Fn(&MultiIndex) -> bool>(
    r: &mut R,
    nvars: usize,
    trunc: usize,
    nterms: usize,
    min_deg: usize,
    keep: F,
) -> Series {
    let mut s = Series::zero(nvars, trunc);
    let mut tries = 0;
    while s.len() < nterms && tries < 50 * (nterms + 1) {
        tries += 1;
        let e = random_exp(r, nvars, min_deg, trunc);
        if keep(&e) && s.coeff(&e) == Coeff::from_int(0) {
            s.add_term(e, &small_rat(r));
        }
    }
    s
}

/// `f` with `f(0, w)` of exact order `k` and leading coefficient `lead`.
pub fn random_order_k<R: Rng>(r: &mut R, nvars: usize, trunc: usize, k: usize, lead: Coeff, nterms: usize) -> Series {
    let w = nvars - 1;
    let mut s = random_series(r, nvars, trunc, nterms, 0, |e| e.z_degree() > 0 || e.w_exp() as usize > k);
    s.add_term(MultiIndex::unit(nvars, w).with(w, k as u32), &lead);
    s
}

/// Random `w ↦ w + h(z, w)` with `h` vanishing on `z = 0`; jet-invertible.
pub fn random_w_change<R: Rng>(r: &mut R, nvars: usize, trunc: usize, nterms: usize) -> CoordinateChange {
    let h = random_series(r, nvars, trunc, nterms, 1, |e| e.z_degree() > 0 && e.degree() >= 2);
    CoordinateChange::w_only(&Series::w(nvars, trunc) + &h).unwrap()
}

pub fn random_unit<R: Rng>(r: &mut R, nvars: usize, trunc: usize, nterms: usize) -> Series {
    &Series::one(nvars, trunc) + &random_series(r, nvars, trunc, nterms, 1, |_| true)
}

/// An integrable 1-form `u · Φ*dF` whose dw-coefficient has order `k` on the w-axis.
pub fn random_integrable<R: Rng>(r: &mut R, n: usize, trunc: usize, k: usize) -> OneForm {
    let nv = n + 1;
    if n == 1 && r.gen_bool(0.5) {
        let p = random_series(r, nv, trunc, 6, 1, |_| true);
        let q = random_order_k(r, nv, trunc, k, Coeff::from_int(1), 6);
        return OneForm::new(vec![p], q).unwrap();
    }
    let wv = n;
    let mut f = Series::monomial(nv, trunc, MultiIndex::unit(nv, wv).with(wv, k as u32 + 1), Coeff::frac(1, k as i64 + 1));
    for j in 0..=k as u32 {
        let fj = random_series(r, nv, trunc, 3, if j == 0 { 2 } else { 1 }, |e| e.w_exp() == 0);
        f = &f + &fj.mul_monomial(&MultiIndex::unit(nv, wv).with(wv, j));
    }
    let phi = random_w_change(r, nv, trunc, 3);
    let u = random_unit(r, nv, trunc, 3);
    let base = OneForm::exact(&phi.apply(&f).unwrap());
    base.scale_by(&u)
}

pub fn random_linear<R: Rng>(r: &mut R) -> [[Coeff; 2]; 2] {
    let mut pick = || {
        let v = r.gen_range(-3i64..=3);
        Coeff::frac(v, r.gen_range(1i64..=2))
    };
    [[pick(), pick()], [pick(), pick()]]
}

/// Random planar field with a non-radial linear part. Every tenth one has
/// the nilpotent linear part `y∂x`.
pub fn random_field<R: Rng>(r: &mut R, trunc: usize, idx: usize) -> VectorField2 {
    loop {
        let m = if idx.is_multiple_of(10) {
            [[Coeff::from_int(0), Coeff::from_int(1)], [Coeff::from_int(0), Coeff::from_int(0)]]
        } else {
            random_linear(r)
        };
        let radial = m[0][1] == Coeff::from_int(0) && m[1][0] == Coeff::from_int(0) && m[0][0] == m[1][1];
        if radial {
            continue;
        }
        let lin = |row: &[Coeff; 2]| {
            Series::from_terms(2, trunc, [(vec![1, 0], row[0].clone()), (vec![0, 1], row[1].clone())])
        };
        let px = &lin(&m[0]) + &random_series(r, 2, trunc, 5, 2, |_| true);
        let py = &lin(&m[1]) + &random_series(r, 2, trunc, 5, 2, |_| true);
        return VectorField2::new(px, py).unwrap();
    }
}
