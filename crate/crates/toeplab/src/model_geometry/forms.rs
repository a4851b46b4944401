//! Differential forms on R^{2N} with polynomial coefficients.
//!
//! Real coordinates are interleaved with the complex ones:
//! z_j = x_{2j} + i x_{2j+1}. Basis covectors are encoded as bit masks
//! (bit i ↔ dx_i), always in increasing index order, so canonicalization is
//! automatic and the exterior derivative is exact.

use crate::error::{LabError, Result};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Sign of dx_{mask_a} ∧ dx_{mask_b} relative to dx_{mask_a | mask_b}
/// (zero when the masks overlap).
#[inline]
pub fn wedge_sign(a: u32, b: u32) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inv += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Pointwise value of a (possibly inhomogeneous) form: one complex
/// component per covector mask.
#[derive(Clone, Debug, PartialEq)]
pub struct FormValue {
    dim: usize,
    comps: Vec<C64>,
}

impl FormValue {
    pub fn zero(dim: usize) -> Self {
        assert!(
            dim <= 12,
            "ambient dimension too large for dense form values"
        );
        Self {
            dim,
            comps: vec![C64::new(0.0, 0.0); 1 << dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 1-form value from real-coordinate components.
    pub fn from_covector(c: &[C64]) -> Self {
        let mut v = Self::zero(c.len());
        for (i, ci) in c.iter().enumerate() {
            v.comps[1 << i] = *ci;
        }
        v
    }

    /// Σ_j a_j dz_j as a 1-form value.
    pub fn from_dz(a: &[C64]) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); 2 * a.len()];
        for (j, aj) in a.iter().enumerate() {
            c[2 * j] = *aj;
            c[2 * j + 1] = *aj * I;
        }
        Self::from_covector(&c)
    }

    /// Σ_j a_j dz̄_j as a 1-form value.
    pub fn from_dzbar(a: &[C64]) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); 2 * a.len()];
        for (j, aj) in a.iter().enumerate() {
            c[2 * j] = *aj;
            c[2 * j + 1] = -*aj * I;
        }
        Self::from_covector(&c)
    }

    /// i Σ_{jl} h_{jl} dz_j ∧ dz̄_l for an N×N matrix given row-major.
    pub fn from_hermitian_11(h: &[C64], n: usize) -> Self {
        let mut out = Self::zero(2 * n);
        for j in 0..n {
            let mut aj = vec![C64::new(0.0, 0.0); n];
            aj[j] = C64::new(1.0, 0.0);
            let dzj = Self::from_dz(&aj);
            for l in 0..n {
                let mut al = vec![C64::new(0.0, 0.0); n];
                al[l] = h[j * n + l] * I;
                out = out.add(&dzj.wedge(&Self::from_dzbar(&al)));
            }
        }
        out
    }

    pub fn get(&self, mask: u32) -> C64 {
        self.comps[mask as usize]
    }

    pub fn set(&mut self, mask: u32, v: C64) {
        self.comps[mask as usize] = v;
    }

    pub fn comps(&self) -> &[C64] {
        &self.comps
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            comps: self.comps.iter().map(|a| a * s).collect(),
        }
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (a, ca) in self.comps.iter().enumerate() {
            if ca.re == 0.0 && ca.im == 0.0 {
                continue;
            }
            for (b, cb) in other.comps.iter().enumerate() {
                if cb.re == 0.0 && cb.im == 0.0 {
                    continue;
                }
                let s = wedge_sign(a as u32, b as u32);
                if s != 0 {
                    out.comps[a | b] += ca * cb * s as f64;
                }
            }
        }
        out
    }

    /// Density of a top-degree form on the unit sphere with respect to the
    /// round measure, for the orientation whose outward normal comes first:
    /// Σ_i (−1)^i ω_{(all but i)} x_i.
    pub fn sphere_density(&self, x: &[f64]) -> C64 {
        let full = (1u32 << self.dim) - 1;
        let mut acc = C64::new(0.0, 0.0);
        for (i, xi) in x.iter().enumerate() {
            let c = self.comps[(full & !(1 << i)) as usize];
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += c * (s * xi);
        }
        acc
    }

    /// Density of a top-degree form with respect to Lebesgue measure.
    pub fn volume_density(&self) -> C64 {
        self.comps[(1usize << self.dim) - 1]
    }

    /// Evaluate the degree-p part on p real vectors.
    pub fn on_vectors(&self, vs: &[&[f64]]) -> C64 {
        let p = vs.len();
        let mut acc = C64::new(0.0, 0.0);
        for (mask, c) in self.comps.iter().enumerate() {
            if (mask as u32).count_ones() as usize != p || (c.re == 0.0 && c.im == 0.0) {
                continue;
            }
            let idx: Vec<usize> = (0..self.dim).filter(|i| mask & (1 << i) != 0).collect();
            let mut m = vec![0.0; p * p];
            for (r, &i) in idx.iter().enumerate() {
                for (col, v) in vs.iter().enumerate() {
                    m[r * p + col] = v[i];
                }
            }
            acc += c * det(&mut m, p);
        }
        acc
    }
}

fn det(m: &mut [f64], p: usize) -> f64 {
    let mut d = 1.0;
    for c in 0..p {
        let piv = (c..p)
            .max_by(|&a, &b| m[a * p + c].abs().total_cmp(&m[b * p + c].abs()))
            .unwrap_or(c);
        if m[piv * p + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for k in 0..p {
                m.swap(piv * p + k, c * p + k);
            }
            d = -d;
        }
        d *= m[c * p + c];
        for r in (c + 1)..p {
            let f = m[r * p + c] / m[c * p + c];
            for k in c..p {
                m[r * p + k] -= f * m[c * p + k];
            }
        }
    }
    d
}

/// A differential form on R^{2N} whose coefficients are polynomials in the
/// real coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPolyForm {
    dim: usize,
    terms: BTreeMap<(Vec<u16>, u32), C64>,
}

impl AmbientPolyForm {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Ambient real dimension 2N.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Complex dimension N = n + 1.
    pub fn complex_dim(&self) -> usize {
        self.dim / 2
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::term(dim, vec![0; dim], 0, c)
    }

    /// A single monomial term c · x^exps dx_mask.
    pub fn term(dim: usize, exps: Vec<u16>, mask: u32, c: C64) -> Self {
        assert_eq!(exps.len(), dim);
        let mut f = Self::zero(dim);
        if c != C64::new(0.0, 0.0) {
            f.terms.insert((exps, mask), c);
        }
        f
    }

    /// The coordinate function x_i.
    pub fn coord(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::term(dim, e, 0, C64::new(1.0, 0.0))
    }

    /// The covector dx_i.
    pub fn dx(dim: usize, i: usize) -> Self {
        Self::term(dim, vec![0; dim], 1 << i, C64::new(1.0, 0.0))
    }

    /// z_j = x_{2j} + i x_{2j+1}.
    pub fn z(dim: usize, j: usize) -> Self {
        &Self::coord(dim, 2 * j) + &(&Self::coord(dim, 2 * j + 1) * I)
    }

    /// z̄_j.
    pub fn zbar(dim: usize, j: usize) -> Self {
        &Self::coord(dim, 2 * j) - &(&Self::coord(dim, 2 * j + 1) * I)
    }

    /// dz_j.
    pub fn dz(dim: usize, j: usize) -> Self {
        &Self::dx(dim, 2 * j) + &(&Self::dx(dim, 2 * j + 1) * I)
    }

    /// dz̄_j.
    pub fn dzbar(dim: usize, j: usize) -> Self {
        &Self::dx(dim, 2 * j) - &(&Self::dx(dim, 2 * j + 1) * I)
    }

    /// The contact-form primitive ξ = Σ_j x_{2j} dx_{2j+1} − x_{2j+1} dx_{2j}
    /// (restricts to the contact form of the unit sphere).
    pub fn contact_xi(dim: usize) -> Self {
        let mut f = Self::zero(dim);
        for j in 0..dim / 2 {
            f = &f + &(&Self::coord(dim, 2 * j) * &Self::dx(dim, 2 * j + 1));
            f = &f - &(&Self::coord(dim, 2 * j + 1) * &Self::dx(dim, 2 * j));
        }
        f
    }

    /// Degree if homogeneous (None for the zero form or mixed degrees).
    pub fn degree(&self) -> Option<usize> {
        let mut d = None;
        for (_, mask) in self.terms.keys() {
            let p = mask.count_ones() as usize;
            match d {
                None => d = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        d
    }

    /// Fail unless the form is homogeneous of degree `p` (the zero form passes).
    pub fn expect_degree(&self, p: usize) -> Result<()> {
        if self.is_zero() {
            return Ok(());
        }
        match self.degree() {
            Some(q) if q == p => Ok(()),
            Some(q) => Err(LabError::FormDegree {
                expected: p,
                got: q,
            }),
            None => Err(LabError::FormDegree {
                expected: p,
                got: usize::MAX,
            }),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, u32, C64)> {
        self.terms.iter().map(|((e, m), c)| (e, *m, *c))
    }

    fn insert_add(&mut self, key: (Vec<u16>, u32), c: C64) {
        let e = self.terms.entry(key).or_insert(C64::new(0.0, 0.0));
        *e += c;
    }

    fn cleaned(mut self) -> Self {
        let max = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = 1e-14 * max;
        self.terms.retain(|_, c| c.norm() > floor);
        self
    }

    /// Exterior derivative (exact, symbolic).
    pub fn d(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for ((exps, mask), c) in &self.terms {
            for i in 0..self.dim {
                if exps[i] == 0 || mask & (1 << i) != 0 {
                    continue;
                }
                let mut e = exps.clone();
                e[i] -= 1;
                let s = wedge_sign(1 << i, *mask) as f64;
                out.insert_add((e, mask | (1 << i)), c * (exps[i] as f64 * s));
            }
        }
        out.cleaned()
    }

    /// Coefficient-wise partial derivative ∂/∂x_i.
    pub fn partial_x(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for ((exps, mask), c) in &self.terms {
            if exps[i] == 0 {
                continue;
            }
            let mut e = exps.clone();
            e[i] -= 1;
            out.insert_add((e, *mask), c * exps[i] as f64);
        }
        out.cleaned()
    }

    /// Coefficient-wise ∂/∂z_j = (∂/∂x_{2j} − i ∂/∂x_{2j+1})/2.
    pub fn partial_z(&self, j: usize) -> Self {
        &(&self.partial_x(2 * j) - &(&self.partial_x(2 * j + 1) * I)) * C64::new(0.5, 0.0)
    }

    /// Coefficient-wise ∂/∂z̄_j = (∂/∂x_{2j} + i ∂/∂x_{2j+1})/2.
    pub fn partial_zbar(&self, j: usize) -> Self {
        &(&self.partial_x(2 * j) + &(&self.partial_x(2 * j + 1) * I)) * C64::new(0.5, 0.0)
    }

    /// ∂ψ = Σ_j dz_j ∧ ∂ψ/∂z_j.
    pub fn del(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for j in 0..self.complex_dim() {
            out = &out + &(&Self::dz(self.dim, j) * &self.partial_z(j));
        }
        out.cleaned()
    }

    /// ∂̄ψ = Σ_j dz̄_j ∧ ∂ψ/∂z̄_j.
    pub fn delbar(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for j in 0..self.complex_dim() {
            out = &out + &(&Self::dzbar(self.dim, j) * &self.partial_zbar(j));
        }
        out.cleaned()
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for ((ea, ma), ca) in &self.terms {
            for ((eb, mb), cb) in &other.terms {
                let s = wedge_sign(*ma, *mb);
                if s == 0 {
                    continue;
                }
                let e: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_add((e, ma | mb), ca * cb * s as f64);
            }
        }
        out.cleaned()
    }

    /// Pointwise value at a real point.
    pub fn eval(&self, x: &[f64]) -> FormValue {
        assert_eq!(x.len(), self.dim);
        let mut v = FormValue::zero(self.dim);
        for ((exps, mask), c) in &self.terms {
            let mut m = 1.0;
            for (xi, &e) in x.iter().zip(exps) {
                if e > 0 {
                    m *= xi.powi(e as i32);
                }
            }
            v.comps[*mask as usize] += c * m;
        }
        v
    }

    /// Supremum over `nodes` of all coefficient derivatives up to `order`
    /// (a C^order norm proxy; exact enough for polynomial coefficients
    /// sampled on a quadrature grid).
    pub fn c_norm(&self, order: usize, nodes: &[Vec<f64>]) -> f64 {
        let mut level = vec![self.clone()];
        let mut all = vec![self.clone()];
        for _ in 0..order {
            let mut next = Vec::new();
            for f in &level {
                for i in 0..self.dim {
                    let g = f.partial_x(i);
                    if !g.is_zero() {
                        next.push(g);
                    }
                }
            }
            all.extend(next.iter().cloned());
            level = next;
        }
        let mut sup: f64 = 0.0;
        for x in nodes {
            for f in &all {
                for c in f.eval(x).comps() {
                    sup = sup.max(c.norm());
                }
            }
        }
        sup
    }

    /// Complex conjugate form (conjugates the scalar coefficients; the real
    /// basis is self-conjugate).
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.conj();
        }
        out
    }
}

impl Add for &AmbientPolyForm {
    type Output = AmbientPolyForm;
    fn add(self, rhs: Self) -> AmbientPolyForm {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert_add(k.clone(), *c);
        }
        out.cleaned()
    }
}

impl Sub for &AmbientPolyForm {
    type Output = AmbientPolyForm;
    fn sub(self, rhs: Self) -> AmbientPolyForm {
        self + &(-rhs)
    }
}

impl Neg for &AmbientPolyForm {
    type Output = AmbientPolyForm;
    fn neg(self) -> AmbientPolyForm {
        self * C64::new(-1.0, 0.0)
    }
}

impl Mul<C64> for &AmbientPolyForm {
    type Output = AmbientPolyForm;
    fn mul(self, s: C64) -> AmbientPolyForm {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.cleaned()
    }
}

impl Mul<f64> for &AmbientPolyForm {
    type Output = AmbientPolyForm;
    fn mul(self, s: f64) -> AmbientPolyForm {
        self * C64::new(s, 0.0)
    }
}

/// Product of forms is the wedge product (functions are 0-forms).
impl Mul for &AmbientPolyForm {
    type Output = AmbientPolyForm;
    fn mul(self, rhs: Self) -> AmbientPolyForm {
        self.wedge(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_sign_matches_transpositions() {
        assert_eq!(wedge_sign(0b01, 0b10), 1);
        assert_eq!(wedge_sign(0b10, 0b01), -1);
        assert_eq!(wedge_sign(0b100, 0b011), 1);
        assert_eq!(wedge_sign(0b01, 0b01), 0);
    }

    #[test]
    fn dz_wedge_dzbar_is_minus_two_i_dx_dy() {
        let f = &AmbientPolyForm::dz(4, 1) * &AmbientPolyForm::dzbar(4, 1);
        let v = f.eval(&[0.0; 4]);
        assert_eq!(v.get(0b1100), C64::new(0.0, -2.0));
    }

    #[test]
    fn type_vanishing() {
        let dim = 4;
        let f = &AmbientPolyForm::z(dim, 0) * &AmbientPolyForm::dz(dim, 1);
        assert!(f.delbar().is_zero());
        let g = &AmbientPolyForm::zbar(dim, 0) * &AmbientPolyForm::dzbar(dim, 1);
        assert!(g.del().is_zero());
    }

    #[test]
    fn d_is_del_plus_delbar() {
        let dim = 4;
        let f = &(&AmbientPolyForm::z(dim, 0) * &AmbientPolyForm::zbar(dim, 1))
            * &AmbientPolyForm::dz(dim, 0);
        assert_eq!(f.d(), &f.del() + &f.delbar());
    }
}
