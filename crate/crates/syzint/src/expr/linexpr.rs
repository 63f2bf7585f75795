use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Neg, Sub};

use num_rational::BigRational;
use num_traits::Zero;

use super::multiindex::MultiIndex;
use super::poly::Poly;
use super::registry::Registry;
use crate::Error;

/// Which kind of symbol a [`LinExpr`] is linear in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    Functions,
    EquationLabels,
}

/// A symbol together with a derivative multi-index, e.g. `f_xyz` or `e2_yzz`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Deriv {
    pub sym: usize,
    pub idx: MultiIndex,
}

impl Deriv {
    pub fn new(sym: usize, idx: MultiIndex) -> Self {
        Deriv { sym, idx }
    }

    pub fn plain(sym: usize) -> Self {
        Deriv {
            sym,
            idx: MultiIndex::zero(),
        }
    }
}

/// Linear homogeneous combination of derivatives with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinExpr {
    ns: Namespace,
    terms: BTreeMap<Deriv, Poly>,
}

impl LinExpr {
    pub fn zero(ns: Namespace) -> Self {
        LinExpr {
            ns,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(ns: Namespace, d: Deriv, coeff: Poly) -> Self {
        let mut e = Self::zero(ns);
        e.add_term(d, coeff);
        e
    }

    /// The bare symbol with coefficient one.
    pub fn symbol(ns: Namespace, sym: usize) -> Self {
        Self::term(ns, Deriv::plain(sym), Poly::one())
    }

    pub fn namespace(&self) -> Namespace {
        self.ns
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Deriv, &Poly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, d: &Deriv) -> Option<&Poly> {
        self.terms.get(d)
    }

    pub fn add_term(&mut self, d: Deriv, coeff: Poly) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(d) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn remove_term(&mut self, d: &Deriv) -> Option<Poly> {
        self.terms.remove(d)
    }

    /// `self + factor * other`, in place.
    pub fn add_scaled(&mut self, other: &LinExpr, factor: &Poly) {
        assert_eq!(self.ns, other.ns, "namespace mismatch");
        if factor.is_zero() {
            return;
        }
        for (d, c) in &other.terms {
            self.add_term(d.clone(), c * factor);
        }
    }

    pub fn checked_add(&self, other: &LinExpr) -> Result<LinExpr, Error> {
        if self.ns != other.ns {
            return Err(Error::NamespaceMismatch);
        }
        let mut out = self.clone();
        out.add_scaled(other, &Poly::one());
        Ok(out)
    }

    pub fn scale(&self, p: &Poly) -> LinExpr {
        let mut out = LinExpr::zero(self.ns);
        if p.is_zero() {
            return out;
        }
        for (d, c) in &self.terms {
            out.add_term(d.clone(), c * p);
        }
        out
    }

    pub fn scale_q(&self, q: &BigRational) -> LinExpr {
        if q.is_zero() {
            return LinExpr::zero(self.ns);
        }
        LinExpr {
            ns: self.ns,
            terms: self
                .terms
                .iter()
                .map(|(d, c)| (d.clone(), c.scale(q)))
                .collect(),
        }
    }

    pub fn symbols(&self) -> BTreeSet<usize> {
        self.terms.keys().map(|d| d.sym).collect()
    }

    pub fn contains_symbol(&self, sym: usize) -> bool {
        self.terms.keys().any(|d| d.sym == sym)
    }

    /// Terms of one symbol only.
    pub fn restrict(&self, keep: impl Fn(&Deriv) -> bool) -> LinExpr {
        LinExpr {
            ns: self.ns,
            terms: self
                .terms
                .iter()
                .filter(|(d, _)| keep(d))
                .map(|(d, c)| (d.clone(), c.clone()))
                .collect(),
        }
    }

    /// Variables occurring in coefficients or as dependencies of symbols.
    pub fn variables(&self, reg: &Registry) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (d, c) in &self.terms {
            out.extend(reg.deps(self.ns, d.sym));
            out.extend(c.vars());
        }
        out
    }

    /// Maximum derivative order over all terms.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|d| d.idx.total()).max().unwrap_or(0)
    }

    /// Equal up to an overall sign.
    pub fn same_up_to_sign(&self, other: &LinExpr) -> bool {
        self == other || *self == -other
    }

    /// `q` with `self = q * other`, for nonzero expressions.
    pub fn ratio_to(&self, other: &LinExpr) -> Option<BigRational> {
        let (d, p) = self.terms().next()?;
        let (e, r) = other.terms().next()?;
        let ((m, a), (n, b)) = (p.leading()?, r.leading()?);
        if d != e || m != n || self.len() != other.len() {
            return None;
        }
        let q = a / b;
        (other.scale_q(&q) == *self).then_some(q)
    }
}

impl Add<&LinExpr> for &LinExpr {
    type Output = LinExpr;
    /// Panics on namespace mismatch; see [`LinExpr::checked_add`].
    fn add(self, rhs: &LinExpr) -> LinExpr {
        self.checked_add(rhs).expect("namespace mismatch")
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(self, rhs: LinExpr) -> LinExpr {
        &self + &rhs
    }
}

impl Sub<&LinExpr> for &LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: &LinExpr) -> LinExpr {
        self + &(-rhs)
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        &self - &rhs
    }
}

impl Neg for &LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        LinExpr {
            ns: self.ns,
            terms: self.terms.iter().map(|(d, c)| (d.clone(), -c)).collect(),
        }
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        -&self
    }
}
