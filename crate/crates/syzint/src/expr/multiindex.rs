use std::cmp::Ordering;
use std::fmt;

/// Sparse exponent vector over variable indices.
///
/// Used both as a derivative multi-index (`f_J`) and as a monomial exponent
/// vector inside [`Poly`](super::Poly). Entries are sorted by variable index
/// and never zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(Vec<(usize, u32)>);

/// Monomials and multi-indices share one representation.
pub type Monomial = MultiIndex;

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn single(v: usize) -> Self {
        MultiIndex(vec![(v, 1)])
    }

    pub fn power(v: usize, k: u32) -> Self {
        if k == 0 {
            Self::zero()
        } else {
            MultiIndex(vec![(v, k)])
        }
    }

    /// Build from a list of variables, counting repeats (`[x, x, y]` is `xxy`).
    pub fn from_vars(vars: &[usize]) -> Self {
        let mut out = Self::zero();
        for &v in vars {
            out = out.add_var(v, 1);
        }
        out
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut out = Self::zero();
        for (v, k) in pairs {
            out = out.add_var(v, k);
        }
        out
    }

    pub fn get(&self, v: usize) -> u32 {
        match self.0.binary_search_by_key(&v, |p| p.0) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|p| p.1).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().copied()
    }

    /// Variables with a nonzero entry, ascending.
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|p| p.0)
    }

    /// Expanded variable list, e.g. `xxy` gives `[x, x, y]`.
    pub fn expanded(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total() as usize);
        for &(v, k) in &self.0 {
            for _ in 0..k {
                out.push(v);
            }
        }
        out
    }

    pub fn add_var(&self, v: usize, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        let mut e = self.0.clone();
        match e.binary_search_by_key(&v, |p| p.0) {
            Ok(i) => e[i].1 += k,
            Err(i) => e.insert(i, (v, k)),
        }
        MultiIndex(e)
    }

    /// Lower the entry for `v` by one; `None` if it is already zero.
    pub fn sub_var(&self, v: usize) -> Option<Self> {
        let i = self.0.binary_search_by_key(&v, |p| p.0).ok()?;
        let mut e = self.0.clone();
        if e[i].1 == 1 {
            e.remove(i);
        } else {
            e[i].1 -= 1;
        }
        Some(MultiIndex(e))
    }

    /// Drop variable `v` entirely.
    pub fn without(&self, v: usize) -> Self {
        MultiIndex(self.0.iter().copied().filter(|p| p.0 != v).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for &(v, k) in &other.0 {
            out = out.add_var(v, k);
        }
        out
    }

    /// Componentwise difference, `None` unless `other` divides `self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::new();
        for &(v, k) in &self.0 {
            let o = other.get(v);
            if o > k {
                return None;
            }
            if k > o {
                out.push((v, k - o));
            }
        }
        for &(v, _) in &other.0 {
            if self.get(v) == 0 {
                return None;
            }
        }
        Some(MultiIndex(out))
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().all(|&(v, k)| other.get(v) >= k)
    }

    pub fn lcm(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for &(v, k) in &other.0 {
            let have = out.get(v);
            if k > have {
                out = out.add_var(v, k - have);
            }
        }
        out
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|p| p.0)
    }
}

impl Ord for MultiIndex {
    /// Graded reverse lexicographic on variable indices: higher total first,
    /// ties broken by the smaller exponent on the highest-index variable.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total().cmp(&other.total()) {
            Ordering::Equal => {}
            o => return o,
        }
        let mut vars: Vec<usize> = self.vars().chain(other.vars()).collect();
        vars.sort_unstable();
        vars.dedup();
        for &v in vars.iter().rev() {
            let (a, b) = (self.get(v), other.get(v));
            if a != b {
                return b.cmp(&a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (v, k)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}^{k}")?;
        }
        write!(f, "]")
    }
}
