use std::collections::HashMap;

/// Exponent vector of a monomial.
pub type Exps = Vec<u16>;

/// Degree-`d` monomials in `nvars` variables, in lexicographic order with
/// the first exponent descending (`x0^d` first).
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u64,
    monos: Vec<Exps>,
    index: HashMap<Exps, usize>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: u64) -> Self {
        Self::filtered(nvars, degree, |_| true)
    }

    /// Only the monomials accepted by `keep`, in basis order.
    pub fn filtered(nvars: usize, degree: u64, keep: impl Fn(&[u16]) -> bool) -> Self {
        let mut monos = Vec::new();
        let mut cur = vec![0u16; nvars];
        enumerate(&mut cur, 0, degree as u16, &mut |e| {
            if keep(e) {
                monos.push(e.to_vec());
            }
        });
        let index = monos.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Self { nvars, degree, monos, index }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u16] {
        &self.monos[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Exps> {
        self.monos.iter()
    }

    pub fn index_of(&self, e: &[u16]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

fn enumerate(cur: &mut Vec<u16>, pos: usize, left: u16, f: &mut impl FnMut(&[u16])) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        f(cur);
        return;
    }
    if cur.is_empty() {
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e;
        enumerate(cur, pos + 1, left - e, f);
    }
    cur[pos] = 0;
}
