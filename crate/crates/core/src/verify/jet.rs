//! Truncated multivariate Taylor expansions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::nilalg::C64;

/// Multi-indices with `|α| ≤ deg` and the table of index sums that stay in range.
#[derive(Debug)]
pub struct JetLayout {
    d: usize,
    deg: usize,
    indices: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    products: Vec<(usize, usize, usize)>,
}

impl JetLayout {
    fn build(d: usize, deg: usize) -> Self {
        let mut indices = vec![vec![0u32; d]];
        for total in 1..=deg as u32 {
            let mut level = Vec::new();
            compositions(d, total, &mut vec![0; d], 0, &mut level);
            indices.extend(level);
        }
        let lookup: HashMap<Vec<u32>, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                let s: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = lookup.get(&s) {
                    products.push((i, j, k));
                }
            }
        }
        JetLayout {
            d,
            deg,
            indices,
            lookup,
            products,
        }
    }

    /// Shared layout for `(d, deg)`.
    pub fn get(d: usize, deg: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(l) = cache.lock().expect("layout cache").get(&(d, deg)) {
            return l.clone();
        }
        let built = Arc::new(JetLayout::build(d, deg));
        cache
            .lock()
            .expect("layout cache")
            .entry((d, deg))
            .or_insert(built)
            .clone()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

// Descending lexicographic within one total degree, so x_1 comes first.
fn compositions(d: usize, left: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<Vec<u32>>) {
    if pos == d - 1 {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        compositions(d, left - a, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

/// Taylor coefficients `∂^α f / α!` at a base point, truncated at total degree `deg`.
#[derive(Clone, Debug)]
pub struct MultiJet {
    layout: Arc<JetLayout>,
    coeffs: Vec<C64>,
}

impl PartialEq for MultiJet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.d == other.layout.d
            && self.layout.deg == other.layout.deg
            && self.coeffs == other.coeffs
    }
}

fn factorial_multi(alpha: &[u32]) -> f64 {
    alpha
        .iter()
        .map(|&a| (1..=a).map(f64::from).product::<f64>())
        .product()
}

impl MultiJet {
    pub fn constant(d: usize, deg: usize, c: C64) -> Self {
        let layout = JetLayout::get(d, deg);
        let mut coeffs = vec![C64::new(0.0, 0.0); layout.len()];
        coeffs[0] = c;
        MultiJet { layout, coeffs }
    }

    /// Jet of `value + Σ grad_j (x_j − x_j^0)`.
    pub fn affine(deg: usize, value: C64, grad: &[C64]) -> Self {
        let d = grad.len();
        let mut j = MultiJet::constant(d, deg, value);
        if deg >= 1 {
            for (i, g) in grad.iter().enumerate() {
                let mut e = vec![0u32; d];
                e[i] = 1;
                let pos = j.layout.position(&e).expect("degree-1 index");
                j.coeffs[pos] = *g;
            }
        }
        j
    }

    pub fn d(&self) -> usize {
        self.layout.d
    }

    pub fn deg(&self) -> usize {
        self.layout.deg
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// Taylor coefficient at `α`; zero beyond the truncation degree.
    pub fn coeff(&self, alpha: &[u32]) -> C64 {
        self.layout
            .position(alpha)
            .map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u32]) -> C64 {
        self.coeff(alpha) * factorial_multi(alpha)
    }

    fn check(&self, other: &MultiJet) -> Result<()> {
        if self.layout.d != other.layout.d || self.layout.deg != other.layout.deg {
            return Err(Error::Format("jets of different shape".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiJet) -> Result<MultiJet> {
        self.check(other)?;
        Ok(MultiJet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn add_assign(&mut self, other: &MultiJet) -> Result<()> {
        self.check(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&self, c: C64) -> MultiJet {
        MultiJet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &MultiJet) -> Result<MultiJet> {
        self.check(other)?;
        let mut coeffs = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        for &(i, j, k) in &self.layout.products {
            coeffs[k] += self.coeffs[i] * other.coeffs[j];
        }
        Ok(MultiJet {
            layout: self.layout.clone(),
            coeffs,
        })
    }

    /// `g ∘ self` where `taylor[j] = g^{(j)}(self(x^0)) / j!`.
    pub fn compose(&self, taylor: &[C64]) -> MultiJet {
        let mut shifted = self.clone();
        shifted.coeffs[0] = C64::new(0.0, 0.0);
        let top = taylor.len().min(self.layout.deg + 1);
        let mut acc = MultiJet::constant(self.d(), self.deg(), C64::new(0.0, 0.0));
        for j in (0..top).rev() {
            acc = acc.mul(&shifted).expect("same layout");
            acc.coeffs[0] += taylor[j];
        }
        acc
    }
}
