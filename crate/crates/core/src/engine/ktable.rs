use std::collections::BTreeMap;

use crate::algebra::{HalfPowerSeries, SparsePoly, Symbol};

use super::EngineError;

/// Power `p` of `n^(-p/2)` at which `k_{j,l}` enters the `j`-th cumulant.
pub fn k_power(j: u8, l: u8) -> i32 {
    i32::from(j) - 2 + 2 * (i32::from(l) - 1)
}

/// Coefficients `k_{j,l}` of the sampling cumulants
/// `kappa_j = n^(-(j-2)/2) (k_{j,1} + n^(-1) k_{j,2} + ...)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct KTable {
    order: u32,
    entries: BTreeMap<(u8, u8), SparsePoly>,
}

impl KTable {
    pub fn new(order: u32) -> Self {
        KTable { order, entries: BTreeMap::new() }
    }

    /// Table whose entries are the formal symbols `k[j,l]`.
    pub fn formal(order: u32) -> Self {
        let mut t = KTable::new(order);
        for (j, l) in Self::required(order) {
            if (j, l) != (1, 1) {
                t.insert(j, l, SparsePoly::var(Symbol::Cumulant(j, l)));
            }
        }
        t
    }

    /// All `(j, l)` that contribute through `n^(-order/2)`.
    pub fn required(order: u32) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        for j in 1..=(order as u8 + 2) {
            let mut l = 1u8;
            while k_power(j, l) <= order as i32 {
                out.push((j, l));
                l += 1;
            }
        }
        out
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn insert(&mut self, j: u8, l: u8, value: SparsePoly) {
        if value.is_zero() {
            self.entries.remove(&(j, l));
        } else {
            self.entries.insert((j, l), value);
        }
    }

    /// Entry `k_{j,l}`; absent entries are zero.
    pub fn get(&self, j: u8, l: u8) -> SparsePoly {
        self.entries.get(&(j, l)).cloned().unwrap_or_default()
    }

    /// Nonzero entries in `(j, l)` order.
    pub fn entries(&self) -> impl Iterator<Item = ((u8, u8), &SparsePoly)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn map(&self, f: impl Fn(&SparsePoly) -> Result<SparsePoly, EngineError>) -> Result<KTable, EngineError> {
        let mut out = KTable::new(self.order);
        for (&(j, l), v) in &self.entries {
            out.insert(j, l, f(v)?);
        }
        Ok(out)
    }
}

/// Reads `k_{j,l}` off the cumulant series `kappa_1..kappa_{order+2}`.
///
/// Every coefficient must sit at `p = (j - 2) + 2(l - 1)` for some `l >= 1`;
/// anything else is an upstream error.
pub fn extract_k_table(cumulants: &[HalfPowerSeries<SparsePoly>], order: u32) -> Result<KTable, EngineError> {
    if cumulants.len() < order as usize + 2 {
        return Err(EngineError::Inconsistent(format!(
            "{} cumulant series supplied, {} required",
            cumulants.len(),
            order + 2
        )));
    }
    let mut table = KTable::new(order);
    for (idx, kappa) in cumulants.iter().take(order as usize + 2).enumerate() {
        let j = idx as u8 + 1;
        for (p, c) in kappa.terms() {
            let offset = p - (i32::from(j) - 2);
            if offset < 0 || offset % 2 != 0 {
                return Err(EngineError::StructuralZero { j, p, coefficient: c.to_string() });
            }
            if p <= order as i32 {
                table.insert(j, (offset / 2 + 1) as u8, c.clone());
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_entries() {
        assert_eq!(KTable::required(1), vec![(1, 1), (1, 2), (2, 1), (3, 1)]);
        let r2 = KTable::required(2);
        assert!(r2.contains(&(2, 2)) && r2.contains(&(4, 1)) && !r2.contains(&(1, 3)));
    }

    #[test]
    fn misplaced_coefficient_is_rejected() {
        let mut k3 = HalfPowerSeries::zero(2);
        k3.add_at(0, SparsePoly::one());
        let zero = HalfPowerSeries::zero(2);
        let err = extract_k_table(&[zero.clone(), zero.clone(), k3, zero], 2).unwrap_err();
        assert!(matches!(err, EngineError::StructuralZero { j: 3, p: 0, .. }));
    }
}
