//! Ordered eigenvalue lists with multiplicities.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Indexing convention of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Closed manifold: `λ₀ = 0` is the first eigenvalue.
    Closed,
    /// Dirichlet problem: indexing starts at `λ₁`.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub convention: Convention,
    pub dimension: usize,
    pub entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    /// Builds a spectrum from already merged entries, checking the ordering invariants.
    pub fn new(convention: Convention, dimension: usize, entries: Vec<SpectrumEntry>) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::domain(format!("spectrum dimension {dimension} < 2")));
        }
        for w in entries.windows(2) {
            if !(w[1].eigenvalue > w[0].eigenvalue) {
                return Err(Error::invalid(format!(
                    "eigenvalues not strictly increasing: {} then {}",
                    w[0].eigenvalue, w[1].eigenvalue
                )));
            }
        }
        if entries.iter().any(|e| e.multiplicity == 0 || !e.eigenvalue.is_finite()) {
            return Err(Error::invalid("zero multiplicity or non-finite eigenvalue"));
        }
        if convention == Convention::Closed {
            match entries.first() {
                Some(e) if e.eigenvalue == 0.0 && e.multiplicity == 1 => {}
                Some(e) => {
                    return Err(Error::invalid(format!(
                        "closed spectrum must start with (0, 1), got ({}, {})",
                        e.eigenvalue, e.multiplicity
                    )))
                }
                None => return Err(Error::invalid("empty closed spectrum")),
            }
        }
        Ok(Spectrum { convention, dimension, entries })
    }

    /// Sorts `(value, multiplicity)` pairs and merges values whose relative
    /// distance is at most `rel_tol`. Merged values are multiplicity-weighted means.
    pub fn from_unsorted(
        convention: Convention,
        dimension: usize,
        mut raw: Vec<(f64, usize)>,
        rel_tol: f64,
    ) -> Result<Self> {
        raw.retain(|&(_, m)| m > 0);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut entries: Vec<SpectrumEntry> = Vec::new();
        // Each cluster is anchored at its smallest member so chains of
        // near-equal values do not drift.
        let mut anchor = f64::NAN;
        let mut sum = 0.0;
        for (value, mult) in raw {
            let scale = anchor.abs().max(value.abs()).max(1.0);
            if let Some(last) = entries.last_mut() {
                if (value - anchor).abs() <= rel_tol * scale {
                    sum += value * mult as f64;
                    last.multiplicity += mult;
                    last.eigenvalue = sum / last.multiplicity as f64;
                    continue;
                }
            }
            anchor = value;
            sum = value * mult as f64;
            entries.push(SpectrumEntry { eigenvalue: value, multiplicity: mult });
        }
        if convention == Convention::Closed {
            if let Some(first) = entries.first_mut() {
                if first.eigenvalue.abs() <= rel_tol {
                    first.eigenvalue = 0.0;
                }
            }
        }
        Spectrum::new(convention, dimension, entries)
    }

    /// Eigenvalues repeated by multiplicity, in ascending order.
    pub fn flatten(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.eigenvalue, e.multiplicity))
            .collect()
    }

    /// Total number of eigenvalues counted with multiplicity.
    pub fn len(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the first eigenvalue under this convention.
    pub fn first_index(&self) -> usize {
        match self.convention {
            Convention::Closed => 0,
            Convention::Dirichlet => 1,
        }
    }

    /// `λ_index` under the spectrum's own indexing convention.
    pub fn eigenvalue(&self, index: usize) -> Option<f64> {
        let offset = index.checked_sub(self.first_index())?;
        let mut seen = 0;
        for e in &self.entries {
            seen += e.multiplicity;
            if offset < seen {
                return Some(e.eigenvalue);
            }
        }
        None
    }

    /// Largest index available under this convention.
    pub fn last_index(&self) -> Option<usize> {
        let len = self.len();
        (len > 0).then(|| len - 1 + self.first_index())
    }

    /// Keeps only the first `count` eigenvalues counted with multiplicity;
    /// the last entry may lose part of its multiplicity.
    pub fn truncate_flat(&self, count: usize) -> Spectrum {
        let mut left = count;
        let mut entries = Vec::new();
        for e in &self.entries {
            if left == 0 {
                break;
            }
            let m = e.multiplicity.min(left);
            entries.push(SpectrumEntry { eigenvalue: e.eigenvalue, multiplicity: m });
            left -= m;
        }
        Spectrum { convention: self.convention, dimension: self.dimension, entries }
    }

    /// Multiplies every eigenvalue by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Spectrum {
        let entries = self
            .entries
            .iter()
            .map(|e| SpectrumEntry { eigenvalue: e.eigenvalue * factor, multiplicity: e.multiplicity })
            .collect();
        Spectrum { convention: self.convention, dimension: self.dimension, entries }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["eigenvalue", "multiplicity"])?;
        for e in &self.entries {
            w.write_record([format!("{}", e.eigenvalue), e.multiplicity.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_indexing_starts_at_zero() {
        let s = Spectrum::from_unsorted(Convention::Closed, 3, vec![(3.0, 4), (0.0, 1), (8.0, 9)], 1e-9).unwrap();
        assert_eq!(s.eigenvalue(0), Some(0.0));
        assert_eq!(s.eigenvalue(4), Some(3.0));
        assert_eq!(s.eigenvalue(5), Some(8.0));
        assert_eq!(s.eigenvalue(14), None);
        assert_eq!(s.last_index(), Some(13));
    }

    #[test]
    fn dirichlet_indexing_starts_at_one() {
        let s = Spectrum::from_unsorted(Convention::Dirichlet, 2, vec![(2.0, 1), (5.0, 2)], 1e-9).unwrap();
        assert_eq!(s.eigenvalue(0), None);
        assert_eq!(s.eigenvalue(1), Some(2.0));
        assert_eq!(s.eigenvalue(3), Some(5.0));
        assert_eq!(s.flatten(), vec![2.0, 5.0, 5.0]);
    }

    #[test]
    fn merges_near_equal_values() {
        let s = Spectrum::from_unsorted(
            Convention::Closed,
            3,
            vec![(1e-14, 1), (3.0, 1), (3.0 + 1e-9, 3)],
            1e-6,
        )
        .unwrap();
        assert_eq!(s.entries.len(), 2);
        assert_eq!(s.entries[0].eigenvalue, 0.0);
        assert_eq!(s.entries[1].multiplicity, 4);
    }

    #[test]
    fn closed_requires_simple_zero() {
        assert!(Spectrum::new(
            Convention::Closed,
            3,
            vec![SpectrumEntry { eigenvalue: 0.0, multiplicity: 2 }]
        )
        .is_err());
        assert!(Spectrum::new(Convention::Closed, 3, vec![]).is_err());
    }

    #[test]
    fn truncation_cuts_multiplicity() {
        let s = Spectrum::from_unsorted(Convention::Closed, 3, vec![(0.0, 1), (3.0, 4), (8.0, 9)], 1e-9).unwrap();
        let t = s.truncate_flat(3);
        assert_eq!(t.len(), 3);
        assert_eq!(t.entries[1].multiplicity, 2);
    }
}
